//! Explicit low-storage five-stage fourth-order Runge-Kutta loop with
//! CFL-based step control and the divergence-cleaning speed update.

use crate::dgsem::{rhs_into, GridFunction, RhsWorkspace, Semidiscretization};
use crate::diagnostics::{
    divergence_error, poloidal_reference, total_entropy, total_entropy_rate, total_momentum,
    total_physical_energy, DiagnosticSample, DiagnosticsSeries,
};
use crate::physics::{build_node_cache, cache_stride, lambda_max_nodal_cached, NodeCache};
use crate::{Result, SolverError};

/// Low-storage 2N coefficients of the five-stage fourth-order scheme.
const RK_A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
const RK_B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];
const RK_C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

/// Time-loop parameters.
#[derive(Clone, Copy, Debug)]
pub struct TimeLoopConfig {
    pub cfl: f64,
    pub t_end: f64,
    /// GLM speed scaling; `nu = 0` switches cleaning off.
    pub nu: f64,
    /// Diagnostics cadence in steps (>= 1).
    pub diagnostics_every: usize,
    /// Snapshot cadence in steps; 0 = final snapshot only.
    pub snapshot_every: usize,
}

impl Default for TimeLoopConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            t_end: 1.0,
            nu: 0.5,
            diagnostics_every: 1,
            snapshot_every: 0,
        }
    }
}

/// CFL time step `dt = min over nodes of CFL/(N+1) * h / lambda_max`.
pub fn compute_dt(u: &GridFunction, sd: &Semidiscretization, cfl: f64) -> Result<f64> {
    let cfg = &sd.species;
    let stride = cache_stride(cfg.n_species());
    let mut cache = vec![0.0; stride];
    let mut lambda_max = 0.0f64;
    for e in 0..u.n_elements {
        for node in 0..u.nodes_per_element {
            build_node_cache(u.node(e, node), cfg, &mut cache)?;
            let lambda = lambda_max_nodal_cached(NodeCache { d: &cache }, cfg, sd.mesh.dimension);
            if !lambda.is_finite() {
                return Err(SolverError::NonFiniteWaveSpeed);
            }
            lambda_max = lambda_max.max(lambda);
        }
    }
    if !(lambda_max > 0.0) {
        return Err(SolverError::NonFiniteWaveSpeed);
    }
    let n = sd.basis.degree as f64;
    Ok(cfl / (n + 1.0) * sd.mesh.h / lambda_max)
}

/// Divergence-cleaning speed `c_h = nu/dt * CFL h / (2(N+1))`.
pub fn compute_ch(dt: f64, sd: &Semidiscretization, cfg: &TimeLoopConfig) -> f64 {
    if !sd.glm.enabled || sd.glm.nu == 0.0 {
        return 0.0;
    }
    let n = sd.basis.degree as f64;
    sd.glm.nu / dt * (cfg.cfl * sd.mesh.h / (2.0 * (n + 1.0)))
}

/// Generic 2N-storage RK4-5 step over a flat state vector; `k` is the
/// low-storage register, `dy` the stage-derivative buffer.
pub fn low_storage_rk45(
    y: &mut [f64],
    t: f64,
    dt: f64,
    k: &mut [f64],
    mut f: impl FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
    dy: &mut [f64],
) -> Result<()> {
    for stage in 0..5 {
        f(y, t + RK_C[stage] * dt, dy)?;
        for i in 0..y.len() {
            k[i] = RK_A[stage] * k[i] + dt * dy[i];
            y[i] += RK_B[stage] * k[i];
        }
    }
    Ok(())
}

/// Advances the grid by one RK4-5 step (exactly five rhs evaluations).
pub fn step_rk45(
    u: &GridFunction,
    t: f64,
    dt: f64,
    sd: &Semidiscretization,
    c_h: f64,
) -> Result<GridFunction> {
    let mut next = u.clone();
    let mut ws = RhsWorkspace::new(sd);
    let mut k = vec![0.0; u.data.len()];
    let mut dy = GridFunction::zeros_like(u);
    step_rk45_inner(&mut next, t, dt, sd, c_h, &mut ws, &mut k, &mut dy, None)?;
    Ok(next)
}

#[allow(clippy::too_many_arguments)]
fn step_rk45_inner(
    u: &mut GridFunction,
    t: f64,
    dt: f64,
    sd: &Semidiscretization,
    c_h: f64,
    ws: &mut RhsWorkspace,
    k: &mut [f64],
    dy: &mut GridFunction,
    first_rhs: Option<&GridFunction>,
) -> Result<()> {
    use rayon::prelude::*;
    for stage in 0..5 {
        if stage == 0 {
            if let Some(f0) = first_rhs {
                dy.data.copy_from_slice(&f0.data);
            } else {
                rhs_into(u, t, sd, c_h, ws, dy)?;
            }
        } else {
            rhs_into(u, t + RK_C[stage] * dt, sd, c_h, ws, dy)?;
        }
        let (a, b) = (RK_A[stage], RK_B[stage]);
        u.data
            .par_chunks_mut(4096)
            .zip(k.par_chunks_mut(4096))
            .zip(dy.data.par_chunks(4096))
            .for_each(|((uc, kc), dc)| {
                for ((ui, ki), di) in uc.iter_mut().zip(kc).zip(dc) {
                    *ki = a * *ki + dt * di;
                    *ui += b * *ki;
                }
            });
    }
    Ok(())
}

/// Why a run loop ended.
#[derive(Debug)]
pub enum RunStatus {
    Completed,
    /// The step at `time` lost admissibility; `reason` wraps the nodewise
    /// error message.
    Aborted {
        time: f64,
        step: usize,
        reason: SolverError,
    },
}

impl RunStatus {
    pub fn is_aborted(&self) -> bool {
        matches!(self, RunStatus::Aborted { .. })
    }
}

/// Final state, diagnostics series and completion status of a run.
pub struct RunOutput {
    pub final_state: GridFunction,
    pub series: DiagnosticsSeries,
    pub status: RunStatus,
}

/// Run events delivered to the caller's callback.
pub enum RunEvent<'a> {
    /// A diagnostics sample was recorded (also fired for the final state).
    Diagnostic(&'a DiagnosticSample),
    /// A snapshot is due (cadence tick or end of run).
    Snapshot {
        step: usize,
        t: f64,
        u: &'a GridFunction,
    },
}

/// Main explicit time loop: per step computes dt (clamped to land exactly on
/// `t_end`), then the cleaning speed, then advances with RK4-5. The recorded
/// entropy rate reuses the first-stage rhs.
pub fn run(
    u0: GridFunction,
    sd: &Semidiscretization,
    cfg: &TimeLoopConfig,
    mut on_event: impl FnMut(RunEvent),
) -> Result<RunOutput> {
    let mut u = u0;
    let mut t = 0.0;
    let mut step: usize = 0;
    let mut series = DiagnosticsSeries::default();
    let mut ws = RhsWorkspace::new(sd);
    let mut k = vec![0.0; u.data.len()];
    let mut dy = GridFunction::zeros_like(&u);
    let mut first = GridFunction::zeros_like(&u);
    let mut next = GridFunction::zeros_like(&u);

    let bp_ref = if sd.mesh.dimension == 2 {
        poloidal_reference(&u, sd)?
    } else {
        0.0
    };

    let sample =
        |u: &GridFunction, dudt: &GridFunction, t: f64, dt: f64| -> Result<DiagnosticSample> {
            let (div_l2, div_linf) = if sd.mesh.dimension == 2 {
                divergence_error(u, sd)?
            } else {
                (0.0, 0.0)
            };
            Ok(DiagnosticSample {
                t,
                dt,
                entropy: total_entropy(u, sd)?,
                entropy_rate: total_entropy_rate(u, dudt, sd)?,
                div_b_l2: div_l2,
                div_b_linf: div_linf,
                poloidal_energy: if bp_ref > 0.0 {
                    poloidal_reference(u, sd)? / bp_ref
                } else {
                    0.0
                },
                momentum: total_momentum(u, sd),
                total_energy: total_physical_energy(u, sd),
            })
        };

    let eps = 1e-12 * cfg.t_end.max(1.0);
    loop {
        if t >= cfg.t_end - eps {
            break;
        }
        let mut dt = compute_dt(&u, sd, cfg.cfl)?;
        if t + dt > cfg.t_end {
            dt = cfg.t_end - t;
        }
        let c_h = compute_ch(dt, sd, cfg);

        // First-stage rhs, shared between diagnostics and the RK step.
        if let Err(reason) = rhs_into(&u, t, sd, c_h, &mut ws, &mut dy) {
            return Ok(RunOutput {
                final_state: u,
                series,
                status: RunStatus::Aborted { time: t, step, reason },
            });
        }
        if step % cfg.diagnostics_every == 0 {
            let s = sample(&u, &dy, t, dt)?;
            on_event(RunEvent::Diagnostic(&s));
            if series.last().map_or(true, |last| s.t > last.t) {
                series.push(s);
            }
        }
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            on_event(RunEvent::Snapshot { step, t, u: &u });
        }

        std::mem::swap(&mut first, &mut dy);
        next.data.copy_from_slice(&u.data);
        k.fill(0.0);
        match step_rk45_inner(
            &mut next,
            t,
            dt,
            sd,
            c_h,
            &mut ws,
            &mut k,
            &mut dy,
            Some(&first),
        ) {
            Ok(()) => {
                std::mem::swap(&mut u, &mut next);
                t += dt;
                step += 1;
            }
            Err(reason) => {
                return Ok(RunOutput {
                    final_state: u,
                    series,
                    status: RunStatus::Aborted { time: t, step, reason },
                });
            }
        }
    }

    // Final diagnostics sample at t_end (one extra rhs evaluation).
    match rhs_into(&u, t, sd, 0.0, &mut ws, &mut dy) {
        Ok(()) => {
            let s = sample(&u, &dy, t, 0.0)?;
            on_event(RunEvent::Diagnostic(&s));
            if series.last().map_or(true, |last| s.t > last.t) {
                series.push(s);
            }
        }
        Err(reason) => {
            return Ok(RunOutput {
                final_state: u,
                series,
                status: RunStatus::Aborted { time: t, step, reason },
            });
        }
    }
    on_event(RunEvent::Snapshot { step, t, u: &u });

    Ok(RunOutput {
        final_state: u,
        series,
        status: RunStatus::Completed,
    })
}
