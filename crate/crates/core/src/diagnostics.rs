//! Quadrature-based functionals: solution errors, experimental convergence
//! orders, entropy and its rate, divergence norms, poloidal energy and the
//! conserved budgets.

use crate::dgsem::{GridFunction, Semidiscretization};
use crate::{Result, SolverError};

/// One diagnostics sample of a running simulation.
#[derive(Clone, Debug)]
pub struct DiagnosticSample {
    pub t: f64,
    pub dt: f64,
    pub entropy: f64,
    pub entropy_rate: f64,
    pub div_b_l2: f64,
    pub div_b_linf: f64,
    /// Normalized poloidal magnetic energy (1 at t = 0); 0 when undefined.
    pub poloidal_energy: f64,
    pub momentum: [f64; 3],
    pub total_energy: f64,
}

/// Time series of diagnostics samples, strictly increasing in `t`.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticsSeries {
    pub samples: Vec<DiagnosticSample>,
}

impl DiagnosticsSeries {
    pub fn push(&mut self, sample: DiagnosticSample) {
        if let Some(last) = self.samples.last() {
            debug_assert!(sample.t > last.t, "diagnostics times must increase");
        }
        self.samples.push(sample);
    }

    pub fn last(&self) -> Option<&DiagnosticSample> {
        self.samples.last()
    }
}

/// Componentwise L2 errors against an exact solution, via LGL collocation
/// quadrature, normalized by the domain volume (the convention of the
/// reference error tables).
pub fn l2_error(
    u: &GridFunction,
    exact: impl Fn(f64, f64, f64, &mut [f64]),
    t: f64,
    sd: &Semidiscretization,
) -> Vec<f64> {
    let np = sd.basis.n_nodes();
    let npy = if sd.mesh.dimension == 2 { np } else { 1 };
    let nv = sd.species.n_vars();
    let mut acc = vec![0.0; nv];
    let mut uex = vec![0.0; nv];
    let mut volume = 0.0;
    for e in 0..sd.mesh.n_elements() {
        for j in 0..npy {
            for i in 0..np {
                let (x, y) = sd.node_coords(e, i, j);
                exact(x, y, t, &mut uex);
                let un = u.node(e, i + np * j);
                let wq = sd.quadrature_weight(i, j);
                volume += wq;
                for v in 0..nv {
                    let d = un[v] - uex[v];
                    acc[v] += wq * d * d;
                }
            }
        }
    }
    acc.iter().map(|a| (a / volume).sqrt()).collect()
}

/// Experimental orders of convergence `log(e_i/e_{i+1}) / log(r_{i+1}/r_i)`.
pub fn eoc(errors: &[f64], resolutions: &[usize]) -> Result<Vec<f64>> {
    assert_eq!(errors.len(), resolutions.len());
    if errors.iter().any(|&e| e == 0.0) {
        return Err(SolverError::ZeroError);
    }
    Ok(errors
        .windows(2)
        .zip(resolutions.windows(2))
        .map(|(e, r)| (e[0] / e[1]).ln() / (r[1] as f64 / r[0] as f64).ln())
        .collect())
}

/// Arithmetic mean of an EOC column (the tables' "mean" row).
pub fn mean_eoc(eocs: &[f64]) -> f64 {
    eocs.iter().sum::<f64>() / eocs.len() as f64
}

/// Entropy integral of one element.
pub fn element_entropy(sd: &Semidiscretization, u: &GridFunction, e: usize) -> Result<f64> {
    let np = sd.basis.n_nodes();
    let npy = if sd.mesh.dimension == 2 { np } else { 1 };
    let mut total = 0.0;
    for j in 0..npy {
        for i in 0..np {
            let un = u.node(e, i + np * j);
            crate::state::check_admissible(un, &sd.species)?;
            total +=
                sd.quadrature_weight(i, j) * crate::state::math_entropy_unchecked(un, &sd.species);
        }
    }
    Ok(total)
}

/// Total mathematical entropy of the domain.
pub fn total_entropy(u: &GridFunction, sd: &Semidiscretization) -> Result<f64> {
    let mut total = 0.0;
    for e in 0..sd.mesh.n_elements() {
        total += element_entropy(sd, u, e)?;
    }
    Ok(total)
}

/// Total entropy rate `integral of w^T du/dt`, evaluated with the same rhs
/// that advances the solution.
pub fn total_entropy_rate(
    u: &GridFunction,
    dudt: &GridFunction,
    sd: &Semidiscretization,
) -> Result<f64> {
    let mut total = 0.0;
    for e in 0..sd.mesh.n_elements() {
        total += crate::dgsem::element_entropy_rate(sd, u, dudt, e)?;
    }
    Ok(total)
}

/// Broken (element-local) divergence of B: `(L2 norm, max norm)`.
pub fn divergence_error(u: &GridFunction, sd: &Semidiscretization) -> Result<(f64, f64)> {
    if sd.mesh.dimension != 2 {
        return Err(SolverError::Requires2D);
    }
    let np = sd.basis.n_nodes();
    let bofs = sd.species.mag();
    let jac = sd.mesh.jacobian();
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    for e in 0..sd.mesh.n_elements() {
        for j in 0..np {
            for i in 0..np {
                let mut div = 0.0;
                for k in 0..np {
                    div += sd.basis.d(i, k) * u.node(e, k + np * j)[bofs];
                    div += sd.basis.d(j, k) * u.node(e, i + np * k)[bofs + 1];
                }
                div /= jac;
                l2 += sd.quadrature_weight(i, j) * div * div;
                linf = linf.max(div.abs());
            }
        }
    }
    Ok((l2.sqrt(), linf))
}

/// Integral of the squared poloidal field `B_1^2 + B_2^2`.
pub fn poloidal_reference(u: &GridFunction, sd: &Semidiscretization) -> Result<f64> {
    if sd.mesh.dimension != 2 {
        return Err(SolverError::Requires2D);
    }
    let np = sd.basis.n_nodes();
    let bofs = sd.species.mag();
    let mut total = 0.0;
    for e in 0..sd.mesh.n_elements() {
        for j in 0..np {
            for i in 0..np {
                let un = u.node(e, i + np * j);
                total += sd.quadrature_weight(i, j)
                    * (un[bofs] * un[bofs] + un[bofs + 1] * un[bofs + 1]);
            }
        }
    }
    Ok(total)
}

/// Normalized poloidal magnetic energy relative to a reference integral.
pub fn poloidal_energy(u: &GridFunction, sd: &Semidiscretization, u0_ref: f64) -> Result<f64> {
    if !(u0_ref > 0.0) {
        return Err(SolverError::ZeroReference);
    }
    Ok(poloidal_reference(u, sd)? / u0_ref)
}

/// Total momentum, summed over species and integrated over the domain.
pub fn total_momentum(u: &GridFunction, sd: &Semidiscretization) -> [f64; 3] {
    let np = sd.basis.n_nodes();
    let npy = if sd.mesh.dimension == 2 { np } else { 1 };
    let cfg = &sd.species;
    let mut mom = [0.0; 3];
    for e in 0..sd.mesh.n_elements() {
        for j in 0..npy {
            for i in 0..np {
                let un = u.node(e, i + np * j);
                let wq = sd.quadrature_weight(i, j);
                for k in 0..cfg.n_species() {
                    for m in 0..3 {
                        mom[m] += wq * un[cfg.block(k) + 1 + m];
                    }
                }
            }
        }
    }
    mom
}

/// Total physical energy `sum_k E_k - (N_i - 1)(||B||^2 + psi^2)/2`,
/// integrated over the domain.
pub fn total_physical_energy(u: &GridFunction, sd: &Semidiscretization) -> f64 {
    let np = sd.basis.n_nodes();
    let npy = if sd.mesh.dimension == 2 { np } else { 1 };
    let cfg = &sd.species;
    let bofs = cfg.mag();
    let nm1 = cfg.n_species() as f64 - 1.0;
    let mut total = 0.0;
    for e in 0..sd.mesh.n_elements() {
        for j in 0..npy {
            for i in 0..np {
                let un = u.node(e, i + np * j);
                let wq = sd.quadrature_weight(i, j);
                let mut energy: f64 = (0..cfg.n_species()).map(|k| un[cfg.block(k) + 4]).sum();
                let mag = 0.5
                    * (un[bofs] * un[bofs]
                        + un[bofs + 1] * un[bofs + 1]
                        + un[bofs + 2] * un[bofs + 2]
                        + un[bofs + 3] * un[bofs + 3]);
                energy -= nm1 * mag;
                total += wq * energy;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::LglBasis;
    use crate::dgsem::{GlmConfig, SolverVariant};
    use crate::mesh::{BoundaryKind, CartesianMesh};
    use crate::state::{prim_to_cons, Primitive, SpeciesTable};

    fn sd_2d(ne: usize, degree: usize) -> Semidiscretization {
        Semidiscretization::new(
            CartesianMesh::new_2d(
                [-1.0, 1.0],
                [-1.0, 1.0],
                ne,
                ne,
                BoundaryKind::Periodic,
                BoundaryKind::Periodic,
            )
            .unwrap(),
            LglBasis::new(degree).unwrap(),
            SpeciesTable::new(vec![2.0, 4.0], vec![2.0, 1.0], 0.2).unwrap(),
            SolverVariant::Ec,
            GlmConfig::on(0.5),
            None,
        )
    }

    fn base_state(cfg: &SpeciesTable, b: [f64; 3]) -> Vec<f64> {
        prim_to_cons(
            &Primitive {
                rho: vec![1.0, 0.8],
                v: vec![[0.1, 0.2, 0.0], [0.0, -0.1, 0.3]],
                p: vec![1.0, 0.9],
                b,
                psi: 0.0,
            },
            cfg,
        )
        .unwrap()
    }

    #[test]
    fn l2_error_of_exact_sample_is_zero() {
        let sd = sd_2d(4, 3);
        let cfg = sd.species.clone();
        let f = |x: f64, y: f64, _t: f64, out: &mut [f64]| {
            let mut u = base_state(&cfg, [0.2, 0.1, 0.0]);
            u[0] += 0.1 * (x * y).sin();
            out.copy_from_slice(&u);
        };
        let u = GridFunction::sample(&sd, |x, y, out| f(x, y, 0.0, out));
        let errs = l2_error(&u, f, 0.0, &sd);
        assert!(errs.iter().all(|e| *e <= 1e-14));
    }

    #[test]
    fn l2_error_constant_offset() {
        // constant offset eps on rho_1: the volume-normalized error is eps
        let sd = sd_2d(4, 3);
        let cfg = sd.species.clone();
        let eps = 1e-3;
        let u0 = base_state(&cfg, [0.2, 0.1, 0.0]);
        let u = GridFunction::sample(&sd, |_, _, out| {
            out.copy_from_slice(&u0);
            out[0] += eps;
        });
        let u0c = u0.clone();
        let errs = l2_error(&u, |_, _, _, out| out.copy_from_slice(&u0c), 0.0, &sd);
        assert!((errs[0] - eps).abs() < 1e-12);
        assert!(errs[1].abs() < 1e-15);
    }

    #[test]
    fn eoc_examples() {
        let e = eoc(&[1.0, 0.25], &[8, 16]).unwrap();
        assert!((e[0] - 2.0).abs() < 1e-14);
        let table_b1 = [7.33e-6, 3.79e-7, 1.55e-8, 9.84e-10];
        let eocs = eoc(&table_b1, &[8, 16, 32, 64]).unwrap();
        for (got, want) in eocs.iter().zip([4.27, 4.61, 3.98]) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
        assert!(matches!(
            eoc(&[1.0, 0.0], &[8, 16]),
            Err(SolverError::ZeroError)
        ));
    }

    #[test]
    fn divergence_of_constant_and_linear_fields() {
        let sd = sd_2d(4, 3);
        let cfg = sd.species.clone();
        let u = GridFunction::sample(&sd, |_, _, out| {
            out.copy_from_slice(&base_state(&cfg, [0.3, -0.2, 0.5]))
        });
        let (l2, linf) = divergence_error(&u, &sd).unwrap();
        assert!(l2 <= 1e-13 && linf <= 1e-13);

        // B = (y, x, 0) is divergence-free and exactly representable
        let u2 = GridFunction::sample(&sd, |x, y, out| {
            out.copy_from_slice(&base_state(&cfg, [y, x, 0.0]))
        });
        let (l2, linf) = divergence_error(&u2, &sd).unwrap();
        assert!(l2 <= 1e-12 && linf <= 1e-12, "l2 {l2}, linf {linf}");

        // B = (x, y): divergence 2 everywhere, L2 = 2*sqrt(|domain|) = 4
        let u3 = GridFunction::sample(&sd, |x, y, out| {
            out.copy_from_slice(&base_state(&cfg, [x, y, 0.0]))
        });
        let (l2, linf) = divergence_error(&u3, &sd).unwrap();
        assert!((l2 - 4.0).abs() < 1e-12);
        assert!((linf - 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_requires_2d() {
        let sd = Semidiscretization::new(
            CartesianMesh::new_1d([-1.0, 1.0], 4, BoundaryKind::Periodic).unwrap(),
            LglBasis::new(2).unwrap(),
            SpeciesTable::single(1.4, 1.0, 0.0).unwrap(),
            SolverVariant::Ec,
            GlmConfig::off(),
            None,
        );
        let u = GridFunction::zeros(4, 3, 9);
        assert!(matches!(
            divergence_error(&u, &sd),
            Err(SolverError::Requires2D)
        ));
    }

    #[test]
    fn poloidal_energy_normalization() {
        let sd = sd_2d(4, 3);
        let cfg = sd.species.clone();
        let u = GridFunction::sample(&sd, |_, _, out| {
            out.copy_from_slice(&base_state(&cfg, [0.05, 0.0, 0.0866]))
        });
        let refv = poloidal_reference(&u, &sd).unwrap();
        // KHI-like closed form: B_p^2 |Omega| = 0.05^2 * 4
        assert!((refv - 0.01).abs() < 1e-13);
        assert!((poloidal_energy(&u, &sd, refv).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            poloidal_energy(&u, &sd, 0.0),
            Err(SolverError::ZeroReference)
        ));
    }

    #[test]
    fn total_energy_subtracts_duplicated_magnetic_part() {
        let sd = sd_2d(2, 2);
        let cfg = sd.species.clone();
        let u0 = base_state(&cfg, [0.4, -0.3, 0.1]);
        let u = GridFunction::sample(&sd, |_, _, out| out.copy_from_slice(&u0));
        let q = crate::state::cons_to_prim(&u0, &cfg).unwrap();
        let hydro: f64 = (0..2)
            .map(|k| {
                q.p[k] / (cfg.gamma(k) - 1.0)
                    + 0.5 * q.rho[k] * q.v[k].iter().map(|v| v * v).sum::<f64>()
            })
            .sum();
        let mag = 0.5 * (q.b.iter().map(|b| b * b).sum::<f64>() + q.psi * q.psi);
        let expected = (hydro + mag) * 4.0; // |Omega| = 4
        assert!((total_physical_energy(&u, &sd) - expected).abs() < 1e-12);
    }
}
