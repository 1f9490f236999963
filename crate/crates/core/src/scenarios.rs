//! The bundled experiments: a manufactured solution with source term, the
//! two-species weak blast wave and the magnetized Kelvin-Helmholtz
//! instability.

use std::sync::Arc;

use crate::basis::LglBasis;
use crate::dgsem::{GlmConfig, GridFunction, Semidiscretization, SolverVariant, SourceFn};
use crate::mesh::{BoundaryKind, CartesianMesh};
use crate::state::{prim_to_cons, Primitive, SpeciesTable};
use crate::{Result, SolverError};

/// Pointwise field of `(x, y, t)` filling a state vector.
pub type FieldFn = dyn Fn(f64, f64, f64, &mut [f64]) + Send + Sync;
/// Initial condition `(x, y)`.
pub type InitFn = dyn Fn(f64, f64, &mut [f64]) + Send + Sync;

/// A runnable experiment: species, domain, initial/exact/source fields and
/// run defaults.
#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub species: SpeciesTable,
    pub bounds_x: [f64; 2],
    pub bounds_y: [f64; 2],
    pub bc_x: BoundaryKind,
    pub bc_y: BoundaryKind,
    pub t_end: f64,
    pub cfl: f64,
    pub glm_nu: f64,
    pub default_elements: usize,
    pub initial: Arc<InitFn>,
    pub exact: Option<Arc<FieldFn>>,
    pub source: Option<Arc<SourceFn>>,
}

impl Scenario {
    /// Looks up a scenario by its stable CLI identifier.
    pub fn by_name(name: &str) -> Result<Scenario> {
        match name {
            "manufactured" => Ok(manufactured()),
            "weak_blast" => Ok(weak_blast()),
            "khi" => Ok(khi()),
            other => Err(SolverError::Config(format!(
                "unknown scenario '{other}' (expected manufactured, weak_blast, khi)"
            ))),
        }
    }

    /// Builds the semidiscretization for a given resolution and solver.
    pub fn semidiscretization(
        &self,
        degree: usize,
        elements: usize,
        variant: SolverVariant,
        glm_enabled: bool,
        nu: f64,
    ) -> Result<Semidiscretization> {
        let mesh = CartesianMesh::new_2d(
            self.bounds_x,
            self.bounds_y,
            elements,
            elements,
            self.bc_x,
            self.bc_y,
        )?;
        let glm = if glm_enabled {
            GlmConfig::on(nu)
        } else {
            GlmConfig::off()
        };
        Ok(Semidiscretization::new(
            mesh,
            LglBasis::new(degree)?,
            self.species.clone(),
            variant,
            glm,
            self.source.clone(),
        ))
    }

    /// Samples the initial condition on the mesh nodes.
    pub fn initial_grid(&self, sd: &Semidiscretization) -> GridFunction {
        let init = self.initial.clone();
        GridFunction::sample(sd, |x, y, out| init(x, y, out))
    }
}

/// Two-species manufactured solution on `[-1,1]^2` with its source term;
/// exact solution available for convergence studies.
pub fn manufactured() -> Scenario {
    let species = SpeciesTable::new(vec![2.0, 4.0], vec![2.0, 1.0], 0.2).unwrap();
    let nvars = species.n_vars();
    let exact = Arc::new(move |x: f64, y: f64, t: f64, out: &mut [f64]| {
        let s = (std::f64::consts::PI * (x + y - t)).sin();
        let chi = 0.1 * s + 2.0;
        let chi1 = 0.04 * s + 1.0;
        let chi2 = chi - chi1;
        out[..nvars].fill(0.0);
        out[0] = chi1;
        out[1] = chi1;
        out[2] = chi1;
        out[3] = 0.1 * chi1;
        out[4] = 2.0 * chi1 * chi1 + chi1;
        out[5] = chi2;
        out[6] = chi2;
        out[7] = chi2;
        out[8] = 0.1 * chi2;
        out[9] = 2.0 * chi2 * chi2 + chi2;
        out[10] = 0.25 * chi;
        out[11] = -0.25 * chi;
        out[12] = 0.1 * chi;
        out[13] = 0.0;
    });
    let exact_init = exact.clone();
    let source = Arc::new(move |x: f64, y: f64, t: f64, out: &mut [f64]| {
        let phase = std::f64::consts::PI * (x + y - t);
        let chi0 = 0.1 * phase.sin();
        let chi_x = 0.1 * std::f64::consts::PI * phase.cos();
        let c2 = chi0 * chi0;
        out[0] = 0.4 * chi_x;
        let mom1 = chi_x * (38055.0 * c2 + 185541.0 * chi0 + 220190.0)
            / (35000.0 * chi0 + 75000.0);
        out[1] = mom1;
        out[2] = mom1;
        out[3] = chi_x / 25.0;
        out[4] = chi_x * (49255.0 * c2 + 230541.0 * chi0 + 265190.0)
            / (17500.0 * chi0 + 37500.0);
        out[5] = 0.6 * chi_x;
        let mom2 = chi_x * (76155.0 * c2 + 295306.0 * chi0 + 284435.0)
            / (17500.0 * chi0 + 37500.0);
        out[6] = mom2;
        out[7] = mom2;
        out[8] = 0.06 * chi_x;
        out[9] = chi_x * (88755.0 * c2 + 338056.0 * chi0 + 318185.0)
            / (8750.0 * chi0 + 18750.0);
        out[10] = 0.25 * chi_x;
        out[11] = -0.25 * chi_x;
        out[12] = 0.1 * chi_x;
        out[13] = 0.0;
    });
    Scenario {
        name: "manufactured",
        species,
        bounds_x: [-1.0, 1.0],
        bounds_y: [-1.0, 1.0],
        bc_x: BoundaryKind::Periodic,
        bc_y: BoundaryKind::Periodic,
        t_end: 1.0,
        cfl: 0.5,
        glm_nu: 0.5,
        default_elements: 16,
        initial: Arc::new(move |x, y, out| exact_init(x, y, 0.0, out)),
        exact: Some(exact),
        source: Some(source),
    }
}

/// Two-species weak magneto-hydrodynamic blast wave on `[-2,2]^2`.
///
/// The inner reference density is the constant 1.1691 (an angle-dependent
/// inner density would turn negative over half the circle).
pub fn weak_blast() -> Scenario {
    let species = SpeciesTable::new(vec![2.0, 4.0], vec![2.0, 1.0], 0.2).unwrap();
    let cfg = species.clone();
    let initial = Arc::new(move |x: f64, y: f64, out: &mut [f64]| {
        let r = (x * x + y * y).sqrt();
        let inside = r <= 0.5;
        let rho0 = if inside { 1.1691 } else { 1.0 };
        let p = if inside { 1.245 } else { 1.0 };
        let v = if inside && r > 1e-14 {
            [0.1882 * x / r, 0.1882 * y / r, 0.0]
        } else {
            [0.0, 0.0, 0.0]
        };
        // species weights -2^(k-1) / (1 - 2^N_i) = (1/3, 2/3) for two species
        let q = Primitive {
            rho: vec![rho0 / 3.0, 2.0 * rho0 / 3.0],
            v: vec![v, v],
            p: vec![p, p],
            b: [1.0, 1.0, 1.0],
            psi: 0.0,
        };
        out.copy_from_slice(&prim_to_cons(&q, &cfg).unwrap());
    });
    Scenario {
        name: "weak_blast",
        species,
        bounds_x: [-2.0, 2.0],
        bounds_y: [-2.0, 2.0],
        bc_x: BoundaryKind::Periodic,
        bc_y: BoundaryKind::Periodic,
        t_end: 0.4,
        cfl: 0.5,
        glm_nu: 0.5,
        default_elements: 16,
        initial,
        exact: None,
        source: None,
    }
}

/// Magnetized Kelvin-Helmholtz instability with H+ and H2+ ions on
/// `[-1,1]^2`, periodic in x and slip walls in y. Desk-scale default mesh is
/// 64x64 elements (the full-resolution setup uses 128).
pub fn khi() -> Scenario {
    let species = SpeciesTable::new(vec![5.0 / 3.0, 1.4], vec![1.0, 0.5], 0.0).unwrap();
    let cfg = species.clone();
    let initial = Arc::new(move |x: f64, y: f64, out: &mut [f64]| {
        let y0 = 1.0 / 20.0;
        let sigma = 0.1;
        let v20 = 0.01;
        let c_a = 0.1;
        let theta = std::f64::consts::PI / 3.0;
        let vx = 0.5 * (y / y0).tanh();
        let vy = v20 * (2.0 * std::f64::consts::PI * x).sin() * (-y * y / (sigma * sigma)).exp();
        let q = Primitive {
            rho: vec![0.5, 0.5],
            v: vec![[vx, vy, 0.0], [vx, vy, 0.0]],
            p: vec![1.0 / cfg.gamma(0), 1.0 / cfg.gamma(1)],
            b: [c_a * theta.cos(), 0.0, c_a * theta.sin()],
            psi: 0.0,
        };
        out.copy_from_slice(&prim_to_cons(&q, &cfg).unwrap());
    });
    Scenario {
        name: "khi",
        species,
        bounds_x: [-1.0, 1.0],
        bounds_y: [-1.0, 1.0],
        bc_x: BoundaryKind::Periodic,
        bc_y: BoundaryKind::SlipWall,
        t_end: 20.0,
        cfl: 0.5,
        glm_nu: 0.5,
        default_elements: 64,
        initial,
        exact: None,
        source: None,
    }
}
