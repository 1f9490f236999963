//! State layout and algebraic conversions between conservative, primitive and
//! entropy variables.
//!
//! A state holds `5*N_i + 4` reals laid out as per-species blocks
//! `(rho_k, rho_k v_k1, rho_k v_k2, rho_k v_k3, E_k)` for `k = 0..N_i`,
//! followed by the shared `(B_1, B_2, B_3, psi)`. Each species energy `E_k`
//! contains the full magnetic and cleaning-field energies
//! `E_k = E_k^hydro + ||B||^2/2 + psi^2/2`.

use crate::{Result, SolverError};

/// Coordinate direction of a flux evaluation (Cartesian meshes only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// 0 for x, 1 for y; also the velocity/induction slot offset.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    /// Unit normal pointing along the axis.
    #[inline]
    pub fn unit_normal(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
        }
    }
}

/// Per-ion constants plus the electron pressure model `p_e = alpha * sum_k p_k`.
#[derive(Clone, Debug)]
pub struct SpeciesTable {
    gammas: Vec<f64>,
    charge_to_mass: Vec<f64>,
    electron_pressure_alpha: f64,
}

impl SpeciesTable {
    /// Builds the table, rejecting empty tables, `gamma_k <= 1`, `alpha < 0`
    /// and configurations where no species carries positive charge-to-mass
    /// ratio (those cannot yield `n_e e > 0`).
    pub fn new(gammas: Vec<f64>, charge_to_mass: Vec<f64>, alpha: f64) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != charge_to_mass.len() {
            return Err(SolverError::InvalidSpecies(format!(
                "need matching non-empty gamma/charge lists, got {} and {}",
                gammas.len(),
                charge_to_mass.len()
            )));
        }
        if let Some(&g) = gammas.iter().find(|g| !(**g > 1.0)) {
            return Err(SolverError::InvalidSpecies(format!(
                "heat capacity ratios must exceed 1, got {g}"
            )));
        }
        if !(alpha >= 0.0) {
            return Err(SolverError::InvalidSpecies(format!(
                "electron pressure fraction must be nonnegative, got {alpha}"
            )));
        }
        if !charge_to_mass.iter().any(|&r| r > 0.0) {
            return Err(SolverError::InvalidSpecies(
                "at least one species needs a positive charge-to-mass ratio".into(),
            ));
        }
        Ok(Self {
            gammas,
            charge_to_mass,
            electron_pressure_alpha: alpha,
        })
    }

    /// Single-species table.
    pub fn single(gamma: f64, charge_to_mass: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![gamma], vec![charge_to_mass], alpha)
    }

    #[inline]
    pub fn n_species(&self) -> usize {
        self.gammas.len()
    }

    /// Length of a state vector: `5 N_i + 4`.
    #[inline]
    pub fn n_vars(&self) -> usize {
        5 * self.n_species() + 4
    }

    #[inline]
    pub fn gamma(&self, k: usize) -> f64 {
        self.gammas[k]
    }

    #[inline]
    pub fn charge_to_mass(&self, k: usize) -> f64 {
        self.charge_to_mass[k]
    }

    #[inline]
    pub fn electron_pressure_alpha(&self) -> f64 {
        self.electron_pressure_alpha
    }

    /// Offset of the species-k block.
    #[inline]
    pub fn block(&self, k: usize) -> usize {
        5 * k
    }

    /// Offset of the magnetic field block.
    #[inline]
    pub fn mag(&self) -> usize {
        5 * self.n_species()
    }

    /// Index of the divergence-cleaning variable.
    #[inline]
    pub fn psi(&self) -> usize {
        5 * self.n_species() + 3
    }

    /// Human-readable names of the state components, in layout order.
    pub fn variable_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_vars());
        for k in 1..=self.n_species() {
            names.push(format!("rho_{k}"));
            names.push(format!("mom_x_{k}"));
            names.push(format!("mom_y_{k}"));
            names.push(format!("mom_z_{k}"));
            names.push(format!("E_{k}"));
        }
        names.extend(["B_1", "B_2", "B_3", "psi"].map(String::from));
        names
    }
}

/// Primitive description: per-species `(rho_k, v_k, p_k)` plus shared `(B, psi)`.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub rho: Vec<f64>,
    pub v: Vec<[f64; 3]>,
    pub p: Vec<f64>,
    pub b: [f64; 3],
    pub psi: f64,
}

/// Partial pressure of species `k`, solved from the energy definition.
#[inline]
pub fn pressure(u: &[f64], cfg: &SpeciesTable, k: usize) -> f64 {
    let b = cfg.mag();
    let mag = 0.5 * (u[b] * u[b] + u[b + 1] * u[b + 1] + u[b + 2] * u[b + 2]);
    let glm = 0.5 * u[b + 3] * u[b + 3];
    let s = cfg.block(k);
    let rho = u[s];
    let kin = 0.5 * (u[s + 1] * u[s + 1] + u[s + 2] * u[s + 2] + u[s + 3] * u[s + 3]) / rho;
    (cfg.gamma(k) - 1.0) * (u[s + 4] - kin - mag - glm)
}

/// Checks `rho_k > 0` and derived `p_k > 0` for every species.
pub fn check_admissible(u: &[f64], cfg: &SpeciesTable) -> Result<()> {
    for k in 0..cfg.n_species() {
        let rho = u[cfg.block(k)];
        if !(rho > 0.0) {
            return Err(SolverError::NonPositiveDensity { species: k, value: rho });
        }
    }
    for k in 0..cfg.n_species() {
        let p = pressure(u, cfg, k);
        if !(p > 0.0) {
            return Err(SolverError::NonPositivePressure { species: k, value: p });
        }
    }
    Ok(())
}

/// Conservative -> primitive conversion.
pub fn cons_to_prim(u: &[f64], cfg: &SpeciesTable) -> Result<Primitive> {
    check_admissible(u, cfg)?;
    let n = cfg.n_species();
    let mut rho = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for k in 0..n {
        let s = cfg.block(k);
        let r = u[s];
        rho.push(r);
        v.push([u[s + 1] / r, u[s + 2] / r, u[s + 3] / r]);
        p.push(pressure(u, cfg, k));
    }
    let b = cfg.mag();
    Ok(Primitive {
        rho,
        v,
        p,
        b: [u[b], u[b + 1], u[b + 2]],
        psi: u[b + 3],
    })
}

/// Primitive -> conservative conversion (exact inverse of [`cons_to_prim`]).
pub fn prim_to_cons(q: &Primitive, cfg: &SpeciesTable) -> Result<Vec<f64>> {
    let n = cfg.n_species();
    assert_eq!(q.rho.len(), n);
    let mag = 0.5 * (q.b[0] * q.b[0] + q.b[1] * q.b[1] + q.b[2] * q.b[2]);
    let glm = 0.5 * q.psi * q.psi;
    let mut u = vec![0.0; cfg.n_vars()];
    for k in 0..n {
        if !(q.rho[k] > 0.0) {
            return Err(SolverError::NonPositiveDensity { species: k, value: q.rho[k] });
        }
        if !(q.p[k] > 0.0) {
            return Err(SolverError::NonPositivePressure { species: k, value: q.p[k] });
        }
        let s = cfg.block(k);
        let vk = q.v[k];
        u[s] = q.rho[k];
        u[s + 1] = q.rho[k] * vk[0];
        u[s + 2] = q.rho[k] * vk[1];
        u[s + 3] = q.rho[k] * vk[2];
        let kin = 0.5 * q.rho[k] * (vk[0] * vk[0] + vk[1] * vk[1] + vk[2] * vk[2]);
        u[s + 4] = q.p[k] / (cfg.gamma(k) - 1.0) + kin + mag + glm;
    }
    let b = cfg.mag();
    u[b] = q.b[0];
    u[b + 1] = q.b[1];
    u[b + 2] = q.b[2];
    u[b + 3] = q.psi;
    Ok(u)
}

/// Specific entropy `s_k = ln p_k - gamma_k ln rho_k` of species `k`.
#[inline]
pub fn specific_entropy(u: &[f64], cfg: &SpeciesTable, k: usize) -> f64 {
    pressure(u, cfg, k).ln() - cfg.gamma(k) * u[cfg.block(k)].ln()
}

/// Conservative -> entropy variables, same layout as the state vector.
pub fn cons_to_entropy(u: &[f64], cfg: &SpeciesTable) -> Result<Vec<f64>> {
    check_admissible(u, cfg)?;
    let mut w = vec![0.0; cfg.n_vars()];
    cons_to_entropy_unchecked(u, cfg, &mut w);
    Ok(w)
}

/// Entropy-variable evaluation without admissibility checks (hot path; the
/// caller guarantees positivity).
pub(crate) fn cons_to_entropy_unchecked(u: &[f64], cfg: &SpeciesTable, w: &mut [f64]) {
    let n = cfg.n_species();
    let mut beta_plus = 0.0;
    for k in 0..n {
        let s = cfg.block(k);
        let rho = u[s];
        let v = [u[s + 1] / rho, u[s + 2] / rho, u[s + 3] / rho];
        let p = pressure(u, cfg, k);
        let beta = 0.5 * rho / p;
        beta_plus += beta;
        let gamma = cfg.gamma(k);
        let sk = p.ln() - gamma * rho.ln();
        let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        w[s] = (gamma - sk) / (gamma - 1.0) - beta * v2;
        w[s + 1] = 2.0 * beta * v[0];
        w[s + 2] = 2.0 * beta * v[1];
        w[s + 3] = 2.0 * beta * v[2];
        w[s + 4] = -2.0 * beta;
    }
    let b = cfg.mag();
    w[b] = 2.0 * beta_plus * u[b];
    w[b + 1] = 2.0 * beta_plus * u[b + 1];
    w[b + 2] = 2.0 * beta_plus * u[b + 2];
    w[b + 3] = 2.0 * beta_plus * u[b + 3];
}

/// Entropy variables -> conservative state (inverse of [`cons_to_entropy`]).
///
/// Division by `beta_k` recovers the velocities, division by
/// `beta_+ = sum_k beta_k` recovers `B` and `psi`, and the entropy relation
/// yields density and pressure.
pub fn entropy_to_cons(w: &[f64], cfg: &SpeciesTable) -> Result<Vec<f64>> {
    let n = cfg.n_species();
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let bk = -0.5 * w[cfg.block(k) + 4];
        if !(bk > 0.0) {
            return Err(SolverError::InvalidEntropyState { species: k, value: bk });
        }
        beta.push(bk);
    }
    let beta_plus: f64 = beta.iter().sum();
    let b = cfg.mag();
    let bb = [
        w[b] / (2.0 * beta_plus),
        w[b + 1] / (2.0 * beta_plus),
        w[b + 2] / (2.0 * beta_plus),
    ];
    let psi = w[b + 3] / (2.0 * beta_plus);
    let mut q = Primitive {
        rho: vec![0.0; n],
        v: vec![[0.0; 3]; n],
        p: vec![0.0; n],
        b: bb,
        psi,
    };
    for k in 0..n {
        let s = cfg.block(k);
        let gamma = cfg.gamma(k);
        let vk = [
            w[s + 1] / (2.0 * beta[k]),
            w[s + 2] / (2.0 * beta[k]),
            w[s + 3] / (2.0 * beta[k]),
        ];
        let v2 = vk[0] * vk[0] + vk[1] * vk[1] + vk[2] * vk[2];
        let sk = gamma - (gamma - 1.0) * (w[s] + beta[k] * v2);
        // s_k = (1 - gamma) ln rho_k - ln(2 beta_k)
        let rho = (-(sk + (2.0 * beta[k]).ln()) / (gamma - 1.0)).exp();
        q.rho[k] = rho;
        q.v[k] = vk;
        q.p[k] = 0.5 * rho / beta[k];
    }
    prim_to_cons(&q, cfg)
}

/// Mathematical entropy `S = sum_k -rho_k s_k / (gamma_k - 1)`.
pub fn math_entropy(u: &[f64], cfg: &SpeciesTable) -> Result<f64> {
    check_admissible(u, cfg)?;
    Ok(math_entropy_unchecked(u, cfg))
}

#[inline]
pub(crate) fn math_entropy_unchecked(u: &[f64], cfg: &SpeciesTable) -> f64 {
    let mut s = 0.0;
    for k in 0..cfg.n_species() {
        s -= u[cfg.block(k)] * specific_entropy(u, cfg, k) / (cfg.gamma(k) - 1.0);
    }
    s
}

/// Entropy flux `f^S = sum_k v_{k,dir} (-rho_k s_k / (gamma_k - 1))`.
pub fn entropy_flux(u: &[f64], cfg: &SpeciesTable, dir: Axis) -> Result<f64> {
    check_admissible(u, cfg)?;
    let d = dir.index();
    let mut f = 0.0;
    for k in 0..cfg.n_species() {
        let s = cfg.block(k);
        let v = u[s + 1 + d] / u[s];
        f -= v * u[s] * specific_entropy(u, cfg, k) / (cfg.gamma(k) - 1.0);
    }
    Ok(f)
}
