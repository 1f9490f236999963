//! Pointwise physics: auxiliary velocities, analytic fluxes, local
//! non-conservative coefficient vectors, the entropy potential and wave-speed
//! estimates.
//!
//! The hot paths work on a per-node cache of derived quantities
//! ([`NodeCache`]) so that the two-point kernels only combine precomputed
//! values.

use crate::state::{check_admissible, pressure, Axis, SpeciesTable};
use crate::{Result, SolverError};

/// Shared slots per cached node: v+ (3), B (3), psi, ||B||^2, p_e, n_e e.
pub(crate) const CACHE_SHARED: usize = 10;
/// Per-species slots: rho, beta, p, r_k rho_k / n_e e, v (3), ||v||^2,
/// v+_k (3), v-_k (3), v+_k . B.
pub(crate) const CACHE_PER_SPECIES: usize = 15;

#[inline]
pub(crate) fn cache_stride(n_species: usize) -> usize {
    CACHE_SHARED + CACHE_PER_SPECIES * n_species
}

/// Read-only view of one cached node.
#[derive(Clone, Copy)]
pub(crate) struct NodeCache<'a> {
    pub d: &'a [f64],
}

impl<'a> NodeCache<'a> {
    #[inline]
    pub fn vplus(&self, m: usize) -> f64 {
        self.d[m]
    }
    #[inline]
    pub fn b(&self, m: usize) -> f64 {
        self.d[3 + m]
    }
    #[inline]
    pub fn psi(&self) -> f64 {
        self.d[6]
    }
    #[inline]
    pub fn b2(&self) -> f64 {
        self.d[7]
    }
    #[inline]
    pub fn pe(&self) -> f64 {
        self.d[8]
    }
    #[inline]
    pub fn nee(&self) -> f64 {
        self.d[9]
    }
    #[inline]
    fn sp(&self, k: usize) -> usize {
        CACHE_SHARED + CACHE_PER_SPECIES * k
    }
    #[inline]
    pub fn rho(&self, k: usize) -> f64 {
        self.d[self.sp(k)]
    }
    #[inline]
    pub fn beta(&self, k: usize) -> f64 {
        self.d[self.sp(k) + 1]
    }
    #[inline]
    pub fn p(&self, k: usize) -> f64 {
        self.d[self.sp(k) + 2]
    }
    /// `r_k rho_k / (n_e e)`.
    #[inline]
    pub fn charge_fraction(&self, k: usize) -> f64 {
        self.d[self.sp(k) + 3]
    }
    #[inline]
    pub fn v(&self, k: usize, m: usize) -> f64 {
        self.d[self.sp(k) + 4 + m]
    }
    #[inline]
    pub fn v2(&self, k: usize) -> f64 {
        self.d[self.sp(k) + 7]
    }
    #[inline]
    pub fn vpk(&self, k: usize, m: usize) -> f64 {
        self.d[self.sp(k) + 8 + m]
    }
    #[inline]
    pub fn vmk(&self, k: usize, m: usize) -> f64 {
        self.d[self.sp(k) + 11 + m]
    }
    #[inline]
    pub fn vpk_dot_b(&self, k: usize) -> f64 {
        self.d[self.sp(k) + 14]
    }
    #[inline]
    pub fn vplus_dot_b(&self) -> f64 {
        self.vplus(0) * self.b(0) + self.vplus(1) * self.b(1) + self.vplus(2) * self.b(2)
    }
    /// Hydrodynamic energy of species `k`.
    #[inline]
    pub fn hydro_energy(&self, cfg: &SpeciesTable, k: usize) -> f64 {
        self.p(k) / (cfg.gamma(k) - 1.0) + 0.5 * self.rho(k) * self.v2(k)
    }
    /// Total energy slot `E_k` (includes magnetic and cleaning energy).
    #[inline]
    pub fn total_energy(&self, cfg: &SpeciesTable, k: usize) -> f64 {
        self.hydro_energy(cfg, k) + 0.5 * (self.b2() + self.psi() * self.psi())
    }
}

/// Fills `out` (length [`cache_stride`]) with the derived quantities of one
/// node, validating admissibility and `n_e e > 0` on the way.
pub(crate) fn build_node_cache(u: &[f64], cfg: &SpeciesTable, out: &mut [f64]) -> Result<()> {
    let n = cfg.n_species();
    let bofs = cfg.mag();
    let b = [u[bofs], u[bofs + 1], u[bofs + 2]];
    let psi = u[bofs + 3];
    let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];

    let mut nee = 0.0;
    for k in 0..n {
        nee += cfg.charge_to_mass(k) * u[cfg.block(k)];
    }
    if !(nee > 0.0) {
        return Err(SolverError::DegenerateCharge(nee));
    }

    let mut vplus = [0.0; 3];
    let mut pe = 0.0;
    for k in 0..n {
        let s = cfg.block(k);
        let rho = u[s];
        if !(rho > 0.0) {
            return Err(SolverError::NonPositiveDensity { species: k, value: rho });
        }
        let p = pressure(u, cfg, k);
        if !(p > 0.0) {
            return Err(SolverError::NonPositivePressure { species: k, value: p });
        }
        pe += p;
        let cpk = cfg.charge_to_mass(k) * rho / nee;
        for m in 0..3 {
            vplus[m] += cpk * u[s + 1 + m] / rho;
        }
    }
    pe *= cfg.electron_pressure_alpha();

    out[0] = vplus[0];
    out[1] = vplus[1];
    out[2] = vplus[2];
    out[3] = b[0];
    out[4] = b[1];
    out[5] = b[2];
    out[6] = psi;
    out[7] = b2;
    out[8] = pe;
    out[9] = nee;

    for k in 0..n {
        let s = cfg.block(k);
        let rho = u[s];
        let p = pressure(u, cfg, k);
        let v = [u[s + 1] / rho, u[s + 2] / rho, u[s + 3] / rho];
        let cpk = cfg.charge_to_mass(k) * rho / nee;
        let o = CACHE_SHARED + CACHE_PER_SPECIES * k;
        out[o] = rho;
        out[o + 1] = 0.5 * rho / p;
        out[o + 2] = p;
        out[o + 3] = cpk;
        let mut vpk_dot_b = 0.0;
        for m in 0..3 {
            out[o + 4 + m] = v[m];
            let vpk = cpk * v[m];
            out[o + 8 + m] = vpk;
            out[o + 11 + m] = vplus[m] - vpk;
            vpk_dot_b += vpk * b[m];
        }
        out[o + 7] = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        out[o + 14] = vpk_dot_b;
    }
    Ok(())
}

/// Charge-averaged velocity and the per-species split `v+_k`, `v-_k`.
#[derive(Clone, Debug)]
pub struct AuxVelocities {
    pub v_plus: [f64; 3],
    pub v_plus_k: Vec<[f64; 3]>,
    pub v_minus_k: Vec<[f64; 3]>,
    pub ne_e: f64,
}

pub fn aux_velocities(u: &[f64], cfg: &SpeciesTable) -> Result<AuxVelocities> {
    check_admissible(u, cfg)?;
    let mut cache = vec![0.0; cache_stride(cfg.n_species())];
    build_node_cache(u, cfg, &mut cache)?;
    let c = NodeCache { d: &cache };
    let n = cfg.n_species();
    Ok(AuxVelocities {
        v_plus: [c.vplus(0), c.vplus(1), c.vplus(2)],
        v_plus_k: (0..n)
            .map(|k| [c.vpk(k, 0), c.vpk(k, 1), c.vpk(k, 2)])
            .collect(),
        v_minus_k: (0..n)
            .map(|k| [c.vmk(k, 0), c.vmk(k, 1), c.vmk(k, 2)])
            .collect(),
        ne_e: c.nee(),
    })
}

/// Electron pressure `p_e = alpha sum_k p_k`.
pub fn electron_pressure(u: &[f64], cfg: &SpeciesTable) -> Result<f64> {
    check_admissible(u, cfg)?;
    let mut pe = 0.0;
    for k in 0..cfg.n_species() {
        pe += pressure(u, cfg, k);
    }
    Ok(cfg.electron_pressure_alpha() * pe)
}

/// Analytic advective flux `f^Euler + f^mMHD + f^GLM` in direction `dir`.
pub fn physical_flux(u: &[f64], cfg: &SpeciesTable, c_h: f64, dir: Axis) -> Result<Vec<f64>> {
    check_admissible(u, cfg)?;
    let mut cache = vec![0.0; cache_stride(cfg.n_species())];
    build_node_cache(u, cfg, &mut cache)?;
    let mut out = vec![0.0; cfg.n_vars()];
    physical_flux_cached(NodeCache { d: &cache }, cfg, c_h, dir, &mut out);
    Ok(out)
}

pub(crate) fn physical_flux_cached(
    c: NodeCache,
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
    out: &mut [f64],
) {
    let d = dir.index();
    let n = cfg.n_species();
    for k in 0..n {
        let s = cfg.block(k);
        let rho = c.rho(k);
        let vd = c.v(k, d);
        out[s] = rho * vd;
        for m in 0..3 {
            out[s + 1 + m] = rho * vd * c.v(k, m);
        }
        out[s + 1 + d] += c.p(k);
        out[s + 4] = vd * (c.hydro_energy(cfg, k) + c.p(k))
            + c.vpk(k, d) * c.b2()
            - c.b(d) * c.vpk_dot_b(k)
            + c_h * c.psi() * c.b(d);
    }
    let bofs = cfg.mag();
    for m in 0..3 {
        out[bofs + m] = if m == d {
            c_h * c.psi()
        } else {
            c.vplus(d) * c.b(m) - c.vplus(m) * c.b(d)
        };
    }
    out[bofs + 3] = c_h * c.b(d);
}

/// The local (node-evaluated) factors of the non-conservative terms.
#[derive(Clone, Debug)]
pub struct LocalNoncons {
    /// Godunov-Powell vector, multiplies `dB_dir/dx_dir`.
    pub phi_gp: Vec<f64>,
    /// Lorentz coefficient vector (Hadamard factor).
    pub phi_lor: Vec<f64>,
    /// Lorentz symmetric-part values, same layout.
    pub h_lor: Vec<f64>,
    /// Per-species 3-vectors `h^multi_m = v-_{k,dir} B_m - v-_{k,m} B_dir`.
    pub h_multi: Vec<[f64; 3]>,
    /// GLM vector, multiplies `dpsi/dx_dir`.
    pub phi_glm: Vec<f64>,
}

pub fn noncons_local_vectors(u: &[f64], cfg: &SpeciesTable, dir: Axis) -> Result<LocalNoncons> {
    check_admissible(u, cfg)?;
    let mut cache = vec![0.0; cache_stride(cfg.n_species())];
    build_node_cache(u, cfg, &mut cache)?;
    let c = NodeCache { d: &cache };
    let d = dir.index();
    let n = cfg.n_species();
    let nv = cfg.n_vars();
    let bofs = cfg.mag();

    let mut phi_gp = vec![0.0; nv];
    let mut phi_lor = vec![0.0; nv];
    let mut h_lor = vec![0.0; nv];
    let mut phi_glm = vec![0.0; nv];
    let mut h_multi = Vec::with_capacity(n);
    for k in 0..n {
        let s = cfg.block(k);
        for m in 0..3 {
            phi_gp[s + 1 + m] = c.charge_fraction(k) * c.b(m);
            phi_lor[s + 1 + m] = c.charge_fraction(k);
            h_lor[s + 1 + m] = if m == d {
                0.5 * c.b2() - c.b(d) * c.b(d) + c.pe()
            } else {
                -c.b(d) * c.b(m)
            };
        }
        phi_gp[s + 4] = c.vplus_dot_b();
        phi_lor[s + 4] = c.vpk(k, d);
        h_lor[s + 4] = c.pe();
        phi_glm[s + 4] = c.vplus(d) * c.psi();
        h_multi.push([
            c.vmk(k, d) * c.b(0) - c.vmk(k, 0) * c.b(d),
            c.vmk(k, d) * c.b(1) - c.vmk(k, 1) * c.b(d),
            c.vmk(k, d) * c.b(2) - c.vmk(k, 2) * c.b(d),
        ]);
    }
    for m in 0..3 {
        phi_gp[bofs + m] = c.vplus(m);
    }
    phi_glm[bofs + 3] = c.vplus(d);

    Ok(LocalNoncons {
        phi_gp,
        phi_lor,
        h_lor,
        h_multi,
        phi_glm,
    })
}

/// Non-derivative bundle `Phi = phi^GP B_dir + phi^Lor o h^Lor + B . h^multi
/// + phi^GLM psi` (the consistency target of the two-point terms).
pub fn nonderivative_noncons(u: &[f64], cfg: &SpeciesTable, dir: Axis) -> Result<Vec<f64>> {
    let loc = noncons_local_vectors(u, cfg, dir)?;
    let bofs = cfg.mag();
    let b = [u[bofs], u[bofs + 1], u[bofs + 2]];
    let bd = b[dir.index()];
    let psi = u[bofs + 3];
    let mut out = vec![0.0; cfg.n_vars()];
    for i in 0..cfg.n_vars() {
        out[i] = loc.phi_gp[i] * bd + loc.phi_lor[i] * loc.h_lor[i] + loc.phi_glm[i] * psi;
    }
    for k in 0..cfg.n_species() {
        let e = cfg.block(k) + 4;
        out[e] += b[0] * loc.h_multi[k][0] + b[1] * loc.h_multi[k][1] + b[2] * loc.h_multi[k][2];
    }
    Ok(out)
}

/// Entropy flux potential `Psi = w . (f + Phi) - f^S`.
pub fn entropy_potential(u: &[f64], cfg: &SpeciesTable, c_h: f64, dir: Axis) -> Result<f64> {
    let w = crate::state::cons_to_entropy(u, cfg)?;
    let f = physical_flux(u, cfg, c_h, dir)?;
    let phi = nonderivative_noncons(u, cfg, dir)?;
    let fs = crate::state::entropy_flux(u, cfg, dir)?;
    let mut psi = -fs;
    for i in 0..cfg.n_vars() {
        psi += w[i] * (f[i] + phi[i]);
    }
    Ok(psi)
}

pub(crate) fn fast_speed_cached(c: NodeCache, cfg: &SpeciesTable, normal: [f64; 3]) -> f64 {
    let mut rho_tot = 0.0;
    for k in 0..cfg.n_species() {
        rho_tot += c.rho(k);
    }
    // Alfven velocity b = B / sqrt(rho_total)entering the fast-speed formula.
    let b2 = c.b2() / rho_tot;
    let bn = (c.b(0) * normal[0] + c.b(1) * normal[1] + c.b(2) * normal[2]) / rho_tot.sqrt();
    let mut cf2: f64 = 0.0;
    for k in 0..cfg.n_species() {
        let a2 = cfg.gamma(k) * c.p(k) / c.rho(k);
        let s = a2 + b2;
        let disc = (s * s - 4.0 * a2 * bn * bn).max(0.0);
        cf2 = cf2.max(0.5 * (s + disc.sqrt()));
    }
    cf2.sqrt()
}

/// Fast magnetosonic speed estimate, maximized over species.
pub fn fast_speed(u: &[f64], cfg: &SpeciesTable, normal: [f64; 3]) -> Result<f64> {
    check_admissible(u, cfg)?;
    let mut cache = vec![0.0; cache_stride(cfg.n_species())];
    build_node_cache(u, cfg, &mut cache)?;
    Ok(fast_speed_cached(NodeCache { d: &cache }, cfg, normal))
}

pub(crate) fn lambda_max_interface_cached(
    cl: NodeCache,
    cr: NodeCache,
    cfg: &SpeciesTable,
    normal: [f64; 3],
) -> f64 {
    let vmax = |c: NodeCache| {
        let mut vm = f64::NEG_INFINITY;
        for k in 0..cfg.n_species() {
            vm = vm.max(c.v(k, 0) * normal[0] + c.v(k, 1) * normal[1] + c.v(k, 2) * normal[2]);
        }
        vm
    };
    vmax(cl).max(vmax(cr)) + fast_speed_cached(cl, cfg, normal).max(fast_speed_cached(cr, cfg, normal))
}

/// Interface wave-speed estimate: max of the per-side maximum normal ion
/// speeds plus max of the per-side fast speeds.
pub fn lambda_max_interface(
    ul: &[f64],
    ur: &[f64],
    cfg: &SpeciesTable,
    normal: [f64; 3],
) -> Result<f64> {
    check_admissible(ul, cfg)?;
    check_admissible(ur, cfg)?;
    let stride = cache_stride(cfg.n_species());
    let mut cache = vec![0.0; 2 * stride];
    let (a, b) = cache.split_at_mut(stride);
    build_node_cache(ul, cfg, a)?;
    build_node_cache(ur, cfg, b)?;
    Ok(lambda_max_interface_cached(
        NodeCache { d: a },
        NodeCache { d: b },
        cfg,
        normal,
    ))
}

pub(crate) fn lambda_max_nodal_cached(c: NodeCache, cfg: &SpeciesTable, dimension: usize) -> f64 {
    let mut lambda = 0.0;
    for d in 0..dimension {
        let mut vm = f64::NEG_INFINITY;
        for k in 0..cfg.n_species() {
            vm = vm.max(c.v(k, d));
        }
        let mut normal = [0.0; 3];
        normal[d] = 1.0;
        lambda += vm + fast_speed_cached(c, cfg, normal);
    }
    lambda
}

/// Nodal wave speed for the CFL condition: directional sum over the mesh
/// dimensions.
pub fn lambda_max_nodal(u: &[f64], cfg: &SpeciesTable, dimension: usize) -> Result<f64> {
    check_admissible(u, cfg)?;
    let mut cache = vec![0.0; cache_stride(cfg.n_species())];
    build_node_cache(u, cfg, &mut cache)?;
    Ok(lambda_max_nodal_cached(NodeCache { d: &cache }, cfg, dimension))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{prim_to_cons, Primitive};

    fn two_species() -> SpeciesTable {
        SpeciesTable::new(vec![2.0, 4.0], vec![2.0, 1.0], 0.2).unwrap()
    }

    fn state(cfg: &SpeciesTable, rho: &[f64], v: &[[f64; 3]], p: &[f64], b: [f64; 3], psi: f64) -> Vec<f64> {
        prim_to_cons(
            &Primitive {
                rho: rho.to_vec(),
                v: v.to_vec(),
                p: p.to_vec(),
                b,
                psi,
            },
            cfg,
        )
        .unwrap()
    }

    #[test]
    fn aux_velocities_single_species() {
        let cfg = SpeciesTable::single(1.4, 1.7, 0.0).unwrap();
        let u = state(&cfg, &[1.2], &[[0.4, -0.7, 0.2]], &[0.9], [0.1, 0.2, 0.3], 0.0);
        let aux = aux_velocities(&u, &cfg).unwrap();
        for m in 0..3 {
            assert!((aux.v_plus[m] - aux.v_plus_k[0][m]).abs() < 1e-15);
            assert!(aux.v_minus_k[0][m].abs() < 1e-15);
        }
    }

    #[test]
    fn aux_velocities_equal_weights_average() {
        // equal r_k rho_k, v_1 = e_x, v_2 = e_y  =>  v+ = (1/2, 1/2, 0)
        let cfg = SpeciesTable::new(vec![1.4, 1.4], vec![1.0, 2.0], 0.0).unwrap();
        let u = state(
            &cfg,
            &[1.0, 0.5],
            &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            &[1.0, 1.0],
            [0.0; 3],
            0.0,
        );
        let aux = aux_velocities(&u, &cfg).unwrap();
        assert!((aux.v_plus[0] - 0.5).abs() < 1e-15);
        assert!((aux.v_plus[1] - 0.5).abs() < 1e-15);
        assert!(aux.v_plus[2].abs() < 1e-15);
        // invariants: sum_k v+_k = v+, v+_k + v-_k = v+
        for m in 0..3 {
            let sum: f64 = aux.v_plus_k.iter().map(|v| v[m]).sum();
            assert!((sum - aux.v_plus[m]).abs() < 1e-15);
            for k in 0..2 {
                assert!((aux.v_plus_k[k][m] + aux.v_minus_k[k][m] - aux.v_plus[m]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn electron_pressure_examples() {
        let cfg = two_species();
        let u = state(
            &cfg,
            &[1.0, 1.0],
            &[[0.0; 3]; 2],
            &[1.0, 1.0],
            [0.0; 3],
            0.0,
        );
        assert!((electron_pressure(&u, &cfg).unwrap() - 0.4).abs() < 1e-14);

        let cfg0 = SpeciesTable::new(vec![2.0, 4.0], vec![2.0, 1.0], 0.0).unwrap();
        assert!(electron_pressure(&u, &cfg0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pressure_only_flux_at_rest() {
        let cfg = two_species();
        let u = state(&cfg, &[1.0, 2.0], &[[0.0; 3]; 2], &[0.7, 1.3], [0.0; 3], 0.0);
        for dir in [Axis::X, Axis::Y] {
            let f = physical_flux(&u, &cfg, 0.0, dir).unwrap();
            let d = dir.index();
            for (i, fi) in f.iter().enumerate() {
                let expected = if i == 1 + d {
                    0.7
                } else if i == 6 + d {
                    1.3
                } else {
                    0.0
                };
                assert!((fi - expected).abs() < 1e-14, "slot {i} dir {d}");
            }
        }
    }

    #[test]
    fn glm_rows_vanish_without_cleaning() {
        let cfg = two_species();
        let u = state(
            &cfg,
            &[1.0, 1.5],
            &[[0.3, 0.1, -0.2], [0.1, 0.4, 0.0]],
            &[0.7, 1.1],
            [0.4, -0.3, 0.5],
            0.25,
        );
        let f0 = physical_flux(&u, &cfg, 0.0, Axis::X).unwrap();
        let f1 = physical_flux(&u, &cfg, 1.5, Axis::X).unwrap();
        let bofs = cfg.mag();
        assert!(f0[bofs].abs() < 1e-15); // c_h psi row
        assert!(f0[bofs + 3].abs() < 1e-15); // c_h B_1 row
        assert!((f1[bofs] - 1.5 * 0.25).abs() < 1e-15);
        assert!((f1[bofs + 3] - 1.5 * 0.4).abs() < 1e-15);
        // energy rows differ by c_h psi B_1 per species
        for k in 0..2 {
            let e = cfg.block(k) + 4;
            assert!((f1[e] - f0[e] - 1.5 * 0.25 * 0.4).abs() < 1e-14);
        }
    }

    #[test]
    fn charge_fractions_sum_to_one() {
        let cfg = two_species();
        let u = state(
            &cfg,
            &[0.8, 1.9],
            &[[0.3, -0.2, 0.1], [-0.4, 0.2, 0.6]],
            &[0.5, 1.4],
            [1.0, -0.5, 0.2],
            0.1,
        );
        let loc = noncons_local_vectors(&u, &cfg, Axis::X).unwrap();
        // momentum slots of phi^Lor hold r_k rho_k / n_e e
        let sum: f64 = (0..2).map(|k| loc.phi_lor[cfg.block(k) + 1]).sum();
        assert!((sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_species_multi_term_vanishes() {
        let cfg = SpeciesTable::single(1.4, 1.0, 0.0).unwrap();
        let u = state(&cfg, &[1.1], &[[0.5, -0.3, 0.2]], &[0.8], [0.3, 0.2, -0.1], 0.0);
        let loc = noncons_local_vectors(&u, &cfg, Axis::X).unwrap();
        assert!(loc.h_multi[0].iter().all(|h| h.abs() < 1e-15));
    }

    #[test]
    fn zero_field_local_vectors() {
        let cfg = two_species();
        let u = state(
            &cfg,
            &[1.0, 1.0],
            &[[0.2, 0.1, 0.0], [0.4, -0.1, 0.3]],
            &[1.0, 1.0],
            [0.0; 3],
            0.0,
        );
        let loc = noncons_local_vectors(&u, &cfg, Axis::X).unwrap();
        let bofs = cfg.mag();
        // B slots of phi^GP carry v+; momentum slots and the energy slot vanish
        let aux = aux_velocities(&u, &cfg).unwrap();
        for m in 0..3 {
            assert!((loc.phi_gp[bofs + m] - aux.v_plus[m]).abs() < 1e-15);
        }
        for k in 0..2 {
            let s = cfg.block(k);
            assert!(loc.phi_gp[s + 1].abs() < 1e-15);
            assert!(loc.phi_gp[s + 4].abs() < 1e-15);
        }
    }

    #[test]
    fn fast_speed_reduces_to_sound_speed() {
        let cfg = SpeciesTable::single(5.0 / 3.0, 1.0, 0.0).unwrap();
        let u = state(&cfg, &[1.0], &[[0.0; 3]], &[1.0], [0.0; 3], 0.0);
        let cf = fast_speed(&u, &cfg, [1.0, 0.0, 0.0]).unwrap();
        assert!((cf - (5.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fast_speed_perpendicular_field() {
        // b perpendicular to n: c_f^2 = a^2 + ||b||^2
        let cfg = SpeciesTable::single(1.4, 1.0, 0.0).unwrap();
        let u = state(&cfg, &[2.0], &[[0.0; 3]], &[1.0], [0.0, 0.6, 0.8], 0.0);
        let cf = fast_speed(&u, &cfg, [1.0, 0.0, 0.0]).unwrap();
        let a2 = 1.4 * 1.0 / 2.0;
        let b2 = 1.0 / 2.0;
        assert!((cf * cf - (a2 + b2)).abs() < 1e-14);
    }

    #[test]
    fn fast_speed_rotation_invariant() {
        let cfg = two_species();
        let u = state(
            &cfg,
            &[1.0, 0.7],
            &[[0.3, -0.2, 0.1], [0.2, 0.5, -0.3]],
            &[0.9, 0.6],
            [0.4, 0.3, -0.2],
            0.0,
        );
        let cf0 = fast_speed(&u, &cfg, [1.0, 0.0, 0.0]).unwrap();
        // rotate (v, B, n) by 40 degrees in the x-y plane
        let (s, c) = 40f64.to_radians().sin_cos();
        let rot = |v: [f64; 3]| [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
        let q = crate::state::cons_to_prim(&u, &cfg).unwrap();
        let ur = state(
            &cfg,
            &q.rho,
            &[rot(q.v[0]), rot(q.v[1])],
            &q.p,
            rot(q.b),
            q.psi,
        );
        let cfr = fast_speed(&ur, &cfg, rot([1.0, 0.0, 0.0])).unwrap();
        assert!((cf0 - cfr).abs() < 1e-13);
    }

    #[test]
    fn interface_speed_symmetric_and_additive() {
        let cfg = two_species();
        let ul = state(
            &cfg,
            &[1.0, 0.7],
            &[[0.3, -0.2, 0.1], [0.2, 0.5, -0.3]],
            &[0.9, 0.6],
            [0.4, 0.3, -0.2],
            0.1,
        );
        let ur = state(
            &cfg,
            &[1.4, 0.5],
            &[[-0.1, 0.2, 0.4], [0.6, -0.3, 0.2]],
            &[1.2, 0.8],
            [0.1, -0.4, 0.3],
            -0.2,
        );
        let n = [1.0, 0.0, 0.0];
        let l1 = lambda_max_interface(&ul, &ur, &cfg, n).unwrap();
        let l2 = lambda_max_interface(&ur, &ul, &cfg, n).unwrap();
        assert_eq!(l1, l2);
        assert!(l1 >= fast_speed(&ul, &cfg, n).unwrap());
        assert!(l1 >= fast_speed(&ur, &cfg, n).unwrap());

        // rest vs moving with identical thermodynamics: lambda = 1 + c_f
        let cfg1 = SpeciesTable::single(1.4, 1.0, 0.0).unwrap();
        let ua = state(&cfg1, &[1.0], &[[0.0; 3]], &[1.0], [0.0; 3], 0.0);
        let ub = state(&cfg1, &[1.0], &[[1.0, 0.0, 0.0]], &[1.0], [0.0; 3], 0.0);
        let lam = lambda_max_interface(&ua, &ub, &cfg1, n).unwrap();
        let cf = fast_speed(&ua, &cfg1, n).unwrap();
        assert!((lam - (1.0 + cf)).abs() < 1e-14);
    }

    #[test]
    fn nodal_speed_quiescent_and_1d() {
        let cfg = SpeciesTable::single(1.4, 1.0, 0.0).unwrap();
        let u = state(&cfg, &[1.0], &[[0.0; 3]], &[1.0], [0.0; 3], 0.0);
        let cf = fast_speed(&u, &cfg, [1.0, 0.0, 0.0]).unwrap();
        let l2d = lambda_max_nodal(&u, &cfg, 2).unwrap();
        let l1d = lambda_max_nodal(&u, &cfg, 1).unwrap();
        assert!((l2d - 2.0 * cf).abs() < 1e-14);
        assert!((l1d - cf).abs() < 1e-14);
    }

    #[test]
    fn entropy_potential_euler_reduction() {
        // B = 0, psi = 0, N_i = 1: Psi must match w . f^Euler - f^S = rho v_dir
        let cfg = SpeciesTable::single(1.4, 1.0, 0.0).unwrap();
        let u = state(&cfg, &[1.3], &[[0.4, -0.2, 0.5]], &[0.85], [0.0; 3], 0.0);
        let psi = entropy_potential(&u, &cfg, 0.7, Axis::X).unwrap();
        assert!((psi - 1.3 * 0.4).abs() < 1e-13);
        let psi_y = entropy_potential(&u, &cfg, 0.7, Axis::Y).unwrap();
        assert!((psi_y - 1.3 * (-0.2)).abs() < 1e-13);
    }

    #[test]
    fn entropy_potential_glm_contribution() {
        // The GLM part of Psi is 2 c_h beta_+ psi B_dir.
        let cfg = two_species();
        let u = state(
            &cfg,
            &[1.0, 0.8],
            &[[0.3, 0.2, -0.1], [0.0, 0.4, 0.2]],
            &[0.9, 1.1],
            [0.5, -0.2, 0.3],
            0.4,
        );
        let c_h = 1.3;
        let p0 = entropy_potential(&u, &cfg, 0.0, Axis::X).unwrap();
        let p1 = entropy_potential(&u, &cfg, c_h, Axis::X).unwrap();
        let q = crate::state::cons_to_prim(&u, &cfg).unwrap();
        let beta_plus: f64 = (0..2).map(|k| 0.5 * q.rho[k] / q.p[k]).sum();
        let expected = 2.0 * c_h * beta_plus * q.psi * q.b[0];
        assert!((p1 - p0 - expected).abs() < 1e-13);
    }
}
