//! Two-point numerical fluxes and non-conservative terms.
//!
//! Four kernel families are provided:
//! - entropy-conservative (EC) fluxes and non-conservative terms satisfying
//!   the generalized Tadmor shuffle condition,
//! - entropy-stable (ES) fluxes: EC minus a matrix dissipation term
//!   `1/2 lambda H [[w]]` with the SPD dissipation matrix `H`,
//! - local Lax-Friedrichs (Rusanov) fluxes with central non-conservative
//!   terms,
//! - plain central fluxes (the standard DGSEM volume average).
//!
//! Dissipative kernels are orientation-aware: the first argument is the state
//! on the low-coordinate side of the interface.

use crate::physics::{
    build_node_cache, cache_stride, lambda_max_interface_cached, physical_flux_cached, NodeCache,
};
use crate::state::{Axis, SpeciesTable};
use crate::{Result, SolverError};

#[inline]
fn avg(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// Numerically stable logarithmic mean with a series branch near equal
/// arguments (switch at `xi^2 < 1e-4`, `xi = (a-b)/(a+b)`).
pub fn ln_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(SolverError::NonPositiveArgument(a));
    }
    if !(b > 0.0) {
        return Err(SolverError::NonPositiveArgument(b));
    }
    Ok(ln_mean_pos(a, b))
}

#[inline]
pub(crate) fn ln_mean_pos(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    // Sorting keeps the evaluation bitwise commutative.
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let sum = lo + hi;
    let diff = hi - lo;
    let xi2 = (diff / sum) * (diff / sum);
    if xi2 < 1e-4 {
        sum / (2.0 + xi2 * (2.0 / 3.0 + xi2 * (0.4 + xi2 * (2.0 / 7.0))))
    } else {
        diff / (hi / lo).ln()
    }
}

/// Entropy variables straight from cached node quantities.
pub(crate) fn entropy_vars_cached(c: NodeCache, cfg: &SpeciesTable, w: &mut [f64]) {
    let n = cfg.n_species();
    let mut beta_plus = 0.0;
    for k in 0..n {
        let s = cfg.block(k);
        let gamma = cfg.gamma(k);
        let beta = c.beta(k);
        beta_plus += beta;
        let sk = c.p(k).ln() - gamma * c.rho(k).ln();
        w[s] = (gamma - sk) / (gamma - 1.0) - beta * c.v2(k);
        w[s + 1] = 2.0 * beta * c.v(k, 0);
        w[s + 2] = 2.0 * beta * c.v(k, 1);
        w[s + 3] = 2.0 * beta * c.v(k, 2);
        w[s + 4] = -2.0 * beta;
    }
    let bofs = cfg.mag();
    for m in 0..3 {
        w[bofs + m] = 2.0 * beta_plus * c.b(m);
    }
    w[bofs + 3] = 2.0 * beta_plus * c.psi();
}

/// Conservative state reconstructed from a node cache.
pub(crate) fn state_from_cache(c: NodeCache, cfg: &SpeciesTable, u: &mut [f64]) {
    for k in 0..cfg.n_species() {
        let s = cfg.block(k);
        let rho = c.rho(k);
        u[s] = rho;
        u[s + 1] = rho * c.v(k, 0);
        u[s + 2] = rho * c.v(k, 1);
        u[s + 3] = rho * c.v(k, 2);
        u[s + 4] = c.total_energy(cfg, k);
    }
    let bofs = cfg.mag();
    u[bofs] = c.b(0);
    u[bofs + 1] = c.b(1);
    u[bofs + 2] = c.b(2);
    u[bofs + 3] = c.psi();
}

/// Entropy-conservative two-point flux.
pub(crate) fn ec_flux_cached(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
    out: &mut [f64],
) {
    let d = dir.index();
    let n = cfg.n_species();
    let bofs = cfg.mag();

    let ab = [avg(l.b(0), r.b(0)), avg(l.b(1), r.b(1)), avg(l.b(2), r.b(2))];
    let apsi = avg(l.psi(), r.psi());
    let ab2 = avg(l.b2(), r.b2());
    let avp = [
        avg(l.vplus(0), r.vplus(0)),
        avg(l.vplus(1), r.vplus(1)),
        avg(l.vplus(2), r.vplus(2)),
    ];

    // Induction and cleaning rows.
    for m in 0..3 {
        out[bofs + m] = if m == d {
            c_h * apsi
        } else {
            avp[d] * ab[m] - avp[m] * ab[d]
        };
    }
    out[bofs + 3] = c_h * ab[d];

    // Energy contributions shared by all species. The B . f_B term uses the
    // mMHD-only induction rows (slot d zero), the GLM part enters separately.
    let mut fb_dot_ab = 0.0;
    for m in 0..3 {
        if m != d {
            fb_dot_ab += ab[m] * out[bofs + m];
        }
    }
    let glm_energy = 2.0 * c_h * apsi * ab[d] - c_h * avg(l.psi() * l.b(d), r.psi() * r.b(d));

    for k in 0..n {
        let s = cfg.block(k);
        let rho_ln = ln_mean_pos(l.rho(k), r.rho(k));
        let beta_ln = ln_mean_pos(l.beta(k), r.beta(k));
        let av = [
            avg(l.v(k, 0), r.v(k, 0)),
            avg(l.v(k, 1), r.v(k, 1)),
            avg(l.v(k, 2), r.v(k, 2)),
        ];
        let p_bar = avg(l.rho(k), r.rho(k)) / (2.0 * avg(l.beta(k), r.beta(k)));

        let f_rho = rho_ln * av[d];
        out[s] = f_rho;
        for m in 0..3 {
            out[s + 1 + m] = f_rho * av[m];
        }
        out[s + 1 + d] += p_bar;

        // Euler energy.
        let gamma = cfg.gamma(k);
        let mut energy = f_rho
            * (0.5 / ((gamma - 1.0) * beta_ln) - 0.5 * avg(l.v2(k), r.v2(k)))
            + out[s + 1] * av[0]
            + out[s + 2] * av[1]
            + out[s + 3] * av[2];

        // mMHD energy.
        let avpk = [
            avg(l.vpk(k, 0), r.vpk(k, 0)),
            avg(l.vpk(k, 1), r.vpk(k, 1)),
            avg(l.vpk(k, 2), r.vpk(k, 2)),
        ];
        let avmk = [
            avg(l.vmk(k, 0), r.vmk(k, 0)),
            avg(l.vmk(k, 1), r.vmk(k, 1)),
            avg(l.vmk(k, 2), r.vmk(k, 2)),
        ];
        let mut h_star_dot_b = 0.0;
        for m in 0..3 {
            h_star_dot_b += ab[m] * (ab[m] * avmk[d] - avmk[m] * ab[d]);
        }
        energy += fb_dot_ab
            - 0.5 * avg(l.vpk(k, d) * l.b2(), r.vpk(k, d) * r.b2())
            + avg(l.vpk_dot_b(k), r.vpk_dot_b(k)) * ab[d]
            + 0.5 * avg(l.vpk(k, d), r.vpk(k, d)) * ab2
            - (avpk[0] * ab[0] + avpk[1] * ab[1] + avpk[2] * ab[2]) * ab[d]
            - h_star_dot_b;

        out[s + 4] = energy + glm_energy;
    }
}

enum NonconsFlavor {
    EntropyCons,
    Central,
}

/// Both orientations of a two-point non-conservative term; the shared means
/// are computed once.
fn noncons_pair_cached(
    flavor: NonconsFlavor,
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    dir: Axis,
    out_lr: &mut [f64],
    out_rl: &mut [f64],
) {
    let d = dir.index();
    let n = cfg.n_species();
    let bofs = cfg.mag();

    let ab = [avg(l.b(0), r.b(0)), avg(l.b(1), r.b(1)), avg(l.b(2), r.b(2))];
    let apsi = avg(l.psi(), r.psi());
    let pe_bar = avg(l.pe(), r.pe());

    // Lorentz momentum means: products of averages for the EC flavor,
    // averages of pointwise products for the central one.
    let mut h_mom = [0.0; 3];
    for m in 0..3 {
        h_mom[m] = match flavor {
            NonconsFlavor::EntropyCons => {
                if m == d {
                    0.5 * avg(l.b2(), r.b2()) - ab[d] * ab[d] + pe_bar
                } else {
                    -ab[d] * ab[m]
                }
            }
            NonconsFlavor::Central => {
                if m == d {
                    avg(
                        0.5 * l.b2() - l.b(d) * l.b(d) + l.pe(),
                        0.5 * r.b2() - r.b(d) * r.b(d) + r.pe(),
                    )
                } else {
                    avg(-l.b(d) * l.b(m), -r.b(d) * r.b(m))
                }
            }
        };
    }

    for (local, out) in [(l, out_lr), (r, out_rl)] {
        out.fill(0.0);
        let vdotb = local.vplus_dot_b();
        for k in 0..n {
            let s = cfg.block(k);
            let cf = local.charge_fraction(k);
            for m in 0..3 {
                out[s + 1 + m] = cf * (local.b(m) * ab[d] + h_mom[m]);
            }
            let mut energy = vdotb * ab[d] + local.vpk(k, d) * pe_bar;
            for m in 0..3 {
                let h_multi = match flavor {
                    NonconsFlavor::EntropyCons => {
                        ab[m] * avg(l.vmk(k, d), r.vmk(k, d))
                            - avg(l.vmk(k, m), r.vmk(k, m)) * ab[d]
                    }
                    NonconsFlavor::Central => avg(
                        l.vmk(k, d) * l.b(m) - l.vmk(k, m) * l.b(d),
                        r.vmk(k, d) * r.b(m) - r.vmk(k, m) * r.b(d),
                    ),
                };
                energy += local.b(m) * h_multi;
            }
            energy += local.vplus(d) * local.psi() * apsi;
            out[s + 4] = energy;
        }
        for m in 0..3 {
            out[bofs + m] = local.vplus(m) * ab[d];
        }
        out[bofs + 3] = local.vplus(d) * apsi;
    }
}

pub(crate) fn ec_noncons_pair_cached(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    dir: Axis,
    out_lr: &mut [f64],
    out_rl: &mut [f64],
) {
    noncons_pair_cached(NonconsFlavor::EntropyCons, l, r, cfg, dir, out_lr, out_rl);
}

pub(crate) fn central_noncons_pair_cached(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    dir: Axis,
    out_lr: &mut [f64],
    out_rl: &mut [f64],
) {
    noncons_pair_cached(NonconsFlavor::Central, l, r, cfg, dir, out_lr, out_rl);
}

/// Shared means entering the dissipation matrix.
struct HMatMeans {
    tau_plus: f64,
    e_mag2: f64,
    ab: [f64; 3],
    apsi: f64,
}

fn h_matrix_means(l: NodeCache, r: NodeCache, cfg: &SpeciesTable) -> HMatMeans {
    let ab = [avg(l.b(0), r.b(0)), avg(l.b(1), r.b(1)), avg(l.b(2), r.b(2))];
    let apsi = avg(l.psi(), r.psi());
    let mut abeta_plus = 0.0;
    for k in 0..cfg.n_species() {
        abeta_plus += avg(l.beta(k), r.beta(k));
    }
    let tau_plus = 1.0 / (2.0 * abeta_plus);
    let e_mag2 = tau_plus * (ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2] + apsi * apsi);
    HMatMeans {
        tau_plus,
        e_mag2,
        ab,
        apsi,
    }
}

/// Per-species entries of the dissipation matrix block `A_k`.
struct HMatSpecies {
    rho_ln: f64,
    av: [f64; 3],
    p_bar: f64,
    e_bar: f64,
    h55: f64,
}

fn h_matrix_species(l: NodeCache, r: NodeCache, cfg: &SpeciesTable, k: usize, e_mag2: f64) -> HMatSpecies {
    let rho_ln = ln_mean_pos(l.rho(k), r.rho(k));
    let beta_ln = ln_mean_pos(l.beta(k), r.beta(k));
    let av = [
        avg(l.v(k, 0), r.v(k, 0)),
        avg(l.v(k, 1), r.v(k, 1)),
        avg(l.v(k, 2), r.v(k, 2)),
    ];
    let p_bar = avg(l.rho(k), r.rho(k)) / (2.0 * avg(l.beta(k), r.beta(k)));
    let p_star = rho_ln / (2.0 * beta_ln);
    let av_norm2 = av[0] * av[0] + av[1] * av[1] + av[2] * av[2];
    let vbar2 = 2.0 * av_norm2 - avg(l.v2(k), r.v2(k));
    let gamma = cfg.gamma(k);
    let e_bar = p_star / (gamma - 1.0) + 0.5 * rho_ln * vbar2;
    let h55 = (p_star * p_star / (gamma - 1.0) + e_bar * e_bar) / rho_ln
        + p_bar * av_norm2
        + e_mag2;
    HMatSpecies {
        rho_ln,
        av,
        p_bar,
        e_bar,
        h55,
    }
}

/// Subtracts `scale * (H x)` from `out`, using the sparse block structure of
/// the dissipation matrix.
fn h_matvec_sub(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    x: &[f64],
    scale: f64,
    out: &mut [f64],
) {
    let n = cfg.n_species();
    let bofs = cfg.mag();
    let hm = h_matrix_means(l, r, cfg);

    let mut sigma_e = 0.0;
    for k in 0..n {
        sigma_e += x[cfg.block(k) + 4];
    }
    let b_coupling = hm.tau_plus
        * (hm.ab[0] * x[bofs] + hm.ab[1] * x[bofs + 1] + hm.ab[2] * x[bofs + 2]
            + hm.apsi * x[bofs + 3]);

    for k in 0..n {
        let s = cfg.block(k);
        let sp = h_matrix_species(l, r, cfg, k, hm.e_mag2);
        let xk = &x[s..s + 5];
        let y0 = sp.rho_ln * (xk[0] + sp.av[0] * xk[1] + sp.av[1] * xk[2] + sp.av[2] * xk[3])
            + sp.e_bar * xk[4];
        out[s] -= scale * y0;
        for m in 0..3 {
            out[s + 1 + m] -= scale * (sp.av[m] * (y0 + sp.p_bar * xk[4]) + sp.p_bar * xk[1 + m]);
        }
        let mut y4 = sp.e_bar * xk[0] + sp.h55 * xk[4];
        for m in 0..3 {
            y4 += (sp.e_bar + sp.p_bar) * sp.av[m] * xk[1 + m];
        }
        y4 += hm.e_mag2 * (sigma_e - xk[4]) + b_coupling;
        out[s + 4] -= scale * y4;
    }
    for m in 0..3 {
        out[bofs + m] -= scale * hm.tau_plus * (hm.ab[m] * sigma_e + x[bofs + m]);
    }
    out[bofs + 3] -= scale * hm.tau_plus * (hm.apsi * sigma_e + x[bofs + 3]);
}

/// Scratch buffers for the dissipative kernels.
pub(crate) struct KernelScratch {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub s3: Vec<f64>,
}

impl KernelScratch {
    pub fn new(n_vars: usize) -> Self {
        Self {
            s1: vec![0.0; n_vars],
            s2: vec![0.0; n_vars],
            s3: vec![0.0; n_vars],
        }
    }
}

/// Entropy-stable flux: EC flux minus the matrix dissipation.
pub(crate) fn es_flux_cached(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
    scratch: &mut KernelScratch,
    out: &mut [f64],
) {
    ec_flux_cached(l, r, cfg, c_h, dir, out);
    let lambda = lambda_max_interface_cached(l, r, cfg, dir.unit_normal());
    entropy_vars_cached(l, cfg, &mut scratch.s1);
    entropy_vars_cached(r, cfg, &mut scratch.s2);
    for i in 0..out.len() {
        scratch.s3[i] = scratch.s2[i] - scratch.s1[i];
    }
    h_matvec_sub(l, r, cfg, &scratch.s3, 0.5 * lambda, out);
}

/// Central flux `<f>`.
pub(crate) fn central_flux_cached(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
    scratch: &mut KernelScratch,
    out: &mut [f64],
) {
    physical_flux_cached(l, cfg, c_h, dir, out);
    physical_flux_cached(r, cfg, c_h, dir, &mut scratch.s1);
    for i in 0..out.len() {
        out[i] = avg(out[i], scratch.s1[i]);
    }
}

/// Rusanov flux `<f> - 1/2 lambda [[u]]`.
pub(crate) fn llf_flux_cached(
    l: NodeCache,
    r: NodeCache,
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
    scratch: &mut KernelScratch,
    out: &mut [f64],
) {
    central_flux_cached(l, r, cfg, c_h, dir, scratch, out);
    let lambda = lambda_max_interface_cached(l, r, cfg, dir.unit_normal());
    state_from_cache(l, cfg, &mut scratch.s1);
    state_from_cache(r, cfg, &mut scratch.s2);
    for i in 0..out.len() {
        out[i] -= 0.5 * lambda * (scratch.s2[i] - scratch.s1[i]);
    }
}

/// Flux selector of a kernel pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxKind {
    EntropyConservative,
    MatrixDissipation,
    Rusanov,
    Central,
}

/// Non-conservative-term selector of a kernel pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonconsKind {
    EntropyConservative,
    Central,
}

/// A volume or surface flux/non-conservative-term pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelPair {
    pub flux: FluxKind,
    pub noncons: NonconsKind,
}

impl KernelPair {
    pub fn ec() -> Self {
        Self {
            flux: FluxKind::EntropyConservative,
            noncons: NonconsKind::EntropyConservative,
        }
    }
    pub fn es() -> Self {
        Self {
            flux: FluxKind::MatrixDissipation,
            noncons: NonconsKind::EntropyConservative,
        }
    }
    pub fn llf_central() -> Self {
        Self {
            flux: FluxKind::Rusanov,
            noncons: NonconsKind::Central,
        }
    }
    pub fn central() -> Self {
        Self {
            flux: FluxKind::Central,
            noncons: NonconsKind::Central,
        }
    }

    /// Short id used in run metadata.
    pub fn id(&self) -> String {
        let f = match self.flux {
            FluxKind::EntropyConservative => "ec",
            FluxKind::MatrixDissipation => "es",
            FluxKind::Rusanov => "llf",
            FluxKind::Central => "central",
        };
        let n = match self.noncons {
            NonconsKind::EntropyConservative => "ec",
            NonconsKind::Central => "central",
        };
        format!("{f}+{n}")
    }

    pub(crate) fn flux_cached(
        &self,
        l: NodeCache,
        r: NodeCache,
        cfg: &SpeciesTable,
        c_h: f64,
        dir: Axis,
        scratch: &mut KernelScratch,
        out: &mut [f64],
    ) {
        match self.flux {
            FluxKind::EntropyConservative => ec_flux_cached(l, r, cfg, c_h, dir, out),
            FluxKind::MatrixDissipation => es_flux_cached(l, r, cfg, c_h, dir, scratch, out),
            FluxKind::Rusanov => llf_flux_cached(l, r, cfg, c_h, dir, scratch, out),
            FluxKind::Central => central_flux_cached(l, r, cfg, c_h, dir, scratch, out),
        }
    }

    pub(crate) fn noncons_pair_cached(
        &self,
        l: NodeCache,
        r: NodeCache,
        cfg: &SpeciesTable,
        dir: Axis,
        out_lr: &mut [f64],
        out_rl: &mut [f64],
    ) {
        match self.noncons {
            NonconsKind::EntropyConservative => {
                ec_noncons_pair_cached(l, r, cfg, dir, out_lr, out_rl)
            }
            NonconsKind::Central => central_noncons_pair_cached(l, r, cfg, dir, out_lr, out_rl),
        }
    }

    /// Checked two-point flux on raw states.
    pub fn flux(
        &self,
        ul: &[f64],
        ur: &[f64],
        cfg: &SpeciesTable,
        c_h: f64,
        dir: Axis,
    ) -> Result<Vec<f64>> {
        with_pair_caches(ul, ur, cfg, |l, r| {
            let mut scratch = KernelScratch::new(cfg.n_vars());
            let mut out = vec![0.0; cfg.n_vars()];
            self.flux_cached(l, r, cfg, c_h, dir, &mut scratch, &mut out);
            out
        })
    }

    /// Checked two-point non-conservative term; the first argument is the
    /// local state.
    pub fn noncons(
        &self,
        u_local: &[f64],
        u_remote: &[f64],
        cfg: &SpeciesTable,
        _c_h: f64,
        dir: Axis,
    ) -> Result<Vec<f64>> {
        with_pair_caches(u_local, u_remote, cfg, |l, r| {
            let mut out_lr = vec![0.0; cfg.n_vars()];
            let mut out_rl = vec![0.0; cfg.n_vars()];
            self.noncons_pair_cached(l, r, cfg, dir, &mut out_lr, &mut out_rl);
            out_lr
        })
    }
}

fn with_pair_caches<T>(
    ul: &[f64],
    ur: &[f64],
    cfg: &SpeciesTable,
    f: impl FnOnce(NodeCache, NodeCache) -> T,
) -> Result<T> {
    let stride = cache_stride(cfg.n_species());
    let mut buf = vec![0.0; 2 * stride];
    let (a, b) = buf.split_at_mut(stride);
    build_node_cache(ul, cfg, a)?;
    build_node_cache(ur, cfg, b)?;
    Ok(f(NodeCache { d: a }, NodeCache { d: b }))
}

/// Entropy-conservative flux on raw states.
pub fn flux_ec(ul: &[f64], ur: &[f64], cfg: &SpeciesTable, c_h: f64, dir: Axis) -> Result<Vec<f64>> {
    KernelPair::ec().flux(ul, ur, cfg, c_h, dir)
}

/// EC non-conservative term; `u_local` is the node the term belongs to.
pub fn noncons_ec(
    u_local: &[f64],
    u_remote: &[f64],
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
) -> Result<Vec<f64>> {
    KernelPair::ec().noncons(u_local, u_remote, cfg, c_h, dir)
}

/// Entropy-stable flux (EC minus matrix dissipation); `ul` sits on the
/// low-coordinate side.
pub fn flux_es(ul: &[f64], ur: &[f64], cfg: &SpeciesTable, c_h: f64, dir: Axis) -> Result<Vec<f64>> {
    KernelPair::es().flux(ul, ur, cfg, c_h, dir)
}

/// Rusanov (local Lax-Friedrichs) flux; `ul` sits on the low-coordinate side.
pub fn flux_llf(ul: &[f64], ur: &[f64], cfg: &SpeciesTable, c_h: f64, dir: Axis) -> Result<Vec<f64>> {
    KernelPair::llf_central().flux(ul, ur, cfg, c_h, dir)
}

/// Central flux `<f>`.
pub fn flux_central(
    ul: &[f64],
    ur: &[f64],
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
) -> Result<Vec<f64>> {
    KernelPair::central().flux(ul, ur, cfg, c_h, dir)
}

/// Central non-conservative term with local factors.
pub fn noncons_central(
    u_local: &[f64],
    u_remote: &[f64],
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
) -> Result<Vec<f64>> {
    KernelPair::central().noncons(u_local, u_remote, cfg, c_h, dir)
}

/// Signed entropy production of a kernel pair between two states,
/// `r = [[w]] . f* + w_R . Phi(R,L) - w_L . Phi(L,R) - [[Psi]]`.
/// Entropy-conservative pairings return zero up to roundoff.
pub fn tadmor_residual(
    ul: &[f64],
    ur: &[f64],
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
    kernels: &KernelPair,
) -> Result<f64> {
    let wl = crate::state::cons_to_entropy(ul, cfg)?;
    let wr = crate::state::cons_to_entropy(ur, cfg)?;
    let flux = kernels.flux(ul, ur, cfg, c_h, dir)?;
    let phi_lr = kernels.noncons(ul, ur, cfg, c_h, dir)?;
    let phi_rl = kernels.noncons(ur, ul, cfg, c_h, dir)?;
    let psi_l = crate::physics::entropy_potential(ul, cfg, c_h, dir)?;
    let psi_r = crate::physics::entropy_potential(ur, cfg, c_h, dir)?;
    let mut r = -(psi_r - psi_l);
    for i in 0..cfg.n_vars() {
        r += (wr[i] - wl[i]) * flux[i] + wr[i] * phi_rl[i] - wl[i] * phi_lr[i];
    }
    Ok(r)
}

/// Numerical entropy flux of the EC pairing,
/// `<w> . f_ec + 1/2 w_L . Phi(L,R) + 1/2 w_R . Phi(R,L) - <Psi>`.
pub fn numerical_entropy_flux(
    ul: &[f64],
    ur: &[f64],
    cfg: &SpeciesTable,
    c_h: f64,
    dir: Axis,
) -> Result<f64> {
    let pair = KernelPair::ec();
    let wl = crate::state::cons_to_entropy(ul, cfg)?;
    let wr = crate::state::cons_to_entropy(ur, cfg)?;
    let flux = pair.flux(ul, ur, cfg, c_h, dir)?;
    let phi_lr = pair.noncons(ul, ur, cfg, c_h, dir)?;
    let phi_rl = pair.noncons(ur, ul, cfg, c_h, dir)?;
    let psi_l = crate::physics::entropy_potential(ul, cfg, c_h, dir)?;
    let psi_r = crate::physics::entropy_potential(ur, cfg, c_h, dir)?;
    let mut f = -avg(psi_l, psi_r);
    for i in 0..cfg.n_vars() {
        f += avg(wl[i], wr[i]) * flux[i] + 0.5 * (wl[i] * phi_lr[i] + wr[i] * phi_rl[i]);
    }
    Ok(f)
}

/// Dense assembly of the dissipation matrix (row-major `n_vars x n_vars`).
/// Validation-only path; the solver uses the sparse matvec.
pub fn dense_dissipation_matrix(ul: &[f64], ur: &[f64], cfg: &SpeciesTable) -> Result<Vec<f64>> {
    with_pair_caches(ul, ur, cfg, |l, r| {
        let n = cfg.n_species();
        let nv = cfg.n_vars();
        let bofs = cfg.mag();
        let hm = h_matrix_means(l, r, cfg);
        let mut mat = vec![0.0; nv * nv];
        let mut set = |i: usize, j: usize, v: f64| mat[i * nv + j] = v;
        for k in 0..n {
            let s = cfg.block(k);
            let sp = h_matrix_species(l, r, cfg, k, hm.e_mag2);
            set(s, s, sp.rho_ln);
            for m in 0..3 {
                set(s, s + 1 + m, sp.rho_ln * sp.av[m]);
                set(s + 1 + m, s, sp.rho_ln * sp.av[m]);
                for mm in m..3 {
                    let mut v = sp.rho_ln * sp.av[m] * sp.av[mm];
                    if m == mm {
                        v += sp.p_bar;
                    }
                    set(s + 1 + m, s + 1 + mm, v);
                    set(s + 1 + mm, s + 1 + m, v);
                }
                set(s + 1 + m, s + 4, (sp.e_bar + sp.p_bar) * sp.av[m]);
                set(s + 4, s + 1 + m, (sp.e_bar + sp.p_bar) * sp.av[m]);
            }
            set(s, s + 4, sp.e_bar);
            set(s + 4, s, sp.e_bar);
            set(s + 4, s + 4, sp.h55);
            // energy-energy coupling across species
            for kk in 0..n {
                if kk != k {
                    set(s + 4, cfg.block(kk) + 4, hm.e_mag2);
                }
            }
            // coupling to the magnetic/cleaning block
            for m in 0..3 {
                set(s + 4, bofs + m, hm.tau_plus * hm.ab[m]);
                set(bofs + m, s + 4, hm.tau_plus * hm.ab[m]);
            }
            set(s + 4, bofs + 3, hm.tau_plus * hm.apsi);
            set(bofs + 3, s + 4, hm.tau_plus * hm.apsi);
        }
        for m in 0..4 {
            set(bofs + m, bofs + m, hm.tau_plus);
        }
        mat
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{nonderivative_noncons, physical_flux};
    use crate::state::{prim_to_cons, Primitive};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_species() -> SpeciesTable {
        SpeciesTable::new(vec![2.0, 4.0], vec![2.0, 1.0], 0.2).unwrap()
    }

    pub(crate) fn random_state(rng: &mut ChaCha8Rng, cfg: &SpeciesTable) -> Vec<f64> {
        let n = cfg.n_species();
        let q = Primitive {
            rho: (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
            v: (0..n)
                .map(|_| [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ])
                .collect(),
            p: (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
            b: [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ],
            psi: rng.gen_range(-0.5..0.5),
        };
        prim_to_cons(&q, cfg).unwrap()
    }

    #[test]
    fn ln_mean_values() {
        assert_eq!(ln_mean(1.0, 1.0).unwrap(), 1.0);
        let e = std::f64::consts::E;
        assert!((ln_mean(1.0, e).unwrap() - (e - 1.0)).abs() < 1e-14);
        // continuity across the switch point
        assert!((ln_mean(2.0, 2.0 + 1e-13).unwrap() - 2.0).abs() < 1e-12);
        assert!(ln_mean(-1.0, 1.0).is_err());
        assert!(ln_mean(1.0, 0.0).is_err());
        // a^ln lies between min and the arithmetic mean
        let m = ln_mean(0.3, 1.9).unwrap();
        assert!(m > 0.3 && m < avg(0.3, 1.9));
    }

    #[test]
    fn ec_flux_consistent_and_symmetric() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for dir in [Axis::X, Axis::Y] {
            for _ in 0..50 {
                let u = random_state(&mut rng, &cfg);
                let f = flux_ec(&u, &u, &cfg, 1.3, dir).unwrap();
                let fa = physical_flux(&u, &cfg, 1.3, dir).unwrap();
                for i in 0..cfg.n_vars() {
                    let scale = fa[i].abs().max(1.0);
                    assert!(
                        (f[i] - fa[i]).abs() <= 1e-14 * scale,
                        "dir {dir:?} slot {i}: {} vs {}",
                        f[i],
                        fa[i]
                    );
                }
                let ul = random_state(&mut rng, &cfg);
                let f_lr = flux_ec(&ul, &u, &cfg, 1.3, dir).unwrap();
                let f_rl = flux_ec(&u, &ul, &cfg, 1.3, dir).unwrap();
                assert_eq!(f_lr, f_rl);
            }
        }
    }

    #[test]
    fn noncons_consistency() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for dir in [Axis::X, Axis::Y] {
            for _ in 0..50 {
                let u = random_state(&mut rng, &cfg);
                for pair in [KernelPair::ec(), KernelPair::central()] {
                    let phi = pair.noncons(&u, &u, &cfg, 0.9, dir).unwrap();
                    let phi_a = nonderivative_noncons(&u, &cfg, dir).unwrap();
                    for i in 0..cfg.n_vars() {
                        let scale = phi_a[i].abs().max(1.0);
                        assert!(
                            (phi[i] - phi_a[i]).abs() <= 1e-14 * scale,
                            "{:?} slot {i}",
                            pair.noncons
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tadmor_condition_ec() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pair = KernelPair::ec();
        for dir in [Axis::X, Axis::Y] {
            for _ in 0..200 {
                let ul = random_state(&mut rng, &cfg);
                let ur = random_state(&mut rng, &cfg);
                let r = tadmor_residual(&ul, &ur, &cfg, 1.1, dir, &pair).unwrap();
                let scale = crate::physics::entropy_potential(&ul, &cfg, 1.1, dir)
                    .unwrap()
                    .abs()
                    + crate::physics::entropy_potential(&ur, &cfg, 1.1, dir)
                        .unwrap()
                        .abs()
                    + 1.0;
                assert!(r.abs() <= 1e-12 * scale, "dir {dir:?}: residual {r}");
            }
        }
    }

    #[test]
    fn tadmor_zero_at_equal_states() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_state(&mut rng, &cfg);
        for pair in [KernelPair::ec(), KernelPair::es(), KernelPair::llf_central()] {
            let r = tadmor_residual(&u, &u, &cfg, 0.8, Axis::X, &pair).unwrap();
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn es_dissipates_entropy() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pair = KernelPair::es();
        for _ in 0..200 {
            let ul = random_state(&mut rng, &cfg);
            let ur = random_state(&mut rng, &cfg);
            let r = tadmor_residual(&ul, &ur, &cfg, 0.7, Axis::X, &pair).unwrap();
            assert!(r <= 1e-12, "entropy production {r} > 0");
        }
    }

    #[test]
    fn es_quadratic_form_nonnegative() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let ul = random_state(&mut rng, &cfg);
            let ur = random_state(&mut rng, &cfg);
            let wl = crate::state::cons_to_entropy(&ul, &cfg).unwrap();
            let wr = crate::state::cons_to_entropy(&ur, &cfg).unwrap();
            let jw: Vec<f64> = wl.iter().zip(&wr).map(|(a, b)| b - a).collect();
            let h = dense_dissipation_matrix(&ul, &ur, &cfg).unwrap();
            let nv = cfg.n_vars();
            let mut quad = 0.0;
            for i in 0..nv {
                for j in 0..nv {
                    quad += jw[i] * h[i * nv + j] * jw[j];
                }
            }
            assert!(quad >= 0.0, "quadratic form {quad}");
        }
    }

    #[test]
    fn matvec_matches_dense_assembly() {
        let cfg = SpeciesTable::new(vec![1.4, 2.0, 5.0 / 3.0], vec![1.0, 0.5, 2.0], 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let ul = random_state(&mut rng, &cfg);
            let ur = random_state(&mut rng, &cfg);
            let nv = cfg.n_vars();
            let x: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = dense_dissipation_matrix(&ul, &ur, &cfg).unwrap();
            let mut dense = vec![0.0; nv];
            for i in 0..nv {
                for j in 0..nv {
                    dense[i] += h[i * nv + j] * x[j];
                }
            }
            let mut sparse = vec![0.0; nv];
            with_pair_caches(&ul, &ur, &cfg, |l, r| {
                h_matvec_sub(l, r, &cfg, &x, -1.0, &mut sparse);
            })
            .unwrap();
            for i in 0..nv {
                assert!(
                    (dense[i] - sparse[i]).abs() <= 1e-12 * dense[i].abs().max(1.0),
                    "slot {i}: {} vs {}",
                    dense[i],
                    sparse[i]
                );
            }
        }
    }

    #[test]
    fn dissipative_fluxes_consistent_and_orientation_aware() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let u = random_state(&mut rng, &cfg);
        let ur = random_state(&mut rng, &cfg);
        for pair in [KernelPair::es(), KernelPair::llf_central()] {
            let f = pair.flux(&u, &u, &cfg, 0.6, Axis::X).unwrap();
            let fa = physical_flux(&u, &cfg, 0.6, Axis::X).unwrap();
            for i in 0..cfg.n_vars() {
                assert!((f[i] - fa[i]).abs() <= 1e-14 * fa[i].abs().max(1.0));
            }
            // swapping arguments flips the dissipation sign:
            // f(R,L) + f(L,R) = 2 <central part>
            let f_lr = pair.flux(&u, &ur, &cfg, 0.6, Axis::X).unwrap();
            let f_rl = pair.flux(&ur, &u, &cfg, 0.6, Axis::X).unwrap();
            let base = match pair.flux {
                FluxKind::Rusanov => flux_central(&u, &ur, &cfg, 0.6, Axis::X).unwrap(),
                _ => flux_ec(&u, &ur, &cfg, 0.6, Axis::X).unwrap(),
            };
            for i in 0..cfg.n_vars() {
                assert!(
                    (f_lr[i] + f_rl[i] - 2.0 * base[i]).abs() <= 1e-11 * base[i].abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn llf_no_dissipation_at_zero_jump() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let u = random_state(&mut rng, &cfg);
        let f = flux_llf(&u, &u, &cfg, 0.0, Axis::Y).unwrap();
        let c = flux_central(&u, &u, &cfg, 0.0, Axis::Y).unwrap();
        assert_eq!(f, c);
    }

    #[test]
    fn numerical_entropy_flux_properties() {
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for dir in [Axis::X, Axis::Y] {
            let u = random_state(&mut rng, &cfg);
            let fs = numerical_entropy_flux(&u, &u, &cfg, 0.9, dir).unwrap();
            let fa = crate::state::entropy_flux(&u, &cfg, dir).unwrap();
            assert!((fs - fa).abs() <= 1e-12 * fa.abs().max(1.0));
            let ur = random_state(&mut rng, &cfg);
            let f_lr = numerical_entropy_flux(&u, &ur, &cfg, 0.9, dir).unwrap();
            let f_rl = numerical_entropy_flux(&ur, &u, &cfg, 0.9, dir).unwrap();
            assert!((f_lr - f_rl).abs() <= 1e-13 * f_lr.abs().max(1.0));
        }
    }

    #[test]
    fn llf_asymptotic_consistency_of_dissipation() {
        // ||H [[w]] - [[u]]|| / ||[[u]]|| shrinks as the jumps shrink.
        let cfg = two_species();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let base = random_state(&mut rng, &cfg);
        let nv = cfg.n_vars();
        let delta: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut ratios = Vec::new();
        for eps in [1e-2, 1e-4] {
            let ur: Vec<f64> = base.iter().zip(&delta).map(|(u, d)| u + eps * d).collect();
            crate::state::check_admissible(&ur, &cfg).unwrap();
            let wl = crate::state::cons_to_entropy(&base, &cfg).unwrap();
            let wr = crate::state::cons_to_entropy(&ur, &cfg).unwrap();
            let jw: Vec<f64> = wl.iter().zip(&wr).map(|(a, b)| b - a).collect();
            let h = dense_dissipation_matrix(&base, &ur, &cfg).unwrap();
            let mut hw = vec![0.0; nv];
            for i in 0..nv {
                for j in 0..nv {
                    hw[i] += h[i * nv + j] * jw[j];
                }
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..nv {
                let ju = ur[i] - base[i];
                num += (hw[i] - ju) * (hw[i] - ju);
                den += ju * ju;
            }
            ratios.push((num / den).sqrt());
        }
        assert!(ratios[1] < ratios[0], "ratios {ratios:?} not decreasing");
        assert!(ratios[1] < 1e-3, "ratio at eps=1e-4 too large: {}", ratios[1]);
    }

    #[test]
    fn species_duplication_equivalence() {
        // One species split into two identical half-density/half-pressure
        // clones: summed mass/momentum rows and B/psi rows of the EC kernels
        // are unchanged.
        let gamma = 5.0 / 3.0;
        let cfg1 = SpeciesTable::single(gamma, 1.0, 0.2).unwrap();
        let cfg2 = SpeciesTable::new(vec![gamma, gamma], vec![1.0, 1.0], 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let clone_state = |u: &[f64]| {
            let q = crate::state::cons_to_prim(u, &cfg1).unwrap();
            prim_to_cons(
                &Primitive {
                    rho: vec![q.rho[0] / 2.0; 2],
                    v: vec![q.v[0]; 2],
                    p: vec![q.p[0] / 2.0; 2],
                    b: q.b,
                    psi: q.psi,
                },
                &cfg2,
            )
            .unwrap()
        };
        for dir in [Axis::X, Axis::Y] {
            for _ in 0..100 {
                let ul = random_state(&mut rng, &cfg1);
                let ur = random_state(&mut rng, &cfg1);
                let f1 = flux_ec(&ul, &ur, &cfg1, 0.8, dir).unwrap();
                let f2 = flux_ec(&clone_state(&ul), &clone_state(&ur), &cfg2, 0.8, dir).unwrap();
                // summed mass/momentum
                for m in 0..4 {
                    let summed = f2[m] + f2[5 + m];
                    assert!(
                        (summed - f1[m]).abs() <= 1e-13 * f1[m].abs().max(1.0),
                        "dir {dir:?} slot {m}"
                    );
                }
                // induction + cleaning rows
                for m in 0..4 {
                    assert!((f2[10 + m] - f1[5 + m]).abs() <= 1e-13 * f1[5 + m].abs().max(1.0));
                }
            }
        }
    }
}
