//! Split-form LGL-DGSEM semidiscretization: volume flux differencing,
//! surface coupling, boundary conditions and the Lorentz source term.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::LglBasis;
use crate::kernels::{KernelPair, KernelScratch};
use crate::mesh::{CartesianMesh, Neighbor};
use crate::physics::{build_node_cache, cache_stride, NodeCache};
use crate::state::{Axis, SpeciesTable};
use crate::{Result, SolverError};

/// Divergence-cleaning configuration. `enabled = false` forces `c_h = 0`.
#[derive(Clone, Copy, Debug)]
pub struct GlmConfig {
    pub enabled: bool,
    pub nu: f64,
}

impl GlmConfig {
    pub fn on(nu: f64) -> Self {
        Self { enabled: true, nu }
    }
    pub fn off() -> Self {
        Self {
            enabled: false,
            nu: 0.0,
        }
    }
}

/// Manufactured/source hook `s(x, y, t)` filling a state-sized slice.
pub type SourceFn = dyn Fn(f64, f64, f64, &mut [f64]) + Send + Sync;

/// Named solver variants wiring volume and surface kernel pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverVariant {
    /// EC volume + EC surface.
    Ec,
    /// EC volume + matrix-dissipation surface.
    Es,
    /// EC volume + Rusanov surface with central non-conservative terms.
    EcLlf,
    /// Central volume + Rusanov surface (standard DGSEM).
    StdDg,
}

impl SolverVariant {
    pub fn volume_kernels(self) -> KernelPair {
        match self {
            SolverVariant::StdDg => KernelPair::central(),
            _ => KernelPair::ec(),
        }
    }

    pub fn surface_kernels(self) -> KernelPair {
        match self {
            SolverVariant::Ec => KernelPair::ec(),
            SolverVariant::Es => KernelPair::es(),
            SolverVariant::EcLlf | SolverVariant::StdDg => KernelPair::llf_central(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ec" => Ok(SolverVariant::Ec),
            "es" => Ok(SolverVariant::Es),
            "ec_llf" => Ok(SolverVariant::EcLlf),
            "std_dg" => Ok(SolverVariant::StdDg),
            other => Err(SolverError::Config(format!(
                "unknown solver variant '{other}' (expected ec, es, ec_llf, std_dg)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverVariant::Ec => "ec",
            SolverVariant::Es => "es",
            SolverVariant::EcLlf => "ec_llf",
            SolverVariant::StdDg => "std_dg",
        }
    }
}

/// Mesh + basis + species + kernel pairing; produces du/dt.
pub struct Semidiscretization {
    pub mesh: CartesianMesh,
    pub basis: LglBasis,
    pub species: SpeciesTable,
    pub volume: KernelPair,
    pub surface: KernelPair,
    pub glm: GlmConfig,
    pub source: Option<Arc<SourceFn>>,
}

impl Semidiscretization {
    pub fn new(
        mesh: CartesianMesh,
        basis: LglBasis,
        species: SpeciesTable,
        variant: SolverVariant,
        glm: GlmConfig,
        source: Option<Arc<SourceFn>>,
    ) -> Self {
        Self {
            mesh,
            basis,
            species,
            volume: variant.volume_kernels(),
            surface: variant.surface_kernels(),
            glm,
            source,
        }
    }

    #[inline]
    pub fn nodes_per_element(&self) -> usize {
        let np = self.basis.n_nodes();
        if self.mesh.dimension == 2 {
            np * np
        } else {
            np
        }
    }

    /// Physical coordinates of node `(i, j)` in element `e`.
    pub fn node_coords(&self, e: usize, i: usize, j: usize) -> (f64, f64) {
        let (x0, y0) = self.mesh.element_origin(e);
        let h = self.mesh.h;
        let x = x0 + 0.5 * h * (self.basis.nodes[i] + 1.0);
        let y = if self.mesh.dimension == 2 {
            y0 + 0.5 * h * (self.basis.nodes[j] + 1.0)
        } else {
            0.0
        };
        (x, y)
    }

    /// Quadrature weight of node `(i, j)` including the mapping Jacobian.
    #[inline]
    pub fn quadrature_weight(&self, i: usize, j: usize) -> f64 {
        let jac = self.mesh.jacobian();
        if self.mesh.dimension == 2 {
            jac * jac * self.basis.weights[i] * self.basis.weights[j]
        } else {
            jac * self.basis.weights[i]
        }
    }
}

/// One state vector per LGL node per element, node-major within an element.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub n_elements: usize,
    pub nodes_per_element: usize,
    pub n_vars: usize,
    pub data: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(n_elements: usize, nodes_per_element: usize, n_vars: usize) -> Self {
        Self {
            n_elements,
            nodes_per_element,
            n_vars,
            data: vec![0.0; n_elements * nodes_per_element * n_vars],
        }
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self::zeros(other.n_elements, other.nodes_per_element, other.n_vars)
    }

    /// Samples a pointwise function at every node.
    pub fn sample(sd: &Semidiscretization, f: impl Fn(f64, f64, &mut [f64])) -> Self {
        let np = sd.basis.n_nodes();
        let nv = sd.species.n_vars();
        let mut u = Self::zeros(sd.mesh.n_elements(), sd.nodes_per_element(), nv);
        let npy = if sd.mesh.dimension == 2 { np } else { 1 };
        for e in 0..u.n_elements {
            for j in 0..npy {
                for i in 0..np {
                    let (x, y) = sd.node_coords(e, i, j);
                    let node = i + np * j;
                    f(x, y, u.node_mut(e, node));
                }
            }
        }
        u
    }

    #[inline]
    pub fn elem(&self, e: usize) -> &[f64] {
        let len = self.nodes_per_element * self.n_vars;
        &self.data[e * len..(e + 1) * len]
    }

    #[inline]
    pub fn node(&self, e: usize, node: usize) -> &[f64] {
        let len = self.nodes_per_element * self.n_vars;
        let ofs = e * len + node * self.n_vars;
        &self.data[ofs..ofs + self.n_vars]
    }

    #[inline]
    pub fn node_mut(&mut self, e: usize, node: usize) -> &mut [f64] {
        let len = self.nodes_per_element * self.n_vars;
        let ofs = e * len + node * self.n_vars;
        &mut self.data[ofs..ofs + self.n_vars]
    }
}

/// Mirror state of a perfectly conducting slip wall: normal velocity and
/// normal magnetic field flip, everything else is copied. Applying it twice
/// returns the input.
pub fn slip_wall_state(u_in: &[f64], normal: [f64; 3], cfg: &SpeciesTable) -> Vec<f64> {
    let mut out = u_in.to_vec();
    for k in 0..cfg.n_species() {
        let s = cfg.block(k);
        let vn = u_in[s + 1] * normal[0] + u_in[s + 2] * normal[1] + u_in[s + 3] * normal[2];
        for m in 0..3 {
            out[s + 1 + m] -= 2.0 * vn * normal[m];
        }
    }
    let b = cfg.mag();
    let bn = u_in[b] * normal[0] + u_in[b + 1] * normal[1] + u_in[b + 2] * normal[2];
    for m in 0..3 {
        out[b + m] -= 2.0 * bn * normal[m];
    }
    out
}

/// Lorentz source column `g` of the governing system (enters du/dt with a
/// negative sign). Entropy-neutral: `w . g = 0`.
pub fn lorentz_source(u: &[f64], cfg: &SpeciesTable) -> Result<Vec<f64>> {
    let mut cache = vec![0.0; cache_stride(cfg.n_species())];
    build_node_cache(u, cfg, &mut cache)?;
    let c = NodeCache { d: &cache };
    let mut g = vec![0.0; cfg.n_vars()];
    lorentz_source_cached(c, cfg, &mut g);
    Ok(g)
}

fn lorentz_source_cached(c: NodeCache, cfg: &SpeciesTable, g: &mut [f64]) {
    for k in 0..cfg.n_species() {
        let s = cfg.block(k);
        let dv = [
            c.vplus(0) - c.v(k, 0),
            c.vplus(1) - c.v(k, 1),
            c.vplus(2) - c.v(k, 2),
        ];
        let cross = [
            dv[1] * c.b(2) - dv[2] * c.b(1),
            dv[2] * c.b(0) - dv[0] * c.b(2),
            dv[0] * c.b(1) - dv[1] * c.b(0),
        ];
        let rk_rho = c.charge_fraction(k) * c.nee();
        g[s + 1] = rk_rho * cross[0];
        g[s + 2] = rk_rho * cross[1];
        g[s + 3] = rk_rho * cross[2];
        g[s + 4] = rk_rho * (c.v(k, 0) * cross[0] + c.v(k, 1) * cross[1] + c.v(k, 2) * cross[2]);
    }
}

/// Reusable buffers of the rhs evaluation (one per running loop).
pub struct RhsWorkspace {
    cache: Vec<f64>,
    stride: usize,
}

impl RhsWorkspace {
    pub fn new(sd: &Semidiscretization) -> Self {
        let stride = cache_stride(sd.species.n_species());
        Self {
            cache: vec![0.0; sd.mesh.n_elements() * sd.nodes_per_element() * stride],
            stride,
        }
    }
}

struct ElementScratch {
    acc: Vec<f64>,
    flux: Vec<f64>,
    phi_ab: Vec<f64>,
    phi_ba: Vec<f64>,
    kernel: KernelScratch,
    wall_state: Vec<f64>,
    wall_cache: Vec<f64>,
    source: Vec<f64>,
}

impl ElementScratch {
    fn new(sd: &Semidiscretization) -> Self {
        let nv = sd.species.n_vars();
        Self {
            acc: vec![0.0; sd.nodes_per_element() * nv],
            flux: vec![0.0; nv],
            phi_ab: vec![0.0; nv],
            phi_ba: vec![0.0; nv],
            kernel: KernelScratch::new(nv),
            wall_state: vec![0.0; nv],
            wall_cache: vec![0.0; cache_stride(sd.species.n_species())],
            source: vec![0.0; nv],
        }
    }
}

/// Semidiscrete right-hand side du/dt for the whole grid.
pub fn rhs(u: &GridFunction, t: f64, sd: &Semidiscretization, c_h: f64) -> Result<GridFunction> {
    let mut out = GridFunction::zeros_like(u);
    let mut ws = RhsWorkspace::new(sd);
    rhs_into(u, t, sd, c_h, &mut ws, &mut out)?;
    Ok(out)
}

pub(crate) fn rhs_into(
    u: &GridFunction,
    t: f64,
    sd: &Semidiscretization,
    c_h: f64,
    ws: &mut RhsWorkspace,
    out: &mut GridFunction,
) -> Result<()> {
    let cfg = &sd.species;
    let nv = cfg.n_vars();
    let np = sd.basis.n_nodes();
    let npe = sd.nodes_per_element();
    let stride = ws.stride;
    let c_h = if sd.glm.enabled { c_h } else { 0.0 };

    // Pass 1: derived node quantities, with admissibility checks.
    let elem_cache_len = npe * stride;
    ws.cache
        .par_chunks_mut(elem_cache_len)
        .enumerate()
        .try_for_each(|(e, chunk)| {
            for node in 0..npe {
                build_node_cache(
                    u.node(e, node),
                    cfg,
                    &mut chunk[node * stride..(node + 1) * stride],
                )
                .map_err(|err| SolverError::AdmissibilityLost {
                    element: e,
                    node,
                    reason: err.to_string(),
                })?;
            }
            Ok::<(), SolverError>(())
        })?;

    let cache = &ws.cache[..];
    let node_cache = |e: usize, node: usize| NodeCache {
        d: &cache[e * elem_cache_len + node * stride..e * elem_cache_len + (node + 1) * stride],
    };

    let jac = sd.mesh.jacobian();
    let elem_len = npe * nv;
    out.data
        .par_chunks_mut(elem_len)
        .enumerate()
        .try_for_each_init(
            || ElementScratch::new(sd),
            |scr, (e, du)| {
                du.fill(0.0);
                let npy = if sd.mesh.dimension == 2 { np } else { 1 };

                for dir in [Axis::X, Axis::Y] {
                    if dir == Axis::Y && sd.mesh.dimension < 2 {
                        break;
                    }
                    scr.acc.fill(0.0);
                    let lines = if dir == Axis::X { npy } else { np };
                    for line in 0..lines {
                        let node_at = |q: usize| match dir {
                            Axis::X => q + np * line,
                            Axis::Y => line + np * q,
                        };
                        // volume flux differencing over node pairs (S is
                        // skew-symmetric, the diagonal vanishes)
                        for a in 0..np {
                            let ca = node_cache(e, node_at(a));
                            for b in (a + 1)..np {
                                let cb = node_cache(e, node_at(b));
                                let s_ab = sd.basis.s(a, b);
                                sd.volume.flux_cached(
                                    ca,
                                    cb,
                                    cfg,
                                    c_h,
                                    dir,
                                    &mut scr.kernel,
                                    &mut scr.flux,
                                );
                                sd.volume.noncons_pair_cached(
                                    ca,
                                    cb,
                                    cfg,
                                    dir,
                                    &mut scr.phi_ab,
                                    &mut scr.phi_ba,
                                );
                                let oa = node_at(a) * nv;
                                let ob = node_at(b) * nv;
                                for v in 0..nv {
                                    scr.acc[oa + v] -= s_ab * (scr.flux[v] + scr.phi_ab[v]);
                                    scr.acc[ob + v] += s_ab * (scr.flux[v] + scr.phi_ba[v]);
                                }
                            }
                        }
                        // surface coupling of the two line ends
                        let (low_nb, high_nb) = match dir {
                            Axis::X => (sd.mesh.neighbor_west(e), sd.mesh.neighbor_east(e)),
                            Axis::Y => (sd.mesh.neighbor_south(e), sd.mesh.neighbor_north(e)),
                        };
                        for (end, nb) in [(0usize, np - 1), (np - 1, 0)] {
                            let neighbor = if end == 0 { low_nb } else { high_nb };
                            let local_node = node_at(end);
                            let cl = node_cache(e, local_node);
                            let cext = match neighbor {
                                Neighbor::Element(ne) => node_cache(ne, node_at(nb)),
                                Neighbor::Wall(normal) => {
                                    let mirrored =
                                        slip_wall_state(u.node(e, local_node), normal, cfg);
                                    scr.wall_state.copy_from_slice(&mirrored);
                                    build_node_cache(&scr.wall_state, cfg, &mut scr.wall_cache)
                                        .expect("mirror of an admissible state is admissible");
                                    NodeCache {
                                        d: &scr.wall_cache,
                                    }
                                }
                            };
                            // dissipative fluxes are orientation-aware
                            if end == 0 {
                                sd.surface.flux_cached(
                                    cext,
                                    cl,
                                    cfg,
                                    c_h,
                                    dir,
                                    &mut scr.kernel,
                                    &mut scr.flux,
                                );
                            } else {
                                sd.surface.flux_cached(
                                    cl,
                                    cext,
                                    cfg,
                                    c_h,
                                    dir,
                                    &mut scr.kernel,
                                    &mut scr.flux,
                                );
                            }
                            sd.surface.noncons_pair_cached(
                                cl,
                                cext,
                                cfg,
                                dir,
                                &mut scr.phi_ab,
                                &mut scr.phi_ba,
                            );
                            let ofs = local_node * nv;
                            let sign = if end == 0 { 1.0 } else { -1.0 };
                            for v in 0..nv {
                                scr.acc[ofs + v] += sign * (scr.flux[v] + scr.phi_ab[v]);
                            }
                        }
                    }
                    // scale by 1/(J w) in the sweep direction
                    for j in 0..npy {
                        for i in 0..np {
                            let node = i + np * j;
                            let wq = match dir {
                                Axis::X => sd.basis.weights[i],
                                Axis::Y => sd.basis.weights[j],
                            };
                            let scale = 1.0 / (jac * wq);
                            let ofs = node * nv;
                            for v in 0..nv {
                                du[ofs + v] += scale * scr.acc[ofs + v];
                            }
                        }
                    }
                }

                // Lorentz source (negative sign: it sits on the lhs of the
                // governing system) and the optional manufactured source.
                for j in 0..npy {
                    for i in 0..np {
                        let node = i + np * j;
                        let ofs = node * nv;
                        scr.source.fill(0.0);
                        lorentz_source_cached(node_cache(e, node), cfg, &mut scr.source);
                        for v in 0..nv {
                            du[ofs + v] -= scr.source[v];
                        }
                        if let Some(src) = &sd.source {
                            let (x, y) = sd.node_coords(e, i, j);
                            scr.source.fill(0.0);
                            src(x, y, t, &mut scr.source);
                            for v in 0..nv {
                                du[ofs + v] += scr.source[v];
                            }
                        }
                    }
                }
                Ok::<(), SolverError>(())
            },
        )?;
    Ok(())
}

/// Entropy production of one element, `sum_j J w_j w(u_j)^T du_j`.
pub fn element_entropy_rate(
    sd: &Semidiscretization,
    u: &GridFunction,
    dudt: &GridFunction,
    e: usize,
) -> Result<f64> {
    let cfg = &sd.species;
    let np = sd.basis.n_nodes();
    let npy = if sd.mesh.dimension == 2 { np } else { 1 };
    let mut w = vec![0.0; cfg.n_vars()];
    let mut rate = 0.0;
    for j in 0..npy {
        for i in 0..np {
            let node = i + np * j;
            let un = u.node(e, node);
            crate::state::check_admissible(un, cfg)?;
            crate::state::cons_to_entropy_unchecked(un, cfg, &mut w);
            let dn = dudt.node(e, node);
            let mut dot = 0.0;
            for v in 0..cfg.n_vars() {
                dot += w[v] * dn[v];
            }
            rate += sd.quadrature_weight(i, j) * dot;
        }
    }
    Ok(rate)
}
