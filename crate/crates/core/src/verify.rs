//! Seeded property suites behind the `verify` CLI subcommand: SBP identity,
//! round trips, kernel consistency, the shuffle condition, SPD of the
//! dissipation matrix and dissipation-sign audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::LglBasis;
use crate::kernels::{
    dense_dissipation_matrix, flux_central, flux_ec, flux_es, flux_llf, noncons_central,
    noncons_ec, tadmor_residual, KernelPair,
};
use crate::physics::{entropy_potential, nonderivative_noncons, physical_flux};
use crate::state::{
    cons_to_entropy, cons_to_prim, entropy_to_cons, prim_to_cons, Axis, Primitive, SpeciesTable,
};

/// Result of one property check.
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the property's defect measure.
    pub worst: f64,
    pub tolerance: f64,
}

pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub results: Vec<PropertyResult>,
    pub vacuous: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Admissible random state with the standard sampler bounds
/// (`rho, p in [0.1, 2]`, `v, B in [-1, 1]`, `psi in [-0.5, 0.5]`).
pub fn random_state(rng: &mut ChaCha8Rng, cfg: &SpeciesTable) -> Vec<f64> {
    let n = cfg.n_species();
    let q = Primitive {
        rho: (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
        v: (0..n)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
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

/// Random species table with 1..=3 species.
pub fn random_species(rng: &mut ChaCha8Rng) -> SpeciesTable {
    let n = rng.gen_range(1..=3);
    SpeciesTable::new(
        (0..n).map(|_| rng.gen_range(1.2..3.0)).collect(),
        (0..n).map(|_| rng.gen_range(0.2..2.0)).collect(),
        rng.gen_range(0.0..0.5),
    )
    .unwrap()
}

/// In-crate LDL^T factorization; returns the smallest pivot (positive for a
/// positive-definite symmetric matrix).
fn ldlt_min_pivot(mat: &[f64], n: usize) -> f64 {
    let mut a = mat.to_vec();
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            let l = a[j * n + k];
            d -= l * l * a[k * n + k];
        }
        a[j * n + j] = d;
        min_pivot = min_pivot.min(d);
        if d <= 0.0 {
            return d;
        }
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k] * a[k * n + k];
            }
            a[i * n + j] = v / d;
        }
    }
    min_pivot
}

/// Runs all property suites with `samples` random draws per property.
pub fn run_verify(seed: u64, samples: usize) -> VerifyReport {
    let mut results = Vec::new();
    let vacuous = samples == 0;

    // SBP identity and quadrature exactness for every supported degree.
    {
        let mut worst: f64 = 0.0;
        for degree in 1..=15 {
            let b = LglBasis::new(degree).unwrap();
            worst = worst.max(b.sbp_defect());
            let total: f64 = b.weights.iter().sum();
            worst = worst.max((total - 2.0).abs());
        }
        results.push(PropertyResult {
            name: "sbp_identity",
            passed: worst <= 1e-13,
            worst,
            tolerance: 1e-13,
        });
    }
    {
        let mut worst: f64 = 0.0;
        for degree in [2usize, 5, 9, 15] {
            let b = LglBasis::new(degree).unwrap();
            for pow in 0..=(2 * degree - 1) {
                let q: f64 = b
                    .nodes
                    .iter()
                    .zip(&b.weights)
                    .map(|(x, w)| w * x.powi(pow as i32))
                    .sum();
                let exact = if pow % 2 == 0 {
                    2.0 / (pow as f64 + 1.0)
                } else {
                    0.0
                };
                worst = worst.max((q - exact).abs());
            }
        }
        results.push(PropertyResult {
            name: "lgl_quadrature_exactness",
            passed: worst <= 1e-12,
            worst,
            tolerance: 1e-12,
        });
    }

    // Round trips cons <-> prim and cons <-> entropy.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let cfg = random_species(&mut rng);
            let u = random_state(&mut rng, &cfg);
            let q = cons_to_prim(&u, &cfg).unwrap();
            let u2 = prim_to_cons(&q, &cfg).unwrap();
            let w = cons_to_entropy(&u, &cfg).unwrap();
            let u3 = entropy_to_cons(&w, &cfg).unwrap();
            for i in 0..u.len() {
                let scale = u[i].abs().max(1.0);
                worst = worst.max((u2[i] - u[i]).abs() / scale);
                worst = worst.max((u3[i] - u[i]).abs() / scale);
            }
        }
        results.push(PropertyResult {
            name: "variable_round_trips",
            passed: vacuous || worst <= 1e-12,
            worst,
            tolerance: 1e-12,
        });
    }

    // Entropy-gradient monotonicity (strict convexity of S).
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5f3c);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let cfg = random_species(&mut rng);
            let ua = random_state(&mut rng, &cfg);
            let ub = random_state(&mut rng, &cfg);
            let wa = cons_to_entropy(&ua, &cfg).unwrap();
            let wb = cons_to_entropy(&ub, &cfg).unwrap();
            let dot: f64 = wa
                .iter()
                .zip(&wb)
                .zip(ua.iter().zip(&ub))
                .map(|((w1, w2), (u1, u2))| (w1 - w2) * (u1 - u2))
                .sum();
            worst = worst.min(dot);
        }
        if vacuous {
            worst = f64::INFINITY;
        }
        results.push(PropertyResult {
            name: "entropy_convexity",
            passed: vacuous || worst > 0.0,
            worst,
            tolerance: 0.0,
        });
    }

    // Consistency of every kernel at (u, u).
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let cfg = random_species(&mut rng);
            let u = random_state(&mut rng, &cfg);
            let c_h = rng.gen_range(0.0..2.0);
            for dir in [Axis::X, Axis::Y] {
                let fa = physical_flux(&u, &cfg, c_h, dir).unwrap();
                let phia = nonderivative_noncons(&u, &cfg, dir).unwrap();
                for flux in [flux_ec, flux_es, flux_llf, flux_central] {
                    let f = flux(&u, &u, &cfg, c_h, dir).unwrap();
                    for i in 0..f.len() {
                        worst = worst.max((f[i] - fa[i]).abs() / fa[i].abs().max(1.0));
                    }
                }
                for noncons in [noncons_ec, noncons_central] {
                    let p = noncons(&u, &u, &cfg, c_h, dir).unwrap();
                    for i in 0..p.len() {
                        worst = worst.max((p[i] - phia[i]).abs() / phia[i].abs().max(1.0));
                    }
                }
            }
        }
        results.push(PropertyResult {
            name: "kernel_consistency",
            passed: vacuous || worst <= 1e-14,
            worst,
            tolerance: 1e-14,
        });
    }

    // Tadmor shuffle condition for the EC pairing, both directions.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7ad);
        let mut worst: f64 = 0.0;
        let pair = KernelPair::ec();
        for _ in 0..samples {
            let cfg = random_species(&mut rng);
            let ul = random_state(&mut rng, &cfg);
            let ur = random_state(&mut rng, &cfg);
            let c_h = rng.gen_range(0.0..2.0);
            for dir in [Axis::X, Axis::Y] {
                let r = tadmor_residual(&ul, &ur, &cfg, c_h, dir, &pair).unwrap();
                let scale = entropy_potential(&ul, &cfg, c_h, dir).unwrap().abs()
                    + entropy_potential(&ur, &cfg, c_h, dir).unwrap().abs()
                    + 1.0;
                worst = worst.max(r.abs() / scale);
            }
        }
        results.push(PropertyResult {
            name: "ec_shuffle_condition",
            passed: vacuous || worst <= 1e-12,
            worst,
            tolerance: 1e-12,
        });
    }

    // SPD dissipation matrix via LDL^T pivots.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd);
        let mut worst = f64::INFINITY;
        for _ in 0..samples.min(200).max(if vacuous { 0 } else { 1 }) {
            let cfg = random_species(&mut rng);
            let ul = random_state(&mut rng, &cfg);
            let ur = random_state(&mut rng, &cfg);
            let h = dense_dissipation_matrix(&ul, &ur, &cfg).unwrap();
            let nv = cfg.n_vars();
            // symmetry defect folded into the same check
            let mut asym: f64 = 0.0;
            for i in 0..nv {
                for j in 0..nv {
                    asym = asym.max((h[i * nv + j] - h[j * nv + i]).abs());
                }
            }
            if asym > 0.0 {
                worst = worst.min(-asym);
            }
            worst = worst.min(ldlt_min_pivot(&h, nv));
        }
        if vacuous {
            worst = f64::INFINITY;
        }
        results.push(PropertyResult {
            name: "dissipation_matrix_spd",
            passed: vacuous || worst > 0.0,
            worst,
            tolerance: 0.0,
        });
    }

    // ES and LLF dissipation signs.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd15);
        let mut worst = f64::NEG_INFINITY;
        let pair = KernelPair::es();
        for _ in 0..samples {
            let cfg = random_species(&mut rng);
            let ul = random_state(&mut rng, &cfg);
            let ur = random_state(&mut rng, &cfg);
            let c_h = rng.gen_range(0.0..2.0);
            let r = tadmor_residual(&ul, &ur, &cfg, c_h, Axis::X, &pair).unwrap();
            worst = worst.max(r);
        }
        if vacuous {
            worst = f64::NEG_INFINITY;
        }
        results.push(PropertyResult {
            name: "es_entropy_dissipation",
            passed: vacuous || worst <= 1e-12,
            worst,
            tolerance: 1e-12,
        });
    }

    VerifyReport {
        seed,
        samples,
        results,
        vacuous,
    }
}
