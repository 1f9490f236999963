//! Legendre-Gauss-Lobatto nodes, quadrature weights and SBP operator
//! matrices on the reference element `[-1, 1]`.

use crate::{Result, SolverError};

/// Collocated LGL basis of degree `N` with the SBP operators used by the
/// split-form scheme.
#[derive(Clone, Debug)]
pub struct LglBasis {
    pub degree: usize,
    /// Strictly increasing nodes with `xi_0 = -1`, `xi_N = 1`.
    pub nodes: Vec<f64>,
    /// Quadrature weights, `sum = 2`.
    pub weights: Vec<f64>,
    /// Derivative matrix `D_jk = l_k'(xi_j)`, row-major `(N+1) x (N+1)`.
    pub diff: Vec<f64>,
    /// `Q = diag(w) D`.
    pub q: Vec<f64>,
    /// Skew operator `S = 2Q - B` with `B = diag(-1, 0, ..., 0, 1)`.
    pub skew: Vec<f64>,
}

/// Legendre polynomial value and derivative by three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let dp = if (1.0 - x * x).abs() < 1e-14 {
        // endpoint derivative, |P_n'(+-1)| = n(n+1)/2
        let nf = n as f64;
        x.signum().powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        (n as f64) * (p_prev - x * p) / (1.0 - x * x)
    };
    (p, dp)
}

impl LglBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=15).contains(&degree) {
            return Err(SolverError::UnsupportedDegree(degree));
        }
        let n = degree;
        let np = n + 1;
        let mut nodes = vec![0.0; np];
        nodes[0] = -1.0;
        nodes[n] = 1.0;
        // Interior nodes are the roots of P_n'. Newton iteration with
        // Chebyshev-Lobatto initial guesses; P_n'' from the Legendre ODE.
        for j in 1..n {
            let mut x = -(std::f64::consts::PI * j as f64 / n as f64).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let ddp = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
                let dx = dp / ddp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[j] = x;
        }
        // Symmetrize to remove roundoff asymmetry.
        for j in 0..np / 2 {
            let s = 0.5 * (nodes[j] - nodes[n - j]);
            nodes[j] = s;
            nodes[n - j] = -s;
        }
        if n % 2 == 0 {
            nodes[n / 2] = 0.0;
        }

        let mut weights = vec![0.0; np];
        for j in 0..np {
            let (p, _) = legendre(n, nodes[j]);
            weights[j] = 2.0 / ((n * (n + 1)) as f64 * p * p);
        }

        // Barycentric weights for the derivative matrix.
        let mut bary = vec![1.0; np];
        for j in 0..np {
            for k in 0..np {
                if k != j {
                    bary[j] *= nodes[j] - nodes[k];
                }
            }
            bary[j] = 1.0 / bary[j];
        }
        let mut diff = vec![0.0; np * np];
        for j in 0..np {
            let mut row_sum = 0.0;
            for k in 0..np {
                if k != j {
                    let d = bary[k] / (bary[j] * (nodes[j] - nodes[k]));
                    diff[j * np + k] = d;
                    row_sum += d;
                }
            }
            diff[j * np + j] = -row_sum;
        }

        let mut q = vec![0.0; np * np];
        for j in 0..np {
            for k in 0..np {
                q[j * np + k] = weights[j] * diff[j * np + k];
            }
        }
        let mut skew = vec![0.0; np * np];
        for j in 0..np {
            for k in 0..np {
                skew[j * np + k] = 2.0 * q[j * np + k];
            }
        }
        skew[0] += 1.0;
        skew[np * np - 1] -= 1.0;

        Ok(Self {
            degree,
            nodes,
            weights,
            diff,
            q,
            skew,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn d(&self, j: usize, k: usize) -> f64 {
        self.diff[j * self.n_nodes() + k]
    }

    #[inline]
    pub fn s(&self, j: usize, k: usize) -> f64 {
        self.skew[j * self.n_nodes() + k]
    }

    /// Max-abs entry of `Q + Q^T - B` (zero for an exact SBP operator).
    pub fn sbp_defect(&self) -> f64 {
        let np = self.n_nodes();
        let mut worst: f64 = 0.0;
        for j in 0..np {
            for k in 0..np {
                let mut b = 0.0;
                if j == k && j == 0 {
                    b = -1.0;
                }
                if j == k && j == np - 1 {
                    b = 1.0;
                }
                worst = worst.max((self.q[j * np + k] + self.q[k * np + j] - b).abs());
            }
        }
        worst
    }
}
