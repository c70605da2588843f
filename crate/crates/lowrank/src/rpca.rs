//! Iterative solvers for the convex relaxed R-PCA family and the partial-ADM
//! baseline for relaxed R-LRR, plus the closed-form solver for the
//! Frobenius-noise variant.
//!
//! Both R-PCA solvers run the inexact augmented Lagrangian scheme with a
//! single dual variable `Y` and the update order `A`-then-`E`:
//!
//! ```text
//! A <- svt(X - E + Y/mu, 1/mu)
//! E <- prox(X - A + Y/mu, lambda/mu)     (soft threshold or column shrink)
//! Y <- Y + mu (X - A - E),   mu <- rho mu
//! ```
//!
//! Convergence is declared on primal feasibility alone:
//! `||X - A - E||_F / ||X||_F <= tol`.

use ndarray::{s, Array1, Array2, Axis};
use ndarray_linalg::{JobSvd, SVDDC};

use crate::error::{Error, Result};
use crate::linalg::{
    self, column_shrink, ensure_finite, frobenius, scale_columns, soft_threshold, NormKind,
};

/// Regularization weight for the noise term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    /// Model-dependent default: `1/sqrt(n_(1))` for `l1` noise,
    /// `1/sqrt(log n_(1))` for `l2,1` noise, with `n_(1) = max(m, n)`.
    Auto,
    Fixed(f64),
}

/// Knobs shared by all iterative solvers in this module.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub lambda: Lambda,
    /// Initial penalty; `None` uses `1.25 / ||X||_2`.
    pub mu0: Option<f64>,
    /// Penalty growth factor, must be > 1.
    pub rho: f64,
    /// Relative primal feasibility tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for any randomized sub-step (none of the solvers here draw
    /// random numbers, but callers thread it through for reproducibility).
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            lambda: Lambda::Auto,
            mu0: None,
            rho: 1.5,
            tol: 1e-7,
            max_iter: 1000,
            seed: 0,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if let Lambda::Fixed(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::Usage("lambda must be > 0".into()));
            }
        }
        if let Some(mu) = self.mu0 {
            if !(mu > 0.0) {
                return Err(Error::Usage("mu0 must be > 0".into()));
            }
        }
        if !(self.rho > 1.0) {
            return Err(Error::Usage("rho must be > 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Usage("tol must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Usage("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Default weight for entrywise sparse noise.
pub fn auto_lambda_l1(rows: usize, cols: usize) -> f64 {
    1.0 / (rows.max(cols) as f64).sqrt()
}

/// Default weight for column sparse noise.
pub fn auto_lambda_l21(rows: usize, cols: usize) -> f64 {
    1.0 / (rows.max(cols) as f64).ln().sqrt()
}

/// Output of an R-PCA solve: `X = A + E` with `A` low rank.
#[derive(Debug, Clone)]
pub struct RpcaSolution {
    pub a: Array2<f64>,
    pub e: Array2<f64>,
    pub iterations: usize,
    /// True iff the primal residual met `tol` before `max_iter`.
    pub converged: bool,
    /// `||A||_* + lambda * f(E)` with the noise norm of the solved model.
    pub objective: f64,
    /// The lambda actually used (resolves `Lambda::Auto`).
    pub lambda: f64,
}

/// Which algorithm produced an R-LRR representation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ReduExpr,
    PartialAdm,
    Filtering,
}

/// Output of an R-LRR solve: a representation `Z` and noise `E` with
/// `(X - E) = (X - E) Z`.
#[derive(Debug, Clone)]
pub struct RlrrSolution {
    pub z: Array2<f64>,
    pub e: Array2<f64>,
    pub provenance: Provenance,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
enum NoiseProx {
    Entry,
    Column,
}

/// Relaxed R-PCA (Principal Component Pursuit):
/// `min ||A||_* + lambda ||E||_l1  s.t.  X = A + E`.
pub fn solve_rpca_l1(x: &Array2<f64>, opts: &SolverOptions) -> Result<RpcaSolution> {
    solve_rpca(x, opts, NoiseProx::Entry)
}

/// Column sparse relaxed R-PCA:
/// `min ||A||_* + lambda ||E||_l2,1  s.t.  X = A + E`.
pub fn solve_rpca_l21(x: &Array2<f64>, opts: &SolverOptions) -> Result<RpcaSolution> {
    solve_rpca(x, opts, NoiseProx::Column)
}

fn max_column_norm(m: &Array2<f64>) -> f64 {
    m.axis_iter(Axis(1))
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn solve_rpca(x: &Array2<f64>, opts: &SolverOptions, prox: NoiseProx) -> Result<RpcaSolution> {
    ensure_finite(x)?;
    opts.validate()?;
    let (m, n) = x.dim();
    let lambda = match opts.lambda {
        Lambda::Fixed(l) => l,
        Lambda::Auto => match prox {
            NoiseProx::Entry => auto_lambda_l1(m, n),
            NoiseProx::Column => auto_lambda_l21(m, n),
        },
    };

    let norm_x = frobenius(x);
    if norm_x == 0.0 {
        return Ok(RpcaSolution {
            a: Array2::zeros((m, n)),
            e: Array2::zeros((m, n)),
            iterations: 0,
            converged: true,
            objective: 0.0,
            lambda,
        });
    }

    let sigma1 = linalg::norm(x, NormKind::Spectral)?;
    let mut mu = opts.mu0.unwrap_or(1.25 / sigma1);
    let mu_max = mu * 1e12;

    // Dual-scaled start for Y, as in the standard inexact ALM.
    let dual_scale = match prox {
        NoiseProx::Entry => sigma1.max(x.iter().fold(0.0f64, |a, &v| a.max(v.abs())) / lambda),
        NoiseProx::Column => sigma1.max(max_column_norm(x) / lambda),
    };
    let mut y = x.mapv(|v| v / dual_scale);
    let mut e = Array2::zeros((m, n));
    let mut a = Array2::zeros((m, n));

    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let a_prev = a;
        let w = x - &e + &y.mapv(|v| v / mu);
        a = linalg::svt(&w, 1.0 / mu)?;
        let g = x - &a + &y.mapv(|v| v / mu);
        e = match prox {
            NoiseProx::Entry => soft_threshold(&g, lambda / mu)?,
            NoiseProx::Column => column_shrink(&g, lambda / mu)?,
        };
        let r = x - &a - &e;
        let res = frobenius(&r) / norm_x;
        // The dual can snap onto the noise-norm certificate and zero the
        // primal residual while A is still moving (degenerate inputs where
        // every iterate shares one singular direction), so stationarity of
        // A is required alongside feasibility.
        let moved = frobenius(&(&a - &a_prev)) / norm_x;
        y.scaled_add(mu, &r);
        mu = (mu * opts.rho).min(mu_max);
        if res <= opts.tol && moved <= opts.tol {
            converged = true;
            break;
        }
    }

    let objective = linalg::norm(&a, NormKind::Nuclear)?
        + lambda
            * match prox {
                NoiseProx::Entry => linalg::norm(&e, NormKind::L1)?,
                NoiseProx::Column => linalg::norm(&e, NormKind::L21)?,
            };
    Ok(RpcaSolution {
        a,
        e,
        iterations,
        converged,
        objective,
        lambda,
    })
}

/// Pick the truncation rank `argmin_k  k + lam * sum_{i>k} sigma_i^2`
/// (smallest k on ties).
fn frobenius_shrink_rank(sigma: &Array1<f64>, lam: f64) -> usize {
    let q = sigma.len();
    // tail[k] = sum of sigma_i^2 for i >= k (0-based), so keeping the top k
    // values leaves tail[k] unexplained.
    let mut tail = vec![0.0; q + 1];
    for k in (0..q).rev() {
        tail[k] = tail[k + 1] + sigma[k] * sigma[k];
    }
    let mut best_k = 0;
    let mut best = lam * tail[0];
    for k in 1..=q {
        let cost = k as f64 + lam * tail[k];
        if cost < best {
            best = cost;
            best_k = k;
        }
    }
    best_k
}

/// Closed-form relaxed R-LRR under squared-Frobenius noise:
/// `min ||Z||_* + lambda ||E||_F^2  s.t.  A = A Z, X = A + E`.
///
/// Returns `(A, Z, r)` where `A` keeps the top `r` singular triplets of `X`,
/// `Z = V_1 V_1^T`, and `r = argmin_k k + lambda * sum_{i>k} sigma_i^2`.
pub fn solve_rlrr_frobenius(
    x: &Array2<f64>,
    lambda: f64,
) -> Result<(Array2<f64>, Array2<f64>, usize)> {
    ensure_finite(x)?;
    if !(lambda > 0.0) {
        return Err(Error::Usage("lambda must be > 0".into()));
    }
    let (m, n) = x.dim();
    let (u, sigma, vt) = x.svddc(JobSvd::Some)?;
    let u = u.expect("u");
    let vt = vt.expect("vt");
    let r = frobenius_shrink_rank(&sigma, lambda);
    if r == 0 {
        return Ok((Array2::zeros((m, n)), Array2::zeros((n, n)), 0));
    }
    let u1 = u.slice(s![.., ..r]).to_owned();
    let s1 = sigma.slice(s![..r]).to_owned();
    let v1 = vt.slice(s![..r, ..]).t().to_owned();
    let a = scale_columns(&u1, &s1).dot(&v1.t());
    let z = v1.dot(&v1.t());
    Ok((a, z, r))
}

/// Partial ADM for relaxed R-LRR with `l2,1` noise. The bilinear constraint
/// `A = A Z` stays implicit: each iteration updates `(A, Z)` jointly in
/// closed form by applying the Frobenius-noise rule (with weight `mu/2`,
/// since the quadratic penalty plays the Frobenius-noise role) to
/// `X - E + Y/mu`, then shrinks `E` columnwise and updates the dual.
pub fn solve_rlrr_partial_adm(x: &Array2<f64>, opts: &SolverOptions) -> Result<RlrrSolution> {
    ensure_finite(x)?;
    opts.validate()?;
    let (m, n) = x.dim();
    let lambda = match opts.lambda {
        Lambda::Fixed(l) => l,
        Lambda::Auto => auto_lambda_l21(m, n),
    };

    let norm_x = frobenius(x);
    if norm_x == 0.0 {
        return Ok(RlrrSolution {
            z: Array2::zeros((n, n)),
            e: Array2::zeros((m, n)),
            provenance: Provenance::PartialAdm,
            iterations: 0,
            converged: true,
        });
    }

    let sigma1 = linalg::norm(x, NormKind::Spectral)?;
    let mut mu = opts.mu0.unwrap_or(1.25 / sigma1);
    let mu_max = mu * 1e12;
    let mut y: Array2<f64> = Array2::zeros((m, n));
    let mut e: Array2<f64> = Array2::zeros((m, n));
    let mut v1: Array2<f64> = Array2::zeros((n, 0));

    let mut converged = false;
    let mut iterations = 0;
    let mut a_prev: Array2<f64> = Array2::zeros((m, n));
    for it in 1..=opts.max_iter {
        iterations = it;
        let w = x - &e + &y.mapv(|v| v / mu);
        let (u, sigma, vt) = w.svddc(JobSvd::Some)?;
        let u = u.expect("u");
        let vt = vt.expect("vt");
        let r = frobenius_shrink_rank(&sigma, mu / 2.0);
        let a = if r == 0 {
            v1 = Array2::zeros((n, 0));
            Array2::zeros((m, n))
        } else {
            let u1 = u.slice(s![.., ..r]).to_owned();
            let s1 = sigma.slice(s![..r]).to_owned();
            v1 = vt.slice(s![..r, ..]).t().to_owned();
            scale_columns(&u1, &s1).dot(&v1.t())
        };
        let g = x - &a + &y.mapv(|v| v / mu);
        e = column_shrink(&g, lambda / mu)?;
        let res = x - &a - &e;
        let rel = frobenius(&res) / norm_x;
        let moved = frobenius(&(&a - &a_prev)) / norm_x;
        a_prev = a;
        y.scaled_add(mu, &res);
        mu = (mu * opts.rho).min(mu_max);
        if rel <= opts.tol && moved <= opts.tol {
            converged = true;
            break;
        }
    }

    let z = v1.dot(&v1.t());
    Ok(RlrrSolution {
        z,
        e,
        provenance: Provenance::PartialAdm,
        iterations,
        converged,
    })
}

/// Relative primal residual `||X - A - E||_F / ||X||_F`.
pub fn feasibility_residual(x: &Array2<f64>, a: &Array2<f64>, e: &Array2<f64>) -> f64 {
    let r = x - a - e;
    frobenius(&r) / frobenius(x).max(f64::MIN_POSITIVE)
}
