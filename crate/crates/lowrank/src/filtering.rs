//! Randomized near-linear-time solvers. The column sparse variant samples
//! `s*r` columns, recovers that seed block with a small R-PCA solve, and
//! fills in the remaining columns by closed-form least squares (the `l2,1`
//! regression has the same solution as the Frobenius one). The entrywise
//! variant recovers a seed submatrix and extends it by `l1` regressions on
//! the sampled rows and columns, Nystrom style.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, frobenius, lq_decompose, pseudo_inverse, scale_columns, skinny_svd, soft_threshold,
    NormKind, SkinnySvd,
};
use crate::rpca::{
    auto_lambda_l21, solve_rpca_l1, solve_rpca_l21, Lambda, Provenance, RlrrSolution, RpcaSolution,
    SolverOptions,
};

/// How many times a rank-deficient seed sample is re-drawn before giving up.
const SEED_RETRIES: usize = 3;

/// Configuration for the filtering solvers.
#[derive(Debug, Clone)]
pub struct FilteringConfig {
    /// Estimated rank of the low rank component.
    pub rank: usize,
    /// Column oversampling rate `s > 1`; the seed uses `round(s * rank)`
    /// columns.
    pub oversample: f64,
    /// Row oversampling for the entrywise (`l1`) variant; defaults to
    /// `oversample`.
    pub oversample_rows: Option<f64>,
    /// Column oversampling for the entrywise variant; defaults to
    /// `oversample`.
    pub oversample_cols: Option<f64>,
    pub seed: u64,
    /// Options for the seed-matrix solve (and the `l1` regressions).
    pub inner: SolverOptions,
}

impl FilteringConfig {
    pub fn new(rank: usize) -> Self {
        FilteringConfig {
            rank,
            oversample: 10.0,
            oversample_rows: None,
            oversample_cols: None,
            seed: 0,
            inner: SolverOptions::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, rows: usize, cols: usize, entrywise: bool) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Usage("target rank must be >= 1".into()));
        }
        if !(self.oversample > 1.0) {
            return Err(Error::Usage("oversampling rate must be > 1".into()));
        }
        let sc = self.oversample_cols.unwrap_or(self.oversample);
        if sc * self.rank as f64 > cols as f64 {
            return Err(Error::Usage(format!(
                "s * r = {:.1} exceeds the number of columns {}",
                sc * self.rank as f64,
                cols
            )));
        }
        if entrywise {
            let sr = self.oversample_rows.unwrap_or(self.oversample);
            if !(sr > 1.0) || !(sc > 1.0) {
                return Err(Error::Usage("oversampling rates must be > 1".into()));
            }
            if sr * self.rank as f64 > rows as f64 {
                return Err(Error::Usage(format!(
                    "s_r * r = {:.1} exceeds the number of rows {}",
                    sr * self.rank as f64,
                    rows
                )));
            }
        }
        Ok(())
    }
}

fn sample_count(oversample: f64, rank: usize, limit: usize) -> usize {
    ((oversample * rank as f64).round() as usize).min(limit).max(1)
}

/// Sorted sample of `k` distinct indices from `0..n`.
fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

fn complement(n: usize, chosen: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &j in chosen {
        mask[j] = true;
    }
    (0..n).filter(|&j| !mask[j]).collect()
}

fn gather_columns(x: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), idx.len()));
    for (pos, &j) in idx.iter().enumerate() {
        out.column_mut(pos).assign(&x.column(j));
    }
    out
}

fn gather_rows(x: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((idx.len(), x.ncols()));
    for (pos, &i) in idx.iter().enumerate() {
        out.row_mut(pos).assign(&x.row(i));
    }
    out
}

struct ColumnSeed {
    cols: Vec<usize>,
    rest: Vec<usize>,
    svd: SkinnySvd,
    /// `U_{A_l}^T X_r`, the regression coefficients of the unsampled columns.
    coeffs: Array2<f64>,
    iterations: usize,
    converged: bool,
}

/// Sample columns, recover the seed block, and regress the rest onto it.
fn column_filter_parts(x: &Array2<f64>, cfg: &FilteringConfig) -> Result<ColumnSeed> {
    let (_, n) = x.dim();
    let k = sample_count(cfg.oversample_cols.unwrap_or(cfg.oversample), cfg.rank, n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut last_rank = 0;
    for _attempt in 0..=SEED_RETRIES {
        let cols = sample_sorted(&mut rng, n, k);
        let xl = gather_columns(x, &cols);
        let lambda_l = match cfg.inner.lambda {
            Lambda::Fixed(l) => l,
            Lambda::Auto => 1.0 / (k as f64).ln().sqrt(),
        };
        let inner = SolverOptions {
            lambda: Lambda::Fixed(lambda_l),
            ..cfg.inner.clone()
        };
        let seed_sol = solve_rpca_l21(&xl, &inner)?;
        let svd = skinny_svd(&seed_sol.a)?;
        last_rank = svd.rank();
        if last_rank >= cfg.rank {
            let rest = complement(n, &cols);
            let xr = gather_columns(x, &rest);
            let coeffs = svd.u.t().dot(&xr);
            return Ok(ColumnSeed {
                cols,
                rest,
                svd,
                coeffs,
                iterations: seed_sol.iterations,
                converged: seed_sol.converged,
            });
        }
    }
    Err(Error::SeedDeficient {
        found: last_rank,
        required: cfg.rank,
        attempts: SEED_RETRIES + 1,
    })
}

/// Column sparse R-PCA by l2,1 filtering: recover a sampled seed block, then
/// reconstruct every other column as its least-squares representation in the
/// seed's column space. Columns are restored to their original order.
pub fn l21_filter(x: &Array2<f64>, cfg: &FilteringConfig) -> Result<RpcaSolution> {
    linalg::ensure_finite(x)?;
    let (m, n) = x.dim();
    cfg.validate(m, n, false)?;
    let parts = column_filter_parts(x, cfg)?;

    let a_l = parts.svd.reconstruct();
    let a_r = parts.svd.u.dot(&parts.coeffs);
    let mut a = Array2::zeros((m, n));
    for (pos, &j) in parts.cols.iter().enumerate() {
        a.column_mut(j).assign(&a_l.column(pos));
    }
    for (pos, &j) in parts.rest.iter().enumerate() {
        a.column_mut(j).assign(&a_r.column(pos));
    }
    let e = x - &a;
    let lambda = auto_lambda_l21(m, n);
    let objective =
        linalg::norm(&a, NormKind::Nuclear)? + lambda * linalg::norm(&e, NormKind::L21)?;
    Ok(RpcaSolution {
        a,
        e,
        iterations: parts.iterations,
        converged: parts.converged,
        objective,
        lambda,
    })
}

/// Relaxed R-LRR via l2,1 filtering and the LQ trick: the representation is
/// `Z = V V^T` where `[Sigma_l V_l^T, U_l^T X_r] = L V^T`, so the row space
/// of `A` is obtained without ever forming `A^dag A`.
pub fn fast_rlrr(x: &Array2<f64>, cfg: &FilteringConfig) -> Result<RlrrSolution> {
    linalg::ensure_finite(x)?;
    let (m, n) = x.dim();
    cfg.validate(m, n, false)?;
    let parts = column_filter_parts(x, cfg)?;
    let r = parts.svd.rank();

    // Assemble A-hat with columns back in original order.
    let sig_vt = scale_columns(&parts.svd.v, &parts.svd.sigma).t().to_owned();
    let mut ahat = Array2::zeros((r, n));
    for (pos, &j) in parts.cols.iter().enumerate() {
        ahat.column_mut(j).assign(&sig_vt.column(pos));
    }
    for (pos, &j) in parts.rest.iter().enumerate() {
        ahat.column_mut(j).assign(&parts.coeffs.column(pos));
    }

    let (_l, v) = lq_decompose(&ahat)?;
    let z = v.dot(&v.t());
    let a = parts.svd.u.dot(&ahat);
    let e = x - &a;
    Ok(RlrrSolution {
        z,
        e,
        provenance: Provenance::Filtering,
        iterations: parts.iterations,
        converged: parts.converged,
    })
}

/// Estimate the target rank from the numerical rank of a pilot seed solve.
/// Used by callers that have no rank estimate of their own.
pub fn estimate_rank(x: &Array2<f64>, cfg: &FilteringConfig) -> Result<usize> {
    linalg::ensure_finite(x)?;
    let (_, n) = x.dim();
    if !(cfg.oversample > 1.0) {
        return Err(Error::Usage("oversampling rate must be > 1".into()));
    }
    let width = n
        .min(((2.0 * cfg.oversample).ceil() as usize).max(n / 10))
        .max(2);
    // Separate stream from the main solve so the pilot does not perturb it.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let cols = sample_sorted(&mut rng, n, width);
    let xl = gather_columns(x, &cols);
    let inner = SolverOptions {
        lambda: Lambda::Fixed(1.0 / (width as f64).ln().sqrt()),
        ..cfg.inner.clone()
    };
    let sol = solve_rpca_l21(&xl, &inner)?;
    let rank = skinny_svd(&sol.a)?.rank();
    if rank == 0 {
        return Err(Error::Usage(
            "rank estimate came out zero; supply the rank explicitly".into(),
        ));
    }
    Ok(rank)
}

/// `min ||E||_l1 s.t. C = B Q + E` by ADM with a cached pseudo-inverse of B.
fn l1_regression(
    b: &Array2<f64>,
    c: &Array2<f64>,
    opts: &SolverOptions,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let (_, q_rows) = b.dim();
    let c_cols = c.ncols();
    let norm_c = frobenius(c);
    if norm_c == 0.0 {
        return Ok((Array2::zeros((q_rows, c_cols)), Array2::zeros(c.dim())));
    }
    let b_pinv = pseudo_inverse(b)?;
    let sigma1 = linalg::norm(c, NormKind::Spectral)?;
    let mut mu = 1.25 / sigma1;
    let mu_max = mu * 1e12;
    let mut y: Array2<f64> = Array2::zeros(c.dim());
    let mut e: Array2<f64> = Array2::zeros(c.dim());
    let mut q: Array2<f64> = Array2::zeros((q_rows, c_cols));
    for _ in 0..opts.max_iter {
        q = b_pinv.dot(&(c - &e + &y.mapv(|v| v / mu)));
        let fit = c - &b.dot(&q);
        e = soft_threshold(&(&fit + &y.mapv(|v| v / mu)), 1.0 / mu)?;
        let resid = &fit - &e;
        let rel = frobenius(&resid) / norm_c;
        y.scaled_add(mu, &resid);
        mu = (mu * opts.rho).min(mu_max);
        if rel <= opts.tol {
            break;
        }
    }
    Ok((q, e))
}

/// Entrywise sparse R-PCA by l1 filtering: recover a sampled seed submatrix,
/// extend along the sampled rows and columns by l1 regressions, and fill the
/// remaining block with the generalized Nystrom product `P^T A^s Q`.
pub fn l1_filter(x: &Array2<f64>, cfg: &FilteringConfig) -> Result<RpcaSolution> {
    linalg::ensure_finite(x)?;
    let (m, n) = x.dim();
    cfg.validate(m, n, true)?;
    let kr = sample_count(cfg.oversample_rows.unwrap_or(cfg.oversample), cfg.rank, m);
    let kc = sample_count(cfg.oversample_cols.unwrap_or(cfg.oversample), cfg.rank, n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut seed_state = None;
    let mut last_rank = 0;
    for _attempt in 0..=SEED_RETRIES {
        let rows = sample_sorted(&mut rng, m, kr);
        let cols = sample_sorted(&mut rng, n, kc);
        let xs = gather_rows(&gather_columns(x, &cols), &rows);
        let lambda_s = match cfg.inner.lambda {
            Lambda::Fixed(l) => l,
            Lambda::Auto => 1.0 / (kr.max(kc) as f64).sqrt(),
        };
        let inner = SolverOptions {
            lambda: Lambda::Fixed(lambda_s),
            ..cfg.inner.clone()
        };
        let sol = solve_rpca_l1(&xs, &inner)?;
        last_rank = skinny_svd(&sol.a)?.rank();
        if last_rank >= cfg.rank {
            seed_state = Some((rows, cols, sol));
            break;
        }
    }
    let (rows, cols, seed_sol) = seed_state.ok_or(Error::SeedDeficient {
        found: last_rank,
        required: cfg.rank,
        attempts: SEED_RETRIES + 1,
    })?;

    let rest_rows = complement(m, &rows);
    let rest_cols = complement(n, &cols);
    let a_s = &seed_sol.a;

    // X^c = A^s Q + E^c over the sampled rows, X^r = P^T A^s + E^r over the
    // sampled columns.
    let xc = gather_rows(&gather_columns(x, &rest_cols), &rows);
    let xr = gather_rows(&gather_columns(x, &cols), &rest_rows);
    let (q, _ec) = l1_regression(a_s, &xc, &cfg.inner)?;
    let (p, _er) = {
        let bt = a_s.t().to_owned();
        let ct = xr.t().to_owned();
        l1_regression(&bt, &ct, &cfg.inner)?
    };

    let a_c = a_s.dot(&q);
    let a_r = p.t().dot(a_s);
    let a_tilde = p.t().dot(&a_s.dot(&q));

    let mut a = Array2::zeros((m, n));
    scatter_block(&mut a, &rows, &cols, a_s);
    scatter_block(&mut a, &rows, &rest_cols, &a_c);
    scatter_block(&mut a, &rest_rows, &cols, &a_r);
    scatter_block(&mut a, &rest_rows, &rest_cols, &a_tilde);
    let e = x - &a;
    let lambda = crate::rpca::auto_lambda_l1(m, n);
    let objective =
        linalg::norm(&a, NormKind::Nuclear)? + lambda * linalg::norm(&e, NormKind::L1)?;
    Ok(RpcaSolution {
        a,
        e,
        iterations: seed_sol.iterations,
        converged: seed_sol.converged,
        objective,
        lambda,
    })
}

fn scatter_block(a: &mut Array2<f64>, rows: &[usize], cols: &[usize], block: &Array2<f64>) {
    for (bi, &i) in rows.iter().enumerate() {
        for (bj, &j) in cols.iter().enumerate() {
            a[(i, j)] = block[(bi, bj)];
        }
    }
}
