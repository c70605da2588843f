//! Dense linear-algebra kernels and shrinkage primitives used by every solver:
//! skinny SVD, Moore-Penrose pseudo-inverse, LQ factorization, matrix norms,
//! and the proximal operators of the nuclear, `l1`, and `l2,1` norms.

use ndarray::{s, Array1, Array2, Axis};
use ndarray_linalg::{JobSvd, SVDDC, QR};

use crate::error::{Error, Result};

/// Singular values at or below `max(m, n) * eps * sigma_1` are treated as zero
/// when deciding numerical rank.
pub fn rank_cutoff(rows: usize, cols: usize, sigma1: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma1
}

/// Threshold under which an entry (or a column, by Euclidean norm) of `m`
/// counts as zero for the `l0` / `l2,0` counting norms.
pub fn zero_threshold(m: &Array2<f64>) -> f64 {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    1e-6 * frobenius(m) / ((rows * cols) as f64).sqrt()
}

pub(crate) fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn ensure_finite(m: &Array2<f64>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::InvalidInput("matrix has a zero dimension".into()));
    }
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "matrix contains non-finite entries".into(),
        ))
    }
}

/// Skinny SVD: only the singular triplets with nonzero singular value are kept.
#[derive(Debug, Clone)]
pub struct SkinnySvd {
    /// Left singular vectors, `m x r`, column orthonormal.
    pub u: Array2<f64>,
    /// Nonzero singular values, non-increasing.
    pub sigma: Array1<f64>,
    /// Right singular vectors, `n x r`, column orthonormal.
    pub v: Array2<f64>,
}

impl SkinnySvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U * diag(sigma) * V^T`.
    pub fn reconstruct(&self) -> Array2<f64> {
        if self.rank() == 0 {
            return Array2::zeros((self.u.nrows(), self.v.nrows()));
        }
        scale_columns(&self.u, &self.sigma).dot(&self.v.t())
    }
}

pub(crate) fn scale_columns(m: &Array2<f64>, scale: &Array1<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for (mut col, &s) in out.axis_iter_mut(Axis(1)).zip(scale.iter()) {
        col.mapv_inplace(|x| x * s);
    }
    out
}

/// Skinny SVD of `m`, truncated at the numerical rank.
pub fn skinny_svd(m: &Array2<f64>) -> Result<SkinnySvd> {
    ensure_finite(m)?;
    let (rows, cols) = m.dim();
    let (u, sigma, vt) = m.svddc(JobSvd::Some)?;
    let u = u.expect("left singular vectors requested");
    let vt = vt.expect("right singular vectors requested");
    let cutoff = rank_cutoff(rows, cols, sigma.get(0).copied().unwrap_or(0.0));
    let r = sigma.iter().take_while(|&&s| s > cutoff).count();
    Ok(SkinnySvd {
        u: u.slice(s![.., ..r]).to_owned(),
        sigma: sigma.slice(s![..r]).to_owned(),
        v: vt.slice(s![..r, ..]).t().to_owned(),
    })
}

/// Singular values of `m` (all of them, non-increasing), without vectors.
pub fn singular_values(m: &Array2<f64>) -> Result<Array1<f64>> {
    ensure_finite(m)?;
    let (_, sigma, _) = m.svddc(JobSvd::None)?;
    Ok(sigma)
}

/// Numerical rank of `m` under the truncation rule of [`rank_cutoff`].
pub fn numerical_rank(m: &Array2<f64>) -> Result<usize> {
    let sigma = singular_values(m)?;
    let cutoff = rank_cutoff(m.nrows(), m.ncols(), sigma.get(0).copied().unwrap_or(0.0));
    Ok(sigma.iter().take_while(|&&s| s > cutoff).count())
}

/// Moore-Penrose pseudo-inverse `M^dag = V * diag(1/sigma) * U^T`.
pub fn pseudo_inverse(m: &Array2<f64>) -> Result<Array2<f64>> {
    let svd = skinny_svd(m)?;
    if svd.rank() == 0 {
        return Ok(Array2::zeros((m.ncols(), m.nrows())));
    }
    let inv_sigma = svd.sigma.mapv(|s| 1.0 / s);
    Ok(scale_columns(&svd.v, &inv_sigma).dot(&svd.u.t()))
}

/// LQ factorization `M = L * V^T` with `L` lower triangular (lower trapezoidal
/// when `m > n`) and `V` column orthonormal. Computed as the transposed QR of
/// `M^T`; signs are normalized so the diagonal of `L` is non-negative.
pub fn lq_decompose(m: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    ensure_finite(m)?;
    let (q, r) = m.t().to_owned().qr()?;
    let mut l = r.t().to_owned();
    let mut v = q;
    // Flip paired column signs so diag(L) >= 0.
    let k = l.ncols().min(l.nrows());
    for i in 0..k {
        if l[(i, i)] < 0.0 {
            l.column_mut(i).mapv_inplace(|x| -x);
            v.column_mut(i).mapv_inplace(|x| -x);
        }
    }
    Ok((l, v))
}

/// The matrix norms used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Sum of singular values.
    Nuclear,
    /// Sum of absolute entries.
    L1,
    /// Sum of column Euclidean norms.
    L21,
    Fro,
    /// Number of nonzero entries (see [`zero_threshold`]).
    L0,
    /// Number of nonzero columns.
    L20,
    /// Largest singular value.
    Spectral,
}

pub fn norm(m: &Array2<f64>, kind: NormKind) -> Result<f64> {
    ensure_finite(m)?;
    Ok(match kind {
        NormKind::Nuclear => singular_values(m)?.sum(),
        NormKind::L1 => m.iter().map(|x| x.abs()).sum(),
        NormKind::L21 => m
            .axis_iter(Axis(1))
            .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum(),
        NormKind::Fro => frobenius(m),
        NormKind::L0 => {
            let t = zero_threshold(m);
            m.iter().filter(|x| x.abs() > t).count() as f64
        }
        NormKind::L20 => nonzero_columns(m).len() as f64,
        NormKind::Spectral => singular_values(m)?.get(0).copied().unwrap_or(0.0),
    })
}

/// Indices of the columns whose Euclidean norm exceeds the zero threshold.
/// This is how noise indices are read off a column-sparse `E`.
pub fn nonzero_columns(m: &Array2<f64>) -> Vec<usize> {
    let t = zero_threshold(m);
    m.axis_iter(Axis(1))
        .enumerate()
        .filter(|(_, c)| c.iter().map(|x| x * x).sum::<f64>().sqrt() > t)
        .map(|(j, _)| j)
        .collect()
}

/// Singular value thresholding `U * diag(max(sigma - tau, 0)) * V^T`,
/// the proximal operator of `tau * ||.||_*`.
pub fn svt(m: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::Usage("svt threshold must be >= 0".into()));
    }
    let svd = skinny_svd(m)?;
    let kept = svd.sigma.iter().take_while(|&&s| s > tau).count();
    if kept == 0 {
        return Ok(Array2::zeros(m.dim()));
    }
    let shrunk = svd.sigma.slice(s![..kept]).mapv(|s| s - tau);
    Ok(scale_columns(&svd.u.slice(s![.., ..kept]).to_owned(), &shrunk)
        .dot(&svd.v.slice(s![.., ..kept]).t()))
}

/// Entrywise soft thresholding `sign(x) * max(|x| - tau, 0)`.
pub fn soft_threshold(m: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::Usage("soft threshold must be >= 0".into()));
    }
    Ok(m.mapv(|x| x.signum() * (x.abs() - tau).max(0.0)))
}

/// Columnwise shrinkage `c * max(||c|| - tau, 0) / ||c||`, the proximal
/// operator of `tau * ||.||_{2,1}`.
pub fn column_shrink(m: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::Usage("column shrink threshold must be >= 0".into()));
    }
    let mut out = m.clone();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let nrm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm <= tau {
            col.fill(0.0);
        } else {
            let scale = (nrm - tau) / nrm;
            col.mapv_inplace(|x| x * scale);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    pub(crate) fn randn(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
    }

    fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let mut diff = a.clone();
        diff -= b;
        frobenius(&diff) / frobenius(b).max(1e-300)
    }

    #[test]
    fn skinny_svd_identity() {
        let m = Array2::eye(2);
        let svd = skinny_svd(&m).unwrap();
        assert_eq!(svd.rank(), 2);
        assert_abs_diff_eq!(svd.sigma[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(svd.sigma[1], 1.0, epsilon = 1e-12);
        assert!(rel_err(&svd.reconstruct(), &m) < 1e-12);
    }

    #[test]
    fn skinny_svd_rank_one_matches_gram_eigenvalues() {
        // Oracle: the nonzero singular value of M is the square root of the
        // nonzero eigenvalue of M^T M, computed here in closed form for 2x2.
        let m: Array2<f64> = array![[1.0, 2.0], [2.0, 4.0]];
        let g = m.t().dot(&m);
        let tr = g[(0, 0)] + g[(1, 1)];
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let lam_max = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        let svd = skinny_svd(&m).unwrap();
        assert_eq!(svd.rank(), 1);
        assert_abs_diff_eq!(svd.sigma[0], lam_max.sqrt(), epsilon = 1e-10);
        // Singular vectors proportional to (1, 2)/sqrt(5) up to sign.
        let dir = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
        let ud = (svd.u[(0, 0)] * dir[0] + svd.u[(1, 0)] * dir[1]).abs();
        let vd = (svd.v[(0, 0)] * dir[0] + svd.v[(1, 0)] * dir[1]).abs();
        assert_abs_diff_eq!(ud, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(vd, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn skinny_svd_zero_matrix() {
        let m = Array2::zeros((3, 4));
        let svd = skinny_svd(&m).unwrap();
        assert_eq!(svd.rank(), 0);
        assert_eq!(svd.reconstruct(), m);
    }

    #[test]
    fn skinny_svd_rejects_non_finite() {
        let m = array![[1.0, f64::NAN]];
        assert!(matches!(skinny_svd(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn skinny_svd_reconstruction_random() {
        let m = randn(15, 9, 7);
        let svd = skinny_svd(&m).unwrap();
        assert!(rel_err(&svd.reconstruct(), &m) < 1e-10);
        // Orthonormality of the factors.
        let utu = svd.u.t().dot(&svd.u);
        let vtv = svd.v.t().dot(&svd.v);
        assert!(rel_err(&utu, &Array2::eye(svd.rank())) < 1e-10);
        assert!(rel_err(&vtv, &Array2::eye(svd.rank())) < 1e-10);
    }

    #[test]
    fn pseudo_inverse_diagonal() {
        let m = array![[2.0, 0.0], [0.0, 0.0]];
        let p = pseudo_inverse(&m).unwrap();
        assert!(rel_err(&p, &array![[0.5, 0.0], [0.0, 0.0]]) < 1e-12);
    }

    #[test]
    fn pseudo_inverse_of_orthonormal_is_transpose() {
        let q = skinny_svd(&randn(8, 3, 11)).unwrap().u;
        let p = pseudo_inverse(&q).unwrap();
        assert!(rel_err(&p, &q.t().to_owned()) < 1e-10);
    }

    #[test]
    fn moore_penrose_identities() {
        for seed in 0..5u64 {
            let m = randn(5, 3, 100 + seed);
            let p = pseudo_inverse(&m).unwrap();
            let mpm = m.dot(&p).dot(&m);
            let pmp = p.dot(&m).dot(&p);
            assert!(rel_err(&mpm, &m) < 1e-9, "M M+ M = M");
            assert!(rel_err(&pmp, &p) < 1e-9, "M+ M M+ = M+");
            let mp = m.dot(&p);
            let pm = p.dot(&m);
            assert!(rel_err(&mp, &mp.t().to_owned()) < 1e-9, "(M M+)^T = M M+");
            assert!(rel_err(&pm, &pm.t().to_owned()) < 1e-9, "(M+ M)^T = M+ M");
            // M+ M is the projector onto the row space: idempotent, rank r.
            assert!(rel_err(&pm.dot(&pm), &pm) < 1e-9);
            assert_eq!(numerical_rank(&pm).unwrap(), numerical_rank(&m).unwrap());
        }
    }

    #[test]
    fn lq_single_row() {
        let m = array![[3.0, 4.0]];
        let (l, v) = lq_decompose(&m).unwrap();
        assert_abs_diff_eq!(l[(0, 0)], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[(0, 0)], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(v[(1, 0)], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn lq_row_orthonormal_gives_identity_l() {
        let v0 = skinny_svd(&randn(10, 4, 3)).unwrap().u; // 10x4 orthonormal
        let m = v0.t().to_owned(); // 4x10 with orthonormal rows
        let (l, v) = lq_decompose(&m).unwrap();
        assert!(rel_err(&l, &Array2::eye(4)) < 1e-10);
        assert!(rel_err(&l.dot(&v.t()), &m) < 1e-10);
    }

    #[test]
    fn lq_reconstructs_random_wide() {
        let m = randn(4, 10, 21);
        let (l, v) = lq_decompose(&m).unwrap();
        assert!(rel_err(&l.dot(&v.t()), &m) < 1e-10);
        let vtv = v.t().dot(&v);
        assert!(rel_err(&vtv, &Array2::eye(4)) < 1e-10);
        // L must be lower triangular.
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_abs_diff_eq!(l[(i, j)], 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn norms_on_diag_3_4() {
        let m = array![[3.0, 0.0], [0.0, 4.0]];
        assert_abs_diff_eq!(norm(&m, NormKind::Nuclear).unwrap(), 7.0, epsilon = 1e-9);
        assert_abs_diff_eq!(norm(&m, NormKind::Fro).unwrap(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm(&m, NormKind::L1).unwrap(), 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm(&m, NormKind::L21).unwrap(), 7.0, epsilon = 1e-12);
        assert_eq!(norm(&m, NormKind::L0).unwrap(), 2.0);
        assert_eq!(norm(&m, NormKind::L20).unwrap(), 2.0);
        assert_abs_diff_eq!(norm(&m, NormKind::Spectral).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn norms_on_zero_matrix() {
        let m = Array2::zeros((3, 3));
        for kind in [
            NormKind::Nuclear,
            NormKind::L1,
            NormKind::L21,
            NormKind::Fro,
            NormKind::L0,
            NormKind::L20,
            NormKind::Spectral,
        ] {
            assert_eq!(norm(&m, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn column_norms_count_single_column() {
        let m = array![[1.0, 0.0], [1.0, 0.0]];
        assert_abs_diff_eq!(
            norm(&m, NormKind::L21).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(norm(&m, NormKind::L20).unwrap(), 1.0);
        assert_eq!(nonzero_columns(&m), vec![0]);
    }

    #[test]
    fn nuclear_matches_skinny_sigma_sum() {
        let m = randn(12, 20, 5);
        let svd = skinny_svd(&m).unwrap();
        assert_abs_diff_eq!(
            norm(&m, NormKind::Nuclear).unwrap(),
            svd.sigma.sum(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn svt_examples() {
        let m = array![[3.0, 0.0], [0.0, 1.0]];
        let out = svt(&m, 2.0).unwrap();
        assert!(rel_err(&out, &array![[1.0, 0.0], [0.0, 0.0]]) < 1e-12);

        let m = randn(6, 5, 9);
        assert!(rel_err(&svt(&m, 0.0).unwrap(), &m) < 1e-10);

        // Rank-one matrix with sigma = 5 vanishes at tau = 5.
        let m = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(frobenius(&svt(&m, 5.0).unwrap()) < 1e-12);
        assert!(matches!(svt(&m, -1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn soft_threshold_examples() {
        let m = array![[3.0, -0.5], [2.0, -2.0]];
        let out = soft_threshold(&m, 1.0).unwrap();
        assert_eq!(out, array![[2.0, 0.0], [1.0, -1.0]]);
        let pm = array![[2.0, -2.0], [2.0, -2.0]];
        assert_eq!(soft_threshold(&pm, 2.0).unwrap(), Array2::zeros((2, 2)));
        assert!(matches!(soft_threshold(&pm, -0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn column_shrink_examples() {
        let c = array![[3.0], [4.0]];
        let out = column_shrink(&c, 2.0).unwrap();
        assert!(rel_err(&out, &array![[1.8], [2.4]]) < 1e-12);
        assert_eq!(column_shrink(&c, 5.0).unwrap(), Array2::zeros((2, 1)));
        assert_eq!(column_shrink(&c, 0.0).unwrap(), c);
        assert!(matches!(column_shrink(&c, -2.0), Err(Error::Usage(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn shrinkage_is_non_expansive(
                rows in 1usize..6,
                cols in 1usize..6,
                seed in 0u64..1000,
                tau in 0.0f64..3.0,
            ) {
                let m = randn(rows, cols, seed);
                prop_assert!(
                    norm(&svt(&m, tau).unwrap(), NormKind::Nuclear).unwrap()
                        <= norm(&m, NormKind::Nuclear).unwrap() + 1e-9
                );
                prop_assert!(
                    norm(&soft_threshold(&m, tau).unwrap(), NormKind::L1).unwrap()
                        <= norm(&m, NormKind::L1).unwrap() + 1e-12
                );
                prop_assert!(
                    norm(&column_shrink(&m, tau).unwrap(), NormKind::L21).unwrap()
                        <= norm(&m, NormKind::L21).unwrap() + 1e-12
                );
            }

            #[test]
            fn pseudo_inverse_first_identity(
                rows in 1usize..6,
                cols in 1usize..6,
                seed in 0u64..1000,
            ) {
                let m = randn(rows, cols, seed);
                let p = pseudo_inverse(&m).unwrap();
                let mpm = m.dot(&p).dot(&m);
                let mut diff = mpm;
                diff -= &m;
                prop_assert!(frobenius(&diff) <= 1e-9 * frobenius(&m).max(1.0));
            }
        }
    }
}
