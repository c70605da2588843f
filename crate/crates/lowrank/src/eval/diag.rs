//! Diagnostics for the exact-recovery preconditions: incoherence parameters
//! of the clean matrix and the rank/support ranges the guarantees ask for.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::linalg::{norm, skinny_svd, zero_threshold, NormKind};

/// The minimal incoherence constants of a matrix with skinny SVD
/// `U_0 Sigma_0 V_0^T` and rank `r`:
///
/// * `mu_v`:  `max_i ||V_0^T e_i||^2 * n / r`
/// * `mu_u`:  `max_i ||U_0^T e_i||^2 * m / r`
/// * `mu_uv`: `max_ij |U_0 V_0^T|_ij^2 * m n / r`
#[derive(Debug, Clone, Copy)]
pub struct Incoherence {
    pub mu_v: f64,
    pub mu_u: f64,
    pub mu_uv: f64,
}

pub fn incoherence_diagnostics(a0: &Array2<f64>) -> Result<Incoherence> {
    let svd = skinny_svd(a0)?;
    let r = svd.rank();
    if r == 0 {
        return Err(Error::InvalidInput(
            "incoherence undefined for rank 0".into(),
        ));
    }
    let (m, n) = a0.dim();
    let max_row_sq = |mat: &Array2<f64>| {
        mat.axis_iter(Axis(0))
            .map(|row| row.iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mu_v = max_row_sq(&svd.v) * n as f64 / r as f64;
    let mu_u = max_row_sq(&svd.u) * m as f64 / r as f64;
    let uv = svd.u.dot(&svd.v.t());
    let max_abs_sq = uv.iter().fold(0.0f64, |acc, v| acc.max(v * v));
    let mu_uv = max_abs_sq * (m * n) as f64 / r as f64;
    Ok(Incoherence { mu_v, mu_u, mu_uv })
}

/// Both sides of the rank/support range conditions, with the numerical
/// constants `rho_r`, `rho_s` left symbolic: the caller inspects ratios.
#[derive(Debug, Clone)]
pub struct RankSupportReport {
    pub rank_a0: usize,
    /// Entrywise support count of `E_0` and its fraction of `m * n`.
    pub support_entries: usize,
    pub support_entry_fraction: f64,
    /// Column support count of `E_0` and its fraction of `n`.
    pub support_columns: usize,
    pub support_column_fraction: f64,
    /// `n_(2) / (mu log^2 n_(1))` with `mu = max(mu_v, mu_u, mu_uv)`: the
    /// rank cap (up to `rho_r`) for entrywise sparse corruption.
    pub entrywise_rank_cap: f64,
    /// `n_(2) / (mu_v log n_(1))`: the rank cap (up to `rho_r`) for
    /// columnwise sparse corruption, which only needs the V-side incoherence.
    pub columnwise_rank_cap: f64,
    pub incoherence: Incoherence,
}

pub fn rank_support_check(a0: &Array2<f64>, e0: &Array2<f64>) -> Result<RankSupportReport> {
    if a0.dim() != e0.dim() {
        return Err(Error::Usage("A0 and E0 shapes must match".into()));
    }
    let (m, n) = a0.dim();
    let incoherence = incoherence_diagnostics(a0)?;
    let rank_a0 = skinny_svd(a0)?.rank();
    let t = zero_threshold(e0);
    let support_entries = e0.iter().filter(|v| v.abs() > t).count();
    let support_columns = norm(e0, NormKind::L20)? as usize;
    let n1 = m.max(n) as f64;
    let n2 = m.min(n) as f64;
    let mu = incoherence.mu_v.max(incoherence.mu_u).max(incoherence.mu_uv);
    Ok(RankSupportReport {
        rank_a0,
        support_entries,
        support_entry_fraction: support_entries as f64 / (m * n) as f64,
        support_columns,
        support_column_fraction: support_columns as f64 / n as f64,
        entrywise_rank_cap: n2 / (mu * n1.ln() * n1.ln()),
        columnwise_rank_cap: n2 / (incoherence.mu_v * n1.ln()),
        incoherence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{corrupt, generate_subspace_data, CorruptionMode, CorruptionSpec, SyntheticSpec};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    #[test]
    fn mu_v_extremes() {
        // V = first r columns of the identity: maximal leverage, mu_v = n/r.
        let n = 10;
        let r = 2;
        let mut a = Array2::zeros((5, n));
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 2.0;
        let inc = incoherence_diagnostics(&a).unwrap();
        assert_abs_diff_eq!(inc.mu_v, n as f64 / r as f64, epsilon = 1e-9);

        // Rank-one all-ones direction: uniform leverage, mu_v = 1.
        let ones = Array2::from_elem((4, 8), 1.0);
        let inc = incoherence_diagnostics(&ones).unwrap();
        assert_abs_diff_eq!(inc.mu_v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn mu_v_within_bounds_for_gaussian_subspaces() {
        let data = generate_subspace_data(&SyntheticSpec {
            ambient_dim: 50,
            num_subspaces: 5,
            subspace_dim: 4,
            points_per_subspace: 40,
            seed: 3,
        })
        .unwrap();
        let inc = incoherence_diagnostics(&data.clean).unwrap();
        let n = 200.0;
        let r = 20.0;
        assert!(inc.mu_v >= 1.0 - 1e-9);
        assert!(inc.mu_v <= n / r + 1e-9);
        // Gaussian coefficients keep leverage O(1)-scale, far from the
        // worst case n/r = 10.
        assert!(inc.mu_v < 6.0, "mu_v = {}", inc.mu_v);
    }

    #[test]
    fn incoherence_rejects_zero() {
        let z = Array2::zeros((4, 4));
        assert!(incoherence_diagnostics(&z).is_err());
    }

    #[test]
    fn rank_support_zero_noise() {
        let data = generate_subspace_data(&SyntheticSpec {
            ambient_dim: 25,
            num_subspaces: 5,
            subspace_dim: 5,
            points_per_subspace: 20,
            seed: 1,
        })
        .unwrap();
        let e0 = Array2::zeros(data.clean.dim());
        let rep = rank_support_check(&data.clean, &e0).unwrap();
        // The rank-5D full-ambient-rank regime.
        assert_eq!(rep.rank_a0, 25);
        assert_eq!(rep.support_entries, 0);
        assert_eq!(rep.support_columns, 0);
    }

    #[test]
    fn rank_support_entrywise_fraction() {
        let data = generate_subspace_data(&SyntheticSpec {
            ambient_dim: 20,
            num_subspaces: 2,
            subspace_dim: 2,
            points_per_subspace: 50,
            seed: 2,
        })
        .unwrap();
        let noisy = corrupt(
            &data,
            &CorruptionSpec {
                mode: CorruptionMode::entrywise_default(),
                fraction: 0.1,
                seed: 3,
            },
        )
        .unwrap();
        let rep = rank_support_check(&data.clean, &noisy.noise_matrix()).unwrap();
        assert_abs_diff_eq!(rep.support_entry_fraction, 0.1, epsilon = 1e-3);
    }
}
