//! Generators for union-of-independent-subspaces data and the corruption
//! models used in the synthetic experiments.

use ndarray::{s, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::skinny_svd;

/// Parameters of a union-of-subspaces sample.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub ambient_dim: usize,
    pub num_subspaces: usize,
    pub subspace_dim: usize,
    pub points_per_subspace: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0
            || self.num_subspaces == 0
            || self.subspace_dim == 0
            || self.points_per_subspace == 0
        {
            return Err(Error::Usage("all synthetic dimensions must be >= 1".into()));
        }
        if self.num_subspaces * self.subspace_dim > self.ambient_dim {
            return Err(Error::Usage(format!(
                "k * D = {} exceeds the ambient dimension {}; subspaces cannot be independent",
                self.num_subspaces * self.subspace_dim,
                self.ambient_dim
            )));
        }
        Ok(())
    }
}

/// How corruption is applied to a clean dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorruptionMode {
    /// Add uniform noise at uniformly chosen entry positions (without
    /// replacement).
    EntrywiseUniform { low: f64, high: f64 },
    /// Replace uniformly chosen columns with i.i.d. standard normal entries.
    ColumnwiseGaussian,
    /// Add Gaussian noise with per-entry standard deviation
    /// `std_factor * ||x||_2` to uniformly chosen columns.
    ColumnwiseScaledGaussian { std_factor: f64 },
}

impl CorruptionMode {
    /// The entrywise mode of the synthetic robustness experiments.
    pub fn entrywise_default() -> Self {
        CorruptionMode::EntrywiseUniform {
            low: -0.6,
            high: 0.6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorruptionSpec {
    pub mode: CorruptionMode,
    /// Fraction of entries (entrywise mode) or columns (columnwise modes)
    /// corrupted, in `[0, 1]`.
    pub fraction: f64,
    pub seed: u64,
}

/// A dataset with ground truth: observed `x`, per-column subspace labels,
/// the sorted indices of corrupted columns, and the clean matrix.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    pub noise_indices: Vec<usize>,
    pub clean: Array2<f64>,
}

impl LabeledDataset {
    /// Ground truth noise `E_0 = X - clean`.
    pub fn noise_matrix(&self) -> Array2<f64> {
        &self.x - &self.clean
    }
}

/// Draw `num_subspaces` independent `subspace_dim`-dimensional subspaces with
/// random orthonormal bases and sample `points_per_subspace` points from each
/// by Gaussian coefficients. Columns are grouped by subspace.
pub fn generate_subspace_data(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (k, d, p, amb) = (
        spec.num_subspaces,
        spec.subspace_dim,
        spec.points_per_subspace,
        spec.ambient_dim,
    );
    let mut x = Array2::zeros((amb, k * p));
    let mut labels = Vec::with_capacity(k * p);
    for b in 0..k {
        let g = Array2::from_shape_fn((amb, d), |_| rng.sample(StandardNormal));
        // Orthonormalize the Gaussian block to get the basis.
        let basis = skinny_svd(&g)?.u;
        let coeff = Array2::from_shape_fn((d, p), |_| rng.sample(StandardNormal));
        x.slice_mut(s![.., (b * p)..((b + 1) * p)])
            .assign(&basis.dot(&coeff));
        labels.extend(std::iter::repeat(b).take(p));
    }
    Ok(LabeledDataset {
        clean: x.clone(),
        x,
        labels,
        noise_indices: Vec::new(),
    })
}

/// Corrupt a dataset. The output observation is always `clean + E_0`; the
/// exact corrupted positions are recorded so identification can be scored.
pub fn corrupt(data: &LabeledDataset, spec: &CorruptionSpec) -> Result<LabeledDataset> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::Usage("corruption fraction must be in [0, 1]".into()));
    }
    let (m, n) = data.clean.dim();
    let mut x = data.clean.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise_cols: Vec<usize>;

    match spec.mode {
        CorruptionMode::EntrywiseUniform { low, high } => {
            if !(low < high) {
                return Err(Error::Usage("entrywise bounds must satisfy low < high".into()));
            }
            let count = (spec.fraction * (m * n) as f64).floor() as usize;
            let dist = rand::distributions::Uniform::new(low, high);
            let mut touched = vec![false; n];
            for p in rand::seq::index::sample(&mut rng, m * n, count) {
                let (i, j) = (p / n, p % n);
                x[(i, j)] += rng.sample(dist);
                touched[j] = true;
            }
            noise_cols = (0..n).filter(|&j| touched[j]).collect();
        }
        CorruptionMode::ColumnwiseGaussian => {
            let count = (spec.fraction * n as f64).floor() as usize;
            let mut cols = rand::seq::index::sample(&mut rng, n, count).into_vec();
            cols.sort_unstable();
            for &j in &cols {
                for i in 0..m {
                    x[(i, j)] = rng.sample(StandardNormal);
                }
            }
            noise_cols = cols;
        }
        CorruptionMode::ColumnwiseScaledGaussian { std_factor } => {
            if !(std_factor > 0.0) {
                return Err(Error::Usage("std factor must be > 0".into()));
            }
            let count = (spec.fraction * n as f64).floor() as usize;
            let mut cols = rand::seq::index::sample(&mut rng, n, count).into_vec();
            cols.sort_unstable();
            for &j in &cols {
                let col_norm = data
                    .clean
                    .column(j)
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                let std = std_factor * col_norm;
                for i in 0..m {
                    let g: f64 = rng.sample(StandardNormal);
                    x[(i, j)] += std * g;
                }
            }
            noise_cols = cols;
        }
    }

    Ok(LabeledDataset {
        x,
        labels: data.labels.clone(),
        noise_indices: noise_cols,
        clean: data.clean.clone(),
    })
}
