//! Spectral clustering on a representation matrix, the majority-label
//! accuracy score, index Hamming distance, and a ridge-regression classifier.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITER: usize = 300;

/// Cluster the columns behind a representation matrix `Z` into `k` groups.
///
/// The affinity is `|Z|` directly (the representation matrices produced by
/// this crate are symmetric), followed by the symmetric normalized Laplacian,
/// its `k` bottom eigenvectors with row normalization, and seeded k-means.
pub fn spectral_cluster(z: &Array2<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = z.nrows();
    if z.ncols() != n {
        return Err(Error::Usage("affinity source must be square".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Usage(format!(
            "cluster count {k} must be in 1..={n}"
        )));
    }
    let w = z.mapv(f64::abs);
    let degree: Array1<f64> = w.sum_axis(Axis(1));
    let dinv_sqrt = degree.mapv(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 });

    // L = I - D^{-1/2} W D^{-1/2}, forced symmetric against rounding.
    let mut lap = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let s = dinv_sqrt[i] * w[(i, j)] * dinv_sqrt[j];
            lap[(i, j)] = if i == j { 1.0 - s } else { -s };
        }
    }
    let lap = (&lap + &lap.t()).mapv(|v| 0.5 * v);
    let (_eigs, vecs) = lap.eigh(UPLO::Lower)?;

    // Bottom-k eigenvectors as the embedding, rows normalized to unit length.
    let mut emb = vecs.slice(ndarray::s![.., ..k]).to_owned();
    for mut row in emb.axis_iter_mut(Axis(0)) {
        let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm > 0.0 {
            row.mapv_inplace(|v| v / nrm);
        }
    }
    let (labels, _inertia) = kmeans(emb.view(), k, seed);
    Ok(labels)
}

/// Seeded k-means with k-means++ initialization, restarts, and best-inertia
/// selection. Rows of `points` are the observations.
fn kmeans(points: ArrayView2<f64>, k: usize, seed: u64) -> (Vec<usize>, f64) {
    let n = points.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_labels = vec![0usize; n];
    let mut best_inertia = f64::INFINITY;

    for _restart in 0..KMEANS_RESTARTS {
        let mut centers = kmeans_pp_init(points, k, &mut rng);
        let mut labels = vec![0usize; n];
        for _it in 0..KMEANS_MAX_ITER {
            let mut changed = false;
            for i in 0..n {
                let p = points.row(i);
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (c, center) in centers.axis_iter(Axis(0)).enumerate() {
                    let d = p
                        .iter()
                        .zip(center.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>();
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                if labels[i] != best {
                    labels[i] = best;
                    changed = true;
                }
            }
            let mut counts = vec![0usize; k];
            let mut sums = Array2::<f64>::zeros(centers.dim());
            for i in 0..n {
                counts[labels[i]] += 1;
                sums.row_mut(labels[i]).scaled_add(1.0, &points.row(i));
            }
            for c in 0..k {
                if counts[c] == 0 {
                    // Reseed an empty cluster at the point farthest from its
                    // current center.
                    let far = farthest_point(points, &centers, &labels);
                    centers.row_mut(c).assign(&points.row(far));
                } else {
                    let mut row = sums.row_mut(c);
                    row.mapv_inplace(|v| v / counts[c] as f64);
                    centers.row_mut(c).assign(&row);
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = (0..n)
            .map(|i| {
                points
                    .row(i)
                    .iter()
                    .zip(centers.row(labels[i]).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        if inertia < best_inertia {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    (best_labels, best_inertia)
}

fn kmeans_pp_init(points: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centers = Array2::zeros((k, dim));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut dists: Vec<f64> = (0..n)
        .map(|i| {
            points
                .row(i)
                .iter()
                .zip(centers.row(0).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .collect();
    for c in 1..k {
        let total: f64 = dists.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dists.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        centers.row_mut(c).assign(&points.row(next));
        for i in 0..n {
            let d = points
                .row(i)
                .iter()
                .zip(centers.row(c).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            if d < dists[i] {
                dists[i] = d;
            }
        }
    }
    centers
}

fn farthest_point(points: ArrayView2<f64>, centers: &Array2<f64>, labels: &[usize]) -> usize {
    let mut far = 0;
    let mut far_d = -1.0;
    for i in 0..points.nrows() {
        let d = points
            .row(i)
            .iter()
            .zip(centers.row(labels[i]).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        if d > far_d {
            far_d = d;
            far = i;
        }
    }
    far
}

/// Majority-label clustering accuracy: each predicted cluster is labeled by
/// the ground truth class contributing the most samples to it, then the
/// fraction of correctly labeled points is returned.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Usage(format!(
            "label length mismatch: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Usage("empty label vectors".into()));
    }
    use std::collections::HashMap;
    let mut per_cluster: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
    for (&p, &t) in pred.iter().zip(truth.iter()) {
        *per_cluster.entry(p).or_default().entry(t).or_default() += 1;
    }
    let correct: usize = per_cluster
        .values()
        .map(|counts| counts.values().copied().max().unwrap_or(0))
        .sum();
    Ok(correct as f64 / pred.len() as f64)
}

/// Size of the symmetric difference of two index sets over `0..n`.
pub fn index_hamming(predicted: &[usize], truth: &[usize], n: usize) -> Result<usize> {
    let mut in_pred = vec![false; n];
    let mut in_truth = vec![false; n];
    for &i in predicted {
        if i >= n {
            return Err(Error::Usage(format!("index {i} out of range 0..{n}")));
        }
        in_pred[i] = true;
    }
    for &i in truth {
        if i >= n {
            return Err(Error::Usage(format!("index {i} out of range 0..{n}")));
        }
        in_truth[i] = true;
    }
    Ok((0..n).filter(|&i| in_pred[i] != in_truth[i]).count())
}

/// Ridge-regression classifier `W = H F^T (F F^T + gamma I)^{-1}`, predicting
/// the argmax response per test column. `h_train` is one-hot with one row per
/// class.
pub fn ridge_classify(
    f_train: &Array2<f64>,
    h_train: &Array2<f64>,
    f_test: &Array2<f64>,
    gamma: f64,
) -> Result<Vec<usize>> {
    if !(gamma > 0.0) {
        return Err(Error::Usage("gamma must be > 0".into()));
    }
    if f_train.ncols() != h_train.ncols() {
        return Err(Error::Usage(
            "training features and labels must have the same number of columns".into(),
        ));
    }
    if f_test.nrows() != f_train.nrows() {
        return Err(Error::Usage(
            "test features must have the training feature dimension".into(),
        ));
    }
    let d = f_train.nrows();
    let gram = f_train.dot(&f_train.t()) + Array2::<f64>::eye(d).mapv(|v| v * gamma);
    let w = h_train.dot(&f_train.t()).dot(&gram.inv()?);
    let scores = w.dot(f_test);
    Ok(scores
        .axis_iter(Axis(1))
        .map(|col| {
            col.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
        .collect())
}
