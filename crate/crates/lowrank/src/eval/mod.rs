//! Synthetic union-of-subspaces data, corruption models, clustering and
//! classification pipelines, and recovery-condition diagnostics.

mod cluster;
mod diag;
mod synth;

pub use cluster::{clustering_accuracy, index_hamming, ridge_classify, spectral_cluster};
pub use diag::{incoherence_diagnostics, rank_support_check, Incoherence, RankSupportReport};
pub use synth::{corrupt, generate_subspace_data, CorruptionMode, CorruptionSpec, LabeledDataset, SyntheticSpec};
