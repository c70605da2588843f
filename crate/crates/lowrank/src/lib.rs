//! Low rank subspace recovery: robust PCA, robust LRR, and robust latent LRR,
//! connected by closed-form transforms.
//!
//! The models in this crate share one backbone. An R-PCA solve splits the
//! data into a low rank part and a sparse part, `X = A + E`. The
//! self-expressive models (robust LRR and robust latent LRR) then have
//! closed-form solutions built from the skinny SVD of `A = X - E`, so a
//! single R-PCA solve plus a cheap expression step replaces their expensive
//! non-convex iterations ([`express`]). For large data the R-PCA solve
//! itself is replaced by a randomized column-sampling scheme with
//! near-linear cost ([`filtering`]).
//!
//! Modules:
//!
//! * [`linalg`] — dense kernels: skinny SVD, pseudo-inverse, LQ, norms, and
//!   the shrinkage operators.
//! * [`rpca`] — inexact-ALM solvers for relaxed R-PCA with `l1` or `l2,1`
//!   noise, the partial-ADM baseline for relaxed R-LRR, and the closed-form
//!   Frobenius-noise solver.
//! * [`express`] — solution families and the REDU-EXPR transforms between
//!   the five models.
//! * [`filtering`] — randomized `l2,1` / `l1` filtering and the fast R-LRR
//!   pipeline.
//! * [`eval`] — synthetic data, corruption models, spectral clustering,
//!   accuracy metrics, and recovery-condition diagnostics.

pub mod error;
pub mod eval;
pub mod express;
pub mod filtering;
pub mod linalg;
pub mod rpca;

pub use error::{Error, Result};
