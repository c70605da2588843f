//! Closed-form solution families for noiseless R-LRR / R-LatLRR and the
//! REDU-EXPR transforms that express solutions of the robust models from a
//! single R-PCA solve.
//!
//! Writing `A = X - E*` for an R-PCA minimizer `(A*, E*)`:
//!
//! * relaxed R-LRR has the unique representation `Z = V_A V_A^T` (the shape
//!   interaction matrix, also `A^dag A`);
//! * original R-LRR admits the family `Z = A^dag A + S V_A^T` over all `S`
//!   with `V_A^T S = 0`;
//! * original R-LatLRR admits `Z = (V_A + S_1) W~ V_A^T`,
//!   `L = U_A Sigma_A (I - W~) (Sigma_A^{-1} U_A^T + S_2)` over idempotent
//!   `W~` and suitably constrained `S_1`, `S_2`;
//! * relaxed R-LatLRR admits `Z = V_A W^ V_A^T`, `L = U_A (I - W^) U_A^T`
//!   over block-diagonal `W^` (blocks following equal singular values) with
//!   both `W^` and `I - W^` positive semidefinite.
//!
//! All transforms here are cheap: one skinny SVD plus a few skinny products.

use ndarray::{Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, numerical_rank, skinny_svd, SkinnySvd};
use crate::rpca::{Provenance, RlrrSolution, RpcaSolution};

/// Tolerance scale for validating solution-family parameters.
const PARAM_TOL: f64 = 1e-9;
/// Relative feasibility tolerance for accepting an upstream solution.
const FEAS_TOL: f64 = 1e-6;
/// Singular values closer than `1e-8 * sigma_1` are treated as equal when
/// checking the block structure of a relaxed LatLRR parameter.
const SIGMA_GROUP_TOL: f64 = 1e-8;

/// Shape interaction matrix `Z = V_A V_A^T = A^dag A`: the unique solution of
/// relaxed noiseless LRR, symmetric, idempotent, and block diagonal for data
/// from independent subspaces.
pub fn shape_interaction(a: &Array2<f64>) -> Result<Array2<f64>> {
    let svd = skinny_svd(a)?;
    let n = a.ncols();
    if svd.rank() == 0 {
        return Ok(Array2::zeros((n, n)));
    }
    Ok(svd.v.dot(&svd.v.t()))
}

/// A member `Z = A^dag A + S V_A^T` of the original noiseless LRR solution
/// family. `S` must be `n x r` with `V_A^T S = 0`; `None` selects `S = 0`.
pub fn original_lrr_solution(a: &Array2<f64>, s: Option<&Array2<f64>>) -> Result<Array2<f64>> {
    let svd = skinny_svd(a)?;
    let n = a.ncols();
    let r = svd.rank();
    if r == 0 {
        return Ok(Array2::zeros((n, n)));
    }
    let mut z = svd.v.dot(&svd.v.t());
    if let Some(s) = s {
        if s.dim() != (n, r) {
            return Err(Error::InvalidParameter {
                condition: format!("S must be {} x {} (n x rank(A))", n, r),
            });
        }
        check_orthogonal("V_A^T S = 0", &svd.v.t().dot(s), s)?;
        z += &s.dot(&svd.v.t());
    }
    Ok(z)
}

fn check_orthogonal(condition: &str, product: &Array2<f64>, operand: &Array2<f64>) -> Result<()> {
    let scale = frobenius(operand).max(1.0);
    if frobenius(product) > PARAM_TOL * scale {
        return Err(Error::InvalidParameter {
            condition: condition.to_string(),
        });
    }
    Ok(())
}

/// Free parameters for the LatLRR solution families.
#[derive(Debug, Clone)]
pub enum LatLrrParams {
    /// Original (rank) variant: any idempotent `wtilde` (`r x r`) plus
    /// optional `s1` (`n x r`, columns orthogonal to range(V_A), rank at most
    /// rank(wtilde)) and `s2` (`r x m`, rows orthogonal to range(U_A), rank
    /// at most rank(I - wtilde)).
    Original {
        wtilde: Array2<f64>,
        s1: Option<Array2<f64>>,
        s2: Option<Array2<f64>>,
    },
    /// Relaxed (nuclear norm) variant: block-diagonal `what` compatible with
    /// `Sigma_A`, with `what` and `I - what` both positive semidefinite.
    Relaxed { what: Array2<f64> },
}

impl LatLrrParams {
    /// The canonical member used by REDU-EXPR when nothing else is asked for:
    /// all of `A`'s rank goes to `Z`, none to `L`.
    pub fn canonical_original(rank: usize) -> Self {
        LatLrrParams::Original {
            wtilde: Array2::eye(rank),
            s1: None,
            s2: None,
        }
    }

    pub fn canonical_relaxed(rank: usize) -> Self {
        LatLrrParams::Relaxed {
            what: Array2::eye(rank),
        }
    }
}

/// A member of the original noiseless R-LatLRR solution family for `A`.
/// Returns `(Z, L)` with `A = A Z + L A` and `rank(Z) + rank(L) = rank(A)`.
pub fn original_latlrr_solutions(
    a: &Array2<f64>,
    wtilde: &Array2<f64>,
    s1: Option<&Array2<f64>>,
    s2: Option<&Array2<f64>>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let svd = skinny_svd(a)?;
    let (m, n) = a.dim();
    let r = svd.rank();
    if wtilde.dim() != (r, r) {
        return Err(Error::InvalidParameter {
            condition: format!("Wtilde must be {} x {} (rank(A) square)", r, r),
        });
    }
    if r == 0 {
        return Ok((Array2::zeros((n, n)), Array2::zeros((m, m))));
    }
    let w2 = wtilde.dot(wtilde);
    if frobenius(&(&w2 - wtilde)) > PARAM_TOL * frobenius(wtilde).max(1.0) {
        return Err(Error::InvalidParameter {
            condition: "Wtilde^2 = Wtilde (idempotence)".into(),
        });
    }
    let eye = Array2::eye(r);
    let complement = &eye - wtilde;
    let rank_w = numerical_rank(wtilde)?;
    let rank_cw = numerical_rank(&complement)?;

    if let Some(s1) = s1 {
        if s1.dim() != (n, r) {
            return Err(Error::InvalidParameter {
                condition: format!("S1 must be {} x {}", n, r),
            });
        }
        check_orthogonal("V_A^T S1 = 0", &svd.v.t().dot(s1), s1)?;
        if numerical_rank(s1)? > rank_w {
            return Err(Error::InvalidParameter {
                condition: "rank(S1) <= rank(Wtilde)".into(),
            });
        }
    }
    if let Some(s2) = s2 {
        if s2.dim() != (r, m) {
            return Err(Error::InvalidParameter {
                condition: format!("S2 must be {} x {}", r, m),
            });
        }
        check_orthogonal("S2 U_A = 0", &s2.dot(&svd.u), s2)?;
        if numerical_rank(s2)? > rank_cw {
            return Err(Error::InvalidParameter {
                condition: "rank(S2) <= rank(I - Wtilde)".into(),
            });
        }
    }

    // Z = (V_A + S1) Wtilde V_A^T
    let wv = wtilde.dot(&svd.v.t());
    let mut z = svd.v.dot(&wv);
    if let Some(s1) = s1 {
        z += &s1.dot(&wv);
    }

    // L = U_A Sigma_A (I - Wtilde) (Sigma_A^{-1} U_A^T + S2)
    let sig_cw = scale_rows_by(&complement, &svd.sigma, true);
    let core = scale_cols_by(&sig_cw, &svd.sigma, false); // Sigma (I-W) Sigma^{-1}
    let mut l = svd.u.dot(&core).dot(&svd.u.t());
    if let Some(s2) = s2 {
        l += &svd.u.dot(&sig_cw).dot(s2);
    }
    Ok((z, l))
}

// Multiply rows (or columns) of `m` by sigma (or 1/sigma).
fn scale_rows_by(m: &Array2<f64>, sigma: &ndarray::Array1<f64>, forward: bool) -> Array2<f64> {
    let mut out = m.clone();
    for (mut row, &s) in out.axis_iter_mut(Axis(0)).zip(sigma.iter()) {
        let f = if forward { s } else { 1.0 / s };
        row.mapv_inplace(|x| x * f);
    }
    out
}

fn scale_cols_by(m: &Array2<f64>, sigma: &ndarray::Array1<f64>, forward: bool) -> Array2<f64> {
    let mut out = m.clone();
    for (mut col, &s) in out.axis_iter_mut(Axis(1)).zip(sigma.iter()) {
        let f = if forward { s } else { 1.0 / s };
        col.mapv_inplace(|x| x * f);
    }
    out
}

/// A member of the relaxed noiseless R-LatLRR solution family:
/// `Z = V_A What V_A^T`, `L = U_A (I - What) U_A^T`. Requires `What` block
/// compatible with `Sigma_A` and `0 <= What <= I` in the semidefinite order.
pub fn relaxed_latlrr_solutions(
    a: &Array2<f64>,
    what: &Array2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let svd = skinny_svd(a)?;
    let (m, n) = a.dim();
    let r = svd.rank();
    if what.dim() != (r, r) {
        return Err(Error::InvalidParameter {
            condition: format!("What must be {} x {} (rank(A) square)", r, r),
        });
    }
    if r == 0 {
        return Ok((Array2::zeros((n, n)), Array2::zeros((m, m))));
    }
    validate_what(what, &svd)?;
    let z = svd.v.dot(&what.dot(&svd.v.t()));
    let complement = &Array2::eye(r) - what;
    let l = svd.u.dot(&complement.dot(&svd.u.t()));
    Ok((z, l))
}

fn validate_what(what: &Array2<f64>, svd: &SkinnySvd) -> Result<()> {
    let r = svd.rank();
    let scale = frobenius(what).max(1.0);
    // Entries bridging distinct singular values must vanish. Singular values
    // are grouped by closeness since exact ties never occur numerically.
    let sigma1 = svd.sigma[0];
    for i in 0..r {
        for j in 0..r {
            if (svd.sigma[i] - svd.sigma[j]).abs() > SIGMA_GROUP_TOL * sigma1
                && what[(i, j)].abs() > PARAM_TOL * scale
            {
                return Err(Error::InvalidParameter {
                    condition: "What block diagonal compatible with Sigma_A".into(),
                });
            }
        }
    }
    let asym = what - &what.t();
    if frobenius(&asym) > PARAM_TOL * scale {
        return Err(Error::InvalidParameter {
            condition: "What symmetric (positive semidefiniteness)".into(),
        });
    }
    let sym = (what + &what.t()).mapv(|x| 0.5 * x);
    let (eigs, _) = sym.eigh(UPLO::Lower)?;
    if eigs.iter().any(|&e| e < -PARAM_TOL || e > 1.0 + PARAM_TOL) {
        return Err(Error::InvalidParameter {
            condition: "What and I - What positive semidefinite (eigenvalues in [0, 1])".into(),
        });
    }
    Ok(())
}

fn check_rpca_feasible(x: &Array2<f64>, rpca: &RpcaSolution) -> Result<()> {
    if rpca.a.dim() != x.dim() || rpca.e.dim() != x.dim() {
        return Err(Error::InvalidInput(
            "R-PCA solution shape does not match X".into(),
        ));
    }
    let res = x - &rpca.a - &rpca.e;
    if frobenius(&res) > FEAS_TOL * frobenius(x).max(1.0) {
        return Err(Error::Infeasible(
            "A + E = X violated beyond tolerance".into(),
        ));
    }
    Ok(())
}

/// Express an R-LRR solution from an R-PCA solution: `Z` is built from the
/// denoised matrix `A = X - E*` (shape interaction for the relaxed model,
/// `A^dag A + S V_A^T` for the original one), and `E*` carries over.
pub fn redu_expr_rlrr(
    x: &Array2<f64>,
    rpca: &RpcaSolution,
    relaxed: bool,
    s: Option<&Array2<f64>>,
) -> Result<RlrrSolution> {
    check_rpca_feasible(x, rpca)?;
    let denoised = x - &rpca.e;
    let z = if relaxed {
        if s.is_some() {
            return Err(Error::Usage(
                "S parameter only applies to the original (rank) model".into(),
            ));
        }
        shape_interaction(&denoised)?
    } else {
        original_lrr_solution(&denoised, s)?
    };
    Ok(RlrrSolution {
        z,
        e: rpca.e.clone(),
        provenance: Provenance::ReduExpr,
        iterations: rpca.iterations,
        converged: rpca.converged,
    })
}

/// An R-LatLRR solution `(Z, L, E)` expressed from an R-PCA solution.
#[derive(Debug, Clone)]
pub struct LatLrrSolution {
    pub z: Array2<f64>,
    pub l: Array2<f64>,
    pub e: Array2<f64>,
}

pub fn redu_expr_latlrr(
    x: &Array2<f64>,
    rpca: &RpcaSolution,
    params: &LatLrrParams,
) -> Result<LatLrrSolution> {
    check_rpca_feasible(x, rpca)?;
    let denoised = x - &rpca.e;
    let (z, l) = match params {
        LatLrrParams::Original { wtilde, s1, s2 } => {
            original_latlrr_solutions(&denoised, wtilde, s1.as_ref(), s2.as_ref())?
        }
        LatLrrParams::Relaxed { what } => relaxed_latlrr_solutions(&denoised, what)?,
    };
    Ok(LatLrrSolution {
        z,
        l,
        e: rpca.e.clone(),
    })
}

/// The five mutually expressible models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelId {
    Rpca,
    RlrrOriginal,
    RlrrRelaxed,
    LatLrrOriginal,
    LatLrrRelaxed,
}

/// A solution to any of the models, as carried between transforms.
#[derive(Debug, Clone)]
pub enum ModelSolution {
    Rpca { a: Array2<f64>, e: Array2<f64> },
    Rlrr { z: Array2<f64>, e: Array2<f64> },
    LatLrr(LatLrrSolution),
}

impl ModelSolution {
    pub fn noise(&self) -> &Array2<f64> {
        match self {
            ModelSolution::Rpca { e, .. } => e,
            ModelSolution::Rlrr { e, .. } => e,
            ModelSolution::LatLrr(sol) => &sol.e,
        }
    }
}

fn model_shape(model: ModelId) -> &'static str {
    match model {
        ModelId::Rpca => "Rpca { a, e }",
        ModelId::RlrrOriginal | ModelId::RlrrRelaxed => "Rlrr { z, e }",
        ModelId::LatLrrOriginal | ModelId::LatLrrRelaxed => "LatLrr { z, l, e }",
    }
}

fn check_feasible_for(sol: &ModelSolution, model: ModelId, x: &Array2<f64>) -> Result<()> {
    let tol = FEAS_TOL * frobenius(x).max(1.0);
    let ok = match (sol, model) {
        (ModelSolution::Rpca { a, e }, ModelId::Rpca) => frobenius(&(x - a - e)) <= tol,
        (ModelSolution::Rlrr { z, e }, ModelId::RlrrOriginal | ModelId::RlrrRelaxed) => {
            let d = x - e;
            frobenius(&(&d - &d.dot(z))) <= tol
        }
        (
            ModelSolution::LatLrr(LatLrrSolution { z, l, e }),
            ModelId::LatLrrOriginal | ModelId::LatLrrRelaxed,
        ) => {
            let d = x - e;
            frobenius(&(&d - &(d.dot(z) + l.dot(&d)))) <= tol
        }
        _ => {
            return Err(Error::Usage(format!(
                "solution does not match source model {:?} (expected {})",
                model,
                model_shape(model)
            )))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Infeasible(format!(
            "solution violates the {:?} constraint beyond tolerance",
            model
        )))
    }
}

/// Re-express a solution of one model as a solution of another, routing
/// through the R-PCA form `(X - E*, E*)`. The canonical family member is
/// produced for models with a free parameter (`S = 0`, `W~ = I`, `W^ = I`).
pub fn cross_express(
    sol: &ModelSolution,
    from: ModelId,
    to: ModelId,
    x: &Array2<f64>,
) -> Result<ModelSolution> {
    check_feasible_for(sol, from, x)?;
    let e = sol.noise().clone();
    let denoised = x - &e;
    Ok(match to {
        ModelId::Rpca => ModelSolution::Rpca { a: denoised, e },
        ModelId::RlrrRelaxed | ModelId::RlrrOriginal => ModelSolution::Rlrr {
            z: shape_interaction(&denoised)?,
            e,
        },
        ModelId::LatLrrRelaxed | ModelId::LatLrrOriginal => {
            let z = shape_interaction(&denoised)?;
            let m = x.nrows();
            ModelSolution::LatLrr(LatLrrSolution {
                z,
                l: Array2::zeros((m, m)),
                e,
            })
        }
    })
}
