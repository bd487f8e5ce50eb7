//! Group inverse, Drazin inverse, spectral idempotent and Cline's transfer
//! between `BC` and `CB`.
//!
//! Both inverses use Cline's full-rank-factorization method: with
//! `M = F·G` the core `G·F` is invertible exactly when `M` has index at
//! most one, and then `M^# = F (G F)^{-2} G`. The Drazin inverse repeats the
//! factorization on the core until it becomes invertible or vanishes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    full_rank_factorization_with_floor, inverse, rank_of_square,
    rank_with_floor, singular_values,
};
use crate::matrix::{relative_residual, ComplexMatrix, ToleranceProfile};

/// Residuals of the three defining identities of a group inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomResiduals {
    /// `MX` vs `XM`
    pub commute: f64,
    /// `XMX` vs `X`
    pub inner: f64,
    /// `MXM` vs `M`
    pub outer: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.commute.max(self.inner).max(self.outer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupInverseResult {
    pub inverse: ComplexMatrix,
    /// `I − M M^#`
    pub idempotent: ComplexMatrix,
    pub rank: usize,
    /// Condition number of the core `G·F`.
    pub core_condition: f64,
    pub axiom_residuals: AxiomResiduals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrazinResult {
    pub inverse: ComplexMatrix,
    pub index: usize,
}

impl DrazinResult {
    /// `I − M M^D` for the matrix this result was computed from.
    pub fn idempotent(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &ComplexMatrix::identity(m.rows()) - &(m * &self.inverse)
    }
}

/// Measures `(MX vs XM, XMX vs X, MXM vs M)`; no thresholding.
pub fn verify_group_axioms(m: &ComplexMatrix, x: &ComplexMatrix) -> Result<AxiomResiduals> {
    let n = m.require_square("group axioms")?;
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            op: "group axioms",
            lhs: m.shape(),
            rhs: x.shape(),
        });
    }
    let mx = m * x;
    let xm = x * m;
    Ok(AxiomResiduals {
        commute: relative_residual(&mx, &xm),
        inner: relative_residual(&(&xm * x), x),
        outer: relative_residual(&(&mx * m), m),
    })
}

/// Residuals of the Drazin identities `MX = XM`, `XMX = X`,
/// `M^{k+1} X = M^k`.
pub fn verify_drazin_axioms(
    m: &ComplexMatrix,
    x: &ComplexMatrix,
    index: usize,
) -> Result<AxiomResiduals> {
    let base = verify_group_axioms(m, x)?;
    let mk = m.pow(index as u32)?;
    let outer = relative_residual(&(&(&mk * m) * x), &mk);
    Ok(AxiomResiduals { outer, ..base })
}

/// Group inverse by the full-rank factorization route.
///
/// The zero matrix has group inverse zero and spectral idempotent `I`.
/// Fails with [`Error::NotGroupInvertible`] when the core `G·F` is singular
/// or worse conditioned than `cond_max`.
pub fn group_inverse(m: &ComplexMatrix, tol: &ToleranceProfile) -> Result<GroupInverseResult> {
    group_inverse_at_scale(m, 0.0, tol)
}

/// As [`group_inverse`], with rank decisions made relative to
/// `max(σ_max(M), scale)`. Pass the size of the operands `M` was computed
/// from: when they cancel, `M` is rounding noise and must count as zero.
pub fn group_inverse_at_scale(m: &ComplexMatrix, scale: f64, tol: &ToleranceProfile) -> Result<GroupInverseResult> {
    let n = m.require_square("group inverse")?;
    let (f, g) = match full_rank_factorization_with_floor(m, tol.rank_rtol * scale, tol) {
        Ok(fg) => fg,
        Err(Error::ZeroMatrix) => {
            let zero = ComplexMatrix::zeros(n, n);
            return Ok(GroupInverseResult {
                axiom_residuals: verify_group_axioms(m, &zero)?,
                inverse: zero,
                idempotent: ComplexMatrix::identity(n),
                rank: 0,
                core_condition: 1.0,
            });
        }
        Err(e) => return Err(e),
    };
    let rank = f.cols();
    let core = &g * &f;
    let floor = tol.rank_rtol * spectral_norm(m).max(scale);
    let (core_inv, core_condition) = match invert_core(&core, floor, tol) {
        Some(found) => found,
        None => {
            return Err(Error::NotGroupInvertible {
                rank,
                rank_of_square: rank_of_square(m, tol),
            })
        }
    };
    let x = &(&f * &(&core_inv * &core_inv)) * &g;
    let axiom_residuals = verify_group_axioms(m, &x)?;
    if axiom_residuals.max() > tol.residual_rtol {
        return Err(Error::AxiomViolation {
            commute: axiom_residuals.commute,
            inner: axiom_residuals.inner,
            outer: axiom_residuals.outer,
        });
    }
    Ok(GroupInverseResult {
        idempotent: &ComplexMatrix::identity(n) - &(m * &x),
        inverse: x,
        rank,
        core_condition,
        axiom_residuals,
    })
}

fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Inverts a factorization core whose scale is inherited from an enclosing
/// matrix: singular values at or below `floor` count as zero, so a core
/// that is zero up to rounding is never reported invertible.
fn invert_core(
    core: &ComplexMatrix,
    floor: f64,
    tol: &ToleranceProfile,
) -> Option<(ComplexMatrix, f64)> {
    let sv = singular_values(core);
    if rank_with_floor(&sv, floor, tol) < core.rows() {
        return None;
    }
    let condition = sv[0] / sv[sv.len() - 1];
    if condition > tol.cond_max {
        return None;
    }
    inverse(core, tol).ok().map(|x| (x, condition))
}

/// Drazin inverse by repeated full-rank factorization.
///
/// The index is the recursion depth: 0 for invertible input, and for a
/// nilpotent matrix the nilpotency index (the core shrinks to size zero).
/// Each step strictly shrinks the core, so the index never exceeds `n`. A
/// core of full numerical rank that fails the condition gate is reported
/// as [`Error::Singular`].
pub fn drazin_inverse(m: &ComplexMatrix, tol: &ToleranceProfile) -> Result<DrazinResult> {
    let n = m.require_square("Drazin inverse")?;
    if n == 0 {
        return Ok(DrazinResult {
            inverse: m.clone(),
            index: 0,
        });
    }
    if let Ok(inv) = inverse(m, tol) {
        return Ok(DrazinResult {
            inverse: inv,
            index: 0,
        });
    }

    let floor = tol.rank_rtol * spectral_norm(m);
    // left = F_1 ⋯ F_k, right = G_k ⋯ G_1
    let mut left = ComplexMatrix::identity(n);
    let mut right = ComplexMatrix::identity(n);
    let mut core = m.clone();
    let mut index = 0;
    loop {
        index += 1;
        let (f, g) = match full_rank_factorization_with_floor(&core, floor, tol) {
            Ok(fg) => fg,
            Err(Error::ZeroMatrix) => {
                return Ok(DrazinResult {
                    inverse: ComplexMatrix::zeros(n, n),
                    index,
                });
            }
            Err(e) => return Err(e),
        };
        if f.cols() == core.rows() {
            // Full numerical rank but rejected by the condition gate.
            return Err(Error::Singular {
                rank: f.cols(),
                size: core.rows(),
                condition: crate::linalg::condition_number(&core),
            });
        }
        left = &left * &f;
        right = &g * &right;
        core = &g * &f;
        if let Some((core_inv, _)) = invert_core(&core, floor, tol) {
            let mut middle = core_inv.clone();
            for _ in 0..index {
                middle = &middle * &core_inv;
            }
            return Ok(DrazinResult {
                inverse: &(&left * &middle) * &right,
                index,
            });
        }
    }
}

/// Cline's formula: `(CB)^D = C ((BC)^D)^2 B`.
pub fn cline_transfer(
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    bc_drazin: &DrazinResult,
) -> Result<ComplexMatrix> {
    let (m, n) = b.shape();
    if c.shape() != (n, m) {
        return Err(Error::DimensionMismatch {
            op: "Cline transfer",
            lhs: b.shape(),
            rhs: c.shape(),
        });
    }
    if bc_drazin.inverse.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            op: "Cline transfer",
            lhs: (m, m),
            rhs: bc_drazin.inverse.shape(),
        });
    }
    let x = &bc_drazin.inverse;
    Ok(&(&(c * x) * x) * b)
}
