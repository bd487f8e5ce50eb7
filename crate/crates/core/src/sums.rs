//! Group inverse of `a + b` for group-invertible `a`, `b` with `ab = λ·ba`.
//!
//! Formulas that are suspected of being misprinted are always returned next
//! to a correction candidate. Neither form is preferred here; the harness
//! compares both against [`group_inverse`] of the sum.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{relative_residual, ComplexMatrix, ToleranceProfile, ONE};
use crate::spectral::{group_inverse, group_inverse_at_scale};

/// A recovered intertwining constant with its fit residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaCertificate {
    pub lambda: Complex64,
    /// `relative_residual(a·b, λ·b·a)`
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaDetection {
    Certificate(LambdaCertificate),
    /// `ab = ba = 0`: every nonzero λ works and λ = 1 is used.
    BothZero,
}

impl LambdaDetection {
    pub fn lambda(&self) -> Complex64 {
        match self {
            LambdaDetection::Certificate(c) => c.lambda,
            LambdaDetection::BothZero => ONE,
        }
    }
}

fn check_pair(a: &ComplexMatrix, b: &ComplexMatrix, op: &'static str) -> Result<()> {
    a.require_square(op)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op,
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    Ok(())
}

/// Recovers λ in `ab = λ·ba` by least squares over the Frobenius inner
/// product: `λ = <ba, ab> / ‖ba‖²`.
///
/// A product counts as zero when its norm is at most
/// `residual_rtol · max(1, ‖a‖·‖b‖)`.
pub fn detect_lambda(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<LambdaDetection> {
    check_pair(a, b, "lambda detection")?;
    let ab = a * b;
    let ba = b * a;
    let zero_cut = tol.residual_rtol * (a.frobenius_norm() * b.frobenius_norm()).max(1.0);
    let ab_zero = ab.frobenius_norm() <= zero_cut;
    let ba_norm = ba.frobenius_norm();
    if ba_norm <= zero_cut {
        return if ab_zero {
            Ok(LambdaDetection::BothZero)
        } else {
            Err(Error::NoLambda {
                residual: ab.frobenius_norm(),
            })
        };
    }
    let lambda = ba.inner(&ab)? / (ba_norm * ba_norm);
    let residual = relative_residual(&ab, &ba.scale(lambda));
    if residual > tol.residual_rtol || lambda.norm() <= tol.residual_rtol {
        return Err(Error::NoLambda { residual });
    }
    Ok(LambdaDetection::Certificate(LambdaCertificate { lambda, residual }))
}

/// Group inverses and spectral idempotents of a λ-commuting pair.
#[derive(Debug, Clone)]
pub struct SumContext {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub a_g: ComplexMatrix,
    pub b_g: ComplexMatrix,
    pub a_pi: ComplexMatrix,
    pub b_pi: ComplexMatrix,
    pub lambda: LambdaDetection,
    tol: ToleranceProfile,
}

/// Reference size for rank decisions on matrices built from `a` and `b`.
pub fn pair_scale(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.frobenius_norm() + b.frobenius_norm()
}

impl SumContext {
    /// Requires `a`, `b` group invertible and λ-commuting.
    pub fn new(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceProfile) -> Result<Self> {
        let lambda = detect_lambda(a, b, tol)?;
        let ga = group_inverse(a, tol)?;
        let gb = group_inverse(b, tol)?;
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            a_g: ga.inverse,
            b_g: gb.inverse,
            a_pi: ga.idempotent,
            b_pi: gb.idempotent,
            lambda,
            tol: *tol,
        })
    }

    /// Requires `a`, `b` group invertible and commuting.
    pub fn commuting(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceProfile) -> Result<Self> {
        check_pair(a, b, "commuting pair")?;
        let residual = relative_residual(&(a * b), &(b * a));
        if residual > tol.residual_rtol {
            return Err(Error::NotCommuting { residual });
        }
        Self::new(a, b, tol)
    }

    fn n(&self) -> usize {
        self.a.rows()
    }

    fn scale(&self) -> f64 {
        pair_scale(&self.a, &self.b)
    }

    fn ginv(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.ginv_at(m, self.scale())
    }

    fn ginv_at(&self, m: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
        Ok(group_inverse_at_scale(m, scale, &self.tol)?.inverse)
    }

    fn exists(&self, m: &ComplexMatrix) -> Result<bool> {
        match group_inverse_at_scale(m, self.scale(), &self.tol) {
            Ok(_) => Ok(true),
            Err(Error::NotGroupInvertible { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// `a·b·b^# + b·a·a^#`
    pub fn mixed_term(&self) -> ComplexMatrix {
        &(&(&self.a * &self.b) * &self.b_g) + &(&(&self.b * &self.a) * &self.a_g)
    }

    /// `a·(1 + a^#·b)`
    pub fn left_factor_term(&self) -> ComplexMatrix {
        let eye = ComplexMatrix::identity(self.n());
        &self.a * &(&eye + &(&self.a_g * &self.b))
    }

    /// Residuals of `abb^# = bb^#a`, `baa^# = aa^#b` and `ab^# = λ^{-1} b^#a`.
    pub fn lemma21_residuals(&self, lambda: Complex64) -> Result<[f64; 3]> {
        if lambda.norm() <= self.tol.residual_rtol {
            return Err(Error::ZeroScalar { name: "lambda" });
        }
        let (a, b) = (&self.a, &self.b);
        let bbg = b * &self.b_g;
        let aag = a * &self.a_g;
        Ok([
            relative_residual(&(a * &bbg), &(&bbg * a)),
            relative_residual(&(b * &aag), &(&aag * b)),
            relative_residual(&(a * &self.b_g), &(&self.b_g * a).scale(lambda.inv())),
        ])
    }

    pub fn equivalence(&self) -> Result<Equivalence> {
        let exists_sum = self.exists(&(&self.a + &self.b))?;
        let exists_cond2 = self.exists(&self.left_factor_term())?;
        let exists_cond3 = self.exists(&self.mixed_term())?;
        Ok(Equivalence {
            exists_sum,
            exists_cond2,
            exists_cond3,
            all_agree: exists_sum == exists_cond2 && exists_cond2 == exists_cond3,
        })
    }

    /// `a^# b^π + a^π b^# + (a b b^# + b a a^#)^#`
    pub fn sum_formula(&self) -> Result<ComplexMatrix> {
        let inner = self.ginv(&self.mixed_term())?;
        Ok(&(&(&self.a_g * &self.b_pi) + &(&self.a_pi * &self.b_g)) + &inner)
    }

    /// Stated: `a^# b^π + [a(1 + a^# b)]^#`; swapped: `b^# a^π + [a(1 + a^# b)]^#`.
    pub fn intermediate_variants(&self) -> Result<VariantPair> {
        let bracket = self.ginv(&self.left_factor_term())?;
        Ok(VariantPair {
            stated: &(&self.a_g * &self.b_pi) + &bracket,
            candidate: &(&self.b_g * &self.a_pi) + &bracket,
        })
    }

    /// Stated: `a^# b^π − a^π b^# + [a(1 − a^# b)]^#`;
    /// candidate: `−b^# a^π + [a(1 − a^# b)]^#`.
    pub fn difference_variants(&self) -> Result<VariantPair> {
        let eye = ComplexMatrix::identity(self.n());
        let bracket = self.ginv(&(&self.a * &(&eye - &(&self.a_g * &self.b))))?;
        let stated = &(&(&self.a_g * &self.b_pi) - &(&self.a_pi * &self.b_g)) + &bracket;
        let candidate = &bracket - &(&self.b_g * &self.a_pi);
        Ok(VariantPair { stated, candidate })
    }

    /// `a^# (1 + a^# b)^# b b^# + a^# b^π + b^# a^π`
    pub fn commuting_formula(&self) -> Result<ComplexMatrix> {
        let eye = ComplexMatrix::identity(self.n());
        let agb = &self.a_g * &self.b;
        let middle = self.ginv_at(&(&eye + &agb), 1.0 + agb.frobenius_norm())?;
        let head = &(&(&self.a_g * &middle) * &self.b) * &self.b_g;
        Ok(&(&head + &(&self.a_g * &self.b_pi)) + &(&self.b_g * &self.a_pi))
    }

    /// Literal: `(λ a b b^# + μ b a a^#)^# + λ^{-1} a b^# + μ^{-1} b^# a^π`;
    /// candidate: the same with `λ^{-1} a^# b^π` as the middle term.
    pub fn scaled_variants(&self, lambda: Complex64, mu: Complex64) -> Result<VariantPair> {
        if lambda.norm() <= self.tol.residual_rtol {
            return Err(Error::ZeroScalar { name: "lambda" });
        }
        if mu.norm() <= self.tol.residual_rtol {
            return Err(Error::ZeroScalar { name: "mu" });
        }
        let (a, b) = (&self.a, &self.b);
        let mixed = &(&(a * b) * &self.b_g).scale(lambda) + &(&(b * a) * &self.a_g).scale(mu);
        let head = self.ginv_at(&mixed, lambda.norm() * a.frobenius_norm() + mu.norm() * b.frobenius_norm())?;
        let tail = (&self.b_g * &self.a_pi).scale(mu.inv());
        let base = &head + &tail;
        Ok(VariantPair {
            stated: &base + &(a * &self.b_g).scale(lambda.inv()),
            candidate: &base + &(&self.a_g * &self.b_pi).scale(lambda.inv()),
        })
    }
}

/// Existence of the group inverses of `a + b`, `a(1 + a^# b)` and
/// `abb^# + baa^#`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub exists_sum: bool,
    pub exists_cond2: bool,
    pub exists_cond3: bool,
    pub all_agree: bool,
}

/// A formula as printed and its correction candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantPair {
    pub stated: ComplexMatrix,
    pub candidate: ComplexMatrix,
}

pub fn lemma21_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    lambda: Complex64,
    tol: &ToleranceProfile,
) -> Result<[f64; 3]> {
    check_pair(a, b, "lemma 2.1")?;
    let ga = group_inverse(a, tol)?;
    let gb = group_inverse(b, tol)?;
    let ctx = SumContext {
        a: a.clone(),
        b: b.clone(),
        a_g: ga.inverse,
        b_g: gb.inverse,
        a_pi: ga.idempotent,
        b_pi: gb.idempotent,
        lambda: LambdaDetection::Certificate(LambdaCertificate {
            lambda,
            residual: relative_residual(&(a * b), &(b * a).scale(lambda)),
        }),
        tol: *tol,
    };
    ctx.lemma21_residuals(lambda)
}

pub fn thm22_equivalence_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<Equivalence> {
    SumContext::new(a, b, tol)?.equivalence()
}

pub fn thm22_sum_formula(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<ComplexMatrix> {
    SumContext::new(a, b, tol)?.sum_formula()
}

pub fn thm22_intermediate_variants(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<VariantPair> {
    SumContext::new(a, b, tol)?.intermediate_variants()
}

pub fn cor23_difference_formula(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<VariantPair> {
    SumContext::new(a, b, tol)?.difference_variants()
}

pub fn cor24_commuting_formula(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<ComplexMatrix> {
    SumContext::commuting(a, b, tol)?.commuting_formula()
}

pub fn cor25_scaled_formula(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    lambda: Complex64,
    mu: Complex64,
    tol: &ToleranceProfile,
) -> Result<VariantPair> {
    SumContext::commuting(a, b, tol)?.scaled_variants(lambda, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn real(rows: &[[f64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows)
    }

    fn example_pair() -> (ComplexMatrix, ComplexMatrix) {
        (real(&[[0.0, 1.0], [1.0, 0.0]]), real(&[[-1.0, 0.0], [0.0, 1.0]]))
    }

    fn projection_pair() -> (ComplexMatrix, ComplexMatrix) {
        (
            ComplexMatrix::real_diagonal(&[1.0, 0.0]),
            ComplexMatrix::real_diagonal(&[0.0, 1.0]),
        )
    }

    fn one() -> ComplexMatrix {
        ComplexMatrix::identity(1)
    }

    fn close(x: &ComplexMatrix, y: &ComplexMatrix) -> bool {
        relative_residual(x, y) < 1e-12
    }

    #[test]
    fn detects_anticommuting_example() {
        let (a, b) = example_pair();
        match detect_lambda(&a, &b, &tol()).unwrap() {
            LambdaDetection::Certificate(c) => {
                assert!((c.lambda - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
                assert!(c.residual < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_commuting_and_rejects_one_sided_zero() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::real_diagonal(&[3.0, -1.0]);
        let lam = detect_lambda(&a, &b, &tol()).unwrap().lambda();
        assert!((lam - ONE).norm() < 1e-15);

        let (p, q) = projection_pair();
        assert_eq!(detect_lambda(&p, &q, &tol()).unwrap(), LambdaDetection::BothZero);

        let a = real(&[[0.0, 1.0], [0.0, 0.0]]);
        let b = real(&[[1.0, 0.0], [0.0, 0.0]]);
        assert!(matches!(detect_lambda(&a, &b, &tol()), Err(Error::NoLambda { .. })));

        let a = real(&[[1.0, 1.0], [0.0, 1.0]]);
        let b = real(&[[1.0, 0.0], [1.0, 1.0]]);
        assert!(matches!(detect_lambda(&a, &b, &tol()), Err(Error::NoLambda { .. })));
    }

    #[test]
    fn lemma21_on_example_and_commuting_invertibles() {
        let (a, b) = example_pair();
        let r = lemma21_check(&a, &b, Complex64::new(-1.0, 0.0), &tol()).unwrap();
        assert!(r.iter().all(|&x| x < 1e-15), "{r:?}");

        let a = real(&[[2.0, 1.0], [0.0, 2.0]]);
        let b = real(&[[3.0, -1.0], [0.0, 3.0]]);
        let r = lemma21_check(&a, &b, ONE, &tol()).unwrap();
        assert!(r.iter().all(|&x| x < 1e-14), "{r:?}");
    }

    #[test]
    fn equivalence_examples() {
        let all = Equivalence {
            exists_sum: true,
            exists_cond2: true,
            exists_cond3: true,
            all_agree: true,
        };
        let (a, b) = example_pair();
        assert_eq!(thm22_equivalence_check(&a, &b, &tol()).unwrap(), all);
        let (a, b) = projection_pair();
        assert_eq!(thm22_equivalence_check(&a, &b, &tol()).unwrap(), all);

        // a + b = [[0,1],[0,0]] is nilpotent and nonzero
        let a = real(&[[1.0, 1.0], [0.0, 1.0]]);
        let b = ComplexMatrix::identity(2).scale_real(-1.0);
        assert_eq!(
            thm22_equivalence_check(&a, &b, &tol()).unwrap(),
            Equivalence {
                exists_sum: false,
                exists_cond2: false,
                exists_cond3: false,
                all_agree: true,
            }
        );
    }

    #[test]
    fn sum_formula_examples() {
        let (a, b) = example_pair();
        let expected = real(&[[-0.5, 0.5], [0.5, 0.5]]);
        assert!(close(&thm22_sum_formula(&a, &b, &tol()).unwrap(), &expected));

        let (a, b) = projection_pair();
        assert!(close(&thm22_sum_formula(&a, &b, &tol()).unwrap(), &ComplexMatrix::identity(2)));
    }

    #[test]
    fn intermediate_variants_examples() {
        let (a, b) = projection_pair();
        let v = thm22_intermediate_variants(&a, &b, &tol()).unwrap();
        assert!(close(&v.stated, &ComplexMatrix::real_diagonal(&[2.0, 0.0])));
        assert!(close(&v.candidate, &ComplexMatrix::identity(2)));

        let (a, b) = example_pair();
        let v = thm22_intermediate_variants(&a, &b, &tol()).unwrap();
        let expected = real(&[[-0.5, 0.5], [0.5, 0.5]]);
        assert!(close(&v.stated, &expected) && close(&v.candidate, &expected));

        let v = thm22_intermediate_variants(&one(), &one(), &tol()).unwrap();
        let half = one().scale_real(0.5);
        assert!(close(&v.stated, &half) && close(&v.candidate, &half));
    }

    #[test]
    fn difference_examples() {
        let a = real(&[[2.0, 0.0], [0.0, 0.0]]);
        let zero = ComplexMatrix::zeros(2, 2);
        let v = cor23_difference_formula(&a, &zero, &tol()).unwrap();
        let ag = ComplexMatrix::real_diagonal(&[0.5, 0.0]);
        // the printed form counts a^# twice when b = 0
        assert!(close(&v.stated, &ag.scale_real(2.0)));
        assert!(close(&v.candidate, &ag));

        let (a, b) = projection_pair();
        let v = cor23_difference_formula(&a, &b, &tol()).unwrap();
        assert!(close(&v.stated, &ComplexMatrix::real_diagonal(&[2.0, -1.0])));
        assert!(close(&v.candidate, &ComplexMatrix::real_diagonal(&[1.0, -1.0])));

        let (a, b) = example_pair();
        let oracle = group_inverse(&(&a - &b), &tol()).unwrap().inverse;
        let v = cor23_difference_formula(&a, &b, &tol()).unwrap();
        assert!(close(&v.stated, &oracle) && close(&v.candidate, &oracle));
    }

    #[test]
    fn commuting_formula_examples() {
        let (a, b) = projection_pair();
        assert!(close(&cor24_commuting_formula(&a, &b, &tol()).unwrap(), &ComplexMatrix::identity(2)));
        let half = one().scale_real(0.5);
        assert!(close(&cor24_commuting_formula(&one(), &one(), &tol()).unwrap(), &half));

        let (a, b) = example_pair();
        assert!(matches!(cor24_commuting_formula(&a, &b, &tol()), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn scaled_formula_examples() {
        let (a, b) = projection_pair();
        let v = cor25_scaled_formula(&a, &b, ONE, ONE, &tol()).unwrap();
        assert!(close(&v.candidate, &ComplexMatrix::identity(2)));
        assert!(!close(&v.stated, &ComplexMatrix::identity(2)));

        let v = cor25_scaled_formula(&one(), &one(), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), &tol())
            .unwrap();
        assert!(close(&v.candidate, &one().scale_real(0.2)));
        assert!(close(&v.stated, &one().scale_real(0.2 + 0.5)));

        let a = ComplexMatrix::real_diagonal(&[2.0, 0.0]);
        let zero = ComplexMatrix::zeros(2, 2);
        let v = cor25_scaled_formula(&a, &zero, ONE, ONE, &tol()).unwrap();
        assert!(close(&v.candidate, &ComplexMatrix::real_diagonal(&[0.5, 0.0])));

        assert!(matches!(
            cor25_scaled_formula(&one(), &one(), Complex64::new(0.0, 0.0), ONE, &tol()),
            Err(Error::ZeroScalar { name: "lambda" })
        ));
    }
}
