//! Rank decisions, full-rank factorization, inversion and the Pierce
//! decomposition.
//!
//! The singular value decomposition and the LU inverse are delegated to
//! `faer`; everything built on top of them lives here.

use faer::linalg::solvers::DenseSolveCore;

use crate::error::{Error, Result};
use crate::matrix::{relative_residual, ComplexMatrix, ToleranceProfile};

/// Thin SVD `M = U · diag(σ) · Vᴴ` with σ sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_h: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let k = m.rows().min(m.cols());
    if k == 0 {
        return Svd {
            u: ComplexMatrix::zeros(m.rows(), 0),
            singular_values: Vec::new(),
            v_h: ComplexMatrix::zeros(0, m.cols()),
        };
    }
    let dec = match m.to_faer().thin_svd() {
        Ok(dec) => dec,
        // non-convergence is only reachable with non-finite input
        Err(_) => {
            return Svd {
                u: ComplexMatrix::zeros(m.rows(), k),
                singular_values: vec![f64::NAN; k],
                v_h: ComplexMatrix::zeros(k, m.cols()),
            }
        }
    };
    let s = dec.S().column_vector();
    let sv: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let (u, v) = (dec.U(), dec.V());
    Svd {
        u: ComplexMatrix::from_fn(m.rows(), k, |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&i| sv[i]).collect(),
        v_h: ComplexMatrix::from_fn(k, m.cols(), |i, j| v[(j, order[i])].conj()),
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    svd(m).singular_values
}

fn rank_from_values(sv: &[f64], tol: &ToleranceProfile) -> usize {
    rank_with_floor(sv, 0.0, tol)
}

/// Counts singular values above `max(rank_rtol · σ_max, floor)`.
pub(crate) fn rank_with_floor(sv: &[f64], floor: f64, tol: &ToleranceProfile) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax <= 0.0 || !smax.is_finite() {
        return 0;
    }
    let cutoff = (tol.rank_rtol * smax).max(floor);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Number of singular values above `rank_rtol · σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: &ToleranceProfile) -> usize {
    rank_from_values(&singular_values(m), tol)
}

/// Numerical rank of `M²`, with singular values at or below
/// `rank_rtol · σ_max(M)²` also discarded. When `M²` is rounding noise
/// (nilpotent `M` of index 2) a purely relative cutoff would count the
/// noise as full rank.
pub fn rank_of_square(m: &ComplexMatrix, tol: &ToleranceProfile) -> usize {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    rank_with_floor(&singular_values(&(m * m)), tol.rank_rtol * smax * smax, tol)
}

/// 2-norm condition number `σ_max / σ_min`; infinite for singular or
/// rectangular input.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (None, None) => 1.0,
        _ => f64::INFINITY,
    }
}

/// `M = F · G` from the rank-r truncated SVD: `F = U_r Σ_r`, `G = V_rᴴ`.
pub fn full_rank_factorization(
    m: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    full_rank_factorization_with_floor(m, 0.0, tol)
}

/// As [`full_rank_factorization`], additionally dropping singular values
/// at or below an absolute `floor`. Used on cores whose scale is set by an
/// enclosing matrix.
pub(crate) fn full_rank_factorization_with_floor(
    m: &ComplexMatrix,
    floor: f64,
    tol: &ToleranceProfile,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let dec = svd(m);
    let r = rank_with_floor(&dec.singular_values, floor, tol);
    if r == 0 {
        return Err(Error::ZeroMatrix);
    }
    let f = ComplexMatrix::from_fn(m.rows(), r, |i, j| dec.u[(i, j)] * dec.singular_values[j]);
    let g = dec.v_h.submatrix(0, 0, r, m.cols());
    Ok((f, g))
}

/// Inverse of a square, numerically nonsingular matrix.
///
/// Rejects matrices whose numerical rank is deficient or whose condition
/// number exceeds `cond_max`. The LU inverse gets one Newton–Schulz
/// refinement step and must then meet `residual_rtol` on both sides.
pub fn inverse(m: &ComplexMatrix, tol: &ToleranceProfile) -> Result<ComplexMatrix> {
    let n = m.require_square("inverse")?;
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let sv = singular_values(m);
    let rank = rank_from_values(&sv, tol);
    let condition = match sv.last() {
        Some(&lo) if lo > 0.0 => sv[0] / lo,
        _ => f64::INFINITY,
    };
    let singular = || Error::Singular {
        rank,
        size: n,
        condition,
    };
    if rank < n || condition > tol.cond_max {
        return Err(singular());
    }
    let raw = m.to_faer().partial_piv_lu().inverse();
    let x = ComplexMatrix::from_faer(raw.as_ref());
    if !x.is_finite() {
        return Err(singular());
    }
    let eye = ComplexMatrix::identity(n);
    let two_eye = eye.scale_real(2.0);
    let x = &x * &(&two_eye - &(m * &x));
    if relative_residual(&(m * &x), &eye) > tol.residual_rtol
        || relative_residual(&(&x * m), &eye) > tol.residual_rtol
    {
        return Err(singular());
    }
    Ok(x)
}

/// The four Pierce blocks of `x` relative to an idempotent `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PierceBlocks {
    pub pxp: ComplexMatrix,
    pub px_q: ComplexMatrix,
    pub q_xp: ComplexMatrix,
    pub q_xq: ComplexMatrix,
}

impl PierceBlocks {
    pub fn sum(&self) -> ComplexMatrix {
        &(&(&self.pxp + &self.px_q) + &self.q_xp) + &self.q_xq
    }
}

/// Splits `x` as `pxp + px(1−p) + (1−p)xp + (1−p)x(1−p)`.
pub fn pierce_decompose(
    x: &ComplexMatrix,
    p: &ComplexMatrix,
    tol: &ToleranceProfile,
) -> Result<PierceBlocks> {
    let n = x.require_square("pierce decomposition")?;
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            op: "pierce decomposition",
            lhs: x.shape(),
            rhs: p.shape(),
        });
    }
    let residual = relative_residual(&(p * p), p);
    if residual > tol.residual_rtol {
        return Err(Error::NotIdempotent { residual });
    }
    let q = &ComplexMatrix::identity(n) - p;
    let xp = x * p;
    let xq = x * &q;
    Ok(PierceBlocks {
        pxp: p * &xp,
        px_q: p * &xq,
        q_xp: &q * &xp,
        q_xq: &q * &xq,
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&ComplexMatrix::identity(3), &tol()), 3);
        let nil = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(numerical_rank(&nil, &tol()), 1);
        let ones = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(numerical_rank(&ones, &tol()), 1);
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3, 2), &tol()), 0);
    }

    #[test]
    fn square_rank_ignores_noise() {
        let nil = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [-1.0, -1.0]]);
        let noisy = &nil + &ComplexMatrix::real_diagonal(&[1e-17, -1e-17]);
        assert_eq!(rank_of_square(&noisy, &tol()), 0);
        assert_eq!(rank_of_square(&ComplexMatrix::identity(3), &tol()), 3);
    }

    #[test]
    fn svd_reconstructs_rank_deficient_complex_input() {
        // rank one, nilpotent up to rounding; an earlier backend lost 7% of the norm here
        let u = [Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.5), Complex64::new(0.1, -0.4)];
        let w = [Complex64::new(0.5, 0.4), Complex64::new(0.62, 0.0), Complex64::new(0.0, 0.0)];
        let partial: Complex64 = u.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
        let w = [w[0], w[1], (-partial / u[2]).conj()];
        let m = ComplexMatrix::from_fn(3, 3, |i, j| u[i] * w[j].conj());
        let dec = svd(&m);
        let s = ComplexMatrix::diagonal(&dec.singular_values.iter().map(|&x| x.into()).collect::<Vec<_>>());
        assert!(relative_residual(&(&(&dec.u * &s) * &dec.v_h), &m) < 1e-14);
        assert!((&m * &m).frobenius_norm() < 1e-14);
        assert_eq!(numerical_rank(&m, &tol()), 1);
    }

    #[test]
    fn factorization_examples() {
        let cases = [
            ComplexMatrix::real_diagonal(&[2.0, 0.0]),
            ComplexMatrix::identity(2),
            ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]),
        ];
        let ranks = [1, 2, 1];
        for (m, r) in cases.iter().zip(ranks) {
            let (f, g) = full_rank_factorization(m, &tol()).unwrap();
            assert_eq!(f.shape(), (2, r));
            assert_eq!(g.shape(), (r, 2));
            assert!(relative_residual(&(&f * &g), m) <= 1e-12);
        }
        assert_eq!(
            full_rank_factorization(&ComplexMatrix::zeros(2, 2), &tol()),
            Err(Error::ZeroMatrix)
        );
    }

    #[test]
    fn inverse_examples() {
        let eye = ComplexMatrix::identity(3);
        assert!(relative_residual(&inverse(&eye, &tol()).unwrap(), &eye) < 1e-15);
        let swap = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert!(relative_residual(&inverse(&swap, &tol()).unwrap(), &swap) < 1e-15);
        let nil = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(inverse(&nil, &tol()), Err(Error::Singular { rank: 1, .. })));
        let ill = ComplexMatrix::real_diagonal(&[1.0, 1e-9]);
        assert!(matches!(inverse(&ill, &tol()), Err(Error::Singular { .. })));
        assert!(matches!(
            inverse(&ComplexMatrix::zeros(2, 3), &tol()),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn pierce_examples() {
        let x = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let z = ComplexMatrix::zeros(2, 2);
        let blocks = pierce_decompose(&x, &ComplexMatrix::identity(2), &tol()).unwrap();
        assert_eq!(blocks.pxp, x);
        assert_eq!((blocks.px_q.clone(), blocks.q_xp.clone(), blocks.q_xq.clone()), (z.clone(), z.clone(), z.clone()));

        let blocks = pierce_decompose(&x, &z, &tol()).unwrap();
        assert_eq!(blocks.q_xq, x);
        assert_eq!(blocks.pxp, z);

        let p = ComplexMatrix::real_diagonal(&[1.0, 0.0]);
        let blocks = pierce_decompose(&x, &p, &tol()).unwrap();
        assert_eq!(blocks.pxp, ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]]));
        assert_eq!(blocks.px_q, ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.0, 0.0]]));
        assert_eq!(blocks.q_xp, ComplexMatrix::from_real_rows(&[[0.0, 0.0], [3.0, 0.0]]));
        assert_eq!(blocks.q_xq, ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 4.0]]));
        assert_eq!(blocks.sum(), x);
    }

    #[test]
    fn pierce_rejects_non_idempotent() {
        let x = ComplexMatrix::identity(2);
        let p = ComplexMatrix::real_diagonal(&[2.0, 0.0]);
        assert!(matches!(pierce_decompose(&x, &p, &tol()), Err(Error::NotIdempotent { .. })));
    }
}

