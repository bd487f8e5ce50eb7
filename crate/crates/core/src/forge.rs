//! Seeded generators of instances satisfying each hypothesis set.
//!
//! Every generator is a pure function of its arguments. Randomness comes
//! from ChaCha8 seeded with [`SeedableRng::seed_from_u64`]; callers that need
//! many independent draws from one seed select a stream with
//! `set_stream(index)` (see [`seeded_rng`]). Values are drawn in a fixed
//! order, so identical arguments give bit-identical output.
//!
//! Random similarities are `H₁·diag(σ)·H₂` with Householder reflections
//! `H₁`, `H₂` and `σᵢ ∈ [1, 10]`, so their condition number is at most 10 and
//! their inverse is known in closed form. Every generator re-checks its
//! output before returning and fails with [`Error::ForgeContract`] otherwise.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{block_hypotheses, swap_route, transpose_route, BlockInstance, TheoremId};
use crate::error::{Error, Result};
use crate::io::{PairInstance, RectPair};
use crate::linalg::{numerical_rank, rank_of_square};
use crate::matrix::{relative_residual, ComplexMatrix, ToleranceProfile, ONE, ZERO};
use crate::spectral::group_inverse;

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

/// Modulus uniform in `[lo, hi]`, phase uniform.
fn bounded_complex<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    let r = rng.random_range(lo..=hi);
    polar(r, rng.random_range(0.0..2.0 * PI))
}

fn box_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| box_complex(rng))
}

/// `I − 2·v·vᴴ/‖v‖²`, unitary and its own inverse.
fn householder(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let v: Vec<Complex64> = loop {
        let v: Vec<Complex64> = (0..n).map(|_| box_complex(rng)).collect();
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-2 {
            break v;
        }
    };
    let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let e = if i == j { ONE } else { ZERO };
        e - v[i] * v[j].conj() * (2.0 / nrm)
    })
}

/// `(X, X⁻¹)` with `X = H₁·diag(s)·H₂`; `s` comes from `draw`.
fn factored_pair(
    n: usize,
    rng: &mut impl Rng,
    mut draw: impl FnMut(&mut dyn rand::RngCore) -> Complex64,
) -> (ComplexMatrix, ComplexMatrix) {
    let h1 = householder(n, rng);
    let h2 = householder(n, rng);
    let s: Vec<Complex64> = (0..n).map(|_| draw(rng)).collect();
    let inv: Vec<Complex64> = s.iter().map(|z| z.inv()).collect();
    let x = &(&h1 * &ComplexMatrix::diagonal(&s)) * &h2;
    let x_inv = &(&h2 * &ComplexMatrix::diagonal(&inv)) * &h1;
    (x, x_inv)
}

/// Random similarity with condition number at most 10.
pub fn random_similarity(n: usize, rng: &mut impl Rng) -> (ComplexMatrix, ComplexMatrix) {
    factored_pair(n, rng, |r| Complex64::new(r.random_range(1.0..=10.0), 0.0))
}

/// Random nonsingular core with singular values in `[0.5, 2]`.
fn random_core(n: usize, rng: &mut impl Rng) -> (ComplexMatrix, ComplexMatrix) {
    factored_pair(n, rng, |r| bounded_complex(r, 0.5, 2.0))
}

fn conjugate(m: &ComplexMatrix, s: &ComplexMatrix, s_inv: &ComplexMatrix) -> ComplexMatrix {
    &(s * m) * s_inv
}

fn contract(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ForgeContract(what()))
    }
}

fn group_invertible_draw(n: usize, r: usize, rng: &mut impl Rng) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if r > n {
        return Err(Error::InvalidArgument(format!("rank {r} exceeds size {n}")));
    }
    let (k, k_inv) = random_core(r, rng);
    let (s, s_inv) = random_similarity(n, rng);
    let zero = ComplexMatrix::zeros(n - r, n - r);
    let m = conjugate(&ComplexMatrix::block_diag(&[&k, &zero]), &s, &s_inv);
    let m_g = conjugate(&ComplexMatrix::block_diag(&[&k_inv, &zero]), &s, &s_inv);
    let tol = ToleranceProfile::default();
    let (r1, r2) = (numerical_rank(&m, &tol), rank_of_square(&m, &tol));
    contract(r1 == r && r2 == r, || {
        format!("group-invertible forge produced rank {r1}, rank of square {r2}, expected {r}")
    })?;
    Ok((m, m_g))
}

/// `M = S·diag(K, 0)·S⁻¹` with `K` a random well-conditioned `r×r` core.
pub fn forge_group_invertible(n: usize, r: usize, seed: u64) -> Result<ComplexMatrix> {
    Ok(group_invertible_draw(n, r, &mut seeded_rng(seed, 0))?.0)
}

/// As [`forge_group_invertible`], also returning `S·diag(K⁻¹, 0)·S⁻¹`, the
/// group inverse known from the construction.
pub fn forge_group_invertible_with_inverse(
    n: usize,
    r: usize,
    seed: u64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    group_invertible_draw(n, r, &mut seeded_rng(seed, 0))
}

/// `M = S·diag(K, N)·S⁻¹` with `N` a nilpotent Jordan-type block of size 2
/// or 3, so `rank(M²) < rank(M)`. Requires `n ≥ 2`.
pub fn forge_with_nilpotent_part(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("a nilpotent part needs n >= 2".into()));
    }
    let rng = &mut seeded_rng(seed, 0);
    let j = rng.random_range(2..=n.min(3));
    let r = rng.random_range(0..=n - j);
    let z = n - j - r;
    let (k, _) = random_core(r, rng);
    let nil = ComplexMatrix::from_fn(j, j, |a, b| if b == a + 1 { ONE } else { ZERO });
    let nil_scale: Vec<Complex64> = (0..j).map(|_| bounded_complex(rng, 0.5, 2.0)).collect();
    let d = ComplexMatrix::diagonal(&nil_scale);
    let nil = &(&d * &nil) * &ComplexMatrix::diagonal(&nil_scale.iter().map(|z| z.inv()).collect::<Vec<_>>());
    let nil = nil.scale(bounded_complex(rng, 0.5, 2.0));
    let (s, s_inv) = random_similarity(n, rng);
    let m = conjugate(
        &ComplexMatrix::block_diag(&[&k, &nil, &ComplexMatrix::zeros(z, z)]),
        &s,
        &s_inv,
    );
    let tol = ToleranceProfile::default();
    let (r1, r2) = (numerical_rank(&m, &tol), rank_of_square(&m, &tol));
    contract(r1 == r + j - 1 && r2 == r + j.saturating_sub(2), || {
        format!("nilpotent forge produced ranks {r1}, {r2}")
    })?;
    Ok(m)
}

/// The k-cycle shift `a` and `b = diag(d₀, λd₀, …, λ^{k−1}d₀)` with
/// `λ = exp(2πi/k)`, so that `a·b = λ·b·a`.
pub fn shift_pair(k: usize, d0: Complex64) -> (ComplexMatrix, ComplexMatrix, Complex64) {
    let lambda = polar(1.0, 2.0 * PI / k as f64);
    let lambda = if k == 2 { Complex64::new(-1.0, 0.0) } else if k == 1 { ONE } else { lambda };
    let a = ComplexMatrix::from_fn(k, k, |i, j| if j == (i + 1) % k { ONE } else { ZERO });
    let diag: Vec<Complex64> = (0..k).map(|j| d0 * lambda.powu(j as u32)).collect();
    (a, ComplexMatrix::diagonal(&diag), lambda)
}

/// A λ-commuting pair built from [`shift_pair`], padded with `pad` diagonal
/// cells and conjugated by a random similarity.
///
/// On the shift cell `(a + b)^k = (1 + d₀^k)·I`. Roughly one draw in four
/// takes `d₀` to be a k-th root of −1, making that cell of `a + b` nilpotent
/// and nonzero; other draws keep `|1 ± d₀^k| ≥ 0.1`. Each pad cell carries a
/// nonzero entry in `a` only, in `b` only, or in neither.
pub fn forge_lambda_pair(k: usize, pad: usize, seed: u64) -> Result<PairInstance> {
    if k == 0 {
        return Err(Error::InvalidArgument("cycle length must be at least 1".into()));
    }
    let rng = &mut seeded_rng(seed, 0);
    let d0 = if rng.random_bool(0.25) {
        let j = rng.random_range(0..k);
        polar(1.0, PI * (2 * j + 1) as f64 / k as f64)
    } else {
        loop {
            let d = bounded_complex(rng, 0.5, 2.0);
            let dk = d.powu(k as u32);
            if (ONE + dk).norm() >= 0.1 && (ONE + (-d).powu(k as u32)).norm() >= 0.1 {
                break d;
            }
        }
    };
    let (a_cell, b_cell, lambda) = shift_pair(k, d0);
    let mut a_pad = Vec::with_capacity(pad);
    let mut b_pad = Vec::with_capacity(pad);
    for _ in 0..pad {
        let v = bounded_complex(rng, 0.5, 2.0);
        match rng.random_range(0..3) {
            0 => (a_pad.push(v), b_pad.push(ZERO)),
            1 => (a_pad.push(ZERO), b_pad.push(v)),
            _ => (a_pad.push(ZERO), b_pad.push(ZERO)),
        };
    }
    let (s, s_inv) = random_similarity(k + pad, rng);
    let a = conjugate(&ComplexMatrix::block_diag(&[&a_cell, &ComplexMatrix::diagonal(&a_pad)]), &s, &s_inv);
    let b = conjugate(&ComplexMatrix::block_diag(&[&b_cell, &ComplexMatrix::diagonal(&b_pad)]), &s, &s_inv);

    let tol = ToleranceProfile::default();
    let residual = relative_residual(&(&a * &b), &(&b * &a).scale(lambda));
    contract(residual <= 1e-12, || format!("lambda pair residual {residual:.3e}"))?;
    contract(group_inverse(&a, &tol).is_ok() && group_inverse(&b, &tol).is_ok(), || {
        "lambda pair factor is not group invertible".into()
    })?;
    Ok(PairInstance {
        a,
        b,
        lambda: Some(lambda),
        mu: None,
    })
}

/// `a = p(T)`, `b = q(T)` for a diagonalizable `T = S·diag(t)·S⁻¹`.
///
/// `T` takes at most four distinct eigenvalues ("levels"), so any choice of
/// values of `p` and `q` on the levels is realized by polynomials of degree
/// at most 3. Level values are zero or of modulus in `[0.5, 2]`, and sums
/// `p + q` on a level are zero or of modulus at least 0.25.
pub fn forge_commuting_pair(n: usize, seed: u64) -> Result<PairInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("size must be at least 1".into()));
    }
    let rng = &mut seeded_rng(seed, 0);
    let levels = rng.random_range(1..=n.min(4));
    let mut values = Vec::with_capacity(levels);
    for _ in 0..levels {
        let p = if rng.random_bool(0.3) { ZERO } else { bounded_complex(rng, 0.5, 2.0) };
        let q = loop {
            let q = if rng.random_bool(0.3) { ZERO } else { bounded_complex(rng, 0.5, 2.0) };
            let s = (p + q).norm();
            let ratio_ok = p == ZERO || (ONE + q / p).norm() >= 0.25;
            if (s == 0.0 || s >= 0.25) && ratio_ok {
                break q;
            }
        };
        values.push((p, q));
    }
    let assignment: Vec<usize> = (0..n).map(|i| if i < levels { i } else { rng.random_range(0..levels) }).collect();
    let (s, s_inv) = random_similarity(n, rng);
    let pa: Vec<Complex64> = assignment.iter().map(|&l| values[l].0).collect();
    let pb: Vec<Complex64> = assignment.iter().map(|&l| values[l].1).collect();
    let a = conjugate(&ComplexMatrix::diagonal(&pa), &s, &s_inv);
    let b = conjugate(&ComplexMatrix::diagonal(&pb), &s, &s_inv);
    let residual = relative_residual(&(&a * &b), &(&b * &a));
    contract(residual <= 1e-12, || format!("commuting pair residual {residual:.3e}"))?;
    Ok(PairInstance {
        a,
        b,
        lambda: None,
        mu: None,
    })
}

/// Random `B: m×n`, `C: n×m`. Half the draws are generic products of random
/// rank; the others place a strictly triangular `B` against an identity-like
/// `C` next to a generic part, so `BC` carries a nilpotent part of index up
/// to `min(m, n)`.
pub fn forge_rect_pair(m: usize, n: usize, seed: u64) -> Result<RectPair> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("sizes must be at least 1".into()));
    }
    let rng = &mut seeded_rng(seed, 0);
    let (b, c) = if rng.random_bool(0.5) {
        let rho = rng.random_range(0..=m.min(n));
        let b = &random_matrix(m, rho, rng) * &random_matrix(rho, n, rng);
        (b, random_matrix(n, m, rng))
    } else {
        let p = m.min(n);
        let g = rng.random_range(0..p);
        let nil = p - g;
        let b = ComplexMatrix::from_fn(m, n, |i, j| {
            if i < g && j < g {
                box_complex(rng)
            } else if i >= g && j > i && j < p {
                bounded_complex(rng, 0.5, 2.0)
            } else {
                ZERO
            }
        });
        let c = ComplexMatrix::from_fn(n, m, |i, j| {
            if i < g && j < g {
                box_complex(rng)
            } else if i == j && i >= g && i < g + nil {
                ONE
            } else {
                ZERO
            }
        });
        let (s1, s1_inv) = random_similarity(m, rng);
        let (s2, s2_inv) = random_similarity(n, rng);
        (&(&s1 * &b) * &s2_inv, &(&s2 * &c) * &s1_inv)
    };
    Ok(RectPair { b, c })
}

/// `B = 0`, `C = D·D^#·R`: forces `D^π·C = 0`.
pub fn forge_lem31_instance(m: usize, n: usize, seed: u64) -> Result<BlockInstance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("block sizes must be at least 1".into()));
    }
    let rng = &mut seeded_rng(seed, 0);
    let ra = rng.random_range(0..=m);
    let rd = rng.random_range(0..=n);
    let (a, _) = group_invertible_draw(m, ra, rng)?;
    let (d, d_g) = group_invertible_draw(n, rd, rng)?;
    let c = &(&d * &d_g) * &random_matrix(n, m, rng);
    let inst = BlockInstance::new(a, ComplexMatrix::zeros(m, n), c, d, ONE)?;
    recheck(inst, TheoremId::Lem31)
}

fn recheck(inst: BlockInstance, theorem: TheoremId) -> Result<BlockInstance> {
    let tol = ToleranceProfile::default();
    let report = block_hypotheses(&inst, theorem, &tol)?;
    let failing = report.failing(&tol);
    contract(failing.is_empty(), || format!("{theorem} instance fails {failing:?}"))?;
    Ok(inst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    ScalarLift,
    Search,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SCALAR_LIFT" => Ok(Self::ScalarLift),
            "SEARCH" => Ok(Self::Search),
            _ => Err(Error::Unknown {
                what: "strategy",
                value: s.to_string(),
            }),
        }
    }
}

/// A block instance with its `B ≠ 0 and C ≠ 0` flag.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockForge {
    pub instance: BlockInstance,
    pub nontrivial: bool,
}

impl BlockForge {
    fn new(instance: BlockInstance) -> Self {
        let nontrivial = instance.is_nontrivial();
        Self { instance, nontrivial }
    }
}

/// Lift of the scalar solution `(0, β, γ, 0)` to `cells` diagonal cells,
/// next to free group-invertible blocks `A′` (size `m − cells`) and `D′`
/// (size `n − cells`). `B` and `C` vanish outside the cells, so
/// `DC = λ·CA` holds with both sides zero and λ = 1.
pub fn scalar_lift(m: usize, n: usize, cells: usize, rng: &mut impl Rng) -> Result<BlockInstance> {
    if cells > m.min(n) {
        return Err(Error::InvalidArgument(format!("{cells} lift cells do not fit in m = {m}, n = {n}")));
    }
    let ra = rng.random_range(0..=m - cells);
    let rd = rng.random_range(0..=n - cells);
    let (a_free, _) = group_invertible_draw(m - cells, ra, rng)?;
    let (d_free, _) = group_invertible_draw(n - cells, rd, rng)?;
    let beta: Vec<Complex64> = (0..cells).map(|_| bounded_complex(rng, 0.5, 2.0)).collect();
    let gamma: Vec<Complex64> = (0..cells).map(|_| bounded_complex(rng, 0.5, 2.0)).collect();
    let zc = ComplexMatrix::zeros(cells, cells);
    let a = ComplexMatrix::block_diag(&[&zc, &a_free]);
    let d = ComplexMatrix::block_diag(&[&zc, &d_free]);
    let b = ComplexMatrix::from_fn(m, n, |i, j| if i == j && i < cells { beta[i] } else { ZERO });
    let c = ComplexMatrix::from_fn(n, m, |i, j| if i == j && i < cells { gamma[i] } else { ZERO });
    BlockInstance::new(a, b, c, d, ONE)
}

const GRID: [Complex64; 5] = [
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
];

fn grid_size(rows: usize, cols: usize) -> u64 {
    5u64.pow((rows * cols) as u32)
}

/// Entry `e` (row-major) takes base-5 digit `e` of `index`.
fn grid_matrix(rows: usize, cols: usize, mut index: u64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let z = GRID[(index % 5) as usize];
        index /= 5;
        z
    })
}

fn is_zero(m: &ComplexMatrix) -> bool {
    m.max_abs() == 0.0
}

fn group_invertible_grid(size: usize, tol: &ToleranceProfile) -> Vec<(u64, ComplexMatrix)> {
    (0..grid_size(size, size))
        .map(|i| (i, grid_matrix(size, size, i)))
        .filter(|(_, m)| numerical_rank(m, tol) == rank_of_square(m, tol))
        .collect()
}

/// Cheap necessary conditions on `(B, C)`: `BC` group invertible with
/// `B·(CB)^π = 0` and `C·(BC)^π = 0`.
fn off_diagonal_ok(b: &ComplexMatrix, c: &ComplexMatrix, tol: &ToleranceProfile) -> bool {
    let bc = b * c;
    let Ok(g) = group_inverse(&bc, tol) else {
        return false;
    };
    let cb = c * b;
    let cb_g = &(c * &(&g.inverse * &g.inverse)) * b;
    let cb_pi = &ComplexMatrix::identity(cb.rows()) - &(&cb * &cb_g);
    (b * &cb_pi).frobenius_norm() <= tol.residual_rtol && (c * &g.idempotent).frobenius_norm() <= tol.residual_rtol
}

/// λ with `DC = λ·CA` on exact grid arithmetic, 1 when both sides vanish.
fn grid_lambda(dc: &ComplexMatrix, ca: &ComplexMatrix) -> Option<Complex64> {
    match (is_zero(dc), is_zero(ca)) {
        (true, true) => Some(ONE),
        (false, false) => {
            let n2 = ca.frobenius_norm().powi(2);
            let lambda = ca.inner(dc).ok()? / n2;
            (relative_residual(dc, &ca.scale(lambda)) <= 1e-12).then_some(lambda)
        }
        _ => None,
    }
}

/// Exhaustive search over block entries in `{0, ±1, ±i}` for an instance
/// with `B ≠ 0` and `C ≠ 0` passing the base hypotheses.
///
/// The enumeration visits `B`, then `C`, `A`, `D`, each in base-5 index order
/// starting from `offsets` and wrapping around. With `full_support` the
/// instance must also have `A ≠ 0` and `D ≠ 0`.
pub fn search_thm32(
    m: usize,
    n: usize,
    offsets: [u64; 4],
    full_support: bool,
    tol: &ToleranceProfile,
) -> Result<BlockInstance> {
    if m == 0 || n == 0 || m > 2 || n > 2 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search supports 1 <= m, n <= 2, got m = {m}, n = {n}"
        )));
    }
    let rotate = |list: &[(u64, ComplexMatrix)], total: u64, off: u64| -> Vec<ComplexMatrix> {
        let start = off % total;
        let mut v: Vec<&(u64, ComplexMatrix)> = list.iter().collect();
        v.sort_by_key(|(i, _)| (i + total - start) % total);
        v.into_iter().map(|(_, x)| x.clone()).collect()
    };
    let a_list = rotate(&group_invertible_grid(m, tol), grid_size(m, m), offsets[2]);
    let d_list = rotate(&group_invertible_grid(n, tol), grid_size(n, n), offsets[3]);
    let (nb, nc) = (grid_size(m, n), grid_size(n, m));
    for ib in 0..nb {
        let b = grid_matrix(m, n, (ib + offsets[0]) % nb);
        if is_zero(&b) {
            continue;
        }
        for ic in 0..nc {
            let c = grid_matrix(n, m, (ic + offsets[1]) % nc);
            if is_zero(&c) || !off_diagonal_ok(&b, &c, tol) {
                continue;
            }
            for a in &a_list {
                if (full_support && is_zero(a)) || !is_zero(&(a * &b)) {
                    continue;
                }
                let ca = &c * a;
                for d in &d_list {
                    if (full_support && is_zero(d)) || !is_zero(&(&b * d)) {
                        continue;
                    }
                    let Some(lambda) = grid_lambda(&(d * &c), &ca) else {
                        continue;
                    };
                    let inst = BlockInstance::new(a.clone(), b.clone(), c.clone(), d.clone(), lambda)?;
                    if block_hypotheses(&inst, TheoremId::Thm32, tol)?.passes(tol) {
                        return Ok(inst);
                    }
                }
            }
        }
    }
    Err(Error::SearchExhausted { m, n })
}

pub fn forge_thm32_instance(m: usize, n: usize, seed: u64, strategy: Strategy) -> Result<BlockForge> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("block sizes must be at least 1".into()));
    }
    let rng = &mut seeded_rng(seed, 0);
    let inst = match strategy {
        Strategy::ScalarLift => {
            let cells = rng.random_range(1..=m.min(n));
            scalar_lift(m, n, cells, rng)?
        }
        Strategy::Search => {
            let offsets = [rng.random(), rng.random(), rng.random(), rng.random()];
            search_thm32(m, n, offsets, false, &ToleranceProfile::default())?
        }
    };
    Ok(BlockForge::new(recheck(inst, TheoremId::Thm32)?))
}

/// [`transpose_route`] of a base instance.
pub fn forge_thm35_instance(m: usize, n: usize, seed: u64, strategy: Strategy) -> Result<BlockForge> {
    let base = forge_thm32_instance(m, n, seed, strategy)?;
    Ok(BlockForge::new(recheck(transpose_route(&base.instance), TheoremId::Thm35)?))
}

/// [`swap_route`] of a base instance of size `(n, m)`.
pub fn forge_cor33_instance(m: usize, n: usize, seed: u64, strategy: Strategy) -> Result<BlockForge> {
    let base = forge_thm32_instance(n, m, seed, strategy)?;
    Ok(BlockForge::new(recheck(swap_route(&base.instance), TheoremId::Cor33)?))
}

/// [`swap_route`] of a transposed instance of size `(n, m)`.
pub fn forge_cor36_instance(m: usize, n: usize, seed: u64, strategy: Strategy) -> Result<BlockForge> {
    let base = forge_thm35_instance(n, m, seed, strategy)?;
    Ok(BlockForge::new(recheck(swap_route(&base.instance), TheoremId::Cor36)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ForgeKind {
    GroupInvertible,
    CommutingPair,
    LambdaPair,
    Lem31,
    Thm32,
    Thm35,
}

impl ForgeKind {
    pub const ALL: [ForgeKind; 6] = [
        Self::GroupInvertible,
        Self::CommutingPair,
        Self::LambdaPair,
        Self::Lem31,
        Self::Thm32,
        Self::Thm35,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::GroupInvertible => "GROUP_INVERTIBLE",
            Self::CommutingPair => "COMMUTING_PAIR",
            Self::LambdaPair => "LAMBDA_PAIR",
            Self::Lem31 => "LEM31",
            Self::Thm32 => "THM32",
            Self::Thm35 => "THM35",
        }
    }

    /// Meaning of `dims` for this kind.
    pub fn dims_help(self) -> &'static str {
        match self {
            Self::GroupInvertible => "n[,r]",
            Self::CommutingPair => "n",
            Self::LambdaPair => "k[,pad]",
            Self::Lem31 | Self::Thm32 | Self::Thm35 => "m,n",
        }
    }
}

impl fmt::Display for ForgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ForgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.label() == norm)
            .ok_or_else(|| Error::Unknown {
                what: "forge kind",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeSpec {
    pub kind: ForgeKind,
    pub dims: Vec<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
}

/// Output of [`forge`], serialized in the matching instance schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Forged {
    Matrix(ComplexMatrix),
    Pair(PairInstance),
    Block(BlockInstance),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgeOutcome {
    pub value: Forged,
    /// Set for block kinds.
    pub nontrivial: Option<bool>,
}

fn dims_error(spec: &ForgeSpec) -> Error {
    Error::InvalidArgument(format!(
        "{} expects dims {}, got {:?}",
        spec.kind,
        spec.kind.dims_help(),
        spec.dims
    ))
}

pub fn forge(spec: &ForgeSpec) -> Result<ForgeOutcome> {
    let d = spec.dims.as_slice();
    if spec.strategy.is_some() && !matches!(spec.kind, ForgeKind::Thm32 | ForgeKind::Thm35) {
        return Err(Error::InvalidArgument(format!("{} takes no strategy", spec.kind)));
    }
    let plain = |value| ForgeOutcome { value, nontrivial: None };
    let block = |f: BlockForge| ForgeOutcome {
        nontrivial: Some(f.nontrivial),
        value: Forged::Block(f.instance),
    };
    let strategy = spec.strategy.unwrap_or(Strategy::ScalarLift);
    let (m, n) = match d {
        [m, n] => (*m, *n),
        [n] => (*n, *n),
        _ => (0, 0),
    };
    match spec.kind {
        ForgeKind::GroupInvertible => match d {
            [n] => Ok(plain(Forged::Matrix(forge_group_invertible(*n, *n, spec.seed)?))),
            [n, r] => Ok(plain(Forged::Matrix(forge_group_invertible(*n, *r, spec.seed)?))),
            _ => Err(dims_error(spec)),
        },
        ForgeKind::CommutingPair => match d {
            [n] => Ok(plain(Forged::Pair(forge_commuting_pair(*n, spec.seed)?))),
            _ => Err(dims_error(spec)),
        },
        ForgeKind::LambdaPair => match d {
            [k] => Ok(plain(Forged::Pair(forge_lambda_pair(*k, 0, spec.seed)?))),
            [k, pad] => Ok(plain(Forged::Pair(forge_lambda_pair(*k, *pad, spec.seed)?))),
            _ => Err(dims_error(spec)),
        },
        _ if d.is_empty() || d.len() > 2 => Err(dims_error(spec)),
        ForgeKind::Lem31 => Ok(ForgeOutcome {
            value: Forged::Block(forge_lem31_instance(m, n, spec.seed)?),
            nontrivial: Some(false),
        }),
        ForgeKind::Thm32 => Ok(block(forge_thm32_instance(m, n, spec.seed, strategy)?)),
        ForgeKind::Thm35 => Ok(block(forge_thm35_instance(m, n, spec.seed, strategy)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sums::{detect_lambda, LambdaDetection};

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn similarity_is_well_conditioned() {
        let rng = &mut seeded_rng(3, 0);
        for n in 1..6 {
            let (s, s_inv) = random_similarity(n, rng);
            assert!(relative_residual(&(&s * &s_inv), &ComplexMatrix::identity(n)) < 1e-13);
            assert!(crate::linalg::condition_number(&s) <= 10.0 + 1e-9);
        }
    }

    #[test]
    fn group_invertible_extremes() {
        let full = forge_group_invertible(3, 3, 1).unwrap();
        assert!(crate::linalg::inverse(&full, &tol()).is_ok());
        assert!(is_zero(&forge_group_invertible(3, 0, 1).unwrap()));
        let (m, g) = forge_group_invertible_with_inverse(4, 2, 9).unwrap();
        let oracle = group_inverse(&m, &tol()).unwrap();
        assert_eq!(oracle.rank, 2);
        assert!(relative_residual(&oracle.inverse, &g) < 1e-10);
        assert!(forge_group_invertible(2, 3, 0).is_err());
    }

    #[test]
    fn nilpotent_part_blocks_group_inverse() {
        for seed in 0..20 {
            let m = forge_with_nilpotent_part(5, seed).unwrap();
            assert!(matches!(group_inverse(&m, &tol()), Err(Error::NotGroupInvertible { .. })));
        }
    }

    #[test]
    fn example_shift_pair() {
        let (a, b, lambda) = shift_pair(2, Complex64::new(-1.0, 0.0));
        assert_eq!(a, ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]));
        assert_eq!(b, ComplexMatrix::real_diagonal(&[-1.0, 1.0]));
        assert_eq!(lambda, Complex64::new(-1.0, 0.0));
        let (a, b, lambda) = shift_pair(1, Complex64::new(3.0, 0.0));
        assert_eq!(lambda, ONE);
        assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn lambda_pair_recovers_lambda() {
        let p = forge_lambda_pair(4, 2, 11).unwrap();
        let det = detect_lambda(&p.a, &p.b, &tol()).unwrap();
        let LambdaDetection::Certificate(cert) = det else {
            panic!("expected a certificate");
        };
        assert!((cert.lambda - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!(cert.residual <= 1e-12);
    }

    #[test]
    fn commuting_pair_commutes() {
        for seed in 0..10 {
            let p = forge_commuting_pair(5, seed).unwrap();
            assert!(relative_residual(&(&p.a * &p.b), &(&p.b * &p.a)) <= 1e-12);
            assert!(group_inverse(&p.a, &tol()).is_ok());
            assert!(group_inverse(&(&p.a + &p.b), &tol()).is_ok());
        }
    }

    #[test]
    fn lem31_forge_passes() {
        let inst = forge_lem31_instance(3, 2, 5).unwrap();
        assert!(block_hypotheses(&inst, TheoremId::Lem31, &tol()).unwrap().passes(&tol()));
    }

    #[test]
    fn scalar_lift_shapes() {
        let f = forge_thm32_instance(1, 1, 0, Strategy::ScalarLift).unwrap();
        assert!(f.nontrivial);
        assert!(is_zero(&f.instance.a) && is_zero(&f.instance.d));

        let inst = scalar_lift(2, 2, 0, &mut seeded_rng(1, 0)).unwrap();
        assert!(!inst.is_nontrivial());
        assert!(block_hypotheses(&inst, TheoremId::Thm32, &tol()).unwrap().passes(&tol()));
    }

    #[test]
    fn search_small_grid() {
        let f = forge_thm32_instance(1, 1, 4, Strategy::Search).unwrap();
        assert!(f.nontrivial);
        assert!(is_zero(&f.instance.a) && is_zero(&f.instance.d));
        let t = forge_thm35_instance(1, 1, 4, Strategy::Search).unwrap();
        assert!(t.nontrivial);
        assert!(search_thm32(3, 1, [0; 4], false, &tol()).is_err());
    }

    #[test]
    fn forge_spec_dispatch() {
        let spec = ForgeSpec {
            kind: ForgeKind::LambdaPair,
            dims: vec![2, 1],
            seed: 8,
            strategy: None,
        };
        let a = forge(&spec).unwrap();
        assert_eq!(a, forge(&spec).unwrap());
        assert!(matches!(a.value, Forged::Pair(_)));
        let bad = ForgeSpec { dims: vec![], ..spec.clone() };
        assert!(forge(&bad).is_err());
        assert_eq!("thm32".parse::<ForgeKind>().unwrap(), ForgeKind::Thm32);
        assert_eq!("scalar-lift".parse::<Strategy>().unwrap(), Strategy::ScalarLift);
    }
}
