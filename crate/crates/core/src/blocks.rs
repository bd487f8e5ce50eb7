//! Group inverse of the block matrix `M = [[A, B], [C, D]]` with
//! `A: m×m`, `B: m×n`, `C: n×m`, `D: n×n`.
//!
//! Each result is available as printed (`Stated`), as it reads at the end of
//! its proof where that differs (`Proof`), and as a correction candidate
//! (`Corrected`). The candidate for the base theorem combines the additive
//! formula `P^# Q^π + P^π Q^# + …` (split `M = P + Q` into its diagonal and
//! off-diagonal parts) with the lower-triangular formula; the other
//! candidates are derived from it through the block swap `J·M·J` and the
//! plain transpose, exactly as the corollaries are derived.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{relative_residual, ComplexMatrix, ToleranceProfile};
use crate::spectral::{cline_transfer, drazin_inverse, group_inverse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockRepr", into = "BlockRepr")]
pub struct BlockInstance {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
    /// Intertwining constant of `DC = λCA` (or `AB = λBD`).
    pub lambda: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRepr {
    m: usize,
    n: usize,
    lambda: Complex64,
    #[serde(rename = "A")]
    a: ComplexMatrix,
    #[serde(rename = "B")]
    b: ComplexMatrix,
    #[serde(rename = "C")]
    c: ComplexMatrix,
    #[serde(rename = "D")]
    d: ComplexMatrix,
}

impl TryFrom<BlockRepr> for BlockInstance {
    type Error = String;

    fn try_from(r: BlockRepr) -> std::result::Result<Self, String> {
        let expect = [
            ("A", r.a.shape(), (r.m, r.m)),
            ("B", r.b.shape(), (r.m, r.n)),
            ("C", r.c.shape(), (r.n, r.m)),
            ("D", r.d.shape(), (r.n, r.n)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(format!("block {name} is {got:?}, expected {want:?} for m = {}, n = {}", r.m, r.n));
            }
        }
        if !(r.lambda.re.is_finite() && r.lambda.im.is_finite()) {
            return Err("lambda is not finite".into());
        }
        BlockInstance::new(r.a, r.b, r.c, r.d, r.lambda).map_err(|e| e.to_string())
    }
}

impl From<BlockInstance> for BlockRepr {
    fn from(inst: BlockInstance) -> Self {
        BlockRepr {
            m: inst.m(),
            n: inst.n(),
            lambda: inst.lambda,
            a: inst.a,
            b: inst.b,
            c: inst.c,
            d: inst.d,
        }
    }
}

impl BlockInstance {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        lambda: Complex64,
    ) -> Result<Self> {
        let m = a.require_square("block A")?;
        let n = d.require_square("block D")?;
        if b.shape() != (m, n) || c.shape() != (n, m) {
            return Err(Error::DimensionMismatch {
                op: "block instance",
                lhs: b.shape(),
                rhs: c.shape(),
            });
        }
        if lambda.norm() == 0.0 {
            return Err(Error::ZeroScalar { name: "lambda" });
        }
        Ok(Self { a, b, c, d, lambda })
    }

    /// Scalar instance `m = n = 1` from real entries.
    pub fn scalar(a: f64, b: f64, c: f64, d: f64, lambda: f64) -> Self {
        let s = |x: f64| ComplexMatrix::real_diagonal(&[x]);
        Self {
            a: s(a),
            b: s(b),
            c: s(c),
            d: s(d),
            lambda: Complex64::new(lambda, 0.0),
        }
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.d.rows()
    }

    pub fn assemble(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&self.a, &self.b, &self.c, &self.d)
            .expect("instance blocks conform by construction")
    }

    pub fn split(m_full: &ComplexMatrix, m: usize, n: usize, lambda: Complex64) -> Result<Self> {
        let [a, b, c, d] = m_full.split_blocks(m, n)?;
        Self::new(a, b, c, d, lambda)
    }

    /// `B ≠ 0` and `C ≠ 0`.
    pub fn is_nontrivial(&self) -> bool {
        self.b.max_abs() > 0.0 && self.c.max_abs() > 0.0
    }
}

/// `(Aᵀ, Cᵀ, Bᵀ, Dᵀ)`, whose assembled matrix is `Mᵀ`.
///
/// `AB = λ·BD` transposes to `DᵀBᵀ = λ⁻¹·BᵀAᵀ`, so the constant is inverted.
pub fn transpose_route(inst: &BlockInstance) -> BlockInstance {
    BlockInstance {
        a: inst.a.transpose(),
        b: inst.c.transpose(),
        c: inst.b.transpose(),
        d: inst.d.transpose(),
        lambda: inst.lambda.inv(),
    }
}

/// `(D, C, B, A)`, whose assembled matrix is `J·M·J`.
pub fn swap_route(inst: &BlockInstance) -> BlockInstance {
    BlockInstance {
        a: inst.d.clone(),
        b: inst.c.clone(),
        c: inst.b.clone(),
        d: inst.a.clone(),
        lambda: inst.lambda,
    }
}

/// `J·M·J` where `J` moves the last `n` coordinates in front of the first
/// `m`: `[[A, B], [C, D]] ↦ [[D, C], [B, A]]`. Undo with the sizes swapped.
pub fn permutation_conjugate(full: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    if full.shape() != (m + n, m + n) {
        return Err(Error::DimensionMismatch {
            op: "permutation conjugate",
            lhs: full.shape(),
            rhs: (m + n, m + n),
        });
    }
    let p = |i: usize| if i < n { m + i } else { i - n };
    Ok(ComplexMatrix::from_fn(m + n, m + n, |i, j| full[(p(i), p(j))]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "LEM31")]
    Lem31,
    #[serde(rename = "THM32")]
    Thm32,
    #[serde(rename = "COR33")]
    Cor33,
    #[serde(rename = "THM35")]
    Thm35,
    #[serde(rename = "COR36")]
    Cor36,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [Self::Lem31, Self::Thm32, Self::Cor33, Self::Thm35, Self::Cor36];

    pub fn label(self) -> &'static str {
        match self {
            Self::Lem31 => "LEM31",
            Self::Thm32 => "THM32",
            Self::Cor33 => "COR33",
            Self::Thm35 => "THM35",
            Self::Cor36 => "COR36",
        }
    }

    pub fn variants(self) -> &'static [Variant] {
        match self {
            Self::Lem31 => &[Variant::Stated],
            Self::Thm32 | Self::Cor33 => &[Variant::Stated, Variant::Proof, Variant::Corrected],
            Self::Thm35 | Self::Cor36 => &[Variant::Stated, Variant::Corrected],
        }
    }

    /// Hypothesis labels checked for this result.
    pub fn hypotheses(self) -> &'static [&'static str] {
        match self {
            Self::Lem31 => &["B", "D^πC"],
            Self::Thm32 => &["AB", "BD", "B(CB)^π", "C(BC)^π", "DC−λCA"],
            Self::Cor33 => &["CA", "DC", "B(CB)^π", "C(BC)^π", "AB−λBD"],
            Self::Thm35 => &["CA", "DC", "(CB)^πC", "(BC)^πB", "AB−λBD"],
            Self::Cor36 => &["AB", "BD", "(BC)^πB", "(CB)^πC", "DC−λCA"],
        }
    }

    fn needs_bc(self) -> bool {
        self != Self::Lem31
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                what: "theorem",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Stated,
    Proof,
    Corrected,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Self::Stated => "stated",
            Self::Proof => "proof",
            Self::Corrected => "corrected",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Stated, Self::Proof, Self::Corrected]
            .into_iter()
            .find(|v| v.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                what: "variant",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub theorem: TheoremId,
    pub residuals: BTreeMap<String, f64>,
    pub a_group: bool,
    pub d_group: bool,
    pub bc_group: bool,
    /// Derived from `(BC)^D` by Cline's formula plus an index-one test.
    pub cb_group: bool,
}

impl HypothesisReport {
    pub fn failing(&self, tol: &ToleranceProfile) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .residuals
            .iter()
            .filter(|(_, &r)| r.is_nan() || r > tol.residual_rtol)
            .map(|(k, &r)| (k.clone(), r))
            .collect();
        let mut flag = |ok: bool, name: &str| {
            if !ok {
                out.push((format!("{name} group invertible"), f64::INFINITY));
            }
        };
        flag(self.a_group, "A");
        flag(self.d_group, "D");
        if self.theorem.needs_bc() {
            flag(self.bc_group, "BC");
        }
        out
    }

    pub fn passes(&self, tol: &ToleranceProfile) -> bool {
        self.failing(tol).is_empty()
    }
}

/// Inverses and idempotents of an instance's blocks and products.
///
/// Spectral idempotents come from the Drazin inverse so they exist even
/// when the block has no group inverse.
#[derive(Debug, Clone)]
pub struct BlockContext {
    pub inst: BlockInstance,
    pub a_g: Option<ComplexMatrix>,
    pub d_g: Option<ComplexMatrix>,
    pub bc_g: Option<ComplexMatrix>,
    pub cb_g: Option<ComplexMatrix>,
    pub a_pi: ComplexMatrix,
    pub d_pi: ComplexMatrix,
    pub bc_pi: ComplexMatrix,
    pub cb_pi: ComplexMatrix,
    tol: ToleranceProfile,
}

fn optional_group_inverse(m: &ComplexMatrix, tol: &ToleranceProfile) -> Result<Option<ComplexMatrix>> {
    match group_inverse(m, tol) {
        Ok(r) => Ok(Some(r.inverse)),
        Err(Error::NotGroupInvertible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn need<'a>(x: &'a Option<ComplexMatrix>, m: &ComplexMatrix, tol: &ToleranceProfile) -> Result<&'a ComplexMatrix> {
    x.as_ref().ok_or_else(|| group_inverse(m, tol).err().unwrap_or(Error::ZeroMatrix))
}

impl BlockContext {
    pub fn new(inst: &BlockInstance, tol: &ToleranceProfile) -> Result<Self> {
        let (a, b, c, d) = (&inst.a, &inst.b, &inst.c, &inst.d);
        let bc = b * c;
        let cb = c * b;
        let a_dr = drazin_inverse(a, tol)?;
        let d_dr = drazin_inverse(d, tol)?;
        let bc_dr = drazin_inverse(&bc, tol)?;
        let cb_d = cline_transfer(b, c, &bc_dr)?;
        let cb_g = tol.approx_eq(&(&(&cb * &cb_d) * &cb), &cb).then(|| cb_d.clone());
        let n = inst.n();
        Ok(Self {
            a_g: optional_group_inverse(a, tol)?,
            d_g: optional_group_inverse(d, tol)?,
            bc_g: optional_group_inverse(&bc, tol)?,
            cb_g,
            a_pi: a_dr.idempotent(a),
            d_pi: d_dr.idempotent(d),
            bc_pi: bc_dr.idempotent(&bc),
            cb_pi: &ComplexMatrix::identity(n) - &(&cb * &cb_d),
            inst: inst.clone(),
            tol: *tol,
        })
    }

    pub fn hypotheses(&self, theorem: TheoremId) -> HypothesisReport {
        let BlockInstance { a, b, c, d, lambda } = &self.inst;
        let residuals = theorem
            .hypotheses()
            .iter()
            .map(|&label| {
                let r = match label {
                    "B" => b.frobenius_norm(),
                    "D^πC" => (&self.d_pi * c).frobenius_norm(),
                    "AB" => (a * b).frobenius_norm(),
                    "BD" => (b * d).frobenius_norm(),
                    "CA" => (c * a).frobenius_norm(),
                    "DC" => (d * c).frobenius_norm(),
                    "B(CB)^π" => (b * &self.cb_pi).frobenius_norm(),
                    "C(BC)^π" => (c * &self.bc_pi).frobenius_norm(),
                    "(CB)^πC" => (&self.cb_pi * c).frobenius_norm(),
                    "(BC)^πB" => (&self.bc_pi * b).frobenius_norm(),
                    "DC−λCA" => relative_residual(&(d * c), &(c * a).scale(*lambda)),
                    "AB−λBD" => relative_residual(&(a * b), &(b * d).scale(*lambda)),
                    other => unreachable!("unknown hypothesis label {other}"),
                };
                (label.to_string(), r)
            })
            .collect();
        HypothesisReport {
            theorem,
            residuals,
            a_group: self.a_g.is_some(),
            d_group: self.d_g.is_some(),
            bc_group: self.bc_g.is_some(),
            cb_group: self.cb_g.is_some(),
        }
    }

    fn a_g(&self) -> Result<&ComplexMatrix> {
        need(&self.a_g, &self.inst.a, &self.tol)
    }

    fn d_g(&self) -> Result<&ComplexMatrix> {
        need(&self.d_g, &self.inst.d, &self.tol)
    }

    fn bc_g(&self) -> Result<&ComplexMatrix> {
        need(&self.bc_g, &(&self.inst.b * &self.inst.c), &self.tol)
    }

    fn cb_g(&self) -> Result<&ComplexMatrix> {
        need(&self.cb_g, &(&self.inst.c * &self.inst.b), &self.tol)
    }

    fn assemble(&self, ul: ComplexMatrix, ur: ComplexMatrix, ll: ComplexMatrix, lr: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&ul, &ur, &ll, &lr).expect("formula blocks conform")
    }

    /// `−D^# C A^# + (D^#)² C A^π`
    fn triangular_corner(&self) -> Result<ComplexMatrix> {
        let (ag, dg) = (self.a_g()?, self.d_g()?);
        let c = &self.inst.c;
        let head = -&(&(dg * c) * ag);
        Ok(&head + &(&(&(dg * dg) * c) * &self.a_pi))
    }

    /// Evaluates a variant without re-checking hypotheses.
    pub fn evaluate(&self, theorem: TheoremId, variant: Variant) -> Result<ComplexMatrix> {
        if !theorem.variants().contains(&variant) {
            return Err(Error::UnsupportedVariant {
                theorem: theorem.label(),
                variant: variant.label(),
            });
        }
        let BlockInstance { a: _, b, c, .. } = &self.inst;
        let (m, n) = (self.inst.m(), self.inst.n());
        match (theorem, variant) {
            (TheoremId::Lem31, _) => Ok(self.assemble(
                self.a_g()?.clone(),
                ComplexMatrix::zeros(m, n),
                self.triangular_corner()?,
                self.d_g()?.clone(),
            )),
            (TheoremId::Thm32, Variant::Stated) => {
                let (ag, dg) = (self.a_g()?, self.d_g()?);
                Ok(self.assemble(
                    ag.scale_real(2.0),
                    ComplexMatrix::zeros(m, n),
                    -&(&(dg * c) * ag),
                    dg + &(dg * &self.cb_pi),
                ))
            }
            (TheoremId::Thm32, Variant::Proof) => {
                let (ag, dg) = (self.a_g()?, self.d_g()?);
                Ok(self.assemble(
                    ag + &(ag * &self.bc_pi),
                    ComplexMatrix::zeros(m, n),
                    self.triangular_corner()?,
                    dg + &(dg * &self.cb_pi),
                ))
            }
            (TheoremId::Thm32, Variant::Corrected) => {
                let (ag, dg) = (self.a_g()?, self.d_g()?);
                let (bcg, cbg) = (self.bc_g()?, self.cb_g()?);
                Ok(self.assemble(
                    ag.clone(),
                    &(b * cbg) * &self.d_pi,
                    &self.triangular_corner()? + &(&(c * bcg) * &self.a_pi),
                    dg.clone(),
                ))
            }
            (TheoremId::Cor33, Variant::Stated) => {
                let (ag, dg) = (self.a_g()?, self.d_g()?);
                Ok(self.assemble(
                    ag + &(ag * &self.bc_pi),
                    -&(&(ag * b) * dg),
                    ComplexMatrix::zeros(n, m),
                    dg.scale_real(2.0),
                ))
            }
            (TheoremId::Cor33, _) => {
                let swapped = BlockContext::new(&swap_route(&self.inst), &self.tol)?;
                permutation_conjugate(&swapped.evaluate(TheoremId::Thm32, variant)?, n, m)
            }
            (TheoremId::Thm35, Variant::Stated) => {
                let (ag, dg) = (self.a_g()?, self.d_g()?);
                Ok(self.assemble(
                    ag + &(&self.bc_pi * ag),
                    &(-&(&(ag * b) * dg)) + &(&(&self.a_pi * b) * &(dg * dg)),
                    ComplexMatrix::zeros(n, m),
                    dg + &(&self.cb_pi * dg),
                ))
            }
            (TheoremId::Thm35, _) => {
                let transposed = BlockContext::new(&transpose_route(&self.inst), &self.tol)?;
                Ok(transposed.evaluate(TheoremId::Thm32, variant)?.transpose())
            }
            (TheoremId::Cor36, Variant::Stated) => {
                let (ag, dg) = (self.a_g()?, self.d_g()?);
                Ok(self.assemble(
                    ag + &(&self.bc_pi * ag),
                    ComplexMatrix::zeros(m, n),
                    &(-&(&(dg * c) * ag)) + &(&(&self.d_pi * c) * &(ag * ag)),
                    dg + &(&self.cb_pi * dg),
                ))
            }
            (TheoremId::Cor36, _) => {
                let swapped = BlockContext::new(&swap_route(&self.inst), &self.tol)?;
                permutation_conjugate(&swapped.evaluate(TheoremId::Thm35, variant)?, n, m)
            }
        }
    }
}

pub fn block_hypotheses(
    inst: &BlockInstance,
    theorem: TheoremId,
    tol: &ToleranceProfile,
) -> Result<HypothesisReport> {
    Ok(BlockContext::new(inst, tol)?.hypotheses(theorem))
}

/// Evaluates `variant` of `theorem` after checking its hypotheses.
pub fn block_formula(
    inst: &BlockInstance,
    theorem: TheoremId,
    variant: Variant,
    tol: &ToleranceProfile,
) -> Result<ComplexMatrix> {
    let ctx = BlockContext::new(inst, tol)?;
    let report = ctx.hypotheses(theorem);
    let failing = report.failing(tol);
    if !failing.is_empty() {
        return Err(Error::HypothesisViolation {
            theorem: theorem.label(),
            failing,
        });
    }
    ctx.evaluate(theorem, variant)
}
