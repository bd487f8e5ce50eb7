//! Trial orchestration and per-variant verdicts.
//!
//! A run evaluates one target on a fixed list of diagnostic instances and
//! then on `trials` forged ones. Random trial `i` draws its parameters from
//! [`seeded_rng`]`(seed, i)`, so trials are independent of execution order
//! and a longer run extends a shorter one. Every variant's output is
//! compared with [`group_inverse`] of the relevant matrix; a variant is
//! refuted by its first trial whose residual exceeds the tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blocks::{swap_route, transpose_route, BlockContext, BlockInstance, TheoremId};
use crate::error::{Error, Result};
use crate::forge::{
    forge_commuting_pair, forge_cor33_instance, forge_cor36_instance, forge_lambda_pair,
    forge_lem31_instance, forge_rect_pair, forge_thm32_instance, forge_thm35_instance, seeded_rng,
    Strategy,
};
use crate::io::{from_json_str, PairInstance, RectPair};
use crate::matrix::{relative_residual, ComplexMatrix, ToleranceProfile, ONE};
use crate::spectral::{
    cline_transfer, drazin_inverse, group_inverse, group_inverse_at_scale, verify_drazin_axioms, verify_group_axioms,
};
use crate::sums::{pair_scale, SumContext};

pub const DEFAULT_VERDICT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "lemma2.1")]
    Lemma21,
    #[serde(rename = "thm2.2-equivalence")]
    Thm22Equivalence,
    #[serde(rename = "thm2.2-final")]
    Thm22Final,
    #[serde(rename = "thm2.2-intermediate")]
    Thm22Intermediate,
    #[serde(rename = "cor2.3")]
    Cor23,
    #[serde(rename = "cor2.4")]
    Cor24,
    #[serde(rename = "cor2.5")]
    Cor25,
    #[serde(rename = "lem3.1")]
    Lem31,
    #[serde(rename = "thm3.2")]
    Thm32,
    #[serde(rename = "cor3.3")]
    Cor33,
    #[serde(rename = "thm3.5")]
    Thm35,
    #[serde(rename = "cor3.6")]
    Cor36,
    #[serde(rename = "cline")]
    Cline,
}

impl Target {
    pub const ALL: [Target; 13] = [
        Self::Lemma21,
        Self::Thm22Equivalence,
        Self::Thm22Final,
        Self::Thm22Intermediate,
        Self::Cor23,
        Self::Cor24,
        Self::Cor25,
        Self::Lem31,
        Self::Thm32,
        Self::Cor33,
        Self::Thm35,
        Self::Cor36,
        Self::Cline,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Lemma21 => "lemma2.1",
            Self::Thm22Equivalence => "thm2.2-equivalence",
            Self::Thm22Final => "thm2.2-final",
            Self::Thm22Intermediate => "thm2.2-intermediate",
            Self::Cor23 => "cor2.3",
            Self::Cor24 => "cor2.4",
            Self::Cor25 => "cor2.5",
            Self::Lem31 => "lem3.1",
            Self::Thm32 => "thm3.2",
            Self::Cor33 => "cor3.3",
            Self::Thm35 => "thm3.5",
            Self::Cor36 => "cor3.6",
            Self::Cline => "cline",
        }
    }

    pub fn variants(self) -> &'static [&'static str] {
        match self {
            Self::Lemma21 => &["identities"],
            Self::Thm22Equivalence => &["equivalence"],
            Self::Thm22Final => &["final"],
            Self::Thm22Intermediate | Self::Cor23 => &["stated", "swapped"],
            Self::Cor24 => &["literal"],
            Self::Cor25 => &["literal", "variant"],
            Self::Lem31 => &["existence", "stated"],
            Self::Thm32 | Self::Cor33 => &["existence", "stated", "proof", "corrected"],
            Self::Thm35 | Self::Cor36 => &["existence", "stated", "corrected"],
            Self::Cline => &["transfer"],
        }
    }

    fn family(self) -> Family {
        match self {
            Self::Lemma21 | Self::Thm22Equivalence | Self::Thm22Final | Self::Thm22Intermediate | Self::Cor23 => {
                Family::LambdaPair
            }
            Self::Cor24 | Self::Cor25 => Family::Commuting,
            Self::Lem31 | Self::Thm32 | Self::Cor33 | Self::Thm35 | Self::Cor36 => Family::Block,
            Self::Cline => Family::Rect,
        }
    }

    /// Default for `--dims`; see [`RunConfig::dims`].
    pub fn default_dims(self) -> [usize; 2] {
        match self.family() {
            Family::LambdaPair => [6, 3],
            Family::Commuting => [6, 0],
            Family::Block => [4, 4],
            Family::Rect => [6, 6],
        }
    }

    fn theorem(self) -> Option<TheoremId> {
        match self {
            Self::Lem31 => Some(TheoremId::Lem31),
            Self::Thm32 => Some(TheoremId::Thm32),
            Self::Cor33 => Some(TheoremId::Cor33),
            Self::Thm35 => Some(TheoremId::Thm35),
            Self::Cor36 => Some(TheoremId::Cor36),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Family {
    LambdaPair,
    Commuting,
    Block,
    Rect,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                what: "target",
                value: s.to_string(),
            })
    }
}

/// Run parameters, echoed verbatim in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub target: Target,
    pub trials: usize,
    pub seed: u64,
    /// Upper size bounds. λ-pair targets: `[k_max, pad_max]` with the cycle
    /// length drawn from {1, 2, 3, 4, 6}. Commuting targets: `[n_max, _]`.
    /// Block and Cline targets: `[m_max, n_max]`.
    pub dims: [usize; 2],
    /// Verdict tolerance on residuals.
    pub tol: f64,
    pub profile: ToleranceProfile,
    pub strategy: Strategy,
}

impl RunConfig {
    pub fn new(target: Target, trials: usize, seed: u64) -> Self {
        Self {
            target,
            trials,
            seed,
            dims: target.default_dims(),
            tol: DEFAULT_VERDICT_TOL,
            profile: ToleranceProfile::default(),
            strategy: Strategy::ScalarLift,
        }
    }

    fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("verdict tolerance must be positive, got {}", self.tol)));
        }
        let [d0, d1] = self.dims;
        let ok = match self.target.family() {
            Family::LambdaPair | Family::Commuting => d0 >= 1,
            Family::Block | Family::Rect => d0 >= 1 && d1 >= 1,
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("dims {:?} too small for {}", self.dims, self.target)));
        }
        if self.target.family() == Family::Block && self.strategy == Strategy::Search && (d0 > 2 || d1 > 2) {
            return Err(Error::InvalidArgument("the search strategy needs dims of at most 2,2".into()));
        }
        Ok(())
    }
}

/// An instance fed to one trial, serialized in its own file schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TrialInstance {
    Pair(PairInstance),
    Block(BlockInstance),
    Rect(RectPair),
}

impl TrialInstance {
    fn parse(target: Target, value: serde_json::Value) -> Result<Self> {
        let text = value.to_string();
        Ok(match target.family() {
            Family::LambdaPair | Family::Commuting => Self::Pair(from_json_str(&text, "pair instance")?),
            Family::Block => Self::Block(from_json_str(&text, "block instance")?),
            Family::Rect => Self::Rect(from_json_str(&text, "rectangular pair")?),
        })
    }

    pub fn digest(&self) -> String {
        hex_sha256(serde_json::to_string(self).expect("instances serialize").as_bytes())
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes non-finite values as the strings `"inf"`, `"-inf"`, `"nan"`.
mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn to_repr(x: f64) -> impl Serialize {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Text("nan".into())
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("expected a number, got `{other}`"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod map {
        use std::collections::BTreeMap;

        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, Option<f64>>, s: S) -> Result<S::Ok, S::Error> {
            use serde::ser::SerializeMap;
            let mut out = s.serialize_map(Some(m.len()))?;
            for (k, v) in m {
                out.serialize_entry(k, &v.map(to_repr))?;
            }
            out.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Option<f64>>, D::Error> {
            let raw = BTreeMap::<String, Option<Repr>>::deserialize(d)?;
            raw.into_iter()
                .map(|(k, v)| Ok((k, v.map(from_repr).transpose()?)))
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    VerifiedOnSample,
    Refuted,
    Inapplicable,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Self::VerifiedOnSample => "VERIFIED_ON_SAMPLE",
            Self::Refuted => "REFUTED",
            Self::Inapplicable => "INAPPLICABLE",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub target: Target,
    pub variant: String,
    pub status: Status,
    /// Trials evaluated, diagnostic ones included.
    pub trials: usize,
    /// Trials on which the variant was defined.
    pub applicable: usize,
    #[serde(with = "float")]
    pub max_residual: f64,
    /// Path of the first refuting instance, relative to the report.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    /// Stream index of a random trial; absent for diagnostic instances.
    pub seed_offset: Option<u64>,
    pub diagnostic: bool,
    pub digest: String,
    /// Residual per variant; `null` where the variant does not apply.
    #[serde(with = "float::map")]
    pub residuals: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub verdicts: Vec<Verdict>,
    pub trials: Vec<TrialRecord>,
    pub version: String,
}

impl Report {
    pub fn verdict(&self, variant: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.variant == variant)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        from_json_str(text, "report")
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "target {} | seed {} | trials {} (+{} diagnostic) | dims {:?} | tol {:e} | {}\n",
            c.target,
            c.seed,
            c.trials,
            self.trials.iter().filter(|t| t.diagnostic).count(),
            c.dims,
            c.tol,
            self.version
        );
        for v in &self.verdicts {
            out.push_str(&format!(
                "  {:<12} {:<19} applicable {:>4}/{:<4} max residual {:.3e}",
                v.variant, v.status, v.applicable, v.trials, v.max_residual
            ));
            if let Some(path) = &v.counterexample {
                out.push_str(&format!("  counterexample {path}"));
            }
            out.push('\n');
        }
        out
    }
}

/// A persisted refutation: the instance plus what it refuted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub target: Target,
    pub variant: String,
    pub trial: usize,
    #[serde(with = "float")]
    pub residual: f64,
    pub instance: serde_json::Value,
}

impl Counterexample {
    fn file_bytes(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("counterexamples serialize");
        text.push('\n');
        text
    }

    pub fn relative_path(&self) -> String {
        format!("counterexamples/{}.json", hex_sha256(self.file_bytes().as_bytes()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path, "counterexample")
    }

    /// Re-evaluates the refuted variant on the stored instance.
    pub fn replay(&self, profile: &ToleranceProfile) -> Result<f64> {
        let inst = TrialInstance::parse(self.target, self.instance.clone())?;
        let residuals = evaluate(self.target, &inst, profile)?;
        residuals
            .get(self.variant.as_str())
            .copied()
            .flatten()
            .ok_or_else(|| Error::InvalidArgument(format!("variant {} does not apply on replay", self.variant)))
    }
}

/// A finished run: the report plus the instances behind each trial.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: Report,
    pub instances: Vec<TrialInstance>,
    pub counterexamples: Vec<Counterexample>,
}

impl Run {
    /// Writes each counterexample under `dir/counterexamples/`, named by
    /// the SHA-256 of its content. Existing files with the same name already
    /// hold identical bytes and are left alone.
    pub fn persist_counterexamples(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for cx in &self.counterexamples {
            let path = dir.join(cx.relative_path());
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", parent.display())))?;
            }
            if !path.exists() {
                let tmp = path.with_extension(format!("tmp{}", std::process::id()));
                std::fs::write(&tmp, cx.file_bytes())
                    .and_then(|_| std::fs::rename(&tmp, &path))
                    .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
            }
            written.push(path);
        }
        Ok(written)
    }
}

type Residuals = BTreeMap<&'static str, Option<f64>>;

fn pair(a: ComplexMatrix, b: ComplexMatrix, lambda: Option<Complex64>, mu: Option<Complex64>) -> TrialInstance {
    TrialInstance::Pair(PairInstance { a, b, lambda, mu })
}

fn real(rows: &[[f64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Instances evaluated ahead of the random trials.
pub fn diagnostic_instances(target: Target) -> Vec<TrialInstance> {
    let ex26 = || pair(real(&[[0.0, 1.0], [1.0, 0.0]]), real(&[[-1.0, 0.0], [0.0, 1.0]]), Some(c(-1.0)), None);
    let projections = |lambda: Option<Complex64>, mu: Option<Complex64>| {
        pair(
            ComplexMatrix::real_diagonal(&[1.0, 0.0]),
            ComplexMatrix::real_diagonal(&[0.0, 1.0]),
            lambda,
            mu,
        )
    };
    let scalars = |lambda, mu| pair(ComplexMatrix::scalar(ONE), ComplexMatrix::scalar(ONE), lambda, mu);
    let swap = BlockInstance::scalar(0.0, 1.0, 1.0, 0.0, 1.0);
    let diag = BlockInstance::scalar(1.0, 0.0, 0.0, 1.0, 1.0);
    let blocks = |f: &dyn Fn(&BlockInstance) -> BlockInstance| {
        vec![TrialInstance::Block(f(&swap)), TrialInstance::Block(f(&diag))]
    };
    match target {
        Target::Lemma21 => vec![ex26()],
        Target::Thm22Equivalence => vec![
            ex26(),
            projections(None, None),
            pair(real(&[[1.0, 1.0], [0.0, 1.0]]), real(&[[-1.0, 0.0], [0.0, -1.0]]), Some(ONE), None),
        ],
        Target::Thm22Final => vec![ex26(), projections(None, None)],
        Target::Thm22Intermediate | Target::Cor23 => vec![projections(None, None), ex26()],
        Target::Cor24 => vec![projections(None, None), scalars(None, None)],
        Target::Cor25 => vec![projections(Some(ONE), Some(ONE)), scalars(Some(c(2.0)), Some(c(3.0)))],
        Target::Lem31 => vec![TrialInstance::Block(BlockInstance::scalar(1.0, 0.0, 1.0, 1.0, 1.0))],
        Target::Thm32 => blocks(&|i| i.clone()),
        Target::Cor33 => blocks(&swap_route),
        Target::Thm35 => blocks(&transpose_route),
        Target::Cor36 => blocks(&|i| swap_route(&transpose_route(i))),
        Target::Cline => vec![TrialInstance::Rect(RectPair {
            b: real(&[[0.0, 1.0], [0.0, 0.0]]),
            c: ComplexMatrix::identity(2),
        })],
    }
}

/// Draws the instance of random trial `index`.
pub fn sample_instance(config: &RunConfig, index: u64) -> Result<TrialInstance> {
    let rng = &mut seeded_rng(config.seed, index);
    let [d0, d1] = config.dims;
    let seed: u64 = rng.random();
    match config.target.family() {
        Family::LambdaPair => {
            let ks: Vec<usize> = [1, 2, 3, 4, 6].into_iter().filter(|&k| k <= d0).collect();
            let k = ks[rng.random_range(0..ks.len())];
            let pad = rng.random_range(0..=d1);
            Ok(TrialInstance::Pair(forge_lambda_pair(k, pad, seed)?))
        }
        Family::Commuting => {
            let n = rng.random_range(1..=d0);
            let mut p = forge_commuting_pair(n, seed)?;
            if config.target == Target::Cor25 {
                let (lambda, mu) = scaled_pair_scalars(&p, rng, &config.profile);
                p.lambda = Some(lambda);
                p.mu = Some(mu);
            }
            Ok(TrialInstance::Pair(p))
        }
        Family::Block => {
            let m = rng.random_range(1..=d0);
            let n = rng.random_range(1..=d1);
            let s = config.strategy;
            let forged = match config.target {
                Target::Lem31 => return Ok(TrialInstance::Block(forge_lem31_instance(m, n, seed)?)),
                Target::Thm32 => forge_thm32_instance(m, n, seed, s)?,
                Target::Cor33 => forge_cor33_instance(m, n, seed, s)?,
                Target::Thm35 => forge_thm35_instance(m, n, seed, s)?,
                _ => forge_cor36_instance(m, n, seed, s)?,
            };
            Ok(TrialInstance::Block(forged.instance))
        }
        Family::Rect => {
            let m = rng.random_range(1..=d0);
            let n = rng.random_range(1..=d1);
            Ok(TrialInstance::Rect(forge_rect_pair(m, n, seed)?))
        }
    }
}

/// Draws `(λ, μ)` with modulus in `[0.5, 2]`, preferring draws for which
/// `λa + μb` has a well-conditioned group-inverse core.
fn scaled_pair_scalars(p: &PairInstance, rng: &mut impl Rng, tol: &ToleranceProfile) -> (Complex64, Complex64) {
    let mut draw = || {
        let r = |rng: &mut dyn rand::RngCore| {
            Complex64::from_polar(rng.random_range(0.5..=2.0), rng.random_range(0.0..std::f64::consts::TAU))
        };
        (r(rng), r(rng))
    };
    let mut last = draw();
    for _ in 0..16 {
        let (l, m) = last;
        let sum = &p.a.scale(l) + &p.b.scale(m);
        if group_inverse(&sum, tol).is_ok_and(|g| g.core_condition <= 1e4) {
            break;
        }
        last = draw();
    }
    last
}

fn contract(target: Target, e: Error) -> Error {
    match e {
        Error::ForgeContract(_) => e,
        other => Error::ForgeContract(format!("{target}: oracle or formula failed on a forged instance: {other}")),
    }
}

fn oracle(m: &ComplexMatrix, scale: f64, tol: &ToleranceProfile) -> Result<Option<ComplexMatrix>> {
    match group_inverse_at_scale(m, scale, tol) {
        Ok(r) => Ok(Some(r.inverse)),
        Err(Error::NotGroupInvertible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Residual of a formula value against the oracle. A formula that is
/// undefined where the oracle exists scores infinity.
fn score(value: Result<ComplexMatrix>, oracle: &ComplexMatrix) -> Result<f64> {
    match value {
        Ok(x) => Ok(relative_residual(&x, oracle)),
        Err(Error::NotGroupInvertible { .. } | Error::ZeroScalar { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn with_axioms(m: &ComplexMatrix, x: Result<ComplexMatrix>, oracle: &ComplexMatrix) -> Result<f64> {
    match x {
        Ok(x) => Ok(relative_residual(&x, oracle).max(verify_group_axioms(m, &x)?.max())),
        Err(e) => score(Err(e), oracle),
    }
}

/// Residual of every variant of `target` on one instance; `None` marks a
/// variant that does not apply.
pub fn evaluate(target: Target, inst: &TrialInstance, tol: &ToleranceProfile) -> Result<BTreeMap<&'static str, Option<f64>>> {
    let mut out = Residuals::new();
    match (target.family(), inst) {
        (Family::LambdaPair | Family::Commuting, TrialInstance::Pair(p)) => evaluate_pair(target, p, tol, &mut out)?,
        (Family::Block, TrialInstance::Block(b)) => evaluate_block(target, b, tol, &mut out)?,
        (Family::Rect, TrialInstance::Rect(r)) => {
            let bc = drazin_inverse(&(&r.b * &r.c), tol)?;
            let x = cline_transfer(&r.b, &r.c, &bc)?;
            let res = verify_drazin_axioms(&(&r.c * &r.b), &x, bc.index + 1)?;
            out.insert("transfer", Some(res.max()));
        }
        _ => return Err(Error::InvalidArgument(format!("instance kind does not fit target {target}"))),
    }
    Ok(out)
}

fn evaluate_pair(target: Target, p: &PairInstance, tol: &ToleranceProfile, out: &mut Residuals) -> Result<()> {
    let (a, b) = (&p.a, &p.b);
    let scale = pair_scale(a, b);
    let ctx = if target.family() == Family::Commuting {
        SumContext::commuting(a, b, tol)?
    } else {
        SumContext::new(a, b, tol)?
    };
    match target {
        Target::Lemma21 => {
            let lambda = p.lambda.unwrap_or_else(|| ctx.lambda.lambda());
            let r = ctx.lemma21_residuals(lambda)?;
            out.insert("identities", Some(r.into_iter().fold(0.0, f64::max)));
        }
        Target::Thm22Equivalence => {
            let eq = ctx.equivalence()?;
            out.insert("equivalence", Some(if eq.all_agree { 0.0 } else { 1.0 }));
        }
        Target::Thm22Final => {
            let sum = a + b;
            let r = match oracle(&sum, scale, tol)? {
                Some(g) => Some(with_axioms(&sum, ctx.sum_formula(), &g)?),
                None => None,
            };
            out.insert("final", r);
        }
        Target::Thm22Intermediate | Target::Cor23 => {
            let m = if target == Target::Cor23 { a - b } else { a + b };
            let g = oracle(&m, scale, tol)?;
            let v = if target == Target::Cor23 {
                ctx.difference_variants()
            } else {
                ctx.intermediate_variants()
            };
            let (stated, swapped) = match (&g, v) {
                (None, _) => (None, None),
                (Some(g), Ok(v)) => (Some(relative_residual(&v.stated, g)), Some(relative_residual(&v.candidate, g))),
                (Some(g), Err(e)) => {
                    let s = score(Err(e), g)?;
                    (Some(s), Some(s))
                }
            };
            out.insert("stated", stated);
            out.insert("swapped", swapped);
        }
        Target::Cor24 => {
            let sum = a + b;
            let r = match oracle(&sum, scale, tol)? {
                Some(g) => Some(score(ctx.commuting_formula(), &g)?),
                None => None,
            };
            out.insert("literal", r);
        }
        Target::Cor25 => {
            let (lambda, mu) = (p.lambda.unwrap_or(ONE), p.mu.unwrap_or(ONE));
            let m = &a.scale(lambda) + &b.scale(mu);
            let scale = lambda.norm() * a.frobenius_norm() + mu.norm() * b.frobenius_norm();
            let (lit, var) = match (oracle(&m, scale, tol)?, ctx.scaled_variants(lambda, mu)) {
                (None, _) => (None, None),
                (Some(g), Ok(v)) => (Some(relative_residual(&v.stated, &g)), Some(relative_residual(&v.candidate, &g))),
                (Some(g), Err(e)) => {
                    let s = score(Err(e), &g)?;
                    (Some(s), Some(s))
                }
            };
            out.insert("literal", lit);
            out.insert("variant", var);
        }
        _ => unreachable!("pair targets only"),
    }
    Ok(())
}

fn evaluate_block(target: Target, inst: &BlockInstance, tol: &ToleranceProfile, out: &mut Residuals) -> Result<()> {
    let theorem = target.theorem().expect("block target");
    let ctx = BlockContext::new(inst, tol)?;
    let report = ctx.hypotheses(theorem);
    let failing = report.failing(tol);
    if !failing.is_empty() {
        return Err(Error::HypothesisViolation {
            theorem: theorem.label(),
            failing,
        });
    }
    let m = inst.assemble();
    let g = oracle(&m, 0.0, tol)?;
    out.insert("existence", Some(if g.is_some() { 0.0 } else { 1.0 }));
    for &variant in theorem.variants() {
        let r = match &g {
            Some(g) => Some(with_axioms(&m, ctx.evaluate(theorem, variant), g)?),
            None => None,
        };
        out.insert(variant.label(), r);
    }
    Ok(())
}

fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Runs the diagnostic instances and `config.trials` random trials of
/// `config.target` and aggregates per-variant verdicts.
///
/// Hypothesis or oracle failures on a forged instance abort the run with
/// [`Error::ForgeContract`]; a diagnostic instance that violates its
/// hypotheses is reported the same way.
pub fn run_verification(config: &RunConfig) -> Result<Run> {
    config.validate()?;
    let target = config.target;
    let diagnostics = diagnostic_instances(target);
    let n_diag = diagnostics.len();

    let mut jobs: Vec<(usize, Option<u64>)> = (0..n_diag).map(|i| (i, None)).collect();
    jobs.extend((0..config.trials).map(|i| (n_diag + i, Some(i as u64))));
    let results = par_map(jobs, |(index, offset)| -> Result<(TrialInstance, Residuals)> {
        let inst = match offset {
            None => diagnostics[index].clone(),
            Some(off) => sample_instance(config, off)?,
        };
        let res = evaluate(target, &inst, &config.profile).map_err(|e| contract(target, e))?;
        Ok((inst, res))
    });

    let mut instances = Vec::with_capacity(results.len());
    let mut trials = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        let (inst, res) = r?;
        trials.push(TrialRecord {
            index,
            seed_offset: (index >= n_diag).then(|| (index - n_diag) as u64),
            diagnostic: index < n_diag,
            digest: inst.digest(),
            residuals: res.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        });
        instances.push(inst);
    }

    let mut verdicts = Vec::new();
    let mut counterexamples = Vec::new();
    for &variant in target.variants() {
        let values: Vec<(usize, f64)> = trials
            .iter()
            .filter_map(|t| t.residuals.get(variant).copied().flatten().map(|r| (t.index, r)))
            .collect();
        let max_residual = values
            .iter()
            .map(|&(_, r)| if r.is_nan() { f64::INFINITY } else { r })
            .fold(0.0, f64::max);
        let first_fail = values.iter().find(|&&(_, r)| r.is_nan() || r > config.tol);
        let status = if values.is_empty() {
            Status::Inapplicable
        } else if first_fail.is_some() {
            Status::Refuted
        } else {
            Status::VerifiedOnSample
        };
        let counterexample = first_fail.map(|&(index, residual)| {
            let cx = Counterexample {
                target,
                variant: variant.to_string(),
                trial: index,
                residual,
                instance: serde_json::to_value(&instances[index]).expect("instances serialize"),
            };
            let path = cx.relative_path();
            counterexamples.push(cx);
            path
        });
        verdicts.push(Verdict {
            target,
            variant: variant.to_string(),
            status,
            trials: trials.len(),
            applicable: values.len(),
            max_residual,
            counterexample,
        });
    }

    Ok(Run {
        report: Report {
            config: config.clone(),
            verdicts,
            trials,
            version: format!("ginv {}", env!("CARGO_PKG_VERSION")),
        },
        instances,
        counterexamples,
    })
}
