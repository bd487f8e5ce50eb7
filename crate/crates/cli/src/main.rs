//! `ginv`: group and Drazin inverses, instance forging and formula
//! verification from the command line.
//!
//! Exit codes: 0 success (or `--expect` met), 1 usage or I/O error,
//! 2 `--expect` contradicted, 3 internal contract violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ginv::error::Error;
use ginv::forge::{forge, ForgeKind, ForgeSpec, Forged, Strategy};
use ginv::harness::{run_verification, Report, RunConfig, Status, Target, DEFAULT_VERDICT_TOL};
use ginv::io::{read_json, to_json_string};
use ginv::matrix::{ComplexMatrix, ToleranceProfile};
use ginv::spectral::{drazin_inverse, group_inverse};

const TOL_ENV: &str = "GINV_TOL";

#[derive(Parser)]
#[command(name = "ginv", version, about = "Group and Drazin inverses and checks of closed-form formulas")]
struct Cli {
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProfileArgs {
    /// Relative cutoff on singular values for numerical rank.
    #[arg(long, global = true, default_value_t = ToleranceProfile::default().rank_rtol)]
    rank_rtol: f64,
    /// Relative residual accepted by identity checks.
    #[arg(long, global = true, default_value_t = ToleranceProfile::default().residual_rtol)]
    residual_rtol: f64,
    /// Largest condition number of an inverted core.
    #[arg(long, global = true, default_value_t = ToleranceProfile::default().cond_max)]
    cond_max: f64,
}

impl ProfileArgs {
    fn profile(&self) -> ginv::error::Result<ToleranceProfile> {
        ToleranceProfile::new(self.rank_rtol, self.residual_rtol, self.cond_max)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Group (or Drazin) inverse of one matrix.
    Compute {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        drazin: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every variant of a formula on forged instances.
    Verify(VerifyArgs),
    /// Forge one instance.
    Forge {
        /// One of GROUP_INVERTIBLE, COMMUTING_PAIR, LAMBDA_PAIR, LEM31, THM32, THM35.
        #[arg(long, required_unless_present = "spec")]
        kind: Option<ForgeKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated sizes; see `--help` of the kind.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long)]
        strategy: Option<Strategy>,
        /// ForgeSpec JSON document instead of the flags above.
        #[arg(long, conflicts_with_all = ["kind", "dims", "strategy"])]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a human-readable summary of a report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "replay")]
    target: Option<Target>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size bounds `d0,d1`; meaning depends on the target.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<[usize; 2]>,
    /// Verdict tolerance; falls back to $GINV_TOL, then 1e-8.
    #[arg(long)]
    tol: Option<f64>,
    /// Block-instance strategy.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Write the report here; counterexamples go next to it.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Rerun the configuration echoed in an earlier report.
    #[arg(long, conflicts_with_all = ["target", "dims", "tol", "strategy"])]
    replay: Option<PathBuf>,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    /// Variant the expectation refers to; all variants when omitted.
    #[arg(long, requires = "expect")]
    variant: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Verified,
    Refuted,
}

fn parse_dims(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<usize>().map_err(|e| format!("bad size `{p}`: {e}"));
    match parts.as_slice() {
        [a] => Ok([num(a)?, num(a)?]),
        [a, b] => Ok([num(a)?, num(b)?]),
        _ => Err(format!("expected `d0,d1`, got `{s}`")),
    }
}

/// Outcome classes mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Expectation(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let internal = e.chain().any(|c| {
            matches!(
                c.downcast_ref::<Error>(),
                Some(Error::ForgeContract(_) | Error::AxiomViolation { .. } | Error::Singular { .. })
            )
        });
        if internal {
            Failure::Internal(e)
        } else {
            Failure::Usage(e)
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Expectation(msg)) => {
            eprintln!("expectation failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let profile = cli.profile.profile()?;
    match cli.command {
        Command::Compute { input, drazin, out } => compute(&input, drazin, out.as_deref(), &profile),
        Command::Verify(args) => verify(args, profile),
        Command::Forge {
            kind,
            seed,
            dims,
            strategy,
            spec,
            out,
        } => {
            let spec = match spec {
                Some(path) => read_json::<ForgeSpec>(&path, "forge spec")?,
                None => ForgeSpec {
                    kind: kind.expect("clap enforces --kind"),
                    dims,
                    seed,
                    strategy,
                },
            };
            let outcome = forge(&spec)?;
            if let Some(nontrivial) = outcome.nontrivial {
                eprintln!("nontrivial: {nontrivial}");
            }
            let text = match &outcome.value {
                Forged::Matrix(m) => to_json_string(m),
                Forged::Pair(p) => to_json_string(p),
                Forged::Block(b) => to_json_string(b),
            };
            emit(out.as_deref(), &text)
        }
        Command::Report { input } => {
            let report: Report = read_json(&input, "report")?;
            print!("{}", report.summary());
            Ok(())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let text = format!("{}\n", text.trim_end());
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn compute(input: &Path, drazin: bool, out: Option<&Path>, profile: &ToleranceProfile) -> Result<(), Failure> {
    let m: ComplexMatrix = read_json(input, "matrix")?;
    let payload = if drazin {
        match drazin_inverse(&m, profile) {
            Ok(d) => json!({
                "kind": "drazin_inverse",
                "index": d.index,
                "idempotent": d.idempotent(&m),
                "inverse": d.inverse,
            }),
            Err(e @ Error::Singular { .. }) => error_payload(&e),
            Err(e) => return Err(e.into()),
        }
    } else {
        match group_inverse(&m, profile) {
            Ok(g) => json!({
                "kind": "group_inverse",
                "rank": g.rank,
                "core_condition": g.core_condition,
                "axiom_residuals": g.axiom_residuals,
                "idempotent": g.idempotent,
                "inverse": g.inverse,
            }),
            Err(e @ Error::NotGroupInvertible { .. }) => error_payload(&e),
            Err(e) => return Err(e.into()),
        }
    };
    emit(out, &serde_json::to_string_pretty(&payload).expect("payload serializes"))
}

fn error_payload(e: &Error) -> serde_json::Value {
    let mut body = json!({ "message": e.to_string() });
    match *e {
        Error::NotGroupInvertible { rank, rank_of_square } => {
            body["kind"] = json!("NotGroupInvertible");
            body["rank"] = json!(rank);
            body["rank_of_square"] = json!(rank_of_square);
        }
        Error::Singular { rank, size, condition } => {
            body["kind"] = json!("Singular");
            body["rank"] = json!(rank);
            body["size"] = json!(size);
            body["condition"] = json!(condition);
        }
        _ => body["kind"] = json!("Error"),
    }
    json!({ "error": body })
}

fn env_tol() -> anyhow::Result<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(s) => {
            let tol: f64 = s.trim().parse().with_context(|| format!("{TOL_ENV}=`{s}` is not a number"))?;
            Ok(Some(tol))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{TOL_ENV}: {e}"),
    }
}

fn verify(args: VerifyArgs, profile: ToleranceProfile) -> Result<(), Failure> {
    let config = match &args.replay {
        Some(path) => {
            let earlier: Report = read_json(path, "report")?;
            earlier.config
        }
        None => {
            let target = args.target.expect("clap enforces --target");
            let mut config = RunConfig::new(target, args.trials, args.seed);
            if let Some(dims) = args.dims {
                config.dims = dims;
            }
            config.tol = match args.tol {
                Some(t) => t,
                None => env_tol()?.unwrap_or(DEFAULT_VERDICT_TOL),
            };
            if let Some(s) = args.strategy {
                config.strategy = s;
            }
            config.profile = profile;
            config
        }
    };
    if let Some(v) = &args.variant {
        if !config.target.variants().contains(&v.as_str()) {
            return Err(Failure::Usage(anyhow::anyhow!(
                "target {} has no variant `{v}` (expected one of {})",
                config.target,
                config.target.variants().join(", ")
            )));
        }
    }

    let run = run_verification(&config)?;
    let dir = match &args.report {
        Some(path) => {
            let json = run.report.to_json();
            std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
            path.parent().map(Path::to_path_buf).unwrap_or_default()
        }
        None => PathBuf::new(),
    };
    run.persist_counterexamples(if dir.as_os_str().is_empty() { Path::new(".") } else { &dir })?;
    print!("{}", run.report.summary());

    if let Some(expect) = args.expect {
        check_expectation(&run.report, expect, args.variant.as_deref()).map_err(Failure::Expectation)?;
    }
    Ok(())
}

fn check_expectation(report: &Report, expect: Expect, variant: Option<&str>) -> Result<(), String> {
    let verdicts: Vec<_> = report
        .verdicts
        .iter()
        .filter(|v| variant.is_none_or(|name| v.variant == name))
        .collect();
    let describe = |v: &ginv::harness::Verdict| format!("{} {}", v.variant, v.status);
    match expect {
        Expect::Refuted => {
            if verdicts.iter().any(|v| v.status == Status::Refuted) {
                Ok(())
            } else {
                Err(format!(
                    "expected a REFUTED verdict, got {}",
                    verdicts.iter().map(|v| describe(v)).collect::<Vec<_>>().join(", ")
                ))
            }
        }
        Expect::Verified => {
            let applicable: Vec<_> = verdicts.iter().filter(|v| v.status != Status::Inapplicable).collect();
            if !applicable.is_empty() && applicable.iter().all(|v| v.status == Status::VerifiedOnSample) {
                Ok(())
            } else {
                Err(format!(
                    "expected VERIFIED_ON_SAMPLE, got {}",
                    verdicts.iter().map(|v| describe(v)).collect::<Vec<_>>().join(", ")
                ))
            }
        }
    }
}
