//! Command-line front end: `verify`, `check` and `means`.
//!
//! Exit codes: 0 pass, 1 violation, 2 usage or configuration error,
//! 3 hypotheses not satisfied (`check` only).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{evaluate_bound, BoundParams, ExponentPair, TheoremId};
use crate::error::{Error, Result};
use crate::funcspec::{FunctionSpec, Interval};
use crate::harness::{
    self, evaluate_instance, parse_suites, Instance, PinnedInstance, SuiteId, TrialConfig,
    TrialRecord, TrialStatus, ASSERT_SLACK,
};
use crate::quad::SignConvention;
use crate::report::{self, ReportDocument};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HYPOTHESES: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hadamard",
    version,
    about = "Numerical checks of Hermite–Hadamard type bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded property suites.
    Verify(VerifyArgs),
    /// Evaluate one bound on one instance.
    Check(CheckArgs),
    /// Evaluate the special-means propositions.
    Means(MeansArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for SignConvention {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => SignConvention::PlusDerived,
            SignArg::Minus => SignConvention::MinusAsPrinted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite id (`thm2.4`, `prop3.1`, ...), a comma-separated list, or `all`.
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b_max: Option<f64>,
    /// `P_LIST:Q_LIST`, e.g. `1.5,2,3:1,1.5,2,3`; either side may be empty.
    #[arg(long)]
    pub pq_grid: Option<String>,
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include every trial record in the JSON report.
    #[arg(long)]
    pub per_trial: bool,
    /// JSON file with a `TrialConfig`; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra instance `FUNC@A,B` evaluated in every selected suite.
    #[arg(long = "pin")]
    pub pins: Vec<String>,
    #[arg(long)]
    pub allow_negative_a: bool,
    #[arg(long)]
    pub shrink_steps: Option<u32>,
    /// Add a timestamp and wall times to the JSON report.
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub theorem: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Bound on `|f'|` for Remark 2.1.
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MeansArgs {
    /// `3.1`, `3.2`, `3.3` or `3.4`.
    #[arg(long)]
    pub prop: String,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Sweep `n` over the proposition's range and the exponents over the
    /// default grids at the given `a`, `b`.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Output of a command: the text to emit and the exit code.
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad number {t:?} in grid")))
        })
        .collect()
}

/// Builds the effective config: defaults, then `--config`, then flags.
pub fn verify_config(args: &VerifyArgs) -> Result<TrialConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("{}: {e}", path.display())))?
        }
        None => TrialConfig::default(),
    };
    if let Some(t) = &args.theorem {
        config.suites = parse_suites(t)?;
    }
    if let Some(n) = args.trials {
        config.trials = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.a_min.is_some() {
        config.a_min = args.a_min;
    }
    if args.a_max.is_some() {
        config.a_max = args.a_max;
    }
    if args.b_max.is_some() {
        config.b_max = args.b_max;
    }
    if let Some(g) = &args.pq_grid {
        let (p, q) = g
            .split_once(':')
            .ok_or_else(|| Error::config("--pq-grid expects P_LIST:Q_LIST"))?;
        let (p, q) = (parse_list(p)?, parse_list(q)?);
        if !p.is_empty() {
            config.p_grid = p;
        }
        if !q.is_empty() {
            config.q_grid = q;
        }
    }
    if let Some(s) = args.sign {
        config.sign = s.into();
    }
    for pin in &args.pins {
        config.pins.push(pin.parse::<PinnedInstance>()?);
    }
    if args.allow_negative_a {
        config.allow_negative_a = true;
    }
    if let Some(s) = args.shrink_steps {
        config.shrink_steps = s;
    }
    config.validate()?;
    Ok(config)
}

fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    secs.to_string()
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let config = verify_config(args)?;
    let batches = harness::run_all(&config)?;
    let findings = harness::findings(&config, &batches);
    let output = match args.format {
        Format::Json => {
            let ts = args.timestamp.then(unix_timestamp);
            ReportDocument::new(&config, &batches, &findings, args.per_trial, ts).to_json()?
        }
        Format::Csv => report::batches_csv(&batches)?,
    };
    let violated = harness::any_asserted_failure(&batches);
    Ok(Outcome {
        output,
        code: if violated { EXIT_VIOLATION } else { EXIT_PASS },
    })
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome> {
    let spec: FunctionSpec = args.function.parse()?;
    let theorem: TheoremId = args.theorem.parse()?;
    let iv = Interval::new(args.a, args.b)?;
    let params = BoundParams::for_theorem(theorem, args.p, args.q, args.m)?;
    let report = evaluate_bound(theorem, &spec, &iv, &params, args.sign.into())?;
    let (code, status) = if !report.hypotheses.overall {
        (EXIT_HYPOTHESES, "hypotheses_failed")
    } else if report.holds(ASSERT_SLACK) {
        (EXIT_PASS, "pass")
    } else {
        (EXIT_VIOLATION, "fail")
    };
    let output = match args.format {
        Format::Json => report::to_json(&report)?,
        Format::Csv => report::write_csv(&[report::bound_row(&report, status)])?,
    };
    Ok(Outcome { output, code })
}

fn prop_suite(prop: &str) -> Result<SuiteId> {
    match prop.trim().trim_start_matches("prop") {
        "3.1" => Ok(SuiteId::Prop31),
        "3.2" => Ok(SuiteId::Prop32),
        "3.3" => Ok(SuiteId::Prop33),
        "3.4" => Ok(SuiteId::Prop34),
        other => Err(Error::config(format!("unknown proposition {other:?}"))),
    }
}

/// The `(p, q)` choices of a means evaluation.
fn means_exponents(suite: SuiteId, args: &MeansArgs) -> Result<Vec<(Option<f64>, Option<f64>)>> {
    let defaults = TrialConfig::default();
    let missing = |what: &str| Error::MissingExponents(format!("{suite} ({what})"));
    Ok(match suite {
        SuiteId::Prop31 => vec![(None, None)],
        SuiteId::Prop32 => {
            if args.sweep && args.p.is_none() && args.q.is_none() {
                defaults
                    .p_grid
                    .iter()
                    .flat_map(|&p| defaults.q_grid.iter().map(move |&q| (Some(p), Some(q))))
                    .collect()
            } else {
                let pq = ExponentPair::independent(
                    args.p.ok_or_else(|| missing("--p"))?,
                    args.q.ok_or_else(|| missing("--q"))?,
                )?;
                vec![(Some(pq.p()), Some(pq.q()))]
            }
        }
        SuiteId::Prop33 => {
            if args.p.is_some() {
                return Err(Error::ParameterMismatch("prop3.3 does not take --p".into()));
            }
            if args.sweep && args.q.is_none() {
                defaults.q_grid.iter().map(|&q| (None, Some(q))).collect()
            } else {
                let q = args.q.ok_or_else(|| missing("--q"))?;
                if !(q.is_finite() && q >= 1.0) {
                    return Err(Error::exponents(format!("need q >= 1, got {q}")));
                }
                vec![(None, Some(q))]
            }
        }
        SuiteId::Prop34 => {
            if args.sweep && args.p.is_none() && args.q.is_none() {
                defaults
                    .p_grid
                    .iter()
                    .map(|&p| (Some(p), Some(p / (p - 1.0))))
                    .collect()
            } else {
                let pq = match (args.p, args.q) {
                    (Some(p), Some(q)) => ExponentPair::conjugate(p, q)?,
                    (Some(p), None) => ExponentPair::conjugate_of(p)?,
                    (None, Some(q)) => ExponentPair::conjugate(q / (q - 1.0), q)?,
                    (None, None) => return Err(missing("--p/--q")),
                };
                vec![(Some(pq.p()), Some(pq.q()))]
            }
        }
        _ => unreachable!("not a proposition"),
    })
}

#[derive(Serialize)]
struct MeansDocument<'a> {
    version: &'static str,
    prop: String,
    asserted: bool,
    records: &'a [TrialRecord],
}

pub fn cmd_means(args: &MeansArgs) -> Result<Outcome> {
    let suite = prop_suite(&args.prop)?;
    Interval::new(args.a, args.b)?;
    let min_n = if suite == SuiteId::Prop31 { 1 } else { 3 };
    let orders: Vec<u32> = match (args.sweep, args.n) {
        (_, Some(n)) => vec![n],
        (true, None) => (min_n..=8).collect(),
        (false, None) => return Err(Error::config("--n is required without --sweep")),
    };
    for &n in &orders {
        if n < min_n {
            return Err(Error::InvalidOrder { n, min: min_n });
        }
    }
    let exponents = means_exponents(suite, args)?;
    let mut records = Vec::new();
    for &n in &orders {
        for &(p, q) in &exponents {
            let inst = Instance {
                function: FunctionSpec::power(n)?,
                phi: None,
                a: args.a,
                b: args.b,
                p,
                q,
            };
            let rec = evaluate_instance(
                suite,
                records.len() as u64,
                true,
                inst,
                SignConvention::PlusDerived,
                false,
            );
            if let Some(e) = &rec.error {
                return Err(Error::config(e.clone()));
            }
            records.push(rec);
        }
    }
    let violated = records.iter().any(|r| r.status == TrialStatus::Fail);
    let code = if suite.asserted() && violated {
        EXIT_VIOLATION
    } else {
        EXIT_PASS
    };
    let output = match args.format {
        Format::Json => report::to_json(&MeansDocument {
            version: report::VERSION,
            prop: suite.to_string(),
            asserted: suite.asserted(),
            records: &records,
        })?,
        Format::Csv => {
            let rows: Vec<_> = records.iter().map(report::record_row).collect();
            report::write_csv(&rows)?
        }
    };
    Ok(Outcome { output, code })
}

/// Runs the CLI on `argv` and returns the exit code. Reports go to stdout
/// (or `--out`), diagnostics to stderr as one line.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_PASS;
            }
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{}", line.trim());
            return EXIT_USAGE;
        }
    };
    let (result, out_path) = match &cli.command {
        Command::Verify(a) => (cmd_verify(a), a.out.clone()),
        Command::Check(a) => (cmd_check(a), None),
        Command::Means(a) => (cmd_means(a), None),
    };
    match result {
        Ok(outcome) => {
            let written = match out_path {
                Some(path) => fs::write(&path, outcome.output.as_bytes())
                    .map_err(|e| format!("{}: {e}", path.display())),
                None => stdout
                    .write_all(outcome.output.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => outcome.code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
