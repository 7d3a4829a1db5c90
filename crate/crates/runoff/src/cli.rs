//! The `runoff` command line.
//!
//! Exit statuses: 0 success, 1 output could not be written, 2 usage error,
//! 3 input data rejected, 4 numerical failure (including a failed oracle).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use runoff_core::oracle::{self, posterior_mean_sqrt_by_quadrature, VerifyGrid};
use runoff_core::reserving::default_alpha;
use runoff_core::simulator::{RecoveryPlan, MAX_SIZE};
use runoff_core::{
    bayes_factors, bayes_posteriors, compare, elicit_prior, mack_reserve, project, AlphaChoice,
    FirstColumnLaw, GenerativeSpec, HalfNormal, PriorSpec, ReserveReport, ThetaLaw, Triangle,
    TriangleKind, ValidationOptions,
};

use crate::csv_format::{emit_csv, read_triangle, write_emitted, EmitOptions, FormatError};
use crate::document::{
    to_json, ComparisonDocument, FactorCheck, RecoveryDocument, ReportDocument, VerifyDocument,
};
use crate::parallel::{run_recovery, simulate_batch};
use crate::table::{self, TableStyle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Relative tolerance of the `--oracle` factor cross-check.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "runoff",
    version,
    about = "Chain ladder and half-normal Bayesian reserving for run-off triangles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reserve a triangle with one method.
    Reserve(ReserveArgs),
    /// Reserve a triangle with both methods and report the differences.
    Compare(CompareArgs),
    /// Generate triangles from the half-normal model.
    Simulate(SimulateArgs),
    /// Check the closed forms against numerical quadrature.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Cumulative,
    Incremental,
}

impl From<KindArg> for TriangleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Cumulative => TriangleKind::Cumulative,
            KindArg::Incremental => TriangleKind::Incremental,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mack,
    BayesHn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FormatArg {
    #[default]
    Table,
    Json,
}

/// A comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberList(pub Vec<f64>);

/// `--beta`: `auto` or explicit values.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaArg {
    Auto,
    Values(Vec<f64>),
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{s:?} is not a finite number"))
        })
        .collect()
}

fn parse_alpha(text: &str) -> Result<NumberList, String> {
    let values = parse_list(text)?;
    if let Some(a) = values.iter().find(|a| !(**a > 0.5)) {
        return Err(format!(
            "every alpha must exceed 1/2 for the posterior mean of the square root to exist, got {a}"
        ));
    }
    Ok(NumberList(values))
}

fn parse_positive_list(text: &str) -> Result<NumberList, String> {
    let values = parse_list(text)?;
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(format!("values must be positive, got {v}"));
    }
    Ok(NumberList(values))
}

fn parse_beta(text: &str) -> Result<BetaArg, String> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return Ok(BetaArg::Auto);
    }
    parse_positive_list(text).map(|l| BetaArg::Values(l.0))
}

fn parse_first_column(text: &str) -> Result<FirstColumnLaw, String> {
    let (name, params) = text.split_once(':').unwrap_or(("constant", text));
    let values = parse_list(params)?;
    let expect = |count: usize| {
        if values.len() == count {
            Ok(())
        } else {
            Err(format!(
                "{name} takes {count} parameter(s), got {}",
                values.len()
            ))
        }
    };
    match name {
        "constant" => {
            expect(1)?;
            Ok(FirstColumnLaw::Constant(values[0]))
        }
        "values" => Ok(FirstColumnLaw::Values(values)),
        "lognormal" => {
            expect(2)?;
            Ok(FirstColumnLaw::LogNormal {
                mu: values[0],
                sigma: values[1],
            })
        }
        "halfnormal" => {
            expect(1)?;
            HalfNormal::new(values[0])
                .map(FirstColumnLaw::HalfNormal)
                .map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown law {other:?}; use constant:V, values:V1,V2,..., lognormal:MU,SIGMA or halfnormal:OMEGA"
        )),
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Triangle CSV file.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Whether the file holds cumulative or incremental claims.
    #[arg(long, value_enum, default_value_t = KindArg::Cumulative)]
    pub kind: KindArg,

    /// Accept negative incremental cells (recoveries) as long as every
    /// cumulative value stays positive.
    #[arg(long)]
    pub allow_negative_increments: bool,

    /// Unit label shown in reports, e.g. "AUD thousands".
    #[arg(long)]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    /// Prior shape: one value for every development year or a comma-separated
    /// list with one per year. Each must exceed 1/2. Default n(n-1)/2.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<NumberList>,

    /// Prior scale: `auto` (match the root squared-column-sum ratio), one
    /// positive value, or a comma-separated list.
    #[arg(long, value_parser = parse_beta)]
    pub beta: Option<BetaArg>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,

    /// Decimal places in table output.
    #[arg(long, default_value_t = 4)]
    pub precision: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReserveArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum)]
    pub method: MethodArg,

    #[command(flatten)]
    pub prior: PriorArgs,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Cross-check each Bayesian factor against quadrature of the posterior.
    #[arg(long)]
    pub oracle: bool,

    /// Write the cumulative triangle here and the completed square next to it
    /// as `<name>_predicted.csv`.
    #[arg(long)]
    pub emit_projection: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub prior: PriorArgs,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Cross-check each Bayesian factor against quadrature of the posterior.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Triangle size n.
    #[arg(long)]
    pub size: usize,

    /// True θ_j for j = 1..n-1, comma separated.
    #[arg(long, value_parser = parse_positive_list, conflicts_with = "theta_prior", required_unless_present = "theta_prior")]
    pub theta: Option<NumberList>,

    /// Draw θ_j afresh per replicate from inverse-gamma(ALPHA, BETA).
    #[arg(long, value_name = "ALPHA,BETA", value_parser = parse_positive_list)]
    pub theta_prior: Option<NumberList>,

    /// First-column law: constant:V, values:V1,...,Vn, lognormal:MU,SIGMA or
    /// halfnormal:OMEGA.
    #[arg(long, value_parser = parse_first_column, default_value = "constant:100")]
    pub first_column: FirstColumnLaw,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 1)]
    pub replicates: usize,

    /// Directory for `replicate_NNNNN.csv` files; without it and without
    /// `--recovery` the triangles go to standard output.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// Fit every replicate and summarise how well the posterior recovers θ.
    #[arg(long)]
    pub recovery: bool,

    /// Prior shape used by `--recovery`.
    #[arg(long, value_parser = parse_alpha, default_value = "1")]
    pub alpha: NumberList,

    /// Prior scale used by `--recovery`.
    #[arg(long, value_parser = parse_positive_list, default_value = "0.01")]
    pub beta: NumberList,

    /// Posterior interval level used by `--recovery`.
    #[arg(long, default_value_t = 0.9)]
    pub level: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub status: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Failure {
            status: EXIT_NUMERICAL,
            message: message.into(),
        }
    }

    fn output(path: &Path, e: impl fmt::Display) -> Self {
        Failure {
            status: EXIT_OUTPUT,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<runoff_core::Error> for Failure {
    fn from(e: runoff_core::Error) -> Self {
        use runoff_core::Error;
        let status = if e.is_numerical() || matches!(e, Error::Domain { .. }) {
            EXIT_NUMERICAL
        } else if matches!(e, Error::Contract(_)) {
            EXIT_USAGE
        } else {
            EXIT_DATA
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Validation(inner) => {
                let mut f = Failure::from(inner);
                if f.status != EXIT_NUMERICAL {
                    f.status = EXIT_DATA;
                }
                f
            }
            other => Failure {
                status: EXIT_DATA,
                message: other.to_string(),
            },
        }
    }
}

type Outcome = Result<(String, i32), Failure>;

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    match out.write_all(text.as_bytes()) {
                        Ok(()) => EXIT_OK,
                        Err(_) => EXIT_OUTPUT,
                    }
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Reserve(a) => reserve(a, color, err),
        Command::Compare(a) => compare_cmd(a, color),
        Command::Simulate(a) => simulate(a, color, err),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok((text, status)) => match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => status,
            Err(e) => {
                let _ = writeln!(err, "runoff: cannot write output: {e}");
                EXIT_OUTPUT
            }
        },
        Err(f) => {
            let _ = writeln!(err, "runoff: {}", f.message);
            f.status
        }
    }
}

/// The parsed input and its cumulative form.
struct Input {
    cumulative: Triangle,
    fingerprint: String,
}

fn load(args: &InputArgs) -> Result<Input, Failure> {
    let options = ValidationOptions {
        allow_negative_increments: args.allow_negative_increments,
    };
    let parsed = read_triangle(&args.input, args.kind.into(), options).map_err(|e| match e {
        FormatError::Io { .. } => Failure {
            status: EXIT_DATA,
            message: e.to_string(),
        },
        other => Failure {
            status: EXIT_DATA,
            message: format!("{}: {}", args.input.display(), Failure::from(other).message),
        },
    })?;
    let fingerprint = parsed.fingerprint();
    let cumulative = match parsed.kind() {
        TriangleKind::Cumulative => parsed,
        TriangleKind::Incremental => parsed.cumulate(),
    };
    let cumulative = match &args.unit {
        Some(u) => cumulative.with_unit(u.clone()),
        None => cumulative,
    };
    Ok(Input {
        cumulative,
        fingerprint,
    })
}

fn resolve_prior(t: &Triangle, args: &PriorArgs) -> Result<PriorSpec, Failure> {
    let n = t.n();
    let cols = n.saturating_sub(1);
    let broadcast = |flag: &str, values: &[f64]| -> Result<Vec<f64>, Failure> {
        match values.len() {
            1 => Ok(vec![values[0]; cols]),
            len if len == cols => Ok(values.to_vec()),
            len => Err(Failure::usage(format!(
                "--{flag}: {len} values supplied but the {n}-year triangle has {cols} development years"
            ))),
        }
    };
    let alpha = match &args.alpha {
        None => AlphaChoice::Default,
        Some(v) => AlphaChoice::PerColumn(broadcast("alpha", &v.0)?),
    };
    match args.beta.as_ref().unwrap_or(&BetaArg::Auto) {
        BetaArg::Auto => Ok(elicit_prior(t, &alpha)?),
        BetaArg::Values(betas) => {
            let betas = broadcast("beta", betas)?;
            let alphas = match alpha {
                AlphaChoice::PerColumn(v) => v,
                _ => vec![default_alpha(n); cols],
            };
            let pairs: Vec<(f64, f64)> = alphas.into_iter().zip(betas).collect();
            Ok(PriorSpec::explicit(&pairs)?)
        }
    }
}

fn factor_checks(
    t: &Triangle,
    prior: &PriorSpec,
    report: &ReserveReport,
) -> Result<Vec<FactorCheck>, Failure> {
    prior
        .columns()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let j = k + 1;
            let closed_form = report.factors.as_slice()[k];
            let quadrature = posterior_mean_sqrt_by_quadrature(t, j, p)?;
            let relative_error = ((closed_form - quadrature) / quadrature).abs();
            Ok(FactorCheck {
                dev_year: j,
                closed_form,
                quadrature,
                relative_error,
                passed: relative_error <= ORACLE_TOLERANCE,
            })
        })
        .collect()
}

fn oracle_status(checks: &[FactorCheck]) -> i32 {
    if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}

fn bayes_report(t: &Triangle, prior: &PriorSpec) -> Result<ReserveReport, Failure> {
    let posteriors = bayes_posteriors(t, prior)?;
    Ok(project(t, &bayes_factors(&posteriors)?)?)
}

fn reserve(args: &ReserveArgs, color: bool, err: &mut dyn Write) -> Outcome {
    if args.method == MethodArg::Mack {
        for (given, flag) in [
            (args.prior.alpha.is_some(), "--alpha"),
            (args.prior.beta.is_some(), "--beta"),
            (args.oracle, "--oracle"),
        ] {
            if given {
                return Err(Failure::usage(format!(
                    "{flag} applies only to --method bayes-hn"
                )));
            }
        }
    }
    let input = load(&args.input)?;
    let t = &input.cumulative;
    let (report, prior) = match args.method {
        MethodArg::Mack => (mack_reserve(t)?, None),
        MethodArg::BayesHn => {
            let prior = resolve_prior(t, &args.prior)?;
            (bayes_report(t, &prior)?, Some(prior))
        }
    };
    let report = report.with_fingerprint(input.fingerprint.clone());
    let mut doc = ReportDocument::new(&report, t, args.input.unit.as_deref());
    let mut status = EXIT_OK;
    if let Some(prior) = &prior {
        doc = doc.with_prior(prior);
        if args.oracle {
            let checks = factor_checks(t, prior, &report)?;
            status = oracle_status(&checks);
            doc = doc.with_oracle(checks);
        }
    }

    if let Some(path) = &args.emit_projection {
        let emitted = emit_csv(t, Some(&report.projection), &EmitOptions::default())
            .map_err(|e| Failure::numerical(e.to_string()))?;
        let written = write_emitted(path, &emitted).map_err(|e| Failure {
            status: EXIT_OUTPUT,
            message: e.to_string(),
        })?;
        for p in written {
            let _ = writeln!(err, "wrote {}", p.display());
        }
    }

    let text = match args.output.format {
        FormatArg::Json => to_json(&doc),
        FormatArg::Table => {
            let style = TableStyle {
                precision: args.output.precision,
                color,
            };
            let mut text = table::render_report(&doc, &style);
            if let Some(checks) = &doc.oracle {
                text.push('\n');
                text.push_str(&table::render_factor_checks(checks));
            }
            text
        }
    };
    if status != EXIT_OK {
        let _ = writeln!(
            err,
            "runoff: quadrature cross-check failed for at least one development year"
        );
    }
    Ok((text, status))
}

fn compare_cmd(args: &CompareArgs, color: bool) -> Outcome {
    let input = load(&args.input)?;
    let t = &input.cumulative;
    let prior = resolve_prior(t, &args.prior)?;
    let mut comparison = compare(t, &prior)?;
    comparison.mack = comparison.mack.with_fingerprint(input.fingerprint.clone());
    comparison.bayes = comparison.bayes.with_fingerprint(input.fingerprint.clone());
    let unit = args.input.unit.as_deref();
    let mack = ReportDocument::new(&comparison.mack, t, unit);
    let mut bayes = ReportDocument::new(&comparison.bayes, t, unit).with_prior(&prior);
    let mut status = EXIT_OK;
    if args.oracle {
        let checks = factor_checks(t, &prior, &comparison.bayes)?;
        status = oracle_status(&checks);
        bayes = bayes.with_oracle(checks);
    }
    let doc = ComparisonDocument::new(mack, bayes, &comparison);
    let text = match args.output.format {
        FormatArg::Json => to_json(&doc),
        FormatArg::Table => {
            let style = TableStyle {
                precision: args.output.precision,
                color,
            };
            let mut text = table::render_comparison(&doc, &style);
            if let Some(checks) = &doc.bayes.oracle {
                text.push('\n');
                text.push_str(&table::render_factor_checks(checks));
            }
            text
        }
    };
    Ok((text, status))
}

fn simulate(args: &SimulateArgs, color: bool, err: &mut dyn Write) -> Outcome {
    let n = args.size;
    if n == 0 || n > MAX_SIZE {
        return Err(Failure::usage(format!(
            "--size must be between 1 and {MAX_SIZE}, got {n}"
        )));
    }
    let cols = n - 1;
    let theta = match (&args.theta, &args.theta_prior) {
        (Some(NumberList(theta)), _) => {
            if theta.len() != cols {
                return Err(Failure::usage(format!(
                    "--theta: {} values supplied for {cols} development years",
                    theta.len()
                )));
            }
            ThetaLaw::Fixed(theta.clone())
        }
        (None, Some(NumberList(params))) => {
            if params.len() != 2 {
                return Err(Failure::usage(format!(
                    "--theta-prior takes ALPHA,BETA, got {} values",
                    params.len()
                )));
            }
            ThetaLaw::Prior(PriorSpec::uniform(n, params[0], params[1])?)
        }
        (None, None) => {
            return Err(Failure::usage(
                "one of --theta or --theta-prior is required",
            ))
        }
    };
    let spec = GenerativeSpec::new(n, theta)?
        .with_first_column(args.first_column.clone())
        .map_err(|e| Failure::usage(format!("--first-column: {e}")))?
        .with_seed(args.seed)
        .with_replications(args.replicates)
        .map_err(|e| Failure::usage(format!("--replicates: {e}")))?;

    let writes_triangles = args.out_dir.is_some() || !args.recovery;
    let mut text = String::new();
    if writes_triangles {
        let batch = simulate_batch(&spec);
        if let Some(dir) = &args.out_dir {
            fs::create_dir_all(dir).map_err(|e| Failure::output(dir, e))?;
        }
        for (r, sim) in batch.into_iter().enumerate() {
            let sim = sim.map_err(|e| Failure::numerical(format!("replicate {r}: {e}")))?;
            let csv = emit_csv(&sim.triangle, None, &EmitOptions::default())
                .map_err(|e| Failure::numerical(e.to_string()))?
                .observed;
            match &args.out_dir {
                Some(dir) => {
                    let path = dir.join(format!("replicate_{r:05}.csv"));
                    fs::write(&path, csv).map_err(|e| Failure::output(&path, e))?;
                }
                None => text.push_str(&csv),
            }
        }
        if let Some(dir) = &args.out_dir {
            let _ = writeln!(
                err,
                "wrote {} triangle(s) to {}",
                spec.replications(),
                dir.display()
            );
        }
    }

    if args.recovery {
        let broadcast = |flag: &str, values: &[f64]| -> Result<Vec<f64>, Failure> {
            match values.len() {
                1 => Ok(vec![values[0]; cols]),
                len if len == cols => Ok(values.to_vec()),
                len => Err(Failure::usage(format!(
                    "--{flag}: {len} values supplied for {cols} development years"
                ))),
            }
        };
        let pairs: Vec<(f64, f64)> = broadcast("alpha", &args.alpha.0)?
            .into_iter()
            .zip(broadcast("beta", &args.beta.0)?)
            .collect();
        let prior = PriorSpec::explicit(&pairs)?;
        let plan = RecoveryPlan::new(&spec, &prior, args.level)
            .map_err(|e| Failure::usage(format!("--level: {e}")))?;
        let summary = run_recovery(&plan);
        for f in &summary.failures {
            let _ = writeln!(err, "runoff: replicate {} failed: {}", f.replicate, f.error);
        }
        let doc = RecoveryDocument::new(&summary, args.seed);
        text.push_str(&match args.output.format {
            FormatArg::Json => to_json(&doc),
            FormatArg::Table => table::render_recovery(
                &doc,
                &TableStyle {
                    precision: args.output.precision,
                    color,
                },
            ),
        });
    }
    Ok((text, EXIT_OK))
}

fn verify(args: &VerifyArgs) -> Outcome {
    let checks = oracle::verify(&VerifyGrid::default())
        .map_err(|e| Failure::numerical(format!("oracle evaluation failed: {e}")))?;
    let doc = VerifyDocument::new(&checks);
    let status = if doc.passed { EXIT_OK } else { EXIT_NUMERICAL };
    let text = match args.format {
        FormatArg::Json => to_json(&doc),
        FormatArg::Table => table::render_verify(&doc),
    };
    Ok((text, status))
}
