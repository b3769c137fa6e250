//! `qobs` command-line front end.
//!
//! Every subcommand reads operators as JSON files (or builtin preset names),
//! computes the complete report in memory, and only then writes it. Failures
//! print a one-line JSON diagnostic on stderr with a stable code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qobs::adversary::{run_trials, AdversaryConfig, TrialRecord, DEFAULT_CONVERGENCE_TOL};
use qobs::estimators::{canonical_error, canonical_report, simulate_repeated};
use qobs::io::{operator_to_json, parse_operator, parse_povm, povm_to_json, resolve_space};
use qobs::lemma::lemma_demo;
use qobs::linops::{expect, DEFAULT_DIM_CAP};
use qobs::presets::{builtin_operator, builtin_state};
use qobs::report::{
    counts_csv, distribution_csv, fmt_sig17, sig_vec, to_json, trials_csv, ComparisonJson, CountsJson,
    EstimationReportJson, LemmaDemoJson, Sig17, ValidationReportJson,
};
use qobs::symspace::{theta, twirl};
use qobs::{CopySpace, DensityMatrix, Error, HermitianOperator, Povm};

pub const DIM_CAP_ENV: &str = "QOBS_DIM_CAP";

#[derive(Parser, Debug)]
#[command(name = "qobs", version, about = "Optimal estimation of observables on identical copies")]
pub struct Cli {
    /// Largest joint Hilbert-space dimension any command may build.
    #[arg(long, global = true, env = DIM_CAP_ENV, default_value_t = DEFAULT_DIM_CAP)]
    pub dim_cap: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the optimal joint POVM and report its error and outcome distribution.
    Canonical(CanonicalArgs),
    /// Monte Carlo of measuring each copy and averaging.
    Simulate(SimulateArgs),
    /// Check positivity and completeness of a POVM file.
    VerifyPovm(VerifyArgs),
    /// Error of a POVM file against the canonical strategy.
    Error(ErrorArgs),
    /// Seeded multinomial sample of a POVM's outcomes.
    Sample(SampleArgs),
    /// Numerical check of the operator reconstruction identities.
    LemmaDemo(LemmaArgs),
    /// Search for unbiased POVMs that beat the canonical error.
    Adversary(AdversaryArgs),
    /// Write the averaged observable on N copies as operator JSON.
    Theta(ThetaArgs),
    /// Write the permutation average of an operator as operator JSON.
    Twirl(TwirlArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CanonicalArgs {
    /// Observable: operator JSON file or preset (pauli-x, pauli-y, pauli-z, spin1-z, identity-<d>).
    #[arg(long)]
    pub observable: String,
    /// Single-copy state: operator JSON file or preset (zero, one, plus, minus, plus-i, minus-i, mixed-<d>).
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub copies: u64,
    /// Number of simulated shots from the exact distribution (0 disables sampling).
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Eigenvalues closer than this are merged into one outcome.
    #[arg(long)]
    pub merge_tol: Option<f64>,
    /// Also write the joint POVM as POVM JSON.
    #[arg(long)]
    pub povm_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub observable: String,
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub copies: u64,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// POVM JSON file.
    #[arg(long)]
    pub povm: PathBuf,
    /// Number of copies the joint space is made of.
    #[arg(long)]
    pub copies: Option<usize>,
    /// Tolerance for both positivity and completeness.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Warn about outcome values outside this observable's spectrum.
    #[arg(long)]
    pub observable: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ErrorArgs {
    #[arg(long)]
    pub povm: PathBuf,
    #[arg(long)]
    pub observable: String,
    /// Single-copy state.
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub copies: Option<usize>,
    /// Unbiasedness tolerance.
    #[arg(long, default_value_t = qobs::adversary::DEFAULT_UNBIASED_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub povm: PathBuf,
    /// Single-copy or joint state.
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub copies: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of probe states; defaults to twice the invariant dimension.
    #[arg(long)]
    pub probes: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AdversaryArgs {
    #[arg(long, default_value = "pauli-z")]
    pub observable: String,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub copies: u64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Outcome values: a count spread over the spectrum, or a comma list.
    #[arg(long, default_value = "5", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Convergence tolerance of the alternating projection.
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Fixed single-copy state; each trial draws its own when absent.
    #[arg(long)]
    pub state: Option<String>,
    /// Write the JSON summary here (with csv format; stderr otherwise).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ThetaArgs {
    #[arg(long)]
    pub observable: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub copies: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TwirlArgs {
    /// Operator JSON file on the joint space.
    #[arg(long)]
    pub operator: PathBuf,
    #[arg(long)]
    pub copies: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Failure of a run: a library error, or a completed check that failed.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Check { code: &'static str, message: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    pub fn code(&self) -> &'static str {
        match self {
            Failure::Core(e) => e.code(),
            Failure::Check { code, .. } => code,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Check { message, .. } => message.clone(),
        }
    }

    /// One-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Inner<'a> {
            code: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Diag<'a> {
            error: Inner<'a>,
        }
        serde_json::to_string(&Diag { error: Inner { code: self.code(), message: self.message() } })
            .expect("diagnostic serialises")
    }
}

/// Artifacts a run produces; nothing is written until the run succeeded
/// or reached a complete report.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Main report, for `--output` or stdout.
    pub report: String,
    pub report_path: Option<PathBuf>,
    /// Additional files.
    pub files: Vec<(PathBuf, String)>,
    /// Lines for stderr.
    pub notes: Vec<String>,
    /// A check that failed after a complete report was produced.
    pub failure: Option<Failure>,
}

impl Outcome {
    fn report(report: String, path: Option<PathBuf>) -> Self {
        Outcome { report, report_path: path, ..Default::default() }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn load_operator(source: &str) -> Run<HermitianOperator<f64>> {
    let path = Path::new(source);
    if path.is_file() {
        Ok(HermitianOperator::new(parse_operator(&read_text(path)?)?)?)
    } else {
        Ok(builtin_operator(source)?)
    }
}

fn load_state(source: &str) -> Run<DensityMatrix<f64>> {
    let path = Path::new(source);
    if path.is_file() {
        Ok(DensityMatrix::new(parse_operator(&read_text(path)?)?)?)
    } else {
        Ok(builtin_state(source)?)
    }
}

fn load_povm(path: &Path, copies: Option<usize>, cap: usize) -> Run<Povm<f64>> {
    Ok(parse_povm(&read_text(path)?, copies, cap)?)
}

fn single_copy(rho: &DensityMatrix<f64>, a: &HermitianOperator<f64>) -> Run<()> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for an observable of dimension {}",
            rho.dim(),
            a.dim()
        ))
        .into());
    }
    Ok(())
}

fn copies(n: u64) -> usize {
    usize::try_from(n).unwrap_or(usize::MAX)
}

fn parse_grid(source: &str, a: &HermitianOperator<f64>, seed: u64) -> Run<AdversaryConfig<f64>> {
    let bad = || Error::InvalidArgument(format!("--grid expects a count or a comma-separated list, got '{source}'"));
    if source.contains(',') {
        let values = source.split(',').map(|s| s.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
        let values = values.map_err(|_| bad())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad().into());
        }
        Ok(AdversaryConfig::new(values, seed))
    } else {
        let size: usize = source.trim().parse().map_err(|_| bad())?;
        let (lo, hi) = a.eigen_range()?;
        Ok(AdversaryConfig::uniform(lo, hi, size, seed)?)
    }
}

#[derive(Serialize)]
struct ErrorReportJson {
    n_copies: usize,
    outcomes: usize,
    ensemble_average: Sig17,
    estimation_error: Sig17,
    canonical_error: Sig17,
    gap: Sig17,
    unbiasedness_residual: Sig17,
    unbiased: bool,
}

#[derive(Serialize)]
struct TrialJson {
    seed: u64,
    #[serde(flatten)]
    report: ComparisonJson,
}

#[derive(Serialize)]
struct AdversarySummaryJson {
    copies: usize,
    local_dim: usize,
    trials: usize,
    base_seed: u64,
    grid: Vec<Sig17>,
    min_gap: Option<Sig17>,
    max_unbiasedness_residual: Option<Sig17>,
    max_feasibility_residual: Option<Sig17>,
    min_moment_inequality_eig: Option<Sig17>,
    all_gaps_ok: bool,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<TrialJson>>,
}

fn extreme(records: &[TrialRecord<f64>], f: impl Fn(&TrialRecord<f64>) -> f64, max: bool) -> Option<Sig17> {
    let it = records.iter().map(f);
    let v = if max { it.reduce(f64::max) } else { it.reduce(f64::min) };
    v.map(Sig17)
}

fn adversary_summary(
    records: &[TrialRecord<f64>],
    space: &CopySpace,
    cfg: &AdversaryConfig<f64>,
    base_seed: u64,
    with_rows: bool,
) -> AdversarySummaryJson {
    let all_gaps_ok = records.iter().all(|r| r.report.gap_ok());
    let verdict = records
        .iter()
        .find(|r| !r.report.gap_ok())
        .or(records.first())
        .map(|r| r.report.verdict())
        .unwrap_or("no trials run");
    AdversarySummaryJson {
        copies: space.n_copies(),
        local_dim: space.local_dim(),
        trials: records.len(),
        base_seed,
        grid: sig_vec(&cfg.value_grid),
        min_gap: extreme(records, |r| r.report.gap, false),
        max_unbiasedness_residual: extreme(records, |r| r.report.unbiasedness_residual, true),
        max_feasibility_residual: extreme(records, |r| r.report.feasibility_residual, true),
        min_moment_inequality_eig: extreme(records, |r| r.report.moment_inequality_min_eig, false),
        all_gaps_ok,
        verdict,
        rows: with_rows.then(|| {
            records.iter().map(|r| TrialJson { seed: r.seed, report: ComparisonJson::from(&r.report) }).collect()
        }),
    }
}

/// Executes one parsed command line.
pub fn execute(cli: Cli) -> Run<Outcome> {
    let cap = cli.dim_cap;
    match cli.command {
        Command::Canonical(args) => {
            let a = load_operator(&args.observable)?;
            let rho = load_state(&args.state)?;
            single_copy(&rho, &a)?;
            let space = CopySpace::with_cap(a.dim(), copies(args.copies), cap)?;
            if let Some(t) = args.merge_tol {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::InvalidArgument("--merge-tol must be finite and non-negative".into()).into());
                }
            }
            let sampling = (args.shots > 0).then_some((args.shots, args.seed));
            let (povm, report) = canonical_report(&a, &rho, &space, args.merge_tol, sampling)?;
            let text = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&EstimationReportJson::from(&report)),
                Format::Csv => distribution_csv(&report.distribution),
            };
            let mut out = Outcome::report(text, args.out.output);
            if let Some(p) = args.povm_out {
                out.files.push((p, povm_to_json(&povm)));
            }
            Ok(out)
        }
        Command::Simulate(args) => {
            let a = load_operator(&args.observable)?;
            let rho = load_state(&args.state)?;
            single_copy(&rho, &a)?;
            CopySpace::with_cap(a.dim(), copies(args.copies), cap)?;
            let report = simulate_repeated(&a, &rho, copies(args.copies), args.shots, args.seed)?;
            let text = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&EstimationReportJson::from(&report)),
                Format::Csv => distribution_csv(&report.distribution),
            };
            Ok(Outcome::report(text, args.out.output))
        }
        Command::VerifyPovm(args) => {
            let mut povm = load_povm(&args.povm, args.copies, cap)?;
            if let Some(t) = args.tol {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::InvalidArgument("--tol must be finite and non-negative".into()).into());
                }
                povm = povm.with_tolerances(t, t);
            }
            let mut warnings = Vec::new();
            if let Some(source) = &args.observable {
                let a = load_operator(source)?;
                let (lo, hi) = a.eigen_range()?;
                let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
                for i in povm.values_outside(lo - slack, hi + slack) {
                    warnings.push(format!(
                        "outcome {i} has value {} outside the spectrum [{}, {}]",
                        fmt_sig17(povm.outcomes()[i].value),
                        fmt_sig17(lo),
                        fmt_sig17(hi)
                    ));
                }
            }
            let report = povm.validate()?;
            let mut out = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => Outcome::report(to_json(&ValidationReportJson::new(&report, warnings.clone())), args.out.output),
                Format::Csv => {
                    let mut s = String::from("outcome,value,min_eigenvalue\n");
                    for (i, (o, m)) in povm.outcomes().iter().zip(&report.min_eigenvalues).enumerate() {
                        s.push_str(&format!("{i},{},{}\n", fmt_sig17(o.value), fmt_sig17(*m)));
                    }
                    Outcome::report(s, args.out.output)
                }
            };
            out.notes = warnings.into_iter().map(|w| format!("warning: {w}")).collect();
            if let Err(e) = report.check() {
                out.failure = Some(e.into());
            }
            Ok(out)
        }
        Command::Error(args) => {
            let povm = load_povm(&args.povm, args.copies, cap)?;
            povm.ensure_valid()?;
            let a = load_operator(&args.observable)?;
            let rho = load_state(&args.state)?;
            single_copy(&rho, &a)?;
            if a.dim() != povm.space().local_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "observable of dimension {} for copies of dimension {}",
                    a.dim(),
                    povm.space().local_dim()
                ))
                .into());
            }
            let n = povm.space().n_copies();
            let estimation_error = povm.estimation_error(&a, &rho)?;
            let canonical = canonical_error(&a, &rho, n)?;
            let residual = povm.unbiasedness_residual(&a)?;
            let report = ErrorReportJson {
                n_copies: n,
                outcomes: povm.len(),
                ensemble_average: Sig17(expect(&a, &rho)?),
                estimation_error: Sig17(estimation_error),
                canonical_error: Sig17(canonical),
                gap: Sig17(estimation_error - canonical),
                unbiasedness_residual: Sig17(residual),
                unbiased: residual <= args.tol,
            };
            let text = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report),
                Format::Csv => distribution_csv(&povm.probabilities(&rho)?),
            };
            Ok(Outcome::report(text, args.out.output))
        }
        Command::Sample(args) => {
            let povm = load_povm(&args.povm, args.copies, cap)?;
            let rho = load_state(&args.state)?;
            let counts = povm.sample(&rho, args.shots, args.seed)?;
            let text = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&CountsJson::new(&counts, args.seed)),
                Format::Csv => counts_csv(&counts),
            };
            Ok(Outcome::report(text, args.out.output))
        }
        Command::LemmaDemo(args) => {
            let space = CopySpace::with_cap(args.dim, args.copies, cap)?;
            let probes = match args.probes {
                Some(p) => p,
                None => 2 * qobs::lemma::invariant_dimension(&space)?,
            };
            let demo = lemma_demo::<f64>(args.dim, args.copies, args.seed, probes)?;
            let json = LemmaDemoJson::from(&demo);
            let text = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&json),
                Format::Csv => format!(
                    "dim,copies,seed,probes,invariant_dimension,diagonal_reconstruction_error,moment_reconstruction_error,condition_number,coefficient_identity_residual,zero_moment_reconstruction_norm\n{},{},{},{},{},{},{},{},{},{}\n",
                    demo.dim,
                    demo.copies,
                    demo.seed,
                    demo.probes,
                    demo.invariant_dimension,
                    fmt_sig17(demo.diagonal_reconstruction_error),
                    fmt_sig17(demo.moment_reconstruction_error),
                    fmt_sig17(demo.condition_number),
                    fmt_sig17(demo.coefficient_identity_residual),
                    fmt_sig17(demo.zero_moment_reconstruction_norm),
                ),
            };
            Ok(Outcome::report(text, args.out.output))
        }
        Command::Adversary(args) => {
            let a = load_operator(&args.observable)?;
            let space = CopySpace::with_cap(a.dim(), copies(args.copies), cap)?;
            let rho = args.state.as_deref().map(load_state).transpose()?;
            if let Some(r) = &rho {
                single_copy(r, &a)?;
            }
            if !(args.tol.is_finite() && args.tol > 0.0) {
                return Err(Error::InvalidArgument("--tol must be finite and positive".into()).into());
            }
            let mut cfg = parse_grid(&args.grid, &a, args.seed)?;
            cfg.convergence_tol = args.tol;
            if let Some(m) = args.max_iterations {
                cfg.max_iterations = m;
            }
            let records = run_trials(&a, &space, &cfg, args.trials, args.seed, rho.as_ref())?;
            let format = args.out.format.unwrap_or(Format::Csv);
            let summary = adversary_summary(&records, &space, &cfg, args.seed, format == Format::Json);
            let all_ok = summary.all_gaps_ok;
            let mut out = match format {
                Format::Json => Outcome::report(to_json(&summary), args.out.output),
                Format::Csv => {
                    let mut out = Outcome::report(trials_csv(&records), args.out.output);
                    match args.summary {
                        Some(p) => out.files.push((p, to_json(&summary))),
                        None => out.notes.push(to_json(&summary).trim_end().to_string()),
                    }
                    out
                }
            };
            if !all_ok {
                out.failure = Some(Failure::Check {
                    code: "NEGATIVE_GAP",
                    message: summary.verdict.to_string(),
                });
            }
            Ok(out)
        }
        Command::Theta(args) => {
            let a = load_operator(&args.observable)?;
            let space = CopySpace::with_cap(a.dim(), copies(args.copies), cap)?;
            let t = theta(&a, &space)?;
            Ok(Outcome::report(operator_to_json(t.matrix()), args.output))
        }
        Command::Twirl(args) => {
            let m = parse_operator::<f64>(&read_text(&args.operator)?)?;
            let space = resolve_space(m.rows(), Some(args.copies), cap)?;
            let t = twirl(&m, &space)?;
            Ok(Outcome::report(operator_to_json(&t), args.output))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Run<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

/// Runs a parsed command line, writing artifacts, and returns the exit status.
pub fn run(cli: Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    let outcome = execute(cli).and_then(|out| {
        for (path, text) in &out.files {
            write_file(path, text)?;
        }
        match &out.report_path {
            Some(p) => write_file(p, &out.report)?,
            None => stdout
                .write_all(out.report.as_bytes())
                .map_err(|e| Failure::from(Error::Io(format!("stdout: {e}"))))?,
        }
        Ok(out)
    });
    match outcome {
        Ok(out) => {
            for note in &out.notes {
                let _ = writeln!(stderr, "{note}");
            }
            match out.failure {
                Some(f) => {
                    let _ = writeln!(stderr, "{}", f.diagnostic());
                    1
                }
                None => 0,
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.diagnostic());
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("qobs").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(cli, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_counts_span_the_spectrum() {
        let z = builtin_operator::<f64>("pauli-z").unwrap();
        let cfg = parse_grid("3", &z, 0).unwrap();
        assert_eq!(cfg.value_grid, vec![-1.0, 0.0, 1.0]);
        let cfg = parse_grid("0.5, -0.5", &z, 0).unwrap();
        assert_eq!(cfg.value_grid, vec![0.5, -0.5]);
        assert!(parse_grid("1,x", &z, 0).is_err());
        assert!(parse_grid("1,inf", &z, 0).is_err());
    }

    #[test]
    fn diagnostics_are_single_line_json() {
        let f = Failure::from(Error::PovmCompleteness { residual: 0.1, tol: 1e-9 });
        let d = f.diagnostic();
        assert!(!d.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&d).unwrap();
        assert_eq!(v["error"]["code"], "POVM_COMPLETENESS");
    }

    #[test]
    fn run_writes_report_or_diagnostic() {
        let (code, out, err) = run_args(&["theta", "--observable", "pauli-z", "--copies", "1"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"dim\": 2") && err.is_empty());
        let (code, out, err) = run_args(&["--dim-cap", "2", "theta", "--observable", "pauli-z", "--copies", "2"]);
        assert_eq!(code, 1);
        assert!(out.is_empty() && err.contains("DIM_CAP"));
    }

    #[test]
    fn state_dimension_must_match_observable() {
        let (code, _, err) = run_args(&["simulate", "--observable", "spin1-z", "--state", "plus"]);
        assert_eq!(code, 1);
        assert!(err.contains("DIM_MISMATCH"));
    }
}
