//! Command-line front end: runs one experiment and writes `<out>/<experiment>.csv` and `.json`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rtf_core::harness::experiments::{default_config, run_with_jobs};
use rtf_core::harness::report::{
    csv_string, write_file, JsonReport, JsonRow, Summary, CONVENTIONS,
};
use rtf_core::harness::{ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Parser)]
#[command(
    name = "rtf",
    version,
    about = "Toric period averages: spectral, geometric and L-function checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for the CSV and JSON reports.
    #[arg(long, global = true, default_value = "rtf-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Override the main tolerance of the experiment.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the degree or coefficient bound of the experiment.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Recorded in the JSON report; every experiment is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Class groups of imaginary quadratic fields against the analytic class number formula.
    Classgroup,
    /// Ideal classes of maximal quaternion orders: mass formula and Brandt matrices.
    Classset,
    /// Spectral side against the geometric side, the closed form, and optionally the L-function route.
    VerifyAverage,
    /// Irregular and regular orbital contributions.
    Geometric,
    /// Plancherel, Sato–Tate and twisted-measure identities for local Hecke algebras.
    MeasureCheck,
    /// Weighted equidistribution of Hecke eigenvalues at a fixed prime.
    Equidist,
    /// Upper bounds for central values from the average, fitted against the expected shape.
    Subconvexity,
    /// Validates eigenform coefficient files.
    Ingest {
        /// Coefficient files, in addition to any listed in the configuration.
        files: Vec<PathBuf>,
    },
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Classgroup => ExperimentKind::Classgroup,
            Command::Classset => ExperimentKind::Classset,
            Command::VerifyAverage => ExperimentKind::VerifyAverage,
            Command::Geometric => ExperimentKind::Geometric,
            Command::MeasureCheck => ExperimentKind::MeasureCheck,
            Command::Equidist => ExperimentKind::Equidist,
            Command::Subconvexity => ExperimentKind::Subconvexity,
            Command::Ingest { .. } => ExperimentKind::Ingest,
        }
    }
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => default_config(kind),
    };
    match cfg.experiment {
        Some(k) if k != kind => {
            return Err(HarnessError::Config(format!(
                "configuration is for `{k}`, not `{kind}`"
            )));
        }
        _ => cfg.experiment = Some(kind),
    }
    if let Command::Ingest { files } = &cli.command {
        cfg.coefficients.extend(files.iter().cloned());
    }
    if let Some(tol) = cli.common.tol {
        cfg.tol = Some(tol);
    }
    if let Some(n) = cli.common.nmax {
        cfg.n_max = Some(n);
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Summary, HarnessError> {
    let cfg = configure(cli)?;
    let jobs = cli
        .common
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let output = run_with_jobs(&cfg, jobs)?;
    let summary = output.summary();
    let name = output.kind.name();
    let csv = csv_string(&output.rows)?;
    write_file(&cli.common.out.join(format!("{name}.csv")), csv.as_bytes())?;
    let report = JsonReport {
        experiment: output.kind,
        config: &cfg,
        jobs,
        seed: cli.common.seed,
        conventions: CONVENTIONS,
        metadata: &output.metadata,
        summary,
        rows: output
            .rows
            .iter()
            .map(|row| JsonRow {
                row,
                seconds: row.seconds,
            })
            .collect(),
        seconds: output.seconds,
    };
    write_file(
        &cli.common.out.join(format!("{name}.json")),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    for row in output.rows.iter().filter(|r| r.status.is_failure()) {
        let dev = row
            .rel_dev
            .map(|d| format!(" rel {d:.3e}"))
            .unwrap_or_default();
        eprintln!(
            "{:?} {} D={} N={} omega={} f={} {}{dev} {}",
            row.status,
            row.check,
            row.disc.map_or("-".into(), |d| d.to_string()),
            row.level.map_or("-".into(), |n| n.to_string()),
            row.omega,
            row.hecke,
            row.label,
            row.note
        );
    }
    println!(
        "{name}: {summary} ({:.2} s, {jobs} jobs) -> {}",
        output.seconds,
        cli.common.out.display()
    );
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) if summary.all_pass() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
