//! Acceptance suite: prints one PASS / FAIL / SKIPPED line per criterion and exits non-zero on any FAIL.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rtf_core::harness::config::Grid;
use rtf_core::harness::report::csv_string;
use rtf_core::harness::{
    default_config, run_with_jobs, ExperimentConfig, ExperimentKind, HeckeChoice, ReportRow,
    RunOutput, Status,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

use Outcome::{Fail, Pass, Skipped};

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn data_files() -> Vec<PathBuf> {
    ["level11_weight2.txt", "level5_weight4.txt"]
        .iter()
        .map(|f| manifest_dir().join("tests/data").join(f))
        .filter(|p| p.exists())
        .collect()
}

fn execute(cfg: &ExperimentConfig, jobs: usize) -> RunOutput {
    run_with_jobs(cfg, jobs).unwrap_or_else(|e| panic!("{:?} failed to run: {e}", cfg.experiment))
}

fn suite_config(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = default_config(kind);
    if kind == ExperimentKind::Ingest {
        cfg.coefficients = data_files();
    }
    cfg
}

const SUITE: [ExperimentKind; 8] = [
    ExperimentKind::Classgroup,
    ExperimentKind::Classset,
    ExperimentKind::VerifyAverage,
    ExperimentKind::Geometric,
    ExperimentKind::MeasureCheck,
    ExperimentKind::Equidist,
    ExperimentKind::Subconvexity,
    ExperimentKind::Ingest,
];

struct Suite {
    runs: Vec<RunOutput>,
}

impl Suite {
    fn run(jobs: usize) -> Self {
        Self {
            runs: SUITE
                .iter()
                .map(|&k| execute(&suite_config(k), jobs))
                .collect(),
        }
    }

    fn get(&self, kind: ExperimentKind) -> &RunOutput {
        self.runs
            .iter()
            .find(|r| r.kind == kind)
            .expect("experiment in suite")
    }

    fn csv(&self) -> Vec<String> {
        self.runs
            .iter()
            .map(|r| csv_string(&r.rows).expect("csv"))
            .collect()
    }
}

fn rows<'a>(out: &'a RunOutput, check: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
    out.rows.iter().filter(move |r| r.check == check)
}

fn failures<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> Vec<String> {
    rows.filter(|r| r.status.is_failure())
        .map(|r| {
            format!(
                "{} D={:?} N={:?} Ω={} f={} {}",
                r.check, r.disc, r.level, r.omega, r.hecke, r.label
            )
        })
        .collect()
}

fn mass_formula(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::Classset);
    let wanted = [2u64, 3, 5, 7, 11, 13, 23, 37, 101, 105];
    let mass: Vec<&ReportRow> = rows(out, "mass")
        .filter(|r| wanted.contains(&r.level.unwrap_or(0)))
        .collect();
    let covered: BTreeSet<u64> = mass.iter().filter_map(|r| r.level).collect();
    let bad = failures(mass.iter().copied());
    verdict(
        covered.len() == wanted.len() && bad.is_empty() && out.seconds < 10.0,
        format!(
            "{} levels exact, {} failures, {:.2} s",
            covered.len(),
            bad.len(),
            out.seconds
        ),
    )
}

fn class_numbers(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::Classgroup);
    let checked = rows(out, "h=analytic").count();
    let bad = failures(out.rows.iter());
    verdict(
        checked > 600 && bad.is_empty() && out.seconds < 30.0,
        format!(
            "{checked} fundamental discriminants in [-2000, -3], {} failures, {:.2} s",
            bad.len(),
            out.seconds
        ),
    )
}

fn plancherel(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::MeasureCheck);
    let checks: Vec<&ReportRow> = out
        .rows
        .iter()
        .filter(|r| r.check != "I~ cosets=measure")
        .collect();
    let worst = checks.iter().filter_map(|r| r.abs_dev).fold(0.0, f64::max);
    let bad = failures(checks.iter().copied());
    verdict(
        checks.len() >= 990 && bad.is_empty() && worst <= 1e-10 && out.seconds < 20.0,
        format!(
            "{} identities, max abs error {worst:.1e}, {:.2} s",
            checks.len(),
            out.seconds
        ),
    )
}

fn dual_evaluation(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::MeasureCheck);
    let checks: Vec<&ReportRow> = rows(out, "I~ cosets=measure").collect();
    let cases: BTreeSet<&str> = checks.iter().map(|r| r.label.as_str()).collect();
    let worst = checks.iter().filter_map(|r| r.abs_dev).fold(0.0, f64::max);
    let bad = failures(checks.iter().copied());
    verdict(
        checks.len() == 49 && bad.is_empty() && worst <= 1e-10,
        format!(
            "{} evaluations f_0..f_6 over {} local cases, max abs error {worst:.1e}",
            checks.len(),
            cases.len()
        ),
    )
}

fn basis_independence() -> Outcome {
    let mut cfg = ExperimentConfig::empty(ExperimentKind::VerifyAverage);
    cfg.grid = Some(Grid {
        max_disc: 40,
        max_level: 60,
    });
    cfg.hecke = vec![HeckeChoice::identity(2)];
    let out = execute(&cfg, 1);
    let checks: Vec<&ReportRow> = rows(&out, "delta=eigen").collect();
    let pairs: BTreeSet<(i64, u64)> = checks
        .iter()
        .filter_map(|r| Some((r.disc?, r.level?)))
        .collect();
    let worst = checks.iter().filter_map(|r| r.rel_dev).fold(0.0, f64::max);
    let bad = failures(checks.iter().copied());
    verdict(
        !pairs.is_empty() && bad.is_empty() && worst <= 1e-10,
        format!(
            "{} admissible pairs, {} comparisons, max rel deviation {worst:.1e}",
            pairs.len(),
            checks.len()
        ),
    )
}

fn identity_rows(out: &RunOutput, stable: bool) -> Vec<&ReportRow> {
    rows(out, "spectral=geometric")
        .filter(|r| r.status != Status::Skipped)
        .filter(|r| r.note.starts_with("stable") == stable)
        .collect()
}

fn stable_identity(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::VerifyAverage);
    let checks = identity_rows(out, true);
    let configs: BTreeSet<(i64, u64, &str, &str)> = checks
        .iter()
        .filter_map(|r| Some((r.disc?, r.level?, r.omega.as_str(), r.hecke.as_str())))
        .collect();
    let has = |d: i64, n: u64, omega: &str| {
        configs
            .iter()
            .any(|c| c.0 == d && c.1 == n && (omega.is_empty() || c.2 == omega))
    };
    let with_tp = configs.iter().filter(|c| c.3 != "1").count();
    let bad = failures(checks.iter().copied());
    verdict(
        configs.len() >= 10
            && has(-4, 11, "")
            && has(-23, 37, "[1]")
            && with_tp > 0
            && bad.is_empty(),
        format!(
            "{} stable configurations ({with_tp} with T_p), {} failures",
            configs.len(),
            bad.len()
        ),
    )
}

fn unstable_identity(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::VerifyAverage);
    let checks: Vec<&ReportRow> = identity_rows(out, false)
        .into_iter()
        .filter(|r| (r.level.unwrap_or(0) as i64) < r.disc.unwrap_or(0).abs())
        .collect();
    let with_regular = checks
        .iter()
        .filter(|r| !r.note.contains(" 0 regular terms"))
        .count();
    let bad = failures(checks.iter().copied());
    verdict(
        checks.len() >= 3 && with_regular >= 3 && bad.is_empty(),
        format!(
            "{} configurations with N < |D| ({with_regular} with regular terms), {} failures",
            checks.len(),
            bad.len()
        ),
    )
}

fn find<'a>(out: &'a RunOutput, check: &'a str, d: i64, n: u64) -> Option<&'a ReportRow> {
    rows(out, check).find(|r| r.disc == Some(d) && r.level == Some(n) && r.hecke == "1")
}

fn classical(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::VerifyAverage);
    let zero = find(out, "classical=reference", -3, 5).is_some_and(|r| {
        r.status == Status::Pass && r.lhs.is_some_and(|v| v.re == 0.0 && v.im == 0.0)
    });
    let period = find(out, "classical=reference", -4, 11);
    let afe = find(out, "afe=reference", -4, 11);
    let rel = |r: Option<&ReportRow>| r.and_then(|r| r.rel_dev).unwrap_or(f64::INFINITY);
    let ok = zero && rel(period) <= 1e-6 && rel(afe) <= 1e-3 && out.seconds < 300.0;
    verdict(
        ok,
        format!(
            "(-3, 5) exact zero: {zero}; (-4, 11) period route rel {:.1e}, AFE route rel {:.1e}",
            rel(period),
            rel(afe)
        ),
    )
}

fn higher_weight() -> Outcome {
    let path = manifest_dir().join("examples/configs/weight4_level5.json");
    let cfg = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => return Fail(format!("{}: {e}", path.display())),
    };
    if cfg.coefficients.iter().any(|p| !Path::new(p).exists()) {
        return Skipped("no weight-4 coefficient file supplied".into());
    }
    let out = execute(&cfg, 1);
    let reference: Vec<&ReportRow> = rows(&out, "afe=reference").collect();
    let geometric: Vec<&ReportRow> = rows(&out, "afe=geometric").collect();
    let worst = reference
        .iter()
        .filter_map(|r| r.rel_dev)
        .fold(0.0, f64::max);
    let bad = failures(out.rows.iter());
    verdict(
        !reference.is_empty() && worst <= 1e-3 && bad.is_empty(),
        format!(
            "{} closed-form checks against h (max rel {worst:.1e}), {} checks against the geometric side, {} failures",
            reference.len(),
            geometric.len(),
            bad.len()
        ),
    )
}

fn equidistribution(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::Equidist);
    match rows(out, "deviation trend").next() {
        Some(r) => verdict(r.status == Status::Pass, r.note.clone()),
        None => Fail("no trend row".into()),
    }
}

fn subconvexity(s: &Suite) -> Outcome {
    let out = s.get(ExperimentKind::Subconvexity);
    let checks: Vec<&ReportRow> = rows(out, "bound <= C shape").collect();
    let bad = failures(out.rows.iter());
    let constant = checks.first().map(|r| r.note.clone()).unwrap_or_default();
    verdict(
        !checks.is_empty() && bad.is_empty(),
        format!(
            "{} bounds, {} above the fitted shape; {constant}",
            checks.len(),
            bad.len()
        ),
    )
}

fn determinism(serial: &Suite) -> Outcome {
    let parallel = Suite::run(8);
    let (a, b) = (serial.csv(), parallel.csv());
    let differing: Vec<&str> = SUITE
        .iter()
        .zip(a.iter().zip(&b))
        .filter(|(_, (x, y))| x != y)
        .map(|(k, _)| k.name())
        .collect();
    let bytes: usize = a.iter().map(String::len).sum();
    verdict(
        differing.is_empty(),
        format!(
            "{bytes} CSV bytes over {} experiments; differing: {differing:?}",
            SUITE.len()
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let suite = Suite::run(1);
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("mass formula", Box::new(|| mass_formula(&suite))),
        ("class numbers", Box::new(|| class_numbers(&suite))),
        ("plancherel suite", Box::new(|| plancherel(&suite))),
        ("I~ dual evaluation", Box::new(|| dual_evaluation(&suite))),
        ("basis independence", Box::new(basis_independence)),
        (
            "identity at large level",
            Box::new(|| stable_identity(&suite)),
        ),
        (
            "identity below stability",
            Box::new(|| unstable_identity(&suite)),
        ),
        ("classical average", Box::new(|| classical(&suite))),
        ("higher weight", Box::new(higher_weight)),
        (
            "equidistribution trend",
            Box::new(|| equidistribution(&suite)),
        ),
        ("subconvexity shape", Box::new(|| subconvexity(&suite))),
        ("determinism", Box::new(|| determinism(&suite))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Pass(d) => ("PASS", d),
            Skipped(d) => ("SKIPPED", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag:<7} {name}: {detail}", i + 1);
    }
    println!(
        "acceptance: {} of {} criteria failed ({:.1} s)",
        failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
