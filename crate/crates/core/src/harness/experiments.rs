//! Experiment runners. Each configuration is computed independently and rows are collected in input order.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::json;

use super::config::{admissible, ExperimentConfig, ExperimentKind, HeckeChoice};
use super::ingest::CoefficientTable;
use super::report::{ReportRow, Status, Summary};
use super::HarnessError;
use crate::arith::{euler_phi, is_fundamental_discriminant, is_prime, kronecker, primes_up_to};
use crate::geomside::{geometric_total, GeomConfig, GeomError};
use crate::heckemeasure::{
    adaptive_gk, i_tilde_cosets, i_tilde_measure, plancherel_suite, HeckeElement, LocalTorus,
    Measure,
};
use crate::lfunc::{average_nmax, average_term, default_nmax, Eigenform, Kind, LSeries};
use crate::qfield::{ClassCharacter, ClassGroup, QuadField, Splitting};
use crate::quatorder::classset::expected_mass;
use crate::quatorder::ClassSet;
use crate::spectralside::{adelic_scale, spectral_average, EigenData};
use crate::torusmap::PeriodData;

/// Rows and per-configuration metadata of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub kind: ExperimentKind,
    pub rows: Vec<ReportRow>,
    pub metadata: Vec<serde_json::Value>,
    pub seconds: f64,
}

impl RunOutput {
    pub fn summary(&self) -> Summary {
        Summary::of(&self.rows)
    }
}

type Block = (Vec<ReportRow>, Option<serde_json::Value>);

const RTF_TOL: f64 = 1e-8;
const BASIS_TOL: f64 = 1e-10;
const AFE_TOL: f64 = 1e-6;
const FE_GATE: f64 = 1e-6;
const MEASURE_TOL: f64 = 1e-10;
const ABS_FLOOR: f64 = 1e-12;

/// Stable and below-stability pairs shared by the identity and bound experiments.
fn standard_pairs() -> Vec<(i64, u64)> {
    vec![
        (-3, 5),
        (-4, 11),
        (-4, 19),
        (-4, 23),
        (-3, 11),
        (-3, 17),
        (-7, 13),
        (-8, 5),
        (-8, 13),
        (-23, 37),
        (-23, 53),
        (-3, 29),
        (-23, 5),
        (-23, 7),
        (-23, 17),
        (-7, 5),
        (-31, 11),
    ]
}

/// Built-in configuration for each experiment.
pub fn default_config(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::empty(kind);
    match kind {
        ExperimentKind::Classgroup => cfg.disc_range = Some((-2000, -3)),
        ExperimentKind::Classset => {
            cfg.levels = vec![2, 3, 5, 7, 11, 13, 17, 23, 37, 43, 101, 105, 107]
        }
        ExperimentKind::MeasureCheck => {
            cfg.primes = vec![2, 3, 5, 7, 9];
            cfg.n_max = Some(10);
        }
        ExperimentKind::VerifyAverage | ExperimentKind::Geometric => {
            cfg.pairs = standard_pairs();
            cfg.hecke = vec![
                HeckeChoice::identity(2),
                HeckeChoice::tp(2),
                HeckeChoice::tp(3),
                HeckeChoice::tp(5),
            ];
            cfg.afe = kind == ExperimentKind::VerifyAverage;
        }
        ExperimentKind::Equidist => {
            cfg.discriminants = vec![-4];
            cfg.primes = vec![3];
            cfg.interval = Some((0.0, 2.0));
            cfg.levels = primes_up_to(300)
                .into_iter()
                .filter(|&n| n % 4 == 3 && n != 3)
                .collect();
        }
        ExperimentKind::Subconvexity => {
            cfg.pairs = standard_pairs();
            cfg.epsilon = Some(0.01);
        }
        ExperimentKind::Ingest => {}
    }
    cfg
}

/// Runs an experiment on a dedicated pool of `jobs` threads.
pub fn run_with_jobs(cfg: &ExperimentConfig, jobs: usize) -> Result<RunOutput, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;
    pool.install(|| run(cfg))
}

/// Runs an experiment on the current rayon pool.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let kind = cfg
        .experiment
        .ok_or_else(|| HarnessError::Config("no experiment kind given".into()))?;
    let start = Instant::now();
    let blocks: Vec<Block> = match kind {
        ExperimentKind::Classgroup => classgroup(cfg),
        ExperimentKind::Classset => classset(cfg),
        ExperimentKind::MeasureCheck => measure_check(cfg),
        ExperimentKind::VerifyAverage => per_pair(cfg, verify_pair),
        ExperimentKind::Geometric => per_pair(cfg, geometric_pair),
        ExperimentKind::Equidist => equidist(cfg)?,
        ExperimentKind::Subconvexity => subconvexity(cfg)?,
        ExperimentKind::Ingest => ingest(cfg),
    };
    let mut rows = Vec::new();
    let mut metadata = Vec::new();
    for (r, m) in blocks {
        rows.extend(r);
        metadata.extend(m);
    }
    Ok(RunOutput {
        kind,
        rows,
        metadata,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn timed(rows: &mut [ReportRow], start: Instant) {
    let s = start.elapsed().as_secs_f64();
    rows.iter_mut().for_each(|r| r.seconds = s);
}

fn omega_label(omega: &ClassCharacter) -> String {
    let labels: Vec<String> = omega.label.iter().map(u64::to_string).collect();
    format!("[{}]", labels.join(" "))
}

/// Primes up to 13 not dividing N, together with the Hecke primes.
fn eigen_primes(level: u64, extra: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut ps: Vec<u64> = primes_up_to(13)
        .into_iter()
        .chain(extra)
        .filter(|p| !level.is_multiple_of(*p))
        .collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

fn class_number_analytic(disc: i64) -> f64 {
    let d = disc.unsigned_abs();
    let w = match disc {
        -3 => 6.0,
        -4 => 4.0,
        _ => 2.0,
    };
    let s: f64 = (1..d)
        .map(|a| kronecker(disc, a as i64) as f64 * a as f64)
        .sum();
    -w / (2.0 * d as f64) * s
}

fn classgroup(cfg: &ExperimentConfig) -> Vec<Block> {
    let k = ExperimentKind::Classgroup;
    let tol = cfg.tol.unwrap_or(1e-9);
    let mut discs: Vec<(i64, bool)> = cfg.discriminants.iter().map(|&d| (d, true)).collect();
    if let Some((lo, hi)) = cfg.disc_range {
        discs.extend(
            (lo.min(hi)..=hi.max(lo))
                .filter(|&d| d < 0 && is_fundamental_discriminant(d))
                .map(|d| (d, false)),
        );
    }
    discs
        .par_iter()
        .map(|&(d, explicit)| {
            let start = Instant::now();
            let base = ReportRow::new(k, "h=analytic").at(Some(d), None);
            let field = match QuadField::new(d) {
                Ok(f) => f,
                Err(e) if explicit => return (vec![base.skipped(e.to_string())], None),
                Err(_) => return (Vec::new(), None),
            };
            let pic = ClassGroup::new(field);
            let h = pic.h();
            let group_law = pic.verify_table();
            let structure: Vec<String> = pic.structure.iter().map(u64::to_string).collect();
            let mut rows = vec![
                base.compare_real(h as f64, class_number_analytic(d), tol, 0.0)
                    .note(format!("structure [{}]", structure.join(" "))),
                ReportRow::new(k, "group law").at(Some(d), None).exact(
                    1.0,
                    if group_law { 1.0 } else { 0.0 },
                    group_law,
                ),
            ];
            timed(&mut rows, start);
            let meta = json!({"disc": d, "h": h, "structure": pic.structure});
            (rows, Some(meta))
        })
        .collect()
}

fn classset(cfg: &ExperimentConfig) -> Vec<Block> {
    let k = ExperimentKind::Classset;
    cfg.levels
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let base = ReportRow::new(k, "mass").at(None, Some(n));
            let cs = match ClassSet::new(n) {
                Ok(cs) => cs,
                Err(e) => return (vec![base.skipped(e.to_string())], None),
            };
            let mass = cs.mass();
            let expected = expected_mass(n);
            let to_f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
            let mut rows = vec![base
                .exact(to_f(mass), to_f(expected), mass == expected)
                .note(format!("{mass} vs {expected}, {} classes", cs.len()))];
            let ramification = cs.alg().has_correct_ramification();
            rows.push(ReportRow::new(k, "ramification").at(None, Some(n)).exact(
                1.0,
                if ramification { 1.0 } else { 0.0 },
                ramification,
            ));
            let p = eigen_primes(n, [])[0];
            match cs.brandt(p) {
                Ok(b) => {
                    let w = cs.weights();
                    let sums_ok = b.iter().all(|row| row.iter().sum::<i64>() == p as i64 + 1);
                    let sym_ok = (0..b.len()).all(|x| (0..b.len()).all(|y| b[x][y] * w[y] as i64 == b[y][x] * w[x] as i64));
                    rows.push(
                        ReportRow::new(k, "brandt row sums")
                            .at(None, Some(n))
                            .label(format!("B({p})"))
                            .exact(p as f64 + 1.0, p as f64 + 1.0, sums_ok),
                    );
                    rows.push(
                        ReportRow::new(k, "brandt weighted symmetry")
                            .at(None, Some(n))
                            .label(format!("B({p})"))
                            .exact(1.0, if sym_ok { 1.0 } else { 0.0 }, sym_ok),
                    );
                }
                Err(e) => rows.push(ReportRow::new(k, "brandt row sums").at(None, Some(n)).error(e)),
            }
            timed(&mut rows, start);
            let meta = json!({"level": n, "classes": cs.len(), "weights": cs.weights(), "mass": mass.to_string()});
            (rows, Some(meta))
        })
        .collect()
}

fn torus_cases() -> Vec<(LocalTorus, (i128, i128))> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let cube = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    [
        (5u64, Splitting::Split, cube, 0u32, (0i128, 1i128)),
        (3, Splitting::Inert, c(1.0), 0, (0, 1)),
        (2, Splitting::Ramified, c(-1.0), 0, (0, 1)),
        (3, Splitting::Ramified, c(1.0), 0, (1, 1)),
        (5, Splitting::Split, c(1.0), 1, (0, 1)),
        (3, Splitting::Inert, c(1.0), 2, (0, 1)),
        (2, Splitting::Ramified, c(1.0), 3, (0, 1)),
    ]
    .into_iter()
    .map(|(p, splitting, zeta, conductor_exp, tn)| {
        (
            LocalTorus {
                p,
                splitting,
                zeta,
                conductor_exp,
            },
            tn,
        )
    })
    .collect()
}

fn measure_check(cfg: &ExperimentConfig) -> Vec<Block> {
    let k = ExperimentKind::MeasureCheck;
    let tol = cfg.tol.unwrap_or(MEASURE_TOL);
    let n_max = cfg.n_max.unwrap_or(10);
    let mut blocks: Vec<Block> = cfg
        .primes
        .par_iter()
        .map(|&q| {
            let start = Instant::now();
            let mut rows = match plancherel_suite(q, n_max, tol) {
                Ok(checks) => checks
                    .into_iter()
                    .map(|c| {
                        ReportRow::new(k, c.name)
                            .hecke(format!("f_{}({})", q, c.n))
                            .label(format!("q={q} m={} delta={}", c.m, c.delta))
                            .compare(c.computed, c.expected, 0.0, tol)
                    })
                    .collect(),
                Err(e) => vec![ReportRow::new(k, "plancherel suite")
                    .label(format!("q={q}"))
                    .error(e)],
            };
            timed(&mut rows, start);
            (rows, None)
        })
        .collect();
    let cases = torus_cases();
    let dual: Vec<Block> = cases
        .par_iter()
        .map(|(torus, (t, nrm))| {
            let start = Instant::now();
            let label = format!(
                "p={} {:?} zeta={:.4} n={}",
                torus.p, torus.splitting, torus.zeta, torus.conductor_exp
            );
            let mut rows: Vec<ReportRow> = (0..=n_max.min(6))
                .map(|j| {
                    let f = HeckeElement::basis(torus.p, j);
                    let row = ReportRow::new(k, "I~ cosets=measure")
                        .hecke(format!("f_{}({j})", torus.p))
                        .label(&label);
                    match (
                        i_tilde_cosets(&f, torus, *t, *nrm),
                        i_tilde_measure(&f, torus, tol * 1e-3),
                    ) {
                        (Ok(a), Ok(b)) => row.compare(a, b, 0.0, tol),
                        (Err(e), _) | (_, Err(e)) => row.error(e),
                    }
                })
                .collect();
            timed(&mut rows, start);
            (rows, None)
        })
        .collect();
    blocks.extend(dual);
    blocks
}

fn per_pair(cfg: &ExperimentConfig, f: fn(&ExperimentConfig, i64, u64) -> Block) -> Vec<Block> {
    cfg.configurations()
        .par_iter()
        .map(|&(d, n)| {
            let start = Instant::now();
            let (mut rows, meta) = f(cfg, d, n);
            timed(&mut rows, start);
            (rows, meta)
        })
        .collect()
}

/// Shared data of one admissible (D, N).
struct PairData {
    field: QuadField,
    pic: ClassGroup,
    cs: ClassSet,
    eig: EigenData,
    pd: PeriodData,
}

impl PairData {
    fn new(disc: i64, level: u64, hecke: &[HeckeChoice]) -> Result<Self, String> {
        admissible(disc, level)?;
        let field = QuadField::new(disc).map_err(|e| e.to_string())?;
        let pic = ClassGroup::new(field);
        let cs = ClassSet::new(level).map_err(|e| e.to_string())?;
        let eig = EigenData::new(&cs, &eigen_primes(level, hecke.iter().map(|h| h.p)))
            .map_err(|e| e.to_string())?;
        let pd = PeriodData::new(&cs, &pic).map_err(|e| e.to_string())?;
        Ok(Self {
            field,
            pic,
            cs,
            eig,
            pd,
        })
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "disc": self.field.disc,
            "level": self.cs.level(),
            "h": self.pic.h(),
            "classes": self.cs.len(),
            "weights": self.cs.weights(),
            "cusp_forms": self.eig.cusp_count(),
            "hecke_primes": self.eig.primes,
            "eigenvalues": self.eig.eigenvalues,
            "embedding": self.pd.embedding.meta(),
            "iota": self.pd.iota,
            "iota_injective": self.pd.is_injective(),
        })
    }
}

/// Closed form of the classical weighted sum for k = 1 in the stable range.
fn classical_reference(h: usize, units: u32, level: u64, omega: &ClassCharacter) -> Ratio<i64> {
    let h = h as i64;
    if omega.is_trivial() {
        Ratio::from_integer(h) - Ratio::new(12 * h * h, units as i64 * euler_phi(level) as i64)
    } else {
        Ratio::from_integer(h)
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn geom_row(row: ReportRow, err: GeomError) -> ReportRow {
    match err {
        GeomError::Unsupported(reason) => row.skipped(format!("unsupported: {reason}")),
        e => row.error(e),
    }
}

fn verify_pair(cfg: &ExperimentConfig, d: i64, n: u64) -> Block {
    let k = ExperimentKind::VerifyAverage;
    let tol = cfg.tol.unwrap_or(RTF_TOL);
    let data = match PairData::new(d, n, &cfg.hecke) {
        Ok(x) => x,
        Err(reason) => {
            return (
                vec![ReportRow::new(k, "admissible")
                    .at(Some(d), Some(n))
                    .skipped(reason)],
                None,
            )
        }
    };
    let omegas = cfg.omega.select(&data.pic);
    let mut rows = Vec::new();
    if cfg.k > 1 {
        for omega in &omegas {
            rows.extend(higher_weight_rows(cfg, &data, omega));
        }
        return (rows, Some(data.metadata()));
    }
    let u = data.field.units as f64;
    let scale = adelic_scale(&data.field);
    let forms = if cfg.afe {
        let n_max = omegas
            .iter()
            .map(|o| average_nmax(n, 2, &data.pic, o))
            .max()
            .unwrap_or(0);
        Some(
            Eigenform::all_from_brandt(&data.cs, &data.eig, n_max as u64)
                .map_err(|e| e.to_string()),
        )
    } else {
        None
    };
    for omega in &omegas {
        let ol = omega_label(omega);
        for choice in &cfg.hecke {
            let row = |check: &str| {
                ReportRow::new(k, check)
                    .at(Some(d), Some(n))
                    .omega(&ol)
                    .hecke(choice.label())
            };
            if n.is_multiple_of(choice.p) {
                rows.push(
                    row("spectral=geometric")
                        .skipped(format!("Hecke prime {} divides the level", choice.p)),
                );
                continue;
            }
            let f = choice.element();
            let gc = GeomConfig {
                level: n,
                pic: &data.pic,
                omega,
                k: 1,
                hecke: f.clone(),
            };
            if f.degree() > 0 && !gc.is_stable() {
                rows.push(row("spectral=geometric").skipped(format!(
                    "below stability for {}: N = {n} < {}",
                    choice.label(),
                    gc.threshold()
                )));
                continue;
            }
            let spectral = match spectral_average(
                &data.eig,
                &data.pd,
                &data.field,
                omega,
                &f,
                f64::INFINITY,
            ) {
                Ok(s) => s,
                Err(e) => {
                    rows.push(row("delta=eigen").error(e));
                    continue;
                }
            };
            rows.push(row("delta=eigen").compare(
                spectral.delta_route,
                spectral.eigen_route,
                BASIS_TOL,
                ABS_FLOOR,
            ));
            let stability = if gc.is_stable() {
                "stable"
            } else {
                "below stability"
            };
            rows.push(match geometric_total(&gc, 1e-13) {
                Ok(g) => row("spectral=geometric")
                    .compare(spectral.delta_route * scale, g.total, tol, ABS_FLOOR)
                    .note(format!(
                        "{stability}, {} regular terms",
                        g.regular_terms.len()
                    )),
                Err(e) => geom_row(row("spectral=geometric"), e),
            });
            if f.degree() > 0 {
                continue;
            }
            let classical = spectral.raw_period_sum / u * f.coeffs[0].inv();
            if !gc.is_stable() {
                rows.push(
                    row("classical=reference")
                        .value(classical)
                        .note("below stability: no closed form"),
                );
            } else {
                let reference = classical_reference(data.pic.h(), data.field.units, n, omega);
                let r = row("classical=reference");
                rows.push(if data.eig.cusp_count() == 0 {
                    r.exact(0.0, ratio_f64(reference), *reference.numer() == 0)
                        .note(format!("no cusp forms; reference {reference}"))
                } else {
                    r.compare(
                        classical,
                        Complex64::new(ratio_f64(reference), 0.0),
                        tol,
                        ABS_FLOOR,
                    )
                    .note(format!("reference {reference}"))
                });
            }
            if let Some(forms) = &forms {
                rows.extend(afe_rows(
                    &data,
                    omega,
                    &spectral.forms,
                    forms,
                    gc.is_stable(),
                    &row,
                ));
            }
        }
    }
    (rows, Some(data.metadata()))
}

fn afe_rows(
    data: &PairData,
    omega: &ClassCharacter,
    terms: &[crate::spectralside::FormTerm],
    forms: &Result<Vec<Eigenform>, String>,
    stable: bool,
    row: &dyn Fn(&str) -> ReportRow,
) -> Vec<ReportRow> {
    let forms = match forms {
        Ok(f) => f,
        Err(e) => return vec![row("afe=period").error(e)],
    };
    let u = data.field.units as f64;
    let cusp: Vec<&crate::spectralside::FormTerm> =
        terms.iter().filter(|t| !t.is_eisenstein).collect();
    let mut out = Vec::new();
    let mut total = 0.0;
    let mut ok = true;
    for (form, term) in forms.iter().zip(cusp) {
        match average_term(form, &data.pic, omega, FE_GATE) {
            Ok(a) => {
                total += a.weighted;
                out.push(
                    row("afe=period")
                        .label(&form.label)
                        .compare_real(
                            a.weighted,
                            term.period_sq / u,
                            AFE_TOL,
                            10.0 * a.error + ABS_FLOOR,
                        )
                        .note(format!(
                            "L-value {:e}, (f,f) {:e}, kernel error {:.1e}",
                            a.central, a.petersson, a.error
                        )),
                );
            }
            Err(e) => {
                ok = false;
                out.push(row("afe=period").label(&form.label).error(e));
            }
        }
    }
    if ok && stable {
        let reference = classical_reference(data.pic.h(), data.field.units, data.cs.level(), omega);
        out.push(
            row("afe=reference")
                .compare_real(total, ratio_f64(reference), AFE_TOL, ABS_FLOOR)
                .note(format!(
                    "sum over {} forms; reference {reference}",
                    forms.len()
                )),
        );
    }
    out
}

/// Weight 2k > 2: the L-function route from supplied coefficient files against h, and against the geometric side.
fn higher_weight_rows(
    cfg: &ExperimentConfig,
    data: &PairData,
    omega: &ClassCharacter,
) -> Vec<ReportRow> {
    let k = ExperimentKind::VerifyAverage;
    let (d, n) = (data.field.disc, data.cs.level());
    let weight = 2 * cfg.k;
    let row = |check: &str| {
        ReportRow::new(k, check)
            .at(Some(d), Some(n))
            .omega(omega_label(omega))
            .hecke("1")
            .label(format!("weight {weight}"))
    };
    if cfg.coefficients.is_empty() {
        return vec![row("afe=reference")
            .skipped(format!("no coefficient file supplied for weight {weight}"))];
    }
    let n_max = average_nmax(n, weight, &data.pic, omega);
    let mut total = 0.0;
    let mut rows = Vec::new();
    for path in &cfg.coefficients {
        let form = CoefficientTable::read(path).and_then(|t| {
            let wrap = |source| HarnessError::Ingest {
                path: path.clone(),
                source,
            };
            t.expect(Some(n), Some(weight)).map_err(wrap)?;
            t.covers(n_max as u64).map_err(wrap)?;
            t.check_hecke().map_err(wrap)?;
            Ok(t.eigenform())
        });
        match form
            .map_err(|e| e.to_string())
            .and_then(|f| average_term(&f, &data.pic, omega, FE_GATE).map_err(|e| e.to_string()))
        {
            Ok(a) => {
                total += a.weighted;
                rows.push(
                    row("afe term")
                        .label(&a.label)
                        .value(Complex64::new(a.weighted, 0.0))
                        .note(format!(
                            "L-value {:e}, (f,f) {:e}, kernel error {:.1e}",
                            a.central, a.petersson, a.error
                        )),
                );
            }
            Err(e) => {
                rows.push(row("afe=reference").error(e));
                return rows;
            }
        }
    }
    if n > data.field.d_abs {
        let h = data.pic.h() as f64;
        rows.push(
            row("afe=reference")
                .compare_real(total, h, AFE_TOL, ABS_FLOOR)
                .note(format!(
                    "sum over {} supplied forms; reference h",
                    cfg.coefficients.len()
                )),
        );
    }
    let gc = GeomConfig {
        level: n,
        pic: &data.pic,
        omega,
        k: cfg.k,
        hecke: HeckeElement::identity(2),
    };
    let stability = if gc.is_stable() {
        "stable"
    } else {
        "below stability"
    };
    let scale = adelic_scale(&data.field) * data.field.units as f64;
    rows.push(match geometric_total(&gc, 1e-13) {
        Ok(g) => row("afe=geometric")
            .compare(
                Complex64::new(total, 0.0),
                g.total / scale,
                AFE_TOL,
                ABS_FLOOR,
            )
            .note(format!(
                "{stability}, {} regular terms",
                g.regular_terms.len()
            )),
        Err(e) => geom_row(row("afe=geometric"), e),
    });
    rows
}

fn geometric_pair(cfg: &ExperimentConfig, d: i64, n: u64) -> Block {
    let k = ExperimentKind::Geometric;
    let tol = cfg.tol.unwrap_or(1e-12);
    if let Err(reason) = admissible(d, n) {
        return (
            vec![ReportRow::new(k, "admissible")
                .at(Some(d), Some(n))
                .skipped(reason)],
            None,
        );
    }
    let field = QuadField::new(d).expect("admissible discriminant");
    let pic = ClassGroup::new(field);
    let mut rows = Vec::new();
    for omega in cfg.omega.select(&pic) {
        let ol = omega_label(&omega);
        for choice in &cfg.hecke {
            let row = |check: &str| {
                ReportRow::new(k, check)
                    .at(Some(d), Some(n))
                    .omega(&ol)
                    .hecke(choice.label())
            };
            if n.is_multiple_of(choice.p) {
                rows.push(
                    row("geometric total")
                        .skipped(format!("Hecke prime {} divides the level", choice.p)),
                );
                continue;
            }
            let gc = GeomConfig {
                level: n,
                pic: &pic,
                omega: &omega,
                k: cfg.k,
                hecke: choice.element(),
            };
            if choice.element().degree() > 0 && !gc.is_stable() {
                rows.push(
                    row("geometric total")
                        .skipped(format!("below stability for {}", choice.label())),
                );
                continue;
            }
            match geometric_total(&gc, 1e-13) {
                Ok(g) => {
                    rows.push(
                        row("irregular")
                            .value(g.irregular)
                            .note(format!("I~ = {:e}", g.i_tilde.re)),
                    );
                    for t in &g.regular_terms {
                        let r = row("regular term")
                            .label(format!("n={} xi={}/{}", t.n, t.xi.0, t.xi.1));
                        rows.push(match t.exact {
                            Some((num, den)) => r
                                .compare(
                                    t.term,
                                    Complex64::new(num as f64 / den as f64, 0.0),
                                    tol,
                                    ABS_FLOOR,
                                )
                                .note(format!("exact {num}/{den}")),
                            None => r.value(t.term),
                        });
                    }
                    let stability = if gc.is_stable() {
                        "stable"
                    } else {
                        "below stability"
                    };
                    rows.push(row("geometric total").value(g.total).note(stability));
                }
                Err(e) => rows.push(geom_row(row("geometric total"), e)),
            }
        }
    }
    (rows, None)
}

/// Least-squares slope of log y against log x.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let cov: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    cov / var
}

fn equidist(cfg: &ExperimentConfig) -> Result<Vec<Block>, HarnessError> {
    let k = ExperimentKind::Equidist;
    let disc = *cfg
        .discriminants
        .first()
        .ok_or_else(|| HarnessError::Config("equidist needs one discriminant".into()))?;
    let p = *cfg
        .primes
        .first()
        .ok_or_else(|| HarnessError::Config("equidist needs a prime".into()))?;
    let (a, b) = cfg.interval.unwrap_or((-2.0, 2.0));
    let field = QuadField::new(disc).map_err(|e| HarnessError::Config(e.to_string()))?;
    if !is_prime(p) || field.splitting(p) != Splitting::Inert {
        return Err(HarnessError::Config(format!(
            "{p} must be a prime inert in Q(√{disc})"
        )));
    }
    if !(-2.0..=2.0).contains(&a) || !(a..=2.0).contains(&b) {
        return Err(HarnessError::Config(format!(
            "interval [{a}, {b}] must lie in [-2, 2]"
        )));
    }
    let pic = ClassGroup::new(field);
    let omega = pic.characters().swap_remove(0);
    let torus = LocalTorus {
        p,
        splitting: Splitting::Inert,
        zeta: Complex64::new(1.0, 0.0),
        conductor_exp: 0,
    };
    let mu_j = adaptive_gk(|x| Measure::Twisted(torus).density(x), a, b, 1e-13)
        .map_err(|e| HarnessError::Config(e.to_string()))?
        .re
        / torus.l1_eta();
    let pf = p as f64;
    let l_partial = field.completed_l1(pic.h()) * (1.0 - field.eta(p as i64) as f64 / pf);
    let limit = 2.0 * l_partial / (1.0 - 1.0 / (pf * pf)) * mu_j;
    let interval = format!("[{a}, {b}]");
    let mut blocks: Vec<Block> = cfg
        .levels
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let row = ReportRow::new(k, "average=limit")
                .at(Some(disc), Some(n))
                .omega("[0]")
                .label(&interval);
            if n % p == 0 {
                return (vec![row.skipped(format!("{p} divides the level"))], None);
            }
            let data = match PairData::new(disc, n, &[HeckeChoice::identity(p)]) {
                Ok(x) => x,
                Err(reason) => return (vec![row.skipped(reason)], None),
            };
            let rep = spectral_average(
                &data.eig,
                &data.pd,
                &field,
                &omega,
                &HeckeElement::identity(p),
                f64::INFINITY,
            );
            let mut rows = match rep {
                Ok(rep) => {
                    let pi = data
                        .eig
                        .primes
                        .iter()
                        .position(|&q| q == p)
                        .expect("equidistribution prime is a Hecke prime");
                    let mut total = 0.0;
                    let mut count = 0;
                    for (term, lam) in rep.forms.iter().zip(&data.eig.eigenvalues) {
                        let x = lam[pi] / pf.sqrt();
                        if let (Some(l), true) = (term.l_ratio, (a..=b).contains(&x)) {
                            // removing the p-factors multiplies L(1/2)/L(1, Ad) by 1/(1 − 1/p) at an inert prime
                            total += l / (1.0 - 1.0 / pf);
                            count += 1;
                        }
                    }
                    let v = total / n as f64;
                    let mut r = row.value(Complex64::new(v, 0.0));
                    r.rhs = Some(Complex64::new(limit, 0.0));
                    r.abs_dev = Some((v - limit).abs());
                    r.rel_dev = Some((v - limit).abs() / limit.abs());
                    vec![r.note(format!(
                        "{count} of {} forms in the interval",
                        data.eig.cusp_count()
                    ))]
                }
                Err(e) => vec![row.error(e)],
            };
            timed(&mut rows, start);
            (rows, None)
        })
        .collect();
    let points: Vec<(f64, f64)> = blocks
        .iter()
        .flat_map(|(r, _)| r.iter())
        .filter(|r| r.status == Status::Info)
        .filter_map(|r| Some((r.level? as f64, r.abs_dev?)))
        .filter(|&(_, dev)| dev > 0.0)
        .collect();
    let trend = ReportRow::new(k, "deviation trend")
        .at(Some(disc), None)
        .label(&interval);
    let trend = if points.len() >= 3 {
        let slope = log_slope(&points);
        let steps = points.len() - 1;
        let shrinking = points.windows(2).filter(|w| w[1].1 < w[0].1).count();
        let fraction = shrinking as f64 / steps as f64;
        trend.exact(fraction, 2.0 / 3.0, 3 * shrinking >= 2 * steps).note(format!(
            "{shrinking} of {steps} steps shrink |average - limit|; log-log slope {slope:.3}; limit {limit:e}"
        ))
    } else {
        trend.skipped("fewer than three levels")
    };
    let meta = json!({"disc": disc, "prime": p, "interval": [a, b], "mu_p": mu_j, "limit": limit});
    blocks.push((vec![trend], Some(meta)));
    Ok(blocks)
}

fn subconvexity(cfg: &ExperimentConfig) -> Result<Vec<Block>, HarnessError> {
    let k = ExperimentKind::Subconvexity;
    let eps = cfg.epsilon.unwrap_or(0.01);
    struct Point {
        disc: i64,
        level: u64,
        omega: String,
        conductor: u64,
        bound: f64,
        rows: Vec<ReportRow>,
    }
    let pairs = cfg.configurations();
    let computed: Vec<Vec<Point>> = pairs
        .par_iter()
        .map(|&(d, n)| {
            let start = Instant::now();
            let row = |check: &str| ReportRow::new(k, check).at(Some(d), Some(n));
            let data = match PairData::new(d, n, &[]) {
                Ok(x) => x,
                Err(reason) => {
                    return vec![Point {
                        disc: d,
                        level: n,
                        omega: String::new(),
                        conductor: 0,
                        bound: f64::NAN,
                        rows: vec![row("admissible").skipped(reason)],
                    }]
                }
            };
            let n_max = default_nmax(n * n, &[1.0, 1.0, 2.0]);
            let adjoint: Result<Vec<f64>, String> =
                Eigenform::all_from_brandt(&data.cs, &data.eig, n_max as u64)
                    .map_err(|e| e.to_string())
                    .and_then(|forms| {
                        forms
                            .iter()
                            .map(|f| {
                                let ad = LSeries::build(Kind::Adjoint, f, None)
                                    .map_err(|e| e.to_string())?;
                                let v = ad
                                    .value(Complex64::new(1.0, 0.0), FE_GATE)
                                    .map_err(|e| e.to_string())?;
                                Ok(ad.archimedean(1.0) * v.finite.re)
                            })
                            .collect()
                    });
            let points = cfg
                .omega
                .select(&data.pic)
                .into_iter()
                .map(|omega| {
                    let ol = omega_label(&omega);
                    let mut point = Point {
                        disc: d,
                        level: n,
                        omega: ol.clone(),
                        conductor: omega.conductor,
                        bound: f64::NAN,
                        rows: Vec::new(),
                    };
                    let f = HeckeElement::identity(2);
                    let rep = spectral_average(
                        &data.eig,
                        &data.pd,
                        &data.field,
                        &omega,
                        &f,
                        f64::INFINITY,
                    );
                    match (&adjoint, rep) {
                        (Ok(ad), Ok(rep)) => {
                            let a = rep.l_average.re;
                            let max_ad = ad.iter().copied().fold(0.0, f64::max);
                            point.bound = a * max_ad;
                            let largest = rep
                                .forms
                                .iter()
                                .filter_map(|t| t.l_ratio)
                                .zip(ad)
                                .map(|(l, ad)| l * ad)
                                .fold(0.0, f64::max);
                            point.rows.push(
                                row("largest L-value <= bound")
                                    .omega(&ol)
                                    .exact(
                                        largest,
                                        point.bound,
                                        largest <= point.bound * (1.0 + 1e-12),
                                    )
                                    .note(format!("A = {a:e}, max L(1, Ad) = {max_ad:e}")),
                            );
                        }
                        (Err(e), _) => point.rows.push(row("bound").omega(&ol).error(e)),
                        (_, Err(e)) => point.rows.push(row("bound").omega(&ol).error(e)),
                    }
                    timed(&mut point.rows, start);
                    point
                })
                .collect();
            points
        })
        .collect();
    let mut points: Vec<Point> = computed.into_iter().flatten().collect();
    let shape = |n: u64, c: u64| {
        let (n, c) = (n as f64, c as f64);
        n.powf(1.0 + eps) * c.powf(eps) + n.powf(eps) * c.powf(0.5 + eps)
    };
    let mut levels: Vec<u64> = points
        .iter()
        .filter(|p| p.bound.is_finite())
        .map(|p| p.level)
        .collect();
    levels.sort_unstable();
    levels.dedup();
    let mut blocks = Vec::new();
    if levels.len() < 2 {
        let row = ReportRow::new(k, "fit").skipped("fewer than two admissible levels");
        blocks.push((vec![row], None));
    } else {
        let cutoff = levels[(levels.len() - 1) / 2];
        let constant = points
            .iter()
            .filter(|p| p.bound.is_finite() && p.level <= cutoff)
            .map(|p| p.bound / shape(p.level, p.conductor))
            .fold(0.0, f64::max);
        for p in &mut points {
            if p.bound.is_finite() {
                let rhs = constant * shape(p.level, p.conductor);
                let row = ReportRow::new(k, "bound <= C shape")
                    .at(Some(p.disc), Some(p.level))
                    .omega(&p.omega)
                    .label(if p.level <= cutoff { "fit" } else { "held out" })
                    .exact(p.bound, rhs, p.bound <= rhs * (1.0 + 1e-12))
                    .note(format!("C = {constant:e}, epsilon = {eps}"));
                p.rows.push(row);
            }
        }
        let meta = json!({"epsilon": eps, "constant": constant, "fit_levels_up_to": cutoff});
        blocks.push((Vec::new(), Some(meta)));
    }
    let mut out: Vec<Block> = points.into_iter().map(|p| (p.rows, None)).collect();
    out.extend(blocks);
    Ok(out)
}

fn ingest(cfg: &ExperimentConfig) -> Vec<Block> {
    let k = ExperimentKind::Ingest;
    cfg.coefficients
        .par_iter()
        .map(|path| {
            let start = Instant::now();
            let name = path.display().to_string();
            let row = |check: &str| ReportRow::new(k, check).label(&name);
            let table = match CoefficientTable::read(path) {
                Ok(t) => t,
                Err(e) => return (vec![row("parse").error(e)], None),
            };
            let at = |r: ReportRow| {
                r.at(None, Some(table.level))
                    .hecke(format!("weight {}", table.weight))
            };
            let mut rows = vec![at(row("parse"))
                .exact(1.0, 1.0, true)
                .note(format!("{} coefficients", table.coeffs.len()))];
            let expected_level = cfg.levels.first().copied();
            let expected_weight = (cfg.k > 1 || expected_level.is_some()).then_some(2 * cfg.k);
            rows.push(match table.expect(expected_level, expected_weight) {
                Ok(()) => at(row("header")).exact(1.0, 1.0, true),
                Err(e) => at(row("header")).error(e),
            });
            let n_max = cfg
                .n_max
                .unwrap_or_else(|| default_nmax(table.level, &[0.5, 1.5]))
                as u64;
            rows.push(match table.covers(n_max) {
                Ok(()) => at(row("coverage")).exact(n_max as f64, n_max as f64, true),
                Err(e) => at(row("coverage")).error(e),
            });
            rows.push(match table.check_hecke() {
                Ok(count) => at(row("hecke relations"))
                    .exact(1.0, 1.0, true)
                    .note(format!("{count} relations checked")),
                Err(e) => at(row("hecke relations")).error(e),
            });
            if table.weight == 2 {
                rows.push(
                    brandt_consistency(&table)
                        .map_or_else(|reason| at(row("brandt route")).skipped(reason), at),
                );
            }
            timed(&mut rows, start);
            (rows, None)
        })
        .collect()
}

/// Compares a weight-2 file with the Brandt eigenforms of its level on primes up to 100.
fn brandt_consistency(table: &CoefficientTable) -> Result<ReportRow, String> {
    let n = table.level;
    let cs = ClassSet::new(n).map_err(|e| e.to_string())?;
    let eig = EigenData::new(&cs, &eigen_primes(n, [])).map_err(|e| e.to_string())?;
    let bound = 100u64;
    let forms = Eigenform::all_from_brandt(&cs, &eig, bound).map_err(|e| e.to_string())?;
    let mine = table.eigenform();
    let compared: Vec<u64> = primes_up_to(bound)
        .into_iter()
        .filter(|p| mine.ap.contains_key(p))
        .collect();
    let best = forms
        .iter()
        .map(|f| {
            let dev = compared
                .iter()
                .map(|p| (f.ap[p] - mine.ap[p]).abs())
                .fold(0.0, f64::max);
            (dev, f.label.clone())
        })
        .min_by(|x, y| x.0.total_cmp(&y.0));
    let row = ReportRow::new(ExperimentKind::Ingest, "brandt route").label(&table.label);
    Ok(match best {
        Some((dev, label)) => row.compare_real(dev, 0.0, 0.0, 1e-9).note(format!(
            "closest Brandt form {label} over {} primes",
            compared.len()
        )),
        None => row
            .exact(1.0, 0.0, false)
            .note("no cusp forms at this level"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_class_numbers() {
        for (d, h) in [(-3, 1), (-4, 1), (-23, 3), (-47, 5), (-84, 4), (-1003, 4)] {
            assert_eq!(class_number_analytic(d).round() as i64, h, "D={d}");
        }
    }

    #[test]
    fn invalid_pairs_are_reported() {
        let mut cfg = ExperimentConfig::empty(ExperimentKind::VerifyAverage);
        cfg.pairs = vec![(-4, 5), (-4, 11)];
        let out = run(&cfg).unwrap();
        assert_eq!(out.rows[0].status, Status::Skipped);
        assert!(out.rows[0].note.contains("inert"));
        assert!(
            out.rows[1..].iter().all(|r| !r.status.is_failure()),
            "{:?}",
            out.rows
        );
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = (1..10).map(|n| (n as f64, (n as f64).powf(-0.5))).collect();
        assert!((log_slope(&pts) + 0.5).abs() < 1e-12);
    }
}
