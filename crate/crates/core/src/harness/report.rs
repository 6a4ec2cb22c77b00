//! Report rows, CSV and JSON output.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::{ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not run: the configuration is outside the supported domain or an input is missing.
    Skipped,
    /// A module error was raised while computing the row.
    Error,
    /// Reported without a tolerance.
    Info,
}

impl Status {
    /// Whether this row makes the run fail.
    pub fn is_failure(self) -> bool {
        matches!(self, Status::Fail | Status::Error)
    }
}

/// One compared quantity: `lhs` against `rhs` with relative tolerance `tol` and absolute floor `abs_floor`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub experiment: ExperimentKind,
    pub check: String,
    pub disc: Option<i64>,
    pub level: Option<u64>,
    pub omega: String,
    pub hecke: String,
    pub label: String,
    pub lhs: Option<Complex64>,
    pub rhs: Option<Complex64>,
    pub abs_dev: Option<f64>,
    pub rel_dev: Option<f64>,
    pub tol: f64,
    pub abs_floor: f64,
    pub status: Status,
    pub note: String,
    #[serde(skip)]
    pub seconds: f64,
}

fn deviations(lhs: Complex64, rhs: Complex64) -> (f64, f64) {
    let abs = (lhs - rhs).norm();
    let scale = lhs.norm().max(rhs.norm());
    let rel = if scale == 0.0 { 0.0 } else { abs / scale };
    (abs, rel)
}

fn gate(abs: f64, rel: f64, tol: f64, abs_floor: f64) -> Status {
    if rel <= tol || abs <= abs_floor {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl ReportRow {
    pub fn new(experiment: ExperimentKind, check: impl Into<String>) -> Self {
        Self {
            experiment,
            check: check.into(),
            disc: None,
            level: None,
            omega: String::new(),
            hecke: String::new(),
            label: String::new(),
            lhs: None,
            rhs: None,
            abs_dev: None,
            rel_dev: None,
            tol: 0.0,
            abs_floor: 0.0,
            status: Status::Info,
            note: String::new(),
            seconds: 0.0,
        }
    }

    pub fn at(mut self, disc: Option<i64>, level: Option<u64>) -> Self {
        self.disc = disc;
        self.level = level;
        self
    }

    pub fn omega(mut self, omega: impl Into<String>) -> Self {
        self.omega = omega.into();
        self
    }

    pub fn hecke(mut self, hecke: impl Into<String>) -> Self {
        self.hecke = hecke.into();
        self
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Compares two complex values.
    pub fn compare(mut self, lhs: Complex64, rhs: Complex64, tol: f64, abs_floor: f64) -> Self {
        let (abs, rel) = deviations(lhs, rhs);
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self.abs_dev = Some(abs);
        self.rel_dev = Some(rel);
        self.tol = tol;
        self.abs_floor = abs_floor;
        self.status = if abs.is_nan() {
            Status::Fail
        } else {
            gate(abs, rel, tol, abs_floor)
        };
        self
    }

    pub fn compare_real(self, lhs: f64, rhs: f64, tol: f64, abs_floor: f64) -> Self {
        self.compare(
            Complex64::new(lhs, 0.0),
            Complex64::new(rhs, 0.0),
            tol,
            abs_floor,
        )
    }

    /// An exact comparison, e.g. of rationals or integers rendered as text.
    pub fn exact(mut self, lhs: f64, rhs: f64, equal: bool) -> Self {
        self = self.compare_real(lhs, rhs, 0.0, 0.0);
        self.status = if equal { Status::Pass } else { Status::Fail };
        self
    }

    /// A value reported without a tolerance.
    pub fn value(mut self, v: Complex64) -> Self {
        self.lhs = Some(v);
        self.status = Status::Info;
        self
    }

    pub fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.note = reason.into();
        self
    }

    pub fn error(mut self, err: impl std::fmt::Display) -> Self {
        self.status = Status::Error;
        self.note = err.to_string();
        self
    }

    /// Whether the stored status agrees with the stored values and tolerances.
    pub fn is_consistent(&self) -> bool {
        match (self.status, self.lhs, self.rhs) {
            (Status::Pass | Status::Fail, Some(l), Some(r))
                if self.tol > 0.0 || self.abs_floor > 0.0 =>
            {
                let (abs, rel) = deviations(l, r);
                gate(abs, rel, self.tol, self.abs_floor) == self.status
                    && Some(abs) == self.abs_dev
                    && Some(rel) == self.rel_dev
            }
            (Status::Pass | Status::Fail, Some(_), Some(_)) => true,
            (Status::Pass | Status::Fail, _, _) => false,
            _ => true,
        }
    }
}

fn opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&format!("{x:e}")),
        None => s.serialize_str(""),
    }
}

/// Flat CSV record: complex values split into real and imaginary columns, floats in round-trip exponent form.
#[derive(Serialize)]
struct CsvRecord<'a> {
    experiment: &'a str,
    check: &'a str,
    disc: Option<i64>,
    level: Option<u64>,
    omega: &'a str,
    hecke: &'a str,
    label: &'a str,
    #[serde(serialize_with = "opt_f64")]
    lhs_re: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    lhs_im: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    rhs_re: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    rhs_im: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    abs_dev: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    rel_dev: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    tol: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    abs_floor: Option<f64>,
    status: Status,
    note: &'a str,
}

impl<'a> From<&'a ReportRow> for CsvRecord<'a> {
    fn from(r: &'a ReportRow) -> Self {
        Self {
            experiment: r.experiment.name(),
            check: &r.check,
            disc: r.disc,
            level: r.level,
            omega: &r.omega,
            hecke: &r.hecke,
            label: &r.label,
            lhs_re: r.lhs.map(|z| z.re),
            lhs_im: r.lhs.map(|z| z.im),
            rhs_re: r.rhs.map(|z| z.re),
            rhs_im: r.rhs.map(|z| z.im),
            abs_dev: r.abs_dev,
            rel_dev: r.rel_dev,
            tol: Some(r.tol),
            abs_floor: Some(r.abs_floor),
            status: r.status,
            note: &r.note,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRecord::from(r))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn csv_string(rows: &[ReportRow]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Conventions fixed by the implementation, written into every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub inner_product: &'static str,
    pub brandt_matrix: &'static str,
    pub period_scale: &'static str,
    pub l_normalization: &'static str,
    pub petersson: &'static str,
    pub smoothing_kernel: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    inner_product: "<phi, psi> = sum_x phi(x) conj(psi(x)) / w_x, so |delta_x|^2 = 1/w_x",
    brandt_matrix: "B(m)_xy = theta_xy(m) / (2 w_y)",
    period_scale: "spectral sums are multiplied by 4/(u^2 |D|) before comparison with the geometric side",
    l_normalization: "unitary, centre 1/2; Lambda(s) = Q^(s/2) prod Gamma_R(s + mu_j) L(s)",
    petersson: "(f, f) = (N / 2^(2k)) Gamma_inf(1) L(1, Ad f)",
    smoothing_kernel: "Mellin kernel e^(b w)/w on Re w = 1.25, trapezoid step 0.05; error = |Lambda_0 - Lambda_0.35|",
};

/// Full JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct JsonReport<'a> {
    pub experiment: ExperimentKind,
    pub config: &'a ExperimentConfig,
    pub jobs: usize,
    pub seed: u64,
    pub conventions: Conventions,
    pub metadata: &'a [serde_json::Value],
    pub summary: Summary,
    pub rows: Vec<JsonRow<'a>>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonRow<'a> {
    #[serde(flatten)]
    pub row: &'a ReportRow,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub error: usize,
    pub info: usize,
}

impl Summary {
    pub fn of(rows: &[ReportRow]) -> Self {
        let mut s = Self::default();
        for r in rows {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Skipped => s.skipped += 1,
                Status::Error => s.error += 1,
                Status::Info => s.info += 1,
            }
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.fail == 0 && self.error == 0
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} pass, {} fail, {} error, {} skipped, {} info",
            self.pass, self.fail, self.error, self.skipped, self.info
        )
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gating_and_consistency() {
        let r =
            ReportRow::new(ExperimentKind::Geometric, "x").compare_real(1.0, 1.0 + 1e-9, 1e-8, 0.0);
        assert_eq!(r.status, Status::Pass);
        assert!(r.is_consistent());
        let r = ReportRow::new(ExperimentKind::Geometric, "x").compare_real(1.0, 1.1, 1e-8, 0.0);
        assert_eq!(r.status, Status::Fail);
        let r =
            ReportRow::new(ExperimentKind::Geometric, "x").compare_real(1e-16, -2e-16, 1e-8, 1e-12);
        assert_eq!(r.status, Status::Pass);
        let mut bad = r.clone();
        bad.status = Status::Fail;
        assert!(!bad.is_consistent());
        let r =
            ReportRow::new(ExperimentKind::Geometric, "x").compare_real(f64::NAN, 0.0, 1.0, 1.0);
        assert_eq!(r.status, Status::Fail);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            ReportRow::new(ExperimentKind::VerifyAverage, "delta=eigen")
                .at(Some(-4), Some(11))
                .omega("[0]")
                .compare(
                    Complex64::new(0.5, 0.0),
                    Complex64::new(0.5, 1e-17),
                    1e-10,
                    0.0,
                ),
            ReportRow::new(ExperimentKind::VerifyAverage, "afe").skipped("no file, \"quoted\""),
        ];
        let text = csv_string(&rows).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("experiment,check,disc,level,omega,hecke,label,lhs_re,lhs_im"));
        assert!(lines.next().unwrap().contains("5e-1,0e0,5e-1,1e-17"));
        assert!(lines.next().unwrap().contains("skipped"));
        let parsed: Vec<csv::StringRecord> = csv::Reader::from_reader(text.as_bytes())
            .records()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(&parsed[1][16], "no file, \"quoted\"");
    }
}
