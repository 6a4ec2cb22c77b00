//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::arith::{factor, is_fundamental_discriminant, is_squarefree, kronecker};
use crate::heckemeasure::HeckeElement;
use crate::qfield::{ClassCharacter, ClassGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Classgroup,
    Classset,
    VerifyAverage,
    Geometric,
    MeasureCheck,
    Equidist,
    Subconvexity,
    Ingest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classgroup => "classgroup",
            Self::Classset => "classset",
            Self::VerifyAverage => "verify-average",
            Self::Geometric => "geometric",
            Self::MeasureCheck => "measure-check",
            Self::Equidist => "equidist",
            Self::Subconvexity => "subconvexity",
            Self::Ingest => "ingest",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which class-group characters Ω to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OmegaSelector {
    Trivial,
    #[default]
    All,
    Index(usize),
}

impl OmegaSelector {
    pub fn select(self, pic: &ClassGroup) -> Vec<ClassCharacter> {
        let chars = pic.characters();
        match self {
            Self::Trivial => chars.into_iter().take(1).collect(),
            Self::All => chars,
            Self::Index(i) => chars.into_iter().nth(i).into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HeckeKind {
    #[default]
    Identity,
    Tp,
    Basis(usize),
}

/// A Hecke element f_p at the prime p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeChoice {
    pub p: u64,
    #[serde(default)]
    pub element: HeckeKind,
}

impl HeckeChoice {
    pub fn identity(p: u64) -> Self {
        Self {
            p,
            element: HeckeKind::Identity,
        }
    }

    pub fn tp(p: u64) -> Self {
        Self {
            p,
            element: HeckeKind::Tp,
        }
    }

    pub fn element(&self) -> HeckeElement {
        match self.element {
            HeckeKind::Identity => HeckeElement::identity(self.p),
            HeckeKind::Tp => HeckeElement::tp(self.p),
            HeckeKind::Basis(n) => HeckeElement::basis(self.p, n),
        }
    }

    pub fn label(&self) -> String {
        match self.element {
            HeckeKind::Identity => "1".to_string(),
            HeckeKind::Tp => format!("T_{}", self.p),
            HeckeKind::Basis(n) => format!("f_{}({})", self.p, n),
        }
    }
}

/// All admissible pairs with |D| ≤ max_disc and N ≤ max_level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub max_disc: u64,
    pub max_level: u64,
}

/// One experiment run, read from a JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    /// Explicit (D, N) configurations, run in the given order.
    #[serde(default)]
    pub pairs: Vec<(i64, u64)>,
    /// Cartesian product D × N, appended after `pairs`.
    #[serde(default)]
    pub discriminants: Vec<i64>,
    #[serde(default)]
    pub levels: Vec<u64>,
    #[serde(default)]
    pub grid: Option<Grid>,
    /// Inclusive discriminant range for class-group scans.
    #[serde(default)]
    pub disc_range: Option<(i64, i64)>,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default)]
    pub omega: OmegaSelector,
    /// Hecke elements; T_p is run only where the configuration is stable for it.
    #[serde(default = "default_hecke")]
    pub hecke: Vec<HeckeChoice>,
    /// Primes q for the measure suite, or the equidistribution prime.
    #[serde(default)]
    pub primes: Vec<u64>,
    /// Degree bound for measure identities, or the coefficient bound for ingestion.
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Run the independent L-function route where available.
    #[serde(default)]
    pub afe: bool,
    /// Eigenform coefficient files (weight > 2, or ingestion).
    #[serde(default)]
    pub coefficients: Vec<PathBuf>,
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

fn default_k() -> u32 {
    1
}

fn default_hecke() -> Vec<HeckeChoice> {
    vec![HeckeChoice::identity(2)]
}

impl ExperimentConfig {
    pub fn empty(kind: ExperimentKind) -> Self {
        Self {
            experiment: Some(kind),
            pairs: Vec::new(),
            discriminants: Vec::new(),
            levels: Vec::new(),
            grid: None,
            disc_range: None,
            k: 1,
            omega: OmegaSelector::All,
            hecke: default_hecke(),
            primes: Vec::new(),
            n_max: None,
            tol: None,
            afe: false,
            coefficients: Vec::new(),
            interval: None,
            epsilon: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        // coefficient paths are relative to the config file
        if let Some(dir) = path.parent() {
            for p in &mut cfg.coefficients {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// (D, N) pairs in run order: explicit pairs, then the product, then the grid.
    pub fn configurations(&self) -> Vec<(i64, u64)> {
        let mut out = self.pairs.clone();
        for &d in &self.discriminants {
            for &n in &self.levels {
                out.push((d, n));
            }
        }
        if let Some(g) = self.grid {
            for d in (1..=g.max_disc as i64).map(|d| -d) {
                if !is_fundamental_discriminant(d) {
                    continue;
                }
                for n in 2..=g.max_level {
                    if admissible(d, n).is_ok() {
                        out.push((d, n));
                    }
                }
            }
        }
        out
    }
}

/// Checks the standing assumptions: D fundamental, N squarefree with an odd number of prime factors,
/// every p | N inert in Q(√D).
pub fn admissible(disc: i64, level: u64) -> Result<(), String> {
    if disc >= 0 || !is_fundamental_discriminant(disc) {
        return Err(format!("{disc} is not a negative fundamental discriminant"));
    }
    if level < 2 || !is_squarefree(level) {
        return Err(format!("level {level} is not squarefree"));
    }
    let primes = factor(level);
    if primes.len().is_multiple_of(2) {
        return Err(format!("level {level} has an even number of prime factors"));
    }
    if let Some((p, _)) = primes
        .iter()
        .find(|&&(p, _)| kronecker(disc, p as i64) != -1)
    {
        return Err(format!("{p} is not inert in Q(√{disc})"));
    }
    Ok(())
}
