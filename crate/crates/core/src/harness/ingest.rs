//! Eigenform coefficient files.
//!
//! Format: optional `#` comment lines, one header line `level N weight W [label L]`, then one `n,a_n`
//! line per coefficient with integer a_n. Coefficients need not be contiguous, but every prime up to
//! the requested bound must be present.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::HarnessError;
use crate::arith::{factor, primes_up_to};
use crate::lfunc::Eigenform;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("no header line `level N weight W`")]
    MissingHeader,
    #[error("line {line}: header declares level {found}, expected {expected}")]
    LevelMismatch {
        line: usize,
        found: u64,
        expected: u64,
    },
    #[error("line {line}: header declares weight {found}, expected {expected}")]
    WeightMismatch {
        line: usize,
        found: u32,
        expected: u32,
    },
    #[error("line {line}: duplicate coefficient a_{n}")]
    Duplicate { line: usize, n: u64 },
    #[error("a_{missing} is missing: primes are covered up to {covered}, but n_max = {n_max}")]
    Coverage {
        covered: u64,
        missing: u64,
        n_max: u64,
    },
    #[error("line {line}: a_{n} = {value} breaks the Hecke relations (expected {expected})")]
    Hecke {
        line: usize,
        n: u64,
        value: i128,
        expected: i128,
    },
    #[error("line {line}: |a_{p}| = {value} exceeds 2 p^((w-1)/2)")]
    Deligne { line: usize, p: u64, value: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub level: u64,
    pub weight: u32,
    pub label: String,
    pub header_line: usize,
    /// n ↦ (a_n, source line).
    pub coeffs: BTreeMap<u64, (i64, usize)>,
}

fn parse_header(line: usize, text: &str) -> Result<(u64, u32, String), IngestError> {
    let bad = |msg: &str| IngestError::Malformed {
        line,
        msg: msg.to_string(),
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut level = None;
    let mut weight = None;
    let mut label = None;
    for pair in tokens.chunks(2) {
        let [key, value] = pair else {
            return Err(bad("header keys and values must come in pairs"));
        };
        match *key {
            "level" => {
                level = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| bad("level is not a positive integer"))?,
                )
            }
            "weight" => {
                weight = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| bad("weight is not a positive integer"))?,
                )
            }
            "label" => label = Some(value.to_string()),
            other => return Err(bad(&format!("unknown header key `{other}`"))),
        }
    }
    match (level, weight) {
        (Some(l), Some(w)) if l > 0 && w > 0 => {
            Ok((l, w, label.unwrap_or_else(|| format!("{l}.{w}"))))
        }
        _ => Err(bad("header needs `level N weight W`")),
    }
}

impl CoefficientTable {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut header: Option<(u64, u32, String, usize)> = None;
        let mut coeffs = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if header.is_none() {
                if !t.starts_with("level") {
                    return Err(IngestError::MissingHeader);
                }
                let (l, w, label) = parse_header(line, t)?;
                header = Some((l, w, label, line));
                continue;
            }
            let (n, a) = t.split_once(',').ok_or_else(|| IngestError::Malformed {
                line,
                msg: format!("expected `n,a_n`, got `{t}`"),
            })?;
            let n: u64 = n.trim().parse().map_err(|_| IngestError::Malformed {
                line,
                msg: format!("index `{}` is not a positive integer", n.trim()),
            })?;
            let a: i64 = a.trim().parse().map_err(|_| IngestError::Malformed {
                line,
                msg: format!("coefficient `{}` is not an integer", a.trim()),
            })?;
            if n == 0 {
                return Err(IngestError::Malformed {
                    line,
                    msg: "index 0".into(),
                });
            }
            if coeffs.insert(n, (a, line)).is_some() {
                return Err(IngestError::Duplicate { line, n });
            }
        }
        let (level, weight, label, header_line) = header.ok_or(IngestError::MissingHeader)?;
        if let Some(&(a1, line)) = coeffs.get(&1) {
            if a1 != 1 {
                return Err(IngestError::Hecke {
                    line,
                    n: 1,
                    value: a1 as i128,
                    expected: 1,
                });
            }
        }
        Ok(Self {
            level,
            weight,
            label,
            header_line,
            coeffs,
        })
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|source| HarnessError::Ingest {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn expect(&self, level: Option<u64>, weight: Option<u32>) -> Result<(), IngestError> {
        let line = self.header_line;
        if let Some(expected) = level.filter(|&l| l != self.level) {
            return Err(IngestError::LevelMismatch {
                line,
                found: self.level,
                expected,
            });
        }
        if let Some(expected) = weight.filter(|&w| w != self.weight) {
            return Err(IngestError::WeightMismatch {
                line,
                found: self.weight,
                expected,
            });
        }
        Ok(())
    }

    /// Every prime up to n_max has a coefficient.
    pub fn covers(&self, n_max: u64) -> Result<(), IngestError> {
        let primes = primes_up_to(n_max);
        match primes.iter().position(|p| !self.coeffs.contains_key(p)) {
            None => Ok(()),
            Some(i) => Err(IngestError::Coverage {
                covered: if i == 0 { 1 } else { primes[i - 1] },
                missing: primes[i],
                n_max,
            }),
        }
    }

    /// Checks multiplicativity, the prime-power recursion and the Deligne bound on the coefficients present.
    /// Returns the number of relations checked.
    pub fn check_hecke(&self) -> Result<usize, IngestError> {
        let w1 = self.weight - 1;
        let get = |n: u64| self.coeffs.get(&n).map(|&(a, _)| a as i128);
        let mut checked = 0;
        for (&n, &(a, line)) in &self.coeffs {
            if n == 1 {
                continue;
            }
            let f = factor(n);
            let expected = if f.len() > 1 {
                let (p, e) = f[0];
                let pe = p.pow(e);
                get(pe).zip(get(n / pe)).map(|(x, y)| x * y)
            } else {
                let (p, e) = f[0];
                if e == 1 {
                    let bound = 2.0 * (p as f64).powf(w1 as f64 / 2.0);
                    if (a as f64).abs() > bound + 1e-9 {
                        return Err(IngestError::Deligne { line, p, value: a });
                    }
                    None
                } else {
                    let bad = self.level.is_multiple_of(p);
                    let prev = get(p.pow(e - 1));
                    let prev2 = if e == 2 { Some(1) } else { get(p.pow(e - 2)) };
                    get(p).zip(prev).zip(prev2).map(|((ap, x), y)| {
                        if bad {
                            ap * x
                        } else {
                            ap * x - (p as i128).pow(w1) * y
                        }
                    })
                }
            };
            if let Some(expected) = expected {
                checked += 1;
                if expected != a as i128 {
                    return Err(IngestError::Hecke {
                        line,
                        n,
                        value: a as i128,
                        expected,
                    });
                }
            }
        }
        Ok(checked)
    }

    pub fn eigenform(&self) -> Eigenform {
        Eigenform {
            level: self.level,
            weight: self.weight,
            label: self.label.clone(),
            ap: self
                .coeffs
                .iter()
                .filter(|(&n, _)| factor(n).len() == 1 && factor(n)[0].1 == 1)
                .map(|(&p, &(a, _))| (p, a as f64))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEVEL11: &str = "# level 11\nlevel 11 weight 2 label 11a\n1,1\n2,-2\n3,-1\n4,2\n5,1\n6,2\n7,-2\n8,0\n9,-2\n10,-2\n11,1\n12,-2\n13,4\n";

    #[test]
    fn accepts_a_well_formed_file() {
        let t = CoefficientTable::parse(LEVEL11).unwrap();
        assert_eq!((t.level, t.weight, t.label.as_str()), (11, 2, "11a"));
        t.expect(Some(11), Some(2)).unwrap();
        t.covers(13).unwrap();
        assert!(t.check_hecke().unwrap() >= 6);
        assert_eq!(t.eigenform().ap[&2], -2.0);
    }

    #[test]
    fn reports_line_numbers() {
        let text = LEVEL11.replace("6,2\n", "6,two\n");
        assert!(matches!(
            CoefficientTable::parse(&text),
            Err(IngestError::Malformed { line: 8, .. })
        ));
        let text = LEVEL11.replace("6,2\n", "6,3\n");
        let t = CoefficientTable::parse(&text).unwrap();
        assert_eq!(
            t.check_hecke(),
            Err(IngestError::Hecke {
                line: 8,
                n: 6,
                value: 3,
                expected: 2
            })
        );
        let text = LEVEL11.replace("4,2\n", "4,3\n");
        let t = CoefficientTable::parse(&text).unwrap();
        assert!(matches!(
            t.check_hecke(),
            Err(IngestError::Hecke { line: 6, n: 4, .. })
        ));
        let text = LEVEL11.replace("5,1\n", "5,1\n5,1\n");
        assert!(matches!(
            CoefficientTable::parse(&text),
            Err(IngestError::Duplicate { line: 8, n: 5 })
        ));
    }

    #[test]
    fn header_and_coverage_errors() {
        let t = CoefficientTable::parse(LEVEL11).unwrap();
        assert_eq!(
            t.expect(Some(13), None),
            Err(IngestError::LevelMismatch {
                line: 2,
                found: 11,
                expected: 13
            })
        );
        assert!(matches!(
            t.expect(None, Some(4)),
            Err(IngestError::WeightMismatch { .. })
        ));
        assert_eq!(
            t.covers(30),
            Err(IngestError::Coverage {
                covered: 13,
                missing: 17,
                n_max: 30
            })
        );
        assert_eq!(
            CoefficientTable::parse("1,1\n"),
            Err(IngestError::MissingHeader)
        );
        assert!(matches!(
            CoefficientTable::parse("level x weight 2\n"),
            Err(IngestError::Malformed { line: 1, .. })
        ));
        let t = CoefficientTable::parse("level 11 weight 2\n2,-5\n").unwrap();
        assert!(matches!(
            t.check_hecke(),
            Err(IngestError::Deligne { p: 2, .. })
        ));
    }
}
