//! Geometric side: irregular terms, the finite regular support and the regular orbital sum.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{self, Place};
use crate::heckemeasure::{i_tilde_measure, HeckeElement, HeckeError, LocalTorus};
use crate::qfield::{ClassCharacter, ClassGroup, Splitting};

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("|m| = {m} must be below k = {k}")]
    Domain { k: u32, m: i64 },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
}

/// A weight-2k configuration (N, E, Ω, f_p).
#[derive(Debug, Clone)]
pub struct GeomConfig<'a> {
    pub level: u64,
    pub pic: &'a ClassGroup,
    pub omega: &'a ClassCharacter,
    pub k: u32,
    pub hecke: HeckeElement,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularTerm {
    pub n: i64,
    /// ξ = n / (n + d) as (numerator, denominator).
    pub xi: (i64, i64),
    pub norm_count: u64,
    pub sigma: u64,
    pub theta_sum: Complex64,
    pub pkm: f64,
    /// |R_E(|n|/N)| σ(d, n+d) Σ Ω(D^{-1}a) P_{k,m}(ξ), before the global factor 4/|D|.
    pub term: Complex64,
    /// Exact value of `term` when it is rational.
    pub exact: Option<(i128, i128)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeomReport {
    pub i_tilde: Complex64,
    pub irregular: Complex64,
    pub regular_terms: Vec<RegularTerm>,
    pub regular: Complex64,
    pub total: Complex64,
}

/// P_{k,m}(ξ) = (1 − ξ)^{1−k} Σ_i C(k+m−1, i) C(k−m−1, i) ξ^i, exactly.
/// For m = 0 this is the Legendre polynomial P_{k−1}((1 + ξ)/(1 − ξ)).
pub fn pkm_exact(k: u32, m: i64, xi: Ratio<i128>) -> Result<Ratio<i128>, GeomError> {
    if m.unsigned_abs() >= k as u64 {
        return Err(GeomError::Domain { k, m });
    }
    let k = k as i64;
    let mut sum = Ratio::from_integer(0);
    let mut pow = Ratio::from_integer(1);
    for i in 0..k {
        sum += pow * arith::binomial(k + m - 1, i) * arith::binomial(k - m - 1, i);
        pow *= xi;
    }
    let base = Ratio::from_integer(1) - xi;
    Ok(sum / base.pow((k - 1) as i32))
}

pub fn pkm_eval(k: u32, m: i64, xi: f64) -> Result<f64, GeomError> {
    if m.unsigned_abs() >= k as u64 {
        return Err(GeomError::Domain { k, m });
    }
    let k = k as i64;
    let sum: f64 = (0..k)
        .map(|i| {
            (arith::binomial(k + m - 1, i) * arith::binomial(k - m - 1, i)) as f64
                * xi.powi(i as i32)
        })
        .sum();
    Ok(sum * (1.0 - xi).powi(1 - k as i32))
}

/// |I(f_p)|: p^deg for a Hecke element supported on cosets up to index deg.
pub fn support_norm(f: &HeckeElement) -> u64 {
    f.q.pow(f.degree() as u32)
}

impl GeomConfig<'_> {
    pub fn d(&self) -> u64 {
        self.pic.field.d_abs
    }

    /// d · c(Ω) · |I(f_p)|.
    pub fn threshold(&self) -> u64 {
        self.d() * self.omega.conductor * support_norm(&self.hecke)
    }

    pub fn is_stable(&self) -> bool {
        self.level >= self.threshold()
    }

    /// Local data of (E, Ω) at the Hecke prime.
    pub fn local_torus(&self) -> LocalTorus {
        let p = self.hecke.q;
        let splitting = self.pic.field.splitting(p);
        let zeta = match splitting {
            Splitting::Inert => Complex64::new(1.0, 0.0),
            _ => self
                .omega
                .value(self.pic.prime_class(p).expect("prime ideal above p")),
        };
        LocalTorus {
            p,
            splitting,
            zeta,
            conductor_exp: 0,
        }
    }
}

/// n ∈ N·Z with −d c |I| < n < 0 and (n(n + d), D)_p = 1 for every p | D.
pub fn regular_support(cfg: &GeomConfig) -> Vec<i64> {
    let d = cfg.d() as i64;
    let disc = cfg.pic.field.disc as i128;
    let bound = cfg.threshold() as i64;
    let level = cfg.level as i64;
    let ramified: Vec<u64> = arith::factor(cfg.d()).into_iter().map(|(p, _)| p).collect();
    (1..)
        .map(|j| -j * level)
        .take_while(|&n| n > -bound)
        .filter(|&n| {
            let s = n + d;
            s != 0
                && ramified.iter().all(|&p| {
                    arith::hilbert_symbol(n as i128 * s as i128, disc, Place::Finite(p)) == 1
                })
        })
        .collect()
}

/// Terms of the regular sum for f_p the identity.
pub fn regular_sum(cfg: &GeomConfig) -> Result<Vec<RegularTerm>, GeomError> {
    let support = regular_support(cfg);
    if support.is_empty() {
        return Ok(Vec::new());
    }
    if cfg.pic.field.disc % 2 == 0 {
        return Err(GeomError::Unsupported(format!(
            "regular terms with E ramified at 2 (D = {})",
            cfg.pic.field.disc
        )));
    }
    if cfg.hecke.degree() > 0 {
        return Err(GeomError::Unsupported(
            "regular terms with a nontrivial Hecke element".into(),
        ));
    }
    if cfg.omega.conductor != 1 {
        return Err(GeomError::Unsupported(
            "regular terms with ramified Ω".into(),
        ));
    }
    let d = cfg.d() as i64;
    let m = cfg.omega.weight_m;
    let different = cfg.pic.different_class();
    let inv_diff = cfg.pic.inv(different);
    let c0 = cfg.hecke.coeffs[0];
    let rational_omega = cfg.omega.is_trivial();
    support
        .into_iter()
        .map(|n| {
            let s = n + d;
            let norm_count = cfg.pic.ideal_count(n.unsigned_abs() / cfg.level);
            let sigma = arith::common_divisor_count(cfg.d(), s as u64);
            let classes = cfg.pic.ideals_of_norm(s as u64);
            let theta_sum: Complex64 = classes
                .iter()
                .map(|&(cls, cnt)| cfg.omega.value(cfg.pic.mul(inv_diff, cls)) * cnt as f64)
                .sum();
            let xi = Ratio::new(n as i128, s as i128);
            let pkm = pkm_exact(cfg.k, m, xi)?;
            let pkm_f = *pkm.numer() as f64 / *pkm.denom() as f64;
            let term = c0 * theta_sum * (norm_count * sigma) as f64 * pkm_f;
            let exact = (rational_omega && c0.im == 0.0 && c0.re == c0.re.round()).then(|| {
                let count: i128 = classes.iter().map(|&(_, c)| c as i128).sum();
                let v = pkm * count * (norm_count * sigma) as i128 * c0.re as i128;
                (*v.numer(), *v.denom())
            });
            Ok(RegularTerm {
                n,
                xi: (n, s),
                norm_count,
                sigma,
                theta_sum,
                pkm: pkm_f,
                term,
                exact,
            })
        })
        .collect()
}

/// 4 L(1, η) L_{S(Ω)}(1, η) / √(c(Ω) d) · Ĩ(f_p), completed L(1, η) = h/(u√d).
pub fn irregular_terms(cfg: &GeomConfig, i_tilde: Complex64) -> Complex64 {
    let field = &cfg.pic.field;
    let l1 = field.completed_l1(cfg.pic.h());
    // S(Ω) is empty for class-group characters
    let ls = 1.0;
    // the δ(N) contribution vanishes for N > 1
    let delta_n = 0.0;
    let sign = if cfg.k % 2 == 1 { 1.0 } else { -1.0 };
    let delta_omega2 = if cfg.omega.is_quadratic_or_trivial() {
        1.0
    } else {
        0.0
    };
    i_tilde * 4.0 * l1 * ls / ((cfg.omega.conductor * cfg.d()) as f64).sqrt()
        * (1.0 + delta_omega2 * delta_n * sign)
}

/// Irregular plus regular contributions, with Ĩ computed as ∫ f̂ dμ_{p,E,Ω} / L(1, η_p).
pub fn geometric_total(cfg: &GeomConfig, tol: f64) -> Result<GeomReport, GeomError> {
    let i_tilde = i_tilde_measure(&cfg.hecke, &cfg.local_torus(), tol)?;
    let irregular = irregular_terms(cfg, i_tilde);
    let regular_terms = regular_sum(cfg)?;
    let factor = 4.0 / cfg.d() as f64;
    let regular: Complex64 = regular_terms.iter().map(|t| t.term).sum::<Complex64>() * factor;
    Ok(GeomReport {
        i_tilde,
        irregular,
        regular,
        total: irregular + regular,
        regular_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::QuadField;

    fn r(n: i128, d: i128) -> Ratio<i128> {
        Ratio::new(n, d)
    }

    #[test]
    fn pkm_examples() {
        for k in 1..6u32 {
            for m in -(k as i64 - 1)..k as i64 {
                assert_eq!(pkm_exact(k, m, r(0, 1)).unwrap(), r(1, 1));
            }
        }
        assert_eq!(pkm_exact(1, 0, r(-7, 3)).unwrap(), r(1, 1));
        assert_eq!(pkm_exact(2, 0, r(-1, 1)).unwrap(), r(0, 1));
        assert_eq!(pkm_exact(2, 0, r(-1, 3)).unwrap(), r(1, 2));
        // P_2(x) = (3x² − 1)/2 at x = (1 + ξ)/(1 − ξ) = 1/2
        assert_eq!(pkm_exact(3, 0, r(-1, 3)).unwrap(), r(-1, 8));
        assert!(matches!(
            pkm_exact(2, 2, r(0, 1)),
            Err(GeomError::Domain { .. })
        ));
        let exact = pkm_exact(4, 1, r(-5, 18)).unwrap();
        let float = pkm_eval(4, 1, -5.0 / 18.0).unwrap();
        assert!((float - *exact.numer() as f64 / *exact.denom() as f64).abs() < 1e-14);
    }

    #[test]
    fn minus_23_level_5_support() {
        let pic = ClassGroup::new(QuadField::new(-23).unwrap());
        let chars = pic.characters();
        let cfg = GeomConfig {
            level: 5,
            pic: &pic,
            omega: &chars[0],
            k: 1,
            hecke: HeckeElement::identity(2),
        };
        assert_eq!(regular_support(&cfg), vec![-5, -10, -15, -20]);
        let terms = regular_sum(&cfg).unwrap();
        let values: Vec<i128> = terms.iter().map(|t| t.exact.unwrap().0).collect();
        assert_eq!(values, vec![6, 4, 8, 6]);
        let nontrivial = GeomConfig {
            omega: &chars[1],
            ..cfg.clone()
        };
        let b: Vec<f64> = regular_sum(&nontrivial)
            .unwrap()
            .iter()
            .map(|t| t.term.re)
            .collect();
        let expected = [0.0, -2.0, 2.0, -3.0];
        for (x, y) in b.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn stability_means_empty_support() {
        let pic = ClassGroup::new(QuadField::new(-23).unwrap());
        let chars = pic.characters();
        let cfg = GeomConfig {
            level: 37,
            pic: &pic,
            omega: &chars[0],
            k: 1,
            hecke: HeckeElement::identity(2),
        };
        assert!(cfg.is_stable());
        assert!(regular_support(&cfg).is_empty());
        let rep = geometric_total(&cfg, 1e-13).unwrap();
        assert_eq!(rep.total, rep.irregular);
    }

    #[test]
    fn irregular_is_linear_in_i_tilde() {
        let pic = ClassGroup::new(QuadField::new(-4).unwrap());
        let chars = pic.characters();
        let cfg = GeomConfig {
            level: 11,
            pic: &pic,
            omega: &chars[0],
            k: 1,
            hecke: HeckeElement::identity(3),
        };
        let one = irregular_terms(&cfg, Complex64::new(1.0, 0.0));
        let two = irregular_terms(&cfg, Complex64::new(2.0, 0.0));
        assert!((two - one * 2.0).norm() < 1e-15);
        // 4 · (1/(2·2)) / 2
        assert!((one.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn even_discriminant_below_stability_is_refused() {
        let pic = ClassGroup::new(QuadField::new(-20).unwrap());
        let chars = pic.characters();
        let cfg = GeomConfig {
            level: 3,
            pic: &pic,
            omega: &chars[0],
            k: 1,
            hecke: HeckeElement::identity(7),
        };
        if !regular_support(&cfg).is_empty() {
            assert!(matches!(regular_sum(&cfg), Err(GeomError::Unsupported(_))));
        }
    }
}
