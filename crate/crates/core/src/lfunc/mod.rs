//! L-series from Euler products and their evaluation by a smoothed approximate functional equation.

pub mod afe;
pub mod gamma;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{factor, kronecker, primes_up_to};
use crate::qfield::{ClassCharacter, ClassGroup, Splitting};
use crate::quatorder::ClassSet;
use crate::spectralside::EigenData;

pub use afe::{AfeValue, FeCheck};

#[derive(Debug, Error)]
pub enum LError {
    #[error("missing a_{0}")]
    MissingCoefficient(u64),
    #[error("level {level} and weight {weight} are not supported: {reason}")]
    Unsupported {
        level: u64,
        weight: u32,
        reason: String,
    },
    #[error("coefficient {n} is not multiplicative: {got} vs {expected}")]
    NotMultiplicative { n: u64, got: f64, expected: f64 },
    #[error("coefficient a_{n} = {value} violates the Deligne bound")]
    DeligneBound { n: u64, value: f64 },
    #[error("functional equation residual {residual:.3e} exceeds {tol:.1e} for {label}")]
    FunctionalEquation {
        label: String,
        residual: f64,
        tol: f64,
    },
    #[error(transparent)]
    Quat(#[from] crate::quatorder::QuatError),
}

/// Prime Hecke eigenvalues a_p (classical normalization) of a newform of weight `weight` on Γ0(level).
#[derive(Debug, Clone, Serialize)]
pub struct Eigenform {
    pub level: u64,
    pub weight: u32,
    pub label: String,
    pub ap: BTreeMap<u64, f64>,
}

impl Eigenform {
    /// Half the weight.
    pub fn k(&self) -> u32 {
        self.weight / 2
    }

    /// Largest prime p such that a_q is known for every prime q ≤ p.
    pub fn coverage(&self) -> u64 {
        let top = self.ap.keys().last().copied().unwrap_or(1);
        primes_up_to(top)
            .into_iter()
            .take_while(|p| self.ap.contains_key(p))
            .last()
            .unwrap_or(1)
    }

    pub fn require(&self, n_max: u64) -> Result<(), LError> {
        match primes_up_to(n_max)
            .into_iter()
            .find(|p| !self.ap.contains_key(p))
        {
            Some(p) => Err(LError::MissingCoefficient(p)),
            None => Ok(()),
        }
    }

    fn ap(&self, p: u64) -> Result<f64, LError> {
        self.ap
            .get(&p)
            .copied()
            .ok_or(LError::MissingCoefficient(p))
    }

    /// Normalized eigenvalue λ_p = a_p / p^{(w−1)/2}.
    pub fn lambda(&self, p: u64) -> Result<f64, LError> {
        Ok(self.ap(p)? / (p as f64).powf((self.weight as f64 - 1.0) / 2.0))
    }

    /// Satake pair {α, α^{−1}} with α + α^{−1} = λ_p, for p ∤ N.
    pub fn satake(&self, p: u64) -> Result<(Complex64, Complex64), LError> {
        let l = self.lambda(p)?;
        let disc = Complex64::new(l * l - 4.0, 0.0).sqrt();
        Ok(((l + disc) / 2.0, (l - disc) / 2.0))
    }

    /// Root number (−1)^k ∏_{p|N} (−a_p / p^{k−1}).
    pub fn root_number(&self) -> Result<f64, LError> {
        let k = self.k() as i32;
        let mut eps = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (p, _) in factor(self.level) {
            eps *= -self.ap(p)? / (p as f64).powi(k - 1);
        }
        Ok(eps.signum())
    }

    /// Reads a_p for every p ≤ n_max off one row of the Brandt matrices applied to an eigenvector of weight-2 level N.
    pub fn from_brandt(
        cs: &ClassSet,
        eig: &EigenData,
        j: usize,
        n_max: u64,
        label: &str,
    ) -> Result<Self, LError> {
        let h = &eig.vectors[j];
        let x = (0..h.len())
            .max_by(|&a, &b| h[a].abs().total_cmp(&h[b].abs()))
            .unwrap_or(0);
        let weights = cs.weights();
        let thetas = (0..h.len())
            .into_par_iter()
            .map(|y| cs.theta(x, y, n_max))
            .collect::<Result<Vec<_>, _>>()?;
        let ap = primes_up_to(n_max)
            .into_iter()
            .map(|p| {
                // B(p)_{xy} = θ_xy(p) / (2 w_y)
                let v = (0..h.len())
                    .map(|y| thetas[y][p as usize] as f64 / (2 * weights[y]) as f64 * h[y])
                    .sum::<f64>()
                    / h[x];
                (
                    p,
                    if (v - v.round()).abs() < 1e-9 {
                        v.round()
                    } else {
                        v
                    },
                )
            })
            .collect();
        Ok(Self {
            level: cs.level(),
            weight: 2,
            label: label.to_string(),
            ap,
        })
    }

    /// Eigenforms for every cusp form of a Brandt eigenbasis.
    pub fn all_from_brandt(
        cs: &ClassSet,
        eig: &EigenData,
        n_max: u64,
    ) -> Result<Vec<Self>, LError> {
        (0..eig.vectors.len())
            .filter(|&j| j != eig.eisenstein)
            .map(|j| Self::from_brandt(cs, eig, j, n_max, &format!("{}.{j}", cs.level())))
            .collect()
    }
}

/// Local Euler factor ∏(1 − β_j X)^{−1} given by its roots β_j.
pub type LocalRoots = Vec<Complex64>;

/// Dirichlet coefficients a_1..a_{n_max} of ∏_p ∏_j (1 − β_{p,j} p^{−s})^{−1}.
pub fn euler_coefficients<F>(n_max: usize, mut local: F) -> Result<Vec<Complex64>, LError>
where
    F: FnMut(u64) -> Result<LocalRoots, LError>,
{
    let mut a = vec![Complex64::new(0.0, 0.0); n_max + 1];
    if n_max == 0 {
        return Ok(a);
    }
    a[1] = Complex64::new(1.0, 0.0);
    let mut spf = vec![0u64; n_max + 1];
    for p in primes_up_to(n_max as u64) {
        let roots = local(p)?;
        // power-series coefficients of ∏(1 − βX)^{−1} up to X^e with p^e ≤ n_max
        let mut e_max = 0;
        let mut pe = 1usize;
        while pe * (p as usize) <= n_max {
            pe *= p as usize;
            e_max += 1;
        }
        let mut series = vec![Complex64::new(0.0, 0.0); e_max + 1];
        series[0] = Complex64::new(1.0, 0.0);
        for beta in &roots {
            for e in 1..=e_max {
                let prev = series[e - 1];
                series[e] += beta * prev;
            }
        }
        let mut q = 1usize;
        for s in series.iter().skip(1) {
            q *= p as usize;
            a[q] = *s;
        }
        let mut m = p as usize;
        while m <= n_max {
            if spf[m] == 0 {
                spf[m] = p;
            }
            m += p as usize;
        }
    }
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut m = n;
        let mut pe = 1;
        while m % p == 0 {
            m /= p;
            pe *= p;
        }
        if m > 1 {
            a[n] = a[pe] * a[m];
        }
    }
    Ok(a)
}

/// Which L-function of an eigenform to build.
#[derive(Debug, Clone, Copy)]
pub enum Kind<'a> {
    Standard,
    /// Twist by the Kronecker character of a fundamental discriminant.
    Twist(i64),
    /// Rankin–Selberg product with the theta series of a class-group character.
    RankinSelberg(&'a ClassGroup, &'a ClassCharacter),
    Adjoint,
}

/// A Dirichlet series with Euler product and completed factor
/// Λ(s) = Q^{s/2} ∏_j Γ_R(s + μ_j) L(s), satisfying Λ(s) = ε Λ̄(1 − s).
#[derive(Debug, Clone, Serialize)]
pub struct LSeries {
    pub label: String,
    /// coeffs[n] for 1 ≤ n ≤ n_max in the unitary normalization; coeffs[0] is unused.
    pub coeffs: Vec<Complex64>,
    pub conductor: u64,
    /// Shifts μ_j of the archimedean factor ∏ Γ_R(s + μ_j).
    pub gamma_shifts: Vec<f64>,
    pub sign: Complex64,
    /// Critical point in the unitary normalization.
    pub center: f64,
    /// Arithmetic shift: L_classical(s) = L(s − shift).
    pub shift: f64,
    /// Poles of Λ with their residues.
    pub poles: Vec<(Complex64, Complex64)>,
}

/// n_max beyond which the smoothed weights fall below about e^{−L}: with y = n π^{d/2} / √Q the
/// weights decay like exp(−d y^{2/d}), and L = 30 + Σμ_j absorbs the polynomial growth from the shifts.
pub fn default_nmax(conductor: u64, shifts: &[f64]) -> usize {
    let d = shifts.len().max(1) as f64;
    let l = 30.0 + shifts.iter().sum::<f64>();
    let y = (l / d).powf(d / 2.0);
    (y * (conductor as f64).sqrt() / std::f64::consts::PI.powf(d / 2.0)).ceil() as usize + 10
}

/// Coefficient bound needed by `average_term` and `petersson_norm` for a form of the given level and weight.
pub fn average_nmax(level: u64, weight: u32, pic: &ClassGroup, omega: &ClassCharacter) -> usize {
    let k = (weight / 2) as f64;
    let d = pic.field.d_abs;
    let adjoint = default_nmax(level * level, &[1.0, 2.0 * k - 1.0, 2.0 * k]);
    let central = if omega.is_trivial() {
        default_nmax(level * d * d, &[k - 0.5, k + 0.5])
            .max(default_nmax(level, &[k - 0.5, k + 0.5]))
    } else {
        let c = level * d * omega.conductor;
        let m = omega.weight_m as f64;
        default_nmax(c * c, &[k + m - 0.5, k + m + 0.5, k - m - 0.5, k - m + 0.5])
    };
    adjoint.max(central)
}

impl LSeries {
    pub fn degree(&self) -> usize {
        self.gamma_shifts.len()
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn zeta(n_max: Option<usize>) -> Self {
        let n_max = n_max.unwrap_or_else(|| default_nmax(1, &[0.0]));
        let coeffs = (0..=n_max)
            .map(|n| Complex64::new(if n == 0 { 0.0 } else { 1.0 }, 0.0))
            .collect();
        Self {
            label: "zeta".into(),
            coeffs,
            conductor: 1,
            gamma_shifts: vec![0.0],
            sign: Complex64::new(1.0, 0.0),
            center: 0.5,
            shift: 0.0,
            poles: vec![
                (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
                (Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)),
            ],
        }
    }

    /// L(s, χ_D) for a fundamental discriminant D ≠ 1.
    pub fn kronecker(disc: i64, n_max: Option<usize>) -> Self {
        let conductor = disc.unsigned_abs();
        let mu = if disc < 0 { 1.0 } else { 0.0 };
        let n_max = n_max.unwrap_or_else(|| default_nmax(conductor, &[mu]));
        let coeffs = (0..=n_max)
            .map(|n| {
                Complex64::new(
                    if n == 0 {
                        0.0
                    } else {
                        kronecker(disc, n as i64) as f64
                    },
                    0.0,
                )
            })
            .collect();
        Self {
            label: format!("chi_{disc}"),
            coeffs,
            conductor,
            gamma_shifts: vec![mu],
            sign: Complex64::new(1.0, 0.0),
            center: 0.5,
            shift: 0.0,
            poles: Vec::new(),
        }
    }

    /// Builds L(s, f), L(s, f ⊗ χ_D), L(s, f × g_Ω) or L(s, Ad f) from prime eigenvalues.
    pub fn build(kind: Kind<'_>, form: &Eigenform, n_max: Option<usize>) -> Result<Self, LError> {
        let level = form.level;
        let k = form.k() as f64;
        if !form.weight.is_multiple_of(2) || form.weight == 0 {
            return Err(LError::Unsupported {
                level,
                weight: form.weight,
                reason: "weight must be even and positive".into(),
            });
        }
        let disc = match kind {
            Kind::Twist(disc) => disc,
            Kind::RankinSelberg(pic, _) => pic.field.disc,
            Kind::Standard | Kind::Adjoint => 1,
        };
        let d = disc.unsigned_abs();
        if num_integer::gcd(level, d) != 1 {
            return Err(LError::Unsupported {
                level,
                weight: form.weight,
                reason: format!("level shares a factor with {disc}"),
            });
        }
        let eps_f = form.root_number()?;
        let (conductor, shifts, sign, label) = match kind {
            Kind::Standard => (
                level,
                vec![k - 0.5, k + 0.5],
                eps_f,
                format!("L(f_{})", form.label),
            ),
            Kind::Twist(_) => (
                level * d * d,
                vec![k - 0.5, k + 0.5],
                eps_f * kronecker(disc, -(level as i64)) as f64,
                format!("L(f_{} x chi_{disc})", form.label),
            ),
            Kind::RankinSelberg(_, omega) => {
                let c = level * d * omega.conductor;
                let m = omega.weight_m as f64;
                (
                    c * c,
                    vec![k + m - 0.5, k + m + 0.5, k - m - 0.5, k - m + 0.5],
                    1.0,
                    format!("L(f_{} x g_{:?})", form.label, omega.label),
                )
            }
            Kind::Adjoint => (
                level * level,
                vec![1.0, 2.0 * k - 1.0, 2.0 * k],
                1.0,
                format!("L(Ad f_{})", form.label),
            ),
        };
        let n_max = n_max.unwrap_or_else(|| default_nmax(conductor, &shifts));
        form.require(n_max as u64)?;
        let one = Complex64::new(1.0, 0.0);
        let chi = |p: u64| kronecker(disc, p as i64) as f64;
        let coeffs = euler_coefficients(n_max, |p| {
            if level.is_multiple_of(p) {
                let l = Complex64::new(form.lambda(p)?, 0.0);
                return Ok(match kind {
                    Kind::Standard => vec![l],
                    Kind::Twist(_) => vec![l * chi(p)],
                    Kind::RankinSelberg(..) => vec![l, -l],
                    Kind::Adjoint => vec![one / p as f64],
                });
            }
            let (a, b) = form.satake(p)?;
            Ok(match kind {
                Kind::Standard => vec![a, b],
                Kind::Twist(_) if chi(p) == 0.0 => vec![],
                Kind::Twist(_) => vec![a * chi(p), b * chi(p)],
                Kind::Adjoint => vec![a * a, one, b * b],
                Kind::RankinSelberg(pic, omega) => match pic.field.splitting(p) {
                    Splitting::Split => {
                        let z = omega.value(pic.prime_class(p).expect("split prime has a class"));
                        let zb = z.conj();
                        vec![a * z, b * z, a * zb, b * zb]
                    }
                    Splitting::Inert => vec![a, -a, b, -b],
                    Splitting::Ramified => {
                        let z =
                            omega.value(pic.prime_class(p).expect("ramified prime has a class"));
                        vec![a * z, b * z]
                    }
                },
            })
        })?;
        Ok(Self {
            label,
            coeffs,
            conductor,
            gamma_shifts: shifts,
            sign: Complex64::new(sign, 0.0),
            center: 0.5,
            shift: match kind {
                Kind::Standard | Kind::Twist(_) => k - 0.5,
                Kind::RankinSelberg(..) => 2.0 * k - 1.0,
                Kind::Adjoint => 0.0,
            },
            poles: Vec::new(),
        })
    }

    /// Checks a_{mn} = a_m a_n on coprime pairs.
    pub fn check_multiplicative(&self, tol: f64) -> Result<(), LError> {
        let n_max = self.n_max();
        for m in 2..=n_max {
            for n in (m + 1)..=(n_max / m) {
                if num_integer::gcd(m, n) == 1 {
                    let got = self.coeffs[m * n];
                    let expected = self.coeffs[m] * self.coeffs[n];
                    if (got - expected).norm() > tol * (1.0 + expected.norm()) {
                        return Err(LError::NotMultiplicative {
                            n: (m * n) as u64,
                            got: got.norm(),
                            expected: expected.norm(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks |a_n| ≤ d_r(n), the number of ways to write n as an ordered product of r = degree factors.
    pub fn check_deligne(&self) -> Result<(), LError> {
        let r = self.degree() as u32;
        for n in 1..=self.n_max() {
            let bound: f64 = factor(n as u64)
                .iter()
                .map(|&(_, e)| crate::arith::binomial((e + r - 1) as i64, (r - 1) as i64) as f64)
                .product();
            let value = self.coeffs[n].norm();
            if value > bound * (1.0 + 1e-9) {
                return Err(LError::DeligneBound { n: n as u64, value });
            }
        }
        Ok(())
    }
}

/// (f, f) = (N / 2^{2k}) Γ_∞(1) L(1, Ad f), with Γ_∞ the archimedean factor of the adjoint series.
pub fn petersson_norm(form: &Eigenform, tol: f64) -> Result<f64, LError> {
    let ad = LSeries::build(Kind::Adjoint, form, None)?;
    let v = ad.value(Complex64::new(1.0, 0.0), tol)?;
    Ok(form.level as f64 / 4f64.powi(form.k() as i32) * ad.archimedean(1.0) * v.finite.re)
}

/// One form's contribution (2k−2)! u √d / (2π (4π)^{2k−1}) · L(k, f × g_Ω) / (f, f).
#[derive(Debug, Clone, Serialize)]
pub struct AverageTerm {
    pub label: String,
    /// Central value of L(s, f × g_Ω) in the classical normalization.
    pub central: f64,
    /// L(k, f) and L(k, f ⊗ χ_D) when Ω is trivial.
    pub factors: Option<(f64, f64)>,
    pub petersson: f64,
    pub weighted: f64,
    /// Kernel-discrepancy error estimate propagated to `weighted`.
    pub error: f64,
}

/// Weighted central value for one form; uses L(f) L(f ⊗ χ_D) for trivial Ω and the degree-4 series otherwise.
pub fn average_term(
    form: &Eigenform,
    pic: &ClassGroup,
    omega: &ClassCharacter,
    tol: f64,
) -> Result<AverageTerm, LError> {
    use std::f64::consts::PI;
    let field = &pic.field;
    let centre = Complex64::new(0.5, 0.0);
    let (central, central_error, factors) = if omega.is_trivial() {
        let a = LSeries::build(Kind::Standard, form, None)?.value(centre, tol)?;
        let b = LSeries::build(Kind::Twist(field.disc), form, None)?.value(centre, tol)?;
        let (la, lb) = (a.finite.re, b.finite.re);
        let err =
            a.error / a.gamma_factor.norm() * lb.abs() + b.error / b.gamma_factor.norm() * la.abs();
        (la * lb, err, Some((la, lb)))
    } else {
        let v = LSeries::build(Kind::RankinSelberg(pic, omega), form, None)?.value(centre, tol)?;
        (v.finite.re, v.error / v.gamma_factor.norm(), None)
    };
    let petersson = petersson_norm(form, tol)?;
    let k = form.k() as i32;
    let factorial: f64 = (1..=(2 * k - 2)).map(f64::from).product();
    let constant = factorial * field.units as f64 * (field.d_abs as f64).sqrt()
        / (2.0 * PI * (4.0 * PI).powi(2 * k - 1));
    Ok(AverageTerm {
        label: form.label.clone(),
        central,
        factors,
        petersson,
        weighted: constant * central / petersson,
        error: constant * central_error / petersson,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::QuadField;

    /// Coefficients of q ∏ (1 − q^n)² (1 − q^{11n})², the newform of level 11.
    pub(crate) fn level11(n_max: usize) -> Eigenform {
        let mut series = vec![0i64; n_max + 1];
        series[0] = 1;
        for (n, e) in (1..=n_max).flat_map(|n| [(n, 2), (11 * n, 2)]) {
            for _ in 0..e {
                if n > n_max {
                    continue;
                }
                for i in (n..=n_max).rev() {
                    series[i] -= series[i - n];
                }
            }
        }
        let ap = primes_up_to(n_max as u64)
            .into_iter()
            .map(|p| (p, series[p as usize - 1] as f64))
            .collect();
        Eigenform {
            level: 11,
            weight: 2,
            label: "11a".into(),
            ap,
        }
    }

    #[test]
    fn level11_eigenvalues() {
        let f = level11(100);
        assert_eq!(f.ap[&2], -2.0);
        assert_eq!(f.ap[&3], -1.0);
        assert_eq!(f.ap[&5], 1.0);
        assert_eq!(f.ap[&7], -2.0);
        assert_eq!(f.ap[&11], 1.0);
        assert_eq!(f.root_number().unwrap(), 1.0);
        let (a, b) = f.satake(2).unwrap();
        assert!(((a + b).re + 2.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(((a * b).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brandt_route_matches_eta_product() {
        let cs = ClassSet::new(11).unwrap();
        let eig = EigenData::new(&cs, &[2, 3]).unwrap();
        let f = Eigenform::from_brandt(&cs, &eig, 1, 100, "11a").unwrap();
        assert_eq!(f.ap, level11(100).ap);
    }

    #[test]
    fn trivial_rankin_factors_as_product() {
        let f = level11(400);
        let pic = ClassGroup::new(QuadField::new(-4).unwrap());
        let triv = &pic.characters()[0];
        let n = 300;
        let rs = LSeries::build(Kind::RankinSelberg(&pic, triv), &f, Some(n)).unwrap();
        let a = LSeries::build(Kind::Standard, &f, Some(n)).unwrap();
        let b = LSeries::build(Kind::Twist(-4), &f, Some(n)).unwrap();
        for m in 1..=n {
            let conv: Complex64 = (1..=m)
                .filter(|d| m % d == 0)
                .map(|d| a.coeffs[d] * b.coeffs[m / d])
                .sum();
            assert!((conv - rs.coeffs[m]).norm() < 1e-12, "n={m}");
        }
    }

    #[test]
    fn adjoint_coefficients_at_good_primes() {
        let f = level11(100);
        let ad = LSeries::build(Kind::Adjoint, &f, Some(60)).unwrap();
        for p in primes_up_to(60).into_iter().filter(|&p| p != 11) {
            let a = f.ap[&p];
            let unnormalized = a * a - p as f64;
            assert!((ad.coeffs[p as usize].re * p as f64 - unnormalized).abs() < 1e-10);
        }
        assert!((ad.coeffs[11].re - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn generated_coefficients_are_multiplicative_and_bounded() {
        let f = level11(1000);
        let pic = ClassGroup::new(QuadField::new(-23).unwrap());
        for omega in pic.characters() {
            for kind in [
                Kind::Standard,
                Kind::Twist(-23),
                Kind::RankinSelberg(&pic, &omega),
                Kind::Adjoint,
            ] {
                let l = LSeries::build(kind, &f, Some(600)).unwrap();
                l.check_multiplicative(1e-10).unwrap();
                l.check_deligne().unwrap();
            }
        }
    }

    #[test]
    fn level11_classical_term_is_two_fifths() {
        let f = level11(3000);
        let pic = ClassGroup::new(QuadField::new(-4).unwrap());
        let t = average_term(&f, &pic, &pic.characters()[0], 1e-6).unwrap();
        assert!(t.petersson > 0.0);
        assert!((t.weighted - 0.4).abs() < 1e-9, "{}", t.weighted);
    }

    #[test]
    fn missing_prime_is_reported() {
        let mut f = level11(200);
        f.ap.remove(&13);
        assert!(matches!(
            f.require(200),
            Err(LError::MissingCoefficient(13))
        ));
        assert_eq!(f.coverage(), 11);
    }
}
