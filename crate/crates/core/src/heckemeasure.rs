//! Spherical Hecke algebra transforms, Satake-interval measures and the local distribution Ĩ.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith;
use crate::qfield::Splitting;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HeckeError {
    #[error("quadrature did not converge: error estimate {estimate:e} above {tol:e}")]
    NoConvergence { estimate: f64, tol: f64 },
    #[error("local data inconsistent: {0}")]
    Inconsistent(String),
}

/// Σ c_n f_n in the spherical Hecke algebra of PGL(2, Q_p) with residue field size q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeckeElement {
    pub q: u64,
    pub coeffs: Vec<Complex64>,
}

/// X_n(x) = U_n(x/2): X_0 = 1, X_1 = x, X_{n+1} = x X_n − X_{n−1}.
fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    match n {
        0 => 1.0,
        _ => {
            for _ in 1..n {
                (prev, cur) = (cur, x * cur - prev);
            }
            cur
        }
    }
}

/// f̂_n(x) = q^{n/2} X_n(x) − q^{n/2 − 1} X_{n−2}(x), with f̂_0 = 1 and f̂_1 = q^{1/2} x.
pub fn basis_hat(q: u64, n: usize, x: f64) -> f64 {
    let qf = q as f64;
    match n {
        0 => 1.0,
        1 => qf.sqrt() * x,
        _ => {
            let h = qf.powf(n as f64 / 2.0);
            h * chebyshev_u(n, x) - h / qf * chebyshev_u(n - 2, x)
        }
    }
}

impl HeckeElement {
    pub fn identity(q: u64) -> Self {
        Self::basis(q, 0)
    }

    /// The double-coset characteristic function f_n.
    pub fn basis(q: u64, n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self { q, coeffs }
    }

    /// The Hecke operator T_p = f_1.
    pub fn tp(q: u64) -> Self {
        Self::basis(q, 1)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn linear_combination(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let at = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or_default();
        Self {
            q: self.q,
            coeffs: (0..n)
                .map(|i| alpha * at(&self.coeffs, i) + beta * at(&other.coeffs, i))
                .collect(),
        }
    }

    /// f̂(x) = Σ c_n f̂_n(x).
    pub fn hat(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(n, c)| c * basis_hat(self.q, n, x))
            .sum()
    }

    /// Value of f on the double coset of index m (the coset of diag(ϖ^m, 1)).
    pub fn coset_value(&self, m: usize) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }
}

/// Local data of (E, Ω) at p, as seen by the twisted measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalTorus {
    pub p: u64,
    pub splitting: Splitting,
    /// Ω(ϖ_E) for unramified Ω (±1 in the ramified case, ignored when inert).
    pub zeta: Complex64,
    /// Conductor exponent n(Ω_p); zero for unramified Ω.
    pub conductor_exp: u32,
}

impl LocalTorus {
    /// L(1, η_p).
    pub fn l1_eta(&self) -> f64 {
        let q = self.p as f64;
        match self.splitting {
            Splitting::Split => 1.0 / (1.0 - 1.0 / q),
            Splitting::Inert => 1.0 / (1.0 + 1.0 / q),
            Splitting::Ramified => 1.0,
        }
    }
}

/// Measures on the Satake interval [−2, 2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Measure {
    SatoTate,
    Plancherel { q: u64 },
    Twisted(LocalTorus),
}

impl Measure {
    /// Density with respect to μ_∞.
    pub fn relative_density(&self, x: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Measure::SatoTate => one,
            Measure::Plancherel { q } => {
                let q = q as f64;
                let s = q.sqrt() + 1.0 / q.sqrt();
                one * (q + 1.0) / (s * s - x * x)
            }
            Measure::Twisted(t) => {
                if t.conductor_exp > 0 {
                    return one;
                }
                let q = t.p as f64;
                let r = 1.0 / q.sqrt();
                let z = t.zeta;
                match t.splitting {
                    Splitting::Split => {
                        let zi = z.inv();
                        one / ((one - x * z * r + z * z / q) * (one - x * zi * r + zi * zi / q))
                    }
                    Splitting::Inert => one / ((1.0 + 1.0 / q).powi(2) - x * x / q),
                    Splitting::Ramified => one / (one - x * z * r + 1.0 / q),
                }
            }
        }
    }

    /// Density with respect to Lebesgue measure dx on (−2, 2).
    pub fn density(&self, x: f64) -> Complex64 {
        let st = (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI);
        self.relative_density(x) * st
    }

    /// The same density assembled from local L-factors: L(1/2, π_E ⊗ Ω) L(2, 1) / L(1, Ad) · μ_q.
    pub fn density_from_l_factors(t: &LocalTorus, x: f64) -> Complex64 {
        let q = t.p as f64;
        let one = Complex64::new(1.0, 0.0);
        // Satake parameter α with α + 1/α = x, |α| = 1
        let alpha = Complex64::new(x / 2.0, (1.0 - x * x / 4.0).max(0.0).sqrt());
        let ainv = alpha.inv();
        let r = 1.0 / q.sqrt();
        let base_change = match t.splitting {
            Splitting::Split => {
                let (z, zi) = (t.zeta, t.zeta.inv());
                one / ((one - alpha * z * r)
                    * (one - ainv * z * r)
                    * (one - alpha * zi * r)
                    * (one - ainv * zi * r))
            }
            Splitting::Inert => one / ((one - alpha * alpha / q) * (one - ainv * ainv / q)),
            Splitting::Ramified => one / ((one - alpha * t.zeta * r) * (one - ainv * t.zeta * r)),
        };
        let l_ad = one / ((one - alpha * alpha / q) * (1.0 - 1.0 / q) * (one - ainv * ainv / q));
        let l2 = 1.0 / (1.0 - 1.0 / (q * q));
        base_change / l_ad * l2 * Measure::Plancherel { q: t.p }.density(x)
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += pair * G_WEIGHTS[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature of a complex function on [a, b].
pub fn adaptive_gk(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64, HeckeError> {
    let mut intervals = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let estimate: f64 = intervals.iter().map(|(_, _, (_, e))| e).sum();
        if estimate <= tol {
            return Ok(intervals.iter().map(|(_, _, (v, _))| v).sum());
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, gk15(&f, lo, mid)));
        intervals.push((mid, hi, gk15(&f, mid, hi)));
    }
    let estimate: f64 = intervals.iter().map(|(_, _, (_, e))| e).sum();
    Err(HeckeError::NoConvergence { estimate, tol })
}

/// ∫ g dμ computed in the variable x = 2 cos θ, where dμ_∞ = (2/π) sin²θ dθ.
pub fn integrate(
    g: impl Fn(f64) -> Complex64,
    mu: &Measure,
    tol: f64,
) -> Result<Complex64, HeckeError> {
    let integrand = |theta: f64| {
        let x = 2.0 * theta.cos();
        let s = theta.sin();
        g(x) * mu.relative_density(x) * (2.0 / std::f64::consts::PI * s * s)
    };
    adaptive_gk(integrand, 0.0, std::f64::consts::PI, tol)
}

/// One checked identity in a numerical suite.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub q: u64,
    pub n: usize,
    pub m: usize,
    pub delta: String,
    pub expected: Complex64,
    pub computed: Complex64,
    pub abs_error: f64,
}

impl IdentityCheck {
    fn new(
        name: &str,
        q: u64,
        n: usize,
        m: usize,
        delta: &str,
        expected: Complex64,
        computed: Complex64,
    ) -> Self {
        Self {
            name: name.to_string(),
            q,
            n,
            m,
            delta: delta.to_string(),
            expected,
            computed,
            abs_error: (expected - computed).norm(),
        }
    }
}

/// Plancherel, Sato–Tate extraction and Λ_δ identities on f_n, n ≤ `n_max`.
pub fn plancherel_suite(q: u64, n_max: usize, tol: f64) -> Result<Vec<IdentityCheck>, HeckeError> {
    let qf = q as f64;
    let mu_q = Measure::Plancherel { q };
    let mu_inf = Measure::SatoTate;
    let re = |v: f64| Complex64::new(v, 0.0);
    let deltas = [
        ("1", re(1.0)),
        ("-1", re(-1.0)),
        ("i", Complex64::new(0.0, 1.0)),
    ];
    let mut out = Vec::new();
    for n in 0..=n_max {
        // |f̂_n| reaches about (n + 1) q^{n/2}, which sets the rounding floor of the quadrature
        let quad_tol =
            (tol * 1e-3).max(64.0 * f64::EPSILON * (n + 1) as f64 * qf.powf(n as f64 / 2.0));
        let f = HeckeElement::basis(q, n);
        let fhat = |x: f64| f.hat(x);
        out.push(IdentityCheck::new(
            "f(1) = ∫ f̂ dμ_q",
            q,
            n,
            0,
            "",
            f.coset_value(0),
            integrate(fhat, &mu_q, quad_tol)?,
        ));
        for m in 1..=n_max {
            let scale = (1.0 + 1.0 / qf) * qf.powi(m as i32);
            let val =
                integrate(|x| f.hat(x) * basis_hat(q, m, x), &mu_q, quad_tol * scale)? / scale;
            out.push(IdentityCheck::new(
                "f(ϖ^m) = ∫ f̂ f̂_m dμ_q / vol",
                q,
                n,
                m,
                "",
                f.coset_value(m),
                val,
            ));
        }
        for (label, delta) in deltas {
            let val = integrate(
                |x| f.hat(x) * (1.0 + qf + qf.sqrt() * delta * x),
                &mu_q,
                quad_tol,
            )? / (qf + 1.0);
            out.push(IdentityCheck::new(
                "f(1) + δ f(ϖ) = ∫ f̂ (1 + q^½δx + q) dμ_q / (q+1)",
                q,
                n,
                1,
                label,
                f.coset_value(0) + delta * f.coset_value(1),
                val,
            ));
            let r = 1.0 / qf.sqrt();
            let di = delta.inv();
            let lam = integrate(
                |x| {
                    f.hat(x) * (1.0 - 1.0 / qf)
                        / ((1.0 - delta * r * x + delta * delta / qf)
                            * (1.0 - di * r * x + di * di / qf))
                },
                &mu_inf,
                quad_tol,
            )?;
            out.push(IdentityCheck::new(
                "Λ_δ(f) = ∫ f̂ K_δ dμ_∞",
                q,
                n,
                0,
                label,
                lambda_delta(&f, delta),
                lam,
            ));
        }
        out.push(IdentityCheck::new(
            "f(1) − f(ϖ²) = ∫ f̂ dμ_∞",
            q,
            n,
            2,
            "",
            f.coset_value(0) - f.coset_value(2),
            integrate(fhat, &mu_inf, quad_tol)?,
        ));
    }
    Ok(out)
}

/// Λ_δ(f) = Σ_{j ∈ Z} δ^j f(diag(ϖ^j, 1)).
pub fn lambda_delta(f: &HeckeElement, delta: Complex64) -> Complex64 {
    let max = f.degree() as i32;
    (-max..=max)
        .map(|j| delta.powi(j) * f.coset_value(j.unsigned_abs() as usize))
        .sum()
}

/// Double-coset index of the matrix of a + bτ acting on the lattice Z_p ⊕ ϖ^n τ Z_p:
/// v(N(α)) − 2 min(v(a), v(b) − n).
pub fn coset_index(v_norm: i64, v_a: Option<i64>, v_b: Option<i64>, n: i64) -> usize {
    let shifted_b = v_b.map(|v| v - n);
    let min_entry = match (v_a, shifted_b) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => unreachable!("zero element"),
    };
    (v_norm - 2 * min_entry) as usize
}

fn val(x: i128, p: u64) -> Option<i64> {
    (x != 0).then(|| arith::valuation(x, p) as i64)
}

/// Ĩ(f) by the explicit torus coset sums, for E = Q(√D) with ω of trace t and norm nrm.
pub fn i_tilde_cosets(
    f: &HeckeElement,
    t: &LocalTorus,
    omega_trace: i128,
    omega_norm: i128,
) -> Result<Complex64, HeckeError> {
    let p = t.p;
    let norm = |a: i128, b: i128| a * a + a * b * omega_trace + b * b * omega_norm;
    if t.conductor_exp > 0 {
        let n = t.conductor_exp as i64;
        // f(1) − f(1 + τ ϖ^{n−1}) for a unit τ ∈ O_E with N(1 + τϖ^{n−1}) a unit
        let pn1 = (p as i128).pow(t.conductor_exp - 1);
        let (a, b) = (0..p as i128)
            .map(|r| (1 + r * pn1, pn1))
            .find(|&(a, b)| norm(a, b) % p as i128 != 0 && (b / pn1) % p as i128 != 0)
            .ok_or_else(|| HeckeError::Inconsistent("no unit shift".into()))?;
        let m = coset_index(val(norm(a, b), p).unwrap(), val(a, p), val(b, p), n);
        return Ok(f.coset_value(0) - f.coset_value(m));
    }
    match t.splitting {
        Splitting::Inert => Ok(f.coset_value(coset_index(0, Some(0), None, 0))),
        Splitting::Ramified => {
            // a uniformizer ϖ_E = a + bω of norm exactly divisible by p
            let (a, b) = (0..p as i128)
                .map(|a| (a, 1))
                .find(|&(a, b)| arith::valuation(norm(a, b), p) == 1)
                .ok_or_else(|| HeckeError::Inconsistent("no uniformizer".into()))?;
            let m = coset_index(1, val(a, p), val(b, p), 0);
            Ok(f.coset_value(0) + t.zeta * f.coset_value(m))
        }
        Splitting::Split => {
            // α = (ϖ^i, 1) ∈ Q_p × Q_p acts as diag(ϖ^i, 1)
            let max = f.degree() as i64;
            Ok((-max..=max)
                .map(|i| {
                    // entries of diag(ϖ^i, 1) have valuations i and 0
                    let m = coset_index(i, Some(i), Some(0), 0);
                    t.zeta.powi(i as i32) * f.coset_value(m)
                })
                .sum())
        }
    }
}

/// Ĩ(f) as ∫ f̂ dμ_{p,E,Ω}, divided by L(1, η_p) when Ω is unramified at p.
pub fn i_tilde_measure(
    f: &HeckeElement,
    t: &LocalTorus,
    tol: f64,
) -> Result<Complex64, HeckeError> {
    let mu = Measure::Twisted(*t);
    let v = integrate(|x| f.hat(x), &mu, tol)?;
    Ok(if t.conductor_exp > 0 {
        v
    } else {
        v / t.l1_eta()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hat_examples() {
        assert_eq!(basis_hat(2, 0, 0.7), 1.0);
        assert!((basis_hat(3, 1, 0.7) - 3f64.sqrt() * 0.7).abs() < 1e-15);
        assert!((basis_hat(2, 2, 2.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hat_matches_satake_formula() {
        // f̂_n = q^{n/2}(α^n + α^{−n} + (1 − 1/q) Σ_{0<j<n} α^{n−2j}) for n ≥ 1
        for q in [2u64, 3, 7] {
            for n in 1..8 {
                for &x in &[-1.9, -0.3, 0.0, 1.1, 2.0] {
                    let alpha = Complex64::new(x / 2.0, (1.0 - x * x / 4.0f64).max(0.0).sqrt());
                    let mut s = alpha.powi(n as i32) + alpha.powi(-(n as i32));
                    for j in 1..n {
                        s += (1.0 - 1.0 / q as f64) * alpha.powi(n as i32 - 2 * j as i32);
                    }
                    let expected = (q as f64).powf(n as f64 / 2.0) * s.re;
                    assert!((basis_hat(q, n, x) - expected).abs() < 1e-9 * expected.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn masses() {
        let tol = 1e-13;
        assert!((integrate(|_| c(1.0), &Measure::SatoTate, tol).unwrap() - 1.0).norm() < 1e-12);
        assert!(
            (integrate(|_| c(1.0), &Measure::Plancherel { q: 5 }, tol).unwrap() - 1.0).norm()
                < 1e-12
        );
        for (split, zeta) in [
            (Splitting::Split, Complex64::from_polar(1.0, 0.7)),
            (Splitting::Inert, c(1.0)),
            (Splitting::Ramified, c(-1.0)),
        ] {
            let t = LocalTorus {
                p: 3,
                splitting: split,
                zeta,
                conductor_exp: 0,
            };
            let mass = integrate(|_| c(1.0), &Measure::Twisted(t), tol).unwrap();
            assert!((mass - t.l1_eta()).norm() < 1e-12, "{split:?}");
        }
        let odd = integrate(|x| c(basis_hat(5, 1, x)), &Measure::SatoTate, tol).unwrap();
        assert!(odd.norm() < 1e-13);
    }

    #[test]
    fn twisted_density_matches_l_factor_assembly() {
        for (p, split, zeta) in [
            (
                2u64,
                Splitting::Split,
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0),
            ),
            (3, Splitting::Inert, c(1.0)),
            (5, Splitting::Ramified, c(1.0)),
            (7, Splitting::Ramified, c(-1.0)),
        ] {
            let t = LocalTorus {
                p,
                splitting: split,
                zeta,
                conductor_exp: 0,
            };
            for k in 1..1000 {
                let x = -2.0 + 4.0 * k as f64 / 1000.0;
                let a = Measure::Twisted(t).density(x);
                let b = Measure::density_from_l_factors(&t, x);
                assert!((a - b).norm() < 1e-12, "p={p} x={x}");
                assert!(a.re >= 0.0);
            }
        }
    }

    #[test]
    fn lambda_examples() {
        let f1 = HeckeElement::tp(3);
        assert_eq!(lambda_delta(&f1, c(1.0)), c(2.0));
        let f2 = HeckeElement::basis(2, 2);
        let v = integrate(|x| f2.hat(x), &Measure::SatoTate, 1e-13).unwrap();
        assert!((v + 1.0).norm() < 1e-12);
    }

    #[test]
    fn small_plancherel_suite() {
        let checks = plancherel_suite(3, 4, 1e-10).unwrap();
        for ch in &checks {
            assert!(ch.abs_error < 1e-10, "{ch:?}");
        }
    }

    #[test]
    fn linearity_of_hat() {
        let a = HeckeElement::basis(5, 3);
        let b = HeckeElement::tp(5);
        let comb = a.linear_combination(c(2.0), &b, c(-0.5));
        for &x in &[-1.5, 0.2, 1.9] {
            assert!((comb.hat(x) - (a.hat(x) * 2.0 - b.hat(x) * 0.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn i_tilde_two_ways() {
        let cases = [
            (
                5u64,
                Splitting::Split,
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0),
                0u32,
                (0i128, 1i128),
            ),
            (3, Splitting::Inert, c(1.0), 0, (0, 1)),
            (2, Splitting::Ramified, c(-1.0), 0, (0, 1)),
            (3, Splitting::Ramified, c(1.0), 0, (1, 1)),
            (5, Splitting::Split, c(1.0), 1, (0, 1)),
            (3, Splitting::Inert, c(1.0), 2, (0, 1)),
            (2, Splitting::Ramified, c(1.0), 3, (0, 1)),
        ];
        for (p, splitting, zeta, n, (t, nrm)) in cases {
            let torus = LocalTorus {
                p,
                splitting,
                zeta,
                conductor_exp: n,
            };
            for j in 0..=6 {
                let f = HeckeElement::basis(p, j);
                let a = i_tilde_cosets(&f, &torus, t, nrm).unwrap();
                let b = i_tilde_measure(&f, &torus, 1e-13).unwrap();
                assert!(
                    (a - b).norm() < 1e-10,
                    "p={p} {splitting:?} n={n} j={j}: {a} vs {b}"
                );
            }
        }
    }
}
