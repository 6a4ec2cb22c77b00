//! Smoothed approximate functional equation.
//!
//! Λ(s) = Σ a_n F_b(s, n) + ε Σ ā_n F_{−b}(1 − s, n) − Σ_ρ r_ρ e^{b(ρ−s)}/(ρ − s), where
//! F_b(s, n) = (1/2πi) ∫_{(c)} γ(s + w) n^{−s−w} e^{bw} dw/w. The value is independent of b
//! exactly when the functional equation holds, which gives the residual gate.

use num_complex::Complex64;
use serde::Serialize;

use super::gamma::ln_gamma_r;
use super::{LError, LSeries};

const CONTOUR: f64 = 1.25;
const STEP: f64 = 0.05;
const TAIL: f64 = 1e-20;
const PROBE_B: f64 = 0.35;

/// Completed and finite values at a point, with the discrepancy between two kernels as error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AfeValue {
    pub s: Complex64,
    pub completed: Complex64,
    pub finite: Complex64,
    pub gamma_factor: Complex64,
    pub error: f64,
}

/// Largest relative functional-equation residual over the probe grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeCheck {
    pub max_residual: f64,
    pub probes: usize,
}

fn probe_grid() -> [Complex64; 4] {
    [
        Complex64::new(0.75, 0.25),
        Complex64::new(0.6, 1.1),
        Complex64::new(0.9, -0.6),
        Complex64::new(0.3, 2.0),
    ]
}

impl LSeries {
    /// log of γ(s) = Q^{s/2} ∏ Γ_R(s + μ_j).
    pub fn ln_gamma_factor(&self, s: Complex64) -> Complex64 {
        let q = (self.conductor as f64).ln();
        self.gamma_shifts
            .iter()
            .fold(s * 0.5 * q, |acc, &mu| acc + ln_gamma_r(s + mu))
    }

    /// ∏ Γ_R(s + μ_j) without the conductor.
    pub fn archimedean(&self, s: f64) -> f64 {
        self.gamma_shifts
            .iter()
            .map(|&mu| ln_gamma_r(Complex64::new(s + mu, 0.0)).re)
            .sum::<f64>()
            .exp()
    }

    /// Σ_n a_n F_b(s, n) with coefficients conjugated when `dual`.
    fn smoothed_sum(&self, s: Complex64, b: f64, dual: bool) -> Complex64 {
        let sigma = s.re + CONTOUR;
        let weighted: Vec<(f64, Complex64)> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(n, a)| {
                let ln = (n as f64).ln();
                let a = if dual { a.conj() } else { *a };
                (ln, a * (-sigma * ln).exp())
            })
            .collect();
        let integrand = |t: f64| -> Complex64 {
            let w = Complex64::new(CONTOUR, t);
            let z = s + w;
            let kernel = (self.ln_gamma_factor(z) + w * b).exp() / w;
            let dirichlet: Complex64 = weighted
                .iter()
                .map(|&(ln, a)| a * Complex64::from_polar(1.0, -z.im * ln))
                .sum();
            kernel * dirichlet
        };
        let envelope = |t: f64| -> f64 {
            let w = Complex64::new(CONTOUR, t);
            ((self.ln_gamma_factor(s + w) + w * b).exp() / w).norm()
        };
        // centre the grid where the archimedean factor peaks
        let t0 = -s.im;
        let peak = envelope(t0);
        let mut total = integrand(t0);
        for dir in [1.0, -1.0] {
            let mut j = 1.0;
            loop {
                let t = t0 + dir * j * STEP;
                total += integrand(t);
                if envelope(t) < TAIL * peak && j * STEP > 1.0 {
                    break;
                }
                j += 1.0;
            }
        }
        total * STEP / (2.0 * std::f64::consts::PI)
    }

    /// Λ(s) through the approximate functional equation with kernel e^{bw}.
    pub fn completed(&self, s: Complex64, b: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let poles: Complex64 = self
            .poles
            .iter()
            .map(|&(rho, r)| r * ((rho - s) * b).exp() / (rho - s))
            .sum();
        self.smoothed_sum(s, b, false) + self.sign * self.smoothed_sum(one - s, -b, true) - poles
    }

    /// Max over the probe grid of |Λ_0(s) − ε Λ̃_b(1 − s)| / |Λ_0(s)|.
    pub fn fe_check(&self) -> FeCheck {
        let one = Complex64::new(1.0, 0.0);
        let mut dual = self.clone();
        dual.coeffs.iter_mut().for_each(|a| *a = a.conj());
        dual.sign = self.sign.conj();
        dual.poles = self
            .poles
            .iter()
            .map(|&(rho, r)| (rho.conj(), r.conj()))
            .collect();
        let grid = probe_grid();
        let max_residual = grid
            .iter()
            .map(|&s| {
                let lhs = self.completed(s, 0.0);
                let rhs = self.sign * dual.completed(one - s, PROBE_B);
                (lhs - rhs).norm() / lhs.norm()
            })
            .fold(0.0, f64::max);
        FeCheck {
            max_residual,
            probes: grid.len(),
        }
    }

    /// Λ(s) and L(s) after the functional-equation gate passes at `tol`.
    pub fn value(&self, s: Complex64, tol: f64) -> Result<AfeValue, LError> {
        let check = self.fe_check();
        if !(check.max_residual <= tol) {
            return Err(LError::FunctionalEquation {
                label: self.label.clone(),
                residual: check.max_residual,
                tol,
            });
        }
        Ok(self.value_unchecked(s))
    }

    fn value_unchecked(&self, s: Complex64) -> AfeValue {
        let completed = self.completed(s, 0.0);
        let other = self.completed(s, PROBE_B);
        let gamma_factor = self.ln_gamma_factor(s).exp();
        AfeValue {
            s,
            completed,
            finite: completed / gamma_factor,
            gamma_factor,
            error: (completed - other).norm(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::{Kind, LSeries};
    use crate::qfield::{ClassGroup, QuadField};
    use std::f64::consts::PI;

    /// ζ(s) by Euler–Maclaurin with N terms and 2M Bernoulli corrections.
    fn zeta_euler_maclaurin(s: f64) -> f64 {
        const B: [f64; 8] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
            -3617.0 / 510.0,
        ];
        let n = 30.0f64;
        let mut total: f64 = (1..30).map(|k| (k as f64).powf(-s)).sum();
        total += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
        // rising product s(s+1)...(s+2j−2) / (2j)!
        let mut rising = s;
        let mut fact = 2.0;
        for (j, b) in B.iter().enumerate() {
            let j = j + 1;
            total += b / fact * rising * n.powf(-s - 2.0 * j as f64 + 1.0);
            rising *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
            fact *= ((2 * j + 1) * (2 * j + 2)) as f64;
        }
        total
    }

    #[test]
    fn euler_maclaurin_oracle_sanity() {
        assert!((zeta_euler_maclaurin(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta_euler_maclaurin(0.5) + 1.460_354_508_809_586_8).abs() < 1e-14);
    }

    #[test]
    fn zeta_at_the_centre() {
        let z = LSeries::zeta(None);
        let v = z.value(Complex64::new(0.5, 0.0), 1e-6).unwrap();
        let expected = zeta_euler_maclaurin(0.5);
        assert!(
            (v.finite.re - expected).abs() < 1e-9,
            "{} vs {expected}",
            v.finite
        );
        assert!(v.error < 1e-9);
        let v2 = z.completed(Complex64::new(2.0, 0.0), 0.0)
            / z.ln_gamma_factor(Complex64::new(2.0, 0.0)).exp();
        assert!((v2.re - PI * PI / 6.0).abs() < 1e-9);
    }

    #[test]
    fn leibniz_value() {
        let l = LSeries::kronecker(-4, None);
        let v = l.value(Complex64::new(1.0, 0.0), 1e-6).unwrap();
        assert!((v.finite.re - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_sign_or_conductor_fails_the_gate() {
        let mut l = LSeries::kronecker(-4, None);
        assert!(l.fe_check().max_residual < 1e-9);
        l.conductor = 5;
        assert!(l.fe_check().max_residual > 1e-3);
        let mut l = LSeries::kronecker(-4, None);
        l.sign = -l.sign;
        assert!(matches!(
            l.value(Complex64::new(0.5, 0.0), 1e-6),
            Err(LError::FunctionalEquation { .. })
        ));
    }

    #[test]
    fn level11_series_pass_the_gate_and_are_real() {
        let f = crate::lfunc::tests::level11(2000);
        let pic = ClassGroup::new(QuadField::new(-4).unwrap());
        let triv = &pic.characters()[0];
        let mut central = Vec::new();
        for kind in [
            Kind::Standard,
            Kind::Twist(-4),
            Kind::RankinSelberg(&pic, triv),
            Kind::Adjoint,
        ] {
            let l = LSeries::build(kind, &f, None).unwrap();
            let check = l.fe_check();
            assert!(
                check.max_residual < 1e-8,
                "{}: {}",
                l.label,
                check.max_residual
            );
            let v = l.value(Complex64::new(0.5, 0.0), 1e-6).unwrap();
            assert!(v.completed.im.abs() < 1e-10);
            central.push(v.finite.re);
        }
        // L(1, f) for the level-11 curve
        assert!(
            (central[0] - 0.253_841_860_855_910_7).abs() < 1e-8,
            "{}",
            central[0]
        );
        assert!((central[2] - central[0] * central[1]).abs() < 1e-8 * central[2].abs());
    }
}
