//! Complex log-gamma and the archimedean factors Γ_R, Γ_C.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// log Γ(z) on the principal branch away from the poles (Lanczos, with reflection for Re z < 1/2).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z) Γ(1 − z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    // shift upward so the Lanczos sum is evaluated where it is most accurate
    if z.re < 8.0 {
        let mut shift = Complex64::new(0.0, 0.0);
        let mut w = z;
        while w.re < 8.0 {
            shift += w.ln();
            w += 1.0;
        }
        return ln_gamma(w) - shift;
    }
    let z1 = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z1 + i as f64);
    }
    let t = z1 + LANCZOS_G + 0.5;
    Complex64::new(0.5 * (2.0 * PI).ln(), 0.0) + (z1 + 0.5) * t.ln() - t + x.ln()
}

/// log Γ_R(s) = −(s/2) log π + log Γ(s/2).
pub fn ln_gamma_r(s: Complex64) -> Complex64 {
    -s * 0.5 * PI.ln() + ln_gamma(s * 0.5)
}

/// Γ_C(s) = 2 (2π)^{−s} Γ(s).
pub fn gamma_c(s: f64) -> f64 {
    2.0 * (2.0 * PI).powf(-s) * ln_gamma(Complex64::new(s, 0.0)).re.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn factorials_and_half_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            let lg = ln_gamma(c(n as f64, 0.0)).re;
            assert!(
                (lg - fact.ln()).abs() < 1e-13 * fact.ln().abs().max(1.0),
                "n={n}"
            );
            fact *= n as f64;
        }
        assert!((ln_gamma(c(0.5, 0.0)).re - 0.5 * PI.ln()).abs() < 1e-14);
    }

    #[test]
    fn recurrence_and_reflection_in_the_plane() {
        for &(x, y) in &[
            (0.3, 2.0),
            (2.7, -11.0),
            (-1.4, 0.8),
            (0.5, 35.0),
            (12.0, 3.0),
        ] {
            let z = c(x, y);
            let lhs = ln_gamma(z + 1.0);
            let rhs = ln_gamma(z) + z.ln();
            let diff = (lhs - rhs).exp() - 1.0;
            assert!(diff.norm() < 1e-12, "z={z}");
        }
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for t in [0.5, 3.0, 10.0] {
            let v = 2.0 * ln_gamma(c(0.5, t)).re;
            assert!((v - (PI / (PI * t).cosh()).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_c_values() {
        assert!((gamma_c(1.0) * PI - 1.0).abs() < 1e-14);
        assert!((gamma_c(2.0) * 2.0 * PI * PI - 1.0).abs() < 1e-14);
    }
}
