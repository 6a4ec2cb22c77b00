use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::QuatError;
use crate::arith::{self, hilbert_symbol, Place};

/// The definite quaternion algebra (a, b | Q) with i² = a, j² = b, ij = −ji = k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    pub level: u64,
    pub ram_finite: Vec<u64>,
}

/// A quaternion with coordinates `v / den` on the basis 1, i, j, k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Elem {
    pub v: [i128; 4],
    pub den: i128,
}

impl Elem {
    pub fn integral(v: [i128; 4]) -> Self {
        Self { v, den: 1 }
    }

    pub fn one() -> Self {
        Self::integral([1, 0, 0, 0])
    }

    pub fn normalized(mut self) -> Self {
        let g = self.v.iter().fold(self.den, |g, &x| g.gcd(&x));
        if g > 1 {
            for x in &mut self.v {
                *x /= g;
            }
            self.den /= g;
        }
        if self.den < 0 {
            for x in &mut self.v {
                *x = -*x;
            }
            self.den = -self.den;
        }
        self
    }

    pub fn conj(&self) -> Self {
        Self {
            v: [self.v[0], -self.v[1], -self.v[2], -self.v[3]],
            den: self.den,
        }
    }

    pub fn sub_int(&self, r: i128) -> Self {
        let mut v = self.v;
        v[0] -= r * self.den;
        Self { v, den: self.den }
    }

    pub fn scale(&self, num: i128, den: i128) -> Self {
        Self {
            v: self.v.map(|x| x * num),
            den: self.den * den,
        }
        .normalized()
    }

    pub fn add(&self, other: &Elem) -> Self {
        let den = self.den.lcm(&other.den);
        let (s, t) = (den / self.den, den / other.den);
        let mut v = [0i128; 4];
        for i in 0..4 {
            v[i] = self.v[i] * s + other.v[i] * t;
        }
        Self { v, den }.normalized()
    }
}

impl QuaternionAlgebra {
    /// Presentation for the algebra ramified exactly at ∞ and the primes dividing `level`.
    pub fn new(level: u64) -> Result<Self, QuatError> {
        if !arith::is_squarefree(level) {
            return Err(QuatError::NotSquarefree(level));
        }
        let ram: Vec<u64> = arith::factor(level).into_iter().map(|(p, _)| p).collect();
        if ram.len().is_multiple_of(2) {
            return Err(QuatError::Parity(level));
        }
        let odd_part = if level.is_multiple_of(2) {
            level / 2
        } else {
            level
        };
        let mut a_candidates: Vec<i64> = vec![-1, -2];
        a_candidates.extend(
            arith::primes_up_to(2000)
                .into_iter()
                .filter(|&q| q > 2)
                .map(|q| -(q as i64)),
        );
        let b_candidates: Vec<i64> = if odd_part == level {
            vec![-(level as i64)]
        } else {
            vec![-(odd_part as i64), -(level as i64)]
        };
        for &b in &b_candidates {
            for &a in &a_candidates {
                let alg = Self {
                    a,
                    b,
                    level,
                    ram_finite: ram.clone(),
                };
                if alg.has_correct_ramification() {
                    return Ok(alg);
                }
            }
        }
        Err(QuatError::NoPresentation(level))
    }

    /// Checks the Hilbert symbols at ∞, at 2 and at every prime dividing 2abN.
    pub fn has_correct_ramification(&self) -> bool {
        if hilbert_symbol(self.a as i128, self.b as i128, Place::Infinite) != -1 {
            return false;
        }
        let mut primes: Vec<u64> = vec![2];
        for x in [self.a.unsigned_abs(), self.b.unsigned_abs(), self.level] {
            primes.extend(arith::factor(x).into_iter().map(|(p, _)| p));
        }
        primes.sort_unstable();
        primes.dedup();
        primes.into_iter().all(|p| {
            let expected = if self.ram_finite.contains(&p) { -1 } else { 1 };
            hilbert_symbol(self.a as i128, self.b as i128, Place::Finite(p)) == expected
        })
    }

    pub fn mul_int(&self, x: &[i128; 4], y: &[i128; 4]) -> [i128; 4] {
        let (a, b) = (self.a as i128, self.b as i128);
        [
            x[0] * y[0] + a * x[1] * y[1] + b * x[2] * y[2] - a * b * x[3] * y[3],
            x[0] * y[1] + x[1] * y[0] - b * x[2] * y[3] + b * x[3] * y[2],
            x[0] * y[2] + x[2] * y[0] + a * x[1] * y[3] - a * x[3] * y[1],
            x[0] * y[3] + x[3] * y[0] + x[1] * y[2] - x[2] * y[1],
        ]
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        Elem {
            v: self.mul_int(&x.v, &y.v),
            den: x.den * y.den,
        }
        .normalized()
    }

    /// Bilinear form trd(x ȳ) on integer coordinates.
    pub fn trace_pair_int(&self, x: &[i128; 4], y: &[i128; 4]) -> i128 {
        let (a, b) = (self.a as i128, self.b as i128);
        2 * (x[0] * y[0] - a * x[1] * y[1] - b * x[2] * y[2] + a * b * x[3] * y[3])
    }

    pub fn nrd_int(&self, x: &[i128; 4]) -> i128 {
        self.trace_pair_int(x, x) / 2
    }

    /// Reduced norm as a fraction (num, den).
    pub fn nrd(&self, x: &Elem) -> (i128, i128) {
        reduce_frac(self.nrd_int(&x.v), x.den * x.den)
    }

    pub fn trd(&self, x: &Elem) -> (i128, i128) {
        reduce_frac(2 * x.v[0], x.den)
    }
}

pub fn reduce_frac(n: i128, d: i128) -> (i128, i128) {
    let g = n.gcd(&d);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    (n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentations() {
        let a11 = QuaternionAlgebra::new(11).unwrap();
        assert_eq!((a11.a, a11.b), (-1, -11));
        let a2 = QuaternionAlgebra::new(2).unwrap();
        assert_eq!((a2.a, a2.b), (-1, -1));
        assert!(matches!(
            QuaternionAlgebra::new(15),
            Err(QuatError::Parity(15))
        ));
        assert!(matches!(
            QuaternionAlgebra::new(12),
            Err(QuatError::NotSquarefree(12))
        ));
    }

    #[test]
    fn every_small_level_has_a_presentation() {
        for n in 2..400u64 {
            if arith::is_squarefree(n) && arith::factor(n).len() % 2 == 1 {
                let alg = QuaternionAlgebra::new(n).unwrap();
                assert!(alg.has_correct_ramification());
            }
        }
    }

    #[test]
    fn multiplication_is_associative_and_norm_multiplicative() {
        let alg = QuaternionAlgebra::new(23).unwrap();
        let xs = [[1, 2, -1, 3], [0, 1, 1, 0], [5, -2, 0, 1], [2, 0, 3, -1]];
        for x in &xs {
            for y in &xs {
                let xy = alg.mul_int(x, y);
                assert_eq!(alg.nrd_int(&xy), alg.nrd_int(x) * alg.nrd_int(y));
                for z in &xs {
                    assert_eq!(alg.mul_int(&xy, z), alg.mul_int(x, &alg.mul_int(y, z)));
                }
            }
        }
    }
}
