use super::algebra::{Elem, QuaternionAlgebra};
use super::lattice::Lattice;
use super::QuatError;
use crate::arith;

/// A maximal order in a definite quaternion algebra.
#[derive(Debug, Clone)]
pub struct MaximalOrder {
    pub alg: QuaternionAlgebra,
    pub lattice: Lattice,
}

/// Exact determinant of a 4×4 integer matrix (fraction-free elimination).
pub fn det4(m: &[[i128; 4]; 4]) -> i128 {
    let mut a = *m;
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..3 {
        if a[k][k] == 0 {
            match (k + 1..4).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..4 {
            for j in k + 1..4 {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[3][3]
}

/// Reduced discriminant of a lattice: √|det trd(e_i ē_j)|, when it is an integer.
pub fn reduced_discriminant(l: &Lattice, alg: &QuaternionAlgebra) -> Option<i128> {
    let d = det4(&l.trace_matrix(alg)).abs();
    let den8 = l.den.pow(8);
    if d % den8 != 0 {
        return None;
    }
    let d = d / den8;
    let r = (d as f64).sqrt().round() as i128;
    (r - 1..=r + 1).find(|&s| s >= 0 && s * s == d)
}

/// Whether every element of the lattice has integral trace and norm.
pub fn is_integral(l: &Lattice, alg: &QuaternionAlgebra) -> bool {
    let m = l.trace_matrix(alg);
    let d2 = l.den * l.den;
    (0..4).all(|i| (0..4).all(|j| m[i][j] % d2 == 0) && (m[i][i] / 2) % d2 == 0)
        && l.basis().iter().all(|e| (2 * e.v[0]) % e.den == 0)
}

/// Multiplicative closure of a lattice containing 1; None if it stops being integral.
fn ring_closure(mut l: Lattice, alg: &QuaternionAlgebra) -> Result<Option<Lattice>, QuatError> {
    for _ in 0..8 {
        if !is_integral(&l, alg) {
            return Ok(None);
        }
        let next = l.product(&l, alg)?;
        if next == l {
            return Ok(Some(l));
        }
        l = next;
    }
    Ok(None)
}

impl MaximalOrder {
    /// Maximal order of discriminant `level`, found by p-local enlargement of Z⟨1, i, j, k⟩.
    pub fn new(level: u64) -> Result<Self, QuatError> {
        let alg = QuaternionAlgebra::new(level)?;
        let mut lattice = Lattice::from_generators(
            vec![[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            1,
        )?;
        let target = level as i128;
        loop {
            let disc = reduced_discriminant(&lattice, &alg).ok_or(QuatError::Overflow)?;
            if disc == target {
                break;
            }
            let excess = (disc / target) as u64;
            let p = arith::factor(excess)[0].0;
            lattice = Self::enlarge_at(&lattice, &alg, p, disc)?;
        }
        Ok(Self { alg, lattice })
    }

    fn enlarge_at(
        lattice: &Lattice,
        alg: &QuaternionAlgebra,
        p: u64,
        disc: i128,
    ) -> Result<Lattice, QuatError> {
        if p > 300 {
            return Err(QuatError::SearchExhausted(format!(
                "enlargement at p = {p}"
            )));
        }
        let p = p as i128;
        let basis = lattice.basis();
        for c0 in 0..p {
            for c1 in 0..p {
                for c2 in 0..p {
                    for c3 in 0..p {
                        if c0 == 0 && c1 == 0 && c2 == 0 && c3 == 0 {
                            continue;
                        }
                        let mut v = [0i128; 4];
                        for (c, e) in [c0, c1, c2, c3].iter().zip(&basis) {
                            for k in 0..4 {
                                v[k] += c * e.v[k];
                            }
                        }
                        let x = Elem {
                            v,
                            den: lattice.den * p,
                        }
                        .normalized();
                        if lattice.contains(&x) {
                            continue;
                        }
                        let (t, td) = alg.trd(&x);
                        let (n, nd) = alg.nrd(&x);
                        if td != 1 || nd != 1 || t.abs() > i128::MAX / 4 || n < 0 {
                            continue;
                        }
                        let candidate = lattice.with(&[x])?;
                        if let Some(order) = ring_closure(candidate, alg)? {
                            if let Some(d) = reduced_discriminant(&order, alg) {
                                if d < disc {
                                    return Ok(order);
                                }
                            }
                        }
                    }
                }
            }
        }
        Err(QuatError::SearchExhausted(format!(
            "no integral element at p = {p}"
        )))
    }

    pub fn level(&self) -> u64 {
        self.alg.level
    }

    pub fn discriminant(&self) -> Option<i128> {
        reduced_discriminant(&self.lattice, &self.alg)
    }

    /// Unit group order |O^×| from the norm-one vectors.
    pub fn unit_count(lattice: &Lattice, alg: &QuaternionAlgebra) -> u64 {
        let gram = lattice.normalized_gram(alg);
        super::enumerate::ReducedForm::new(&gram).theta_series(1)[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_order() {
        let o = MaximalOrder::new(2).unwrap();
        assert_eq!(o.discriminant(), Some(2));
        assert_eq!(MaximalOrder::unit_count(&o.lattice, &o.alg), 24);
    }

    #[test]
    fn discriminants_match_levels() {
        for n in [
            3u64, 5, 7, 11, 13, 17, 23, 37, 41, 73, 89, 97, 101, 105, 113, 163, 257,
        ] {
            let o = MaximalOrder::new(n).unwrap();
            assert_eq!(o.discriminant(), Some(n as i128), "level {n}");
            assert!(is_integral(&o.lattice, &o.alg));
            assert!(o.lattice.contains(&Elem::one()));
        }
    }

    #[test]
    fn det4_matches_diagonal() {
        let m = [[2, 1, 0, 0], [0, 3, 0, 0], [0, 0, 5, 7], [0, 0, 0, 11]];
        assert_eq!(det4(&m), 330);
        let swapped = [[0, 3, 0, 0], [2, 1, 0, 0], [0, 0, 5, 7], [0, 0, 0, 11]];
        assert_eq!(det4(&swapped), -330);
    }
}
