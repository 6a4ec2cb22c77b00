use std::collections::VecDeque;

use num_rational::Ratio;
use rayon::prelude::*;

use super::algebra::{Elem, QuaternionAlgebra};
use super::enumerate::ReducedForm;
use super::lattice::Lattice;
use super::order::MaximalOrder;
use super::QuatError;
use crate::arith;

/// A right ideal class representative with its left order data.
#[derive(Debug, Clone)]
pub struct IdealClass {
    pub ideal: Lattice,
    /// nrd(I) as a reduced fraction.
    pub norm: (i128, i128),
    pub left_order: Lattice,
    /// |O_L(I)^×| / 2.
    pub weight: u64,
}

/// The set of right ideal classes of a maximal order of discriminant N.
#[derive(Debug, Clone)]
pub struct ClassSet {
    pub order: MaximalOrder,
    pub classes: Vec<IdealClass>,
    /// Prime used for the neighbour search.
    pub neighbour_prime: u64,
}

/// ∏_{p | N} (p − 1) / 12.
pub fn expected_mass(level: u64) -> Ratio<i64> {
    let m: i64 = arith::factor(level)
        .iter()
        .map(|&(p, _)| p as i64 - 1)
        .product();
    Ratio::new(m, 12)
}

/// Gram matrix of the form nrd(x) / (n_num / n_den) on a lattice.
fn gram_over_norm(
    l: &Lattice,
    alg: &QuaternionAlgebra,
    norm: (i128, i128),
) -> Result<Vec<Vec<i128>>, QuatError> {
    l.scaled_gram(alg, norm.1, norm.0)
}

fn mul_norms(a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
    super::algebra::reduce_frac(a.0 * b.0, a.1 * b.1)
}

impl IdealClass {
    fn new(ideal: Lattice, alg: &QuaternionAlgebra) -> Result<Self, QuatError> {
        let norm = ideal.norm(alg);
        let left_order = ideal.product(&ideal.conj()?, alg)?.scale(norm.1, norm.0)?;
        let weight = MaximalOrder::unit_count(&left_order, alg) / 2;
        Ok(Self {
            ideal,
            norm,
            left_order,
            weight,
        })
    }
}

impl ClassSet {
    pub fn new(level: u64) -> Result<Self, QuatError> {
        let order = MaximalOrder::new(level)?;
        let ell = arith::primes_up_to(100)
            .into_iter()
            .find(|p| !level.is_multiple_of(*p))
            .ok_or_else(|| QuatError::UnsupportedCase("no neighbour prime".into()))?;
        let mut set = Self {
            classes: vec![IdealClass::new(order.lattice.clone(), &order.alg)?],
            order,
            neighbour_prime: ell,
        };
        let target = expected_mass(level);
        let mut queue = VecDeque::from([0usize]);
        while let Some(idx) = queue.pop_front() {
            if set.mass() == target {
                break;
            }
            for nb in set.neighbours(&set.classes[idx].ideal.clone(), ell)? {
                if set.mass() == target {
                    break;
                }
                if set.find_class(&nb)?.is_none() {
                    set.classes.push(IdealClass::new(nb, &set.order.alg)?);
                    queue.push_back(set.classes.len() - 1);
                }
            }
        }
        if set.mass() != target {
            return Err(QuatError::SearchExhausted(format!(
                "class set mass {} below {}",
                set.mass(),
                target
            )));
        }
        Ok(set)
    }

    pub fn alg(&self) -> &QuaternionAlgebra {
        &self.order.alg
    }

    pub fn level(&self) -> u64 {
        self.order.alg.level
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn weights(&self) -> Vec<u64> {
        self.classes.iter().map(|c| c.weight).collect()
    }

    /// Σ 1/w_x.
    pub fn mass(&self) -> Ratio<i64> {
        self.classes
            .iter()
            .map(|c| Ratio::new(1, c.weight as i64))
            .sum()
    }

    /// The ℓ + 1 right ideals J ⊂ I with [I : J] = ℓ² and nrd(J) = ℓ·nrd(I).
    pub fn neighbours(&self, ideal: &Lattice, ell: u64) -> Result<Vec<Lattice>, QuatError> {
        let alg = self.alg();
        let ell = ell as i128;
        let norm = ideal.norm(alg);
        let gram = gram_over_norm(ideal, alg, norm)?;
        let scaled: Vec<Elem> = ideal.basis().iter().map(|e| e.scale(ell, 1)).collect();
        let obasis = self.order.lattice.basis();
        let mut out: Vec<Lattice> = Vec::new();
        let range = 0..ell as i64;
        for c0 in range.clone() {
            for c1 in range.clone() {
                for c2 in range.clone() {
                    for c3 in range.clone() {
                        let c = [c0, c1, c2, c3];
                        if c == [0; 4] {
                            continue;
                        }
                        let q: i128 = (0..4)
                            .flat_map(|i| (0..4).map(move |j| (i, j)))
                            .map(|(i, j)| c[i] as i128 * gram[i][j] * c[j] as i128)
                            .sum::<i128>()
                            / 2;
                        if q % ell != 0 {
                            continue;
                        }
                        let beta = ideal.combination(&c);
                        let mut gens = scaled.clone();
                        gens.extend(obasis.iter().map(|o| alg.mul(&beta, o)));
                        let j = Lattice::from_elems(&gens)?;
                        if !out.contains(&j) {
                            out.push(j);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Whether J = αI for some α in the algebra.
    pub fn equivalent(&self, i: &Lattice, j: &Lattice) -> Result<bool, QuatError> {
        let alg = self.alg();
        let prod = j.product(&i.conj()?, alg)?;
        let norm = mul_norms(i.norm(alg), j.norm(alg));
        let gram = gram_over_norm(&prod, alg, norm)?;
        Ok(ReducedForm::new(&gram).represents(1))
    }

    /// Index of the class containing the right ideal, if any.
    pub fn find_class(&self, ideal: &Lattice) -> Result<Option<usize>, QuatError> {
        for (k, c) in self.classes.iter().enumerate() {
            if self.equivalent(&c.ideal, ideal)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    pub fn class_of(&self, ideal: &Lattice) -> Result<usize, QuatError> {
        self.find_class(ideal)?
            .ok_or_else(|| QuatError::SearchExhausted("ideal matches no class".into()))
    }

    /// θ_ij(m) = #{β ∈ I_i Ī_j : nrd(β) = m · nrd(I_i) nrd(I_j)} for m ≤ bound.
    pub fn theta(&self, i: usize, j: usize, bound: u64) -> Result<Vec<u64>, QuatError> {
        let alg = self.alg();
        let (ci, cj) = (&self.classes[i], &self.classes[j]);
        let prod = ci.ideal.product(&cj.ideal.conj()?, alg)?;
        let gram = gram_over_norm(&prod, alg, mul_norms(ci.norm, cj.norm))?;
        Ok(ReducedForm::new(&gram).theta_series(bound))
    }

    /// Brandt matrices B(m) for 1 ≤ m ≤ bound (index 0 left zero), B(m)_ij = θ_ij(m) / (2 w_j).
    pub fn brandt_series(&self, bound: u64) -> Result<Vec<Vec<Vec<i64>>>, QuatError> {
        let h = self.len();
        let pairs: Vec<(usize, usize)> = (0..h).flat_map(|i| (i..h).map(move |j| (i, j))).collect();
        let thetas: Vec<Vec<u64>> = pairs
            .par_iter()
            .map(|&(i, j)| self.theta(i, j, bound))
            .collect::<Result<_, _>>()?;
        let mut out = vec![vec![vec![0i64; h]; h]; bound as usize + 1];
        for (&(i, j), th) in pairs.iter().zip(&thetas) {
            for (m, &count) in th.iter().enumerate().skip(1) {
                for (r, c) in [(i, j), (j, i)] {
                    let denom = 2 * self.classes[c].weight;
                    if count % denom != 0 {
                        return Err(QuatError::NonIntegralForm);
                    }
                    out[m][r][c] = (count / denom) as i64;
                }
            }
        }
        Ok(out)
    }

    pub fn brandt(&self, m: u64) -> Result<Vec<Vec<i64>>, QuatError> {
        Ok(self.brandt_series(m)?.swap_remove(m as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_two_has_one_class() {
        let cs = ClassSet::new(2).unwrap();
        assert_eq!(cs.weights(), vec![12]);
        assert_eq!(cs.brandt(3).unwrap(), vec![vec![4]]);
    }

    #[test]
    fn level_eleven() {
        let cs = ClassSet::new(11).unwrap();
        let mut w = cs.weights();
        w.sort_unstable();
        assert_eq!(w, vec![2, 3]);
        let b2 = cs.brandt(2).unwrap();
        let trace = b2[0][0] + b2[1][1];
        // eigenvalues 3 and a_2 = −2
        assert_eq!(trace, 1);
        assert_eq!(b2[0][0] * b2[1][1] - b2[0][1] * b2[1][0], -6);
    }

    #[test]
    fn mass_formula_and_row_sums() {
        for n in [3u64, 5, 7, 13, 23, 37, 101, 105] {
            let cs = ClassSet::new(n).unwrap();
            assert_eq!(cs.mass(), expected_mass(n), "level {n}");
            let series = cs.brandt_series(7).unwrap();
            for m in 1..=7u64 {
                if num_integer::gcd(m, n) != 1 {
                    continue;
                }
                for row in &series[m as usize] {
                    assert_eq!(
                        row.iter().sum::<i64>(),
                        arith::sigma1(m) as i64,
                        "level {n} m {m}"
                    );
                }
            }
        }
    }

    #[test]
    fn neighbours_count() {
        let cs = ClassSet::new(37).unwrap();
        let nb = cs.neighbours(&cs.order.lattice, 2).unwrap();
        assert_eq!(nb.len(), 3);
        let nb3 = cs.neighbours(&cs.order.lattice, 3).unwrap();
        assert_eq!(nb3.len(), 4);
    }
}
