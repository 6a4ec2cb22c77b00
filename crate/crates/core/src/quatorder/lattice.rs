use num_integer::Integer;

use super::algebra::{reduce_frac, Elem, QuaternionAlgebra};
use super::QuatError;

/// A full-rank Z-lattice in the algebra: the row span of `rows / den`, rows in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub rows: [[i128; 4]; 4],
    pub den: i128,
}

fn ck(x: Option<i128>) -> Result<i128, QuatError> {
    x.ok_or(QuatError::Overflow)
}

/// Row Hermite normal form of an integer matrix with four columns; returns the nonzero rows.
pub fn hnf(mut m: Vec<[i128; 4]>) -> Result<Vec<[i128; 4]>, QuatError> {
    let mut top = 0;
    for col in 0..4 {
        loop {
            // find the row (at or below top) with the smallest nonzero |entry| in this column
            let mut best: Option<usize> = None;
            for r in top..m.len() {
                if m[r][col] != 0 && best.is_none_or(|b| m[r][col].abs() < m[b][col].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            m.swap(top, b);
            let mut done = true;
            for r in top + 1..m.len() {
                if m[r][col] != 0 {
                    let q = Integer::div_floor(&m[r][col], &m[top][col]);
                    for c in 0..4 {
                        m[r][c] = ck(m[r][c].checked_sub(ck(q.checked_mul(m[top][c]))?))?;
                    }
                    if m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if top < m.len() && m[top][col] != 0 {
            if m[top][col] < 0 {
                for c in 0..4 {
                    m[top][c] = -m[top][c];
                }
            }
            top += 1;
        }
    }
    m.truncate(top);
    // reduce entries above each pivot
    for i in 0..m.len() {
        let pc = (0..4).find(|&c| m[i][c] != 0).unwrap();
        let piv = m[i][pc];
        for r in 0..i {
            let q = Integer::div_floor(&m[r][pc], &piv);
            if q != 0 {
                for c in 0..4 {
                    m[r][c] = ck(m[r][c].checked_sub(ck(q.checked_mul(m[i][c]))?))?;
                }
            }
        }
    }
    Ok(m)
}

impl Lattice {
    /// Lattice spanned by `gens / den`; errors if the span has rank below four.
    pub fn from_generators(gens: Vec<[i128; 4]>, den: i128) -> Result<Self, QuatError> {
        let rows = hnf(gens)?;
        if rows.len() != 4 {
            return Err(QuatError::RankDeficient);
        }
        let mut l = Lattice {
            rows: [rows[0], rows[1], rows[2], rows[3]],
            den,
        };
        l.normalize();
        Ok(l)
    }

    pub fn from_elems(elems: &[Elem]) -> Result<Self, QuatError> {
        let den = elems.iter().fold(1i128, |acc, e| acc.lcm(&e.den));
        let gens = elems
            .iter()
            .map(|e| e.v.map(|x| x * (den / e.den)))
            .collect();
        Self::from_generators(gens, den)
    }

    fn normalize(&mut self) {
        let mut g = self.den;
        for r in &self.rows {
            for &x in r {
                g = g.gcd(&x);
            }
        }
        if g > 1 {
            for r in &mut self.rows {
                for x in r.iter_mut() {
                    *x /= g;
                }
            }
            self.den /= g;
        }
    }

    pub fn basis(&self) -> [Elem; 4] {
        self.rows.map(|v| Elem { v, den: self.den })
    }

    /// |det| of the basis in coordinates (1, i, j, k), as a reduced fraction.
    pub fn covolume(&self) -> (i128, i128) {
        let d: i128 = (0..4).map(|i| self.rows[i][i]).product();
        reduce_frac(d.abs(), self.den.pow(4))
    }

    /// Index [self : sub] for a sublattice.
    pub fn index_of(&self, sub: &Lattice) -> Option<i128> {
        let (n1, d1) = self.covolume();
        let (n2, d2) = sub.covolume();
        let (n, d) = reduce_frac(n2 * d1, d2 * n1);
        (d == 1).then_some(n)
    }

    pub fn contains(&self, x: &Elem) -> bool {
        // solve coordinates in the triangular basis
        let mut rem: [i128; 4] = x.v.map(|c| c * self.den);
        let xden = x.den;
        for i in 0..4 {
            let piv = self.rows[i][i] * xden;
            if rem[i] % piv != 0 {
                return false;
            }
            let q = rem[i] / piv;
            for c in 0..4 {
                rem[c] -= q * self.rows[i][c] * xden;
            }
        }
        rem.iter().all(|&c| c == 0)
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis().iter().all(|e| self.contains(e))
    }

    pub fn conj(&self) -> Result<Self, QuatError> {
        let gens = self
            .rows
            .iter()
            .map(|r| [r[0], -r[1], -r[2], -r[3]])
            .collect();
        Self::from_generators(gens, self.den)
    }

    pub fn scale(&self, num: i128, den: i128) -> Result<Self, QuatError> {
        let gens = self.rows.iter().map(|r| r.map(|x| x * num)).collect();
        Self::from_generators(gens, self.den * den)
    }

    /// Z-span of all products x·y with x in self, y in other.
    pub fn product(&self, other: &Lattice, alg: &QuaternionAlgebra) -> Result<Self, QuatError> {
        let mut gens = Vec::with_capacity(16);
        for x in &self.rows {
            for y in &other.rows {
                gens.push(alg.mul_int(x, y));
            }
        }
        Self::from_generators(gens, self.den * other.den)
    }

    /// Span of self together with extra elements.
    pub fn with(&self, extra: &[Elem]) -> Result<Self, QuatError> {
        let mut elems = self.basis().to_vec();
        elems.extend_from_slice(extra);
        Self::from_elems(&elems)
    }

    /// Matrix trd(e_i ē_j) as integers over the common denominator `den²`.
    pub fn trace_matrix(&self, alg: &QuaternionAlgebra) -> [[i128; 4]; 4] {
        let mut m = [[0i128; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = alg.trace_pair_int(&self.rows[i], &self.rows[j]);
            }
        }
        m
    }

    /// Norm of the lattice: the positive generator of the Z-module spanned by nrd(L), as a fraction.
    pub fn norm(&self, alg: &QuaternionAlgebra) -> (i128, i128) {
        let m = self.trace_matrix(alg);
        let mut g = 0i128;
        for i in 0..4 {
            g = g.gcd(&(m[i][i] / 2));
            for j in i + 1..4 {
                g = g.gcd(&m[i][j]);
            }
        }
        reduce_frac(g, self.den * self.den)
    }

    /// Integral Gram matrix of nrd(x)/nrd(L): q(x) = xᵀ T x / 2, diagonal even.
    pub fn normalized_gram(&self, alg: &QuaternionAlgebra) -> Vec<Vec<i128>> {
        let m = self.trace_matrix(alg);
        let mut g = 0i128;
        for i in 0..4 {
            g = g.gcd(&(m[i][i] / 2));
            for j in i + 1..4 {
                g = g.gcd(&m[i][j]);
            }
        }
        m.iter()
            .map(|r| r.iter().map(|&x| x / g).collect())
            .collect()
    }

    /// Gram matrix of nrd scaled by an explicit factor: T_ij = trd(e_i ē_j) · num / den, must be integral.
    pub fn scaled_gram(
        &self,
        alg: &QuaternionAlgebra,
        num: i128,
        den: i128,
    ) -> Result<Vec<Vec<i128>>, QuatError> {
        let m = self.trace_matrix(alg);
        let total_den = den * self.den * self.den;
        m.iter()
            .map(|r| {
                r.iter()
                    .map(|&x| {
                        let v = x * num;
                        if v % total_den != 0 {
                            Err(QuatError::NonIntegralForm)
                        } else {
                            Ok(v / total_den)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Element with integer coordinates `c` in this lattice's basis.
    pub fn combination(&self, c: &[i64]) -> Elem {
        let mut v = [0i128; 4];
        for (i, &ci) in c.iter().enumerate() {
            for k in 0..4 {
                v[k] += ci as i128 * self.rows[i][k];
            }
        }
        Elem { v, den: self.den }.normalized()
    }
}
