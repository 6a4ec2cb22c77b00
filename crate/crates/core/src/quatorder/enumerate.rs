//! Short-vector enumeration for positive definite integral quadratic forms
//! q(x) = xᵀ T x / 2 (T integral, even diagonal).

/// A positive definite form together with the LLL transform used to enumerate it.
#[derive(Debug, Clone)]
pub struct ReducedForm {
    /// Gram matrix in the reduced basis.
    pub gram: Vec<Vec<i128>>,
    /// Rows are the reduced basis vectors in original coordinates.
    pub transform: Vec<Vec<i128>>,
}

fn mat_gram(gram: &[Vec<i128>], u: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = gram.len();
    let mut out = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0i128;
            for k in 0..n {
                if u[i][k] == 0 {
                    continue;
                }
                for l in 0..n {
                    s += u[i][k] * gram[k][l] * u[j][l];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

fn gso(g: &[Vec<i128>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * bstar[k];
            }
            mu[i][j] = s / bstar[j];
        }
        let mut s = g[i][i] as f64;
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bstar[k];
        }
        bstar[i] = s;
    }
    (mu, bstar)
}

/// LLL reduction (δ = 0.99) of a positive definite Gram matrix.
pub fn lll(gram: &[Vec<i128>]) -> ReducedForm {
    let n = gram.len();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut g = gram.to_vec();
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gso(&g);
            let r = mu[k][j].round() as i128;
            if r != 0 {
                for c in 0..n {
                    u[k][c] -= r * u[j][c];
                }
                g = mat_gram(gram, &u);
            }
        }
        let (mu, bstar) = gso(&g);
        if bstar[k] < (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            u.swap(k, k - 1);
            g = mat_gram(gram, &u);
            k = k.max(2) - 1;
        } else {
            k += 1;
        }
    }
    ReducedForm {
        gram: g,
        transform: u,
    }
}

fn q_exact(gram: &[Vec<i128>], x: &[i64]) -> i128 {
    let n = gram.len();
    let mut s = 0i128;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        for j in 0..n {
            s += x[i] as i128 * gram[i][j] * x[j] as i128;
        }
    }
    s / 2
}

impl ReducedForm {
    pub fn new(gram: &[Vec<i128>]) -> Self {
        lll(gram)
    }

    /// Calls `visit(x, q(x))` for every nonzero x (in reduced coordinates) with q(x) ≤ bound.
    pub fn for_each_short(&self, bound: u64, mut visit: impl FnMut(&[i64], u64)) {
        let n = self.gram.len();
        // Cholesky-type decomposition q(x) = Σ d_i (x_i + Σ_{j>i} m_ij x_j)²
        let mut q = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                q[i][j] = self.gram[i][j] as f64 / 2.0;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                q[j][i] = q[i][j];
                q[i][j] /= q[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    q[k][l] -= q[k][i] * q[i][l];
                }
            }
        }
        let slack = 1e-6 * (bound as f64 + 1.0);
        let mut x = vec![0i64; n];
        fn recurse(
            i: usize,
            remaining: f64,
            q: &[Vec<f64>],
            x: &mut Vec<i64>,
            slack: f64,
            gram: &[Vec<i128>],
            bound: u64,
            visit: &mut dyn FnMut(&[i64], u64),
        ) {
            let n = q.len();
            let center: f64 = -(i + 1..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
            let radius = ((remaining + slack).max(0.0) / q[i][i]).sqrt();
            let lo = (center - radius).ceil() as i64;
            let hi = (center + radius).floor() as i64;
            if i == 0 {
                // q(x) = (g_00/2) x_0² + x_0 Σ_{j>0} g_0j x_j + q(0, x_1, ...)
                x[0] = 0;
                let lin: i128 = (1..n).map(|j| gram[0][j] * x[j] as i128).sum();
                let rest = q_exact(gram, x);
                let half = gram[0][0] / 2;
                let tail_zero = x[1..].iter().all(|&c| c == 0);
                for xi in lo..=hi {
                    if xi == 0 && tail_zero {
                        continue;
                    }
                    let v = xi as i128;
                    let val = half * v * v + lin * v + rest;
                    if val as u64 <= bound {
                        x[0] = xi;
                        visit(x, val as u64);
                    }
                }
                x[0] = 0;
                return;
            }
            for xi in lo..=hi {
                x[i] = xi;
                let t = xi as f64 - center;
                let rem = remaining - q[i][i] * t * t;
                recurse(i - 1, rem, q, x, slack, gram, bound, visit);
            }
            x[i] = 0;
        }
        recurse(
            n - 1,
            bound as f64,
            &q,
            &mut x,
            slack,
            &self.gram,
            bound,
            &mut visit,
        );
    }

    /// Counts of vectors by value: entry m is #{x : q(x) = m}, entry 0 is 1.
    pub fn theta_series(&self, bound: u64) -> Vec<u64> {
        let mut counts = vec![0u64; bound as usize + 1];
        counts[0] = 1;
        self.for_each_short(bound, |_, v| counts[v as usize] += 1);
        counts
    }

    /// Short vectors with value in [1, bound], returned in original coordinates.
    pub fn short_vectors(&self, bound: u64) -> Vec<(Vec<i64>, u64)> {
        let n = self.gram.len();
        let mut out = Vec::new();
        self.for_each_short(bound, |x, v| {
            let orig: Vec<i64> = (0..n)
                .map(|c| {
                    (0..n)
                        .map(|i| x[i] as i128 * self.transform[i][c])
                        .sum::<i128>() as i64
                })
                .collect();
            out.push((orig, v));
        });
        out
    }

    /// Whether some nonzero vector has q(x) = value.
    pub fn represents(&self, value: u64) -> bool {
        let mut found = false;
        self.for_each_short(value, |_, v| found |= v == value);
        found
    }

    pub fn minimum(&self) -> u64 {
        let n = self.gram.len();
        let bound = (0..n)
            .map(|i| (self.gram[i][i] / 2) as u64)
            .min()
            .unwrap_or(1);
        let mut best = bound;
        self.for_each_short(bound, |_, v| best = best.min(v));
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_theta(gram: &[Vec<i128>], bound: u64, box_size: i64) -> Vec<u64> {
        let mut counts = vec![0u64; bound as usize + 1];
        let r = -box_size..=box_size;
        for a in r.clone() {
            for b in r.clone() {
                for c in r.clone() {
                    for d in r.clone() {
                        let v = q_exact(gram, &[a, b, c, d]);
                        if v as u64 <= bound {
                            counts[v as usize] += 1;
                        }
                    }
                }
            }
        }
        counts
    }

    #[test]
    fn sum_of_four_squares() {
        let g: Vec<Vec<i128>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 2 } else { 0 }).collect())
            .collect();
        let theta = ReducedForm::new(&g).theta_series(10);
        // r_4(n) = 8 σ(n) for odd n, 24 σ(odd part) for even n
        assert_eq!(theta, vec![1, 8, 24, 32, 24, 48, 96, 64, 24, 104, 144]);
    }

    #[test]
    fn skewed_basis_matches_brute_force() {
        // x² + y² + z² + w² in a skewed basis
        let u: Vec<Vec<i128>> = vec![
            vec![1, 3, 0, 2],
            vec![0, 1, 5, 1],
            vec![0, 0, 1, 7],
            vec![0, 0, 0, 1],
        ];
        let id: Vec<Vec<i128>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 2 } else { 0 }).collect())
            .collect();
        let g = mat_gram(&id, &u);
        let theta = ReducedForm::new(&g).theta_series(6);
        assert_eq!(theta, brute_theta(&id, 6, 3));
    }

    #[test]
    fn short_vectors_map_back() {
        let g: Vec<Vec<i128>> = vec![
            vec![4, 2, 0, 1],
            vec![2, 6, 1, 0],
            vec![0, 1, 8, 3],
            vec![1, 0, 3, 10],
        ];
        let rf = ReducedForm::new(&g);
        for (x, v) in rf.short_vectors(12) {
            assert_eq!(q_exact(&g, &x) as u64, v);
        }
        assert_eq!(rf.theta_series(12), brute_theta(&g, 12, 4));
    }
}
