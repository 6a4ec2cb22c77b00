//! Brandt eigenbases and the spectral side of the weight-two trace formula.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::heckemeasure::HeckeElement;
use crate::qfield::{ClassCharacter, QuadField};
use crate::quatorder::{ClassSet, QuatError};
use crate::torusmap::PeriodData;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error(transparent)]
    Quat(#[from] QuatError),
    #[error("Hecke prime {0} divides the level")]
    BadPrime(u64),
    #[error("eigen and delta routes disagree: {eigen} vs {delta}")]
    RouteMismatch { eigen: f64, delta: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Simultaneous eigenbasis of the Brandt operators B(p), p ∤ N.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub level: u64,
    pub weights: Vec<u64>,
    pub primes: Vec<u64>,
    /// B(p) for each prime in `primes`.
    pub brandt: Vec<DMatrix<f64>>,
    /// Eigenfunctions h on X, orthonormal for ⟨φ, ψ⟩ = Σ_x φ(x) ψ(x) / w_x.
    pub vectors: Vec<DVector<f64>>,
    /// eigenvalues[j][i] is the B(primes[i])-eigenvalue of vectors[j], integers snapped.
    pub eigenvalues: Vec<Vec<f64>>,
    pub eisenstein: usize,
    /// Largest residual ‖B(p)h − λh‖ over all forms and primes.
    pub max_residual: f64,
}

fn to_matrix(m: &[Vec<i64>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j] as f64)
}

fn snap(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-6 {
        x.round()
    } else {
        x
    }
}

impl EigenData {
    /// Diagonalizes a generic combination of B(p) for the given primes.
    pub fn new(cs: &ClassSet, primes: &[u64]) -> Result<Self, SpectralError> {
        let level = cs.level();
        if let Some(&p) = primes.iter().find(|&&p| level.is_multiple_of(p)) {
            return Err(SpectralError::BadPrime(p));
        }
        let bound = primes.iter().copied().max().unwrap_or(1);
        let series = cs.brandt_series(bound)?;
        let brandt: Vec<DMatrix<f64>> = primes
            .iter()
            .map(|&p| to_matrix(&series[p as usize]))
            .collect();
        let weights = cs.weights();
        let h = weights.len();
        let sqrt_w = DVector::from_iterator(h, weights.iter().map(|&w| (w as f64).sqrt()));
        // W^{-1/2} B W^{1/2} is symmetric, with W = diag(w)
        let sym =
            |b: &DMatrix<f64>| DMatrix::from_fn(h, h, |i, j| b[(i, j)] * sqrt_w[j] / sqrt_w[i]);
        let mut generic = DMatrix::zeros(h, h);
        for (k, b) in brandt.iter().enumerate() {
            generic += sym(b) * (1.0 / (k as f64 + std::f64::consts::SQRT_2));
        }
        let generic = (&generic + generic.transpose()) * 0.5;
        let eig = SymmetricEigen::new(generic);
        let mut vectors = Vec::with_capacity(h);
        let mut eigenvalues = Vec::with_capacity(h);
        let mut max_residual: f64 = 0.0;
        for j in 0..h {
            let v = eig.eigenvectors.column(j).into_owned();
            let hvec = v.component_mul(&sqrt_w);
            let lams: Vec<f64> = brandt
                .iter()
                .map(|b| {
                    let s = sym(b);
                    let lam = v.dot(&(&s * &v));
                    max_residual = max_residual.max((&s * &v - &v * lam).norm());
                    snap(lam)
                })
                .collect();
            vectors.push(hvec);
            eigenvalues.push(lams);
        }
        // sort: Eisenstein first, then by eigenvalue tuples
        let mut order: Vec<usize> = (0..h).collect();
        let is_eis = |lams: &[f64]| {
            lams.iter()
                .zip(primes)
                .all(|(l, &p)| (l - (p as f64 + 1.0)).abs() < 1e-6)
        };
        order.sort_by(|&a, &b| {
            is_eis(&eigenvalues[b])
                .cmp(&is_eis(&eigenvalues[a]))
                .then_with(|| {
                    eigenvalues[a]
                        .iter()
                        .zip(&eigenvalues[b])
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        let mut vectors: Vec<DVector<f64>> = order.iter().map(|&k| vectors[k].clone()).collect();
        let eigenvalues: Vec<Vec<f64>> = order.iter().map(|&k| eigenvalues[k].clone()).collect();
        // fix the sign so the first nonzero entry is positive
        for v in &mut vectors {
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-9).copied() {
                if first < 0.0 {
                    *v = -v.clone();
                }
            }
        }
        let eisenstein = if primes.is_empty() || is_eis(&eigenvalues[0]) {
            0
        } else {
            usize::MAX
        };
        Ok(Self {
            level,
            weights,
            primes: primes.to_vec(),
            brandt,
            vectors,
            eigenvalues,
            eisenstein,
            max_residual,
        })
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .zip(&self.weights)
            .map(|((x, y), &w)| x * y / w as f64)
            .sum()
    }

    pub fn cusp_count(&self) -> usize {
        self.vectors.len() - 1
    }

    /// Eigenvalue of B(p) on the j-th form; p must be among `primes`.
    pub fn eigenvalue(&self, j: usize, p: u64) -> Option<f64> {
        let i = self.primes.iter().position(|&q| q == p)?;
        Some(self.eigenvalues[j][i])
    }

    /// Whether distinct forms have distinct eigenvalue tuples.
    pub fn multiplicity_one(&self) -> bool {
        (0..self.vectors.len()).all(|a| {
            (a + 1..self.vectors.len()).all(|b| {
                self.eigenvalues[a]
                    .iter()
                    .zip(&self.eigenvalues[b])
                    .any(|(x, y)| (x - y).abs() > 1e-6)
            })
        })
    }

    /// Matrix of f ∈ H(PGL_2(Q_p)) acting through B(p^n) − B(p^{n−2}).
    pub fn hecke_matrix(
        &self,
        f: &HeckeElement,
    ) -> Result<Vec<(Complex64, DMatrix<f64>)>, SpectralError> {
        let p = f.q;
        let deg = f.degree();
        let h = self.weights.len();
        let id = DMatrix::<f64>::identity(h, h);
        if deg == 0 {
            return Ok(vec![(f.coeffs[0], id)]);
        }
        let i = self
            .primes
            .iter()
            .position(|&q| q == p)
            .ok_or(SpectralError::BadPrime(p))?;
        let tp = &self.brandt[i];
        let mut powers = vec![id.clone(), tp.clone()];
        while powers.len() <= deg {
            let n = powers.len();
            let next = tp * &powers[n - 1] - &powers[n - 2] * p as f64;
            powers.push(next);
        }
        Ok((0..=deg)
            .map(|n| {
                let m = if n < 2 {
                    powers[n].clone()
                } else {
                    &powers[n] - &powers[n - 2]
                };
                (f.coeffs[n], m)
            })
            .collect())
    }
}

/// One spectral term: a Brandt eigenform with its period.
#[derive(Debug, Clone, Serialize)]
pub struct FormTerm {
    pub eigenvalues: Vec<f64>,
    pub is_eisenstein: bool,
    /// |Σ_x h_x P_x|² for the normalized eigenfunction h.
    pub period_sq: f64,
    /// f̂ at λ_p/√p (1 for the identity).
    pub hecke_weight: Complex64,
    /// L(1/2, π_E ⊗ Ω) / L(1, π, Ad) for cusp forms.
    pub l_ratio: Option<f64>,
}

/// Both evaluations of the period sum Σ_h f̂(h) |⟨P, h⟩|².
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub delta_route: Complex64,
    pub eigen_route: Complex64,
    /// Cuspidal part Σ_{h cusp} f̂ |P(h)|².
    pub raw_period_sum: Complex64,
    /// f̂(x_res) |Σ_x P_x|² / (1, 1).
    pub eisenstein_correction: Complex64,
    /// Σ_{h cusp} f̂ L(1/2, π_E ⊗ Ω)/L(1, π, Ad).
    pub l_average: Complex64,
    pub forms: Vec<FormTerm>,
}

/// (1, 1) = Σ_x 1/w_x.
pub fn constant_norm(weights: &[u64]) -> f64 {
    weights.iter().map(|&w| 1.0 / w as f64).sum()
}

/// L(2, 1_Q) L_{S(Ω)}(1, η)² / (2 √(c(Ω)|D|)) ∏_{p|N}(1 − 1/p) Γ(2k) / (π Γ(k+m) Γ(k−m)).
pub fn waldspurger_constant(
    level: u64,
    field: &QuadField,
    omega: &ClassCharacter,
    k: u32,
) -> Result<f64, SpectralError> {
    let m = omega.weight_m;
    if m.unsigned_abs() >= k as u64 {
        return Err(SpectralError::Unsupported(format!(
            "|m| = {} ≥ k = {k}",
            m.abs()
        )));
    }
    if omega.conductor != 1 {
        return Err(SpectralError::Unsupported("ramified Ω".into()));
    }
    let gamma = |n: i64| -> f64 { (1..n).map(|i| i as f64).product() };
    let local: f64 = crate::arith::factor(level)
        .iter()
        .map(|&(p, _)| 1.0 - 1.0 / p as f64)
        .product();
    let l2 = std::f64::consts::PI / 6.0;
    // S(Ω) is empty for class-group characters
    let ls = 1.0;
    let k = k as i64;
    Ok(
        l2 * ls * ls / (2.0 * ((omega.conductor * field.d_abs) as f64).sqrt())
            * local
            * gamma(2 * k)
            / (std::f64::consts::PI * gamma(k + m) * gamma(k - m)),
    )
}

/// Factor turning |P(h)|²/‖h‖² into the normalized torus period: 2 (1, 1) / (u² |D|).
pub fn period_normalization(field: &QuadField, weights: &[u64]) -> f64 {
    let u = field.units as f64;
    2.0 * constant_norm(weights) / (u * u * field.d_abs as f64)
}

/// Conversion from the classical period sum to the adelic trace-formula normalization: 4/(u² |D|).
pub fn adelic_scale(field: &QuadField) -> f64 {
    let u = field.units as f64;
    4.0 / (u * u * field.d_abs as f64)
}

/// Residual spectral point: f̂ at √p + 1/√p for trivial Ω, zero otherwise.
pub fn residual_term(k: u32, omega: &ClassCharacter, f: &HeckeElement) -> Complex64 {
    if k != 1 || !omega.is_trivial() {
        return Complex64::new(0.0, 0.0);
    }
    let q = f.q as f64;
    f.hat(q.sqrt() + 1.0 / q.sqrt())
}

/// Spectral side for weight two: delta-basis and eigenbasis evaluations of the Hecke-weighted period sum.
pub fn spectral_average(
    eig: &EigenData,
    pd: &PeriodData,
    field: &QuadField,
    omega: &ClassCharacter,
    f: &HeckeElement,
    rel_tol: f64,
) -> Result<SpectralReport, SpectralError> {
    let period = pd.period_vector(omega);
    let w = &eig.weights;
    let hx = eig.weights.len();
    // delta route: Σ_{x,x'} P_x conj(P_x') M_{xx'} w_{x'}
    let mut delta_route = Complex64::new(0.0, 0.0);
    for (c, m) in eig.hecke_matrix(f)? {
        let mut s = Complex64::new(0.0, 0.0);
        for x in 0..hx {
            for y in 0..hx {
                s += period[x] * period[y].conj() * m[(x, y)] * w[y] as f64;
            }
        }
        delta_route += c * s;
    }
    let wald = waldspurger_constant(eig.level, field, omega, 1)?;
    let norm = period_normalization(field, w);
    let mut forms = Vec::with_capacity(hx);
    let mut eigen_route = Complex64::new(0.0, 0.0);
    let mut raw = Complex64::new(0.0, 0.0);
    let mut l_average = Complex64::new(0.0, 0.0);
    let mut eis = Complex64::new(0.0, 0.0);
    for (j, h) in eig.vectors.iter().enumerate() {
        let pairing: Complex64 = period.iter().zip(h.iter()).map(|(p, hv)| p * hv).sum();
        let period_sq = pairing.norm_sqr();
        let is_eis = j == eig.eisenstein;
        let weight = if f.degree() == 0 {
            f.coeffs[0]
        } else {
            let lam = eig.eigenvalue(j, f.q).ok_or(SpectralError::BadPrime(f.q))?;
            f.hat(lam / (f.q as f64).sqrt())
        };
        eigen_route += weight * period_sq;
        let l_ratio = (!is_eis).then(|| norm * period_sq / wald);
        if is_eis {
            eis += weight * period_sq;
        } else {
            raw += weight * period_sq;
            l_average += weight * l_ratio.unwrap();
        }
        forms.push(FormTerm {
            eigenvalues: eig.eigenvalues[j].clone(),
            is_eisenstein: is_eis,
            period_sq,
            hecke_weight: weight,
            l_ratio,
        });
    }
    let scale = delta_route.norm().max(eigen_route.norm()).max(1e-300);
    if (delta_route - eigen_route).norm() > rel_tol * scale && scale > 1e-12 {
        return Err(SpectralError::RouteMismatch {
            eigen: eigen_route.re,
            delta: delta_route.re,
        });
    }
    Ok(SpectralReport {
        delta_route,
        eigen_route,
        raw_period_sum: raw,
        eisenstein_correction: eis,
        l_average,
        forms,
    })
}

/// The Eisenstein term predicted in closed form: f̂(x_res) h² / (1, 1) for trivial Ω.
pub fn eisenstein_closed_form(
    h: usize,
    weights: &[u64],
    omega: &ClassCharacter,
    f: &HeckeElement,
) -> Complex64 {
    residual_term(1, omega, f) * (h * h) as f64 / constant_norm(weights)
}
