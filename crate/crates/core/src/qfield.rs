//! Imaginary quadratic fields: reduced forms, the class group, its characters,
//! and counts of integral ideals by norm and class.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, kronecker};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("discriminant {0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
}

/// Q(√D) for a negative fundamental discriminant D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadField {
    pub disc: i64,
    pub d_abs: u64,
    /// Order of O_E^× / {±1}.
    pub units: u32,
}

impl QuadField {
    pub fn new(disc: i64) -> Result<Self, FieldError> {
        if disc >= 0 || !arith::is_fundamental_discriminant(disc) {
            return Err(FieldError::NotFundamental(disc));
        }
        let units = match disc {
            -3 => 3,
            -4 => 2,
            _ => 1,
        };
        Ok(Self {
            disc,
            d_abs: disc.unsigned_abs(),
            units,
        })
    }

    /// The quadratic character χ_D(n).
    pub fn eta(&self, n: i64) -> i32 {
        kronecker(self.disc, n)
    }

    /// How a rational prime decomposes in O_E.
    pub fn splitting(&self, p: u64) -> Splitting {
        match self.eta(p as i64) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }

    /// Completed L(1, χ_D) = h / (u √|D|).
    pub fn completed_l1(&self, h: usize) -> f64 {
        h as f64 / (self.units as f64 * (self.d_abs as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// A primitive positive definite binary quadratic form ax² + bxy + cy².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Form attached to the primitive ideal [a, (−b + √D)/2].
    pub fn from_ideal(a: i64, b: i64, disc: i64) -> Self {
        let num = b * b - disc;
        debug_assert!(num % (4 * a) == 0);
        Self::new(a, b, num / (4 * a))
    }

    pub fn is_reduced(&self) -> bool {
        let Form { a, b, c } = *self;
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// The unique reduced form in the proper equivalence class.
    pub fn reduce(self) -> Self {
        let Form {
            mut a,
            mut b,
            mut c,
        } = self;
        loop {
            // bring b into (−a, a]
            if b > a || b <= -a {
                let two_a = 2 * a;
                let k = Integer::div_floor(&(a - b), &two_a);
                let nb = b + k * two_a;
                c = (nb * nb - (b * b - 4 * a * c)) / (4 * a);
                b = nb;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return Form { a, b, c };
        }
    }

    /// Gauss composition followed by reduction.
    pub fn compose(&self, other: &Form) -> Form {
        let (mut f1, mut f2) = (*self, *other);
        if f1.a > f2.a {
            std::mem::swap(&mut f1, &mut f2);
        }
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0i128, a1)
        } else {
            let e = a2.extended_gcd(&a1);
            (e.x, e.gcd)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0i128, -1i128, d)
        } else {
            let e = s.extended_gcd(&d);
            (e.x, -e.y, e.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
        Form::new(a3 as i64, b3 as i64, c3 as i64).reduce()
    }

    pub fn inverse(&self) -> Form {
        Form::new(self.a, -self.b, self.c).reduce()
    }
}

/// All reduced primitive forms of discriminant `disc`, sorted.
pub fn reduced_forms(disc: i64) -> Vec<Form> {
    let dd = disc.abs();
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= dd {
        for b in -a..=a {
            if (b * b - disc) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - disc) / (4 * a);
            if c < a {
                continue;
            }
            if (b.abs() == a || a == c) && b < 0 {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push(Form::new(a, b, c));
        }
        a += 1;
    }
    out.sort();
    out
}

/// The ideal class group of O_E, realised on reduced forms.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    pub field: QuadField,
    pub elements: Vec<Form>,
    index: HashMap<Form, usize>,
    table: Vec<Vec<usize>>,
    /// Invariant factors d_1 | d_2 | ... (empty for the trivial group).
    pub structure: Vec<u64>,
    generators: Vec<usize>,
    logs: Vec<Vec<u64>>,
}

impl ClassGroup {
    pub fn new(field: QuadField) -> Self {
        let elements = reduced_forms(field.disc);
        let index: HashMap<Form, usize> =
            elements.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|f| elements.iter().map(|g| index[&f.compose(g)]).collect())
            .collect();
        let mut group = Self {
            field,
            elements,
            index,
            table,
            structure: Vec::new(),
            generators: Vec::new(),
            logs: Vec::new(),
        };
        group.structure = group.invariant_factors();
        group.generators = group.find_basis();
        group.logs = group.discrete_logs();
        group
    }

    pub fn h(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn pow(&self, x: usize, e: u64) -> usize {
        let mut acc = self.identity();
        for _ in 0..e {
            acc = self.mul(acc, x);
        }
        acc
    }

    pub fn inv(&self, x: usize) -> usize {
        self.index[&self.elements[x].inverse()]
    }

    /// Class index of an arbitrary primitive form of the right discriminant.
    pub fn class_of(&self, f: Form) -> usize {
        self.index[&f.reduce()]
    }

    pub fn order(&self, x: usize) -> u64 {
        let mut k = 1;
        let mut y = x;
        while y != self.identity() {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    /// Checks associativity, identity, inverses and commutativity on the full table.
    pub fn verify_table(&self) -> bool {
        let h = self.h();
        for x in 0..h {
            if self.mul(0, x) != x || self.mul(x, self.inv(x)) != 0 {
                return false;
            }
            for y in 0..h {
                if self.mul(x, y) != self.mul(y, x) {
                    return false;
                }
                for z in 0..h {
                    if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn invariant_factors(&self) -> Vec<u64> {
        let h = self.h() as u64;
        let orders: Vec<u64> = (0..self.h()).map(|x| self.order(x)).collect();
        // per prime, recover the partition from the sizes of the p^j-torsion
        let mut per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
        for (p, e) in arith::factor(h) {
            let mut ranks = Vec::new();
            let mut prev = 1u64;
            for j in 1..=e {
                let pj = p.pow(j);
                let size = orders.iter().filter(|&&o| pj % o == 0).count() as u64;
                let mut r = 0;
                let mut q = size / prev;
                while q > 1 {
                    q /= p;
                    r += 1;
                }
                ranks.push(r);
                prev = size;
            }
            // ranks[j-1] = number of cyclic p-factors of exponent >= j
            let n_factors = ranks[0] as usize;
            let mut exps = vec![0u32; n_factors];
            for (j, &r) in ranks.iter().enumerate() {
                for slot in exps.iter_mut().take(r as usize) {
                    *slot = j as u32 + 1;
                }
            }
            per_prime.push((p, exps));
        }
        let len = per_prime.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
        let mut out = vec![1u64; len];
        for (p, exps) in per_prime {
            // largest exponents go to the last invariant factor
            for (i, e) in exps.iter().enumerate() {
                out[len - 1 - i] *= p.pow(*e);
            }
        }
        out
    }

    fn find_basis(&self) -> Vec<usize> {
        let orders: Vec<u64> = (0..self.h()).map(|x| self.order(x)).collect();
        let mut chosen = Vec::new();
        let members = vec![self.identity()];
        let targets: Vec<u64> = self.structure.iter().rev().copied().collect();
        if self.search_basis(&targets, &orders, &members, &mut chosen) {
            chosen.reverse();
            chosen
        } else {
            unreachable!("finite abelian group always admits a basis")
        }
    }

    fn search_basis(
        &self,
        targets: &[u64],
        orders: &[u64],
        members: &[usize],
        chosen: &mut Vec<usize>,
    ) -> bool {
        let Some((&target, rest)) = targets.split_first() else {
            return true;
        };
        for g in 0..self.h() {
            if orders[g] != target {
                continue;
            }
            let mut span = Vec::with_capacity(members.len() * target as usize);
            let mut power = self.identity();
            for _ in 0..target {
                for &m in members {
                    span.push(self.mul(m, power));
                }
                power = self.mul(power, g);
            }
            let mut uniq = span.clone();
            uniq.sort_unstable();
            uniq.dedup();
            if uniq.len() != span.len() {
                continue;
            }
            chosen.push(g);
            if self.search_basis(rest, orders, &span, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    fn discrete_logs(&self) -> Vec<Vec<u64>> {
        let mut logs = vec![Vec::new(); self.h()];
        let mut stack: Vec<(usize, Vec<u64>)> = vec![(self.identity(), Vec::new())];
        for (i, &g) in self.generators.iter().enumerate() {
            let d = self.structure[i];
            let mut next = Vec::new();
            for (elt, exps) in &stack {
                let mut y = *elt;
                for e in 0..d {
                    let mut v = exps.clone();
                    v.push(e);
                    next.push((y, v));
                    y = self.mul(y, g);
                }
            }
            stack = next;
        }
        for (elt, exps) in stack {
            logs[elt] = exps;
        }
        logs
    }

    /// Exponent vector of `x` in the chosen basis.
    pub fn log(&self, x: usize) -> &[u64] {
        &self.logs[x]
    }

    /// Group exponent (largest invariant factor).
    pub fn exponent(&self) -> u64 {
        self.structure.last().copied().unwrap_or(1)
    }

    /// All characters, trivial first, in lexicographic order of their labels.
    pub fn characters(&self) -> Vec<ClassCharacter> {
        let mut labels: Vec<Vec<u64>> = vec![Vec::new()];
        for &d in &self.structure {
            labels = labels
                .into_iter()
                .flat_map(|l| {
                    (0..d).map(move |e| {
                        let mut v = l.clone();
                        v.push(e);
                        v
                    })
                })
                .collect();
        }
        labels.into_iter().map(|l| self.character(&l)).collect()
    }

    pub fn character(&self, label: &[u64]) -> ClassCharacter {
        let den = self.exponent();
        let angles = (0..self.h())
            .map(|x| {
                let log = self.log(x);
                label
                    .iter()
                    .zip(log)
                    .zip(&self.structure)
                    .map(|((e, a), d)| e * a * (den / d))
                    .sum::<u64>()
                    % den
            })
            .collect();
        ClassCharacter {
            label: label.to_vec(),
            angle_den: den,
            angles,
            weight_m: 0,
            conductor: 1,
        }
    }

    /// Class of the prime ideal [p, (−b + √D)/2] with the least b ≥ 0; `None` if p is inert.
    pub fn prime_class(&self, p: u64) -> Option<usize> {
        let d = self.field.disc;
        let p = p as i64;
        (0..2 * p)
            .find(|&b| (b * b - d).rem_euclid(4 * p) == 0)
            .map(|b| self.class_of(Form::from_ideal(p, b, d)))
    }

    /// Class of the different (√D)O_E.
    pub fn different_class(&self) -> usize {
        let d = self.field.disc;
        if d % 4 == 0 {
            self.class_of(Form::from_ideal(d.abs() / 4, 0, d))
        } else {
            self.class_of(Form::from_ideal(d.abs(), d.abs(), d))
        }
    }

    /// Integral ideals of norm `n`, enumerated in Hermite normal form g·[a, (−b+√D)/2]
    /// and tallied by class.
    pub fn ideals_of_norm(&self, n: u64) -> Vec<(usize, u64)> {
        let d = self.field.disc;
        let mut counts = vec![0u64; self.h()];
        let mut g = 1u64;
        while g * g <= n {
            if n.is_multiple_of(g * g) {
                let a = (n / (g * g)) as i64;
                for b in 0..2 * a {
                    if (b * b - d).rem_euclid(4 * a) == 0 {
                        counts[self.class_of(Form::from_ideal(a, b, d))] += 1;
                    }
                }
            }
            g += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .collect()
    }

    /// Number of integral ideals of norm `n`.
    pub fn ideal_count(&self, n: u64) -> u64 {
        self.ideals_of_norm(n).iter().map(|&(_, c)| c).sum()
    }

    /// θ-series coefficients b_1..b_{n_max} of Ω (index 0 unused), built multiplicatively
    /// from prime ideal classes.
    pub fn theta_coefficients(&self, omega: &ClassCharacter, n_max: usize) -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); n_max + 1];
        if n_max == 0 {
            return b;
        }
        // local series at each prime, by class: counts[e][class]
        let mut local: HashMap<u64, Vec<Complex64>> = HashMap::new();
        for p in arith::primes_up_to(n_max as u64) {
            let mut coeffs = vec![Complex64::new(1.0, 0.0)];
            let mut pe = p;
            let mut e = 1u32;
            while pe <= n_max as u64 {
                let val = match self.field.splitting(p) {
                    Splitting::Inert => {
                        if e.is_multiple_of(2) {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    }
                    Splitting::Ramified => {
                        let c = self.prime_class(p).unwrap();
                        omega.value(self.pow(c, e as u64))
                    }
                    Splitting::Split => {
                        let c = self.prime_class(p).unwrap();
                        let cbar = self.inv(c);
                        (0..=e)
                            .map(|i| {
                                let cls =
                                    self.mul(self.pow(c, i as u64), self.pow(cbar, (e - i) as u64));
                                omega.value(cls)
                            })
                            .sum()
                    }
                };
                coeffs.push(val);
                pe *= p;
                e += 1;
            }
            local.insert(p, coeffs);
        }
        b[1] = Complex64::new(1.0, 0.0);
        for n in 2..=n_max {
            let mut acc = Complex64::new(1.0, 0.0);
            for (p, e) in arith::factor(n as u64) {
                acc *= local[&p][e as usize];
            }
            b[n] = acc;
        }
        b
    }
}

/// A character of the class group, stored as exact angles k/den (value e^{2πik/den}).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCharacter {
    pub label: Vec<u64>,
    pub angle_den: u64,
    pub angles: Vec<u64>,
    /// Archimedean weight m (zero for class-group characters).
    pub weight_m: i64,
    /// Absolute norm of the conductor (one for class-group characters).
    pub conductor: u64,
}

impl ClassCharacter {
    pub fn value(&self, class: usize) -> Complex64 {
        let a = self.angles[class];
        if a == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let g = a.gcd(&self.angle_den);
        let (num, den) = (a / g, self.angle_den / g);
        match (num, den) {
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.angles.iter().all(|&a| a == 0)
    }

    /// Whether Ω² is trivial.
    pub fn is_quadratic_or_trivial(&self) -> bool {
        self.angles.iter().all(|&a| (2 * a) % self.angle_den == 0)
    }

    pub fn order(&self) -> u64 {
        self.angles
            .iter()
            .map(|&a| self.angle_den / a.gcd(&self.angle_den))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    pub fn conj(&self) -> ClassCharacter {
        let mut c = self.clone();
        c.angles = self
            .angles
            .iter()
            .map(|&a| (self.angle_den - a) % self.angle_den)
            .collect();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(d: i64) -> ClassGroup {
        ClassGroup::new(QuadField::new(d).unwrap())
    }

    /// Units of norm one in the maximal order, counted by brute force, modulo ±1.
    fn unit_oracle(d: i64) -> u32 {
        let mut count = 0;
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                let n = if d % 4 == 0 {
                    x * x - (d / 4) * y * y
                } else {
                    x * x + x * y + ((1 - d) / 4) * y * y
                };
                if n == 1 {
                    count += 1;
                }
            }
        }
        count / 2
    }

    #[test]
    fn field_units() {
        for d in [-3, -4, -7, -8, -23, -420] {
            let f = QuadField::new(d).unwrap();
            assert_eq!(f.units, unit_oracle(d), "D={d}");
        }
        assert!(QuadField::new(-12).is_err());
        assert!(QuadField::new(5).is_err());
    }

    #[test]
    fn small_class_groups() {
        assert_eq!(group(-3).h(), 1);
        assert_eq!(group(-4).h(), 1);
        let g = group(-23);
        assert_eq!(g.h(), 3);
        assert_eq!(g.structure, vec![3]);
        assert_eq!(group(-84).structure, vec![2, 2]);
        assert_eq!(group(-56).structure, vec![4]);
        assert_eq!(group(-420).structure, vec![2, 2, 2]);
        assert_eq!(group(-3299).structure, vec![3, 9]);
    }

    #[test]
    fn tables_are_groups() {
        for d in [-23i64, -47, -84, -231, -420, -971, -3299] {
            assert!(group(d).verify_table(), "D={d}");
        }
    }

    #[test]
    fn characters_orthonormal() {
        for d in [-23i64, -84, -231, -3299] {
            let g = group(d);
            let chars = g.characters();
            assert_eq!(chars.len(), g.h());
            assert!(chars[0].is_trivial());
            for (i, a) in chars.iter().enumerate() {
                for (j, b) in chars.iter().enumerate() {
                    let s: Complex64 = (0..g.h())
                        .map(|y| a.value(y) * b.value(y).conj())
                        .sum::<Complex64>()
                        / g.h() as f64;
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((s - expected).norm() < 1e-12);
                }
                for x in 0..g.h() {
                    for y in 0..g.h() {
                        let lhs = a.value(g.mul(x, y));
                        assert!((lhs - a.value(x) * a.value(y)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn conjugate_characters_for_minus_23() {
        let g = group(-23);
        let chars = g.characters();
        assert_eq!(chars[1].conj().angles, chars[2].angles);
    }

    #[test]
    fn ideal_counts_match_divisor_sum() {
        for d in [-3i64, -4, -7, -8, -15, -23, -24, -84] {
            let g = group(d);
            for n in 1..=500u64 {
                let oracle: i64 = (1..=n)
                    .filter(|e| n % e == 0)
                    .map(|e| kronecker(d, e as i64) as i64)
                    .sum();
                assert_eq!(g.ideal_count(n) as i64, oracle, "D={d} n={n}");
            }
        }
    }

    #[test]
    fn ideals_of_small_norm() {
        let g = group(-4);
        assert_eq!(g.ideals_of_norm(5), vec![(0, 2)]);
        assert!(g.ideals_of_norm(3).is_empty());
        assert_eq!(group(-23).ideals_of_norm(1), vec![(0, 1)]);
    }

    #[test]
    fn theta_matches_ideal_enumeration() {
        for d in [-4i64, -23, -84, -47] {
            let g = group(d);
            for omega in g.characters() {
                let b = g.theta_coefficients(&omega, 300);
                for n in 1..=300u64 {
                    let direct: Complex64 = g
                        .ideals_of_norm(n)
                        .iter()
                        .map(|&(c, m)| omega.value(c) * m as f64)
                        .sum();
                    assert!((b[n as usize] - direct).norm() < 1e-9, "D={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn theta_examples() {
        let g = group(-4);
        let triv = &g.characters()[0];
        let b = g.theta_coefficients(triv, 10);
        assert_eq!(b[2].re, 1.0);
        assert_eq!(b[5].re, 2.0);
        let g = group(-23);
        let chi = &g.characters()[1];
        let b = g.theta_coefficients(chi, 10);
        assert!((b[2].re + 1.0).abs() < 1e-12 && b[2].im.abs() < 1e-12);
    }

    #[test]
    fn different_is_principal() {
        for d in [-3i64, -4, -8, -23, -84, -420] {
            let g = group(d);
            assert_eq!(g.different_class(), g.identity());
        }
    }

    #[test]
    fn eta_examples() {
        let f = QuadField::new(-4).unwrap();
        assert_eq!(f.eta(3), -1);
        assert_eq!(f.eta(2), 0);
        assert_eq!(QuadField::new(-3).unwrap().eta(7), 1);
    }
}
