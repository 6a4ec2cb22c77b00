//! Elementary arithmetic over Z and Q_p used throughout the crate.

use num_integer::Integer;

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Infinite,
    Finite(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes `p <= bound` in increasing order (sieve of Eratosthenes).
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Prime factorisation as `(p, e)` pairs with `p` increasing.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn num_divisors(n: u64) -> u64 {
    factor(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Sum of divisors σ_1(n).
pub fn sigma1(n: u64) -> u64 {
    factor(n)
        .iter()
        .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Number of positive common divisors of `a` and `b`.
pub fn common_divisor_count(a: u64, b: u64) -> u64 {
    num_divisors(a.gcd(&b))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Kronecker symbol (a | n).
pub fn kronecker(a: i64, n: i64) -> i32 {
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut k: i32 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    if v % 2 == 1 {
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            k = -k;
        }
    }
    // Jacobi symbol (a | n) for odd positive n.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Whether `d` is a fundamental discriminant.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        return is_squarefree(d.unsigned_abs());
    }
    if m == 0 {
        let e = d / 4;
        let r = e.rem_euclid(4);
        return (r == 2 || r == 3) && is_squarefree(e.unsigned_abs());
    }
    false
}

/// Hilbert symbol (a, b)_v for nonzero integers.
pub fn hilbert_symbol(a: i128, b: i128, place: Place) -> i32 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    let p = match place {
        Place::Infinite => return if a < 0 && b < 0 { -1 } else { 1 },
        Place::Finite(p) => p,
    };
    let alpha = valuation(a, p);
    let beta = valuation(b, p);
    let pi = p as i128;
    let u = a / pi.pow(alpha);
    let v = b / pi.pow(beta);
    if p == 2 {
        let eps = |x: i128| ((x.rem_euclid(4) - 1) / 2) as u32 % 2;
        let omega = |x: i128| {
            let r = x.rem_euclid(8);
            ((r * r - 1) / 8) as u32 % 2
        };
        let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
        if e.is_multiple_of(2) {
            1
        } else {
            -1
        }
    } else {
        let eps_p = ((p - 1) / 2) as u32;
        let mut s = if (alpha * beta * eps_p).is_multiple_of(2) {
            1
        } else {
            -1
        };
        let lu = kronecker(u.rem_euclid(pi) as i64, p as i64);
        let lv = kronecker(v.rem_euclid(pi) as i64, p as i64);
        if beta % 2 == 1 {
            s *= lu;
        }
        if alpha % 2 == 1 {
            s *= lv;
        }
        s
    }
}

/// Binomial coefficient as i128, zero when `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_small_values() {
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-3, 7), 1);
        assert_eq!(kronecker(-23, 2), 1);
        assert_eq!(kronecker(-8, 3), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(-3, -1), -1);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
            for a in -50i64..50 {
                let r = a.rem_euclid(p as i64) as u64;
                let expected = if r == 0 {
                    0
                } else {
                    let mut acc = 1u64;
                    for _ in 0..(p - 1) / 2 {
                        acc = acc * r % p;
                    }
                    if acc == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(kronecker(a, p as i64), expected, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn fundamental_discriminants() {
        let small: Vec<i64> = (-40..0)
            .filter(|&d| is_fundamental_discriminant(d))
            .collect();
        assert_eq!(
            small,
            vec![-40, -39, -35, -31, -24, -23, -20, -19, -15, -11, -8, -7, -4, -3]
        );
    }

    #[test]
    fn hilbert_symbol_product_formula() {
        let vals = [
            -1i128, -2, -3, -5, -7, -11, 2, 3, 5, 6, -6, 10, -15, 21, -22,
        ];
        for &a in &vals {
            for &b in &vals {
                let mut primes: Vec<u64> = vec![2];
                for x in [a, b] {
                    for (p, _) in factor(x.unsigned_abs() as u64) {
                        primes.push(p);
                    }
                }
                primes.sort();
                primes.dedup();
                let mut prod = hilbert_symbol(a, b, Place::Infinite);
                for p in primes {
                    prod *= hilbert_symbol(a, b, Place::Finite(p));
                }
                assert_eq!(prod, 1, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn hamilton_quaternions_ramify_at_two() {
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(-1, -11, Place::Finite(11)), -1);
        assert_eq!(hilbert_symbol(-1, -11, Place::Finite(2)), 1);
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(common_divisor_count(12, 18), 4);
        assert_eq!(common_divisor_count(1, 99), 1);
        assert_eq!(common_divisor_count(7, 7), 2);
        assert_eq!(sigma1(12), 28);
        assert_eq!(euler_phi(105), 48);
        assert_eq!(binomial(6, 2), 15);
    }
}
