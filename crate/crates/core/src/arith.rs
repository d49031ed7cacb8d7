//! Integer primitives: primality, factorization, square divisors and the
//! quadratic characters.
//!
//! Inputs are limited to `2^96` so that every modular product of two reduced
//! residues fits in a `u128` after splitting one operand into 32-bit limbs.

use crate::error::{Error, Result};

/// Largest value accepted by [`factorize`].
pub const FACTOR_LIMIT: u128 = 1 << 96;

const TRIAL_LIMIT: u128 = 1_000_000;

/// Prime/exponent decomposition of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: u128,
    factors: Vec<(u128, u32)>,
}

impl Factorization {
    /// Builds a factorization from prime powers, sorting and merging repeats.
    /// The caller guarantees that every base is prime.
    pub(crate) fn from_prime_powers(mut factors: Vec<(u128, u32)>) -> Self {
        factors.retain(|&(_, e)| e > 0);
        factors.sort_unstable();
        let mut merged: Vec<(u128, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        let value = merged.iter().fold(1u128, |acc, &(p, e)| acc * p.pow(e));
        Factorization {
            value,
            factors: merged,
        }
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    /// Exponent of `p` in the value (0 when absent).
    pub fn exponent_of(&self, p: u128) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Product of two factorizations.
    pub fn multiply(&self, other: &Factorization) -> Factorization {
        let mut all = self.factors.clone();
        all.extend_from_slice(&other.factors);
        Factorization::from_prime_powers(all)
    }

    /// Factorization of `value / s^2`, where `s` is given by its own
    /// factorization and `s^2` must divide the value.
    pub fn divide_square(&self, s: &Factorization) -> Factorization {
        let factors = self
            .factors
            .iter()
            .map(|&(p, e)| {
                let f = s.exponent_of(p);
                debug_assert!(2 * f <= e, "square does not divide");
                (p, e - 2 * f)
            })
            .collect();
        Factorization::from_prime_powers(factors)
    }
}

/// Factors `m` by trial division up to `10^6` followed by Brent's variant of
/// Pollard's rho on the remaining cofactor.
pub fn factorize(m: u128) -> Result<Factorization> {
    if m == 0 {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    if m > FACTOR_LIMIT {
        return Err(Error::Overflow(format!("{m} exceeds 2^96")));
    }
    let mut factors = Vec::new();
    let mut rest = m;
    for p in [2u128, 3, 5] {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    // wheel mod 30 over the remaining candidates
    const STEPS: [u128; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u128;
    let mut i = 0;
    while p <= TRIAL_LIMIT && p * p <= rest {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += STEPS[i];
        i = (i + 1) % 8;
    }
    if rest > 1 {
        let mut stack = vec![rest];
        while let Some(x) = stack.pop() {
            if x == 1 {
                continue;
            }
            if is_prime(x) {
                factors.push((x, 1));
                continue;
            }
            let f = pollard_brent(x);
            stack.push(f);
            stack.push(x / f);
        }
    }
    Ok(Factorization::from_prime_powers(factors))
}

/// All `v >= 1` with `v^2` dividing the factored value, ascending.
pub fn square_divisors(f: &Factorization) -> Vec<u128> {
    let mut out = vec![1u128];
    for &(p, e) in f.factors() {
        let half = e / 2;
        let len = out.len();
        let mut pk = 1u128;
        for _ in 0..half {
            pk *= p;
            for j in 0..len {
                out.push(out[j] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

pub(crate) fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    let a = a % m;
    let b = b % m;
    let mut r = 0u128;
    for shift in [64u32, 32, 0] {
        let limb = (b >> shift) & 0xffff_ffff;
        r = ((r << 32) % m + (a * limb) % m) % m;
    }
    r
}

pub(crate) fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller–Rabin with the first 13 prime bases, deterministic below
/// 3.3·10^24. Above that the test is a strong probable-prime test on 20 bases.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let bases: &[u128] = if n < 3_317_044_064_679_887_385_961_981 {
        &BASES[..13]
    } else {
        &BASES
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in bases {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    num_integer::Integer::gcd(&a, &b)
}

/// Returns a nontrivial factor of the odd composite `n`.
fn pollard_brent(n: u128) -> u128 {
    if n % 2 == 0 {
        return 2;
    }
    if let Some(r) = exact_isqrt(n) {
        return r;
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| (mul_mod(x, x, n) + c) % n;
        let mut y = 2u128;
        let mut r = 1u64;
        let mut q = 1u128;
        let mut g = 1u128;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Floor of the square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|y| y <= n) {
        x += 1;
    }
    x
}

/// `Some(r)` when `n = r^2`.
pub fn exact_isqrt(n: u128) -> Option<u128> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i128, n: u128) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a.rem_euclid(n as i128) as u128;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Jacobi symbol on machine words, for hot loops.
pub fn jacobi_u64(a: u64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: i128, p: u128) -> Result<i8> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
    }
    Ok(jacobi(a, p))
}

/// `(−1/p)` for odd `p`.
pub(crate) fn legendre_minus_one(p: u128) -> i8 {
    if p % 4 == 1 {
        1
    } else {
        -1
    }
}

/// Value of the quadratic character at 2, by `d mod 8`.
fn chi_at_two(d: i128) -> i8 {
    match d.rem_euclid(8) {
        1 => 1,
        5 => -1,
        _ => 0,
    }
}

/// The completely multiplicative quadratic character attached to a
/// discriminant-shaped `d` (`d ≡ 0, 1 mod 4`), evaluated at `m`.
///
/// On odd primes it is the Legendre symbol of `d`, at 2 it depends on `d mod 8`,
/// and `χ_d(−1) = 1`.
pub fn chi_d(d: i128, m: i128) -> Result<i8> {
    let r = d.rem_euclid(4);
    if r != 0 && r != 1 {
        return Err(Error::InvalidInput(format!(
            "{d} is not congruent to 0 or 1 mod 4"
        )));
    }
    Ok(chi_unchecked(d, m))
}

pub(crate) fn chi_unchecked(d: i128, m: i128) -> i8 {
    let m = m.unsigned_abs();
    if m == 0 {
        return if d == 1 { 1 } else { 0 };
    }
    let z = m.trailing_zeros();
    let odd = m >> z;
    let two = if z == 0 {
        1
    } else {
        let c = chi_at_two(d);
        if z % 2 == 0 {
            c * c
        } else {
            c
        }
    };
    two * jacobi(d, odd)
}

/// Quadratic character on machine words; `d ≡ 0, 1 (mod 4)` is assumed.
pub(crate) fn chi_u64(d: u64, m: u64) -> i8 {
    if m == 0 {
        return (d == 1) as i8;
    }
    let z = m.trailing_zeros();
    let odd = m >> z;
    let two = if z == 0 {
        1
    } else {
        let c = chi_at_two(d as i128);
        if z % 2 == 0 {
            c * c
        } else {
            c
        }
    };
    two * jacobi_u64(d, odd)
}

/// Primes up to and including `limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
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

/// Smallest-prime-factor table on `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(mut m: u128) -> Vec<(u128, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= m {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if m > 1 {
            out.push((m, 1));
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(5).unwrap().factors(), &[(5, 1)]);
        assert_eq!(
            factorize(9996).unwrap().factors(),
            &[(2, 2), (3, 1), (7, 2), (17, 1)]
        );
        assert_eq!(factorize(9996).unwrap().factors(), trial_division(9996));
        assert!(factorize(0).is_err());
        assert!(factorize(FACTOR_LIMIT + 1).is_err());
    }

    #[test]
    fn factorize_large_semiprimes() {
        // both factors above the trial-division limit
        let p = 1_000_000_007u128;
        let q = 998_244_353u128;
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors(), &[(q, 1), (p, 1)]);

        let m = 2_147_483_647u128;
        let f = factorize(m * 1_000_003 * 1_000_003).unwrap();
        assert_eq!(f.factors(), &[(1_000_003, 2), (m, 1)]);
        assert_eq!(f.value(), m * 1_000_003 * 1_000_003);

        let big = (1u128 << 61) - 1; // Mersenne prime

        // product above 2^64 of two primes past the trial limit
        let a = 2_147_483_647u128;
        let b = big;
        let f = factorize(a * b).unwrap();
        assert_eq!(f.factors(), &[(a, 1), (b, 1)]);
    }

    #[test]
    fn primality_edge_cases() {
        assert!(!is_prime(0) && !is_prime(1));
        assert!(is_prime(2) && is_prime(3) && is_prime(97));
        // strong pseudoprime to bases 2..37
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(!is_prime(561));
        assert!(is_prime((1u128 << 89) - 1));
    }

    #[test]
    fn square_divisor_examples() {
        assert_eq!(square_divisors(&factorize(5).unwrap()), vec![1]);
        assert_eq!(square_divisors(&factorize(32).unwrap()), vec![1, 2, 4]);
        assert_eq!(
            square_divisors(&factorize(3600).unwrap()),
            vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]
        );
        for m in 1..2000u128 {
            let brute: Vec<u128> = (1..=isqrt(m)).filter(|v| m % (v * v) == 0).collect();
            assert_eq!(square_divisors(&factorize(m).unwrap()), brute, "m = {m}");
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(2, 3).unwrap(), -1);
        assert_eq!(legendre(0, 7).unwrap(), 0);
        assert_eq!(legendre(4, 13).unwrap(), 1);
        assert_eq!(legendre(-1, 7).unwrap(), -1);
        assert!(legendre(1, 2).is_err());
        assert!(legendre(1, 15).is_err());
        for p in [3u128, 5, 7, 11, 13, 101] {
            let squares: Vec<u128> = (1..p).map(|x| x * x % p).collect();
            for a in 0..p {
                let expect = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(a as i128, p).unwrap(), expect);
            }
        }
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_d(5, 2).unwrap(), -1);
        assert_eq!(chi_d(17, 2).unwrap(), 1);
        assert_eq!(chi_d(12, 2).unwrap(), 0);
        assert_eq!(chi_d(12, 35).unwrap(), 1);
        assert_eq!(chi_d(13, -1).unwrap(), 1);
        for d in [5, 8, 12, 13, 21, 229] {
            assert_eq!(chi_d(d, 1).unwrap(), 1);
        }
        assert!(chi_d(14, 3).is_err());
        assert!(chi_d(7, 3).is_err());
    }

    #[test]
    fn chi_matches_defining_values_at_primes() {
        for d in (5..400i128).filter(|d| d % 4 == 0 || d % 4 == 1) {
            for p in primes_up_to(60) {
                let p = p as i128;
                let expect = if p == 2 {
                    match d % 8 {
                        1 => 1,
                        5 => -1,
                        _ => 0,
                    }
                } else if d % p == 0 {
                    0
                } else if (1..p).any(|x| (x * x - d).rem_euclid(p) == 0) {
                    1
                } else {
                    -1
                };
                assert_eq!(chi_d(d, p).unwrap(), expect, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn chi_word_version_agrees() {
        for d in (5..300u64).filter(|d| d % 4 <= 1) {
            for m in 0..300u64 {
                assert_eq!(chi_u64(d, m), chi_unchecked(d as i128, m as i128));
            }
        }
    }

    #[test]
    fn spf_table() {
        let spf = smallest_prime_factors(100);
        assert_eq!(spf[97], 97);
        assert_eq!(spf[91], 7);
        assert_eq!(spf[64], 2);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    fn discriminant_shape() -> impl Strategy<Value = i128> {
        (1i128..2500).prop_flat_map(|k| prop_oneof![Just(4 * k), Just(4 * k + 1)])
    }

    proptest! {
        #[test]
        fn chi_is_multiplicative(d in discriminant_shape(), m1 in 1i128..100_000, m2 in 1i128..100_000) {
            prop_assert_eq!(chi_d(d, m1 * m2).unwrap(), chi_d(d, m1).unwrap() * chi_d(d, m2).unwrap());
        }

        #[test]
        fn chi_is_periodic(d in discriminant_shape(), m in 1i128..1_000_000) {
            prop_assert_eq!(chi_d(d, m).unwrap(), chi_d(d, m + d).unwrap());
        }

        #[test]
        fn factorization_reconstructs(m in 1u128..(1u128 << 80)) {
            let f = factorize(m).unwrap();
            let mut product = 1u128;
            let mut last = 0u128;
            for &(p, e) in f.factors() {
                prop_assert!(p > last && is_prime(p));
                last = p;
                product *= p.pow(e);
            }
            prop_assert_eq!(product, m);
            prop_assert_eq!(f.value(), m);
        }

        #[test]
        fn square_divisors_divide(m in 1u128..10_000_000) {
            let vs = square_divisors(&factorize(m).unwrap());
            prop_assert_eq!(vs[0], 1);
            for v in vs {
                prop_assert_eq!(m % (v * v), 0);
            }
        }
    }
}
