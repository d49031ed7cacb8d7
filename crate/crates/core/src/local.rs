//! Local densities `β_(p)` and the local factors `A_r(p^b)` of the Euler
//! product for the pair correlation.
//!
//! For a prime `p`,
//!
//! ```text
//! β_(p)(n) = Σ_{b>=0} p^{-b} (1 - χ_{(n²-4)/p^{2b}}(p)/p)^{-1} I_{p^b}(n)
//! ```
//!
//! where `I_{p^b}(n)` tests `n² ≡ 4 (mod p^{2b})` and, for `p = 2`, that
//! `(n²-4)/4^b` is a discriminant. The `b`-th summand has period `p^{2b+1}`
//! (`2^{2b+3}` for `p = 2`), so every Fourier coefficient at `a/p^c` is an
//! exact finite average. [`fourier_beta_p_dft`] computes those averages by
//! brute force over the support of each summand; [`fourier_beta_p_closed`]
//! evaluates the closed forms for odd `p`.
//!
//! `A_r(p^b) = Σ_{a mod p^b, p∤a} |β̂_(p)(a/p^b)|² e(ar/p^b)` is available both
//! as the closed-form table ([`local_a_closed`]) and through the oracle
//! coefficients ([`local_a_oracle`]).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arith::{is_prime, legendre_minus_one, mul_mod, primes_up_to};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub type ComplexValue = Complex64;

/// Upper bound on the number of residues summed by the DFT oracle.
pub const MAX_ORACLE_ELEMENTS: u128 = 100_000_000;

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p as u128) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    Ok(())
}

fn pow_u128(p: u64, e: u32) -> Result<u128> {
    (p as u128)
        .checked_pow(e)
        .filter(|&q| q <= 1 << 100)
        .ok_or_else(|| Error::Overflow(format!("{p}^{e} exceeds 2^100")))
}

/// Exponent of the extra modulus that fixes `χ_m(p)`: `m mod p` for odd `p`,
/// `m mod 8` for `p = 2`.
fn character_depth(p: u64) -> u32 {
    if p == 2 {
        3
    } else {
        1
    }
}

/// `(1 - χ_{(n²-4)/p^{2b}}(p)/p)^{-1}` when `I_{p^b}(n) = 1`, `None` otherwise.
fn summand(p: u64, b: u32, n: i128) -> Result<Option<f64>> {
    let q = pow_u128(p, 2 * b)?;
    let modulus = q * pow_u128(p, character_depth(p))?;
    let r = n.rem_euclid(modulus as i128) as u128;
    let sq = mul_mod(r, r, modulus);
    let t = (sq + modulus - 4 % modulus) % modulus;
    if t % q != 0 {
        return Ok(None);
    }
    let m = t / q;
    let chi = if p == 2 {
        match m % 8 {
            1 => 1,
            5 => -1,
            0 | 4 => 0,
            // (n²-4)/4^b is not a discriminant
            _ => return Ok(None),
        }
    } else {
        crate::arith::jacobi(m as i128, p as u128)
    };
    Ok(Some(1.0 / (1.0 - chi as f64 / p as f64)))
}

/// `I_{p^b}(n)`.
pub fn indicator(p: u64, b: u32, n: i128) -> Result<bool> {
    check_prime(p)?;
    Ok(summand(p, b, n)?.is_some())
}

/// Smallest `b_max` that [`beta_p`] accepts for trace `n`: `p^{b_max} >= n + 2`.
pub fn beta_p_min_depth(p: u64, n: u64) -> u32 {
    let mut b = 0;
    let mut q = 1u128;
    while q < n as u128 + 2 {
        q *= p as u128;
        b += 1;
    }
    b
}

/// `β_(p)(n)` as the finite sum over `b <= b_max`.
pub fn beta_p(p: u64, n: u64, b_max: u32) -> Result<f64> {
    check_prime(p)?;
    if n <= 2 {
        return Err(Error::InvalidInput(format!("trace {n} must exceed 2")));
    }
    if b_max < beta_p_min_depth(p, n) {
        return Err(Error::InvalidInput(format!(
            "b_max = {b_max} misses terms of β_({p})({n})"
        )));
    }
    let mut sum = 0.0;
    let mut weight = 1.0;
    for b in 0..=b_max {
        if let Some(v) = summand(p, b, n as i128)? {
            sum += weight * v;
        }
        weight /= p as f64;
    }
    Ok(sum)
}

/// Roots of `x² ≡ 4 (mod p^k)`, by lifting roots one power at a time.
fn roots_of_four(p: u64, k: u32) -> Vec<u128> {
    let p = p as u128;
    let mut roots = vec![0u128];
    let mut modulus = 1u128;
    for _ in 0..k {
        let next = modulus * p;
        roots = roots
            .iter()
            .flat_map(|&r| (0..p).map(move |t| r + t * modulus))
            .filter(|&x| (x * x % next + next - 4 % next) % next == 0)
            .collect();
        modulus = next;
    }
    roots
}

/// A Fourier coefficient from the oracle together with the bound on the
/// neglected summands `b > b_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DftCoefficient {
    pub value: ComplexValue,
    pub tail: f64,
}

/// `2 p^{-b_max} (p²+p+1) / ((p+1)(p-1))`.
pub fn dft_tail_bound(p: u64, b_max: u32) -> f64 {
    let pf = p as f64;
    2.0 * pf.powi(-(b_max as i32)) * (pf * pf + pf + 1.0) / ((pf + 1.0) * (pf - 1.0))
}

/// Default oracle depth for frequency denominator `p^c`.
pub fn default_depth(p: u64, c: u32) -> u32 {
    if p == 2 {
        c + 10
    } else {
        c + 6
    }
}

fn check_frequency(p: u64, a: i64, c: u32) -> Result<()> {
    if c > 0 && a.rem_euclid(p as i64) == 0 {
        return Err(Error::InvalidInput(format!(
            "numerator {a} is divisible by {p} at c = {c}"
        )));
    }
    Ok(())
}

/// `β̂_(p)(a/p^c) = M(β_(p) e_{-a/p^c})` by exact averaging of every summand
/// `b <= b_max` over a common period.
pub fn fourier_beta_p_dft(p: u64, a: i64, c: u32, b_max: u32) -> Result<DftCoefficient> {
    check_prime(p)?;
    check_frequency(p, a, c)?;
    if b_max < c {
        return Err(Error::InvalidInput(format!("b_max = {b_max} < c = {c}")));
    }
    let freq = pow_u128(p, c)?;
    let a_mod = a.rem_euclid(freq as i64) as u128;

    let mut plan = Vec::with_capacity(b_max as usize + 1);
    let mut elements = 0u128;
    for b in 0..=b_max {
        let support_modulus = pow_u128(p, 2 * b)?;
        let period = support_modulus * pow_u128(p, character_depth(p))?;
        let span = period.max(freq);
        let roots = roots_of_four(p, 2 * b);
        elements += roots.len() as u128 * (span / support_modulus);
        plan.push((b, support_modulus, span, roots));
    }
    if elements > MAX_ORACLE_ELEMENTS {
        return Err(Error::ResourceLimit(format!(
            "DFT oracle for p = {p}, c = {c}, b_max = {b_max} needs {elements} evaluations"
        )));
    }

    let mut total = Complex64::new(0.0, 0.0);
    let mut weight = 1.0;
    for (b, support_modulus, span, roots) in plan {
        let mut acc = Complex64::new(0.0, 0.0);
        for &root in &roots {
            let mut n = root;
            while n < span {
                if let Some(v) = summand(p, b, n as i128)? {
                    let phase = mul_mod(a_mod, n % freq, freq) as f64 / freq as f64;
                    acc += Complex64::from_polar(v, -2.0 * PI * phase);
                }
                n += support_modulus;
            }
        }
        total += acc * (weight / span as f64);
        weight /= p as f64;
    }
    Ok(DftCoefficient {
        value: total,
        tail: dft_tail_bound(p, b_max),
    })
}

/// `e(k/q) = exp(2πi k/q)` with the numerator reduced exactly first.
fn unit(k: i128, q: u128) -> Complex64 {
    let k = k.rem_euclid(q as i128) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * k / q as f64)
}

/// `ε_p`: 1 for `p ≡ 1 (mod 4)`, `i` for `p ≡ 3 (mod 4)`.
pub fn epsilon_p(p: u64) -> Complex64 {
    if p % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    }
}

fn legendre_table(p: u64) -> Vec<i8> {
    let mut table = vec![-1i8; p as usize];
    table[0] = 0;
    for x in 1..p {
        table[(x * x % p) as usize] = 1;
    }
    table
}

/// Closed form of `β̂_(p)(a/p^c)` for odd `p`.
///
/// `β_(p)(n)` depends on `n²` only, so every coefficient is real and the
/// sign of the exponent in the `c = 1` character sum is immaterial; it is
/// taken as `e(-an/p)`, the convention of the mean `M(β e_{-u})`.
pub fn fourier_beta_p_closed(p: u64, a: i64, c: u32) -> Result<ComplexValue> {
    check_prime(p)?;
    if p == 2 {
        return Err(Error::InvalidInput(
            "no closed form for p = 2; use the DFT oracle".into(),
        ));
    }
    check_frequency(p, a, c)?;
    let pf = p as f64;
    let denom = pf * pf - 1.0;
    match c {
        0 => Ok(Complex64::new(1.0, 0.0)),
        1 => {
            let leg = legendre_table(p);
            let q = p as u128;
            let sum: Complex64 = (0..p)
                .map(|n| {
                    let s = leg[((n * n + 4 * p - 4) % p) as usize] as f64;
                    unit(-(a as i128) * n as i128, q) * s
                })
                .sum();
            Ok(sum / denom)
        }
        _ => {
            let q = pow_u128(p, c)?;
            let scale = 1.0 / (denom * pf.powf(1.5 * c as f64 - 2.0));
            let twice = unit(2 * a as i128, q);
            let body = if c % 2 == 1 {
                let la = crate::arith::jacobi(a as i128, p as u128) as f64;
                let lma = crate::arith::jacobi(-(a as i128), p as u128) as f64;
                epsilon_p(p) * (twice * la + twice.conj() * lma)
            } else {
                Complex64::new(2.0 * twice.re, 0.0)
            };
            Ok(body * scale)
        }
    }
}

fn residue(r: u64, q: Option<u128>) -> u128 {
    match q {
        Some(q) => r as u128 % q,
        None => r as u128,
    }
}

/// Closed-form `A_r(p^b)`, `b >= 1`.
pub fn local_a_closed(p: u64, b: u32, r: u64) -> Result<f64> {
    check_prime(p)?;
    if b == 0 {
        return Err(Error::InvalidInput("A_r(p^b) needs b >= 1".into()));
    }
    if p == 2 {
        return Ok(local_a_two(b, r));
    }
    let pf = p as f64;
    let denom = (pf * pf - 1.0).powi(2);
    if b == 1 {
        let leg = legendre_table(p);
        let f = |n: u64| leg[((n * n + 4 * p - 4) % p) as usize] as i64;
        let rr = r % p;
        let sum: i64 = (0..p).map(|n| f(n) * f((n + rr) % p)).sum();
        return Ok((pf * sum as f64 - 1.0) / denom);
    }
    let full = (p as u128).checked_pow(b);
    let lower = (p as u128).checked_pow(b - 1);
    let zero_full = residue(r, full) == 0;
    let zero_lower = residue(r, lower) == 0;
    let four = |q: Option<u128>| {
        let x = residue(r, q);
        match q {
            Some(q) => (x + 4) % q == 0 || (x + q - 4 % q) % q == 0,
            None => x == 4,
        }
    };
    let sign = (legendre_minus_one(p as u128) as f64).powi(b as i32);
    let pb = pf.powi(b as i32);
    let value = if zero_full {
        2.0 * pb * (1.0 - 1.0 / pf)
    } else if zero_lower {
        -2.0 * pb / pf
    } else if four(full) {
        sign * pb * (1.0 - 1.0 / pf)
    } else if four(lower) {
        -sign * pb / pf
    } else {
        0.0
    };
    Ok(value / (denom * pf.powi(3 * b as i32 - 4)))
}

fn local_a_two(b: u32, r: u64) -> f64 {
    match b {
        1 => {
            if r % 2 == 0 {
                1.0 / 9.0
            } else {
                -1.0 / 9.0
            }
        }
        2 => match r % 4 {
            0 => 1.0 / 18.0,
            2 => -1.0 / 18.0,
            _ => 0.0,
        },
        3 | 5 => 0.0,
        4 => match r % 16 {
            0 => 1.0 / 144.0,
            8 => -1.0 / 144.0,
            _ => 0.0,
        },
        _ => {
            let scale = 1.0 / (9.0 * 2f64.powi(2 * b as i32 - 4));
            // beyond 2^127 only r itself matters
            let q: Option<u128> = 1u128.checked_shl(b).filter(|_| b < 127);
            let x = residue(r, q);
            let hits = |target: u128| match q {
                Some(q) => x == target % q || (x + target) % q == 0,
                None => x == target,
            };
            if b >= 127 {
                return if r == 0 { 2.0 * scale } else { 0.0 };
            }
            let half = 1u128 << (b - 1);
            let quarter = 1u128 << (b - 2);
            if x == 0 {
                2.0 * scale
            } else if x == half {
                -2.0 * scale
            } else if hits(4 + quarter) {
                scale
            } else if hits(4 + quarter + half) {
                -scale
            } else {
                0.0
            }
        }
    }
}

/// `A_r(p^b)` evaluated from oracle Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleA {
    pub value: f64,
    /// Imaginary part of the defining sum, which must vanish.
    pub imag: f64,
    /// Bound on the error inherited from truncating the coefficients.
    pub tail: f64,
}

/// `A_r(p^b)` for every `r mod p^b` from one batch of oracle coefficients.
pub fn local_a_oracle_all(p: u64, b: u32, b_max: u32) -> Result<Vec<OracleA>> {
    check_prime(p)?;
    if b == 0 || b_max < b {
        return Err(Error::InvalidInput(format!(
            "need 1 <= b <= b_max, got b = {b}, b_max = {b_max}"
        )));
    }
    let q = pow_u128(p, b)?;
    let numerators: Vec<i64> = (1..=q as i64).filter(|a| a % p as i64 != 0).collect();
    let mut coefficients = Vec::with_capacity(numerators.len());
    for &a in &numerators {
        coefficients.push(fourier_beta_p_dft(p, a, b, b_max)?);
    }
    let tail: f64 = coefficients
        .iter()
        .map(|c| 2.0 * c.value.norm() * c.tail + c.tail * c.tail)
        .sum();
    let mut out = Vec::with_capacity(q as usize);
    for r in 0..q {
        let sum: Complex64 = numerators
            .iter()
            .zip(&coefficients)
            .map(|(&a, c)| unit(a as i128 * r as i128, q) * c.value.norm_sqr())
            .sum();
        if sum.im.abs() >= 1e-9 {
            return Err(Error::Invariant(format!(
                "A_{r}({p}^{b}) has imaginary part {}",
                sum.im
            )));
        }
        out.push(OracleA {
            value: sum.re,
            imag: sum.im,
            tail,
        });
    }
    Ok(out)
}

/// `A_r(p^b)` from oracle coefficients for a single shift `r`.
pub fn local_a_oracle(p: u64, b: u32, r: u64, b_max: u32) -> Result<OracleA> {
    let all = local_a_oracle_all(p, b, b_max)?;
    let q = all.len() as u64;
    Ok(all[(r % q) as usize])
}

/// Truncated Euler product for `γ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaPrediction {
    pub r: u64,
    pub gamma: f64,
    pub tail_bound: f64,
    pub prime_limit: u64,
    pub b_cap: u32,
}

/// Per-prime depth: `max(b_cap, ceil(log_p(r + 4)) + 2)`.
pub fn depth_for(p: u64, r: u64, b_cap: u32) -> u32 {
    let mut k = 0;
    let mut q = 1u128;
    while q < r as u128 + 4 {
        q *= p as u128;
        k += 1;
    }
    b_cap.max(k + 2)
}

/// `1 + Σ_{b <= depth} A_r(p^b)`.
pub fn local_factor(p: u64, r: u64, depth: u32) -> Result<f64> {
    let mut sum = 1.0;
    for b in 1..=depth {
        sum += local_a_closed(p, b, r)?;
    }
    Ok(sum)
}

/// `Π_{p <= P} (1 + Σ_b A_r(p^b)) - 1` with a heuristic tail bound.
pub fn euler_product_gamma(r: u64, prime_limit: u64, b_cap: u32) -> Result<GammaPrediction> {
    euler_product_gamma_with(r, prime_limit, b_cap, Execution::default())
}

pub fn euler_product_gamma_with(
    r: u64,
    prime_limit: u64,
    b_cap: u32,
    execution: Execution,
) -> Result<GammaPrediction> {
    if prime_limit < 2 || b_cap < 1 {
        return Err(Error::InvalidInput(
            "prime_limit must be >= 2 and b_cap >= 1".into(),
        ));
    }
    let primes = primes_up_to(prime_limit);
    let factors = execution.try_map(&primes, |&p| {
        let depth = depth_for(p, r, b_cap);
        local_factor(p, r, depth).map(|f| (f, depth))
    })?;
    let mut product = 1.0;
    let mut depth_tail = 0.0;
    for (&p, &(f, depth)) in primes.iter().zip(&factors) {
        product *= f;
        // Σ_{b > depth} 4 / ((p²-1)² p^{2b-4})
        let pf = p as f64;
        let lead = 4.0 / ((pf * pf - 1.0).powi(2) * pf.powi(2 * depth as i32 - 2));
        depth_tail += lead / (1.0 - 1.0 / (pf * pf));
    }
    let pl = prime_limit as f64;
    // Σ_{p > P} 2/p², estimated by 2 / (P log P)
    let prime_tail = 2.0 / (pl * pl.ln());
    let tail_bound = product.abs() * ((depth_tail + prime_tail).exp() - 1.0);
    Ok(GammaPrediction {
        r,
        gamma: product - 1.0,
        tail_bound,
        prime_limit,
        b_cap,
    })
}

/// `Σ_{n mod p} ((n²-4)/p)`, which equals −1 for every odd prime.
pub fn character_sum_check(p: u64) -> Result<i64> {
    check_prime(p)?;
    if p == 2 {
        return Err(Error::InvalidInput("p must be odd".into()));
    }
    let leg = legendre_table(p);
    Ok((0..p)
        .map(|n| leg[((n * n + 4 * p - 4) % p) as usize] as i64)
        .sum())
}

/// `(#{n mod p : ((n²-4)/p) = 1}, #{n mod p : ((n²-4)/p) = -1})`.
pub fn character_value_counts(p: u64) -> Result<(u64, u64)> {
    check_prime(p)?;
    if p == 2 {
        return Err(Error::InvalidInput("p must be odd".into()));
    }
    let leg = legendre_table(p);
    let mut plus = 0;
    let mut minus = 0;
    for n in 0..p {
        match leg[((n * n + 4 * p - 4) % p) as usize] {
            1 => plus += 1,
            -1 => minus += 1,
            _ => {}
        }
    }
    Ok((plus, minus))
}

/// `Σ_{m mod p} e(am/p) (m/p) - (a/p) ε_p sqrt p`, which vanishes.
pub fn gauss_sum_check(p: u64, a: i64) -> Result<ComplexValue> {
    check_prime(p)?;
    if p == 2 || a.rem_euclid(p as i64) == 0 {
        return Err(Error::InvalidInput(format!(
            "need odd p and p ∤ a, got p = {p}, a = {a}"
        )));
    }
    let leg = legendre_table(p);
    let sum: Complex64 = (1..p)
        .map(|m| unit(a as i128 * m as i128, p as u128) * leg[m as usize] as f64)
        .sum();
    let la = crate::arith::jacobi(a as i128, p as u128) as f64;
    Ok(sum - epsilon_p(p) * la * (p as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::chi_d;

    /// `β_(p,b)` straight from the definition through the general character.
    fn summand_reference(p: u64, b: u32, n: i128) -> Option<f64> {
        let m = n * n - 4;
        let q = (p as i128).pow(2 * b);
        if m % q != 0 {
            return None;
        }
        let cof = m / q;
        if p == 2 && cof.rem_euclid(4) > 1 {
            return None;
        }
        let chi = chi_d(cof, p as i128).ok()?;
        Some(1.0 / (1.0 - chi as f64 / p as f64))
    }

    #[test]
    fn summand_matches_definition() {
        for p in [2u64, 3, 5, 7] {
            for b in 0..4 {
                for n in 3..3000i128 {
                    assert_eq!(
                        summand(p, b, n).unwrap(),
                        summand_reference(p, b, n),
                        "p={p} b={b} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn indicator_examples() {
        for n in 3..50 {
            assert!(indicator(3, 0, n).unwrap());
            assert!(indicator(2, 0, n).unwrap());
        }
        assert!(!indicator(3, 1, 5).unwrap());
        assert!(indicator(3, 1, 11).unwrap());
        assert!(indicator(2, 1, 6).unwrap());
        assert!(indicator(4, 1, 6).is_err());
    }

    #[test]
    fn beta_p_examples() {
        assert!((beta_p(3, 4, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta_p(5, 3, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta_p(3, 11, 3).unwrap() - 1.5).abs() < 1e-15);
        assert!(beta_p(3, 11, 2).is_err());
        assert_eq!(beta_p_min_depth(3, 11), 3);
    }

    #[test]
    fn roots_of_four_are_complete() {
        for p in [2u64, 3, 5] {
            for k in 0..7 {
                let q = (p as u128).pow(k);
                let brute: Vec<u128> = (0..q).filter(|&x| (x * x + q * 4 - 4) % q == 0).collect();
                let mut lifted = roots_of_four(p, k);
                lifted.sort_unstable();
                assert_eq!(lifted, brute, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn dft_against_dense_average() {
        // dense averaging of the truncated function over its full period
        for (p, b_max) in [(3u64, 2u32), (5, 1), (2, 2)] {
            let period = (p as i128).pow(2 * b_max + character_depth(p));
            for c in 0..=b_max {
                let q = (p as i128).pow(c);
                for a in (0..q.max(1)).filter(|a| c == 0 || a % p as i128 != 0) {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for n in 3..3 + period {
                        let mut v = 0.0;
                        for b in 0..=b_max {
                            if let Some(t) = summand_reference(p, b, n) {
                                v += t / (p as f64).powi(b as i32);
                            }
                        }
                        acc += unit(-a * n, q as u128) * v;
                    }
                    acc /= period as f64;
                    let dft = fourier_beta_p_dft(p, a as i64, c, b_max).unwrap().value;
                    assert!(
                        (dft - acc).norm() < 1e-12,
                        "p={p} a={a} c={c}: {dft} vs {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn dft_mean_is_one() {
        for p in [2u64, 3, 5, 7, 11] {
            let c = fourier_beta_p_dft(p, 0, 0, default_depth(p, 0)).unwrap();
            assert!((c.value.re - 1.0).abs() <= c.tail + 1e-9, "p = {p}");
            assert!(c.value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_examples() {
        for p in [3u64, 5, 7, 11] {
            assert_eq!(
                fourier_beta_p_closed(p, 0, 0).unwrap(),
                Complex64::new(1.0, 0.0)
            );
        }
        let v = fourier_beta_p_closed(3, 1, 1).unwrap();
        assert!((v - Complex64::new(-1.0 / 8.0, 0.0)).norm() < 1e-15);
        let v = fourier_beta_p_closed(5, 1, 2).unwrap();
        assert!((v.re - (4.0 * PI / 25.0).cos() / 60.0).abs() < 1e-15);
        assert!(fourier_beta_p_closed(2, 1, 1).is_err());
        assert!(fourier_beta_p_closed(3, 3, 1).is_err());
    }

    #[test]
    fn closed_form_matches_oracle_tightly() {
        for p in [3u64, 5, 7] {
            for c in 0..=3u32 {
                let q = p.pow(c) as i64;
                for a in (1..=q).filter(|a| c == 0 || a % p as i64 != 0) {
                    let closed = fourier_beta_p_closed(p, a, c).unwrap();
                    let dft = fourier_beta_p_dft(p, a, c, c + 6).unwrap();
                    assert!((closed - dft.value).norm() < 1e-9, "p={p} a={a} c={c}");
                    assert!(closed.im.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn local_a_examples() {
        assert!((local_a_closed(2, 1, 0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((local_a_closed(2, 1, 1).unwrap() + 1.0 / 9.0).abs() < 1e-15);
        for r in 0..64 {
            assert_eq!(local_a_closed(2, 3, r).unwrap(), 0.0);
            assert_eq!(local_a_closed(2, 5, r).unwrap(), 0.0);
        }
        assert!((local_a_closed(3, 1, 0).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        assert!((local_a_closed(3, 1, 1).unwrap() + 1.0 / 64.0).abs() < 1e-15);
        let o = local_a_oracle(3, 1, 0, 7).unwrap();
        assert!((o.value - 1.0 / 32.0).abs() < 1e-9 + o.tail);
        let o = local_a_oracle(2, 1, 1, 11).unwrap();
        assert!((o.value + 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn tables_match_oracle() {
        for (p, max_b) in [(2u64, 8u32), (3, 4), (5, 3), (7, 2)] {
            for b in 1..=max_b {
                let oracle = local_a_oracle_all(p, b, default_depth(p, b)).unwrap();
                for (r, o) in oracle.iter().enumerate() {
                    let closed = local_a_closed(p, b, r as u64).unwrap();
                    assert!(
                        (closed - o.value).abs() <= 1e-9 + o.tail,
                        "p={p} b={b} r={r}: {closed} vs {}",
                        o.value
                    );
                }
            }
        }
    }

    /// Ramanujan sum `c_q(r)` by direct summation.
    fn ramanujan(q: u64, p: u64, r: i64) -> f64 {
        (1..=q)
            .filter(|a| a % p != 0)
            .map(|a| (2.0 * PI * (a as f64) * (r as f64) / q as f64).cos())
            .sum()
    }

    #[test]
    fn odd_table_matches_ramanujan_sum_form() {
        for p in [3u64, 5, 7, 11] {
            for b in 2..=3u32 {
                let q = p.pow(b);
                let pf = p as f64;
                let leg = legendre_minus_one(p as u128) as f64;
                for r in 0..q {
                    let ri = r as i64;
                    let expect = (2.0 * ramanujan(q, p, ri)
                        + leg.powi(b as i32) * (ramanujan(q, p, ri + 4) + ramanujan(q, p, ri - 4)))
                        / ((pf * pf - 1.0).powi(2) * pf.powi(3 * b as i32 - 4));
                    let got = local_a_closed(p, b, r).unwrap();
                    assert!((got - expect).abs() < 1e-12, "p={p} b={b} r={r}");
                }
            }
        }
    }

    #[test]
    fn symmetry_and_periodicity() {
        for p in [2u64, 3, 5, 7] {
            for b in 1..=4u32 {
                let q = p.pow(b);
                for r in 1..q {
                    let a = local_a_closed(p, b, r).unwrap();
                    assert_eq!(a, local_a_closed(p, b, q - r).unwrap());
                    assert_eq!(a, local_a_closed(p, b, r + q).unwrap());
                }
            }
        }
    }

    #[test]
    fn euler_factor_at_two() {
        let depth = 40;
        let f = local_factor(2, 0, depth).unwrap();
        let tail: f64 = (6..=depth)
            .map(|b| 2.0 / (9.0 * 2f64.powi(2 * b as i32 - 4)))
            .sum();
        let expect = 1.0 + 1.0 / 9.0 + 1.0 / 18.0 + 1.0 / 144.0 + tail;
        assert!((f - expect).abs() < 1e-15);
    }

    #[test]
    fn odd_factors_exceed_one_at_zero_shift() {
        for p in primes_up_to(500).into_iter().skip(1) {
            let f = local_factor(p, 0, depth_for(p, 0, 8)).unwrap();
            assert!(f > 1.0, "p = {p}");
        }
    }

    #[test]
    fn gamma_tail_covers_prime_doubling() {
        let a = euler_product_gamma(0, 2000, 12).unwrap();
        let b = euler_product_gamma(0, 4000, 12).unwrap();
        assert!(a.gamma > 0.0);
        assert!((a.gamma - b.gamma).abs() < a.tail_bound);
        let seq = euler_product_gamma_with(3, 500, 8, Execution::Sequential).unwrap();
        let par = euler_product_gamma_with(3, 500, 8, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn identities() {
        for p in [3u64, 5, 97] {
            assert_eq!(character_sum_check(p).unwrap(), -1);
        }
        assert_eq!(character_value_counts(7).unwrap(), (2, 3));
        assert!(gauss_sum_check(5, 1).unwrap().norm() < 1e-10);
        assert!(gauss_sum_check(7, 1).unwrap().norm() < 1e-10);
        assert!(gauss_sum_check(7, 3).unwrap().norm() < 1e-10);
        assert!(gauss_sum_check(7, 7).is_err());
    }
}
