//! Empirical pair correlations `γ_N(r)`, mean values and Fourier coefficients
//! of `α`, and their comparison with the Euler product.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::local::{
    default_depth, euler_product_gamma_with, fourier_beta_p_closed, fourier_beta_p_dft,
    ComplexValue,
};
use crate::spectrum::{spectrum_sieve, SieveConfig, Spectrum, SpectrumRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub r: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub empirical: f64,
    pub predicted: f64,
    pub predicted_tail: f64,
    pub prime_limit: u64,
    pub b_cap: u32,
}

/// The rows for `2 < n <= last`.
fn window(rows: &[SpectrumRow], last: u64) -> Result<&[SpectrumRow]> {
    if last < 3 {
        return Err(Error::InvalidInput(format!(
            "N = {last} must be at least 3"
        )));
    }
    let len = (last - 2) as usize;
    match rows.first() {
        Some(first) if first.n == 3 && rows.len() >= len => Ok(&rows[..len]),
        _ => Err(Error::InvalidInput(format!(
            "rows cover (2, {}] but (2, {last}] is needed",
            rows.first().map_or(2, |f| f.n + rows.len() as u64 - 1)
        ))),
    }
}

/// `(1/N) Σ_{2<n<=N} α̃(n) α̃(n+r)`.
pub fn empirical_gamma(rows: &[SpectrumRow], r: u64, n_max: u64) -> Result<f64> {
    let rows = window(rows, n_max + r)?;
    let len = (n_max - 2) as usize;
    let sum: f64 = rows[..len]
        .iter()
        .zip(&rows[r as usize..])
        .map(|(x, y)| x.alpha_tilde * y.alpha_tilde)
        .sum();
    Ok(sum / n_max as f64)
}

/// `(1/N) Σ_{2<n<=N} α(n)`.
pub fn empirical_mean(rows: &[SpectrumRow], n_max: u64) -> Result<f64> {
    let rows = window(rows, n_max)?;
    Ok(rows.iter().map(|x| x.alpha).sum::<f64>() / n_max as f64)
}

/// `(1/N) Σ_{2<n<=N} α(n) e(-an/b)`.
pub fn empirical_fourier(rows: &[SpectrumRow], n_max: u64, a: i64, b: u64) -> Result<ComplexValue> {
    if b == 0 || a.gcd(&(b as i64)) != 1 {
        return Err(Error::InvalidInput(format!(
            "need gcd(a, b) = 1, got {a}/{b}"
        )));
    }
    let rows = window(rows, n_max)?;
    let a = a.rem_euclid(b as i64) as u64;
    let sum: Complex64 = rows
        .iter()
        .map(|x| {
            let k = (a as u128 * x.n as u128 % b as u128) as f64;
            Complex64::from_polar(x.alpha, -2.0 * PI * k / b as f64)
        })
        .sum();
    Ok(sum / n_max as f64)
}

/// `Σ_{b<=max_b} Σ_{a mod b, (a,b)=1} |α̂_N(a/b)|² e(ar/b)`, the truncated
/// Parseval sum for `(1/N) Σ α(n) α(n+r)`.
pub fn parseval_sum(rows: &[SpectrumRow], n_max: u64, r: u64, max_b: u64) -> Result<f64> {
    let mut total = 0.0;
    for b in 1..=max_b {
        for a in (0..b).filter(|&a| a.gcd(&b) == 1) {
            let c = empirical_fourier(rows, n_max, a as i64, b)?;
            total += c.norm_sqr() * (2.0 * PI * ((a * r) % b) as f64 / b as f64).cos();
        }
    }
    Ok(total)
}

/// `β̂_(p)(a/p^c)`: closed form for odd `p`, the DFT oracle for `p = 2`.
fn local_coefficient(p: u64, a: i64, c: u32) -> Result<ComplexValue> {
    if p == 2 {
        Ok(fourier_beta_p_dft(2, a, c, default_depth(2, c))?.value)
    } else {
        fourier_beta_p_closed(p, a, c)
    }
}

/// Splits `a/b` as `Σ_p a_p/p^{c_p} (mod 1)`, returning `(p, c_p, a_p)`.
pub fn local_numerators(a: i64, b: u64) -> Result<Vec<(u64, u32, i64)>> {
    if b == 0 || a.gcd(&(b as i64)) != 1 {
        return Err(Error::InvalidInput(format!(
            "need gcd(a, b) = 1, got {a}/{b}"
        )));
    }
    let f = factorize(b as u128)?;
    Ok(f.factors()
        .iter()
        .map(|&(p, c)| {
            let q = (p as i64).pow(c);
            let rest = b as i64 / q;
            let inv = rest.extended_gcd(&q).x;
            (p as u64, c, (a * inv).rem_euclid(q))
        })
        .collect())
}

/// `Π_p β̂_(p)(a_p/p^{c_p})` for the given local numerators, after checking
/// that they add up to `a/b` modulo 1.
pub fn predicted_fourier_from(a: i64, b: u64, parts: &[(u64, u32, i64)]) -> Result<ComplexValue> {
    let mut lhs = 0i128;
    for &(p, c, ap) in parts {
        let q = (p as i128).pow(c);
        if (b as i128) % q != 0 {
            return Err(Error::InvalidInput(format!("{p}^{c} does not divide {b}")));
        }
        lhs += ap as i128 * (b as i128 / q);
    }
    if (lhs - a as i128).rem_euclid(b as i128) != 0 {
        return Err(Error::InvalidInput(format!(
            "local numerators do not sum to {a}/{b}"
        )));
    }
    parts
        .iter()
        .try_fold(Complex64::new(1.0, 0.0), |acc, &(p, c, ap)| {
            Ok(acc * local_coefficient(p, ap, c)?)
        })
}

/// The limit `α̂(a/b)` as a product of local coefficients.
pub fn predicted_fourier(a: i64, b: u64) -> Result<ComplexValue> {
    predicted_fourier_from(a, b, &local_numerators(a, b)?)
}

/// Compares `γ_N(r)` with the Euler product for each `0 <= r <= r_max`
/// using an already sieved spectrum.
pub fn compare_spectrum(
    spectrum: &Spectrum,
    r_max: u64,
    n_max: u64,
    prime_limit: u64,
    b_cap: u32,
    execution: Execution,
) -> Result<Vec<CorrelationReport>> {
    let shifts: Vec<u64> = (0..=r_max).collect();
    // the prime loop inside is sequential so both modes reduce identically
    execution.try_map(&shifts, |&r| {
        let empirical = empirical_gamma(spectrum.rows(), r, n_max)?;
        let prediction = euler_product_gamma_with(r, prime_limit, b_cap, Execution::Sequential)?;
        Ok(CorrelationReport {
            r,
            n: n_max,
            empirical,
            predicted: prediction.gamma,
            predicted_tail: prediction.tail_bound,
            prime_limit,
            b_cap,
        })
    })
}

/// Sieves up to `N + r_max` and compares every shift `0 <= r <= r_max`.
pub fn compare_report(
    r_max: u64,
    n_max: u64,
    prime_limit: u64,
    b_cap: u32,
    config: &SieveConfig,
) -> Result<Vec<CorrelationReport>> {
    if n_max < 3 || prime_limit < 2 || b_cap == 0 {
        return Err(Error::InvalidInput(
            "need N >= 3, prime_limit >= 2 and b_cap >= 1".into(),
        ));
    }
    let spectrum = spectrum_sieve(n_max + r_max, config)?;
    compare_spectrum(
        &spectrum,
        r_max,
        n_max,
        prime_limit,
        b_cap,
        config.execution,
    )
}
