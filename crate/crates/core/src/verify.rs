//! Oracle batteries. Each suite returns one [`Check`] per group of
//! comparisons, with the worst deviation seen in the group.

use std::fmt;
use std::str::FromStr;

use crate::arith::{chi_d, factorize, primes_up_to};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::forms::{class_number, class_number_oracle, is_discriminant, Discriminant};
use crate::local::{
    beta_p, beta_p_min_depth, character_sum_check, character_value_counts, default_depth,
    fourier_beta_p_closed, fourier_beta_p_dft, gauss_sum_check, local_a_closed, local_a_oracle_all,
};
use crate::spectrum::trace_decompositions;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest deviation observed, or a count for exact checks.
    pub observed: f64,
    pub tolerance: f64,
}

impl Check {
    fn within(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: observed <= tolerance,
            observed,
            tolerance,
        }
    }

    fn exact(name: impl Into<String>, mismatches: usize) -> Self {
        Check {
            name: name.into(),
            passed: mismatches == 0,
            observed: mismatches as f64,
            tolerance: 0.0,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<40} observed {:.3e} tolerance {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fourier,
    LocalFactors,
    ClassNumber,
    BetaFactorization,
    Gauss,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Fourier,
        Suite::LocalFactors,
        Suite::ClassNumber,
        Suite::BetaFactorization,
        Suite::Gauss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fourier => "fourier",
            Suite::LocalFactors => "localfactors",
            Suite::ClassNumber => "classnumber",
            Suite::BetaFactorization => "lemma41",
            Suite::Gauss => "gauss",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

pub fn run_suite(suite: Suite, execution: Execution) -> Result<Vec<Check>> {
    match suite {
        Suite::Fourier => fourier_checks(&[3, 5, 7], 4, execution),
        Suite::LocalFactors => local_factor_checks(&[2, 3, 5], 256, execution),
        Suite::ClassNumber => class_number_checks(10_000, execution),
        Suite::BetaFactorization => beta_factorization_checks(5000, &[2, 3, 5, 7], execution),
        Suite::Gauss => gauss_checks(200, 50),
    }
}

/// Closed-form coefficients against the DFT oracle, one check per `(p, c)`.
pub fn fourier_checks(primes: &[u64], max_c: u32, execution: Execution) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &p in primes {
        for c in 0..=max_c {
            let q = p.pow(c) as i64;
            let numerators: Vec<i64> = if c == 0 {
                vec![0]
            } else {
                (1..=q).filter(|a| a % p as i64 != 0).collect()
            };
            let deviations = execution.try_map(&numerators, |&a| {
                let closed = fourier_beta_p_closed(p, a, c)?;
                let dft = fourier_beta_p_dft(p, a, c, default_depth(p, c))?;
                Ok::<_, Error>(((closed - dft.value).norm(), dft.tail))
            })?;
            let worst = deviations.iter().map(|d| d.0).fold(0.0, f64::max);
            let tail = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
            checks.push(Check::within(
                format!("closed vs dft p={p} c={c}"),
                worst,
                1e-9 + tail,
            ));
        }
    }
    Ok(checks)
}

/// Closed-form `A_r(p^b)` against the oracle for all `p^b <= max_q`, all `r`.
pub fn local_factor_checks(primes: &[u64], max_q: u64, execution: Execution) -> Result<Vec<Check>> {
    let cases: Vec<(u64, u32)> = primes
        .iter()
        .flat_map(|&p| {
            (1..)
                .take_while(move |&b| p.pow(b) <= max_q)
                .map(move |b| (p, b))
        })
        .collect();
    execution.try_map(&cases, |&(p, b)| {
        let oracle = local_a_oracle_all(p, b, default_depth(p, b))?;
        let mut worst: f64 = 0.0;
        let mut tail: f64 = 0.0;
        for (r, o) in oracle.iter().enumerate() {
            worst = worst.max((local_a_closed(p, b, r as u64)? - o.value).abs());
            tail = tail.max(o.tail);
        }
        Ok(Check::within(
            format!("A_r({p}^{b}) closed vs oracle"),
            worst,
            1e-9 + tail,
        ))
    })
}

/// Cycle-count class numbers against the analytic oracle for `d <= max_d`,
/// plus the worst class number formula residual relative to the regulator.
pub fn class_number_checks(max_d: u64, execution: Execution) -> Result<Vec<Check>> {
    let discriminants: Vec<Discriminant> = (5..=max_d as i128)
        .filter(|&d| is_discriminant(d))
        .map(Discriminant::new)
        .collect::<Result<_>>()?;
    let results = execution.try_map(&discriminants, |&d| {
        let h = class_number(d)?;
        let oracle = class_number_oracle(d)?;
        Ok::<_, Error>((h == oracle.h, (h as f64 - oracle.estimate).abs()))
    })?;
    let mismatches = results.iter().filter(|r| !r.0).count();
    let residual = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(vec![
        Check::exact(format!("cycle count = oracle, d <= {max_d}"), mismatches),
        Check::within(
            format!("|h R - sqrt(d) L| / R, d <= {max_d}"),
            residual,
            0.25,
        ),
    ])
}

/// `β_P(n)` from its definition: the sum over `d v² = n² - 4` with
/// `P`-smooth `v` of `(1/v) Π_{p<=P} (1 - χ_d(p)/p)^{-1}`.
pub fn beta_truncated_direct(n: u64, prime_limit: u64) -> Result<f64> {
    let primes = primes_up_to(prime_limit);
    let mut sum = 0.0;
    for e in trace_decompositions(n)?.entries {
        let smooth = factorize(e.v as u128)?
            .factors()
            .iter()
            .all(|&(p, _)| p <= prime_limit as u128);
        if !smooth {
            continue;
        }
        let mut term = 1.0 / e.v as f64;
        for &p in &primes {
            let chi = chi_d(e.d.get() as i128, p as i128)?;
            term /= 1.0 - chi as f64 / p as f64;
        }
        sum += term;
    }
    Ok(sum)
}

/// `Π_{p<=P} β_(p)(n)` with every local sum taken to its last nonzero term.
pub fn beta_truncated_product(n: u64, prime_limit: u64) -> Result<f64> {
    primes_up_to(prime_limit)
        .into_iter()
        .try_fold(
            1.0,
            |acc, p| Ok(acc * beta_p(p, n, beta_p_min_depth(p, n))?),
        )
}

pub fn beta_factorization_checks(
    max_n: u64,
    limits: &[u64],
    execution: Execution,
) -> Result<Vec<Check>> {
    let traces: Vec<u64> = (3..=max_n).collect();
    limits
        .iter()
        .map(|&limit| {
            let deviations = execution.try_map(&traces, |&n| {
                let direct = beta_truncated_direct(n, limit)?;
                let product = beta_truncated_product(n, limit)?;
                Ok::<_, Error>((direct - product).abs())
            })?;
            Ok(Check::within(
                format!("beta_P = product, P={limit}, n <= {max_n}"),
                deviations.into_iter().fold(0.0, f64::max),
                1e-10,
            ))
        })
        .collect()
}

/// `(p, a)` pairs for the Gauss sum battery: the first `count` odd primes,
/// each with a numerator spread over its residues.
pub fn gauss_pairs(count: usize) -> Vec<(u64, i64)> {
    let mut primes = primes_up_to(1000).into_iter().skip(1);
    (0..count)
        .filter_map(|k| {
            let p = primes.next()?;
            let a = (7 * k as i64 + 3) % p as i64;
            Some((p, if a == 0 { 1 } else { a }))
        })
        .collect()
}

pub fn gauss_checks(max_p: u64, pairs: usize) -> Result<Vec<Check>> {
    let odd: Vec<u64> = primes_up_to(max_p).into_iter().skip(1).collect();
    let mut sum_fail = 0;
    let mut count_fail = 0;
    for &p in &odd {
        if character_sum_check(p)? != -1 {
            sum_fail += 1;
        }
        if character_value_counts(p)? != ((p - 3) / 2, (p - 1) / 2) {
            count_fail += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (p, a) in gauss_pairs(pairs) {
        worst = worst.max(gauss_sum_check(p, a)?.norm());
    }
    Ok(vec![
        Check::exact(format!("character sum = -1, p <= {max_p}"), sum_fail),
        Check::exact(format!("value counts, p <= {max_p}"), count_fail),
        Check::within(format!("gauss sums, {pairs} pairs"), worst, 1e-10),
    ])
}
