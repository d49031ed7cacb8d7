//! Multiplicities `g(n)` of primitive hyperbolic conjugacy classes of trace `n`.
//!
//! Every solution of `n^2 - d v^2 = 4` with `v >= 1` is a power of the
//! fundamental unit of `d`, and the first trace at which `d` shows up is the
//! trace of that unit. Walking `n` upwards and remembering which `d` were
//! already seen therefore identifies the fundamental entries exactly, and
//! `g(n)` is the sum of `h(d)` over them.

use std::collections::{BTreeMap, HashMap};

use crate::arith::{factorize, square_divisors, Factorization};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::forms::{smoothed_l, ClassNumberEngine, Discriminant};

/// One way of writing `n^2 - 4 = d v^2` with `d` a discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub d: Discriminant,
    pub v: u64,
    /// `true` iff `n` is the trace of the fundamental unit of `d`.
    pub fundamental: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDecomposition {
    pub n: u64,
    /// Ascending in `v`.
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub n: u64,
    pub g: u64,
    pub alpha: f64,
    pub alpha_tilde: f64,
}

impl SpectrumRow {
    fn new(n: u64, g: u64) -> Self {
        let alpha = g as f64 * (n as f64).ln() / n as f64;
        SpectrumRow {
            n,
            g,
            alpha,
            alpha_tilde: alpha - 1.0,
        }
    }
}

/// A discriminant together with its fundamental solution and class number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRecord {
    pub d: Discriminant,
    pub u: u64,
    pub v: u64,
    pub h: u64,
    pub regulator: f64,
}

/// Largest supported trace; keeps `n^2 - 4` well inside `u64`.
pub const MAX_TRACE: u64 = 1 << 30;

fn check_trace(n: u64) -> Result<()> {
    if n <= 2 {
        return Err(Error::InvalidInput(format!("trace {n} must exceed 2")));
    }
    if n > MAX_TRACE {
        return Err(Error::Overflow(format!("trace {n} exceeds 2^30")));
    }
    Ok(())
}

/// `n^2 - 4` factored as `(n - 2)(n + 2)`.
pub fn factor_trace(n: u64) -> Result<Factorization> {
    check_trace(n)?;
    Ok(factorize(n as u128 - 2)?.multiply(&factorize(n as u128 + 2)?))
}

fn decompose(n: u64, f: &Factorization) -> Result<Vec<TraceEntry>> {
    let m = f.value();
    let mut entries = Vec::new();
    for v in square_divisors(f) {
        let d = m / (v * v);
        if d % 4 > 1 {
            continue;
        }
        // n^2 - (m v)^2 = 4 has no solution with m v > 0, so d is never a square
        let d = Discriminant::new(d as i128)
            .map_err(|_| Error::Invariant(format!("cofactor {d} of {n}^2 - 4 is a square")))?;
        entries.push(TraceEntry {
            d,
            v: v as u64,
            fundamental: false,
        });
    }
    Ok(entries)
}

/// All `(d, v)` with `d v^2 = n^2 - 4` and `d ≡ 0, 1 (mod 4)`; the
/// fundamental flags are left unset.
pub fn trace_decompositions(n: u64) -> Result<TraceDecomposition> {
    let f = factor_trace(n)?;
    Ok(TraceDecomposition {
        n,
        entries: decompose(n, &f)?,
    })
}

/// `sum (1/v) · L_N(1, χ_d)` over every decomposition of `n`, with the smoothed series.
pub fn beta(n: u64, smoothing: f64) -> Result<f64> {
    Ok(trace_decompositions(n)?
        .entries
        .iter()
        .map(|e| smoothed_l(e.d, smoothing) / e.v as f64)
        .sum())
}

#[derive(Debug, Clone)]
pub struct SieveConfig {
    pub execution: Execution,
    /// Byte budget for the first-occurrence map.
    pub memory_budget: usize,
    /// Class numbers known in advance (for example from a cache), keyed by `d`.
    pub known: HashMap<u64, ClassRecord>,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            execution: Execution::default(),
            memory_budget: 2 << 30,
            known: HashMap::new(),
        }
    }
}

const BYTES_PER_SEEN: usize = 32;

/// Rows for `2 < n <= n_max` plus all decompositions and class records.
#[derive(Debug, Clone)]
pub struct Spectrum {
    rows: Vec<SpectrumRow>,
    decompositions: Vec<TraceDecomposition>,
    classes: BTreeMap<u64, ClassRecord>,
}

impl Spectrum {
    pub fn max_n(&self) -> u64 {
        self.rows.last().map_or(2, |r| r.n)
    }

    /// Rows ordered by `n`, starting at `n = 3`.
    pub fn rows(&self) -> &[SpectrumRow] {
        &self.rows
    }

    pub fn row(&self, n: u64) -> Option<&SpectrumRow> {
        n.checked_sub(3).and_then(|i| self.rows.get(i as usize))
    }

    pub fn decomposition(&self, n: u64) -> Option<&TraceDecomposition> {
        n.checked_sub(3)
            .and_then(|i| self.decompositions.get(i as usize))
    }

    /// Fundamental discriminants with trace at most `max_n`, by `d`.
    pub fn classes(&self) -> &BTreeMap<u64, ClassRecord> {
        &self.classes
    }

    /// `beta(n)` with the exact `L(1, χ_d) = h(d) log ε_d / sqrt d`, i.e.
    /// `sum h(d) log ε_d / sqrt(n^2 - 4)` over every decomposition of `n`.
    pub fn beta_exact(&self, n: u64) -> Option<f64> {
        let dec = self.decomposition(n)?;
        let root = ((n * n - 4) as f64).sqrt();
        dec.entries
            .iter()
            .map(|e| {
                self.classes
                    .get(&e.d.get())
                    .map(|c| c.h as f64 * c.regulator / root)
            })
            .sum()
    }
}

/// Computes `g(n)`, `α(n)` and `α̃(n)` for every `2 < n <= n_max`.
///
/// The first-occurrence pass is sequential; class numbers of the fundamental
/// entries are then evaluated as one batch through `config.execution`.
pub fn spectrum_sieve(n_max: u64, config: &SieveConfig) -> Result<Spectrum> {
    check_trace(n_max)?;
    let count = (n_max - 2) as usize;
    let factored: Vec<Factorization> = config
        .execution
        .try_map(&(3..=n_max).collect::<Vec<_>>(), |&n| factor_trace(n))?;

    let mut first_seen: HashMap<u64, u64> = HashMap::new();
    let mut decompositions = Vec::with_capacity(count);
    let mut pending: Vec<(u64, TraceEntry)> = Vec::new();
    for (i, f) in factored.iter().enumerate() {
        let n = i as u64 + 3;
        let mut entries = decompose(n, f)?;
        for e in &mut entries {
            if let std::collections::hash_map::Entry::Vacant(slot) = first_seen.entry(e.d.get()) {
                slot.insert(n);
                e.fundamental = true;
                pending.push((n, *e));
            }
        }
        if first_seen.len() * BYTES_PER_SEEN > config.memory_budget {
            return Err(Error::ResourceLimit(format!(
                "first-occurrence map exceeds {} bytes at n = {n}",
                config.memory_budget
            )));
        }
        match entries.first() {
            Some(e) if e.v == 1 && e.fundamental => {}
            _ => {
                return Err(Error::Invariant(format!(
                    "({}, 1) is not a fundamental entry of trace {n}",
                    n * n - 4
                )))
            }
        }
        decompositions.push(TraceDecomposition { n, entries });
    }
    drop(first_seen);

    let max_d = pending.iter().map(|(_, e)| e.d.get()).max().unwrap_or(5);
    let engine = pending
        .iter()
        .any(|(_, e)| !config.known.contains_key(&e.d.get()))
        .then(|| ClassNumberEngine::new(max_d));
    let records: Vec<ClassRecord> = config.execution.try_map(&pending, |&(n, e)| {
        let regulator = ((n as f64 + ((n * n - 4) as f64).sqrt()) / 2.0).ln();
        if let Some(known) = config.known.get(&e.d.get()) {
            if known.u != n || known.v != e.v {
                return Err(Error::InvalidInput(format!(
                    "cached unit for d = {} is ({}, {}), sieve found ({n}, {})",
                    e.d, known.u, known.v, e.v
                )));
            }
            return Ok(ClassRecord {
                regulator,
                ..*known
            });
        }
        let factors = factored[(n - 3) as usize].divide_square(&factorize(e.v as u128)?);
        let engine = engine.as_ref().expect("engine built for uncached entries");
        let h = engine.class_number(e.d, &factors, regulator)?.h;
        Ok(ClassRecord {
            d: e.d,
            u: n,
            v: e.v,
            h,
            regulator,
        })
    })?;

    let mut g = vec![0u64; count];
    let mut classes = BTreeMap::new();
    for r in records {
        g[(r.u - 3) as usize] += r.h;
        classes.insert(r.d.get(), r);
    }
    let rows = g
        .iter()
        .enumerate()
        .map(|(i, &g)| SpectrumRow::new(i as u64 + 3, g))
        .collect();
    Ok(Spectrum {
        rows,
        decompositions,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{class_number, pell_fundamental};

    fn pairs(n: u64) -> Vec<(u64, u64)> {
        trace_decompositions(n)
            .unwrap()
            .entries
            .iter()
            .map(|e| (e.d.get(), e.v))
            .collect()
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(pairs(3), vec![(5, 1)]);
        assert_eq!(pairs(6), vec![(32, 1), (8, 2)]);
        assert_eq!(pairs(4), vec![(12, 1)]);
        assert_eq!(pairs(7), vec![(45, 1), (5, 3)]);
        assert!(trace_decompositions(2).is_err());
    }

    #[test]
    fn decompositions_are_exhaustive() {
        for n in 3..400u64 {
            let m = n * n - 4;
            let brute: Vec<(u64, u64)> = (1..=n)
                .filter(|v| m % (v * v) == 0 && (m / (v * v)) % 4 <= 1)
                .map(|v| (m / (v * v), v))
                .collect();
            assert_eq!(pairs(n), brute, "n = {n}");
        }
    }

    #[test]
    fn small_sieve() {
        let s = spectrum_sieve(3, &SieveConfig::default()).unwrap();
        assert_eq!(s.rows().len(), 1);
        let r = s.row(3).unwrap();
        assert_eq!(r.g, 1);
        assert!((r.alpha - 3f64.ln() / 3.0).abs() < 1e-15);
        assert!((r.alpha - 0.3662).abs() < 1e-4);
        assert!((r.alpha_tilde - (r.alpha - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn sieve_flags_and_multiplicities() {
        let s = spectrum_sieve(120, &SieveConfig::default()).unwrap();
        let d9 = s.decomposition(9).unwrap();
        assert_eq!(d9.entries.len(), 1);
        assert_eq!(d9.entries[0].d.get(), 77);
        assert!(d9.entries[0].fundamental);
        assert_eq!(s.row(9).unwrap().g, class_number(d9.entries[0].d).unwrap());
        let d7 = s.decomposition(7).unwrap();
        let five = d7.entries.iter().find(|e| e.d.get() == 5).unwrap();
        assert_eq!(five.v, 3);
        assert!(!five.fundamental);

        for row in s.rows() {
            let dec = s.decomposition(row.n).unwrap();
            let mut g = 0;
            for e in &dec.entries {
                let p = pell_fundamental(e.d, 1_000).unwrap();
                assert_eq!(
                    e.fundamental,
                    p.u == row.n as u128,
                    "n = {}, d = {}",
                    row.n,
                    e.d
                );
                if e.fundamental {
                    assert_eq!(p.v, e.v as u128);
                    g += class_number(e.d).unwrap();
                }
            }
            assert_eq!(row.g, g, "n = {}", row.n);
            assert!(row.g >= 1);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let seq = SieveConfig {
            execution: Execution::Sequential,
            ..SieveConfig::default()
        };
        let a = spectrum_sieve(300, &seq).unwrap();
        let b = spectrum_sieve(300, &SieveConfig::default()).unwrap();
        assert_eq!(a.rows(), b.rows());
    }

    #[test]
    fn known_records_are_used_and_checked() {
        let base = spectrum_sieve(50, &SieveConfig::default()).unwrap();
        let known: HashMap<u64, ClassRecord> =
            base.classes().iter().map(|(&d, &r)| (d, r)).collect();
        let again = spectrum_sieve(
            50,
            &SieveConfig {
                known,
                ..SieveConfig::default()
            },
        )
        .unwrap();
        assert_eq!(again.rows(), base.rows());

        let mut bad: HashMap<u64, ClassRecord> = HashMap::new();
        let mut r = base.classes()[&5];
        r.u = 11;
        bad.insert(5, r);
        assert!(spectrum_sieve(
            50,
            &SieveConfig {
                known: bad,
                ..SieveConfig::default()
            }
        )
        .is_err());
    }

    #[test]
    fn memory_budget_is_enforced() {
        let cfg = SieveConfig {
            memory_budget: 64,
            ..SieveConfig::default()
        };
        assert!(matches!(
            spectrum_sieve(100, &cfg),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn beta_examples() {
        let d5 = Discriminant::new(5).unwrap();
        let b3 = beta(3, 4096.0).unwrap();
        assert!((b3 - 0.430409).abs() < 1e-5);
        let b6 = beta(6, 64.0).unwrap();
        let expect = smoothed_l(Discriminant::new(32).unwrap(), 64.0)
            + 0.5 * smoothed_l(Discriminant::new(8).unwrap(), 64.0);
        assert!((b6 - expect).abs() < 1e-15);
        let s = spectrum_sieve(10, &SieveConfig::default()).unwrap();
        let exact = s.beta_exact(3).unwrap();
        assert!((exact - ((3.0 + 5f64.sqrt()) / 2.0).ln() / 5f64.sqrt()).abs() < 1e-12);
        assert!((smoothed_l(d5, 4096.0) - exact).abs() < 1e-6);
    }
}
