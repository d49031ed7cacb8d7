use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use geodesic_core::correlation::{compare_spectrum, CorrelationReport};
use geodesic_core::local::euler_product_gamma_with;
use geodesic_core::spectrum::{spectrum_sieve, SieveConfig, Spectrum};
use geodesic_core::verify::{run_suite, Suite};
use geodesic_core::Execution;
use serde::Serialize;

mod cache;
mod output;

use output::{emit, sig12};

#[derive(Parser)]
#[command(
    name = "geodesic",
    version,
    about = "Closed geodesic multiplicities and their pair correlation"
)]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write `n,g,alpha` for every 2 < n <= max-n.
    Alpha {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
        max_n: u64,
        /// Output path, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, env = "GEODESIC_CACHE")]
        cache: Option<PathBuf>,
    },
    /// Write `r,gamma_predicted,tail_bound` from the truncated Euler product.
    Predict {
        #[arg(long)]
        r_max: u64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(2..))]
        prime_limit: u64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
        b_cap: u32,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Write a JSON comparison of empirical and predicted pair correlations.
    Compare {
        #[arg(long)]
        r_max: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
        max_n: u64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(2..))]
        prime_limit: u64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
        b_cap: u32,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, env = "GEODESIC_CACHE")]
        cache: Option<PathBuf>,
    },
    /// Run an oracle suite and print a PASS/FAIL table.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fourier,
    Localfactors,
    Classnumber,
    #[value(name = "lemma41")]
    BetaFactorization,
    Gauss,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Fourier => Suite::Fourier,
            SuiteArg::Localfactors => Suite::LocalFactors,
            SuiteArg::Classnumber => Suite::ClassNumber,
            SuiteArg::BetaFactorization => Suite::BetaFactorization,
            SuiteArg::Gauss => Suite::Gauss,
        }
    }
}

#[derive(Serialize)]
struct CompareMeta {
    r_max: u64,
    max_n: u64,
    prime_limit: u64,
    b_cap: u32,
    version: &'static str,
}

#[derive(Serialize)]
struct CompareOutput {
    meta: CompareMeta,
    reports: Vec<CorrelationReport>,
}

/// Sieves up to `n_max`, seeding class numbers from the cache and writing
/// the merged cache back.
fn sieve_with_cache(
    n_max: u64,
    cache_path: Option<&Path>,
    execution: Execution,
) -> Result<Spectrum> {
    let mut cached = match cache_path {
        Some(p) => cache::load(p)?,
        None => Default::default(),
    };
    let known: HashMap<_, _> = cached.values().map(|e| (e.d, e.to_record())).collect();
    let config = SieveConfig {
        execution,
        known,
        ..SieveConfig::default()
    };
    let started = Instant::now();
    let spectrum = spectrum_sieve(n_max, &config)?;
    eprintln!(
        "sieved {} traces, {} discriminants in {:.2?}",
        spectrum.rows().len(),
        spectrum.classes().len(),
        started.elapsed()
    );
    if let Some(p) = cache_path {
        let before = cached.len();
        for r in spectrum.classes().values() {
            cached
                .entry(r.d.get())
                .or_insert_with(|| cache::CacheEntry::from_record(r));
        }
        if cached.len() != before || !p.exists() {
            cache::store(p, &cached)?;
        }
    }
    Ok(spectrum)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Alpha { max_n, out, cache } => {
            let spectrum = sieve_with_cache(max_n, cache.as_deref(), execution)?;
            let mut text = String::from("n,g,alpha\n");
            for row in spectrum.rows() {
                text.push_str(&format!("{},{},{}\n", row.n, row.g, sig12(row.alpha)));
            }
            emit(&out, &text)?;
        }
        Command::Predict {
            r_max,
            prime_limit,
            b_cap,
            out,
        } => {
            let shifts: Vec<u64> = (0..=r_max).collect();
            let predictions = execution.try_map(&shifts, |&r| {
                euler_product_gamma_with(r, prime_limit, b_cap, Execution::Sequential)
            })?;
            let mut text = String::from("r,gamma_predicted,tail_bound\n");
            for p in predictions {
                text.push_str(&format!(
                    "{},{},{}\n",
                    p.r,
                    sig12(p.gamma),
                    sig12(p.tail_bound)
                ));
            }
            emit(&out, &text)?;
        }
        Command::Compare {
            r_max,
            max_n,
            prime_limit,
            b_cap,
            out,
            cache,
        } => {
            let spectrum = sieve_with_cache(max_n + r_max, cache.as_deref(), execution)?;
            let reports = compare_spectrum(&spectrum, r_max, max_n, prime_limit, b_cap, execution)?;
            let doc = CompareOutput {
                meta: CompareMeta {
                    r_max,
                    max_n,
                    prime_limit,
                    b_cap,
                    version: env!("CARGO_PKG_VERSION"),
                },
                reports,
            };
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            emit(&out, &text)?;
        }
        Command::Verify { suite } => {
            let suite = Suite::from(suite);
            let checks = run_suite(suite, execution)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{}: {} checks, {failed} failed", suite.name(), checks.len());
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
