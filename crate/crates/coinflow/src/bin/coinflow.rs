//! Command-line interface for the `coinflow` sampling benchmarks.
//!
//! Subcommands: `sample`, `bench`, `extract-test`, `batch-bench`, `bounds`.
//! Exit codes: `0` success (all checks passed), `1` a measured check failed,
//! `2` usage, configuration, or sampling error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coinflow::bench::{
    batch_csv, bench_csv, bounds_csv, extract_csv, methods_for, parse_alg, parse_catalog_law,
    parse_eps, parse_norm, parse_seed, parse_u64_list, run_batch_bench, run_bench,
    run_bounds_row, run_extract_test, run_samples, samples_csv, BenchRow, LawSpec, MethodSpec,
};

#[derive(Debug, Parser)]
#[command(
    name = "coinflow",
    version,
    about = "Entropy-optimal sampling from fair coin flips: exact discrete samplers, \
             ε-accurate continuous samplers, randomness recycling, and cost bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    /// Comma-separated values with a header line.
    Csv,
    /// Pretty-printed JSON array/object.
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Draw individual values and print them with their exact bit costs.
    Sample {
        /// Target law (uniform, exponential, truncated-exponential, maxwell,
        /// normal-pair, geometric-1-over-e, dyadic:…, discrete:…, or a .json
        /// file).
        #[arg(long, default_value = "uniform")]
        law: String,
        /// Sampling method (defaults to the law's first applicable method).
        #[arg(long)]
        method: Option<String>,
        /// Accuracy for continuous laws (a/2^k, a/b with b a power of two,
        /// or a decimal).
        #[arg(long, default_value = "1/2^10")]
        eps: String,
        /// Number of draws.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Master seed (decimal or 0x-prefixed hex).
        #[arg(long, default_value = "0x1")]
        seed: String,
        /// Replay bits from this tape file ('0'/'1' characters, whitespace
        /// ignored) instead of a seeded generator.
        #[arg(long)]
        tape: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Measure mean bit costs over seeded trials and check them against
    /// reference bands. Exit code 1 if any row fails.
    Bench {
        /// Target law.
        #[arg(long, default_value = "uniform")]
        law: String,
        /// Comma-separated methods, or `all` for every applicable one.
        #[arg(long, default_value = "all")]
        method: String,
        /// Comma-separated accuracies (ignored by discrete laws).
        #[arg(long, default_value = "1/2^10")]
        eps: String,
        /// Seeded trials per row.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Master seed (decimal or 0x-prefixed hex).
        #[arg(long, default_value = "0x1")]
        seed: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample a dyadic discrete law, recover the spent randomness with the
    /// joint extractor, and run monobit/runs tests on the recovered bits.
    /// Exit code 1 if a test fails.
    ExtractTest {
        /// Dyadic discrete law (dyadic:…, or a .json file).
        #[arg(long, default_value = "dyadic:1/2,1/2")]
        law: String,
        /// Sampler algorithm: ky or hh.
        #[arg(long, default_value = "ky")]
        alg: String,
        /// Number of draws to push through the extractor.
        #[arg(long, default_value_t = 30000)]
        samples: u64,
        /// Master seed (decimal or 0x-prefixed hex).
        #[arg(long, default_value = "0x1")]
        seed: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the batch recycling pipeline for a grid of batch sizes and report
    /// fresh-bit rates against the law's entropy.
    BatchBench {
        /// Dyadic discrete law (dyadic:…, or a .json file).
        #[arg(long, default_value = "dyadic:1/4,3/4")]
        law: String,
        /// Sampler algorithm: ky or hh.
        #[arg(long, default_value = "hh")]
        alg: String,
        /// Comma-separated batch sizes.
        #[arg(long, default_value = "100,1000,10000")]
        n: String,
        /// Master seed (decimal or 0x-prefixed hex).
        #[arg(long, default_value = "0x1")]
        seed: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate the information-theoretic cost bounds for a catalog law.
    Bounds {
        /// Catalog law: uniform, exponential, truncated-exponential,
        /// maxwell, normal.
        #[arg(long, default_value = "exponential")]
        law: String,
        /// Dimension (i.i.d. coordinates).
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Accuracy norm: inf, or a positive number p.
        #[arg(long, default_value = "inf")]
        p: String,
        /// Comma-separated accuracies.
        #[arg(long, default_value = "1/2^10")]
        eps: String,
        /// Sampler overhead inside the upper bound: ky (+2) or hh (+3).
        #[arg(long, default_value = "ky")]
        alg: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| format!("serializing report: {e}"))
}

fn parse_eps_list(text: &str) -> Result<Vec<coinflow::exact::Dyadic>, String> {
    text.split(',').map(parse_eps).collect()
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Sample {
            law,
            method,
            eps,
            trials,
            seed,
            tape,
            output,
        } => {
            let law = LawSpec::parse(&law)?;
            let method = match method {
                Some(name) => MethodSpec::parse(&name)?,
                None => methods_for(&law)[0],
            };
            let eps = if law.needs_eps() {
                Some(parse_eps(&eps)?)
            } else {
                None
            };
            let seed = parse_seed(&seed)?;
            let tape_text = match &tape {
                Some(path) => Some(
                    std::fs::read_to_string(path)
                        .map_err(|e| format!("reading {}: {e}", path.display()))?,
                ),
                None => None,
            };
            let rows = run_samples(
                &law,
                method,
                eps.as_ref(),
                trials,
                seed,
                tape_text.as_deref(),
            )?;
            let text = match output.format {
                Format::Csv => samples_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&text, output.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bench {
            law,
            method,
            eps,
            trials,
            seed,
            output,
        } => {
            let law = LawSpec::parse(&law)?;
            let methods: Vec<MethodSpec> = if method.trim() == "all" {
                methods_for(&law).to_vec()
            } else {
                method
                    .split(',')
                    .map(MethodSpec::parse)
                    .collect::<Result<_, _>>()?
            };
            let seed = parse_seed(&seed)?;
            let eps_list = if law.needs_eps() {
                parse_eps_list(&eps)?.into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            let mut rows: Vec<BenchRow> = Vec::new();
            for eps in &eps_list {
                for &m in &methods {
                    rows.push(run_bench(&law, m, eps.as_ref(), trials, seed)?);
                }
            }
            let all_pass = rows.iter().all(|r| r.pass);
            let text = match output.format {
                Format::Csv => bench_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&text, output.out.as_ref())?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::ExtractTest {
            law,
            alg,
            samples,
            seed,
            output,
        } => {
            let law = LawSpec::parse(&law)?;
            let alg = parse_alg(&alg)?;
            let seed = parse_seed(&seed)?;
            let report = run_extract_test(&law, alg, samples, seed)?;
            let text = match output.format {
                Format::Csv => extract_csv(&report),
                Format::Json => to_json(&report)?,
            };
            emit(&text, output.out.as_ref())?;
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::BatchBench {
            law,
            alg,
            n,
            seed,
            output,
        } => {
            let law = LawSpec::parse(&law)?;
            let alg = parse_alg(&alg)?;
            let ns = parse_u64_list(&n)?;
            let seed = parse_seed(&seed)?;
            let rows = run_batch_bench(&law, alg, &ns, seed)?;
            let text = match output.format {
                Format::Csv => batch_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&text, output.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bounds {
            law,
            d,
            p,
            eps,
            alg,
            output,
        } => {
            let law = parse_catalog_law(&law)?;
            if d == 0 {
                return Err("dimension must be at least 1".into());
            }
            let norm = parse_norm(&p)?;
            let alg = parse_alg(&alg)?;
            let rows: Vec<_> = parse_eps_list(&eps)?
                .iter()
                .map(|e| run_bounds_row(law, d, norm, e, alg))
                .collect();
            let text = match output.format {
                Format::Csv => bounds_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&text, output.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
