mod lists;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hyperpi_core::analysis::{bench_point, default_grid, emit_csv, emit_json, run_scan, ScanGrid};
use hyperpi_core::arithmetic::{format_scientific, render_rational, BackendSpec};
use hyperpi_core::error::Error;
use hyperpi_core::oracle::{correct_digits, reference_pi};
use hyperpi_core::series::{pi_estimate, FamilyIndex, SeriesEvaluation, TailBound, TruncationLimit};
use hyperpi_core::verify::{self, Level};
use lists::List;
use rayon::prelude::*;

const RATIONAL_WARN_TERMS: u64 = 10_000;

#[derive(Parser)]
#[command(name = "hyperpi", version, about = "Pi from hypersphere slice series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one family member and compare it with reference digits.
    Compute {
        #[arg(long = "i", value_parser = clap::value_parser!(u32).range(1..))]
        i: u32,
        #[arg(long, short = 'N', value_parser = clap::value_parser!(u64).range(1..))]
        terms: u64,
        #[arg(long, default_value = "f64", value_parser = parse_backend)]
        backend: BackendSpec,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..=10_000))]
        digits: u32,
    },
    /// Evaluate a grid of points and emit one record per point.
    Scan {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "HYPERPI_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Run the identity suites.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
    },
    /// Median timings per grid point.
    Bench {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        repeat: u32,
        #[arg(long, env = "HYPERPI_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
}

#[derive(clap::Args)]
struct GridArgs {
    /// Family indices, e.g. `2..20..1` or `5,9,17`.
    #[arg(long = "i", value_parser = lists::index_list)]
    i: Option<List<u32>>,
    /// Truncation limits, e.g. `100,1000`.
    #[arg(long, short = 'N', value_parser = lists::terms_list)]
    terms: Option<List<u64>>,
    /// Backends, e.g. `f64,f64c,ap256`.
    #[arg(long, value_parser = lists::backend_list)]
    backend: Option<List<BackendSpec>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

fn parse_backend(text: &str) -> Result<BackendSpec, String> {
    let spec: BackendSpec = text.parse().map_err(|e| format!("{e}"))?;
    spec.validate().map_err(|e| format!("{e}"))?;
    Ok(spec)
}

enum Failure {
    Verification,
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Io(e.to_string())
}

impl GridArgs {
    fn build(self) -> Result<ScanGrid, Failure> {
        if self.i.is_none() && self.terms.is_none() && self.backend.is_none() {
            return Ok(default_grid());
        }
        let defaults = default_grid().points();
        let mut i_default: Vec<u32> = defaults.iter().map(|p| p.0.get()).collect();
        i_default.dedup();
        let mut n_default: Vec<u64> = defaults.iter().map(|p| p.1.get()).collect();
        n_default.sort_unstable();
        n_default.dedup();
        let mut b_default: Vec<BackendSpec> = Vec::new();
        for p in &defaults {
            if !b_default.contains(&p.2) {
                b_default.push(p.2);
            }
        }
        let i_values = self
            .i
            .map_or(i_default, |l| l.0)
            .into_iter()
            .map(FamilyIndex::new)
            .collect::<Result<Vec<_>, _>>()?;
        let n_values = self
            .terms
            .map_or(n_default, |l| l.0)
            .into_iter()
            .map(TruncationLimit::new)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScanGrid::new(i_values, n_values, self.backend.map_or(b_default, |l| l.0))?)
    }
}

fn thread_pool(jobs: Option<u32>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j as usize);
    }
    builder
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start worker threads: {e}")))
}

fn write_output(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes).map_err(io_failure)?;
            stdout.flush().map_err(io_failure)
        }
    }
}

fn series_line(label: &str, eval: &SeriesEvaluation, spec: BackendSpec, digits: u32) -> Result<String, Failure> {
    let value = if spec == BackendSpec::ExactRational && eval.tail_bound.is_exact() {
        eval.value.to_rational().to_string()
    } else {
        eval.value.to_decimal_string(digits)?
    };
    let tail = match &eval.tail_bound {
        TailBound::Exact => "exact".to_string(),
        TailBound::Unavailable => "n/a".to_string(),
        TailBound::Heuristic(t) => format_scientific(&t.to_rational(), 3),
    };
    Ok(format!(
        "{label:<11}{value}  (terms {}, tail {tail})",
        eval.terms_used
    ))
}

fn cmd_compute(i: u32, terms: u64, backend: BackendSpec, digits: u32) -> Result<(), Failure> {
    if backend == BackendSpec::ExactRational && terms > RATIONAL_WARN_TERMS {
        eprintln!(
            "warning: exact rational evaluation of an infinite series with N = {terms} may be very slow"
        );
    }
    let handle = hyperpi_core::arithmetic::make_backend(backend)?;
    let family = FamilyIndex::new(i)?;
    let estimate = pi_estimate(family, TruncationLimit::new(terms)?, &handle);
    let scoring = backend.meaningful_digits().unwrap_or(100) + 2;
    let reference = reference_pi(scoring.max(digits))?;
    let value = estimate.value.to_rational();
    let error = if value >= reference.value {
        &value - &reference.value
    } else {
        &reference.value - &value
    };
    let mut report = String::new();
    report.push_str(&format!("i          {i}\n"));
    report.push_str(&format!("N          {terms}\n"));
    report.push_str(&format!("backend    {backend}\n"));
    report.push_str(&series_line("P_i", &estimate.p_i, backend, digits)?);
    report.push('\n');
    report.push_str(&series_line("P_i-1", &estimate.p_im1, backend, digits)?);
    report.push('\n');
    report.push_str(&format!("estimate   {}\n", estimate.value.to_decimal_string(digits)?));
    report.push_str(&format!("reference  {}\n", render_rational(&reference.value, digits)));
    report.push_str(&format!("abs_error  {}\n", format_scientific(&error, 3)));
    report.push_str(&format!("correct_digits {}\n", correct_digits(&estimate.value, &reference)));
    write_output(report.as_bytes(), None)
}

fn cmd_scan(grid: GridArgs, format: Format, out: Option<PathBuf>, jobs: Option<u32>) -> Result<(), Failure> {
    let grid = grid.build()?;
    let pool = thread_pool(jobs)?;
    let records = pool.install(|| run_scan(&grid))?;
    let bytes = match format {
        Format::Csv => emit_csv(&records),
        Format::Json => emit_json(&records),
    };
    write_output(&bytes, out.as_ref())
}

fn cmd_verify(level: VerifyLevel) -> Result<(), Failure> {
    let level = match level {
        VerifyLevel::Quick => Level::Quick,
        VerifyLevel::Full => Level::Full,
    };
    let report = verify::run(level);
    let mut text = String::new();
    for suite in &report.suites {
        text.push_str(&format!("{suite}\n"));
        for failure in &suite.failures {
            text.push_str(&format!("  {failure}\n"));
        }
    }
    write_output(text.as_bytes(), None)?;
    if report.passed() {
        Ok(())
    } else {
        eprintln!("failed suites: {}", report.failed_suites().join(", "));
        Err(Failure::Verification)
    }
}

fn cmd_bench(grid: GridArgs, repeat: u32, jobs: Option<u32>) -> Result<(), Failure> {
    let grid = grid.build()?;
    let pool = thread_pool(jobs)?;
    let timings = pool.install(|| {
        grid.points()
            .into_par_iter()
            .map(|(i, n, b)| bench_point(i, n, b, repeat).map(|t| (i, n, b, t)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut text = String::from("i,N,backend,repeat,elapsed_ns\n");
    for (i, n, b, t) in timings {
        text.push_str(&format!("{},{},{b},{repeat},{t}\n", i.get(), n.get()));
    }
    write_output(text.as_bytes(), None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute {
            i,
            terms,
            backend,
            digits,
        } => cmd_compute(i, terms, backend, digits),
        Command::Scan {
            grid,
            format,
            out,
            jobs,
        } => cmd_scan(grid, format, out, jobs),
        Command::Verify { level } => cmd_verify(level),
        Command::Bench { grid, repeat, jobs } => cmd_bench(grid, repeat, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
