//! Accuracy and timing scans over `(i, N, backend)` grids.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{format_scientific, format_significant, make_backend, BackendSpec};
use crate::error::{Error, Result};
use crate::oracle::{correct_digits, reference_pi, ReferenceDigits};
use crate::series::{pi_estimate, FamilyIndex, PiEstimate, TailBound, TruncationLimit};

/// Digits assumed for the exact backend when sizing the reference.
const RATIONAL_REFERENCE_DIGITS: u32 = 100;
const ESTIMATE_SIGNIFICANT: u32 = 20;
const ERROR_SIGNIFICANT: u32 = 3;

pub const CSV_HEADER: [&str; 9] = [
    "i",
    "N",
    "backend",
    "estimate",
    "abs_error",
    "correct_digits",
    "last_term",
    "tail_bound",
    "elapsed_ns",
];

/// The grid used when no lists are given: i = 1..=20, four decades of N,
/// and the plain, compensated and 256-bit backends.
pub fn default_grid() -> ScanGrid {
    ScanGrid::new(
        (1..=20).map(|i| FamilyIndex::new(i).expect("i >= 1")).collect(),
        [10u64, 100, 1_000, 10_000]
            .into_iter()
            .map(|n| TruncationLimit::new(n).expect("N >= 1"))
            .collect(),
        vec![
            BackendSpec::Binary64Plain,
            BackendSpec::Binary64Compensated,
            BackendSpec::ArbitraryPrecision { bits: 256 },
        ],
    )
    .expect("default grid is valid")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    i_values: Vec<FamilyIndex>,
    n_values: Vec<TruncationLimit>,
    backends: Vec<BackendSpec>,
    reference_digits: u32,
}

fn required_digits(backends: &[BackendSpec]) -> u32 {
    backends
        .iter()
        .map(|b| b.meaningful_digits().unwrap_or(RATIONAL_REFERENCE_DIGITS))
        .max()
        .unwrap_or(0)
        + 2
}

impl ScanGrid {
    pub fn new(
        i_values: Vec<FamilyIndex>,
        n_values: Vec<TruncationLimit>,
        backends: Vec<BackendSpec>,
    ) -> Result<Self> {
        let digits = required_digits(&backends);
        Self::with_reference_digits(i_values, n_values, backends, digits)
    }

    pub fn with_reference_digits(
        i_values: Vec<FamilyIndex>,
        n_values: Vec<TruncationLimit>,
        backends: Vec<BackendSpec>,
        reference_digits: u32,
    ) -> Result<Self> {
        if i_values.is_empty() || n_values.is_empty() || backends.is_empty() {
            return Err(Error::Domain("scan grid lists must be non-empty".into()));
        }
        for b in &backends {
            b.validate()?;
        }
        let needed = required_digits(&backends);
        if reference_digits < needed {
            return Err(Error::Domain(format!(
                "reference needs at least {needed} digits for these backends, got {reference_digits}"
            )));
        }
        Ok(ScanGrid {
            i_values,
            n_values,
            backends,
            reference_digits,
        })
    }

    pub fn reference_digits(&self) -> u32 {
        self.reference_digits
    }

    pub fn len(&self) -> usize {
        self.i_values.len() * self.n_values.len() * self.backends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in lexicographic `(i, N, backend)` order, as listed.
    pub fn points(&self) -> Vec<(FamilyIndex, TruncationLimit, BackendSpec)> {
        let mut out = Vec::with_capacity(self.len());
        for &i in &self.i_values {
            for &n in &self.n_values {
                for &b in &self.backends {
                    out.push((i, n, b));
                }
            }
        }
        out
    }
}

mod as_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

/// One scored grid point. Every field travels as a string in JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRecord {
    #[serde(with = "as_string")]
    pub i: u32,
    #[serde(rename = "N", with = "as_string")]
    pub n: u64,
    pub backend: String,
    pub estimate: String,
    pub abs_error: String,
    #[serde(with = "as_string")]
    pub correct_digits: u32,
    /// Larger of the two series' last included term magnitudes.
    pub last_term_magnitude: String,
    /// `exact` when both series terminated, `n/a` when a truncated series
    /// has no heuristic, otherwise the summed heuristic tails.
    pub tail_bound: String,
    #[serde(with = "as_string")]
    pub elapsed_nanoseconds: u64,
}

fn tail_column(estimate: &PiEstimate) -> String {
    let mut total: Option<BigRational> = None;
    for tail in [&estimate.p_i.tail_bound, &estimate.p_im1.tail_bound] {
        match tail {
            TailBound::Exact => {}
            TailBound::Unavailable => return "n/a".to_string(),
            TailBound::Heuristic(v) => {
                let v = v.to_rational();
                total = Some(match total {
                    Some(t) => t + v,
                    None => v,
                });
            }
        }
    }
    match total {
        None => "exact".to_string(),
        Some(t) => format_scientific(&t, ERROR_SIGNIFICANT),
    }
}

/// Score an estimate against the reference and render it as a record.
pub fn make_record(estimate: &PiEstimate, reference: &ReferenceDigits, elapsed_ns: u64) -> ScanRecord {
    let value = estimate.value.to_rational();
    let abs_error = (&value - &reference.value).abs();
    let last_term = std::cmp::max(
        estimate.p_i.last_term_magnitude.to_rational(),
        estimate.p_im1.last_term_magnitude.to_rational(),
    );
    ScanRecord {
        i: estimate.i.get(),
        n: estimate.limit.get(),
        backend: estimate.backend.tag(),
        estimate: format_significant(&value, ESTIMATE_SIGNIFICANT),
        abs_error: format_scientific(&abs_error, ERROR_SIGNIFICANT),
        correct_digits: correct_digits(&estimate.value, reference),
        last_term_magnitude: format_scientific(&last_term, ERROR_SIGNIFICANT),
        tail_bound: tail_column(estimate),
        elapsed_nanoseconds: elapsed_ns,
    }
}

/// Evaluate one grid point, timing only the estimate itself.
pub fn evaluate_point(
    i: FamilyIndex,
    n: TruncationLimit,
    backend: BackendSpec,
    reference: &ReferenceDigits,
) -> Result<ScanRecord> {
    let handle = make_backend(backend)?;
    let start = Instant::now();
    let estimate = pi_estimate(i, n, &handle);
    let elapsed = start.elapsed().as_nanos().max(1) as u64;
    Ok(make_record(&estimate, reference, elapsed))
}

/// Evaluate every grid point, possibly in parallel on the current rayon
/// pool. The result is always in grid order.
pub fn run_scan(grid: &ScanGrid) -> Result<Vec<ScanRecord>> {
    let reference = reference_pi(grid.reference_digits)?;
    grid.points()
        .into_par_iter()
        .map(|(i, n, b)| evaluate_point(i, n, b, &reference))
        .collect()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new())
}

pub fn emit_csv(records: &[ScanRecord]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.i.to_string(),
            r.n.to_string(),
            r.backend.clone(),
            r.estimate.clone(),
            r.abs_error.clone(),
            r.correct_digits.to_string(),
            r.last_term_magnitude.clone(),
            r.tail_bound.clone(),
            r.elapsed_nanoseconds.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn emit_json(records: &[ScanRecord]) -> Vec<u8> {
    serde_json::to_vec_pretty(records).expect("records serialize")
}

pub fn parse_json(bytes: &[u8]) -> Result<Vec<ScanRecord>> {
    serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Median of repeated timings for one grid point.
pub fn bench_point(
    i: FamilyIndex,
    n: TruncationLimit,
    backend: BackendSpec,
    repeat: u32,
) -> Result<u64> {
    if repeat == 0 {
        return Err(Error::Domain("repeat must be at least 1".into()));
    }
    let handle = make_backend(backend)?;
    let mut samples: Vec<u64> = (0..repeat)
        .map(|_| {
            let start = Instant::now();
            let estimate = pi_estimate(i, n, &handle);
            let elapsed = start.elapsed().as_nanos().max(1) as u64;
            std::hint::black_box(estimate);
            elapsed
        })
        .collect();
    samples.sort_unstable();
    Ok(samples[samples.len() / 2])
}
