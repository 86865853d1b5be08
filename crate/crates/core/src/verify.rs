//! Identity suites behind the `verify` command.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;

use crate::arithmetic::{make_backend, BackendSpec};
use crate::error::{Error, Result};
use crate::hypersphere::{k_identity_check, slice_integral_oracle, QuadratureSpec};
use crate::oracle::{correct_digits, double_factorial_ratio, reference_pi};
use crate::series::{
    eval_p, eval_p_exact_odd, pi_estimate, q_direct_exact, q_next, FamilyIndex,
    QCoefficientStream, TruncationLimit,
};

pub const Q_EQUIVALENCE: &str = "Q-equivalence";
pub const ODD_CLOSED_FORM: &str = "odd-closed-form";
pub const K_IDENTITY: &str = "k-identity";
pub const SLICE_INTEGRAL: &str = "slice-integral";
pub const BINARY64_CASES: &str = "binary64-cases";
pub const FAMILY_CONSISTENCY: &str = "family-consistency";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::Domain(format!("unknown level `{other}`"))),
        }
    }
}

/// Replaceable pieces of the pipeline, so tests can check that a broken
/// implementation is caught.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub q_step: fn(&QCoefficientStream) -> QCoefficientStream,
}

impl Default for Hooks {
    fn default() -> Self {
        Hooks { q_step: q_next }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        SuiteOutcome {
            name,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {} ({} checks, {} failures)",
            self.name,
            self.checks,
            self.failures.len()
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suites: Vec<SuiteOutcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteOutcome::passed)
    }

    pub fn failed_suites(&self) -> Vec<&'static str> {
        self.suites
            .iter()
            .filter(|s| !s.passed())
            .map(|s| s.name)
            .collect()
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn limit(n: u64) -> TruncationLimit {
    TruncationLimit::new(n).expect("N >= 1")
}

/// Recursion versus direct product for `sub <= max_sub`, `n <= max_n`,
/// plus exact vanishing of odd-subscript coefficients.
pub fn q_equivalence(max_sub: u32, max_n: u64, hooks: &Hooks) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(Q_EQUIVALENCE);
    let exact = make_backend(BackendSpec::ExactRational).expect("exact backend");
    for sub in 0..=max_sub {
        let mut stream = QCoefficientStream::new(sub, exact);
        for n in 1..=max_n {
            if n > 1 {
                stream = (hooks.q_step)(&stream);
            }
            let value = stream.value().to_rational();
            let direct = q_direct_exact(sub, n).expect("n >= 1");
            out.check(value == direct, || format!("Q_{{{sub},{n}}}: recursion {value} vs product {direct}"));
            if sub % 2 == 1 && n >= u64::from(sub + 1) / 2 {
                out.check(stream.value().is_zero(), || format!("Q_{{{sub},{n}}} should vanish"));
            }
        }
    }
    out
}

/// Terminating sums against `(i-1)!!/i!!` for odd `i <= max_i`.
pub fn odd_closed_form(max_i: u32) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(ODD_CLOSED_FORM);
    for i in (1..=max_i).step_by(2) {
        let series = eval_p_exact_odd(i).expect("odd");
        let closed = double_factorial_ratio(i).expect("odd");
        out.check(series == closed, || format!("P_{i}: series {series} vs closed form {closed}"));
    }
    out
}

/// `k_i = 4 k_{i-2} P_i P_{i-1}` residuals at `n_high`, shrinking from `n_low`.
pub fn k_identity(max_i: u32, n_low: u64, n_high: u64, tolerance: f64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(K_IDENTITY);
    let backend = make_backend(BackendSpec::ArbitraryPrecision { bits: 128 }).expect("ap128");
    for i in 3..=max_i {
        let high = k_identity_check(i, limit(n_high), &backend).expect("i >= 3").to_f64();
        let low = k_identity_check(i, limit(n_low), &backend).expect("i >= 3").to_f64();
        out.check(high <= tolerance, || format!("i={i}: residual {high:e} > {tolerance:e}"));
        out.check(high < low, || format!("i={i}: residual did not shrink ({low:e} -> {high:e})"));
    }
    out
}

/// Midpoint quadrature of the slice integral against `R^i P_i`.
pub fn slice_integral(max_i: u32, n_terms: u64, panels: u32, rel_tolerance: f64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(SLICE_INTEGRAL);
    let f64b = make_backend(BackendSpec::Binary64Plain).expect("f64");
    let ap = make_backend(BackendSpec::ArbitraryPrecision { bits: 128 }).expect("ap128");
    let quad = QuadratureSpec::midpoint(panels).expect("panels >= 16");
    for i in 1..=max_i {
        let p = eval_p(i, limit(n_terms), &ap).value.to_rational();
        for (rn, rd) in [(1, 2), (1, 1), (2, 1)] {
            let radius = f64b.from_ratio(rn, rd).expect("non-zero");
            let numeric = slice_integral_oracle(i, &radius, quad).expect("valid").to_rational();
            let exact_radius = q(rn, rd);
            let series = num_traits::pow(exact_radius, i as usize) * &p;
            let rel = ((numeric - &series) / &series).abs();
            let rel = num_traits::ToPrimitive::to_f64(&rel).unwrap_or(f64::INFINITY);
            out.check(rel <= rel_tolerance, || {
                format!("i={i} R={rn}/{rd}: relative gap {rel:e} > {rel_tolerance:e}")
            });
        }
    }
    out
}

/// The two binary64 reference cases: 11 digits at (5, 3e6)
/// and 15 digits at (17, 130).
pub fn binary64_cases() -> SuiteOutcome {
    let mut out = SuiteOutcome::new(BINARY64_CASES);
    let reference = reference_pi(30).expect("reference");
    let f64b = make_backend(BackendSpec::Binary64Plain).expect("f64");
    for (i, n, min_digits, max_error) in [(5u32, 3_000_000u64, 11u32, 1e-10), (17, 130, 14, 5e-14)] {
        let est = pi_estimate(FamilyIndex::new(i).expect("i >= 1"), limit(n), &f64b);
        let digits = correct_digits(&est.value, &reference);
        let err = (est.value.to_rational() - &reference.value).abs();
        let err = num_traits::ToPrimitive::to_f64(&err).unwrap_or(f64::INFINITY);
        out.check(digits >= min_digits, || format!("i={i} N={n}: {digits} digits < {min_digits}"));
        out.check(err <= max_error, || format!("i={i} N={n}: error {err:e} > {max_error:e}"));
    }
    out
}

/// Every member `i = 2..=max_i` at `N = n` under ap128 reaches `min_digits`.
pub fn family_consistency(max_i: u32, n: u64, min_digits: u32) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(FAMILY_CONSISTENCY);
    let reference = reference_pi(45).expect("reference");
    let ap = make_backend(BackendSpec::ArbitraryPrecision { bits: 128 }).expect("ap128");
    for i in 2..=max_i {
        let est = pi_estimate(FamilyIndex::new(i).expect("i >= 1"), limit(n), &ap);
        let digits = correct_digits(&est.value, &reference);
        out.check(digits >= min_digits, || format!("i={i}: {digits} digits < {min_digits}"));
    }
    out
}

pub fn run(level: Level) -> Report {
    run_with(level, &Hooks::default())
}

pub fn run_with(level: Level, hooks: &Hooks) -> Report {
    let suites = match level {
        Level::Quick => vec![
            q_equivalence(12, 200, hooks),
            odd_closed_form(11),
            k_identity(12, 10, 1_000, 1e-4),
            slice_integral(10, 1_000, 1 << 16, 1e-4),
            family_consistency(12, 1_000, 3),
        ],
        Level::Full => vec![
            q_equivalence(40, 200, hooks),
            odd_closed_form(99),
            k_identity(12, 100, 10_000, 1e-6),
            slice_integral(10, 10_000, 1 << 16, 1e-4),
            binary64_cases(),
            family_consistency(20, 10_000, 6),
        ],
    };
    Report { suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The recursion without the `-1`: `Q_n = (sub+1)/(2n) · Q_{n-1}`.
    fn dropped_minus_one(stream: &QCoefficientStream) -> QCoefficientStream {
        let n = stream.index() + 1;
        let backend = stream.backend();
        let factor = backend
            .from_ratio(i64::from(stream.subscript()) + 1, 2 * n as i64)
            .unwrap();
        stream.with_value(n, &factor * stream.value())
    }

    #[test]
    fn quick_level_passes() {
        let report = run(Level::Quick);
        assert!(report.passed(), "{:?}", report.failed_suites());
        assert_eq!(report.suites.len(), 5);
    }

    #[test]
    fn mutated_recursion_is_caught() {
        let hooks = Hooks {
            q_step: dropped_minus_one,
        };
        let report = run_with(Level::Quick, &hooks);
        assert!(!report.passed());
        assert_eq!(report.failed_suites(), vec![Q_EQUIVALENCE]);
    }

    #[test]
    fn levels_parse() {
        assert_eq!("quick".parse::<Level>().unwrap(), Level::Quick);
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("xml".parse::<Level>().is_err());
    }
}
