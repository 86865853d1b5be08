//! The slice series `P_s = 1 + Σ_{n≥1} (-1)^n Q_{s,n} / (2n+1)` and the pi
//! family `pi = 2i · P_i · P_{i-1}` built on it.
//!
//! `Q_{s,n} = ∏_{j=1..n} ((s+1)/(2j) - 1)` is generated by its one-step
//! recursion; the direct product is kept only as an oracle. For odd `s`
//! the factor at `j = (s+1)/2` vanishes, so the series is a finite sum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::arithmetic::{Accumulator, Backend, BackendSpec, Numeric};
use crate::error::{Error, Result};

/// Member `i >= 1` of the pi family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyIndex(u32);

impl FamilyIndex {
    pub fn new(i: u32) -> Result<Self> {
        if i == 0 {
            return Err(Error::Domain("family index i must be at least 1".into()));
        }
        Ok(FamilyIndex(i))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Upper bound `N >= 1` on the summation index of an infinite series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncationLimit(u64);

impl TruncationLimit {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("truncation limit N must be at least 1".into()));
        }
        Ok(TruncationLimit(n))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// `Q_{sub,1} = (sub - 1) / 2`.
pub fn q_first(sub: u32, backend: &Backend) -> Numeric {
    backend
        .from_ratio(i64::from(sub) - 1, 2)
        .expect("non-zero denominator")
}

/// Stateful generator of `Q_{sub,n}`, advanced by the one-step recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct QCoefficientStream {
    sub: u32,
    n: u64,
    q: Numeric,
    backend: Backend,
}

impl QCoefficientStream {
    /// Stream positioned at `n = 1`.
    pub fn new(sub: u32, backend: Backend) -> Self {
        QCoefficientStream {
            sub,
            n: 1,
            q: q_first(sub, &backend),
            backend,
        }
    }

    pub fn subscript(&self) -> u32 {
        self.sub
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn value(&self) -> &Numeric {
        &self.q
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Reposition the stream; used by verification hooks that build
    /// deliberately altered steppers.
    pub fn with_value(&self, n: u64, q: Numeric) -> Self {
        QCoefficientStream {
            sub: self.sub,
            n,
            q,
            backend: self.backend,
        }
    }

    pub fn advance(&mut self) {
        let n = self.n + 1;
        let factor = self
            .backend
            .from_ratio(i64::from(self.sub) + 1 - 2 * n as i64, 2 * n as i64)
            .expect("non-zero denominator");
        self.q = &factor * &self.q;
        self.n = n;
    }
}

/// `Q_{sub,n} -> Q_{sub,n+1}` via `((sub+1)/(2(n+1)) - 1) · Q_{sub,n}`.
pub fn q_next(stream: &QCoefficientStream) -> QCoefficientStream {
    let mut next = stream.clone();
    next.advance();
    next
}

/// Direct product `∏_{j=1..n} ((sub+1)/(2j) - 1)`, exact.
pub fn q_direct_exact(sub: u32, n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::Domain("Q is defined for n >= 1".into()));
    }
    let mut numer = BigInt::one();
    let mut denom = BigInt::one();
    for j in 1..=n as i64 {
        numer *= i64::from(sub) + 1 - 2 * j;
        denom *= 2 * j;
    }
    Ok(BigRational::new(numer, denom))
}

/// Direct product rounded once into `backend`.
pub fn q_direct(sub: u32, n: u64, backend: &Backend) -> Result<Numeric> {
    Ok(backend.from_rational(&q_direct_exact(sub, n)?))
}

/// Number of terms actually summed: odd subscripts stop at `(sub-1)/2`,
/// where the remaining coefficients are all zero.
pub fn effective_limit(sub: u32, limit: TruncationLimit) -> u64 {
    if sub % 2 == 1 {
        limit.get().min(u64::from((sub - 1) / 2))
    } else {
        limit.get()
    }
}

/// Terms `(-1)^n Q_{sub,n} / (2n+1)` for `n = 1..=len`.
#[derive(Clone, Debug)]
pub struct PSeriesTerms {
    stream: QCoefficientStream,
    len: u64,
    started: bool,
}

impl PSeriesTerms {
    pub fn new(sub: u32, len: u64, backend: Backend) -> Self {
        PSeriesTerms {
            stream: QCoefficientStream::new(sub, backend),
            len,
            started: false,
        }
    }
}

impl Iterator for PSeriesTerms {
    type Item = (u64, Numeric);

    fn next(&mut self) -> Option<Self::Item> {
        if self.started {
            if self.stream.index() >= self.len {
                return None;
            }
            self.stream.advance();
        } else {
            if self.len == 0 {
                return None;
            }
            self.started = true;
        }
        let n = self.stream.index();
        let odd_denominator = self.stream.backend().from_int(2 * n as i64 + 1);
        let magnitude = self.stream.value() / &odd_denominator;
        let term = if n % 2 == 1 { magnitude.neg() } else { magnitude };
        Some((n, term))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TailBound {
    /// The series terminated; the sum is exact up to rounding.
    Exact,
    /// Heuristic estimate of the omitted tail.
    Heuristic(Numeric),
    /// A truncated series outside the heuristic's domain.
    Unavailable,
}

impl TailBound {
    pub fn is_exact(&self) -> bool {
        matches!(self, TailBound::Exact)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesEvaluation {
    pub subscript: u32,
    pub terms_used: u64,
    pub value: Numeric,
    pub last_term_magnitude: Numeric,
    pub tail_bound: TailBound,
}

fn heuristic_tail(last_term_magnitude: &Numeric, sub: u32, terms: u64, backend: &Backend) -> Numeric {
    let scale = backend
        .from_ratio(2 * terms as i64 + 1, i64::from(sub) + 1)
        .expect("non-zero denominator");
    last_term_magnitude * &scale
}

fn tail_domain(sub: u32, terms: u64) -> bool {
    sub.is_multiple_of(2) && terms > u64::from(sub / 2)
}

/// `P_sub` summed over `n = 1..=effective_limit(sub, N)` in index order.
pub fn eval_p(sub: u32, limit: TruncationLimit, backend: &Backend) -> SeriesEvaluation {
    let terms_used = effective_limit(sub, limit);
    let mut acc = Accumulator::starting_at(backend.one()).expect("validated backend");
    let mut last = backend.zero();
    for (_, term) in PSeriesTerms::new(sub, terms_used, *backend) {
        acc.add(&term).expect("same backend");
        last = term;
    }
    let last_term_magnitude = last.abs();
    let tail_bound = if sub % 2 == 1 && terms_used == u64::from((sub - 1) / 2) {
        TailBound::Exact
    } else if tail_domain(sub, terms_used) {
        TailBound::Heuristic(heuristic_tail(&last_term_magnitude, sub, terms_used, backend))
    } else {
        TailBound::Unavailable
    };
    SeriesEvaluation {
        subscript: sub,
        terms_used,
        value: acc.total(),
        last_term_magnitude,
        tail_bound,
    }
}

/// The terminating odd-subscript sum in exact rationals.
pub fn eval_p_exact_odd(sub: u32) -> Result<BigRational> {
    if sub.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "subscript {sub} is even; its series does not terminate"
        )));
    }
    let backend = crate::arithmetic::make_backend(BackendSpec::ExactRational)?;
    let limit = TruncationLimit::new(u64::from((sub - 1) / 2).max(1))?;
    let eval = eval_p(sub, limit, &backend);
    Ok(eval.value.to_rational())
}

/// Heuristic bound `|t_N| (2N+1)/(sub+1)` on the tail omitted after `N`
/// terms of an even-subscript series. Terms decay like `n^-(sub+3)/2`
/// and are single-signed past `n = sub/2`, so comparing the tail with
/// the matching integral gives this estimate. It is never used to claim
/// digits.
pub fn tail_bound(sub: u32, limit: TruncationLimit, backend: &Backend) -> Result<Numeric> {
    if !tail_domain(sub, limit.get()) {
        return Err(Error::Domain(format!(
            "tail bound needs an even subscript and N >= sub/2 + 1 (got sub={sub}, N={})",
            limit.get()
        )));
    }
    let last = PSeriesTerms::new(sub, limit.get(), *backend)
        .last()
        .map(|(_, t)| t.abs())
        .expect("at least one term");
    Ok(heuristic_tail(&last, sub, limit.get(), backend))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiEstimate {
    pub i: FamilyIndex,
    pub limit: TruncationLimit,
    pub backend: BackendSpec,
    pub value: Numeric,
    pub p_i: SeriesEvaluation,
    pub p_im1: SeriesEvaluation,
}

/// `2i · P_i · P_{i-1}` with both series truncated at `N`.
pub fn pi_estimate(i: FamilyIndex, limit: TruncationLimit, backend: &Backend) -> PiEstimate {
    let p_i = eval_p(i.get(), limit, backend);
    let p_im1 = eval_p(i.get() - 1, limit, backend);
    let value = &(&backend.from_int(2 * i64::from(i.get())) * &p_i.value) * &p_im1.value;
    PiEstimate {
        i,
        limit,
        backend: backend.spec(),
        value,
        p_i,
        p_im1,
    }
}
