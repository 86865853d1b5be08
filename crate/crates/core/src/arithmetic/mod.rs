//! Numeric values over four interchangeable backends.
//!
//! Every series routine in the crate is written once against [`Numeric`]
//! and [`Backend`]; the backend decides whether a value is an exact
//! rational, a binary64 double, or a binary float of configurable width.
//! The two binary64 backends share a representation and differ only in
//! how an [`Accumulator`] adds terms.

mod bigfloat;
mod decimal;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use bigfloat::BigFloat;
pub use decimal::{format_scientific, format_significant, render_rational, round_scaled};

use crate::error::{Error, Result};

/// Smallest accepted width for the arbitrary-precision backend.
pub const MIN_PRECISION_BITS: u32 = 64;
/// Largest accepted width; comfortably above what 10 000 reference digits need.
pub const MAX_PRECISION_BITS: u32 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    ExactRational,
    Binary64Plain,
    Binary64Compensated,
    ArbitraryPrecision,
}

/// Arithmetic selection. The bit width lives inside the arbitrary-precision
/// variant, so it is present exactly when that kind is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendSpec {
    ExactRational,
    Binary64Plain,
    Binary64Compensated,
    ArbitraryPrecision { bits: u32 },
}

impl BackendSpec {
    pub fn from_parts(kind: BackendKind, precision_bits: Option<u32>) -> Result<Self> {
        let spec = match (kind, precision_bits) {
            (BackendKind::ArbitraryPrecision, Some(bits)) => BackendSpec::ArbitraryPrecision { bits },
            (BackendKind::ArbitraryPrecision, None) => return Err(Error::MissingPrecision),
            (_, Some(_)) => return Err(Error::UnexpectedPrecision),
            (BackendKind::ExactRational, None) => BackendSpec::ExactRational,
            (BackendKind::Binary64Plain, None) => BackendSpec::Binary64Plain,
            (BackendKind::Binary64Compensated, None) => BackendSpec::Binary64Compensated,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            BackendSpec::ExactRational => BackendKind::ExactRational,
            BackendSpec::Binary64Plain => BackendKind::Binary64Plain,
            BackendSpec::Binary64Compensated => BackendKind::Binary64Compensated,
            BackendSpec::ArbitraryPrecision { .. } => BackendKind::ArbitraryPrecision,
        }
    }

    pub fn precision_bits(&self) -> Option<u32> {
        match self {
            BackendSpec::ArbitraryPrecision { bits } => Some(*bits),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BackendSpec::ArbitraryPrecision { bits } if bits < MIN_PRECISION_BITS => {
                Err(Error::PrecisionTooLow(bits))
            }
            BackendSpec::ArbitraryPrecision { bits } if bits > MAX_PRECISION_BITS => {
                Err(Error::PrecisionTooHigh(bits))
            }
            _ => Ok(()),
        }
    }

    /// Decimal digits a value of this backend can carry, `None` when unbounded.
    pub fn meaningful_digits(&self) -> Option<u32> {
        match self {
            BackendSpec::ExactRational => None,
            BackendSpec::Binary64Plain | BackendSpec::Binary64Compensated => Some(17),
            BackendSpec::ArbitraryPrecision { bits } => {
                Some((f64::from(*bits) * std::f64::consts::LOG10_2).ceil() as u32 + 1)
            }
        }
    }

    /// Short tag used on the command line and in scan output.
    pub fn tag(&self) -> String {
        match self {
            BackendSpec::ExactRational => "rational".to_string(),
            BackendSpec::Binary64Plain => "f64".to_string(),
            BackendSpec::Binary64Compensated => "f64c".to_string(),
            BackendSpec::ArbitraryPrecision { bits } => format!("ap{bits}"),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = match s.trim() {
            "rational" => BackendSpec::ExactRational,
            "f64" => BackendSpec::Binary64Plain,
            "f64c" => BackendSpec::Binary64Compensated,
            "ap" => return Err(Error::MissingPrecision),
            other => match other.strip_prefix("ap").map(str::parse::<u32>) {
                Some(Ok(bits)) => BackendSpec::ArbitraryPrecision { bits },
                _ => return Err(Error::UnknownBackend(other.to_string())),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A validated backend through which values are created.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Backend {
    spec: BackendSpec,
}

/// Validate `spec` and return a handle for it.
pub fn make_backend(spec: BackendSpec) -> Result<Backend> {
    spec.validate()?;
    Ok(Backend { spec })
}

impl Backend {
    pub fn spec(&self) -> BackendSpec {
        self.spec
    }

    fn wrap(&self, repr: Repr) -> Numeric {
        Numeric {
            backend: self.spec,
            repr,
        }
    }

    pub fn zero(&self) -> Numeric {
        self.from_int(0)
    }

    pub fn one(&self) -> Numeric {
        self.from_int(1)
    }

    pub fn from_int(&self, value: i64) -> Numeric {
        self.wrap(match self.spec {
            BackendSpec::ExactRational => Repr::Rational(BigRational::from_integer(value.into())),
            BackendSpec::Binary64Plain | BackendSpec::Binary64Compensated => {
                Repr::Binary64(value as f64)
            }
            BackendSpec::ArbitraryPrecision { bits } => Repr::Float(BigFloat::from_i64(value, bits)),
        })
    }

    /// `numer / denom`, exact or correctly rounded depending on the backend.
    pub fn from_ratio(&self, numer: i64, denom: i64) -> Result<Numeric> {
        if denom == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.wrap(match self.spec {
            BackendSpec::ExactRational => {
                Repr::Rational(BigRational::new(numer.into(), denom.into()))
            }
            BackendSpec::Binary64Plain | BackendSpec::Binary64Compensated => {
                // Both operands are exact in binary64 below 2^53; the
                // quotient is then correctly rounded.
                if numer.unsigned_abs() < (1 << 53) && denom.unsigned_abs() < (1 << 53) {
                    Repr::Binary64(numer as f64 / denom as f64)
                } else {
                    Repr::Binary64(ratio_to_f64(&BigRational::new(numer.into(), denom.into())))
                }
            }
            BackendSpec::ArbitraryPrecision { bits } => Repr::Float(BigFloat::from_ratio(
                &BigInt::from(numer),
                &BigInt::from(denom),
                bits,
            )?),
        }))
    }

    /// Round an exact rational into this backend.
    pub fn from_rational(&self, value: &BigRational) -> Numeric {
        self.wrap(match self.spec {
            BackendSpec::ExactRational => Repr::Rational(value.clone()),
            BackendSpec::Binary64Plain | BackendSpec::Binary64Compensated => {
                Repr::Binary64(ratio_to_f64(value))
            }
            BackendSpec::ArbitraryPrecision { bits } => {
                Repr::Float(BigFloat::from_rational(value, bits))
            }
        })
    }

    pub fn accumulator(&self) -> Accumulator {
        Accumulator::new(*self)
    }
}

/// Correctly rounded rational to binary64 (normal range).
fn ratio_to_f64(value: &BigRational) -> f64 {
    BigFloat::from_rational(value, 53).to_f64()
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Rational(BigRational),
    Binary64(f64),
    Float(BigFloat),
}

/// A value tagged with the backend that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Numeric {
    backend: BackendSpec,
    repr: Repr,
}

macro_rules! binary_op {
    ($checked:ident, $op:ident, $trait:ident, $method:ident) => {
        impl Numeric {
            pub fn $checked(&self, rhs: &Numeric) -> Result<Numeric> {
                self.same_backend(rhs)?;
                self.$op(rhs)
            }
        }

        impl std::ops::$trait<&Numeric> for &Numeric {
            type Output = Numeric;

            /// Panics on mixed backends or division by zero; use the
            /// checked form to get an error instead.
            fn $method(self, rhs: &Numeric) -> Numeric {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }

        impl std::ops::$trait<Numeric> for Numeric {
            type Output = Numeric;

            fn $method(self, rhs: Numeric) -> Numeric {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
    };
}

binary_op!(checked_add, raw_add, Add, add);
binary_op!(checked_sub, raw_sub, Sub, sub);
binary_op!(checked_mul, raw_mul, Mul, mul);
binary_op!(checked_div, raw_div, Div, div);

impl Numeric {
    pub fn backend(&self) -> BackendSpec {
        self.backend
    }

    fn same_backend(&self, other: &Numeric) -> Result<()> {
        if self.backend == other.backend {
            Ok(())
        } else {
            Err(Error::BackendMismatch {
                left: self.backend,
                right: other.backend,
            })
        }
    }

    fn with(&self, repr: Repr) -> Numeric {
        Numeric {
            backend: self.backend,
            repr,
        }
    }

    fn raw_add(&self, rhs: &Numeric) -> Result<Numeric> {
        Ok(self.with(match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a + b),
            (Repr::Binary64(a), Repr::Binary64(b)) => Repr::Binary64(a + b),
            (Repr::Float(a), Repr::Float(b)) => Repr::Float(a.add(b)),
            _ => unreachable!("backend checked"),
        }))
    }

    fn raw_sub(&self, rhs: &Numeric) -> Result<Numeric> {
        Ok(self.with(match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a - b),
            (Repr::Binary64(a), Repr::Binary64(b)) => Repr::Binary64(a - b),
            (Repr::Float(a), Repr::Float(b)) => Repr::Float(a.sub(b)),
            _ => unreachable!("backend checked"),
        }))
    }

    fn raw_mul(&self, rhs: &Numeric) -> Result<Numeric> {
        Ok(self.with(match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a * b),
            (Repr::Binary64(a), Repr::Binary64(b)) => Repr::Binary64(a * b),
            (Repr::Float(a), Repr::Float(b)) => Repr::Float(a.mul(b)),
            _ => unreachable!("backend checked"),
        }))
    }

    fn raw_div(&self, rhs: &Numeric) -> Result<Numeric> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.with(match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a / b),
            (Repr::Binary64(a), Repr::Binary64(b)) => Repr::Binary64(a / b),
            (Repr::Float(a), Repr::Float(b)) => Repr::Float(a.div(b)?),
            _ => unreachable!("backend checked"),
        }))
    }

    pub fn neg(&self) -> Numeric {
        self.with(match &self.repr {
            Repr::Rational(a) => Repr::Rational(-a),
            Repr::Binary64(a) => Repr::Binary64(-a),
            Repr::Float(a) => Repr::Float(a.neg()),
        })
    }

    pub fn abs(&self) -> Numeric {
        self.with(match &self.repr {
            Repr::Rational(a) => Repr::Rational(a.abs()),
            Repr::Binary64(a) => Repr::Binary64(a.abs()),
            Repr::Float(a) => Repr::Float(a.abs()),
        })
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rational(a) => a.is_zero(),
            Repr::Binary64(a) => *a == 0.0,
            Repr::Float(a) => a.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.repr {
            Repr::Rational(a) => a.is_negative(),
            Repr::Binary64(a) => *a < 0.0,
            Repr::Float(a) => a.is_negative(),
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, exponent: u32) -> Numeric {
        let mut result = self.with(match &self.repr {
            Repr::Rational(_) => Repr::Rational(BigRational::one()),
            Repr::Binary64(_) => Repr::Binary64(1.0),
            Repr::Float(a) => Repr::Float(BigFloat::from_i64(1, a.precision())),
        });
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Square root; exact rationals only succeed on perfect squares.
    pub fn sqrt(&self) -> Result<Numeric> {
        if self.is_negative() {
            return Err(Error::Domain("square root of a negative value".into()));
        }
        Ok(self.with(match &self.repr {
            Repr::Rational(a) => {
                let (n, d) = (a.numer().sqrt(), a.denom().sqrt());
                if &(&n * &n) != a.numer() || &(&d * &d) != a.denom() {
                    return Err(Error::NotRepresentable("square root"));
                }
                Repr::Rational(BigRational::new(n, d))
            }
            Repr::Binary64(a) => Repr::Binary64(a.sqrt()),
            Repr::Float(a) => Repr::Float(a.sqrt().expect("non-negative")),
        }))
    }

    /// Exact value of this number. Finite binary64 values are dyadic rationals.
    pub fn to_rational(&self) -> BigRational {
        match &self.repr {
            Repr::Rational(a) => a.clone(),
            Repr::Binary64(a) => BigRational::from_float(*a).expect("finite binary64 value"),
            Repr::Float(a) => a.to_rational(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.repr {
            Repr::Rational(a) => ratio_to_f64(a),
            Repr::Binary64(a) => *a,
            Repr::Float(a) => a.to_f64(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rational(a) => Some(a),
            _ => None,
        }
    }

    /// Unit in the last place at this magnitude; `None` for zero and for
    /// exact rationals.
    pub fn ulp(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Rational(_) => None,
            Repr::Binary64(a) => {
                if *a == 0.0 || !a.is_finite() {
                    return None;
                }
                let bits = a.abs().to_bits();
                let next = f64::from_bits(bits + 1);
                BigRational::from_float(next - a.abs())
            }
            Repr::Float(a) => a.ulp().map(|u| u.to_rational()),
        }
    }

    /// Round-to-nearest, ties away from zero, with exactly `digits` digits
    /// after the decimal point.
    pub fn to_decimal_string(&self, digits: u32) -> Result<String> {
        if digits == 0 {
            return Err(Error::Domain("digits must be at least 1".into()));
        }
        Ok(render_rational(&self.to_rational(), digits))
    }

    pub fn checked_cmp(&self, other: &Numeric) -> Result<Ordering> {
        self.same_backend(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => a.cmp(b),
            (Repr::Binary64(a), Repr::Binary64(b)) => a.total_cmp(b),
            (Repr::Float(a), Repr::Float(b)) => a.cmp(b),
            _ => unreachable!("backend checked"),
        })
    }
}

impl PartialOrd for Numeric {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.checked_cmp(other).ok()
    }
}

/// Running sum in fixed term order.
///
/// The compensated backend uses Neumaier's variant of Kahan summation,
/// which also handles terms larger in magnitude than the running sum.
#[derive(Clone, Debug)]
pub struct Accumulator {
    backend: Backend,
    sum: Numeric,
    compensation: f64,
    terms: u64,
}

impl Accumulator {
    pub fn new(backend: Backend) -> Self {
        Accumulator {
            backend,
            sum: backend.zero(),
            compensation: 0.0,
            terms: 0,
        }
    }

    /// Start from `initial` instead of zero.
    pub fn starting_at(initial: Numeric) -> Result<Self> {
        let backend = make_backend(initial.backend())?;
        Ok(Accumulator {
            backend,
            sum: initial,
            compensation: 0.0,
            terms: 0,
        })
    }

    pub fn backend(&self) -> BackendSpec {
        self.backend.spec()
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn add(&mut self, term: &Numeric) -> Result<()> {
        self.sum.same_backend(term)?;
        match (&mut self.sum.repr, &term.repr) {
            (Repr::Binary64(sum), Repr::Binary64(v))
                if self.backend.spec() == BackendSpec::Binary64Compensated =>
            {
                let t = *sum + v;
                if sum.abs() >= v.abs() {
                    self.compensation += (*sum - t) + v;
                } else {
                    self.compensation += (v - t) + *sum;
                }
                *sum = t;
            }
            _ => self.sum = self.sum.raw_add(term)?,
        }
        self.terms += 1;
        Ok(())
    }

    /// Functional form of [`Accumulator::add`].
    pub fn accumulate(mut self, term: &Numeric) -> Result<Self> {
        self.add(term)?;
        Ok(self)
    }

    pub fn total(&self) -> Numeric {
        match &self.sum.repr {
            Repr::Binary64(sum) if self.backend.spec() == BackendSpec::Binary64Compensated => {
                self.sum.with(Repr::Binary64(sum + self.compensation))
            }
            _ => self.sum.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ap(bits: u32) -> Backend {
        make_backend(BackendSpec::ArbitraryPrecision { bits }).unwrap()
    }

    #[test]
    fn backend_validation() {
        assert!(make_backend(BackendSpec::ExactRational).is_ok());
        assert!(make_backend(BackendSpec::ArbitraryPrecision { bits: 256 }).is_ok());
        assert_eq!(
            make_backend(BackendSpec::ArbitraryPrecision { bits: 32 }),
            Err(Error::PrecisionTooLow(32))
        );
        assert_eq!(
            BackendSpec::from_parts(BackendKind::ArbitraryPrecision, None),
            Err(Error::MissingPrecision)
        );
        assert_eq!(
            BackendSpec::from_parts(BackendKind::Binary64Plain, Some(64)),
            Err(Error::UnexpectedPrecision)
        );
        assert_eq!(
            BackendSpec::from_parts(BackendKind::ArbitraryPrecision, Some(128)),
            Ok(BackendSpec::ArbitraryPrecision { bits: 128 })
        );
    }

    #[test]
    fn tags_round_trip() {
        for tag in ["rational", "f64", "f64c", "ap64", "ap256"] {
            let spec: BackendSpec = tag.parse().unwrap();
            assert_eq!(spec.tag(), tag);
        }
        assert!("ap32".parse::<BackendSpec>().is_err());
        assert!("ap".parse::<BackendSpec>().is_err());
        assert!("f32".parse::<BackendSpec>().is_err());
    }

    #[test]
    fn rational_third_times_three_is_one() {
        let q = make_backend(BackendSpec::ExactRational).unwrap();
        let third = q.from_ratio(1, 3).unwrap();
        assert_eq!(&third * &q.from_int(3), q.one());
    }

    #[test]
    fn ap256_third_relative_error() {
        let b = ap(256);
        let third = b.from_ratio(1, 3).unwrap().to_rational();
        let exact = BigRational::new(1.into(), 3.into());
        let rel = ((third - &exact) / exact).abs();
        assert!(rel <= BigRational::new(1.into(), BigInt::one() << 255usize));
    }

    #[test]
    fn mixing_backends_is_an_error() {
        let a = make_backend(BackendSpec::Binary64Plain).unwrap().one();
        let b = make_backend(BackendSpec::Binary64Compensated).unwrap().one();
        assert!(matches!(a.checked_add(&b), Err(Error::BackendMismatch { .. })));
        let mut acc = ap(128).accumulator();
        assert!(acc.add(&a).is_err());
    }

    #[test]
    #[should_panic(expected = "backend mismatch")]
    fn operator_panics_on_mixed_backends() {
        let a = make_backend(BackendSpec::ExactRational).unwrap().one();
        let _ = &a + &ap(64).one();
    }

    #[test]
    fn plain_sum_drifts_compensated_does_not() {
        let exact = 0.3f64;
        let ulp = exact.ulp_value();
        for (spec, within) in [
            (BackendSpec::Binary64Plain, false),
            (BackendSpec::Binary64Compensated, true),
        ] {
            let b = make_backend(spec).unwrap();
            let term = b.from_ratio(1, 10_000_000).unwrap();
            let mut acc = b.accumulator();
            for _ in 0..3_000_000 {
                acc.add(&term).unwrap();
            }
            let drift = (acc.total().to_f64() - exact).abs();
            assert_eq!(drift <= ulp, within, "{spec}: drift {drift:e}");
        }
    }

    trait UlpValue {
        fn ulp_value(self) -> f64;
    }

    impl UlpValue for f64 {
        fn ulp_value(self) -> f64 {
            f64::from_bits(self.to_bits() + 1) - self
        }
    }

    #[test]
    fn rational_harmonic_100() {
        let b = make_backend(BackendSpec::ExactRational).unwrap();
        let mut acc = b.accumulator();
        for k in 1..=100 {
            acc.add(&b.from_ratio(1, k).unwrap()).unwrap();
        }
        // Independent fold over unreduced numerator/denominator pairs.
        let (mut num, mut den) = (BigInt::zero(), BigInt::one());
        for k in 1..=100i64 {
            num = num * k + &den;
            den *= k;
        }
        let oracle = BigRational::new(num, den);
        assert_eq!(acc.total().as_rational(), Some(&oracle));
        assert_eq!(
            oracle.numer().to_string(),
            "14466636279520351160221518043104131447711"
        );
        assert_eq!(
            oracle.denom().to_string(),
            "2788815009188499086581352357412492142272"
        );
    }

    #[test]
    fn decimal_rendering() {
        let q = make_backend(BackendSpec::ExactRational).unwrap();
        assert_eq!(q.from_ratio(1, 3).unwrap().to_decimal_string(5).unwrap(), "0.33333");
        assert_eq!(q.from_ratio(2, 3).unwrap().to_decimal_string(5).unwrap(), "0.66667");
        let f = make_backend(BackendSpec::Binary64Plain).unwrap();
        let pi = f.from_rational(&BigRational::from_float(std::f64::consts::PI).unwrap());
        assert_eq!(pi.to_decimal_string(15).unwrap(), "3.141592653589793");
        assert!(pi.to_decimal_string(0).is_err());
    }

    #[test]
    fn powi_and_sqrt() {
        let q = make_backend(BackendSpec::ExactRational).unwrap();
        let x = q.from_ratio(3, 2).unwrap();
        assert_eq!(x.powi(3), q.from_ratio(27, 8).unwrap());
        assert_eq!(x.powi(0), q.one());
        assert_eq!(q.from_ratio(9, 4).unwrap().sqrt().unwrap(), x);
        assert!(q.from_int(2).sqrt().is_err());
        assert!(q.from_int(-4).sqrt().is_err());
    }

    #[test]
    fn ratio_to_f64_is_correctly_rounded() {
        let v = BigRational::new(1.into(), 10.into());
        assert_eq!(ratio_to_f64(&v), 0.1);
        let v = BigRational::new(22.into(), 7.into());
        assert_eq!(ratio_to_f64(&v), 22.0 / 7.0);
    }

    proptest! {
        #[test]
        fn rational_fold_is_order_independent(
            terms in proptest::collection::vec((-50i64..50, 1i64..50), 1..40),
            seed in any::<u64>(),
        ) {
            let q = make_backend(BackendSpec::ExactRational).unwrap();
            let values: Vec<Numeric> = terms.iter().map(|&(n, d)| q.from_ratio(n, d).unwrap()).collect();
            let mut forward = q.accumulator();
            for v in &values { forward.add(v).unwrap(); }
            // Deterministic shuffle driven by the seed.
            let mut order: Vec<usize> = (0..values.len()).collect();
            let mut state = seed | 1;
            for i in (1..order.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                order.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let mut shuffled = q.accumulator();
            for &i in &order { shuffled.add(&values[i]).unwrap(); }
            prop_assert_eq!(forward.total(), shuffled.total());
            // (a + b) - b == a
            let (a, b) = (&values[0], &forward.total());
            prop_assert_eq!(&(a + b) - b, a.clone());
        }

        #[test]
        fn ap_matches_rounded_rational(
            a in 1i64..100_000, b in 1i64..100_000, c in 1i64..100_000, d in 1i64..100_000,
            bits in 64u32..300,
        ) {
            let q = make_backend(BackendSpec::ExactRational).unwrap();
            let f = ap(bits);
            let expr = |be: &Backend| {
                let x = be.from_ratio(a, b).unwrap();
                let y = be.from_ratio(c, d).unwrap();
                &(&(&x + &y) * &be.from_ratio(a, d).unwrap()) / &be.from_ratio(c + 1, b).unwrap()
            };
            let exact = expr(&q);
            let rounded = f.from_rational(exact.as_rational().unwrap());
            let approx = expr(&f);
            let ulp = rounded.ulp().unwrap();
            let diff = (approx.to_rational() - rounded.to_rational()).abs();
            prop_assert!(diff <= ulp * BigRational::from_integer(4.into()));
        }

        #[test]
        fn evaluation_is_deterministic(terms in proptest::collection::vec(-1.0e3f64..1.0e3, 0..200)) {
            for spec in [BackendSpec::Binary64Plain, BackendSpec::Binary64Compensated, BackendSpec::ArbitraryPrecision { bits: 96 }] {
                let b = make_backend(spec).unwrap();
                let run = || {
                    let mut acc = b.accumulator();
                    for t in &terms {
                        acc.add(&b.from_rational(&BigRational::from_float(*t).unwrap())).unwrap();
                    }
                    acc.total()
                };
                prop_assert_eq!(run(), run());
            }
        }
    }
}
