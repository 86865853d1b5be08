//! Reference values that do not depend on the slice series: pi from two
//! arctangent identities, and double-factorial closed forms.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::arithmetic::{render_rational, round_scaled, BigFloat, Numeric};
use crate::error::{Error, Result};

pub const MAX_REFERENCE_DIGITS: u32 = 10_000;

/// Pi rendered to `digits` decimals, together with the binary value it
/// was rounded from.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceDigits {
    pub digits: u32,
    /// `"3."` followed by `digits` digits, rounded to nearest.
    pub decimal: String,
    pub precision_bits: u32,
    /// Exact value of the computed binary approximation.
    pub value: BigRational,
}

impl ReferenceDigits {
    /// First `k` decimals of the underlying value without rounding.
    pub fn truncated(&self, k: u32) -> String {
        let scale = BigRational::from_integer(BigInt::from(10u32).pow(k));
        let floor = (&self.value * scale).floor().to_integer();
        let mut text = floor.to_string();
        text.insert(1, '.');
        text
    }
}

/// Working precision for `digits` decimals: the decimal content plus guard bits.
pub fn precision_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 64
}

/// `arctan(1/x)` by its alternating Taylor series, stopping once the next
/// term drops below `2^-(bits + 8)`.
fn arctan_inverse(x: i64, bits: u32) -> BigFloat {
    let x_big = BigFloat::from_i64(x, bits);
    let x_sq = BigFloat::from_i64(x * x, bits);
    let stop = -i64::from(bits) - 8;
    let mut power = BigFloat::from_i64(1, bits).div(&x_big).expect("x != 0");
    let mut sum = BigFloat::zero(bits);
    let mut k: i64 = 0;
    loop {
        let term = power
            .div(&BigFloat::from_i64(2 * k + 1, bits))
            .expect("odd divisor");
        if term.msb_exponent().is_none_or(|e| e < stop) {
            break;
        }
        sum = if k % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        power = power.div(&x_sq).expect("x != 0");
        k += 1;
    }
    sum
}

/// `16 arctan(1/5) - 4 arctan(1/239)`.
fn machin(bits: u32) -> BigFloat {
    let a = arctan_inverse(5, bits).mul(&BigFloat::from_i64(16, bits));
    let b = arctan_inverse(239, bits).mul(&BigFloat::from_i64(4, bits));
    a.sub(&b)
}

/// `4 arctan(1/2) + 4 arctan(1/3)`.
fn euler_pair(bits: u32) -> BigFloat {
    let four = BigFloat::from_i64(4, bits);
    arctan_inverse(2, bits)
        .add(&arctan_inverse(3, bits))
        .mul(&four)
}

/// Pi to `digits` decimals from Machin's formula, cross-checked against a
/// second arctangent identity at the same precision.
pub fn machin_pi(digits: u32) -> Result<ReferenceDigits> {
    if digits == 0 || digits > MAX_REFERENCE_DIGITS {
        return Err(Error::Domain(format!(
            "reference digits must be in 1..={MAX_REFERENCE_DIGITS}, got {digits}"
        )));
    }
    let bits = precision_for_digits(digits);
    let first = machin(bits).to_rational();
    let second = euler_pair(bits).to_rational();
    let decimal = render_rational(&first, digits);
    let check = render_rational(&second, digits);
    if decimal != check {
        return Err(Error::CrossValidation {
            digits,
            first: decimal,
            second: check,
        });
    }
    Ok(ReferenceDigits {
        digits,
        decimal,
        precision_bits: bits,
        value: first,
    })
}

fn cache() -> &'static RwLock<HashMap<u32, Arc<ReferenceDigits>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<ReferenceDigits>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`machin_pi`].
pub fn reference_pi(digits: u32) -> Result<Arc<ReferenceDigits>> {
    if let Some(hit) = cache().read().expect("cache lock").get(&digits) {
        return Ok(Arc::clone(hit));
    }
    let computed = Arc::new(machin_pi(digits)?);
    let mut guard = cache().write().expect("cache lock");
    Ok(Arc::clone(guard.entry(digits).or_insert(computed)))
}

/// Number of leading decimals on which `candidate` and the reference
/// agree: the largest `k` such that both, rounded to `j` decimals, are
/// equal for every `j <= k`. A wrong integer part gives 0.
pub fn correct_digits(candidate: &Numeric, reference: &ReferenceDigits) -> u32 {
    correct_digits_rational(&candidate.to_rational(), reference)
}

pub fn correct_digits_rational(candidate: &BigRational, reference: &ReferenceDigits) -> u32 {
    if candidate.floor() != reference.value.floor() {
        return 0;
    }
    let mut matched = 0;
    for j in 1..=reference.digits {
        if round_scaled(candidate, j) != round_scaled(&reference.value, j) {
            break;
        }
        matched = j;
    }
    matched
}

fn double_factorial(k: u32) -> BigInt {
    let mut acc = BigInt::one();
    let mut m = k;
    while m > 1 {
        acc *= m;
        m -= 2;
    }
    acc
}

/// `(i-1)!! / i!!` for odd `i`, by integer products.
pub fn double_factorial_ratio(i: u32) -> Result<BigRational> {
    if i.is_multiple_of(2) {
        return Err(Error::Domain(format!("double factorial ratio needs odd i, got {i}")));
    }
    Ok(BigRational::new(double_factorial(i - 1), double_factorial(i)))
}

/// Closed form of the even-subscript series: `pi/2 · (s-1)!!/s!!`, which
/// is `∫_0^1 (1-x^2)^((s-1)/2) dx` for even `s`.
pub fn even_slice_integral(sub: u32, pi: &BigRational) -> Result<BigRational> {
    if sub % 2 == 1 {
        return Err(Error::Domain(format!("expected an even subscript, got {sub}")));
    }
    let ratio = if sub == 0 {
        BigRational::one()
    } else {
        BigRational::new(double_factorial(sub - 1), double_factorial(sub))
    };
    Ok(pi * ratio / BigRational::from_integer(2.into()))
}
