//! Decimal rendering of exact rationals. Rounding is to nearest with ties
//! away from zero throughout.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

fn pow10(n: u32) -> BigInt {
    BigInt::from(10u32).pow(n)
}

/// `value * 10^digits` rounded to the nearest integer, ties away from zero.
pub fn round_scaled(value: &BigRational, digits: u32) -> BigInt {
    let scaled = value * BigRational::from_integer(pow10(digits));
    let (num, den) = (scaled.numer().abs(), scaled.denom().clone());
    let twice: BigInt = num * 2u32 + &den;
    let mag = twice.div_floor(&(den * 2u32));
    if scaled.is_negative() {
        -mag
    } else {
        mag
    }
}

fn place_point(magnitude: &BigInt, digits: u32, negative: bool) -> String {
    let mut text = magnitude.to_string();
    let digits = digits as usize;
    if digits > 0 {
        if text.len() <= digits {
            text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
        }
        text.insert(text.len() - digits, '.');
    }
    if negative && !magnitude.is_zero() {
        text.insert(0, '-');
    }
    text
}

/// Fixed-point rendering with exactly `digits` digits after the point
/// (no point at all when `digits` is zero).
pub fn render_rational(value: &BigRational, digits: u32) -> String {
    let rounded = round_scaled(value, digits);
    place_point(&rounded.abs(), digits, rounded.is_negative())
}

/// Largest `e` with `10^e <= |value|`. `value` must be non-zero.
fn floor_log10(value: &BigRational) -> i64 {
    let mag = value.abs();
    let mut e = mag.numer().to_string().len() as i64 - mag.denom().to_string().len() as i64;
    let scaled = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(pow10(e as u32))
        } else {
            BigRational::new(BigInt::one(), pow10((-e) as u32))
        }
    };
    while scaled(e) > mag {
        e -= 1;
    }
    while scaled(e + 1) <= mag {
        e += 1;
    }
    e
}

fn shift10(value: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        value / BigRational::from_integer(pow10(e as u32))
    } else {
        value * BigRational::from_integer(pow10((-e) as u32))
    }
}

/// Scientific notation with `significant` digits, shaped like Rust's `{:e}`
/// output: `1.22e-16`, `3.00e0`.
pub fn format_scientific(value: &BigRational, significant: u32) -> String {
    let significant = significant.max(1);
    if value.is_zero() {
        return format!("{}e0", place_point(&BigInt::zero(), significant - 1, false));
    }
    let mut e = floor_log10(value);
    let mut mantissa = round_scaled(&shift10(&value.abs(), e), significant - 1);
    if mantissa == pow10(significant) {
        e += 1;
        mantissa = pow10(significant - 1);
    }
    format!(
        "{}e{}",
        place_point(&mantissa, significant - 1, value.is_negative()),
        e
    )
}

/// Positional rendering keeping `significant` significant digits.
pub fn format_significant(value: &BigRational, significant: u32) -> String {
    if value.is_zero() {
        return render_rational(value, significant.saturating_sub(1));
    }
    let e = floor_log10(value);
    let decimals = (i64::from(significant) - 1 - e).max(0) as u32;
    render_rational(value, decimals)
}
