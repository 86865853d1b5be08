//! Binary floating point with a runtime mantissa width.
//!
//! A value is `(-1)^neg * mant * 2^exp` where `mant` holds at most `prec`
//! bits and has no trailing zero bits, so structural equality is value
//! equality for two operands of the same precision. Every operation rounds
//! its exact result once, to nearest with ties to even.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    neg: bool,
    mant: BigUint,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat {
            neg: false,
            mant: BigUint::zero(),
            exp: 0,
            prec,
        }
    }

    pub fn from_i64(value: i64, prec: u32) -> Self {
        Self::round(value < 0, BigUint::from(value.unsigned_abs()), 0, false, prec)
    }

    pub fn from_bigint(value: &BigInt, prec: u32) -> Self {
        Self::round(value.is_negative(), value.magnitude().clone(), 0, false, prec)
    }

    /// Correctly rounded `numer / denom`.
    pub fn from_ratio(numer: &BigInt, denom: &BigInt, prec: u32) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let neg = numer.is_negative() != denom.is_negative();
        Ok(Self::divide_magnitudes(
            neg,
            numer.magnitude(),
            0,
            denom.magnitude(),
            0,
            prec,
        ))
    }

    pub fn from_rational(value: &BigRational, prec: u32) -> Self {
        // BigRational keeps a non-zero denominator.
        Self::from_ratio(value.numer(), value.denom(), prec).expect("non-zero denominator")
    }

    /// Exact conversion; binary64 has at most 53 significant bits.
    pub fn from_f64(value: f64, prec: u32) -> Option<Self> {
        let exact = BigRational::from_float(value)?;
        Some(Self::from_rational(&exact, prec))
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// Exponent of the most significant bit. Undefined (returns `None`) for zero.
    pub fn msb_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.mant.bits() as i64 - 1)
        }
    }

    /// Spacing of representable values at this magnitude.
    pub fn ulp(&self) -> Option<BigFloat> {
        let msb = self.msb_exponent()?;
        Some(BigFloat {
            neg: false,
            mant: BigUint::one(),
            exp: msb - i64::from(self.prec) + 1,
            prec: self.prec,
        })
    }

    pub fn to_rational(&self) -> BigRational {
        let mag = BigInt::from_biguint(Sign::Plus, self.mant.clone());
        let signed = if self.neg { -mag } else { mag };
        if self.exp >= 0 {
            BigRational::from_integer(signed << self.exp as usize)
        } else {
            BigRational::new(signed, BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        if !out.is_zero() {
            out.neg = !out.neg;
        }
        out
    }

    pub fn abs(&self) -> Self {
        let mut out = self.clone();
        out.neg = false;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_signed(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_signed(other, true)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if self.is_zero() || other.is_zero() {
            return Self::zero(prec);
        }
        Self::round(
            self.neg != other.neg,
            &self.mant * &other.mant,
            self.exp + other.exp,
            false,
            prec,
        )
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec.max(other.prec);
        if self.is_zero() {
            return Ok(Self::zero(prec));
        }
        Ok(Self::divide_magnitudes(
            self.neg != other.neg,
            &self.mant,
            self.exp,
            &other.mant,
            other.exp,
            prec,
        ))
    }

    /// Correctly rounded square root; `None` for negative input.
    pub fn sqrt(&self) -> Option<Self> {
        if self.neg {
            return None;
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        let mut mant = self.mant.clone();
        let mut exp = self.exp;
        if exp.rem_euclid(2) == 1 {
            mant <<= 1usize;
            exp -= 1;
        }
        let want = 2 * (u64::from(self.prec) + 3);
        let bits = mant.bits();
        let mut extra = want.saturating_sub(bits);
        extra += extra % 2;
        mant <<= extra as usize;
        exp -= extra as i64;
        let root = mant.sqrt();
        let sticky = &root * &root != mant;
        Some(Self::round(false, root, exp / 2, sticky, self.prec))
    }

    /// Nearest binary64 value, assuming the result is in the normal range.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        if self.is_zero() {
            return 0.0;
        }
        let r = Self::round(self.neg, self.mant.clone(), self.exp, false, 53);
        let mant = r.mant.to_f64().expect("53-bit mantissa");
        // Split the scaling so intermediate powers stay finite.
        let half = r.exp / 2;
        let value = mant * 2f64.powi(half as i32) * 2f64.powi((r.exp - half) as i32);
        if r.neg {
            -value
        } else {
            value
        }
    }

    fn add_signed(&self, other: &Self, negate_other: bool) -> Self {
        let prec = self.prec.max(other.prec);
        let other_neg = other.neg != negate_other;
        if other.is_zero() {
            return Self::round(self.neg, self.mant.clone(), self.exp, false, prec);
        }
        if self.is_zero() {
            return Self::round(other_neg, other.mant.clone(), other.exp, false, prec);
        }
        let msb_a = self.msb_exponent().unwrap_or(0);
        let msb_b = other.msb_exponent().unwrap_or(0);
        // An operand entirely below an eighth of the larger one's rounding
        // unit cannot change the correctly rounded result.
        let gap = i64::from(prec) + 4;
        if msb_b < msb_a - gap {
            return Self::round(self.neg, self.mant.clone(), self.exp, false, prec);
        }
        if msb_a < msb_b - gap {
            return Self::round(other_neg, other.mant.clone(), other.exp, false, prec);
        }
        let exp = self.exp.min(other.exp);
        let a = signed(self.neg, &self.mant << (self.exp - exp) as usize);
        let b = signed(other_neg, &other.mant << (other.exp - exp) as usize);
        let sum = a + b;
        Self::round(sum.is_negative(), sum.magnitude().clone(), exp, false, prec)
    }

    fn divide_magnitudes(
        neg: bool,
        numer: &BigUint,
        numer_exp: i64,
        denom: &BigUint,
        denom_exp: i64,
        prec: u32,
    ) -> Self {
        if numer.is_zero() {
            return Self::zero(prec);
        }
        // Produce at least prec + 3 quotient bits so the remainder only
        // ever acts as a sticky bit.
        let shift =
            (i64::from(prec) + 3 + denom.bits() as i64 - numer.bits() as i64).max(0) as usize;
        let scaled = numer << shift;
        let (quot, rem) = scaled.div_rem(denom);
        Self::round(
            neg,
            quot,
            numer_exp - denom_exp - shift as i64,
            !rem.is_zero(),
            prec,
        )
    }

    /// Round `(-1)^neg * (mag + s) * 2^exp` to `prec` bits, where `s` is an
    /// unknown fraction in (0, 1) when `sticky` is set. Callers that pass
    /// `sticky` supply at least `prec + 2` bits.
    fn round(neg: bool, mag: BigUint, exp: i64, sticky: bool, prec: u32) -> Self {
        if mag.is_zero() {
            return Self::zero(prec);
        }
        let bits = mag.bits();
        let prec_bits = u64::from(prec);
        let (mant, exp) = if bits > prec_bits {
            let shift = (bits - prec_bits) as usize;
            let kept = &mag >> shift;
            let rem = &mag - (&kept << shift);
            let half = BigUint::one() << (shift - 1);
            let up = match rem.cmp(&half) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => sticky || kept.bit(0),
            };
            let mant = if up { kept + 1u32 } else { kept };
            (mant, exp + shift as i64)
        } else {
            debug_assert!(!sticky, "sticky rounding needs guard bits");
            (mag, exp)
        };
        let tz = mant.trailing_zeros().unwrap_or(0);
        BigFloat {
            neg,
            mant: mant >> tz as usize,
            exp: exp + tz as i64,
            prec,
        }
    }
}

fn signed(neg: bool, mag: BigUint) -> BigInt {
    let value = BigInt::from_biguint(Sign::Plus, mag);
    if neg {
        -value
    } else {
        value
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if other.neg {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                return if self.neg {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            _ => {}
        }
        if self.neg != other.neg {
            return if self.neg {
                Ordering::Less
            } else {
                Ordering::Greater
            };
        }
        let magnitude = {
            let (ma, mb) = (self.msb_exponent(), other.msb_exponent());
            if ma != mb {
                ma.cmp(&mb)
            } else {
                let exp = self.exp.min(other.exp);
                let a = &self.mant << (self.exp - exp) as usize;
                let b = &other.mant << (other.exp - exp) as usize;
                a.cmp(&b)
            }
        };
        if self.neg {
            magnitude.reverse()
        } else {
            magnitude
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Reference rounding: exhaustively pick the nearest of the two
    /// neighbouring `prec`-bit values by exact rational comparison.
    fn nearest(value: &BigRational, prec: u32) -> BigRational {
        if value.is_zero() {
            return BigRational::zero();
        }
        let mut e: i64 = 0;
        let two = BigRational::from_integer(BigInt::from(2));
        let mut scaled = value.abs();
        let lo = BigRational::from_integer(BigInt::one() << (prec - 1) as usize);
        let hi = BigRational::from_integer(BigInt::one() << prec as usize);
        while scaled < lo {
            scaled = &scaled * &two;
            e -= 1;
        }
        while scaled >= hi {
            scaled = &scaled / &two;
            e += 1;
        }
        let floor = scaled.floor();
        let frac = &scaled - &floor;
        let half = ratio(1, 2);
        let m = if frac > half || (frac == half && floor.numer().is_odd()) {
            floor + BigRational::one()
        } else {
            floor
        };
        let pow = if e >= 0 {
            BigRational::from_integer(BigInt::one() << e as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
        };
        let out = m * pow;
        if value.is_negative() {
            -out
        } else {
            out
        }
    }

    #[test]
    fn one_third_rounds_to_nearest() {
        for prec in [64, 65, 100, 256] {
            let x = BigFloat::from_rational(&ratio(1, 3), prec);
            assert_eq!(x.to_rational(), nearest(&ratio(1, 3), prec));
        }
    }

    #[test]
    fn ties_go_to_even() {
        // 2^64 + 1 needs 65 bits; at 64 bits it is a tie between 2^64 and 2^64 + 2.
        let v = (BigInt::one() << 64usize) + 1;
        let x = BigFloat::from_bigint(&v, 64);
        assert_eq!(x.to_rational(), BigRational::from_integer(BigInt::one() << 64usize));
        let v = (BigInt::one() << 64usize) + 3;
        let x = BigFloat::from_bigint(&v, 64);
        assert_eq!(
            x.to_rational(),
            BigRational::from_integer((BigInt::one() << 64usize) + 4)
        );
    }

    #[test]
    fn tiny_addend_is_absorbed() {
        let one = BigFloat::from_i64(1, 64);
        let tiny = BigFloat::from_rational(&ratio(1, 3), 64)
            .mul(&BigFloat::from_rational(&ratio(1, 1 << 62), 64))
            .mul(&BigFloat::from_rational(&ratio(1, 1 << 40), 64));
        assert_eq!(one.add(&tiny), one);
        assert_eq!(one.sub(&tiny), one);
    }

    #[test]
    fn power_of_two_minus_half_ulp_below() {
        // 1 - 2^-65: the neighbour below 1 at 64 bits is 1 - 2^-64, so this is a tie
        // between 1 - 2^-64 (odd mantissa) and 1 (even); it rounds to 1.
        let one = BigFloat::from_i64(1, 64);
        let d = BigFloat::from_rational(&BigRational::new(BigInt::one(), BigInt::one() << 65usize), 64);
        assert_eq!(one.sub(&d), one);
        let d = BigFloat::from_rational(&BigRational::new(BigInt::from(3), BigInt::one() << 66usize), 64);
        let expect = nearest(&(BigRational::one() - ratio(3, 1) / BigRational::from_integer(BigInt::one() << 66usize)), 64);
        assert_eq!(one.sub(&d).to_rational(), expect);
    }

    #[test]
    fn sqrt_two() {
        let two = BigFloat::from_i64(2, 128);
        let r = two.sqrt().unwrap();
        let sq = r.to_rational() * r.to_rational();
        let err = (sq - BigRational::from_integer(BigInt::from(2))).abs();
        assert!(err < BigRational::new(BigInt::one(), BigInt::one() << 126usize));
        assert!(BigFloat::from_i64(-1, 64).sqrt().is_none());
        assert_eq!(BigFloat::from_i64(9, 64).sqrt().unwrap(), BigFloat::from_i64(3, 64));
    }

    #[test]
    fn ordering() {
        let a = BigFloat::from_rational(&ratio(-1, 3), 64);
        let b = BigFloat::from_rational(&ratio(1, 7), 64);
        let z = BigFloat::zero(64);
        assert!(a < z && z < b && a < b);
        assert!(b.neg() < a.neg().neg().abs());
    }

    #[test]
    fn division_by_zero() {
        let one = BigFloat::from_i64(1, 64);
        assert_eq!(one.div(&BigFloat::zero(64)), Err(Error::DivisionByZero));
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn operations_round_correctly(
            a in -10_000i64..10_000, b in 1i64..10_000,
            c in -10_000i64..10_000, d in 1i64..10_000,
            prec in 64u32..200,
        ) {
            let x = BigFloat::from_rational(&ratio(a, b), prec);
            let y = BigFloat::from_rational(&ratio(c, d), prec);
            let (xr, yr) = (x.to_rational(), y.to_rational());
            prop_assert_eq!(x.add(&y).to_rational(), nearest(&(&xr + &yr), prec));
            prop_assert_eq!(x.sub(&y).to_rational(), nearest(&(&xr - &yr), prec));
            prop_assert_eq!(x.mul(&y).to_rational(), nearest(&(&xr * &yr), prec));
            if !y.is_zero() {
                prop_assert_eq!(x.div(&y).unwrap().to_rational(), nearest(&(&xr / &yr), prec));
            }
        }
    }
}
