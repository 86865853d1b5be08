//! Ball volumes `V_i(R) = k_i R^i` and the identities tying `k_i` to the
//! slice series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::arithmetic::{Backend, BackendSpec, Numeric};
use crate::error::{Error, Result};
use crate::oracle::reference_pi;
use crate::series::{eval_p, TruncationLimit};

/// `k_i` together with the pi value it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct HypersphereCoefficient {
    pub i: u32,
    pub value: Numeric,
    pub pi_source: Numeric,
}

impl HypersphereCoefficient {
    pub fn new(i: u32, pi_value: &Numeric) -> Result<Self> {
        Ok(HypersphereCoefficient {
            i,
            value: k_recursive(i, pi_value)?,
            pi_source: pi_value.clone(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    MidpointComposite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    points: u32,
    rule: QuadratureRule,
}

impl QuadratureSpec {
    pub const MIN_POINTS: u32 = 16;

    pub fn midpoint(points: u32) -> Result<Self> {
        if points < Self::MIN_POINTS {
            return Err(Error::Domain(format!(
                "quadrature needs at least {} panels, got {points}",
                Self::MIN_POINTS
            )));
        }
        Ok(QuadratureSpec {
            points,
            rule: QuadratureRule::MidpointComposite,
        })
    }

    pub fn points(&self) -> u32 {
        self.points
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }
}

fn backend_of(value: &Numeric) -> Backend {
    crate::arithmetic::make_backend(value.backend()).expect("value carries a valid backend")
}

/// Carry 64 guard bits through a chain of roundings and round once at the
/// end, so the result stays within an ulp or so of the exact value.
fn with_guard_bits(pi_value: &Numeric, f: impl FnOnce(&Backend, &Numeric) -> Numeric) -> Numeric {
    let target = backend_of(pi_value);
    let wide = match target.spec() {
        BackendSpec::ExactRational => return f(&target, pi_value),
        BackendSpec::Binary64Plain | BackendSpec::Binary64Compensated => 53 + 64,
        BackendSpec::ArbitraryPrecision { bits } => bits + 64,
    };
    let wide = crate::arithmetic::make_backend(BackendSpec::ArbitraryPrecision { bits: wide })
        .expect("valid width");
    let pi_wide = wide.from_rational(&pi_value.to_rational());
    target.from_rational(&f(&wide, &pi_wide).to_rational())
}

/// `k_i` from `k_1 = 2`, `k_2 = pi` and `k_i = (2 pi / i) k_{i-2}`.
pub fn k_recursive(i: u32, pi_value: &Numeric) -> Result<Numeric> {
    if i == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(with_guard_bits(pi_value, |backend, pi| {
        let two_pi = &backend.from_int(2) * pi;
        let (mut k, mut dim) = if i % 2 == 1 {
            (backend.from_int(2), 1)
        } else {
            (pi.clone(), 2)
        };
        while dim < i {
            dim += 2;
            k = &(&two_pi / &backend.from_int(i64::from(dim))) * &k;
        }
        k
    }))
}

/// `pi^(i/2) / (i/2)!` for even `i`. The odd-dimension closed form is not
/// provided; use [`k_recursive`].
pub fn k_closed_even(i: u32, pi_value: &Numeric) -> Result<Numeric> {
    if i == 0 || i % 2 == 1 {
        return Err(Error::Domain(format!(
            "closed form is only available for even i >= 2, got {i}"
        )));
    }
    let half = i / 2;
    let factorial = BigRational::from_integer((1..=half).fold(BigInt::one(), |acc, j| acc * j));
    Ok(with_guard_bits(pi_value, |backend, pi| {
        &pi.powi(half) / &backend.from_rational(&factorial)
    }))
}

/// `V_i(R) = k_i R^i`.
pub fn hypervolume(i: u32, radius: &Numeric, pi_value: &Numeric) -> Result<Numeric> {
    if radius.is_negative() {
        return Err(Error::Domain("radius must be non-negative".into()));
    }
    let k = k_recursive(i, pi_value)?;
    Ok(&k * &radius.powi(i))
}

/// Composite-midpoint value of `∫_0^R (R^2 - x^2)^((i-1)/2) dx`, in the
/// backend of `radius`. Midpoint nodes never touch `x = R`, where the
/// integrand's derivative is unbounded for even `i`.
pub fn slice_integral_oracle(i: u32, radius: &Numeric, quad: QuadratureSpec) -> Result<Numeric> {
    if i == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let backend = backend_of(radius);
    if radius.is_negative() || radius.is_zero() {
        return Err(Error::Domain("radius must be positive".into()));
    }
    let QuadratureRule::MidpointComposite = quad.rule;
    let panels = i64::from(quad.points);
    let width = radius / &backend.from_int(panels);
    let r_sq = radius * radius;
    let whole = (i - 1) / 2;
    let has_root = (i - 1) % 2 == 1;
    let mut acc = backend.accumulator();
    for k in 0..panels {
        let x = &width * &backend.from_ratio(2 * k + 1, 2)?;
        let base = &r_sq - &(&x * &x);
        let mut f = base.powi(whole);
        if has_root {
            f = &f * &base.sqrt()?;
        }
        acc.add(&f)?;
    }
    Ok(&acc.total() * &width)
}

fn reference_in(backend: &Backend) -> Result<Numeric> {
    let digits = backend.spec().meaningful_digits().unwrap_or(60) + 10;
    let reference = reference_pi(digits)?;
    Ok(backend.from_rational(&reference.value))
}

/// `|k_i - 4 k_{i-2} P_i P_{i-1}|` with reference pi and series truncated at `N`.
pub fn k_identity_check(i: u32, limit: TruncationLimit, backend: &Backend) -> Result<Numeric> {
    if i < 3 {
        return Err(Error::Domain(format!("identity check needs i >= 3, got {i}")));
    }
    let pi = reference_in(backend)?;
    let k_i = k_recursive(i, &pi)?;
    let k_im2 = k_recursive(i - 2, &pi)?;
    let p_i = eval_p(i, limit, backend).value;
    let p_im1 = eval_p(i - 1, limit, backend).value;
    let rhs = &(&(&backend.from_int(4) * &k_im2) * &p_i) * &p_im1;
    Ok((&k_i - &rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::make_backend;
    use num_traits::Signed;

    fn exact() -> Backend {
        make_backend(BackendSpec::ExactRational).unwrap()
    }

    fn ap(bits: u32) -> Backend {
        make_backend(BackendSpec::ArbitraryPrecision { bits }).unwrap()
    }

    fn f64b() -> Backend {
        make_backend(BackendSpec::Binary64Plain).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn close(a: &Numeric, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn recursive_coefficients() {
        let pi = f64b().from_rational(&BigRational::from_float(PI).unwrap());
        assert_eq!(k_recursive(1, &pi).unwrap().to_f64(), 2.0);
        assert_eq!(k_recursive(2, &pi).unwrap().to_f64(), PI);
        assert!(close(&k_recursive(3, &pi).unwrap(), 4.0 * PI / 3.0, 1e-15));
        assert!(close(&k_recursive(4, &pi).unwrap(), PI * PI / 2.0, 1e-15));
        assert!(k_recursive(0, &pi).is_err());
        let c = HypersphereCoefficient::new(2, &pi).unwrap();
        assert_eq!(c.value, c.pi_source);
    }

    #[test]
    fn exact_coefficients_with_symbolic_pi_stand_in() {
        // With a rational stand-in for pi, both routes are exact and must agree.
        let b = exact();
        let pi = b.from_ratio(355, 113).unwrap();
        for i in (2..=40).step_by(2) {
            assert_eq!(k_closed_even(i, &pi).unwrap(), k_recursive(i, &pi).unwrap(), "i={i}");
        }
        assert_eq!(k_closed_even(6, &pi).unwrap(), &pi.powi(3) / &b.from_int(6));
        assert!(k_closed_even(5, &pi).is_err());
        assert!(k_closed_even(0, &pi).is_err());
    }

    #[test]
    fn closed_and_recursive_agree_within_four_ulp() {
        for backend in [f64b(), ap(128), ap(256)] {
            let pi = reference_in(&backend).unwrap();
            for i in (2..=40).step_by(2) {
                let closed = k_closed_even(i, &pi).unwrap();
                let rec = k_recursive(i, &pi).unwrap();
                let ulp = closed.ulp().unwrap();
                let diff = (closed.to_rational() - rec.to_rational()).abs();
                assert!(diff <= ulp * q(4, 1), "{} i={i}", backend.spec());
            }
        }
    }

    #[test]
    fn volumes() {
        let pi = f64b().from_rational(&BigRational::from_float(PI).unwrap());
        let b = f64b();
        assert!(close(&hypervolume(3, &b.one(), &pi).unwrap(), 4.0 * PI / 3.0, 1e-15));
        assert!(close(&hypervolume(2, &b.from_int(2), &pi).unwrap(), 4.0 * PI, 1e-14));
        for i in 1..8 {
            assert!(hypervolume(i, &b.zero(), &pi).unwrap().is_zero());
        }
        assert!(hypervolume(3, &b.from_int(-1), &pi).is_err());
    }

    #[test]
    fn volume_scales_homogeneously() {
        let b = exact();
        let pi = b.from_ratio(355, 113).unwrap();
        for i in 1..=12 {
            for (n, d) in [(1, 2), (1, 1), (7, 3)] {
                let r = b.from_ratio(n, d).unwrap();
                let doubled = &r * &b.from_int(2);
                let lhs = hypervolume(i, &doubled, &pi).unwrap();
                let rhs = &b.from_int(1 << i) * &hypervolume(i, &r, &pi).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let b = f64b();
        let one = b.one();
        let q14 = QuadratureSpec::midpoint(1 << 14).unwrap();
        assert!(close(&slice_integral_oracle(1, &one, q14).unwrap(), 1.0, 1e-6));
        assert!(close(&slice_integral_oracle(3, &one, q14).unwrap(), 2.0 / 3.0, 1e-6));
        let q16 = QuadratureSpec::midpoint(1 << 16).unwrap();
        assert!(close(&slice_integral_oracle(2, &one, q16).unwrap(), PI / 4.0, 1e-4));
        assert!(QuadratureSpec::midpoint(8).is_err());
        assert!(slice_integral_oracle(2, &b.zero(), q16).is_err());
    }

    #[test]
    fn quadrature_in_exact_arithmetic() {
        let b = exact();
        let quad = QuadratureSpec::midpoint(16).unwrap();
        // Midpoint rule on 1 - x^2 with h = 1/16: 2/3 + h^2/12.
        let v = slice_integral_oracle(3, &b.one(), quad).unwrap();
        assert_eq!(v.to_rational(), q(2, 3) + q(1, 256 * 12));
        assert!(slice_integral_oracle(2, &b.one(), quad).is_err());
    }

    #[test]
    fn identity_residuals() {
        let b = ap(128);
        for i in [4u32, 5] {
            let r = k_identity_check(i, TruncationLimit::new(10_000).unwrap(), &b).unwrap();
            assert!(r.to_rational() <= q(1, 1_000_000), "i={i}");
        }
        assert!(k_identity_check(2, TruncationLimit::new(10).unwrap(), &b).is_err());
    }

    #[test]
    fn identity_residual_for_three_is_the_p2_tail() {
        // k_3 - 4 k_1 P_3 P_2 = 8 (2/3) (pi/4 - P_2^(N)) when P_3 is exact.
        let b = exact();
        let limit = TruncationLimit::new(20).unwrap();
        let residual = k_identity_check(3, limit, &b).unwrap().to_rational();
        let pi = reference_in(&b).unwrap().to_rational();
        let p2 = eval_p(2, limit, &b).value.to_rational();
        let expected = (q(16, 3) * (&pi / q(4, 1) - p2)).abs();
        assert_eq!(residual, expected);
    }
}
