//! Modified Bessel functions of the first kind and the closed-form kernel
//! for the constant-coefficient special case `c(x,t) ≡ c2(t)`, `f ≡ 0`.
//!
//! The normalization is pinned by the limits `I1(s)/s → 1/2` and
//! `I2(s)/s² → 1/8` as `s → 0`, i.e. the standard power series
//! `I_n(s) = Σ_m (s/2)^{2m+n} / (m! (m+n)!)`. The closed-form kernel
//! `k(x,y) = λ0 x I1(s)/s` with `s = √(λ0 (x²-y²))` is admitted as ground
//! truth only after it passes the PDE residual check; see the solver tests
//! and the acceptance suite.

use crate::error::CoreError;
use crate::math;
use alloc::format;

/// Series evaluation of `I_order(s)`, truncated when a term drops below
/// `1e-17` of the partial sum. Arguments in this crate stay below `√(2 λ0)`,
/// where the series converges in a handful of terms.
pub fn bessel_i(order: u32, s: f64) -> Result<f64, CoreError> {
    if s < 0.0 {
        return Err(CoreError::Domain {
            what: format!("bessel_i argument {s} is negative"),
        });
    }
    if !(1..=2).contains(&order) {
        return Err(CoreError::Domain {
            what: format!("bessel_i order {order} not in {{1, 2}}"),
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * s;
    // m = 0 term: (s/2)^order / order!
    let mut term = math::powi(half, order) / if order == 1 { 1.0 } else { 2.0 };
    let mut sum = term;
    let q = half * half;
    for m in 1..500u32 {
        term *= q / (m as f64 * (m + order) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    Ok(sum)
}

/// `I1(s)/s`, continuously extended by `1/2` at `s = 0`.
pub fn i1_over_s(s: f64) -> f64 {
    if s < 1e-8 {
        // leading series terms of I1(s)/s
        0.5 + s * s / 16.0
    } else {
        bessel_i(1, s).expect("s >= 0") / s
    }
}

/// `I2(s)/s²`, continuously extended by `1/8` at `s = 0`.
pub fn i2_over_s2(s: f64) -> f64 {
    if s < 1e-8 {
        0.125 + s * s / 96.0
    } else {
        bessel_i(2, s).expect("s >= 0") / (s * s)
    }
}

/// Closed-form kernel `k(x,y) = λ0 x I1(s)/s`, `s = √(λ0 (x²-y²))`, for the
/// special case `c1 ≡ 0`, `f ≡ 0`. On the diagonal this is `λ0 x / 2`.
pub fn closed_form_kernel(lambda0: f64, x: f64, y: f64) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&x) || y < 0.0 || y > x {
        return Err(CoreError::Domain {
            what: format!("({x}, {y}) is not in D"),
        });
    }
    let s = math::sqrt(lambda0 * (x * x - y * y));
    Ok(lambda0 * x * i1_over_s(s))
}

/// Closed-form feedback gain `k_x(1,y) = λ0 I1(s)/s + λ0² I2(s)/s²` with
/// `s = √(λ0 (1-y²))`; equals `λ0/2 + λ0²/8` at `y = 1`.
pub fn closed_form_gain(lambda0: f64, y: f64) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&y) {
        return Err(CoreError::Domain {
            what: format!("y = {y} not in [0,1]"),
        });
    }
    let s = math::sqrt(lambda0 * (1.0 - y * y));
    Ok(lambda0 * i1_over_s(s) + lambda0 * lambda0 * i2_over_s2(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument() {
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn small_argument_limits() {
        let s = 1e-6;
        assert!((bessel_i(1, s).unwrap() / s - 0.5).abs() < 1e-9);
        assert!((bessel_i(2, s).unwrap() / (s * s) - 0.125).abs() < 1e-9);
    }

    #[test]
    fn unit_argument() {
        assert!((bessel_i(1, 1.0).unwrap() - 0.5651591).abs() < 1e-7);
        assert!((bessel_i(2, 1.0).unwrap() - 0.1357476).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_i(1, -1.0).is_err());
        assert!(bessel_i(0, 1.0).is_err());
        assert!(bessel_i(3, 1.0).is_err());
    }

    #[test]
    fn partial_sums_increase() {
        // All series terms are positive for s > 0, so values grow with s.
        let mut prev = 0.0;
        for i in 1..=40 {
            let v = bessel_i(1, i as f64 * 0.1).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn gain_endpoints() {
        assert!((closed_form_gain(1.0, 1.0).unwrap() - 0.625).abs() < 1e-12);
        let g0 = closed_form_gain(1.0, 0.0).unwrap();
        assert!((g0 - 0.700907).abs() < 1e-6);
    }

    #[test]
    fn gain_vanishes_with_lambda0() {
        for y in [0.0, 0.3, 0.9] {
            assert!(closed_form_gain(1e-12, y).unwrap() < 1e-11);
        }
    }

    #[test]
    fn kernel_values() {
        assert!((closed_form_kernel(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((closed_form_kernel(1.0, 1.0, 0.0).unwrap() - 0.565159).abs() < 1e-6);
        assert_eq!(closed_form_kernel(2.7, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_diagonal() {
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let k = closed_form_kernel(2.0, x, x).unwrap();
            assert!((k - x).abs() < 1e-12, "k({x},{x}) = {k}");
        }
    }

    #[test]
    fn gain_is_x_derivative_of_kernel() {
        // One-sided second-order FD of the kernel at x = 1 vs the gain.
        let lambda0 = 1.3;
        let h = 1e-4;
        for y in [0.0, 0.25, 0.5, 0.75] {
            let k0 = closed_form_kernel(lambda0, 1.0, y).unwrap();
            let k1 = closed_form_kernel(lambda0, 1.0 - h, y).unwrap();
            let k2 = closed_form_kernel(lambda0, 1.0 - 2.0 * h, y).unwrap();
            let fd = (3.0 * k0 - 4.0 * k1 + k2) / (2.0 * h);
            let g = closed_form_gain(lambda0, y).unwrap();
            assert!((fd - g).abs() < 1e-6, "y = {y}: fd = {fd}, gain = {g}");
        }
    }
}
