//! Principal branch W0 of the Lambert function, the inverse of w -> w e^w
//! on [-1, inf).
//!
//! Solved by Halley iteration on f(w) = w e^w - x. The initial guess is
//! log(1 + x) for x >= 0; for negative x a short Taylor expansion near 0 or
//! the branch-point series in p = sqrt(2(e x + 1)) near -1/e keeps the
//! iteration inside the principal branch. Convergence is cubic, so the
//! residual tolerance is reached in a handful of steps.

use crate::error::FeatureError;

/// Iteration cap; Halley needs far fewer steps on the whole domain.
const MAX_ITERATIONS: usize = 50;

/// Residual target: |w e^w - x| <= RESIDUAL_TOL * max(1, |x|).
const RESIDUAL_TOL: f64 = 1e-12;

/// Lower endpoint of the real domain, -1/e.
pub const NEG_INV_E: f64 = -0.36787944117144233;

/// W0(x): the w >= -1 with w e^w = x.
///
/// # Errors
/// [`FeatureError::OutOfDomain`] for x < -1/e or non-finite x.
pub fn lambert_w0(x: f64) -> Result<f64, FeatureError> {
    if !x.is_finite() || x < NEG_INV_E {
        return Err(FeatureError::OutOfDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == NEG_INV_E {
        return Ok(-1.0);
    }

    let mut w = initial_guess(x);
    let tol = RESIDUAL_TOL * x.abs().max(1.0);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            return Ok(w);
        }
        let fp = ew * (w + 1.0);
        let halley_den = fp - (w + 2.0) * f / (2.0 * (w + 1.0));
        let step = if halley_den.is_finite() && halley_den != 0.0 {
            f / halley_den
        } else {
            f / fp
        };
        w -= step;
        if w < -1.0 {
            w = -1.0 + f64::EPSILON;
        }
    }
    let residual = (w * w.exp() - x).abs();
    if residual <= tol {
        Ok(w)
    } else {
        // Halley at 1e-12 tolerance converges well before the cap on the
        // whole domain; reaching this line indicates NaN poisoning.
        Err(FeatureError::OutOfDomain(x))
    }
}

fn initial_guess(x: f64) -> f64 {
    if x >= 0.0 {
        x.ln_1p()
    } else if x >= -0.25 {
        // Two terms of the Taylor series at 0.
        x * (1.0 - x)
    } else {
        // Branch-point series in p = sqrt(2(e x + 1)).
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisection_oracle(x: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0f64, 700.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() - x <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn w0_of_zero_is_zero() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
    }

    #[test]
    fn w0_of_e_is_one() {
        let w = lambert_w0(std::f64::consts::E).unwrap();
        assert!((w - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn w0_of_one_matches_bisection_oracle() {
        let w = lambert_w0(1.0).unwrap();
        assert!((w - bisection_oracle(1.0)).abs() <= 1e-12);
        assert!((w - 0.5671432904).abs() <= 1e-10);
    }

    #[test]
    fn rejects_points_left_of_branch() {
        assert!(matches!(
            lambert_w0(NEG_INV_E - 1e-6),
            Err(FeatureError::OutOfDomain(_))
        ));
        assert!(matches!(
            lambert_w0(f64::NAN),
            Err(FeatureError::OutOfDomain(_))
        ));
    }

    #[test]
    fn branch_endpoint_maps_to_minus_one() {
        assert_eq!(lambert_w0(NEG_INV_E).unwrap(), -1.0);
    }

    #[test]
    fn residual_holds_across_domain_sweep() {
        // Log-spaced offsets t from the branch point: x = -1/e + t.
        let lo: f64 = 1e-9;
        let hi: f64 = 1e6 + 1.0 / std::f64::consts::E;
        for k in 0..1000 {
            let t = lo * (hi / lo).powf(k as f64 / 999.0);
            let x = NEG_INV_E + t;
            let w = lambert_w0(x).unwrap();
            let residual = (w * w.exp() - x).abs();
            assert!(
                residual <= 1e-12 * x.abs().max(1.0),
                "residual {residual} too large at x = {x}"
            );
            assert!(w >= -1.0);
        }
    }

    #[test]
    fn matches_oracle_on_negative_interior_points() {
        for &x in &[-0.3, -0.2, -0.1, -0.05, -0.01, -0.001] {
            let w = lambert_w0(x).unwrap();
            let oracle = bisection_oracle(x);
            assert!(
                (w - oracle).abs() <= 1e-11,
                "w = {w}, oracle = {oracle} at x = {x}"
            );
        }
    }
}
