//! Explicit formulas for the potential of the density `ρ(z) = z` on `[0, 1]`
//! and for Kellogg's truncated variant.
//!
//! Every logarithm of the form `ln(√(w² + r²) + w)` with `w < 0` is rewritten as
//! `2 ln r − ln(√(w² + r²) + |w|)`, so the radius can be passed as `ln r`
//! and evaluation stays finite far below the smallest representable `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedForm {
    /// Potential of the rod with density `ζ` on `[0, 1]`.
    Lebesgue,
    /// `z ln(√(z²+r²) − z) + √(z²+r²)`, harmonic off the half-axis `{r = 0, z >= 0}`.
    Kellogg,
}

impl ClosedForm {
    /// Whether `(r, z)` lies on the singular support of the variant.
    pub fn is_singular_point<T: Real>(self, r: T, z: T) -> bool {
        r == T::zero()
            && match self {
                ClosedForm::Lebesgue => z > T::zero() && z <= T::one(),
                ClosedForm::Kellogg => z > T::zero(),
            }
    }
}

/// `ln(√(w² + r²) + w)` evaluated without cancellation; `log_r = ln r`.
#[inline]
pub(crate) fn log_hypot_plus<T: Real>(w: T, r: T, log_r: T) -> T {
    if w > T::zero() {
        (w.hypot(r) + w).ln()
    } else if w == T::zero() {
        log_r
    } else {
        T::lit(2.0) * log_r - (w.hypot(r) - w).ln()
    }
}

fn check_inputs<T: Real>(log_r: T, z: T) -> Result<()> {
    if log_r.is_nan() || !z.is_finite() || log_r == T::infinity() {
        return Err(Error::Domain(format!("non-finite evaluation point (ln r = {log_r}, z = {z})")));
    }
    Ok(())
}

/// Closed-form value at `(r, z)`; rod points of the variant are a domain error.
pub fn closed_form<T: Real>(r: T, z: T, variant: ClosedForm) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("radius must be non-negative, got {r}")));
    }
    closed_form_log_radius(r.ln(), z, variant)
}

/// Closed-form value with the radius supplied as `ln r` (`-inf` means `r = 0`).
pub fn closed_form_log_radius<T: Real>(log_r: T, z: T, variant: ClosedForm) -> Result<T> {
    check_inputs(log_r, z)?;
    let r = log_r.exp();
    if log_r == T::neg_infinity() && variant.is_singular_point(T::zero(), z) {
        return Err(Error::Domain(format!("({}, {z}) lies on the rod", T::zero())));
    }
    let two = T::lit(2.0);
    Ok(match variant {
        ClosedForm::Lebesgue => {
            let h1 = (T::one() - z).hypot(r);
            if z == T::zero() {
                // z ln(...) terms vanish; √(1+r²) − r without cancellation
                return Ok(T::one() / (h1 + r));
            }
            let h0 = z.hypot(r);
            let log_ratio = if z > T::one() {
                // both logarithms carry 2 ln r, which cancels
                (h0 + z).ln() - (h1 + (z - T::one())).ln()
            } else if z < T::zero() {
                (h1 + (T::one() - z)).ln() - (h0 - z).ln()
            } else {
                log_hypot_plus(T::one() - z, r, log_r) - (two * log_r - (h0 + z).ln())
            };
            z * log_ratio + (T::one() - two * z) / (h1 + h0)
        }
        ClosedForm::Kellogg => {
            let h0 = z.hypot(r);
            if z == T::zero() {
                return Ok(h0);
            }
            z * log_hypot_plus(-z, r, log_r) + h0
        }
    })
}

/// Stokes stream function `∫₀¹ ζ (z − ζ) / √((z−ζ)² + r²) dζ` of the linear-density rod.
///
/// Constant along field lines of the potential; equals `−1/2` on the axis below
/// the rod, `+1/2` above it, and `z² − 1/2` on the rod itself.
pub fn lebesgue_stream<T: Real>(r: T, z: T) -> T {
    let half = T::lit(0.5);
    let h1 = (T::one() - z).hypot(r);
    let h0 = z.hypot(r);
    let r2 = r * r;
    let log_part =
        if r2 == T::zero() { T::zero() } else { r2 * half * (((T::one() - z) / r).asinh() + (z / r).asinh()) };
    let first = half * ((T::one() - z) * h1 + z * h0);
    let diff = (T::one() - T::lit(2.0) * z) / (h1 + h0);
    -(first - log_part + z * diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(
            closed_form(1.0, 0.0, ClosedForm::Lebesgue).unwrap(),
            2f64.sqrt() - 1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(closed_form(0.0, 0.0, ClosedForm::Lebesgue).unwrap(), 1.0);
        assert_relative_eq!(
            closed_form(0.0, 2.0, ClosedForm::Lebesgue).unwrap(),
            2.0 * 2f64.ln() - 1.0,
            max_relative = 1e-14
        );
        assert_eq!(closed_form(1.0, 0.0, ClosedForm::Kellogg).unwrap(), 1.0);
        assert_relative_eq!(
            closed_form(100.0, 0.0, ClosedForm::Lebesgue).unwrap(),
            10001f64.sqrt() - 100.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn axis_below_rod() {
        // V(0, -s) = 1 - s ln(1 + 1/s)
        for s in [1e-3f64, 0.1, 0.398, 5.0] {
            let v = closed_form(0.0, -s, ClosedForm::Lebesgue).unwrap();
            assert_relative_eq!(v, 1.0 - s * (1.0 + 1.0 / s).ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn rod_points_are_domain_errors() {
        assert!(matches!(closed_form(0.0, 0.5, ClosedForm::Lebesgue), Err(Error::Domain(_))));
        assert!(matches!(closed_form(0.0, 1.0, ClosedForm::Lebesgue), Err(Error::Domain(_))));
        assert!(matches!(closed_form(0.0, 3.0, ClosedForm::Kellogg), Err(Error::Domain(_))));
        assert!(closed_form(0.0, 3.0, ClosedForm::Lebesgue).is_ok());
        assert!(matches!(closed_form(-1.0, 0.5, ClosedForm::Lebesgue), Err(Error::Domain(_))));
    }

    #[test]
    fn extreme_radius_stays_finite() {
        let v: f64 = closed_form_log_radius(-250.0, 1e-3, ClosedForm::Lebesgue).unwrap();
        assert!(v.is_finite());
        assert!((v - 1.5).abs() < 0.05);
        let deep: f64 = closed_form_log_radius(-1e6, 1e-7, ClosedForm::Lebesgue).unwrap();
        assert!(deep.is_finite() && deep > 1.0);
        let r: f64 = closed_form(1e-300, 0.2, ClosedForm::Lebesgue).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    fn stream_function_axis_values() {
        assert_relative_eq!(lebesgue_stream(0.0, -0.3), -0.5, max_relative = 1e-14);
        assert_relative_eq!(lebesgue_stream(0.0, 1.7), 0.5, max_relative = 1e-14);
        assert_relative_eq!(lebesgue_stream(0.0, 0.4), 0.16 - 0.5, max_relative = 1e-14);
        assert_relative_eq!(lebesgue_stream(1e-200, 0.4), 0.16 - 0.5, max_relative = 1e-14);
    }
}
