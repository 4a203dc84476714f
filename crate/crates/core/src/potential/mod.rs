//! Rod potentials `V(r, z) = ∫₀ᴸ ρ(ζ) / √((ζ − z)² + r²) dζ` in meridian coordinates.

mod closed_form;
mod density;
mod dini;

use serde::Serialize;

pub use closed_form::{closed_form, closed_form_log_radius, lebesgue_stream, ClosedForm};
pub use density::{DensityKind, DensityProfile};
pub use dini::{dini_report, log_grid, DiniClass, DiniReport};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::scalar::Real;

/// Below this radius raw quadrature cannot resolve the integrand peak at `ζ = z`.
pub const MIN_QUADRATURE_RADIUS: f64 = 1e-12;

/// Potential of a rod density with the axial value `V(0, 0)` and total mass cached.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialField<T: Real> {
    density: DensityProfile<T>,
    v00: T,
    mass: T,
    quadrature: QuadratureOptions<T>,
}

impl<T: Real> PotentialField<T> {
    pub fn new(density: DensityProfile<T>) -> Result<Self> {
        Self::with_options(density, QuadratureOptions::default())
    }

    /// Builds the field, checking that `∫₀ᴸ ρ(ζ)/ζ dζ` converges.
    pub fn with_options(density: DensityProfile<T>, quadrature: QuadratureOptions<T>) -> Result<Self> {
        let len = density.length();
        let (v00, mass) = match density.kind() {
            DensityKind::Lebesgue => (T::one(), T::lit(0.5)),
            DensityKind::Power { p } => {
                let p = *p;
                (len.powf(p) / p, len.powf(p + T::one()) / (p + T::one()))
            }
            DensityKind::Tabulated { .. } => {
                let knots = density.knots().to_vec();
                let axial = integrate(
                    |s| if s > T::zero() { density.eval_unchecked(s) / s } else { T::zero() },
                    T::zero(),
                    len,
                    &knots,
                    &quadrature,
                )
                .map_err(|e| Error::Input(format!("V(0,0) integral does not converge: {e}")))?;
                let mass = integrate(|s| density.eval_unchecked(s), T::zero(), len, &knots, &quadrature)?;
                (axial.value, mass.value)
            }
        };
        Ok(Self { density, v00, mass, quadrature })
    }

    pub fn lebesgue() -> Self {
        Self::new(DensityProfile::lebesgue()).expect("Lebesgue density is critical")
    }

    pub fn density(&self) -> &DensityProfile<T> {
        &self.density
    }

    /// `V(0, 0)`.
    pub fn v00(&self) -> T {
        self.v00
    }

    /// Total mass `∫₀ᴸ ρ`.
    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn quadrature(&self) -> &QuadratureOptions<T> {
        &self.quadrature
    }

    pub fn rod_length(&self) -> T {
        self.density.length()
    }

    fn on_rod(&self, z: T) -> bool {
        z > T::zero() && z <= self.density.length()
    }

    fn breakpoints(&self, z: T) -> Vec<T> {
        let mut b = self.density.knots().to_vec();
        b.push(z.max(T::zero()).min(self.density.length()));
        b
    }

    /// `V(r, z)`; returns `+inf` on the rod itself.
    pub fn value(&self, r: T, z: T) -> Result<T> {
        if !(r >= T::zero()) || !r.is_finite() || !z.is_finite() {
            return Err(Error::Domain(format!("invalid evaluation point ({r}, {z})")));
        }
        if r == T::zero() && self.on_rod(z) {
            return Ok(T::infinity());
        }
        if self.density.is_lebesgue() {
            return closed_form(r, z, ClosedForm::Lebesgue);
        }
        if r < T::lit(MIN_QUADRATURE_RADIUS) && self.on_rod(z) {
            return self.subtracted(r.ln(), z);
        }
        self.quadrature_value(r, z)
    }

    /// `V(e^{log_r}, z)`, finite for any `log_r > -inf` including radii far below `f64::MIN_POSITIVE`.
    pub fn value_log_radius(&self, log_r: T, z: T) -> Result<T> {
        if log_r.is_nan() || log_r == T::infinity() || !z.is_finite() {
            return Err(Error::Domain(format!("invalid evaluation point (ln r = {log_r}, z = {z})")));
        }
        if log_r == T::neg_infinity() && self.on_rod(z) {
            return Ok(T::infinity());
        }
        if self.density.is_lebesgue() {
            return closed_form_log_radius(log_r, z, ClosedForm::Lebesgue);
        }
        if log_r < T::lit(MIN_QUADRATURE_RADIUS.ln()) && self.on_rod(z) {
            return self.subtracted(log_r, z);
        }
        self.quadrature_value(log_r.exp(), z)
    }

    /// Potential on the axis, `V(0, z)`.
    pub fn axis_value(&self, z: T) -> Result<T> {
        self.value(T::zero(), z)
    }

    /// Direct adaptive quadrature of the defining integral, without closed forms.
    pub fn quadrature_value(&self, r: T, z: T) -> Result<T> {
        if !(r >= T::zero()) || !z.is_finite() {
            return Err(Error::Domain(format!("invalid evaluation point ({r}, {z})")));
        }
        if r < T::lit(MIN_QUADRATURE_RADIUS) && self.on_rod(z) {
            return Err(Error::Accuracy {
                message: format!("radius {r} too small for direct quadrature at z = {z}"),
                estimate: f64::NAN,
                error_bound: f64::INFINITY,
            });
        }
        let r2 = r * r;
        let res = integrate(
            |s| self.density.eval_unchecked(s) / ((s - z) * (s - z) + r2).sqrt(),
            T::zero(),
            self.density.length(),
            &self.breakpoints(z),
            &self.quadrature,
        )?;
        Ok(res.value)
    }

    /// Rod points with tiny radius: the `ρ(z) / dist` part is integrated exactly.
    fn subtracted(&self, log_r: T, z: T) -> Result<T> {
        let len = self.density.length();
        let r = log_r.exp();
        let rho_z = self.density.eval_unchecked(z);
        let two = T::lit(2.0);
        let base = rho_z * (((len - z) + (len - z).hypot(r)).ln() + (z + z.hypot(r)).ln() - two * log_r);
        let rest = integrate(
            |s| {
                let num = self.density.eval_unchecked(s) - rho_z;
                let d = (s - z).hypot(r);
                if d == T::zero() {
                    T::zero()
                } else {
                    num / d
                }
            },
            T::zero(),
            len,
            &self.breakpoints(z),
            &self.quadrature,
        )?;
        Ok(base + rest.value)
    }

    /// Stokes stream function `ψ(r, z) = ∫ ρ(ζ)(z − ζ)/√((z−ζ)² + r²) dζ`.
    ///
    /// Level curves of `ψ` are the field lines of `V`; `ψ = −M` on the axis below the rod and `+M` above.
    pub fn stream(&self, r: T, z: T) -> Result<T> {
        if !(r >= T::zero()) || !z.is_finite() {
            return Err(Error::Domain(format!("invalid evaluation point ({r}, {z})")));
        }
        if self.density.is_lebesgue() {
            return Ok(lebesgue_stream(r, z));
        }
        let r2 = r * r;
        let res = integrate(
            |s| {
                let d = ((z - s) * (z - s) + r2).sqrt();
                if d == T::zero() {
                    T::zero()
                } else {
                    self.density.eval_unchecked(s) * (z - s) / d
                }
            },
            T::zero(),
            self.density.length(),
            &self.breakpoints(z),
            &self.quadrature,
        )?;
        Ok(res.value)
    }

    /// Field-line angle `arccos(ψ / M)`: 0 on the axis above the rod, π below it.
    pub fn field_angle(&self, r: T, z: T) -> Result<T> {
        let ratio = (self.stream(r, z)? / self.mass).max(-T::one()).min(T::one());
        Ok(ratio.acos())
    }
}

/// Outcome of checking `V ≤ sec(α) V(0,0)` on a sector `z ≤ tan(α) r`.
#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub alpha: f64,
    pub max_value: f64,
    pub bound: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Samples `V` on points of the sector `{z ≤ tan(α) r}` and compares with `sec(α) V(0,0)`.
pub fn sector_bound_check<T: Real>(field: &PotentialField<T>, alpha: T, points: &[(T, T)]) -> Result<SectorReport> {
    if !(alpha >= T::zero() && alpha < T::FRAC_PI_2()) {
        return Err(Error::Input(format!("sector angle must lie in [0, π/2), got {alpha}")));
    }
    let slope = alpha.tan();
    let mut max_value = T::neg_infinity();
    for &(r, z) in points {
        // tolerance keeps points generated exactly on the sector edge inside
        let edge = slope * r + T::epsilon() * T::lit(4.0) * (T::one() + r.abs());
        if !(r >= T::zero()) || !(z <= edge) {
            return Err(Error::Input(format!("point ({r}, {z}) lies outside the sector z <= tan({alpha}) r")));
        }
        let v = field.value(r, z)?;
        max_value = max_value.max(v);
    }
    let bound = field.v00() / alpha.cos();
    let tol = field.quadrature().rel_tol * bound;
    Ok(SectorReport {
        alpha: alpha.as_f64(),
        max_value: max_value.as_f64(),
        bound: bound.as_f64(),
        samples: points.len(),
        pass: max_value <= bound + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lebesgue_axis_and_far_field() {
        let f = PotentialField::<f64>::lebesgue();
        assert_eq!(f.v00(), 1.0);
        assert_eq!(f.value(0.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(f.value(100.0, 0.0).unwrap(), 10001f64.sqrt() - 100.0, max_relative = 1e-12);
        assert!(f.value(0.5, 0.0).unwrap() > f.value(1.0, 0.0).unwrap());
        assert_eq!(f.value(0.0, 0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let f = PotentialField::<f64>::lebesgue();
        for &(r, z) in &[(1.0, 0.0), (0.5, 0.5), (1e-6, 0.3), (0.0, 2.0), (0.0, -0.4), (2.0, 3.0)] {
            let q = f.quadrature_value(r, z).unwrap();
            let c = closed_form(r, z, ClosedForm::Lebesgue).unwrap();
            assert_relative_eq!(q, c, max_relative = 1e-9);
        }
    }

    #[test]
    fn quadrature_refuses_tiny_radius_on_rod() {
        let f = PotentialField::<f64>::lebesgue();
        assert!(matches!(f.quadrature_value(1e-13, 0.5), Err(Error::Accuracy { .. })));
        assert!(f.quadrature_value(1e-13, 1.5).is_ok());
    }

    #[test]
    fn power_one_equals_lebesgue() {
        let lin = PotentialField::new(DensityProfile::power(1.0, 1.0).unwrap()).unwrap();
        let leb = PotentialField::<f64>::lebesgue();
        assert_relative_eq!(lin.v00(), 1.0);
        for &(r, z) in &[(0.3, 0.2), (1e-14, 0.4), (0.0, 1.5)] {
            assert_relative_eq!(lin.value(r, z).unwrap(), leb.value(r, z).unwrap(), max_relative = 1e-9);
        }
        for &(lr, z) in &[(-40.0, 0.2), (-400.0, 0.05)] {
            assert_relative_eq!(
                lin.value_log_radius(lr, z).unwrap(),
                leb.value_log_radius(lr, z).unwrap(),
                max_relative = 1e-9
            );
        }
        assert_relative_eq!(lin.stream(0.4, 0.3).unwrap(), leb.stream(0.4, 0.3).unwrap(), max_relative = 1e-9);
    }

    #[test]
    fn tabulated_linear_matches_lebesgue() {
        let tab =
            PotentialField::new(DensityProfile::tabulated(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]).unwrap()).unwrap();
        assert_relative_eq!(tab.v00(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(tab.mass(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(
            tab.value(0.2, 0.7).unwrap(),
            closed_form(0.2, 0.7, ClosedForm::Lebesgue).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn sector_bounds() {
        let f = PotentialField::<f64>::lebesgue();
        let pts: Vec<(f64, f64)> = (1..=100).map(|k| (0.02 * k as f64, -0.01 * k as f64)).collect();
        let rep = sector_bound_check(&f, 0.0, &pts).unwrap();
        assert!(rep.pass && rep.max_value <= 1.0);
        let diag: Vec<(f64, f64)> = (1..=50).map(|k| (1e-3 * k as f64, 1e-3 * k as f64)).collect();
        let rep = sector_bound_check(&f, std::f64::consts::FRAC_PI_4, &diag).unwrap();
        assert!(rep.pass);
        assert_relative_eq!(rep.bound, 2f64.sqrt(), max_relative = 1e-15);
        match sector_bound_check(&f, 0.0, &[(0.1, -0.1), (0.1, 0.2)]) {
            Err(Error::Input(msg)) => assert!(msg.contains("0.2")),
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn field_angle_limits() {
        let f = PotentialField::<f64>::lebesgue();
        assert_relative_eq!(f.field_angle(0.0, -1.0).unwrap(), std::f64::consts::PI);
        assert_eq!(f.field_angle(0.0, 2.0).unwrap(), 0.0);
        let mid = f.field_angle(3.0, 0.5).unwrap();
        assert!(mid > 0.0 && mid < std::f64::consts::PI);
    }
}
