//! Level sets `{V = c}` in the meridian half-plane.
//!
//! For fixed `z` the map `r ↦ V(r, z)` is strictly decreasing, so each level is the
//! graph of a contour function `r_c(z)` over `(z1, z2)`, found by bisection in `ln r`.
//! Near the cusp of a level `c > V(0,0)` the radius behaves like `exp(-const / z)`,
//! so radii are carried as logarithms and only exponentiated on output.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

/// Bracket expansion stops at this distance (axis search) or radius.
pub const DEFAULT_SEARCH_RADIUS: f64 = 1e6;
const MAX_BISECTIONS: usize = 4000;

/// Points where a level meets the axis: `V(0, z1) = c` below the rod (or `z1 = 0` when
/// `c >= V(0,0)`) and `V(0, z2) = c` above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisCrossings<T: Real> {
    pub z1: T,
    pub z2: T,
    /// `|V(0, z1) − c|`; zero by convention when `z1` is the cusp tip.
    pub residual1: T,
    pub residual2: T,
}

/// Bisection on a decreasing function of one variable until the bracket is exhausted in floating point.
fn bisect_decreasing<T: Real, F: FnMut(T) -> Result<T>>(mut f: F, mut lo: T, mut hi: T) -> Result<T> {
    for _ in 0..MAX_BISECTIONS {
        let mid = T::lit(0.5) * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if f(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

fn check_level<T: Real>(c: T) -> Result<()> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::Input(format!("level must be positive and finite, got {c}")));
    }
    Ok(())
}

/// Axis endpoints of the level `c`.
pub fn axis_crossings<T: Real>(field: &PotentialField<T>, c: T) -> Result<AxisCrossings<T>> {
    check_level(c)?;
    let len = field.rod_length();
    let limit = T::lit(DEFAULT_SEARCH_RADIUS);

    let mut step = T::one();
    while field.axis_value(len + step)? >= c {
        step *= T::lit(2.0);
        if step > limit {
            return Err(Error::Range(format!("level {c} meets the axis beyond distance {limit} above the rod")));
        }
    }
    let z2 = bisect_decreasing(|z| Ok(field.axis_value(z)? - c), len, len + step)?;
    let residual2 = (field.axis_value(z2)? - c).abs();

    let (z1, residual1) = if c >= field.v00() {
        (T::zero(), T::zero())
    } else {
        let mut depth = T::one();
        while field.axis_value(-depth)? >= c {
            depth *= T::lit(2.0);
            if depth > limit {
                return Err(Error::Range(format!("level {c} meets the axis beyond distance {limit} below the rod")));
            }
        }
        // V(0, ·) increases on (−∞, 0]
        let z1 = bisect_decreasing(|z| Ok(c - field.axis_value(z)?), -depth, T::zero())?;
        (z1, (field.axis_value(z1)? - c).abs())
    };
    Ok(AxisCrossings { z1, z2, residual1, residual2 })
}

/// A level of the potential together with its axis crossings; solves for contour radii.
#[derive(Debug, Clone)]
pub struct Level<'a, T: Real> {
    field: &'a PotentialField<T>,
    c: T,
    crossings: AxisCrossings<T>,
    tol: T,
}

impl<'a, T: Real> Level<'a, T> {
    pub fn new(field: &'a PotentialField<T>, c: T) -> Result<Self> {
        let crossings = axis_crossings(field, c)?;
        Ok(Self { field, c, crossings, tol: T::default_tol() * c })
    }

    pub fn value(&self) -> T {
        self.c
    }

    pub fn crossings(&self) -> AxisCrossings<T> {
        self.crossings
    }

    pub fn field(&self) -> &PotentialField<T> {
        self.field
    }

    /// Absolute residual tolerance `|V − c|` for contour points.
    pub fn tolerance(&self) -> T {
        self.tol
    }

    pub fn contains(&self, z: T) -> bool {
        z > self.crossings.z1 && z < self.crossings.z2
    }

    /// `ln r_c(z)` and the residual `|V − c|` at the root.
    pub fn log_radius_with_residual(&self, z: T) -> Result<(T, T)> {
        if !self.contains(z) {
            return Err(Error::Domain(format!(
                "z = {z} outside ({}, {}) for level {}",
                self.crossings.z1, self.crossings.z2, self.c
            )));
        }
        let g = |t: T| Ok(self.field.value_log_radius(t, z)? - self.c);
        let (mut lo, mut hi) = (T::zero(), T::zero());
        let mut step = T::one();
        if g(T::zero())? > T::zero() {
            let top = T::lit(DEFAULT_SEARCH_RADIUS).ln();
            loop {
                hi = lo + step;
                if g(hi)? <= T::zero() {
                    break;
                }
                lo = hi;
                step *= T::lit(2.0);
                if hi > top {
                    return Err(Error::Range(format!("no contour radius below the search radius at z = {z}")));
                }
            }
        } else {
            loop {
                lo = hi - step;
                if g(lo)? > T::zero() {
                    break;
                }
                hi = lo;
                step *= T::lit(2.0);
                if lo < -T::max_value().sqrt() {
                    return Err(Error::Range(format!("no representable contour radius at z = {z}")));
                }
            }
        }
        let t = bisect_decreasing(g, lo, hi)?;
        let residual = (self.field.value_log_radius(t, z)? - self.c).abs();
        if !(residual <= self.tol) {
            return Err(Error::Accuracy {
                message: format!("contour residual at z = {z} exceeds tolerance {}", self.tol),
                estimate: t.as_f64(),
                error_bound: residual.as_f64(),
            });
        }
        Ok((t, residual))
    }

    pub fn log_radius_at(&self, z: T) -> Result<T> {
        Ok(self.log_radius_with_residual(z)?.0)
    }

    /// `r_c(z)`; underflows to 0 deep in a cusp, where [`Level::log_radius_at`] stays finite.
    pub fn radius_at(&self, z: T) -> Result<T> {
        Ok(self.log_radius_at(z)?.exp())
    }

    /// Smallest `z` in `(z1, z2)` with `r_c(z) >= r_min`, searched near the lower endpoint.
    ///
    /// Only meaningful for cusped levels (`c > V(0,0)`), where `r_c` increases away from the tip.
    pub fn z_where_radius(&self, r_min: T) -> Result<T> {
        if !(r_min > T::zero()) {
            return Err(Error::Input(format!("minimum radius must be positive, got {r_min}")));
        }
        let target = r_min.ln();
        let AxisCrossings { z1, z2, .. } = self.crossings;
        // coarse scan for the first station at or above r_min, then bisect
        let n = 256;
        let mut hi = None;
        let mut prev = z1;
        for k in 1..n {
            let z = z1 + (z2 - z1) * T::lit(k as f64 / n as f64);
            if self.log_radius_at(z)? >= target {
                hi = Some(z);
                break;
            }
            prev = z;
        }
        let hi = hi.ok_or_else(|| Error::Range(format!("level {} never reaches radius {r_min}", self.c)))?;
        let mut lo = prev;
        if lo == z1 {
            lo = z1 + (hi - z1) * T::lit(1e-9);
            if self.log_radius_at(lo)? >= target {
                return Ok(lo);
            }
        }
        bisect_decreasing(|z| Ok(target - self.log_radius_at(z)?), lo, hi)
    }
}

/// `ln r_c(z)` for a one-off query.
pub fn log_radius_at<T: Real>(field: &PotentialField<T>, c: T, z: T) -> Result<T> {
    Level::new(field, c)?.log_radius_at(z)
}

/// `r_c(z)` for a one-off query.
pub fn radius_at<T: Real>(field: &PotentialField<T>, c: T, z: T) -> Result<T> {
    Level::new(field, c)?.radius_at(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Grading {
    Uniform,
    /// Half the stations uniform, the other half at distances `span * ratio^k` from `z1`.
    GeometricTowardZ1 {
        ratio: f64,
    },
}

impl Default for Grading {
    fn default() -> Self {
        Grading::GeometricTowardZ1 { ratio: 0.7 }
    }
}

/// Interior stations strictly inside `(z1, z2)`, increasing. Geometric stations closer than
/// `1e-12` of the span to `z1` are dropped, so fewer than `n` may come back.
pub fn stations<T: Real>(z1: T, z2: T, n: usize, grading: Grading) -> Vec<T> {
    let span = z2 - z1;
    let uniform = |m: usize| -> Vec<T> { (1..=m).map(|k| z1 + span * T::lit(k as f64 / (m + 1) as f64)).collect() };
    let mut zs = match grading {
        Grading::Uniform => uniform(n),
        Grading::GeometricTowardZ1 { ratio } => {
            let n_geo = n / 2;
            let mut zs = uniform(n - n_geo);
            let q = T::lit(ratio);
            // start below the first uniform station so the two families interleave
            let mut d = span / T::lit((n - n_geo + 1) as f64);
            for _ in 0..n_geo {
                d *= q;
                zs.push(z1 + d);
            }
            zs
        }
    };
    let gap = span * T::lit(1e-12);
    zs.retain(|&z| z - z1 > gap && z < z2);
    zs.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
    zs.dedup();
    zs
}

/// A traced level curve: endpoints on the axis plus interior samples.
#[derive(Debug, Clone, Serialize)]
pub struct ContourCurve<T: Real> {
    pub level: T,
    pub z1: T,
    pub z2: T,
    /// `(z, ln r)` including the endpoints, which carry `ln r = −inf`.
    pub samples: Vec<(T, T)>,
    /// `|V − c|` at the interior samples (`samples[1..len-1]`).
    pub residuals: Vec<T>,
}

impl<T: Real> ContourCurve<T> {
    /// `(z, r)` pairs; radii below the smallest float come out as zero.
    pub fn points(&self) -> Vec<(T, T)> {
        self.samples.iter().map(|&(z, lr)| (z, lr.exp())).collect()
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().copied().fold(T::zero(), T::max)
    }

    pub fn interior(&self) -> &[(T, T)] {
        &self.samples[1..self.samples.len() - 1]
    }
}

pub const MIN_STATIONS: usize = 16;

/// Traces the level `c` at `n` interior stations plus both axis endpoints.
pub fn trace_contour<T: Real>(field: &PotentialField<T>, c: T, n: usize, grading: Grading) -> Result<ContourCurve<T>> {
    if n < MIN_STATIONS {
        return Err(Error::Input(format!("contour needs at least {MIN_STATIONS} stations, got {n}")));
    }
    if let Grading::GeometricTowardZ1 { ratio } = grading {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Input(format!("grading ratio must lie in (0, 1), got {ratio}")));
        }
    }
    let level = Level::new(field, c)?;
    let AxisCrossings { z1, z2, .. } = level.crossings();
    let zs = stations(z1, z2, n, grading);
    let solved: Vec<(T, T)> = zs.par_iter().map(|&z| level.log_radius_with_residual(z)).collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(zs.len() + 2);
    samples.push((z1, T::neg_infinity()));
    samples.extend(zs.iter().zip(&solved).map(|(&z, &(t, _))| (z, t)));
    samples.push((z2, T::neg_infinity()));
    Ok(ContourCurve { level: c, z1, z2, samples, residuals: solved.into_iter().map(|s| s.1).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateVariant {
    /// Band `exp(−β/ρ(z)) < r_c < exp(−α/ρ(z))`, for densities Dini continuous at 0.
    Dini,
    /// Band `exp(−β/ρ((1−δ)z)) < r_c < exp(−α/ρ((1+δ)z))`, for densities increasing near 0.
    Monotone,
}

#[derive(Debug, Clone, Serialize)]
pub struct CuspStation {
    pub z: f64,
    pub log_radius: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub pass: bool,
    /// `V(exp(−α/ρ(·)), z)` at the inner probe radius (`(1+δ)z` in the monotone variant).
    pub probe_value: f64,
    /// Outer probe `V(exp(−α/ρ((1−δ)z)), z)`; only for the monotone variant.
    pub probe_value_outer: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CuspRateReport {
    pub level: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub variant: RateVariant,
    /// `V(0,0) + 2α`, the limit the probe values approach.
    pub probe_limit: f64,
    pub stations: Vec<CuspStation>,
    pub all_pass: bool,
}

/// Default station heights for rate reports: log-spaced from `1e-1` to `1e-3`.
pub fn default_rate_grid() -> Vec<f64> {
    (0..=8).map(|k| 10f64.powf(-1.0 - 0.25 * k as f64)).collect()
}

/// Checks the exponential band around the cusp contour `r_c` on the given heights.
pub fn cusp_rate_bounds<T: Real>(
    field: &PotentialField<T>,
    c: T,
    alpha: T,
    beta: T,
    delta: T,
    zs: &[T],
    variant: RateVariant,
) -> Result<CuspRateReport> {
    let half_gap = (c - field.v00()) / T::lit(2.0);
    if !(alpha > T::zero() && alpha < half_gap && half_gap < beta) {
        return Err(Error::Input(format!(
            "rate parameters must satisfy 0 < alpha < (c - V(0,0))/2 < beta, got alpha = {alpha}, (c - V(0,0))/2 = {half_gap}, beta = {beta}"
        )));
    }
    if variant == RateVariant::Monotone && !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Input(format!("delta must lie in (0, 1), got {delta}")));
    }
    let level = Level::new(field, c)?;
    let rho = |z: T| field.density().eval(z);
    let mut stations = Vec::with_capacity(zs.len());
    for &z in zs {
        let t = level.log_radius_at(z)?;
        let (inner, outer) = match variant {
            RateVariant::Dini => (z, z),
            RateVariant::Monotone => ((T::one() + delta) * z, (T::one() - delta) * z),
        };
        let log_upper = -alpha / rho(inner)?;
        let log_lower = -beta / rho(outer)?;
        let probe_value = field.value_log_radius(log_upper, z)?;
        let probe_value_outer = match variant {
            RateVariant::Dini => None,
            RateVariant::Monotone => Some(field.value_log_radius(-alpha / rho(outer)?, z)?.as_f64()),
        };
        stations.push(CuspStation {
            z: z.as_f64(),
            log_radius: t.as_f64(),
            log_lower: log_lower.as_f64(),
            log_upper: log_upper.as_f64(),
            pass: log_lower < t && t < log_upper,
            probe_value: probe_value.as_f64(),
            probe_value_outer,
        });
    }
    let all_pass = stations.iter().all(|s| s.pass);
    Ok(CuspRateReport {
        level: c.as_f64(),
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        delta: delta.as_f64(),
        variant,
        probe_limit: (field.v00() + T::lit(2.0) * alpha).as_f64(),
        stations,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn field() -> PotentialField<f64> {
        PotentialField::lebesgue()
    }

    #[test]
    fn crossings_match_reference_values() {
        let f = field();
        let a = axis_crossings(&f, 2.0).unwrap();
        assert_eq!(a.z1, 0.0);
        assert!((a.z2 - 1.0632870688777625).abs() < 1e-12);
        let b = axis_crossings(&f, 0.5).unwrap();
        assert!((b.z2 - 1.7158202148587195).abs() < 1e-12);
        assert!((b.z1 + 0.3979525473159165).abs() < 1e-12);
        assert!(b.residual1 < 1e-14 && b.residual2 < 1e-14);
        assert_eq!(axis_crossings(&f, 1.0).unwrap().z1, 0.0);
        assert!(matches!(axis_crossings(&f, 1e-9), Err(Error::Range(_))));
        assert!(matches!(axis_crossings(&f, -1.0), Err(Error::Input(_))));
    }

    #[test]
    fn cusp_radii_match_reference() {
        let f = field();
        let lvl = Level::new(&f, 2.0).unwrap();
        for (z, lr) in [(0.1, -6.5108), (0.05, -11.8304), (0.01, -52.6145), (0.001, -503.761)] {
            assert_relative_eq!(lvl.log_radius_at(z).unwrap(), lr, max_relative = 1e-4);
        }
        assert!(matches!(lvl.log_radius_at(0.0), Err(Error::Domain(_))));
        assert!(matches!(lvl.log_radius_at(1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn radius_satisfies_residual() {
        let f = field();
        for (c, z) in [(0.5, -0.2), (0.5, 0.7), (0.5, 1.5), (2.0, 0.3), (1.5, 0.9)] {
            let r = radius_at(&f, c, z).unwrap();
            assert!(r > 0.0);
            assert!((f.value(r, z).unwrap() - c).abs() <= 1e-10 * c);
        }
    }

    #[test]
    fn z_cut_for_unit_inner_level() {
        let f = field();
        let lvl = Level::new(&f, 2.0).unwrap();
        let z = lvl.z_where_radius(1e-4).unwrap();
        assert!((z - 0.0665416213).abs() < 1e-8);
    }

    #[test]
    fn trace_rejects_few_stations() {
        assert!(matches!(trace_contour(&field(), 2.0, 8, Grading::default()), Err(Error::Input(_))));
    }

    #[test]
    fn traced_curve_invariants() {
        let f = field();
        let cur = trace_contour(&f, 0.5, 32, Grading::Uniform).unwrap();
        assert_eq!(cur.samples.len(), 34);
        assert!(cur.samples.windows(2).all(|w| w[1].0 > w[0].0));
        assert!(cur.interior().iter().all(|s| s.1.exp() > 0.0));
        assert!(cur.max_residual() <= 1e-10);
        let pts = cur.points();
        assert_eq!(pts[0].1, 0.0);
        assert_eq!(pts.last().unwrap().1, 0.0);
    }

    #[test]
    fn band_holds_below_threshold() {
        let f = field();
        let rep =
            cusp_rate_bounds(&f, 2.0, 0.4, 0.6, 0.0, &[0.05, 0.02, 0.01, 0.005, 0.001], RateVariant::Dini).unwrap();
        assert!(rep.all_pass, "{rep:?}");
        assert!(matches!(cusp_rate_bounds(&f, 2.0, 0.6, 0.7, 0.0, &[0.1], RateVariant::Dini), Err(Error::Input(_))));
        let mono = cusp_rate_bounds(&f, 2.0, 0.4, 0.6, 0.2, &[0.02, 0.01, 0.001], RateVariant::Monotone).unwrap();
        assert!(mono.all_pass);
        assert!(mono.stations.iter().all(|s| s.probe_value_outer.is_some()));
    }
}
