//! Data behind the potential surface, the meridian contour map and the cut-open surfaces.

use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{trace_contour, ContourCurve, Grading};
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

/// `(r, z, V)` on a tensor grid with `0 < r <= r_max`; points on the rod carry `+inf`.
pub fn potential_grid<T: Real>(
    field: &PotentialField<T>,
    r_max: T,
    z_range: (T, T),
    nr: usize,
    nz: usize,
) -> Result<Vec<[T; 3]>> {
    if nr < 2 || nz < 2 || !(r_max > T::zero()) || !(z_range.1 > z_range.0) {
        return Err(Error::Input("potential grid needs r_max > 0, z_lo < z_hi and at least 2 x 2 points".into()));
    }
    let rows: Vec<Result<Vec<[T; 3]>>> = (0..nz)
        .into_par_iter()
        .map(|j| {
            let z = z_range.0 + (z_range.1 - z_range.0) * T::lit(j as f64 / (nz - 1) as f64);
            (1..=nr)
                .map(|i| {
                    let r = r_max * T::lit(i as f64 / nr as f64);
                    Ok([r, z, field.value(r, z)?])
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// Traced level curves, in the order given.
pub fn contour_map<T: Real>(field: &PotentialField<T>, levels: &[T], stations: usize) -> Result<Vec<ContourCurve<T>>> {
    levels.iter().map(|&c| trace_contour(field, c, stations, Grading::default())).collect()
}

/// Surface of revolution of `curve`, swept over the angle range `[0, sweep]`.
pub fn surface_cloud<T: Real>(curve: &ContourCurve<T>, angles: usize, sweep: T) -> Vec<[T; 3]> {
    let pts = curve.points();
    let mut out = Vec::with_capacity(pts.len() * angles);
    for k in 0..angles {
        let phi = sweep * T::lit(k as f64 / (angles.max(2) - 1) as f64);
        let (s, c) = phi.sin_cos();
        out.extend(pts.iter().map(|&(z, r)| [r * c, r * s, z]));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Tangency {
    /// `(z, r/z)` over interior samples with `z > 0`, by decreasing `z`.
    pub ratios: Vec<(f64, f64)>,
    /// Whether the ratios decrease over the last decade of `z` toward the tip.
    pub decreasing: bool,
    pub last_ratio: f64,
}

/// Ratio `r/z` of a cusped curve as `z` falls to its lower tip at the origin.
pub fn tangency<T: Real>(curve: &ContourCurve<T>) -> Tangency {
    let mut ratios: Vec<(f64, f64)> = curve
        .interior()
        .iter()
        .filter(|(z, _)| *z > T::zero())
        .map(|&(z, lr)| (z.as_f64(), (lr.as_f64() - z.as_f64().ln()).exp()))
        .collect();
    ratios.sort_by(|a, b| b.0.total_cmp(&a.0));
    let z_last = ratios.last().map_or(0.0, |r| r.0);
    let decade: Vec<&(f64, f64)> = ratios.iter().filter(|r| r.0 <= 10.0 * z_last.max(f64::MIN_POSITIVE)).collect();
    let decreasing = decade.len() >= 2 && decade.windows(2).all(|w| w[1].1 <= w[0].1);
    Tangency { last_ratio: ratios.last().map_or(f64::NAN, |r| r.1), decreasing, ratios }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_are_positive_and_symmetric_in_shape() {
        let f = PotentialField::<f64>::lebesgue();
        let g = potential_grid(&f, 1.0, (-1.0, 2.0), 8, 13).unwrap();
        assert_eq!(g.len(), 8 * 13);
        assert!(g.iter().all(|p| p[2] > 0.0 && p[2].is_finite()));
    }

    #[test]
    fn cusp_curve_is_tangent_to_axis() {
        let f = PotentialField::<f64>::lebesgue();
        let map = contour_map(&f, &[0.5, 2.0], 64).unwrap();
        let t = tangency(&map[1]);
        assert!(t.decreasing);
        assert!(t.last_ratio < 1e-6);
        let cloud = surface_cloud(&map[0], 5, 1.5 * std::f64::consts::PI);
        assert_eq!(cloud.len(), 5 * map[0].samples.len());
    }
}
