//! Modulus of continuity of a density and the Dini test `∫₀ ω(t)/t dt < ∞`.

use std::collections::VecDeque;

use serde::Serialize;

use super::DensityProfile;
use crate::scalar::Real;
use crate::series::{classify_tail, TailFit, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiniClass {
    Dini,
    NotDini,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiniReport {
    /// `(t, ω(t))`, starting with `(0, 0)` and increasing in `t`.
    pub modulus: Vec<(f64, f64)>,
    /// `∫_{t_min}^{t_max} ω(t)/t dt` plus the linear remainder `ω(t_min)`.
    pub integral: f64,
    pub diverged: bool,
    /// Partial integrals from each grid point up to `t_max`, by decreasing lower limit.
    pub partial_integrals: Vec<(f64, f64)>,
    pub fit: Option<TailFit>,
    pub classification: DiniClass,
}

/// `n` points log-spaced from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log_grid needs 0 < lo < hi and n >= 2");
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

fn sample_points<T: Real>(profile: &DensityProfile<T>, grid: &[f64]) -> Vec<f64> {
    let len = profile.length().as_f64();
    let mut pts = vec![0.0, len];
    for &t in grid {
        if t < len {
            pts.push(t);
            pts.push(len - t);
        }
    }
    pts.extend(profile.knots().iter().map(|k| k.as_f64()));
    let n = 512;
    pts.extend((1..n).map(|k| len * k as f64 / n as f64));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `max |ρ(x) − ρ(y)|` over sampled pairs with `|x − y| <= t`, via sliding-window extrema.
fn modulus_at(xs: &[f64], vals: &[f64], t: f64) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    let mut lo = 0;
    for hi in 0..xs.len() {
        while maxq.back().is_some_and(|&i| vals[i] <= vals[hi]) {
            maxq.pop_back();
        }
        maxq.push_back(hi);
        while minq.back().is_some_and(|&i| vals[i] >= vals[hi]) {
            minq.pop_back();
        }
        minq.push_back(hi);
        while xs[hi] - xs[lo] > t {
            lo += 1;
            if maxq.front() == Some(&(lo - 1)) {
                maxq.pop_front();
            }
            if minq.front() == Some(&(lo - 1)) {
                minq.pop_front();
            }
        }
        best = best.max(vals[*maxq.front().unwrap()] - vals[*minq.front().unwrap()]);
    }
    best
}

/// Estimates `ω` on `t_grid` and classifies the density as Dini continuous or not.
///
/// The verdict comes from the growth of partial integrals `∫_t ω(s)/s ds` as the lower
/// limit shrinks: their increments are treated as a series in `|ln t|`.
pub fn dini_report<T: Real>(profile: &DensityProfile<T>, t_grid: &[f64]) -> DiniReport {
    let mut grid: Vec<f64> = t_grid.iter().copied().filter(|t| t.is_finite() && *t > 0.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let xs = sample_points(profile, &grid);
    let vals: Vec<f64> = xs.iter().map(|&x| profile.eval_unchecked(T::lit(x)).as_f64()).collect();

    let mut modulus = vec![(0.0, 0.0)];
    let mut running = 0.0f64;
    for &t in &grid {
        running = running.max(modulus_at(&xs, &vals, t));
        modulus.push((t, running));
    }

    // exact for ω linear between grid points
    let mut partial = Vec::with_capacity(grid.len());
    let mut increments = Vec::new();
    let mut scales = Vec::new();
    let mut acc = 0.0;
    if let Some(&(t_last, _)) = modulus.last() {
        partial.push((t_last, 0.0));
    }
    for w in modulus[1..].windows(2).rev() {
        let ((a, wa), (b, wb)) = (w[0], w[1]);
        let slope = (wb - wa) / (b - a);
        let piece = (wa - slope * a) * (b / a).ln() + slope * (b - a);
        acc += piece;
        partial.push((a, acc));
        increments.push(piece / (b / a).ln());
        scales.push(a.ln().abs());
    }
    let remainder = modulus.get(1).map_or(0.0, |m| m.1);
    let integral = acc + remainder;

    let fit = classify_tail(&scales, &increments);
    let classification = match fit.as_ref().map(|f| f.verdict) {
        Some(Verdict::Convergent) => DiniClass::Dini,
        Some(Verdict::Divergent) => DiniClass::NotDini,
        _ if increments.iter().all(|&i| i == 0.0) && !increments.is_empty() => DiniClass::Dini,
        _ => DiniClass::Inconclusive,
    };
    DiniReport {
        modulus,
        integral,
        diverged: classification == DiniClass::NotDini,
        partial_integrals: partial,
        fit,
        classification,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lipschitz_profile_is_dini() {
        let rep = dini_report(&DensityProfile::<f64>::lebesgue(), &log_grid(1e-12, 1.0, 120));
        assert_eq!(rep.classification, DiniClass::Dini);
        assert_relative_eq!(rep.integral, 1.0, max_relative = 1e-6);
        for (t, w) in &rep.modulus {
            assert_relative_eq!(*w, *t, max_relative = 1e-9);
        }
    }

    #[test]
    fn holder_profile_is_dini() {
        let p = DensityProfile::power(0.5, 1.0).unwrap();
        let rep = dini_report(&p, &log_grid(1e-12, 1.0, 120));
        assert_eq!(rep.classification, DiniClass::Dini);
        assert_relative_eq!(rep.integral, 2.0, max_relative = 1e-2);
    }

    #[test]
    fn log_modulus_is_not_dini() {
        let samples: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
            .chain((0..=400).rev().map(|k| {
                let z = (-(k as f64)).exp();
                (z, 1.0 / (-z.ln()).max(1.0))
            }))
            .collect();
        let p = DensityProfile::tabulated(samples).unwrap();
        let rep = dini_report(&p, &log_grid(1e-150, 1.0, 200));
        assert_eq!(rep.classification, DiniClass::NotDini);
        assert!(rep.diverged);
    }

    #[test]
    fn modulus_is_monotone() {
        let p = DensityProfile::tabulated(vec![(0.0, 0.0), (0.3, 2.0), (0.6, 0.5), (1.0, 1.0)]).unwrap();
        let rep = dini_report(&p, &log_grid(1e-6, 1.0, 40));
        assert!(rep.modulus.windows(2).all(|w| w[1].1 >= w[0].1));
        assert_eq!(rep.modulus[0], (0.0, 0.0));
    }
}
