//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. Caller-supplied
//! breakpoints seed the initial partition, which is how near-singular points of
//! an integrand are placed at interval ends where the Kronrod nodes never sample.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

// Kronrod nodes and weights to the digits they are usually quoted with.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadratureOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::default_tol(),
            abs_tol: T::min_positive_value().sqrt() * T::epsilon(),
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.as_f64().total_cmp(&other.error.as_f64())
    }
}

/// One 15-point Kronrod evaluation with the QUADPACK error heuristic.
fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = T::lit(WGK[j]);
        res_k += wk * (f1 + f2);
        res_abs += wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc += T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half_len;
    let res_abs = res_abs * half_len.abs();
    let res_asc = res_asc * half_len.abs();
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && err != T::zero() {
        let scaled = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * scaled.min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        err = err.max(floor);
    }
    Segment { a, b, value, error: err }
}

/// Integrates `f` over `[a, b]`, starting from the partition given by `breakpoints`
/// (points outside `(a, b)` are ignored).
///
/// A non-finite sample or an exhausted subdivision budget yields
/// [`Error::Accuracy`] carrying the best estimate.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    opts: &QuadratureOptions<T>,
) -> Result<QuadResult<T>> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Input(format!("invalid integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: T::zero(), intervals: 0 });
    }
    let mut nodes = vec![a];
    let mut inner: Vec<T> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(|x, y| x.as_f64().total_cmp(&y.as_f64()));
    inner.dedup();
    nodes.extend(inner);
    nodes.push(b);

    let mut heap = BinaryHeap::with_capacity(nodes.len() * 2);
    for w in nodes.windows(2) {
        heap.push(gk15(&f, w[0], w[1]));
    }
    let budget = opts.max_subdivisions + nodes.len();
    loop {
        let (value, error) = heap.iter().fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Accuracy {
                message: "integrand produced a non-finite value".into(),
                estimate: value.as_f64(),
                error_bound: error.as_f64(),
            });
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult { value, error, intervals: heap.len() });
        }
        let worst = heap.peek().copied().expect("non-empty partition");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        let unsplittable = !(mid > worst.a && mid < worst.b);
        if heap.len() >= budget || unsplittable {
            return Err(Error::Accuracy {
                message: format!(
                    "adaptive quadrature stopped after {} intervals without reaching tolerance",
                    heap.len()
                ),
                estimate: value.as_f64(),
                error_bound: error.as_f64(),
            });
        }
        heap.pop();
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x, 0.0, 2.0, &[], &Default::default()).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 6.0, max_relative = 1e-14);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // integral of x^{-1/2} over (0,1] is 2
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &[], &Default::default()).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn near_singular_peak_at_breakpoint() {
        // Lorentzian of width 1e-6 centred at 0.3: arctan form
        let w = 1e-6;
        let f = |x: f64| w / ((x - 0.3).powi(2) + w * w);
        let exact = (0.7f64 / w).atan() + (0.3f64 / w).atan();
        let r = integrate(f, 0.0, 1.0, &[0.3], &Default::default()).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadratureOptions { max_subdivisions: 2, ..Default::default() };
        match integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &[], &opts) {
            Err(Error::Accuracy { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_and_reversed_intervals() {
        assert_eq!(integrate(|x: f64| x, 1.0, 1.0, &[], &Default::default()).unwrap().value, 0.0);
        assert!(matches!(integrate(|x: f64| x, 1.0, 0.0, &[], &Default::default()), Err(Error::Input(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let r = integrate(|x: f32| x.cos(), 0.0, 1.0, &[], &Default::default()).unwrap();
        assert!((r.value - 1f32.sin()).abs() < 1e-6);
    }
}
