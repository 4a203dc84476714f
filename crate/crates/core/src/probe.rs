//! Values of a solution along paths running into the cusp tip at the origin.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::Level;
use crate::error::{Error, Result};
use crate::fem::{two_constant_oracle, BoundaryData, Datum, SolutionField};
use crate::mesh::CrossSection;
use crate::scalar::Real;
use crate::wos::{estimate_meridian, MeridianDomain};

pub const DEFAULT_FACTOR: f64 = 0.5;
pub const DEFAULT_STATIONS: usize = 10;
/// Distance of the first station from the origin on level curves, which reach well above the tip.
pub const DEFAULT_LEVEL_START: f64 = 1.0;
/// Distance of the first station from the origin on other paths.
pub const DEFAULT_START: f64 = 0.25;
/// Shell width of walks started at a station, relative to the station's boundary distance.
pub const STATION_EPS_FACTOR: f64 = 0.01;
/// Stations at the end of a path used for the spread and the floor.
pub const TAIL_STATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathKind {
    /// Along the level curve `V = c` for `V(0,0) < c < B`.
    LevelCurve { c: f64 },
    /// Down the axis below the origin.
    AxisBelow,
    /// Straight in along the direction at `polar` radians from the positive `z` axis.
    Ray { polar: f64 },
}

impl PathKind {
    pub fn label(&self) -> String {
        match self {
            PathKind::LevelCurve { c } => format!("level-{c}"),
            PathKind::AxisBelow => "axis-below".into(),
            PathKind::Ray { polar } => format!("ray-{polar}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    #[serde(rename = "path")]
    pub kind: PathKind,
    /// First station distance; defaults depend on the path kind.
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default = "default_stations")]
    pub stations: usize,
}

fn default_factor() -> f64 {
    DEFAULT_FACTOR
}
fn default_stations() -> usize {
    DEFAULT_STATIONS
}

impl PathSpec {
    pub fn new(kind: PathKind) -> Self {
        Self { kind, start: None, factor: DEFAULT_FACTOR, stations: DEFAULT_STATIONS }
    }

    pub fn start_distance(&self) -> f64 {
        self.start.unwrap_or(match self.kind {
            PathKind::LevelCurve { .. } => DEFAULT_LEVEL_START,
            _ => DEFAULT_START,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::Input(format!("station factor must lie in (0, 1), got {}", self.factor)));
        }
        let start = self.start_distance();
        if !(start > 0.0 && start.is_finite()) {
            return Err(Error::Input(format!("start distance must be positive, got {start}")));
        }
        if self.stations == 0 {
            return Err(Error::Input("a path needs at least one station".into()));
        }
        Ok(())
    }
}

/// Where sampled values come from.
pub enum Source<'a, T: Real> {
    /// The exact solution for constant data `alpha` on `Γ_A` and `beta` on `Γ_B`.
    Oracle {
        alpha: T,
        beta: T,
    },
    /// Interpolated finite element solution; refused inside the truncation zone.
    Fem(&'a SolutionField<'a, T>),
    Wos {
        domain: &'a MeridianDomain<'a, T>,
        walks: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbePath {
    pub kind: PathKind,
    /// `(r, z)` per station.
    pub stations: Vec<(f64, f64)>,
    /// Distance of each station from the origin.
    pub distances: Vec<f64>,
    pub values: Vec<f64>,
    /// Standard errors for Monte Carlo values, zero otherwise.
    pub stderrs: Vec<f64>,
    /// Value at the last station.
    pub limit: f64,
    /// `max − min` over the last stations.
    pub spread: f64,
}

/// Point on `L_c` at distance `d` from the origin.
fn level_point<T: Real>(level: &Level<'_, T>, d: T) -> Result<(T, T)> {
    let z2 = level.crossings().z2;
    if !(d < z2) {
        return Err(Error::Domain(format!("level {} does not reach distance {d} from the origin", level.value())));
    }
    // hypot(r_c(z), z) rises from 0 at the tip to at least d at z = d
    let (mut lo, mut hi) = (T::zero(), d);
    let dist = |z: T| -> Result<T> { Ok(level.radius_at(z)?.hypot(z)) };
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if dist(mid)? < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = T::lit(0.5) * (lo + hi);
    Ok((level.radius_at(z)?, z))
}

/// Station positions of a path.
pub fn path_stations<T: Real>(cs: &CrossSection<T>, spec: &PathSpec) -> Result<Vec<(T, T)>> {
    spec.validate()?;
    let distances: Vec<T> =
        (0..spec.stations).map(|k| T::lit(spec.start_distance() * spec.factor.powi(k as i32))).collect();
    let points: Vec<(T, T)> = match spec.kind {
        PathKind::LevelCurve { c } => {
            let c = T::lit(c);
            let field = cs.field();
            if !(c > field.v00() && c < cs.b) {
                return Err(Error::Input(format!(
                    "only levels between V(0,0) = {} and B = {} reach the origin, got {c}",
                    field.v00(),
                    cs.b
                )));
            }
            let level = Level::new(field, c)?;
            distances.iter().map(|&d| level_point(&level, d)).collect::<Result<_>>()?
        }
        PathKind::AxisBelow => distances.iter().map(|&d| (T::zero(), -d)).collect(),
        PathKind::Ray { polar } => {
            let p = T::lit(polar);
            distances.iter().map(|&d| (d * p.sin(), d * p.cos())).collect()
        }
    };
    for &(r, z) in &points {
        if !(r >= T::zero()) || !cs.contains(r, z) {
            return Err(Error::Domain(format!(
                "station ({r}, {z}) of path {} is outside the domain",
                spec.kind.label()
            )));
        }
    }
    Ok(points)
}

fn station_seed(seed: u64, station: usize) -> u64 {
    // splitmix64 step keyed by the station index
    let mut x = seed ^ (station as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Shell width for walks started at `(r, z)`.
pub fn station_eps<T: Real>(domain: &MeridianDomain<'_, T>, r: T, z: T) -> Result<T> {
    Ok(domain.default_eps().min(T::lit(STATION_EPS_FACTOR) * domain.distance_to_boundary(r, z)?))
}

/// Evaluates `source` at the stations of `spec`.
pub fn sample_path<T: Real>(cs: &CrossSection<T>, source: &Source<'_, T>, spec: &PathSpec) -> Result<ProbePath> {
    let points = path_stations(cs, spec)?;
    let (values, stderrs): (Vec<f64>, Vec<f64>) = match source {
        Source::Oracle { alpha, beta } => {
            let v = two_constant_oracle(cs.field(), cs.a, cs.b, *alpha, *beta, &points)?;
            (v.iter().map(|x| x.as_f64()).collect(), vec![0.0; points.len()])
        }
        Source::Fem(sol) => {
            let z_cut = sol.mesh.z_cut.unwrap_or(cs.z_cut);
            let mut out = Vec::with_capacity(points.len());
            for &(r, z) in &points {
                if z.abs() < T::lit(2.0) * z_cut {
                    return Err(Error::Domain(format!(
                        "station ({r}, {z}) lies in the truncation zone |z| < {}",
                        T::lit(2.0) * z_cut
                    )));
                }
                out.push(sol.interpolate(r, z)?.as_f64());
            }
            let n = out.len();
            (out, vec![0.0; n])
        }
        Source::Wos { domain, walks, seed } => {
            let est: Vec<Result<(f64, f64)>> = points
                .par_iter()
                .enumerate()
                .map(|(k, &(r, z))| {
                    let eps = station_eps(domain, r, z)?;
                    let e = estimate_meridian(*domain, r, z, *walks, eps, station_seed(*seed, k))?;
                    Ok((e.mean, e.stderr))
                })
                .collect();
            est.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip()
        }
    };
    let tail = &values[values.len().saturating_sub(TAIL_STATIONS)..];
    let spread =
        tail.iter().copied().fold(f64::NEG_INFINITY, f64::max) - tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ProbePath {
        kind: spec.kind,
        stations: points.iter().map(|&(r, z)| (r.as_f64(), z.as_f64())).collect(),
        distances: points.iter().map(|&(r, z)| r.hypot(z).as_f64()).collect(),
        limit: *values.last().expect("at least one station"),
        values,
        stderrs,
        spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitClass {
    RegularLike,
    SemiregularLike,
    StronglyIrregularLike,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitSet {
    pub lo: f64,
    pub hi: f64,
    pub limits: Vec<(String, f64)>,
    pub datum: f64,
    pub tolerance: f64,
    pub classification: LimitClass,
}

pub const DEFAULT_LIMIT_TOL: f64 = 0.01;

/// Interval spanned by the path limits, classified against the datum at the tip.
pub fn limit_set_estimate(paths: &[ProbePath], datum: f64, tolerance: f64) -> Result<LimitSet> {
    if paths.len() < 3 {
        return Err(Error::Input(format!("need at least 3 paths, got {}", paths.len())));
    }
    let lo = paths.iter().map(|p| p.limit).fold(f64::INFINITY, f64::min);
    let hi = paths.iter().map(|p| p.limit).fold(f64::NEG_INFINITY, f64::max);
    let classification = if hi - lo > tolerance {
        LimitClass::StronglyIrregularLike
    } else if (0.5 * (lo + hi) - datum).abs() <= tolerance {
        LimitClass::RegularLike
    } else {
        LimitClass::SemiregularLike
    };
    Ok(LimitSet {
        lo,
        hi,
        limits: paths.iter().map(|p| (p.kind.label(), p.limit)).collect(),
        datum,
        tolerance,
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlocalityVerdict {
    NonVanishing,
    Vanishing,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationValue {
    pub r: f64,
    pub z: f64,
    pub value: f64,
    pub stderr: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelProbe {
    pub c: f64,
    pub stations: Vec<StationValue>,
    /// Smallest `value − 3·stderr` over the last stations.
    pub floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonlocalityReport {
    pub levels: Vec<LevelProbe>,
    pub floor: f64,
    pub walks: usize,
    pub seed: u64,
    pub verdict: NonlocalityVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalitySpec {
    /// Height of the first station.
    pub z_start: f64,
    /// Lowest station height.
    pub z_min: f64,
    pub factor: f64,
    pub walks: usize,
    pub seed: u64,
}

impl Default for NonlocalitySpec {
    fn default() -> Self {
        Self { z_start: 0.64, z_min: 0.02, factor: DEFAULT_FACTOR, walks: 20_000, seed: 0x5EED }
    }
}

/// Walk-on-spheres values of the solution with `data` along level curves running into
/// the tip; the data must vanish near the tip.
pub fn nonlocality_experiment<T: Real>(
    cs: &CrossSection<T>,
    data: &BoundaryData<T>,
    levels: &[f64],
    spec: &NonlocalitySpec,
) -> Result<NonlocalityReport> {
    if levels.is_empty() {
        return Err(Error::Input("no probe levels given".into()));
    }
    if !(spec.z_min > 0.0 && spec.z_start >= spec.z_min && spec.factor > 0.0 && spec.factor < 1.0) {
        return Err(Error::Input(format!(
            "need 0 < z_min <= z_start and factor in (0, 1), got z_min {}, z_start {}, factor {}",
            spec.z_min, spec.z_start, spec.factor
        )));
    }
    if let Datum::Bump { amplitude, .. } = &data.outer {
        if *amplitude < T::zero() {
            return Err(Error::Input("bump amplitude must be non-negative".into()));
        }
    }
    let domain = MeridianDomain::new(cs, data)?;
    let field = cs.field();
    let mut heights = Vec::new();
    let mut z = spec.z_start;
    while z >= spec.z_min * (1.0 - 1e-12) {
        heights.push(z);
        z *= spec.factor;
    }
    let mut out = Vec::with_capacity(levels.len());
    for (li, &c) in levels.iter().enumerate() {
        let ct = T::lit(c);
        if !(ct > field.v00() && ct < cs.b) {
            return Err(Error::Input(format!("probe level {c} must lie between V(0,0) and B")));
        }
        let level = Level::new(field, ct)?;
        let stations: Vec<Result<StationValue>> = heights
            .par_iter()
            .enumerate()
            .map(|(k, &z)| {
                let zt = T::lit(z);
                let r = level.radius_at(zt)?;
                let eps = station_eps(&domain, r, zt)?;
                let e = estimate_meridian(&domain, r, zt, spec.walks, eps, station_seed(spec.seed, li * 1000 + k))?;
                Ok(StationValue { r: r.as_f64(), z, value: e.mean, stderr: e.stderr, eps: e.eps })
            })
            .collect();
        let stations = stations.into_iter().collect::<Result<Vec<_>>>()?;
        let tail = &stations[stations.len().saturating_sub(TAIL_STATIONS)..];
        let floor = tail.iter().map(|s| s.value - 3.0 * s.stderr).fold(f64::INFINITY, f64::min);
        out.push(LevelProbe { c, stations, floor });
    }
    let floor = out.iter().map(|l| l.floor).fold(f64::INFINITY, f64::min);
    Ok(NonlocalityReport {
        levels: out,
        floor,
        walks: spec.walks,
        seed: spec.seed,
        verdict: if floor > 0.0 { NonlocalityVerdict::NonVanishing } else { NonlocalityVerdict::Vanishing },
    })
}

/// Bump of the given amplitude centred halfway along `Γ_A`, a quarter of its length wide.
pub fn outer_bump<T: Real>(cs: &CrossSection<T>, amplitude: T) -> BoundaryData<T> {
    let pts = cs.outer.points();
    let len = pts.windows(2).fold(T::zero(), |s, w| s + (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1));
    BoundaryData {
        outer: Datum::Bump { center: T::lit(0.5) * len, width: T::lit(0.25) * len, amplitude },
        inner: Datum::constant(T::zero()),
        cap: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_cross_section;
    use crate::potential::PotentialField;

    fn canonical() -> CrossSection<f64> {
        build_cross_section(&PotentialField::lebesgue(), 0.5, 2.0, None).unwrap()
    }

    fn oracle() -> Source<'static, f64> {
        Source::Oracle { alpha: 0.5, beta: 2.0 }
    }

    #[test]
    fn level_path_returns_its_level() {
        let cs = canonical();
        let p = sample_path(&cs, &oracle(), &PathSpec::new(PathKind::LevelCurve { c: 1.5 })).unwrap();
        assert_eq!(p.values.len(), 10);
        for v in &p.values {
            assert!((v - 1.5).abs() < 1e-12, "{v}");
        }
        for (k, d) in p.distances.iter().enumerate() {
            assert!((d / 0.5f64.powi(k as i32) - 1.0).abs() < 1e-9);
        }
        assert!(p.distances.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn axis_path_tends_to_centre_value() {
        let cs = canonical();
        let p = sample_path(&cs, &oracle(), &PathSpec::new(PathKind::AxisBelow)).unwrap();
        assert!((p.limit - 1.0).abs() < 0.01, "{}", p.limit);
        assert!(p.values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn canonical_limit_set_is_strongly_irregular() {
        let cs = canonical();
        let mut paths = vec![sample_path(&cs, &oracle(), &PathSpec::new(PathKind::AxisBelow)).unwrap()];
        for c in [1.25, 1.5, 1.75, 1.95] {
            paths.push(sample_path(&cs, &oracle(), &PathSpec::new(PathKind::LevelCurve { c })).unwrap());
        }
        let set = limit_set_estimate(&paths, 2.0, DEFAULT_LIMIT_TOL).unwrap();
        assert!((set.lo - 1.0).abs() < 0.01 && (set.hi - 1.95).abs() < 0.01, "{set:?}");
        assert_eq!(set.classification, LimitClass::StronglyIrregularLike);
    }

    #[test]
    fn constant_data_is_regular_like() {
        let cs = canonical();
        let src = Source::Oracle { alpha: 0.7, beta: 0.7 };
        let paths: Vec<_> = [PathKind::AxisBelow, PathKind::LevelCurve { c: 1.2 }, PathKind::LevelCurve { c: 1.8 }]
            .iter()
            .map(|&k| sample_path(&cs, &src, &PathSpec::new(k)).unwrap())
            .collect();
        let set = limit_set_estimate(&paths, 0.7, DEFAULT_LIMIT_TOL).unwrap();
        assert_eq!((set.lo, set.hi), (0.7, 0.7));
        assert_eq!(set.classification, LimitClass::RegularLike);
        assert!(matches!(limit_set_estimate(&paths[..2], 0.7, 0.01), Err(Error::Input(_))));
    }

    #[test]
    fn low_levels_and_exterior_rays_are_refused() {
        let cs = canonical();
        assert!(matches!(
            sample_path(&cs, &oracle(), &PathSpec::new(PathKind::LevelCurve { c: 0.8 })),
            Err(Error::Input(_))
        ));
        // straight up from the tip runs along the rod
        assert!(matches!(
            sample_path(&cs, &oracle(), &PathSpec::new(PathKind::Ray { polar: 0.0 })),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn wos_station_matches_oracle() {
        let cs = canonical();
        let domain = MeridianDomain::new(&cs, &BoundaryData::constants(0.5, 2.0)).unwrap();
        let spec = PathSpec { kind: PathKind::AxisBelow, start: Some(0.2), factor: 0.5, stations: 1 };
        let w = sample_path(&cs, &Source::Wos { domain: &domain, walks: 20_000, seed: 3 }, &spec).unwrap();
        let o = sample_path(&cs, &oracle(), &spec).unwrap();
        assert!((w.limit - o.limit).abs() < 3.0 * w.stderrs[0], "{} vs {}", w.limit, o.limit);
    }

    #[test]
    fn zero_bump_vanishes_and_amplitude_is_linear() {
        let cs = canonical();
        let spec = NonlocalitySpec { z_start: 0.16, z_min: 0.08, walks: 2_000, ..Default::default() };
        let zero = nonlocality_experiment(&cs, &outer_bump(&cs, 0.0), &[1.5], &spec).unwrap();
        assert!(zero.levels[0].stations.iter().all(|s| s.value == 0.0));
        assert_eq!(zero.verdict, NonlocalityVerdict::Vanishing);
        let one = nonlocality_experiment(&cs, &outer_bump(&cs, 1.0), &[1.5], &spec).unwrap();
        let two = nonlocality_experiment(&cs, &outer_bump(&cs, 2.0), &[1.5], &spec).unwrap();
        for (a, b) in one.levels[0].stations.iter().zip(&two.levels[0].stations) {
            assert!((b.value - 2.0 * a.value).abs() <= 1e-12 * b.value.abs().max(1.0));
        }
    }
}
