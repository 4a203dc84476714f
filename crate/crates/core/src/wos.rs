//! Walk-on-spheres estimates of harmonic functions with Dirichlet data.
//!
//! Walkers move in three dimensions; for the axisymmetric domain the distance to the
//! boundary is the meridian distance from `(r, z)` to the traced level curves, since the
//! nearest point of a surface of revolution lies in the half-plane through the query.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::Serialize;

use crate::contour::Level;
use crate::error::{Error, Result};
use crate::fem::{BoundaryData, Datum};
use crate::mesh::{column_angles, node_on_level, CrossSection};
use crate::scalar::Real;

/// Steps after which a walk is abandoned and counted as discarded.
pub const MAX_STEPS: usize = 100_000;
/// Largest tolerated fraction of discarded walks.
pub const MAX_DISCARD_FRACTION: f64 = 0.01;
/// Walks per random stream.
pub const BLOCK_WALKS: usize = 1000;
/// Default shell width as a fraction of the domain scale.
pub const DEFAULT_EPS_FACTOR: f64 = 1e-4;

/// A region the walker can move in.
pub trait WalkDomain<T: Real>: Sync {
    fn contains(&self, p: [T; 3]) -> bool;
    /// Distance from an interior point to the boundary, or a lower bound for it.
    fn distance(&self, p: [T; 3]) -> T;
    /// Boundary datum at the boundary point nearest to `p`.
    fn score(&self, p: [T; 3]) -> Result<T>;
    /// Characteristic length, used for the default shell width.
    fn scale(&self) -> T;
    /// Distance to the boundary and the shell width in force at `p`.
    fn distance_and_shell(&self, p: [T; 3], eps: T) -> (T, T) {
        (self.distance(p), eps)
    }
}

fn default_eps<T: Real, D: WalkDomain<T>>(domain: &D) -> T {
    T::lit(DEFAULT_EPS_FACTOR) * domain.scale()
}

#[derive(Debug, Clone, Copy)]
struct Aabb<T> {
    lo: (T, T),
    hi: (T, T),
}

impl<T: Real> Aabb<T> {
    fn of_segment(a: (T, T), b: (T, T)) -> Self {
        Self { lo: (a.0.min(b.0), a.1.min(b.1)), hi: (a.0.max(b.0), a.1.max(b.1)) }
    }

    fn union(self, o: Self) -> Self {
        Self { lo: (self.lo.0.min(o.lo.0), self.lo.1.min(o.lo.1)), hi: (self.hi.0.max(o.hi.0), self.hi.1.max(o.hi.1)) }
    }

    fn dist2(&self, p: (T, T)) -> T {
        let dx = (self.lo.0 - p.0).max(p.0 - self.hi.0).max(T::zero());
        let dy = (self.lo.1 - p.1).max(p.1 - self.hi.1).max(T::zero());
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone)]
enum Node<T> {
    Leaf { bounds: Aabb<T>, first: usize, count: usize },
    Inner { bounds: Aabb<T>, left: usize, right: usize },
}

impl<T: Real> Node<T> {
    fn bounds(&self) -> &Aabb<T> {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Nearest point on a set of tagged polylines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest<T> {
    pub distance: T,
    /// Index of the polyline.
    pub curve: usize,
    /// Arc length of the nearest point along its polyline.
    pub arc: T,
    /// The nearest point, `(r, z)`.
    pub point: (T, T),
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: (T, T),
    b: (T, T),
    curve: usize,
    /// Arc length at `a`.
    arc: T,
}

impl<T: Real> Segment<T> {
    /// Squared distance from `p` and the parameter of the closest point.
    fn closest(&self, p: (T, T)) -> (T, T) {
        let d = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len2 = d.0 * d.0 + d.1 * d.1;
        let t = if len2 > T::zero() {
            (((p.0 - self.a.0) * d.0 + (p.1 - self.a.1) * d.1) / len2).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let q = (self.a.0 + t * d.0, self.a.1 + t * d.1);
        let (dx, dy) = (p.0 - q.0, p.1 - q.1);
        (dx * dx + dy * dy, t)
    }

    fn centroid(&self) -> (T, T) {
        (T::lit(0.5) * (self.a.0 + self.b.0), T::lit(0.5) * (self.a.1 + self.b.1))
    }
}

const LEAF_SIZE: usize = 4;

/// Bounding-volume hierarchy over the segments of several polylines in the `(r, z)` plane.
#[derive(Debug, Clone)]
pub struct SegmentTree<T> {
    segments: Vec<Segment<T>>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> SegmentTree<T> {
    /// Builds the tree over polylines given as ordered `(r, z)` vertices.
    pub fn new(curves: &[Vec<(T, T)>]) -> Result<Self> {
        let mut segments = Vec::new();
        for (ci, pts) in curves.iter().enumerate() {
            if pts.len() < 2 {
                return Err(Error::Input(format!("polyline {ci} needs at least two vertices")));
            }
            let mut s = T::zero();
            for w in pts.windows(2) {
                if w.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                    return Err(Error::Input(format!("polyline {ci} has a non-finite vertex")));
                }
                let len = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
                segments.push(Segment { a: w[0], b: w[1], curve: ci, arc: s });
                s += len;
            }
        }
        let mut tree = Self { segments, nodes: Vec::new() };
        let n = tree.segments.len();
        tree.build(0, n);
        Ok(tree)
    }

    fn build(&mut self, first: usize, count: usize) -> usize {
        let bounds = self.segments[first..first + count]
            .iter()
            .map(|s| Aabb::of_segment(s.a, s.b))
            .reduce(Aabb::union)
            .expect("non-empty range");
        if count <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, first, count });
            return self.nodes.len() - 1;
        }
        let wide_r = bounds.hi.0 - bounds.lo.0 > bounds.hi.1 - bounds.lo.1;
        let key = |s: &Segment<T>| {
            let c = s.centroid();
            if wide_r {
                c.0
            } else {
                c.1
            }
        };
        let mid = count / 2;
        self.segments[first..first + count]
            .select_nth_unstable_by(mid, |a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { bounds, first, count });
        let left = self.build(first, mid);
        let right = self.build(first + mid, count - mid);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    pub fn nearest(&self, p: (T, T)) -> Nearest<T> {
        let mut best = (T::infinity(), 0usize, T::zero());
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds().dist2(p) >= best.0 {
                continue;
            }
            match *node {
                Node::Leaf { first, count, .. } => {
                    for (k, s) in self.segments[first..first + count].iter().enumerate() {
                        let (d2, t) = s.closest(p);
                        if d2 < best.0 {
                            best = (d2, first + k, t);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let (dl, dr) = (self.nodes[left].bounds().dist2(p), self.nodes[right].bounds().dist2(p));
                    // visit the closer child first
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        let s = &self.segments[best.1];
        let len = (s.b.0 - s.a.0).hypot(s.b.1 - s.a.1);
        let point = (s.a.0 + best.2 * (s.b.0 - s.a.0), s.a.1 + best.2 * (s.b.1 - s.a.1));
        Nearest { distance: best.0.sqrt(), curve: s.curve, arc: s.arc + best.2 * len, point }
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }
}

/// Columns used to resample each level curve by field-line angle.
const ANGLE_SAMPLES: usize = 512;

/// Dense polyline of the level curve `L_c` from its upper axis crossing downwards.
///
/// Merges the traced stations with points equally spaced in field-line angle, which
/// resolve the curve where it meets the axis. Cusped levels also get stations every 3%
/// in `z` down to `1e-4` so the thin inner spike is followed closely.
pub fn level_polyline<T: Real>(cs: &CrossSection<T>, c: T) -> Result<Vec<(T, T)>> {
    let field = cs.field();
    let curve = if c == cs.a {
        &cs.outer
    } else if c == cs.b {
        &cs.inner
    } else {
        return Err(Error::Input(format!("{c} is not a bounding level of the cross-section")));
    };
    let level = Level::new(field, c)?;
    let (z1, z2) = (curve.z1, curve.z2);
    let mut pts: Vec<(T, T)> = curve.points().into_iter().map(|(z, r)| (r, z)).collect();

    let cusped = c >= field.v00();
    let span = z2 - z1;
    let lo = if cusped { level.z_where_radius(T::lit(1e-8) * field.rod_length())? } else { z1 + T::lit(1e-9) * span };
    for theta in column_angles::<T>(ANGLE_SAMPLES).into_iter().skip(1) {
        if let Ok(p) = node_on_level(&level, lo, z2, theta) {
            pts.push(p);
        }
    }
    if cusped {
        let mut z = T::lit(0.2).min(T::lit(0.5) * z2);
        while z > T::lit(1e-4) {
            if let Ok(r) = level.radius_at(z) {
                pts.push((r, z));
            }
            z *= T::lit(0.97);
        }
    }
    pts.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup_by(|a, b| a.1 == b.1);
    Ok(pts)
}

/// The axisymmetric domain between `Γ_A` and `Γ_B` with data on both components.
#[derive(Debug, Clone)]
pub struct MeridianDomain<'c, T: Real> {
    cs: &'c CrossSection<T>,
    tree: SegmentTree<T>,
    outer: Datum<T>,
    inner: Datum<T>,
    scale: T,
    /// Height of the widest point of a cusped inner level; below it the spike narrows to the tip.
    spike_top: Option<T>,
}

/// Along the inner spike the shell is at most this fraction of the local spike radius.
pub const SPIKE_SHELL_FRACTION: f64 = 0.01;
/// Smallest shell width on the spike, as a fraction of the domain scale.
pub const SPIKE_SHELL_FLOOR: f64 = 1e-10;

impl<'c, T: Real> MeridianDomain<'c, T> {
    /// Polylines for both bounding levels; the data must have an arc-length form.
    pub fn new(cs: &'c CrossSection<T>, data: &BoundaryData<T>) -> Result<Self> {
        data.validate()?;
        for d in [&data.outer, &data.inner] {
            if matches!(d, Datum::Tabulated { .. }) {
                return Err(Error::Input("walk-on-spheres needs constant or bump data, not tabulated values".into()));
            }
        }
        let inner = level_polyline(cs, cs.b)?;
        let spike_top = (cs.b >= cs.field().v00())
            .then(|| inner.iter().copied().fold((T::zero(), T::zero()), |m, p| if p.0 > m.0 { p } else { m }).1);
        let tree = SegmentTree::new(&[level_polyline(cs, cs.a)?, inner])?;
        Ok(Self {
            cs,
            tree,
            outer: data.outer.clone(),
            inner: data.inner.clone(),
            scale: cs.outer.z2 - cs.outer.z1,
            spike_top,
        })
    }

    pub fn cross_section(&self) -> &CrossSection<T> {
        self.cs
    }

    /// Meridian distance from `(r, z)` to the nearer bounding curve.
    pub fn distance_to_boundary(&self, r: T, z: T) -> Result<T> {
        if !self.cs.contains(r, z) {
            return Err(Error::Domain(format!("({r}, {z}) is outside the domain")));
        }
        Ok(self.tree.nearest((r, z)).distance)
    }

    pub fn nearest(&self, r: T, z: T) -> Nearest<T> {
        self.tree.nearest((r, z))
    }

    pub fn default_eps(&self) -> T {
        default_eps(self)
    }
}

fn meridian<T: Real>(p: [T; 3]) -> (T, T) {
    (p[0].hypot(p[1]), p[2])
}

impl<T: Real> WalkDomain<T> for MeridianDomain<'_, T> {
    fn contains(&self, p: [T; 3]) -> bool {
        let (r, z) = meridian(p);
        self.cs.contains(r, z)
    }

    fn distance(&self, p: [T; 3]) -> T {
        self.tree.nearest(meridian(p)).distance
    }

    fn score(&self, p: [T; 3]) -> Result<T> {
        let hit = self.tree.nearest(meridian(p));
        if hit.curve == 0 {
            self.outer.at_arc(hit.arc)
        } else {
            self.inner.at_arc(hit.arc)
        }
    }

    fn scale(&self) -> T {
        self.scale
    }

    /// A fixed shell would thicken the inner spike to radius `eps` and catch walks the spike
    /// itself lets through, so there the shell follows the spike radius.
    fn distance_and_shell(&self, p: [T; 3], eps: T) -> (T, T) {
        let hit = self.tree.nearest(meridian(p));
        let shell = match self.spike_top {
            Some(top) if hit.curve == 1 && hit.point.1 < top => {
                let local = T::lit(SPIKE_SHELL_FRACTION) * hit.point.0;
                eps.min(local.max(T::lit(SPIKE_SHELL_FLOOR) * self.scale))
            }
            _ => eps,
        };
        (hit.distance, shell)
    }
}

/// Meridian distance from `(r, z)` to `Γ_A ∪ Γ_B`; builds the boundary polylines on each call.
pub fn distance_to_boundary<T: Real>(cs: &CrossSection<T>, r: T, z: T) -> Result<T> {
    MeridianDomain::new(cs, &BoundaryData::constants(cs.a, cs.b))?.distance_to_boundary(r, z)
}

/// Unit ball with data `g` on the sphere, for checking the walker.
pub struct UnitBall<F> {
    pub data: F,
}

impl<T: Real, F: Fn([T; 3]) -> T + Sync> WalkDomain<T> for UnitBall<F> {
    fn contains(&self, p: [T; 3]) -> bool {
        p[0] * p[0] + p[1] * p[1] + p[2] * p[2] < T::one()
    }

    fn distance(&self, p: [T; 3]) -> T {
        T::one() - (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    }

    fn score(&self, p: [T; 3]) -> Result<T> {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if n == T::zero() {
            return Ok((self.data)([T::zero(), T::zero(), T::one()]));
        }
        Ok((self.data)([p[0] / n, p[1] / n, p[2] / n]))
    }

    fn scale(&self) -> T {
        T::one()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WosEstimate {
    /// `(r, z)` of the start point.
    pub point: (f64, f64),
    pub mean: f64,
    /// Sample standard deviation over `√walks`.
    pub stderr: f64,
    /// Completed walks.
    pub walks: usize,
    pub discarded: usize,
    pub mean_steps: f64,
    pub eps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: usize,
    mean: f64,
    m2: f64,
    discarded: usize,
    steps: u64,
}

impl Tally {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Tally) -> Tally {
        let n = self.n + o.n;
        if n == 0 {
            return Tally { discarded: self.discarded + o.discarded, steps: self.steps + o.steps, ..Tally::default() };
        }
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        Tally {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * w,
            discarded: self.discarded + o.discarded,
            steps: self.steps + o.steps,
        }
    }
}

/// One walk from `start`; `None` when the step cap is hit.
fn walk<T: Real, D: WalkDomain<T>>(
    domain: &D,
    start: [T; 3],
    eps: T,
    rng: &mut ChaCha8Rng,
) -> Result<(Option<T>, usize)> {
    let mut p = start;
    for step in 0..MAX_STEPS {
        let (d, shell) = domain.distance_and_shell(p, eps);
        if d <= shell {
            return Ok((Some(domain.score(p)?), step));
        }
        let u: [f64; 3] = UnitSphere.sample(rng);
        for k in 0..3 {
            p[k] += d * T::lit(u[k]);
        }
    }
    Ok((None, MAX_STEPS))
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Walk-on-spheres estimate at `point` with `walks` walks and shell width `eps`.
///
/// Walks are grouped in blocks of [`BLOCK_WALKS`], each with its own ChaCha stream, and
/// reduced in block order, so the result does not depend on the thread count.
pub fn estimate<T: Real, D: WalkDomain<T>>(
    domain: &D,
    point: [T; 3],
    walks: usize,
    eps: T,
    seed: u64,
) -> Result<WosEstimate> {
    if walks < 2 {
        return Err(Error::Input(format!("need at least 2 walks, got {walks}")));
    }
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::Input(format!("shell width must be positive, got {eps}")));
    }
    if !domain.contains(point) {
        let (r, z) = meridian(point);
        return Err(Error::Domain(format!("start point (r, z) = ({r}, {z}) is outside the domain")));
    }
    let blocks = walks.div_ceil(BLOCK_WALKS);
    let tallies: Vec<Result<Tally>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK_WALKS.min(walks - b * BLOCK_WALKS);
            let mut t = Tally::default();
            for _ in 0..count {
                let (score, steps) = walk(domain, point, eps, &mut rng)?;
                t.steps += steps as u64;
                match score {
                    Some(v) => t.push(v.as_f64()),
                    None => t.discarded += 1,
                }
            }
            Ok(t)
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total = total.merge(t?);
    }
    if total.discarded as f64 > MAX_DISCARD_FRACTION * walks as f64 || total.n < 2 {
        return Err(Error::Reliability { discarded: total.discarded, walks });
    }
    let var = total.m2 / (total.n - 1) as f64;
    let (r, z) = meridian(point);
    Ok(WosEstimate {
        point: (r.as_f64(), z.as_f64()),
        mean: total.mean,
        stderr: (var / total.n as f64).sqrt(),
        walks: total.n,
        discarded: total.discarded,
        mean_steps: total.steps as f64 / walks as f64,
        eps: eps.as_f64(),
        seed,
    })
}

/// Estimate at the meridian point `(r, z)`, placed at `(r, 0, z)`.
pub fn estimate_meridian<T: Real, D: WalkDomain<T>>(
    domain: &D,
    r: T,
    z: T,
    walks: usize,
    eps: T,
    seed: u64,
) -> Result<WosEstimate> {
    estimate(domain, [r, T::zero(), z], walks, eps, seed)
}
