//! Meridian cross-section of `{A < V < B}` and its structured triangulation.
//!
//! Rows of the grid are level curves `L_c` for `A = c_0 < … < c_{n-1} = B`; columns are
//! field lines, located by the angle `arccos(ψ / M)` of the stream function `ψ`, which
//! runs from 0 on the axis above the rod to π on the axis below it. Levels above
//! `V(0,0)` wrap the rod down to a cusp at the origin; they are followed until their
//! radius falls to `r_min` and then dropped vertically onto the axis. For the innermost
//! level this vertical drop is the cusp cap at `z_cut`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{stations, trace_contour, AxisCrossings, ContourCurve, Grading, Level};
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryTag {
    OuterLevel,
    InnerLevel,
    CuspCap,
    Axis,
    Interior,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::OuterLevel,
        BoundaryTag::InnerLevel,
        BoundaryTag::CuspCap,
        BoundaryTag::Axis,
        BoundaryTag::Interior,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::OuterLevel => "outer-level",
            BoundaryTag::InnerLevel => "inner-level",
            BoundaryTag::CuspCap => "cusp-cap",
            BoundaryTag::Axis => "axis",
            BoundaryTag::Interior => "interior",
        }
    }

    /// Tags that carry Dirichlet data.
    pub fn is_essential(self) -> bool {
        matches!(self, BoundaryTag::OuterLevel | BoundaryTag::InnerLevel | BoundaryTag::CuspCap)
    }
}

/// Stations traced on each bounding contour of a cross-section.
pub const BOUNDARY_STATIONS: usize = 400;

/// The region between the level curves `Γ_A` and `Γ_B`, with the cusp of `Γ_B` cut at `z_cut`.
#[derive(Debug, Clone, Serialize)]
pub struct CrossSection<T: Real> {
    #[serde(skip)]
    field: PotentialField<T>,
    pub a: T,
    pub b: T,
    pub r_min: T,
    pub z_cut: T,
    /// Full traced `Γ_A`.
    pub outer: ContourCurve<T>,
    /// Full traced `Γ_B`, including the part below `z_cut`.
    pub inner: ContourCurve<T>,
    /// Axis interval below the rod, `(z1(A), 0)`.
    pub axis_lower: (T, T),
    /// Axis interval above the rod, `(z2(B), z2(A))`.
    pub axis_upper: (T, T),
}

impl<T: Real> CrossSection<T> {
    pub fn field(&self) -> &PotentialField<T> {
        &self.field
    }

    /// Whether `(r, z)` lies in `{A < V < B}`.
    pub fn contains(&self, r: T, z: T) -> bool {
        match self.field.value(r, z) {
            Ok(v) => v > self.a && v < self.b,
            Err(_) => false,
        }
    }

    /// Value of `V` at `(r, z)`, or a domain error when the point is outside `{A < V < B}`.
    pub fn interior_value(&self, r: T, z: T) -> Result<T> {
        let v = self.field.value(r, z)?;
        if v > self.a && v < self.b {
            Ok(v)
        } else {
            Err(Error::Domain(format!("({r}, {z}) is outside the domain (V = {v})")))
        }
    }
}

/// Traces `Γ_A` and `Γ_B` and fixes the cusp truncation height.
///
/// `r_min` defaults to `1e-4` times the rod length.
pub fn build_cross_section<T: Real>(
    field: &PotentialField<T>,
    a: T,
    b: T,
    r_min: Option<T>,
) -> Result<CrossSection<T>> {
    let v00 = field.v00();
    if !(a > T::zero() && a < v00 && v00 < b && b.is_finite()) {
        return Err(Error::Input(format!("levels must satisfy 0 < A < V(0,0) = {v00} < B, got A = {a}, B = {b}")));
    }
    let r_min = r_min.unwrap_or_else(|| T::lit(1e-4) * field.rod_length());
    if !(r_min > T::zero() && r_min.is_finite()) {
        return Err(Error::Input(format!("r_min must be positive, got {r_min}")));
    }
    let grading = Grading::default();
    let outer = trace_contour(field, a, BOUNDARY_STATIONS, grading)?;
    let inner = trace_contour(field, b, BOUNDARY_STATIONS, grading)?;
    let z_cut = Level::new(field, b)?.z_where_radius(r_min)?;
    Ok(CrossSection {
        field: field.clone(),
        a,
        b,
        r_min,
        z_cut,
        axis_lower: (outer.z1, T::zero()),
        axis_upper: (inner.z2, outer.z2),
        outer,
        inner,
    })
}

/// Triangle mesh of a meridian region with tagged boundary.
#[derive(Debug, Clone, Serialize)]
pub struct Mesh<T: Real> {
    /// `(r, z)` per node.
    pub nodes: Vec<(T, T)>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<BoundaryTag>,
    pub boundary_edges: Vec<([usize; 2], BoundaryTag)>,
    /// Arc length along the node's boundary component, measured from its upper axis end.
    pub arc: Vec<T>,
    /// Level of each node's grid row, when built from contours.
    pub levels: Vec<T>,
    pub z_cut: Option<T>,
}

fn signed_area<T: Real>(p: (T, T), q: (T, T), s: (T, T)) -> T {
    T::lit(0.5) * ((q.0 - p.0) * (s.1 - p.1) - (s.0 - p.0) * (q.1 - p.1))
}

fn angles<T: Real>(p: (T, T), q: (T, T), s: (T, T)) -> [T; 3] {
    let len = |a: (T, T), b: (T, T)| (a.0 - b.0).hypot(a.1 - b.1);
    let (a, b, c) = (len(q, s), len(p, s), len(p, q));
    let ang =
        |opp: T, x: T, y: T| ((x * x + y * y - opp * opp) / (T::lit(2.0) * x * y)).max(-T::one()).min(T::one()).acos();
    [ang(a, b, c), ang(b, a, c), ang(c, a, b)]
}

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from raw parts; boundary edges are found topologically and tagged from
    /// their endpoint tags (essential tags win over `axis`).
    pub fn from_parts(nodes: Vec<(T, T)>, triangles: Vec<[usize; 3]>, tags: Vec<BoundaryTag>) -> Result<Self> {
        if tags.len() != nodes.len() {
            return Err(Error::Input(format!("{} tags for {} nodes", tags.len(), nodes.len())));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= nodes.len())) {
            return Err(Error::Input(format!("triangle {t:?} references a missing node")));
        }
        let mut mesh = Mesh {
            arc: vec![T::zero(); nodes.len()],
            levels: Vec::new(),
            nodes,
            triangles,
            tags,
            boundary_edges: Vec::new(),
            z_cut: None,
        };
        let edges = mesh.topological_boundary();
        mesh.boundary_edges = edges
            .into_iter()
            .map(|e| {
                let (ta, tb) = (mesh.tags[e[0]], mesh.tags[e[1]]);
                let tag = match (ta, tb) {
                    (x, y) if x == y => x,
                    (BoundaryTag::Axis, y) | (y, BoundaryTag::Axis) => y,
                    (x, y) => x.min(y),
                };
                (e, tag)
            })
            .collect();
        Ok(mesh)
    }

    /// Structured mesh of the rectangle `[r0, r1] × [z0, z1]`; every boundary node is tagged `outer-level`.
    pub fn rectangle(r0: T, r1: T, z0: T, z1: T, nr: usize, nz: usize) -> Result<Self> {
        if nr < 1 || nz < 1 || !(r1 > r0) || !(z1 > z0) || r0 < T::zero() {
            return Err(Error::Input("rectangle needs r1 > r0 >= 0, z1 > z0 and at least one cell per side".into()));
        }
        let id = |i: usize, j: usize| j * (nr + 1) + i;
        let mut nodes = Vec::with_capacity((nr + 1) * (nz + 1));
        let mut tags = Vec::with_capacity(nodes.capacity());
        for j in 0..=nz {
            for i in 0..=nr {
                let r = r0 + (r1 - r0) * T::lit(i as f64 / nr as f64);
                let z = z0 + (z1 - z0) * T::lit(j as f64 / nz as f64);
                nodes.push((r, z));
                let edge = i == 0 || i == nr || j == 0 || j == nz;
                tags.push(if edge { BoundaryTag::OuterLevel } else { BoundaryTag::Interior });
            }
        }
        let mut triangles = Vec::with_capacity(2 * nr * nz);
        for j in 0..nz {
            for i in 0..nr {
                // alternate diagonals for a symmetric pattern
                if (i + j) % 2 == 0 {
                    triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                } else {
                    triangles.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                    triangles.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
        }
        Self::from_parts(nodes, triangles, tags)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    /// Edges used by exactly one triangle, sorted.
    pub fn topological_boundary(&self) -> Vec<[usize; 2]> {
        let mut count: HashMap<[usize; 2], usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *count.entry(edge_key(t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut edges: Vec<[usize; 2]> = count.into_iter().filter(|(_, n)| *n == 1).map(|(e, _)| e).collect();
        edges.sort();
        edges
    }

    /// Indices of nodes carrying `tag`, in increasing order.
    pub fn nodes_with_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.tags[i] == tag).collect()
    }
}

/// Spacing of the intermediate levels between `A` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevelSpacing {
    /// Equal steps in `c`.
    #[default]
    Uniform,
    /// Equal steps in `c` up to `V(0,0)`, then `c − V(0,0)` geometric with the given ratio, densest near `B`.
    GeometricNearB { ratio: f64 },
}

/// Level values of the grid rows, increasing from `A` to `B`.
pub fn grid_levels<T: Real>(a: T, b: T, v00: T, n: usize, spacing: LevelSpacing) -> Vec<T> {
    match spacing {
        LevelSpacing::Uniform => (0..n).map(|i| a + (b - a) * T::lit(i as f64 / (n - 1) as f64)).collect(),
        LevelSpacing::GeometricNearB { ratio } => {
            let frac = ((v00 - a) / (b - a)).as_f64();
            let n_lo = ((n as f64 * frac).round() as usize).clamp(1, n - 2);
            let n_hi = n - n_lo;
            let mut cs: Vec<T> = (0..n_lo).map(|i| a + (v00 - a) * T::lit(i as f64 / n_lo as f64)).collect();
            // gaps toward B shrink by `ratio`
            let q = ratio;
            let weights: Vec<f64> = (0..n_hi).map(|k| q.powi(k as i32)).collect();
            let total: f64 = weights.iter().sum();
            let mut acc = 0.0;
            for w in weights {
                acc += w;
                cs.push(v00 + (b - v00) * T::lit(acc / total));
            }
            cs
        }
    }
}

const COLUMN_RATIO: f64 = 0.7;

/// Angles of the grid columns: 0 and π at the ends, half uniform and half clustered toward π.
///
/// The clustered half always spans the same range of angles as on a 32-column grid, so
/// refinement adds columns without pushing them ever closer to the lower axis.
pub(crate) fn column_angles<T: Real>(n_stations: usize) -> Vec<T> {
    let pi = T::PI();
    let mut out = vec![T::zero()];
    let ratio = COLUMN_RATIO.powf(30.0 / (n_stations - 2) as f64);
    let inner = stations(T::zero(), pi, n_stations - 2, Grading::GeometricTowardZ1 { ratio });
    out.extend(inner.into_iter().rev().map(|s| pi - s));
    out.push(pi);
    out
}

/// A node of one grid row before indexing.
#[derive(Debug, Clone, Copy)]
enum RowNode<T> {
    Point(T, T),
    /// The foot `(z*, 0)` shared by all remaining columns of a truncated row.
    Foot(T),
}

struct Row<T> {
    nodes: Vec<RowNode<T>>,
    /// Column of the truncation point `(z*, r_min)`, for rows above `V(0,0)`.
    trunc: Option<usize>,
}

/// Solves `angle(r_c(z), z) = target` for `z` in `(lo, hi)`; the angle decreases in `z`.
pub(crate) fn node_on_level<T: Real>(level: &Level<'_, T>, lo: T, hi: T, target: T) -> Result<(T, T)> {
    let field = level.field();
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let r = level.radius_at(mid)?;
        if field.field_angle(r, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = T::lit(0.5) * (lo + hi);
    Ok((level.radius_at(z)?, z))
}

fn build_row<T: Real>(cs: &CrossSection<T>, c: T, angles: &[T]) -> Result<Row<T>> {
    let field = cs.field();
    let level = Level::new(field, c)?;
    let AxisCrossings { z1, z2, .. } = level.crossings();
    let m = angles.len() - 1;
    let cusped = c >= field.v00();
    let (z_lo, theta_max, z_foot) = if cusped {
        let z_star = if c == cs.b { cs.z_cut } else { level.z_where_radius(cs.r_min)? };
        let r_star = level.radius_at(z_star)?;
        (z_star, field.field_angle(r_star, z_star)?, z_star)
    } else {
        (z1, T::PI(), z1)
    };
    let trunc =
        if cusped { Some(angles.iter().position(|&t| t > theta_max).unwrap_or(m).min(m - 1).max(1)) } else { None };
    let solved: Vec<Result<RowNode<T>>> = (0..=m)
        .into_par_iter()
        .map(|j| {
            if j == 0 {
                return Ok(RowNode::Point(T::zero(), z2));
            }
            match trunc {
                Some(k) if j == k => {
                    let r = level.radius_at(z_lo)?;
                    Ok(RowNode::Point(r, z_lo))
                }
                Some(k) if j > k => Ok(RowNode::Foot(z_foot)),
                None if j == m => Ok(RowNode::Point(T::zero(), z1)),
                _ => {
                    let (r, z) = node_on_level(&level, z_lo, z2, angles[j])?;
                    Ok(RowNode::Point(r, z))
                }
            }
        })
        .collect();
    Ok(Row { nodes: solved.into_iter().collect::<Result<_>>()?, trunc })
}

/// Structured contour-grid triangulation with `n_levels` rows and `n_stations` columns.
pub fn triangulate<T: Real>(cs: &CrossSection<T>, n_levels: usize, n_stations: usize) -> Result<Mesh<T>> {
    triangulate_with(cs, n_levels, n_stations, LevelSpacing::default())
}

pub fn triangulate_with<T: Real>(
    cs: &CrossSection<T>,
    n_levels: usize,
    n_stations: usize,
    spacing: LevelSpacing,
) -> Result<Mesh<T>> {
    if n_levels < 4 || n_stations < 8 {
        return Err(Error::Input(format!(
            "mesh needs at least 4 levels and 8 stations, got {n_levels} x {n_stations}"
        )));
    }
    if let LevelSpacing::GeometricNearB { ratio } = spacing {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::Input(format!("level ratio must lie in (0, 1], got {ratio}")));
        }
    }
    let levels = grid_levels(cs.a, cs.b, cs.field().v00(), n_levels, spacing);
    let columns = column_angles::<T>(n_stations);
    let rows: Vec<Row<T>> = levels.iter().map(|&c| build_row(cs, c, &columns)).collect::<Result<_>>()?;

    let last_row = n_levels - 1;
    let m = n_stations - 1;
    let mut nodes = Vec::new();
    let mut tags = Vec::new();
    let mut node_levels = Vec::new();
    let mut index = vec![vec![0usize; n_stations]; n_levels];
    for (i, row) in rows.iter().enumerate() {
        let mut foot_id = None;
        for (j, node) in row.nodes.iter().enumerate() {
            let row_tag = match i {
                0 => BoundaryTag::OuterLevel,
                _ if i == last_row => BoundaryTag::InnerLevel,
                _ => BoundaryTag::Interior,
            };
            let id = match *node {
                RowNode::Point(r, z) => {
                    let on_axis = j == 0 || (row.trunc.is_none() && j == m);
                    let tag = if row_tag.is_essential() {
                        row_tag
                    } else if on_axis {
                        BoundaryTag::Axis
                    } else {
                        BoundaryTag::Interior
                    };
                    nodes.push((r, z));
                    tags.push(tag);
                    node_levels.push(levels[i]);
                    nodes.len() - 1
                }
                RowNode::Foot(z) => *foot_id.get_or_insert_with(|| {
                    nodes.push((T::zero(), z));
                    tags.push(if i == last_row { BoundaryTag::CuspCap } else { BoundaryTag::Axis });
                    node_levels.push(levels[i]);
                    nodes.len() - 1
                }),
            };
            index[i][j] = id;
        }
    }

    let mut triangles = Vec::with_capacity(2 * (n_levels - 1) * m);
    for i in 0..last_row {
        for j in 0..m {
            // counterclockwise in (r, z): outer row down, then inner row back up
            let quad = [index[i][j], index[i + 1][j], index[i + 1][j + 1], index[i][j + 1]];
            let mut distinct: Vec<usize> = Vec::with_capacity(4);
            for &q in &quad {
                if !distinct.contains(&q) {
                    distinct.push(q);
                }
            }
            match distinct.len() {
                4 => {
                    let d = quad;
                    let split_a = [[d[0], d[1], d[2]], [d[0], d[2], d[3]]];
                    let split_b = [[d[0], d[1], d[3]], [d[1], d[2], d[3]]];
                    let score = |s: &[[usize; 3]; 2]| -> T {
                        s.iter()
                            .map(|t| {
                                let (p, q, r) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
                                if signed_area(p, q, r) <= T::zero() {
                                    -T::one()
                                } else {
                                    angles(p, q, r).into_iter().fold(T::infinity(), T::min)
                                }
                            })
                            .fold(T::infinity(), T::min)
                    };
                    let best = if score(&split_a) >= score(&split_b) { split_a } else { split_b };
                    triangles.extend(best);
                }
                3 => triangles.push([distinct[0], distinct[1], distinct[2]]),
                _ => {}
            }
        }
    }
    for (t, tri) in triangles.iter().enumerate() {
        let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
        if !(area > T::zero()) {
            let p = nodes[tri[0]];
            return Err(Error::Mesh(format!(
                "cell {t} with nodes {tri:?} near (r, z) = ({}, {}) has non-positive area {area}",
                p.0, p.1
            )));
        }
    }

    // boundary edges and arc lengths along each tagged component
    let mut boundary_edges = Vec::new();
    let mut arc = vec![T::zero(); nodes.len()];
    let dist = |a: usize, b: usize| (nodes[a].0 - nodes[b].0).hypot(nodes[a].1 - nodes[b].1);
    let mut walk = |chain: &[usize], tag: BoundaryTag, start: T, edges: &mut Vec<([usize; 2], BoundaryTag)>| -> T {
        let mut s = start;
        if let Some(&first) = chain.first() {
            if tag.is_essential() && arc[first] == T::zero() {
                arc[first] = s;
            }
        }
        for w in chain.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            s += dist(w[0], w[1]);
            if tag.is_essential() {
                arc[w[1]] = s;
            }
            edges.push((edge_key(w[0], w[1]), tag));
        }
        s
    };
    let outer_chain: Vec<usize> = index[0].clone();
    walk(&outer_chain, BoundaryTag::OuterLevel, T::zero(), &mut boundary_edges);
    let inner_row = &rows[last_row];
    let k = inner_row.trunc.unwrap_or(m);
    let inner_chain: Vec<usize> = index[last_row][..=k].to_vec();
    let s_end = walk(&inner_chain, BoundaryTag::InnerLevel, T::zero(), &mut boundary_edges);
    walk(&[index[last_row][k], index[last_row][m]], BoundaryTag::CuspCap, s_end, &mut boundary_edges);
    let top_axis: Vec<usize> = (0..n_levels).map(|i| index[i][0]).collect();
    walk(&top_axis, BoundaryTag::Axis, T::zero(), &mut boundary_edges);
    let bottom_axis: Vec<usize> = (0..n_levels).map(|i| index[i][m]).collect();
    walk(&bottom_axis, BoundaryTag::Axis, T::zero(), &mut boundary_edges);
    boundary_edges.sort();

    Ok(Mesh { nodes, triangles, tags, boundary_edges, arc, levels: node_levels, z_cut: Some(cs.z_cut) })
}

/// Minimum-angle floor used by [`mesh_quality`], in degrees.
pub const DEFAULT_QUALITY_FLOOR_DEG: f64 = 15.0;

#[derive(Debug, Clone, Serialize)]
pub struct MeshQuality {
    pub nodes: usize,
    pub triangles: usize,
    pub min_angle_deg: f64,
    /// Minimum angle over triangles entirely at `z >= 2 z_cut` (all triangles if no cut).
    pub bulk_min_angle_deg: f64,
    pub quality_floor_deg: f64,
    pub below_floor: usize,
    pub bulk_below_floor: usize,
    pub min_area: f64,
    pub max_area: f64,
    pub non_positive_areas: usize,
    /// `(tag, node count, boundary edge count)`.
    pub tag_census: Vec<(String, usize, usize)>,
    pub euler_characteristic: i64,
    pub euler_ok: bool,
    /// Tagged edges coincide with the topological boundary, each tagged once with a boundary tag.
    pub boundary_consistent: bool,
    pub min_node_radius: f64,
}

impl MeshQuality {
    pub fn valid(&self) -> bool {
        self.non_positive_areas == 0 && self.euler_ok && self.boundary_consistent && self.min_node_radius >= 0.0
    }
}

pub fn mesh_quality<T: Real>(mesh: &Mesh<T>) -> MeshQuality {
    mesh_quality_with_floor(mesh, DEFAULT_QUALITY_FLOOR_DEG)
}

pub fn mesh_quality_with_floor<T: Real>(mesh: &Mesh<T>, floor_deg: f64) -> MeshQuality {
    let mut min_angle = f64::INFINITY;
    let mut bulk_min = f64::INFINITY;
    let (mut below, mut bulk_below) = (0, 0);
    let (mut min_area, mut max_area) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut non_positive = 0;
    let bulk_z = mesh.z_cut.map(|z| 2.0 * z.as_f64());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t).as_f64();
        min_area = min_area.min(area);
        max_area = max_area.max(area);
        if !(area > 0.0) {
            non_positive += 1;
        }
        let (p, q, s) = (mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
        let a = angles(p, q, s).into_iter().map(|x| x.as_f64().to_degrees()).fold(f64::INFINITY, f64::min);
        min_angle = min_angle.min(a);
        if a < floor_deg {
            below += 1;
        }
        let in_bulk = bulk_z.is_none_or(|zb| tri.iter().all(|&i| mesh.nodes[i].1.as_f64() >= zb));
        if in_bulk {
            bulk_min = bulk_min.min(a);
            if a < floor_deg {
                bulk_below += 1;
            }
        }
    }

    let mut used = vec![false; mesh.nodes.len()];
    let mut edges = std::collections::HashSet::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            used[t[k]] = true;
            edges.insert(edge_key(t[k], t[(k + 1) % 3]));
        }
    }
    let v = used.iter().filter(|&&u| u).count() as i64;
    let euler = v - edges.len() as i64 + mesh.triangles.len() as i64;

    let topo = mesh.topological_boundary();
    let mut tagged: Vec<[usize; 2]> = mesh.boundary_edges.iter().map(|(e, _)| *e).collect();
    tagged.sort();
    let unique = tagged.windows(2).all(|w| w[0] != w[1]);
    let boundary_consistent =
        unique && tagged == topo && mesh.boundary_edges.iter().all(|(_, t)| *t != BoundaryTag::Interior);

    let tag_census = BoundaryTag::ALL
        .iter()
        .map(|&tag| {
            let n = mesh.tags.iter().filter(|&&t| t == tag).count();
            let e = mesh.boundary_edges.iter().filter(|(_, t)| *t == tag).count();
            (tag.as_str().to_string(), n, e)
        })
        .collect();

    MeshQuality {
        nodes: mesh.nodes.len(),
        triangles: mesh.triangles.len(),
        min_angle_deg: min_angle,
        bulk_min_angle_deg: bulk_min,
        quality_floor_deg: floor_deg,
        below_floor: below,
        bulk_below_floor: bulk_below,
        min_area,
        max_area,
        non_positive_areas: non_positive,
        tag_census,
        euler_characteristic: euler,
        euler_ok: euler == 1,
        boundary_consistent,
        min_node_radius: mesh.nodes.iter().map(|n| n.0.as_f64()).fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn canonical() -> CrossSection<f64> {
        build_cross_section(&PotentialField::lebesgue(), 0.5, 2.0, None).unwrap()
    }

    #[test]
    fn cross_section_geometry() {
        let cs = canonical();
        assert!((cs.axis_lower.0 + 0.3979525473159165).abs() < 1e-10);
        assert!((cs.axis_upper.0 - 1.0632870688777625).abs() < 1e-10);
        assert!((cs.axis_upper.1 - 1.7158202148587195).abs() < 1e-10);
        assert!((cs.z_cut - 0.0665416213).abs() < 1e-8);
        let f = PotentialField::<f64>::lebesgue();
        assert!(matches!(build_cross_section(&f, 1.5, 2.0, None), Err(Error::Input(_))));
        assert!(matches!(build_cross_section(&f, 0.5, 0.9, None), Err(Error::Input(_))));
    }

    #[test]
    fn single_triangle_quality() {
        let m = Mesh::from_parts(
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)],
            vec![[0, 1, 2]],
            vec![BoundaryTag::OuterLevel; 3],
        )
        .unwrap();
        let q = mesh_quality(&m);
        assert_relative_eq!(q.min_angle_deg, 0.5f64.atan().to_degrees(), max_relative = 1e-12);
        assert_eq!(q.euler_characteristic, 1);
        assert!(q.valid());
    }

    #[test]
    fn flipped_triangle_is_reported() {
        let m = Mesh::from_parts(
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
            vec![[0, 2, 1]],
            vec![BoundaryTag::OuterLevel; 3],
        )
        .unwrap();
        let q = mesh_quality(&m);
        assert_eq!(q.non_positive_areas, 1);
        assert!(q.min_area < 0.0);
        assert!(!q.valid());
    }

    #[test]
    fn rectangle_mesh_is_valid() {
        let m = Mesh::rectangle(1.0, 2.0, 0.0, 1.0, 4, 4).unwrap();
        let q = mesh_quality(&m);
        assert!(q.valid());
        assert_eq!(m.nodes_with_tag(BoundaryTag::Interior).len(), 9);
        assert_relative_eq!(q.min_angle_deg, 45.0, max_relative = 1e-12);
    }

    #[test]
    fn canonical_mesh_invariants() {
        let cs = canonical();
        let mesh = triangulate(&cs, 8, 32).unwrap();
        let q = mesh_quality(&mesh);
        assert!(q.valid(), "{q:?}");
        let tol = 1e-9;
        for (i, &(r, z)) in mesh.nodes.iter().enumerate() {
            match mesh.tags[i] {
                BoundaryTag::OuterLevel if r > 0.0 => {
                    assert!((cs.field().value(r, z).unwrap() - 0.5).abs() <= tol)
                }
                BoundaryTag::InnerLevel if r > 0.0 => {
                    assert!((cs.field().value(r, z).unwrap() - 2.0).abs() <= tol)
                }
                BoundaryTag::Interior => {
                    let v = cs.field().value(r, z).unwrap();
                    assert!(v > 0.5 && v < 2.0, "node {i} ({r}, {z}) has V = {v}");
                }
                _ => {}
            }
        }
        let cap: Vec<usize> = mesh.nodes_with_tag(BoundaryTag::CuspCap);
        assert_eq!(cap.len(), 1);
        assert_relative_eq!(mesh.nodes[cap[0]].1, cs.z_cut, max_relative = 1e-12);
    }

    #[test]
    fn refinement_quadruples_nodes() {
        let cs = canonical();
        let a = triangulate(&cs, 8, 32).unwrap().node_count() as f64;
        let b = triangulate(&cs, 16, 64).unwrap().node_count() as f64;
        assert!((b / a - 4.0).abs() < 0.5, "growth {}", b / a);
    }

    #[test]
    fn rejects_coarse_grids() {
        let cs = canonical();
        assert!(matches!(triangulate(&cs, 2, 32), Err(Error::Input(_))));
        assert!(matches!(triangulate(&cs, 8, 4), Err(Error::Input(_))));
    }
}
