//! Linear finite elements for the axisymmetric Laplacian `∂_r(r ∂_r u) + ∂_z(r ∂_z u) = 0`.
//!
//! The discrete Dirichlet form is `Σ_T r̄_T |T| ∇u·∇w` with `r̄_T` the centroid radius.
//! Nodes tagged `outer-level`, `inner-level` or `cusp-cap` carry Dirichlet data and are
//! eliminated; `axis` nodes are free, since the weight `r` vanishes there.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::potential::PotentialField;
use crate::scalar::Real;
use crate::sparse::{default_max_iterations, pcg, Csr};

/// Smooth bump `amplitude * exp(1 − 1/(1 − ((s − center)/width)²))` in arc length `s`.
pub fn bump_profile<T: Real>(s: T, center: T, width: T, amplitude: T) -> T {
    let x = (s - center) / width;
    let q = T::one() - x * x;
    if q <= T::zero() {
        T::zero()
    } else {
        amplitude * (T::one() - T::one() / q).exp()
    }
}

/// Dirichlet data on one boundary component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Datum<T> {
    Constant {
        value: T,
    },
    Bump {
        center: T,
        width: T,
        amplitude: T,
    },
    /// One value per node carrying the tag, in increasing node order.
    Tabulated {
        values: Vec<T>,
    },
}

impl<T: Real> Datum<T> {
    pub fn constant(value: T) -> Self {
        Datum::Constant { value }
    }

    fn validate(&self, what: &str) -> Result<()> {
        match self {
            Datum::Constant { value } if !value.is_finite() => {
                Err(Error::Input(format!("{what}: constant datum must be finite")))
            }
            Datum::Bump { width, amplitude, center } => {
                if !(*width > T::zero()) || !amplitude.is_finite() || !center.is_finite() {
                    Err(Error::Input(format!("{what}: bump needs a positive width and finite amplitude")))
                } else {
                    Ok(())
                }
            }
            Datum::Tabulated { values } if values.iter().any(|v| !v.is_finite()) => {
                Err(Error::Input(format!("{what}: tabulated values must be finite")))
            }
            _ => Ok(()),
        }
    }

    /// Value at arc length `s`; tabulated data has no arc-length form.
    pub fn at_arc(&self, s: T) -> Result<T> {
        match self {
            Datum::Constant { value } => Ok(*value),
            Datum::Bump { center, width, amplitude } => Ok(bump_profile(s, *center, *width, *amplitude)),
            Datum::Tabulated { .. } => Err(Error::Input("tabulated data is only defined at mesh nodes".into())),
        }
    }

    pub fn scaled(&self, k: T) -> Self {
        match self {
            Datum::Constant { value } => Datum::Constant { value: *value * k },
            Datum::Bump { center, width, amplitude } => {
                Datum::Bump { center: *center, width: *width, amplitude: *amplitude * k }
            }
            Datum::Tabulated { values } => Datum::Tabulated { values: values.iter().map(|v| *v * k).collect() },
        }
    }
}

/// Data for the three essential boundary pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData<T> {
    pub outer: Datum<T>,
    pub inner: Datum<T>,
    /// Defaults to the inner constant, zero for a bump, or the last inner value for tabulated data.
    #[serde(default)]
    pub cap: Option<Datum<T>>,
}

impl<T: Real> BoundaryData<T> {
    pub fn constants(outer: T, inner: T) -> Self {
        Self { outer: Datum::constant(outer), inner: Datum::constant(inner), cap: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate("outer-level")?;
        self.inner.validate("inner-level")?;
        if let Some(c) = &self.cap {
            c.validate("cusp-cap")?;
        }
        Ok(())
    }

    /// Datum used on the cusp cap.
    pub fn cap_datum(&self) -> Datum<T> {
        match (&self.cap, &self.inner) {
            (Some(c), _) => c.clone(),
            (None, Datum::Constant { value }) => Datum::constant(*value),
            (None, Datum::Bump { .. }) => Datum::constant(T::zero()),
            (None, Datum::Tabulated { values }) => Datum::constant(values.last().copied().unwrap_or(T::zero())),
        }
    }

    pub fn datum(&self, tag: BoundaryTag) -> Option<Datum<T>> {
        match tag {
            BoundaryTag::OuterLevel => Some(self.outer.clone()),
            BoundaryTag::InnerLevel => Some(self.inner.clone()),
            BoundaryTag::CuspCap => Some(self.cap_datum()),
            _ => None,
        }
    }

    /// Prescribed value per node (`None` for free nodes).
    pub fn nodal_values(&self, mesh: &Mesh<T>) -> Result<Vec<Option<T>>> {
        self.validate()?;
        let mut out = vec![None; mesh.node_count()];
        for tag in [BoundaryTag::OuterLevel, BoundaryTag::InnerLevel, BoundaryTag::CuspCap] {
            let ids = mesh.nodes_with_tag(tag);
            let datum = self.datum(tag).expect("essential tag");
            if let Datum::Tabulated { values } = &datum {
                if values.len() != ids.len() {
                    return Err(Error::Input(format!(
                        "{} data has {} values for {} nodes",
                        tag.as_str(),
                        values.len(),
                        ids.len()
                    )));
                }
                for (&i, &v) in ids.iter().zip(values) {
                    out[i] = Some(v);
                }
            } else {
                for &i in &ids {
                    out[i] = Some(datum.at_arc(mesh.arc[i])?);
                }
            }
        }
        Ok(out)
    }
}

/// Gradients of the three barycentric functions and the signed area.
fn element_geometry<T: Real>(p: [(T, T); 3]) -> ([(T, T); 3], T) {
    let area = T::lit(0.5) * ((p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1));
    let two_a = T::lit(2.0) * area;
    let mut g = [(T::zero(), T::zero()); 3];
    for k in 0..3 {
        let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        g[k] = ((a.1 - b.1) / two_a, (b.0 - a.0) / two_a);
    }
    (g, area)
}

fn element_points<T: Real>(mesh: &Mesh<T>, t: usize) -> [(T, T); 3] {
    let tri = mesh.triangles[t];
    [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]]
}

fn centroid_radius<T: Real>(p: &[(T, T); 3]) -> T {
    (p[0].0 + p[1].0 + p[2].0) / T::lit(3.0)
}

/// Element stiffness `r̄ |T| ∇φ_i·∇φ_j`.
pub fn element_stiffness<T: Real>(p: [(T, T); 3]) -> Result<[[T; 3]; 3]> {
    let (g, area) = element_geometry(p);
    if !(area > T::zero()) {
        return Err(Error::Assembly(format!("element with vertices {p:?} has non-positive area {area}")));
    }
    let w = centroid_radius(&p) * area;
    let mut k = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = w * (g[i].0 * g[j].0 + g[i].1 * g[j].1);
        }
    }
    Ok(k)
}

/// Global stiffness matrix of the weighted Dirichlet form.
pub fn assemble<T: Real>(mesh: &Mesh<T>) -> Result<Csr<T>> {
    let blocks: Vec<[[T; 3]; 3]> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            element_stiffness(element_points(mesh, t)).map_err(|e| match e {
                Error::Assembly(m) => Error::Assembly(format!("triangle {t}: {m}")),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let mut triplets = Vec::with_capacity(9 * blocks.len());
    for (tri, k) in mesh.triangles.iter().zip(&blocks) {
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], k[a][b]));
            }
        }
    }
    Ok(Csr::from_triplets(mesh.node_count(), triplets))
}

/// `2π Σ r̄ |T| |∇u|²`, the Dirichlet energy of the axisymmetric field in three dimensions.
pub fn dirichlet_energy<T: Real>(mesh: &Mesh<T>, values: &[T]) -> T {
    let sum = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let p = element_points(mesh, t);
            let (g, area) = element_geometry(p);
            let tri = mesh.triangles[t];
            let (mut gr, mut gz) = (T::zero(), T::zero());
            for k in 0..3 {
                gr += values[tri[k]] * g[k].0;
                gz += values[tri[k]] * g[k].1;
            }
            centroid_radius(&p) * area * (gr * gr + gz * gz)
        })
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), |a, b| a + b);
    T::lit(2.0) * T::PI() * sum
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionField<'m, T: Real> {
    #[serde(skip)]
    pub mesh: &'m Mesh<T>,
    pub values: Vec<T>,
    pub energy: T,
    pub iterations: usize,
    pub residual: f64,
    pub min_datum: T,
    pub max_datum: T,
}

impl<'m, T: Real> SolutionField<'m, T> {
    pub fn energy(&self) -> T {
        self.energy
    }

    /// `(min value − min datum, max datum − max value)`; both non-negative when the maximum principle holds.
    pub fn max_principle_margins(&self) -> (T, T) {
        let lo = self.values.iter().copied().fold(T::infinity(), T::min);
        let hi = self.values.iter().copied().fold(T::neg_infinity(), T::max);
        (lo - self.min_datum, self.max_datum - hi)
    }

    /// Linear interpolation at `(r, z)`; points outside the mesh are a domain error.
    pub fn interpolate(&self, r: T, z: T) -> Result<T> {
        let slack = T::lit(-1e-12);
        for t in 0..self.mesh.triangles.len() {
            let p = element_points(self.mesh, t);
            let (g, _) = element_geometry(p);
            let mut lambda = [T::zero(); 3];
            for k in 0..3 {
                // affine with gradient g[k], vanishing at the next vertex
                let a = p[(k + 1) % 3];
                lambda[k] = g[k].0 * (r - a.0) + g[k].1 * (z - a.1);
            }
            if lambda.iter().all(|&l| l >= slack) {
                let tri = self.mesh.triangles[t];
                return Ok((0..3).fold(T::zero(), |acc, k| acc + lambda[k] * self.values[tri[k]]));
            }
        }
        Err(Error::Domain(format!("({r}, {z}) is outside the mesh")))
    }
}

pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Solves the Dirichlet problem with data eliminated from the system.
pub fn solve_dirichlet<'m, T: Real>(mesh: &'m Mesh<T>, data: &BoundaryData<T>, tol: T) -> Result<SolutionField<'m, T>> {
    let k = assemble(mesh)?;
    solve_with_matrix(mesh, &k, data, tol)
}

/// As [`solve_dirichlet`], reusing an assembled matrix.
pub fn solve_with_matrix<'m, T: Real>(
    mesh: &'m Mesh<T>,
    k: &Csr<T>,
    data: &BoundaryData<T>,
    tol: T,
) -> Result<SolutionField<'m, T>> {
    let fixed = data.nodal_values(mesh)?;
    let data_vals: Vec<T> = fixed.iter().flatten().copied().collect();
    if data_vals.is_empty() {
        return Err(Error::Input("no Dirichlet nodes in mesh".into()));
    }
    let min_datum = data_vals.iter().copied().fold(T::infinity(), T::min);
    let max_datum = data_vals.iter().copied().fold(T::neg_infinity(), T::max);
    // exact for constant data, so the initial residual vanishes to rounding
    let start = if min_datum == max_datum { min_datum } else { T::lit(0.5) * (min_datum + max_datum) };

    let mut free_index = vec![usize::MAX; mesh.node_count()];
    let mut free = Vec::new();
    for (i, f) in fixed.iter().enumerate() {
        if f.is_none() {
            free_index[i] = free.len();
            free.push(i);
        }
    }
    let mut values: Vec<T> = fixed.iter().map(|f| f.unwrap_or(start)).collect();
    let mut triplets = Vec::new();
    let mut rhs = vec![T::zero(); free.len()];
    for (fi, &i) in free.iter().enumerate() {
        for (j, v) in k.row(i) {
            match fixed[j] {
                Some(u) => rhs[fi] -= v * u,
                None => triplets.push((fi, free_index[j], v)),
            }
        }
    }
    let (iterations, residual) = if free.is_empty() {
        (0, 0.0)
    } else {
        let reduced = Csr::from_triplets(free.len(), triplets);
        let mut x: Vec<T> = free.iter().map(|&i| values[i]).collect();
        let stats = pcg(&reduced, &rhs, &mut x, tol, default_max_iterations(free.len()))?;
        for (fi, &i) in free.iter().enumerate() {
            values[i] = x[fi];
        }
        (stats.iterations, stats.residual)
    };
    let energy = dirichlet_energy(mesh, &values);
    Ok(SolutionField { mesh, values, energy, iterations, residual, min_datum, max_datum })
}

/// `α + (β − α)(V − A)/(B − A)`: the exact solution for data `α` on `Γ_A` and `β` on `Γ_B`.
pub fn two_constant_oracle<T: Real>(
    field: &PotentialField<T>,
    a: T,
    b: T,
    alpha: T,
    beta: T,
    points: &[(T, T)],
) -> Result<Vec<T>> {
    if !(a < b) {
        return Err(Error::Input(format!("levels must satisfy A < B, got {a}, {b}")));
    }
    points
        .iter()
        .map(|&(r, z)| {
            let v = field.value(r, z)?;
            if !(v > a && v < b) {
                return Err(Error::Domain(format!("({r}, {z}) is outside the domain (V = {v})")));
            }
            Ok(affine_level_map(v, a, b, alpha, beta))
        })
        .collect()
}

/// Image of a potential value under the affine map sending `A ↦ α`, `B ↦ β`.
pub fn affine_level_map<T: Real>(v: T, a: T, b: T, alpha: T, beta: T) -> T {
    if alpha == beta {
        return alpha;
    }
    alpha + (beta - alpha) * (v - a) / (b - a)
}
