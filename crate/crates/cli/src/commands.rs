//! One function per subcommand; each writes its artifacts, a `report.json` and the config echo.

use std::f64::consts::PI;
use std::path::Path;

use lebesgue_core::contour::{trace_contour, ContourCurve, Level};
use lebesgue_core::fem::{solve_dirichlet, two_constant_oracle, BoundaryData, Datum, DEFAULT_CG_TOL};
use lebesgue_core::figures::{contour_map, potential_grid, surface_cloud, tangency};
use lebesgue_core::mesh::{build_cross_section, mesh_quality, triangulate_with, CrossSection, Mesh};
use lebesgue_core::potential::PotentialField;
use lebesgue_core::probe::{
    limit_set_estimate, nonlocality_experiment, outer_bump, sample_path, NonlocalitySpec, Source,
};
use lebesgue_core::report::{report, Bundle};
use lebesgue_core::wiener::{default_j0, log_series, Profile, Regularity};
use lebesgue_core::wos::{estimate_meridian, MeridianDomain};
use lebesgue_core::{Error, Result};
use serde::Serialize;

use crate::config::{Command, RunConfig, SourceKind};
use crate::output::{ramp, OutDir, Svg, PALETTE};

/// Largest accepted `|V − c|` on traced contours, relative to `c`.
pub const CONTOUR_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub files: Vec<String>,
    pub all_pass: bool,
}

/// Runs a resolved configuration.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let command = cfg.subcommand.ok_or_else(|| Error::Input("no subcommand given".into()))?;
    let root = cfg.output.clone().ok_or_else(|| Error::Input("no output directory given".into()))?;
    cfg.validate()?;
    let mut out = OutDir::create(&root)?;
    let mut bundle = Bundle::new();
    bundle.add_seed("run", cfg.seed());
    let field = cfg.density.field()?;
    match command {
        Command::PotentialGrid => potential_grid_cmd(cfg, &field, &mut out, &mut bundle)?,
        Command::Contour => contour_cmd(cfg, &field, &mut out, &mut bundle)?,
        Command::Mesh => mesh_cmd(cfg, &field, &mut out, &mut bundle)?,
        Command::Solve => solve_cmd(cfg, &field, &mut out, &mut bundle)?,
        Command::Probe => probe_cmd(cfg, &field, &mut out, &mut bundle)?,
        Command::Wiener => wiener_cmd(cfg, &mut out, &mut bundle)?,
        Command::Wos => wos_cmd(cfg, &field, &mut out, &mut bundle)?,
        Command::ReproduceFigures => figures_cmd(cfg, &field, &mut out, &mut bundle)?,
    }
    out.text("report.json", &(report(&bundle)? + "\n"))?;
    out.json("config.json", cfg)?;
    Ok(RunSummary { command: command.name(), files: out.written, all_pass: bundle.all_pass() })
}

fn cross_section(cfg: &RunConfig, field: &PotentialField<f64>) -> Result<CrossSection<f64>> {
    build_cross_section(field, cfg.levels.a, cfg.levels.b, cfg.mesh.r_min)
}

fn build_mesh(cfg: &RunConfig, cs: &CrossSection<f64>) -> Result<Mesh<f64>> {
    triangulate_with(cs, cfg.mesh.levels, cfg.mesh.stations, cfg.mesh.spacing)
}

fn constants(data: &BoundaryData<f64>) -> Option<(f64, f64)> {
    match (&data.outer, &data.inner, &data.cap) {
        (Datum::Constant { value: a }, Datum::Constant { value: b }, None) => Some((*a, *b)),
        _ => None,
    }
}

fn potential_svg(pts: &[[f64; 3]], nr: usize, nz: usize, title: &str) -> String {
    let (r_max, z0, z1) = (pts[nr - 1][0], pts[0][1], pts[pts.len() - 1][1]);
    let (dr, dz) = (r_max / nr as f64, (z1 - z0) / (nz - 1) as f64);
    let finite: Vec<f64> = pts.iter().map(|p| p[2]).filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    // the potential grows without bound near the rod; cap the colour scale
    let hi = 3.0f64.max(lo + 1e-9);
    let mut svg = Svg::new(420.0, (0.0, r_max), (z0 - 0.5 * dz, z1 + 0.5 * dz));
    svg.title(title);
    for p in pts {
        let t = (p[2] - lo) / (hi - lo);
        svg.cell(p[0] - dr, p[1] - 0.5 * dz, p[0], p[1] + 0.5 * dz, &ramp(t));
    }
    svg.frame("r", "z");
    svg.finish()
}

fn potential_grid_cmd(
    cfg: &RunConfig,
    field: &PotentialField<f64>,
    out: &mut OutDir,
    bundle: &mut Bundle,
) -> Result<()> {
    let g = cfg.grid;
    let pts = potential_grid(field, g.r_max, (g.z_min, g.z_max), g.nr, g.nz)?;
    out.csv("potential_grid.csv", &["r", "z", "V"], pts.iter().map(|p| (p[0], p[1], p[2])))?;
    out.text("potential_grid.svg", &potential_svg(&pts, g.nr, g.nz, "potential of the rod"))?;
    #[derive(Serialize)]
    struct GridReport {
        points: usize,
        min: f64,
        max: f64,
        v00: f64,
    }
    let vals = pts.iter().map(|p| p[2]).filter(|v| v.is_finite());
    bundle.add_report(
        "potential_grid",
        &GridReport {
            points: pts.len(),
            min: vals.clone().fold(f64::INFINITY, f64::min),
            max: vals.fold(f64::NEG_INFINITY, f64::max),
            v00: field.v00(),
        },
    )
}

type ContourRow = (f64, f64, f64, f64, f64);

/// CSV rows `level, z, r, log_r, residual`; endpoint residuals come from the axis solve.
fn contour_rows(field: &PotentialField<f64>, curve: &ContourCurve<f64>) -> Result<Vec<ContourRow>> {
    let x = Level::new(field, curve.level)?.crossings();
    let n = curve.samples.len();
    Ok(curve
        .samples
        .iter()
        .enumerate()
        .map(|(k, &(z, lr))| {
            let res = if k == 0 {
                x.residual1
            } else if k == n - 1 {
                x.residual2
            } else {
                curve.residuals[k - 1]
            };
            (curve.level, z, lr.exp(), lr, res)
        })
        .collect())
}

const CONTOUR_HEADER: [&str; 5] = ["level", "z", "r", "log_r", "residual"];

fn contour_svg(curves: &[ContourCurve<f64>], highlight: &[f64], title: &str) -> String {
    let r_max = curves.iter().flat_map(|c| c.points()).map(|p| p.1).fold(0.0, f64::max);
    let z_lo = curves.iter().map(|c| c.z1).fold(0.0, f64::min);
    let z_hi = curves.iter().map(|c| c.z2).fold(1.0, f64::max);
    let pad = 0.05 * (z_hi - z_lo);
    let mut svg = Svg::new(460.0, (-r_max - pad, r_max + pad), (z_lo - pad, z_hi + pad));
    svg.title(title);
    svg.polyline(&[(0.0, 0.0), (0.0, 1.0)], "black", 2.5);
    for (k, c) in curves.iter().enumerate() {
        let bold = highlight.contains(&c.level);
        let colour = if bold { PALETTE[1] } else { PALETTE[k % 4 + 2] };
        let pts = c.points();
        let right: Vec<(f64, f64)> = pts.iter().map(|&(z, r)| (r, z)).collect();
        let left: Vec<(f64, f64)> = pts.iter().map(|&(z, r)| (-r, z)).collect();
        let w = if bold { 1.8 } else { 0.8 };
        svg.polyline(&right, colour, w);
        svg.polyline(&left, colour, w);
        if let Some(&(r, z)) = right.iter().max_by(|a, b| a.0.total_cmp(&b.0)) {
            svg.label(r, z, &format!("{}", c.level));
        }
    }
    svg.frame("r", "z");
    svg.finish()
}

fn contour_cmd(cfg: &RunConfig, field: &PotentialField<f64>, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let spec = &cfg.contour;
    let curves: Vec<ContourCurve<f64>> =
        spec.levels.iter().map(|&c| trace_contour(field, c, spec.stations, spec.grading)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for c in &curves {
        rows.extend(contour_rows(field, c)?);
    }
    out.csv("contour.csv", &CONTOUR_HEADER, rows.iter().copied())?;
    out.text("contour.svg", &contour_svg(&curves, &[cfg.levels.a, cfg.levels.b], "level curves"))?;
    bundle.add_tolerance("contour_residual_relative", CONTOUR_RESIDUAL_TOL);
    #[derive(Serialize)]
    struct CurveReport {
        level: f64,
        z1: f64,
        z2: f64,
        samples: usize,
        max_residual: f64,
    }
    for c in &curves {
        let max_residual = rows.iter().filter(|r| r.0 == c.level).map(|r| r.4).fold(0.0, f64::max);
        let name = format!("level {}", c.level);
        bundle.add_check(
            &format!("{name} residual"),
            max_residual <= CONTOUR_RESIDUAL_TOL * c.level,
            max_residual,
            CONTOUR_RESIDUAL_TOL * c.level,
        );
        bundle.add_report(
            &name,
            &CurveReport { level: c.level, z1: c.z1, z2: c.z2, samples: c.samples.len(), max_residual },
        )?;
    }
    Ok(())
}

fn mesh_svg(mesh: &Mesh<f64>, values: Option<&[f64]>, title: &str) -> String {
    let r_max = mesh.nodes.iter().map(|p| p.0).fold(0.0, f64::max);
    let z_lo = mesh.nodes.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let z_hi = mesh.nodes.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.03 * (z_hi - z_lo);
    let mut svg = Svg::new(420.0, (-pad, r_max + pad), (z_lo - pad, z_hi + pad));
    svg.title(title);
    let (lo, hi) = values.map_or((0.0, 1.0), |v| {
        (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    });
    for tri in &mesh.triangles {
        let pts: Vec<(f64, f64)> = tri.iter().map(|&i| mesh.nodes[i]).collect();
        let fill = match values {
            Some(v) => ramp(((v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0 - lo) / (hi - lo).max(1e-300)),
            None => "#f4f4f4".to_string(),
        };
        svg.polygon(&pts, &fill, "#555555");
    }
    svg.frame("r", "z");
    svg.finish()
}

#[derive(Serialize)]
struct MeshReport {
    nodes: usize,
    triangles: usize,
    z_cut: f64,
    r_min: f64,
    quality: lebesgue_core::mesh::MeshQuality,
}

fn write_mesh(mesh: &Mesh<f64>, out: &mut OutDir) -> Result<()> {
    out.csv(
        "nodes.csv",
        &["id", "r", "z", "tag", "arc", "level"],
        mesh.nodes.iter().enumerate().map(|(i, &(r, z))| (i, r, z, mesh.tags[i].as_str(), mesh.arc[i], mesh.levels[i])),
    )?;
    out.csv(
        "tris.csv",
        &["id", "n0", "n1", "n2"],
        mesh.triangles.iter().enumerate().map(|(t, v)| (t, v[0], v[1], v[2])),
    )
}

fn mesh_cmd(cfg: &RunConfig, field: &PotentialField<f64>, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let cs = cross_section(cfg, field)?;
    let mesh = build_mesh(cfg, &cs)?;
    write_mesh(&mesh, out)?;
    out.text("mesh.svg", &mesh_svg(&mesh, None, "contour-grid mesh"))?;
    let quality = mesh_quality(&mesh);
    bundle.add_check("mesh valid", quality.valid(), quality.non_positive_areas as f64, 0.0);
    bundle.add_report(
        "mesh",
        &MeshReport {
            nodes: mesh.node_count(),
            triangles: mesh.triangles.len(),
            z_cut: cs.z_cut,
            r_min: cs.r_min,
            quality,
        },
    )
}

/// Energy of the exact solution for constant data: `4π M (β − α)² / (B − A)`.
pub fn reference_energy(field: &PotentialField<f64>, a: f64, b: f64, alpha: f64, beta: f64) -> f64 {
    4.0 * PI * field.mass() * (beta - alpha).powi(2) / (b - a)
}

fn solve_cmd(cfg: &RunConfig, field: &PotentialField<f64>, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let cs = cross_section(cfg, field)?;
    let mesh = build_mesh(cfg, &cs)?;
    let data = cfg.boundary_data();
    let sol = solve_dirichlet(&mesh, &data, DEFAULT_CG_TOL)?;
    out.csv(
        "solution.csv",
        &["node", "r", "z", "value"],
        mesh.nodes.iter().zip(&sol.values).enumerate().map(|(i, (&(r, z), &v))| (i, r, z, v)),
    )?;
    out.text("solution.svg", &mesh_svg(&mesh, Some(&sol.values), "finite element solution"))?;
    let (lo, hi) = sol.max_principle_margins();
    #[derive(Serialize)]
    struct SolveReport {
        energy: f64,
        energy_reference: Option<f64>,
        iterations: usize,
        residual: f64,
        max_principle_margins: (f64, f64),
        nodes: usize,
        z_cut: f64,
    }
    let energy_reference = constants(&data).map(|(al, be)| reference_energy(field, cfg.levels.a, cfg.levels.b, al, be));
    bundle.add_tolerance("cg_relative_residual", DEFAULT_CG_TOL);
    bundle.add_check("maximum principle", lo >= -1e-8 && hi >= -1e-8, lo.min(hi), -1e-8);
    bundle.add_report(
        "solve",
        &SolveReport {
            energy: sol.energy,
            energy_reference,
            iterations: sol.iterations,
            residual: sol.residual,
            max_principle_margins: (lo, hi),
            nodes: mesh.node_count(),
            z_cut: cs.z_cut,
        },
    )
}

fn probe_cmd(cfg: &RunConfig, field: &PotentialField<f64>, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let cs = cross_section(cfg, field)?;
    let data = cfg.boundary_data();
    let spec = &cfg.probe;
    let mesh;
    let sol;
    let domain;
    let source = match spec.source {
        SourceKind::Oracle => {
            let (alpha, beta) = constants(&data)
                .ok_or_else(|| Error::Input("the oracle source needs constant data on both levels".into()))?;
            Source::Oracle { alpha, beta }
        }
        SourceKind::Fem => {
            mesh = build_mesh(cfg, &cs)?;
            sol = solve_dirichlet(&mesh, &data, DEFAULT_CG_TOL)?;
            Source::Fem(&sol)
        }
        SourceKind::Wos => {
            domain = MeridianDomain::new(&cs, &data)?;
            Source::Wos { domain: &domain, walks: spec.walks, seed: cfg.seed() }
        }
    };
    let paths = spec.paths.iter().map(|p| sample_path(&cs, &source, p)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for p in &paths {
        for (k, (&(r, z), (&v, &s))) in p.stations.iter().zip(p.values.iter().zip(&p.stderrs)).enumerate() {
            rows.push((p.kind.label(), k, r, z, v, s));
        }
    }
    out.csv("probe.csv", &["path", "station", "r", "z", "value", "stderr"], rows)?;
    bundle.add_report("paths", &paths)?;
    let tip = spec.tip_datum.or(match data.inner {
        Datum::Constant { value } => Some(value),
        _ => None,
    });
    if paths.len() >= 3 {
        if let Some(tip) = tip {
            let set = limit_set_estimate(&paths, tip, spec.tolerance)?;
            bundle.add_tolerance("limit_set", spec.tolerance);
            bundle.add_report("limit_set", &set)?;
        }
    }
    if let Some(nl) = &spec.nonlocality {
        let bump = outer_bump(&cs, nl.amplitude);
        let nspec = NonlocalitySpec {
            z_start: nl.z_start,
            z_min: nl.z_min,
            factor: nl.factor,
            walks: nl.walks,
            seed: cfg.seed(),
        };
        let rep = nonlocality_experiment(&cs, &bump, &nl.levels, &nspec)?;
        let mut rows = Vec::new();
        for l in &rep.levels {
            for (k, s) in l.stations.iter().enumerate() {
                rows.push((format!("nonlocal-{}", l.c), k, s.r, s.z, s.value, s.stderr));
            }
        }
        out.csv("nonlocality.csv", &["path", "station", "r", "z", "value", "stderr"], rows)?;
        bundle.add_report("nonlocality", &rep)?;
    }
    Ok(())
}

/// Reads `(z, ln r)` rows with `z > 0` from a contour CSV, optionally for one level.
pub fn read_contour_profile(path: &Path, level: Option<f64>) -> Result<Profile> {
    let bad = |e: &dyn std::fmt::Display| Error::Input(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let headers = rdr.headers().map_err(|e| bad(&e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(&format!("no {name} column")));
    let (iz, ilr) = (col("z")?, col("log_r")?);
    let il = headers.iter().position(|h| h == "level");
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        let num = |i: usize| rec[i].trim().parse::<f64>().map_err(|e| bad(&e));
        if let (Some(l), Some(i)) = (level, il) {
            if num(i)? != l {
                continue;
            }
        }
        let (z, lr) = (num(iz)?, num(ilr)?);
        if z > 0.0 && lr.is_finite() && lr < 0.0 {
            samples.push((z, lr));
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    Ok(Profile::Tabulated { samples })
}

fn wiener_cmd(cfg: &RunConfig, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let spec = &cfg.wiener;
    let profile = match &spec.contour_file {
        Some(p) => read_contour_profile(p, spec.contour_level)?,
        None => spec.profile.clone(),
    };
    let mut classes = Vec::new();
    let mut reports = Vec::new();
    for &q in &spec.q {
        let j0 = spec.j0.unwrap_or_else(|| default_j0(q));
        let rep = log_series(&profile, q, j0, j0 + spec.terms)?;
        classes.push(rep.classification);
        bundle.add_report(&format!("q = {q}"), &rep)?;
        reports.push(rep);
    }
    #[derive(Serialize)]
    struct Summary {
        profile: String,
        classification: Regularity,
        consistent_across_q: bool,
    }
    let consistent = classes.windows(2).all(|w| w[0] == w[1]);
    bundle.add_report(
        "summary",
        &Summary {
            profile: profile.name(),
            classification: if consistent { classes[0] } else { Regularity::Inconclusive },
            consistent_across_q: consistent,
        },
    )?;
    out.json("wiener.json", &reports)
}

fn wos_cmd(cfg: &RunConfig, field: &PotentialField<f64>, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let cs = cross_section(cfg, field)?;
    let data = cfg.boundary_data();
    let domain = MeridianDomain::new(&cs, &data)?;
    let eps = cfg.wos.eps.unwrap_or_else(|| domain.default_eps());
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for (k, &(r, z)) in cfg.wos.points.iter().enumerate() {
        let seed = cfg.seed().wrapping_add(k as u64);
        let e = estimate_meridian(&domain, r, z, cfg.wos.walks, eps, seed)?;
        bundle.add_seed(&format!("point {k}"), seed);
        if let Some((alpha, beta)) = constants(&data) {
            let exact = two_constant_oracle(field, cfg.levels.a, cfg.levels.b, alpha, beta, &[(r, z)])?[0];
            let dev = (e.mean - exact).abs();
            bundle.add_check(
                &format!("point {k} within 3 stderr of oracle"),
                dev <= 3.0 * e.stderr,
                dev,
                3.0 * e.stderr,
            );
        }
        rows.push((k, r, z, e.mean, e.stderr, e.walks));
        estimates.push(e);
    }
    bundle.add_tolerance("eps", eps);
    out.csv("wos.csv", &["point", "r", "z", "mean", "stderr", "walks"], rows)?;
    bundle.add_report("estimates", &estimates)
}

/// Levels drawn in the contour map; the bounding pair is added to these.
pub const MAP_LEVELS: [f64; 6] = [0.75, 0.9, 1.1, 1.25, 1.5, 1.75];
const SURFACE_ANGLES: usize = 48;
const FIGURE_STATIONS: usize = 96;

fn surface_svg(clouds: &[(&str, Vec<[f64; 3]>)]) -> String {
    // oblique projection of the cut-open surfaces
    let proj = |p: &[f64; 3]| (p[0] - 0.5 * p[1], p[2] + 0.35 * p[1]);
    let pts: Vec<(f64, f64)> = clouds.iter().flat_map(|c| c.1.iter().map(proj)).collect();
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let mut svg = Svg::new(460.0, (x0 - 0.05, x1 + 0.05), (y0 - 0.05, y1 + 0.05));
    svg.title("cut-open level surfaces");
    for (k, (_, cloud)) in clouds.iter().enumerate() {
        for p in cloud {
            let (x, y) = proj(p);
            svg.dot(x, y, 0.9, PALETTE[k]);
        }
    }
    svg.finish()
}

fn figures_cmd(cfg: &RunConfig, field: &PotentialField<f64>, out: &mut OutDir, bundle: &mut Bundle) -> Result<()> {
    let (a, b) = (cfg.levels.a, cfg.levels.b);
    let g = cfg.grid;
    let grid = potential_grid(field, g.r_max, (g.z_min, g.z_max), g.nr, g.nz)?;
    out.csv("figure2_potential.csv", &["r", "z", "V"], grid.iter().map(|p| (p[0], p[1], p[2])))?;
    out.text("figure2_potential.svg", &potential_svg(&grid, g.nr, g.nz, "potential of the rod"))?;

    let mut levels = vec![a];
    levels.extend(MAP_LEVELS.iter().copied().filter(|&c| c > a && c < b));
    levels.push(b);
    let curves = contour_map(field, &levels, FIGURE_STATIONS)?;
    let mut rows = Vec::new();
    for c in &curves {
        rows.extend(contour_rows(field, c)?);
    }
    out.csv("figure3_contours.csv", &CONTOUR_HEADER, rows.iter().copied())?;
    out.text("figure3_contours.svg", &contour_svg(&curves, &[a, b], "meridian contour map"))?;
    for &c in &[a, b] {
        let worst = rows.iter().filter(|r| r.0 == c).map(|r| r.4).fold(0.0, f64::max);
        bundle.add_check(&format!("contour {c} residual"), worst <= CONTOUR_RESIDUAL_TOL, worst, CONTOUR_RESIDUAL_TOL);
    }

    let sweep = 1.5 * PI;
    let clouds: Vec<(&str, Vec<[f64; 3]>)> = vec![
        ("outer", surface_cloud(&curves[0], SURFACE_ANGLES, sweep)),
        ("inner", surface_cloud(&curves[curves.len() - 1], SURFACE_ANGLES, sweep)),
    ];
    let mut cloud_rows = Vec::new();
    for (name, cloud) in &clouds {
        let level = if *name == "outer" { a } else { b };
        cloud_rows.extend(cloud.iter().map(|p| (level, p[0], p[1], p[2])));
    }
    out.csv("figure4_surfaces.csv", &["level", "x", "y", "z"], cloud_rows)?;
    out.text("figure4_surfaces.svg", &surface_svg(&clouds))?;

    let cusp = tangency(&curves[curves.len() - 1]);
    bundle.add_check("inner surface tangent to the axis", cusp.decreasing, cusp.last_ratio, 0.0);
    bundle.add_tolerance("contour_residual", CONTOUR_RESIDUAL_TOL);
    bundle.add_report("tangency", &cusp)?;
    #[derive(Serialize)]
    struct FigureReport {
        levels: Vec<f64>,
        grid_points: usize,
        surface_angles: usize,
        sweep: f64,
        tangency_last_z: f64,
    }
    bundle.add_report(
        "figures",
        &FigureReport {
            levels,
            grid_points: grid.len(),
            surface_angles: SURFACE_ANGLES,
            sweep,
            tangency_last_z: cusp.ratios.last().map_or(f64::NAN, |r| r.0),
        },
    )
}
