//! Run configuration: every section has defaults and rejects unknown keys.

use std::path::{Path, PathBuf};

use lebesgue_core::contour::Grading;
use lebesgue_core::fem::BoundaryData;
use lebesgue_core::mesh::LevelSpacing;
use lebesgue_core::potential::{DensityProfile, PotentialField};
use lebesgue_core::probe::{NonlocalitySpec, PathKind, PathSpec};
use lebesgue_core::wiener::{Profile, DEFAULT_TERMS};
use lebesgue_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Potential of the rod on an (r, z) grid.
    PotentialGrid,
    /// Level curves of the potential.
    Contour,
    /// Contour-grid triangulation of the region between the two levels.
    Mesh,
    /// Finite element solution of the Dirichlet problem.
    Solve,
    /// Solution values along paths into the cusp tip.
    Probe,
    /// Regularity series for a cusp profile.
    Wiener,
    /// Walk-on-spheres estimates at given points.
    Wos,
    /// Data and plots for the potential surface, the contour map and the cut-open surfaces.
    ReproduceFigures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PotentialGrid => "potential-grid",
            Command::Contour => "contour",
            Command::Mesh => "mesh",
            Command::Solve => "solve",
            Command::Probe => "probe",
            Command::Wiener => "wiener",
            Command::Wos => "wos",
            Command::ReproduceFigures => "reproduce-figures",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    #[default]
    Lebesgue,
    Power {
        exponent: f64,
        #[serde(default = "one")]
        length: f64,
    },
    /// `(z, ρ)` samples starting at `(0, 0)`.
    Tabulated { samples: Vec<(f64, f64)> },
}

fn one() -> f64 {
    1.0
}

impl DensitySpec {
    pub fn field(&self) -> Result<PotentialField<f64>> {
        let profile = match self {
            DensitySpec::Lebesgue => DensityProfile::lebesgue(),
            DensitySpec::Power { exponent, length } => DensityProfile::power(*exponent, *length)?,
            DensitySpec::Tabulated { samples } => DensityProfile::tabulated(samples.clone())?,
        };
        PotentialField::new(profile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub a: f64,
    pub b: f64,
}

impl Default for Levels {
    fn default() -> Self {
        Self { a: 0.5, b: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSpec {
    pub levels: usize,
    pub stations: usize,
    /// Radius at which the inner level is cut off; defaults to `1e-4` rod lengths.
    pub r_min: Option<f64>,
    pub spacing: LevelSpacing,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { levels: 16, stations: 64, r_min: None, spacing: LevelSpacing::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nr: usize,
    pub nz: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_max: 1.5, z_min: -1.0, z_max: 2.0, nr: 60, nz: 121 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourSpec {
    pub levels: Vec<f64>,
    pub stations: usize,
    pub grading: Grading,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self { levels: vec![0.5, 2.0], stations: 64, grading: Grading::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    #[default]
    Oracle,
    Fem,
    Wos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlocalityConfig {
    /// Amplitude of the bump placed halfway along the outer level.
    pub amplitude: f64,
    pub levels: Vec<f64>,
    pub z_start: f64,
    pub z_min: f64,
    pub factor: f64,
    pub walks: usize,
}

impl Default for NonlocalityConfig {
    fn default() -> Self {
        let d = NonlocalitySpec::default();
        Self { amplitude: 1.0, levels: vec![1.5], z_start: d.z_start, z_min: d.z_min, factor: d.factor, walks: d.walks }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSpec {
    pub source: SourceKind,
    pub paths: Vec<PathSpec>,
    /// Walks per station for the walk-on-spheres source.
    pub walks: usize,
    /// Boundary datum at the tip; defaults to the inner datum when it is constant.
    pub tip_datum: Option<f64>,
    pub tolerance: f64,
    pub nonlocality: Option<NonlocalityConfig>,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        let mut paths = vec![PathSpec::new(PathKind::AxisBelow)];
        paths.extend([1.05, 1.25, 1.5, 1.75, 1.95].map(|c| PathSpec::new(PathKind::LevelCurve { c })));
        Self {
            source: SourceKind::Oracle,
            paths,
            walks: 20_000,
            tip_datum: None,
            tolerance: lebesgue_core::probe::DEFAULT_LIMIT_TOL,
            nonlocality: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WienerSpec {
    pub profile: Profile,
    /// CSV with `z` and `log_r` columns, as written by `contour`; replaces `profile`.
    pub contour_file: Option<PathBuf>,
    /// Rows of `contour_file` to use, by their `level` column.
    pub contour_level: Option<f64>,
    pub q: Vec<f64>,
    /// First index; defaults to the first `j` with `q^j <= e^-2`.
    pub j0: Option<usize>,
    pub terms: usize,
}

impl Default for WienerSpec {
    fn default() -> Self {
        Self {
            profile: Profile::LebesgueContour { level: 2.0 },
            contour_file: None,
            contour_level: None,
            q: vec![0.3, 0.5, 0.7],
            j0: None,
            terms: DEFAULT_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WosSpec {
    /// Meridian points `(r, z)`.
    pub points: Vec<(f64, f64)>,
    pub walks: usize,
    /// Shell width; defaults to `1e-4` times the axial extent of the domain.
    pub eps: Option<f64>,
}

impl Default for WosSpec {
    fn default() -> Self {
        Self { points: vec![(0.5, 0.5)], walks: 100_000, eps: None }
    }
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "lebesgue-out";
pub const OUT_ENV: &str = "LEBESGUE_LAB_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub subcommand: Option<Command>,
    pub density: DensitySpec,
    pub levels: Levels,
    pub mesh: MeshSpec,
    /// Boundary data; defaults to the constants `A` on the outer and `B` on the inner level.
    pub data: Option<BoundaryData<f64>>,
    pub grid: GridSpec,
    pub contour: ContourSpec,
    pub probe: ProbeSpec,
    pub wiener: WienerSpec,
    pub wos: WosSpec,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A parse failure with the JSON path of the offending key.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError { pointer: e.path().to_string(), message: e.inner().to_string() })
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            pointer: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    pub fn boundary_data(&self) -> BoundaryData<f64> {
        self.data.clone().unwrap_or_else(|| BoundaryData::constants(self.levels.a, self.levels.b))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Fills the subcommand, output directory and seed so the echo reproduces the run.
    pub fn resolve(mut self, command: Command, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self> {
        if let Some(c) = self.subcommand {
            if c != command {
                return Err(Error::Input(format!(
                    "config is for subcommand {} but {} was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        self.subcommand = Some(command);
        self.output = Some(
            out.or(self.output.take())
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        );
        self.seed = Some(seed.or(self.seed).unwrap_or(DEFAULT_SEED));
        self.validate()?;
        Ok(self)
    }

    /// Checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let Levels { a, b } = self.levels;
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::Input(format!("levels need 0 < a < b, got a = {a}, b = {b}")));
        }
        if self.mesh.levels < 4 || self.mesh.stations < 8 {
            return Err(Error::Input("mesh needs at least 4 levels and 8 stations".into()));
        }
        if let Some(r) = self.mesh.r_min {
            if !(r > 0.0) {
                return Err(Error::Input(format!("mesh.r_min must be positive, got {r}")));
            }
        }
        self.boundary_data().validate()?;
        let g = &self.grid;
        if !(g.r_max > 0.0 && g.z_max > g.z_min && g.nr >= 2 && g.nz >= 2) {
            return Err(Error::Input("grid needs r_max > 0, z_min < z_max and at least 2 x 2 points".into()));
        }
        if self.contour.levels.is_empty() || self.contour.levels.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Input("contour.levels must be a non-empty list of positive values".into()));
        }
        if self.probe.paths.is_empty() {
            return Err(Error::Input("probe.paths is empty".into()));
        }
        if self.wiener.q.is_empty() || self.wiener.q.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(Error::Input("wiener.q must be a non-empty list of values in (0, 1)".into()));
        }
        if self.wos.points.is_empty() || self.wos.walks < 2 {
            return Err(Error::Input("wos needs at least one point and two walks".into()));
        }
        if let Some(e) = self.wos.eps {
            if !(e > 0.0) {
                return Err(Error::Input(format!("wos.eps must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_takes_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.mesh.levels, 16);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let e = RunConfig::from_json(r#"{"mesh": {"levles": 3}}"#).unwrap_err();
        assert_eq!(e.pointer, "mesh.levles");
        let e = RunConfig::from_json(r#"{"data": {"outer": {"kind": "constant", "value": 1, "extra": 2}, "inner": {"kind": "constant", "value": 2}}}"#).unwrap_err();
        assert!(e.pointer.starts_with("data.outer"), "{}", e.pointer);
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::default().resolve(Command::Solve, Some("x".into()), Some(9)).unwrap();
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(back.resolve(Command::Mesh, None, None).is_err());
    }
}
