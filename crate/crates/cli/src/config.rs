//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use billiard_core::dynamics::DynamicsSettings;
use billiard_core::{CoherentStateSpec, LocalTempConvention, Shape, SolverSettings};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EigScan,
    CsEvolve,
    CsScan,
    Dispersion,
    Classical,
    LocalTemp,
    ValidateSolver,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EigScan => "eig-scan",
            ExperimentKind::CsEvolve => "cs-evolve",
            ExperimentKind::CsScan => "cs-scan",
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Classical => "classical",
            ExperimentKind::LocalTemp => "local-temp",
            ExperimentKind::ValidateSolver => "validate-solver",
        }
    }
}

/// One experiment. Sections not used by the chosen experiment are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    /// Numeric eigensolver; absent means analytic states where available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<StateWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherent: Option<CoherentStateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_temp: Option<LocalTempConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            shape: None,
            solver: None,
            states: None,
            coherent: None,
            scan: None,
            dynamics: None,
            classical: None,
            dispersion: None,
            local_temp: None,
            validation: None,
            out_dir: None,
            seed: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn shape(&self) -> Result<Shape> {
        self.shape
            .with_context(|| format!("{} needs a shape", self.experiment.name()))
    }

    pub fn states(&self) -> StateWindow {
        self.states.unwrap_or_default()
    }

    pub fn dynamics(&self) -> DynamicsSettings {
        self.dynamics.unwrap_or_default()
    }

    pub fn solver(&self) -> Result<SolverSettings> {
        self.solver
            .with_context(|| format!("{} needs solver settings", self.experiment.name()))
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T> {
        match value {
            Some(v) => Ok(v),
            None => bail!("{} needs a `{name}` section", self.experiment.name()),
        }
    }
}

/// The lowest `count` states with `E ≥ e_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateWindow {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub e_min: f64,
}

fn default_count() -> usize {
    200
}

impl Default for StateWindow {
    fn default() -> Self {
        Self {
            count: default_count(),
            e_min: 0.0,
        }
    }
}

/// Coherent states at one center over a grid of momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(rename = "Qx")]
    pub qx: f64,
    #[serde(rename = "Qy")]
    pub qy: f64,
    #[serde(default = "unit")]
    pub width: f64,
    /// Momentum magnitudes `|P|`.
    pub magnitudes: Vec<f64>,
    /// Momentum directions in degrees from the x axis.
    #[serde(default = "default_angles")]
    pub angles_deg: Vec<f64>,
    /// Energy cutoff of the analytic rectangle basis; picked from the widest
    /// packet when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_e_max: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

fn default_angles() -> Vec<f64> {
    vec![0.0]
}

impl ScanConfig {
    pub fn specs(&self) -> Result<Vec<CoherentStateSpec>> {
        let mut out = Vec::new();
        for &m in &self.magnitudes {
            for &a in &self.angles_deg {
                let (s, c) = a.to_radians().sin_cos();
                out.push(CoherentStateSpec::new(
                    billiard_core::Vec2::new(self.qx, self.qy),
                    billiard_core::Vec2::new(m * c, m * s),
                    self.width,
                )?);
            }
        }
        if out.is_empty() {
            bail!("scan needs at least one magnitude and one angle");
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMode {
    Single,
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub mode: ClassicalMode,
    pub n_collisions: usize,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "unit")]
    pub energy: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Run a quarter stadium as is instead of the full stadium.
    #[serde(default)]
    pub quarter_domain: bool,
    /// Single-trajectory start; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
    /// Maximum number of rows written to the collision log.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_limit: Option<usize>,
}

fn default_samples() -> usize {
    10_000
}

fn default_mass() -> f64 {
    billiard_core::classical::NATURAL_MASS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    /// Rectangle aspect ratios `Lx/Ly`.
    #[serde(default)]
    pub rectangle_aspects: Vec<f64>,
    /// Also add rectangles whose anisotropy matches each stadium.
    #[serde(default)]
    pub match_stadium_ai: bool,
    /// Common rectangle area; the first stadium's area when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectangle_area: Option<f64>,
    #[serde(default)]
    pub stadium_ls: Vec<f64>,
    #[serde(default = "unit")]
    pub stadium_radius: f64,
    #[serde(default)]
    pub include_circle: bool,
    /// Coherent-state scan applied to the shapes named here
    /// (`rectangle`, `stadium_quarter`).
    #[serde(default)]
    pub cs_shapes: Vec<String>,
}

/// Which state to render.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateRef {
    /// One-based position in the ascending numeric spectrum.
    Numeric {
        index: usize,
    },
    Rectangle {
        nx: u32,
        ny: u32,
    },
    Circle {
        j: u32,
        n: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalTempConfig {
    pub state: StateRef,
    #[serde(default)]
    pub convention: LocalTempConvention,
    /// Raster points along the longer side for closed-form states.
    #[serde(default = "default_raster")]
    pub raster: usize,
}

fn default_raster() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    pub h_values: Vec<f64>,
    #[serde(default = "default_validation_count")]
    pub count: usize,
}

fn default_validation_count() -> usize {
    30
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new(ExperimentKind::CsScan);
        c.shape = Some(Shape::stadium_quarter(1.0, 1.0).unwrap());
        c.solver = Some(SolverSettings::below(1.0 / 64.0, 400.0));
        c.scan = Some(ScanConfig {
            qx: 1.3,
            qy: 0.5,
            width: 0.15,
            magnitudes: vec![8.0, 10.0],
            angles_deg: vec![10.0, 30.0],
            basis_e_max: None,
        });
        c.local_temp = Some(LocalTempConfig {
            state: StateRef::Rectangle { nx: 2, ny: 3 },
            convention: LocalTempConvention::Gradient,
            raster: 50,
        });
        c.seed = 11;
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert_eq!(c.scan.unwrap().specs().unwrap().len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let ok = r#"{"experiment":"classical","shape":{"kind":"circle","R":1.0}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(ok).is_ok());
        let bad = r#"{"experiment":"classical","shape":{"kind":"circle","R":1.0},"colour":1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
        let nested = r#"{"experiment":"eig-scan","states":{"count":3,"emin":1}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(nested).is_err());
        let state = r#"{"experiment":"local-temp","local_temp":{"state":{"index":3,"nx":1}}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(state).is_err());
    }
}
