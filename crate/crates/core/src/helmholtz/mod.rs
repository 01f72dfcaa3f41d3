//! Numerical Dirichlet eigenstates on an embedded-boundary grid.

pub mod banded;
pub mod eigs;
pub mod flux;
pub mod grid;

use std::f64::consts::PI;

use log::{info, warn};
use serde::{Deserialize, Serialize};

pub use eigs::{EigenSettings, SliceTarget};
pub use flux::{FluxMethod, FluxOperator};
pub use grid::Grid;

use crate::analytic::weyl_count_corrected;
use crate::error::{Error, Result};
use crate::geometry::{sample_boundary, BoundarySample, Shape};

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Grid spacing.
    pub h: f64,
    /// Highest eigenvalue wanted.
    #[serde(default)]
    pub e_max: Option<f64>,
    /// Number of lowest states wanted (used when `e_max` is absent).
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub flux_method: FluxMethod,
    /// Boundary samples per unit length; `None` picks one from the window.
    #[serde(default)]
    pub boundary_density: Option<f64>,
    #[serde(default = "default_window")]
    pub window_target: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_window() -> usize {
    EigenSettings::default().window_target
}

fn default_seed() -> u64 {
    EigenSettings::default().seed
}

impl SolverSettings {
    pub fn lowest(h: f64, count: usize) -> Self {
        Self {
            h,
            e_max: None,
            count: Some(count),
            flux_method: FluxMethod::default(),
            boundary_density: None,
            window_target: default_window(),
            seed: default_seed(),
        }
    }

    pub fn below(h: f64, e_max: f64) -> Self {
        Self {
            e_max: Some(e_max),
            count: None,
            ..Self::lowest(h, 0)
        }
    }

    fn target(&self) -> Result<SliceTarget> {
        match (self.e_max, self.count) {
            (Some(e), _) if e > 0.0 => Ok(SliceTarget::Below(e)),
            (None, Some(c)) if c > 0 => Ok(SliceTarget::Lowest(c)),
            _ => Err(Error::InvalidArgument(
                "solver needs a positive e_max or count".into(),
            )),
        }
    }
}

/// Grid spacing giving twelve points per shortest wavelength and twenty
/// across the smallest geometric feature.
pub fn default_h(shape: &Shape, k_max: f64) -> f64 {
    let feature = match *shape {
        Shape::StadiumQuarter { ls, radius } if ls > 0.0 => ls.min(radius),
        _ => shape.characteristic_length(),
    };
    (2.0 * PI / k_max / 12.0).min(feature / 20.0)
}

/// Boundary sample density for fluxes up to wavenumber `k_max`.
pub fn default_density(k_max: f64, h: f64) -> f64 {
    (30.0 * k_max).max(2.0 / h).max(100.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericEigenstate {
    /// Zero-based position in the ascending spectrum.
    pub index: usize,
    pub energy: f64,
    /// Nodal values, normalized so that `h² Σ m_P u_P² = 1`.
    pub field: Vec<f64>,
    /// Outward normal derivative at the basis' boundary samples.
    pub flux: Vec<f64>,
    /// `‖Bv - λv‖ / λ` of the symmetric discrete problem.
    pub residual: f64,
    pub rellich_dev: f64,
}

impl NumericEigenstate {
    pub fn k(&self) -> f64 {
        self.energy.sqrt()
    }
}

/// Eigenstates sharing one grid and one boundary quadrature.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub shape: Shape,
    pub settings: SolverSettings,
    pub grid: Grid,
    pub samples: Vec<BoundarySample>,
    pub flux_flags: Vec<bool>,
    pub states: Vec<NumericEigenstate>,
}

/// Builds the grid and the scaled operator `B = M^{-1/2} K M^{-1/2}`.
pub fn assemble(shape: &Shape, h: f64) -> Result<(Grid, banded::SymBand)> {
    let grid = Grid::new(shape, h)?;
    let band = grid.scaled_band();
    Ok((grid, band))
}

/// `|(1/2k²) Σ w f² r_n - 1|`.
pub fn validate_rellich(energy: f64, flux: &[f64], samples: &[BoundarySample]) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(flux)
        .map(|(s, f)| s.weight * s.r_n * f * f)
        .sum();
    (sum / (2.0 * energy) - 1.0).abs()
}

/// Outward normal derivative of a nodal field at the given samples.
pub fn boundary_flux(
    grid: &Grid,
    field: &[f64],
    samples: &[BoundarySample],
    method: FluxMethod,
) -> (Vec<f64>, Vec<bool>) {
    let op = FluxOperator::build(grid, samples, method);
    (op.apply(field), op.flags())
}

/// Solves the Dirichlet problem on `shape`.
pub fn solve(shape: &Shape, settings: &SolverSettings) -> Result<EigenBasis> {
    let target = settings.target()?;
    let (grid, band) = assemble(shape, settings.h)?;
    info!(
        "{} grid h={} unknowns={} bandwidth={}",
        shape.kind(),
        settings.h,
        grid.len(),
        grid.bandwidth()
    );
    let eig = EigenSettings {
        window_target: settings.window_target,
        seed: settings.seed,
        ..EigenSettings::default()
    };
    let density = shape.area() / (4.0 * PI);
    let pairs = eigs::slice_spectrum(&band, target, density, &eig)?;
    let e_top = pairs.last().map_or(0.0, |p| p.value);
    let k_top = e_top.max(1.0).sqrt();
    let weyl = weyl_count_corrected(shape.area(), shape.perimeter(), e_top);
    if pairs.len() > 20 && ((pairs.len() as f64) / weyl - 1.0).abs() > 0.15 {
        warn!(
            "{} eigenvalues below {e_top:.3}, Weyl estimate {weyl:.1}",
            pairs.len()
        );
    }

    let density = settings
        .boundary_density
        .unwrap_or_else(|| default_density(k_top, settings.h));
    let samples = sample_boundary(shape, density)?;
    let op = FluxOperator::build(&grid, &samples, settings.flux_method);
    let inv_sqrt_m: Vec<f64> = grid
        .nodes
        .iter()
        .map(|n| 1.0 / (n.mass.sqrt() * settings.h))
        .collect();
    let states = pairs
        .into_iter()
        .enumerate()
        .map(|(index, p)| {
            let field: Vec<f64> = p
                .vector
                .iter()
                .zip(&inv_sqrt_m)
                .map(|(v, s)| v * s)
                .collect();
            let flux = op.apply(&field);
            let rellich_dev = validate_rellich(p.value, &flux, &samples);
            NumericEigenstate {
                index,
                energy: p.value,
                field,
                flux,
                residual: p.residual,
                rellich_dev,
            }
        })
        .collect();
    Ok(EigenBasis {
        shape: *shape,
        settings: *settings,
        grid,
        samples,
        flux_flags: op.flags(),
        states,
    })
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn max_rellich_dev(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.rellich_dev)
            .fold(0.0, f64::max)
    }
}
