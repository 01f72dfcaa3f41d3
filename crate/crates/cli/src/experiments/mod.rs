//! Experiment runners. Each writes its CSV and JSON outputs, renders the SVG
//! from the CSV it wrote, and finishes with a manifest.

pub mod classical;
pub mod coherent;
pub mod dispersion;
pub mod eig_scan;
pub mod local_temp;
pub mod validate;

use std::path::Path;

use anyhow::{bail, Result};
use billiard_core::analytic::{circle_lowest, rectangle_lowest, rectangle_pressures};
use billiard_core::geometry::sample_boundary;
use billiard_core::thermo::{
    pressure_mean, pressure_mean_complex, pressure_p2, pressure_p2_complex,
};
use billiard_core::{PressureReport, Shape, SolverSettings};
use serde::Serialize;

use crate::archive::Archive;
use crate::config::{ExperimentConfig, ExperimentKind, StateWindow};
use crate::output::OutputDir;

/// What a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub degraded: bool,
    pub summary: serde_json::Value,
}

pub fn run(config: &ExperimentConfig, out_dir: &Path, archive: &Archive) -> Result<RunOutcome> {
    let mut out = OutputDir::create(out_dir)?;
    let (outcome, tolerances) = match config.experiment {
        ExperimentKind::EigScan => eig_scan::run(config, &mut out, archive)?,
        ExperimentKind::ValidateSolver => validate::run(config, &mut out, archive)?,
        ExperimentKind::CsEvolve => coherent::run_evolve(config, &mut out, archive)?,
        ExperimentKind::CsScan => coherent::run_scan(config, &mut out, archive)?,
        ExperimentKind::Dispersion => dispersion::run(config, &mut out, archive)?,
        ExperimentKind::Classical => classical::run(config, &mut out)?,
        ExperimentKind::LocalTemp => local_temp::run(config, &mut out, archive)?,
    };
    out.manifest(config, tolerances, outcome.degraded)?;
    Ok(outcome)
}

/// Pressure reports of an eigenstate set.
#[derive(Debug, Clone)]
pub struct EigenScan {
    pub reports: Vec<PressureReport>,
    /// One-based position of each report in the ascending spectrum.
    pub indices: Vec<usize>,
    pub numeric: bool,
    /// Largest Rellich deviation of the numeric fluxes (zero for analytic).
    pub max_rellich_dev: f64,
    /// Fewer states than requested were available.
    pub short: bool,
}

fn lowest_above<T>(
    window: StateWindow,
    mut lowest: impl FnMut(usize) -> Result<Vec<T>>,
    energy: impl Fn(&T) -> f64,
) -> Result<(Vec<usize>, Vec<T>)> {
    let mut n = window.count.max(1);
    loop {
        let all = lowest(n)?;
        let kept: Vec<(usize, T)> = all
            .into_iter()
            .enumerate()
            .filter(|(_, s)| energy(s) >= window.e_min)
            .collect();
        if kept.len() >= window.count {
            return Ok(kept
                .into_iter()
                .take(window.count)
                .map(|(i, s)| (i + 1, s))
                .unzip());
        }
        n *= 2;
    }
}

/// Reports for the lowest states of `shape` in `window`. Circles and
/// rectangles use closed forms unless `solver` is given; a degenerate circle
/// level appears once.
pub fn eigen_scan(
    shape: &Shape,
    solver: Option<&SolverSettings>,
    window: StateWindow,
    archive: &Archive,
) -> Result<EigenScan> {
    let area = shape.area();
    match (solver, *shape) {
        (None, Shape::Circle { radius }) => {
            let (indices, states) = lowest_above(
                window,
                |n| Ok(circle_lowest(radius, n, false)?),
                |s| s.energy,
            )?;
            let k_max = states.last().map_or(1.0, |s| s.k);
            let samples = sample_boundary(shape, (30.0 * k_max).max(200.0))?;
            let reports = states
                .iter()
                .map(|s| {
                    let f = s.flux_on(&samples);
                    PressureReport::new(
                        s.label(),
                        s.energy,
                        pressure_mean_complex(&samples, &f) * area,
                        pressure_p2_complex(&samples, &f, area) * area,
                    )
                })
                .collect::<Result<_, _>>()?;
            Ok(EigenScan {
                reports,
                indices,
                numeric: false,
                max_rellich_dev: 0.0,
                short: false,
            })
        }
        (None, Shape::Rectangle { lx, ly }) => {
            let (indices, states) =
                lowest_above(window, |n| Ok(rectangle_lowest(lx, ly, n)?), |s| s.energy)?;
            let reports = states
                .iter()
                .map(|s| {
                    let p = rectangle_pressures(s);
                    PressureReport::new(s.label(), s.energy, p.mean * area, p.p2 * area)
                })
                .collect::<Result<_, _>>()?;
            Ok(EigenScan {
                reports,
                indices,
                numeric: false,
                max_rellich_dev: 0.0,
                short: false,
            })
        }
        (None, _) => bail!("{} states need solver settings", shape.kind()),
        (Some(settings), _) => {
            let basis = archive.load_or_solve(shape, settings)?;
            let chosen: Vec<_> = basis
                .states
                .iter()
                .filter(|s| s.energy >= window.e_min)
                .take(window.count)
                .collect();
            let short = chosen.len() < window.count;
            if short {
                log::warn!(
                    "only {} of {} requested states available",
                    chosen.len(),
                    window.count
                );
            }
            let indices = chosen.iter().map(|s| s.index + 1).collect();
            let reports = chosen
                .iter()
                .map(|s| {
                    PressureReport::new(
                        format!("n={}", s.index + 1),
                        s.energy,
                        pressure_mean(&basis.samples, &s.flux) * area,
                        pressure_p2(&basis.samples, &s.flux, area) * area,
                    )
                })
                .collect::<Result<_, _>>()?;
            let max_rellich_dev = chosen.iter().map(|s| s.rellich_dev).fold(0.0, f64::max);
            Ok(EigenScan {
                reports,
                indices,
                numeric: true,
                max_rellich_dev,
                short,
            })
        }
    }
}
