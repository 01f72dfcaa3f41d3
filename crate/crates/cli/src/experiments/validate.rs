use anyhow::{bail, Result};
use billiard_core::analytic::{circle_lowest, rectangle_lowest};
use billiard_core::{Shape, SolverSettings};
use serde::Serialize;
use serde_json::json;

use super::RunOutcome;
use crate::archive::Archive;
use crate::config::ExperimentConfig;
use crate::output::{read_columns, OutputDir};
use crate::svg::{plot, Mark, Series};

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub h: f64,
    pub index: usize,
    pub label: String,
    pub e_exact: f64,
    pub e_numeric: f64,
    pub rel_err: f64,
    pub rellich_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Refinement {
    pub h: f64,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    pub max_rellich_dev: f64,
    pub mean_rellich_dev: f64,
    /// Order against the previous (coarser) spacing from the max error.
    pub order: Option<f64>,
}

/// Numeric against closed-form spectra at each spacing, coarse to fine.
pub fn refine(
    shape: &Shape,
    base: Option<&SolverSettings>,
    h_values: &[f64],
    count: usize,
    archive: &Archive,
) -> Result<(Vec<ValidationRow>, Vec<Refinement>)> {
    let exact: Vec<(String, f64)> = match *shape {
        Shape::Circle { radius } => circle_lowest(radius, count, true)?
            .iter()
            .map(|s| (s.label(), s.energy))
            .collect(),
        Shape::Rectangle { lx, ly } => rectangle_lowest(lx, ly, count)?
            .iter()
            .map(|s| (s.label(), s.energy))
            .collect(),
        Shape::StadiumQuarter { .. } => bail!("solver validation needs a circle or rectangle"),
    };
    let mut hs = h_values.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    let mut levels: Vec<Refinement> = Vec::new();
    for &h in &hs {
        let settings = SolverSettings {
            h,
            count: Some(count),
            e_max: None,
            ..base
                .copied()
                .unwrap_or_else(|| SolverSettings::lowest(h, count))
        };
        let basis = archive.load_or_solve(shape, &settings)?;
        let mut errs = Vec::new();
        let mut rds = Vec::new();
        for (s, (label, e)) in basis.states.iter().zip(&exact) {
            let rel_err = (s.energy - e).abs() / e;
            errs.push(rel_err);
            rds.push(s.rellich_dev);
            rows.push(ValidationRow {
                h,
                index: s.index + 1,
                label: label.clone(),
                e_exact: *e,
                e_numeric: s.energy,
                rel_err,
                rellich_dev: s.rellich_dev,
            });
        }
        let max_rel_err = errs.iter().cloned().fold(0.0, f64::max);
        let order = levels
            .last()
            .map(|prev| (prev.max_rel_err / max_rel_err).ln() / (prev.h / h).ln());
        levels.push(Refinement {
            h,
            max_rel_err,
            mean_rel_err: errs.iter().sum::<f64>() / errs.len() as f64,
            max_rellich_dev: rds.iter().cloned().fold(0.0, f64::max),
            mean_rellich_dev: rds.iter().sum::<f64>() / rds.len() as f64,
            order,
        });
    }
    Ok((rows, levels))
}

pub fn run(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    archive: &Archive,
) -> Result<(RunOutcome, serde_json::Value)> {
    let shape = config.shape()?;
    let v = config.section(&config.validation, "validation")?;
    let (rows, levels) = refine(
        &shape,
        config.solver.as_ref(),
        &v.h_values,
        v.count,
        archive,
    )?;
    let csv = out.csv("validation.csv", &rows)?;

    let cols = read_columns(&csv, &["h", "e_exact", "rel_err"])?;
    let mut series = Vec::new();
    const COLORS: [&str; 4] = ["red", "blue", "black", "green"];
    for (i, lvl) in levels.iter().enumerate() {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..cols[0].len())
            .filter(|&r| cols[0][r] == lvl.h)
            .map(|r| (cols[1][r], cols[2][r]))
            .unzip();
        series.push(Series::new(
            &format!("h = {}", lvl.h),
            COLORS[i % 4],
            Mark::Dot,
            &xs,
            &ys,
        ));
    }
    out.text(
        "validation.svg",
        &plot(
            "relative eigenvalue error",
            "exact E",
            "|E_h - E| / E",
            &series,
            false,
        ),
    )?;

    let summary = json!({ "shape": shape, "count": v.count, "levels": levels });
    out.json("summary.json", &summary)?;
    Ok((
        RunOutcome {
            degraded: false,
            summary,
        },
        json!({ "solver_residual": 1e-8 }),
    ))
}
