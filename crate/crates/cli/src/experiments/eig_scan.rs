use anyhow::Result;
use billiard_core::geometry::anisotropy_index;
use billiard_core::thermo::{mrd, mrd_p2};
use serde::Serialize;
use serde_json::json;

use super::{eigen_scan, RunOutcome};
use crate::archive::Archive;
use crate::config::ExperimentConfig;
use crate::output::{read_columns, OutputDir};
use crate::svg::{plot, Mark, Series};

/// Row of `eig_scan.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub label: String,
    pub k: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "PS")]
    pub ps: f64,
    #[serde(rename = "P2S")]
    pub p2s: f64,
    pub rel_dev: f64,
    pub rel_dev2: f64,
}

pub fn run(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    archive: &Archive,
) -> Result<(RunOutcome, serde_json::Value)> {
    let shape = config.shape()?;
    let scan = eigen_scan(&shape, config.solver.as_ref(), config.states(), archive)?;
    let rows: Vec<SpectrumRow> = scan
        .reports
        .iter()
        .zip(&scan.indices)
        .map(|(r, &index)| SpectrumRow {
            index,
            label: r.label.clone(),
            k: r.kbt.sqrt(),
            e: r.kbt,
            ps: r.ps,
            p2s: r.p2s,
            rel_dev: r.rel_dev,
            rel_dev2: r.rel_dev2,
        })
        .collect();
    let csv = out.csv("eig_scan.csv", &rows)?;

    let cols = read_columns(&csv, &["E", "PS", "P2S"])?;
    let svg = plot(
        &format!("{} eigenstates", shape.kind()),
        "kBT",
        "PS, P2S",
        &[
            Series::new("PS", "red", Mark::Dot, &cols[0], &cols[1]),
            Series::new("P2S", "black", Mark::Triangle, &cols[0], &cols[2]),
        ],
        true,
    );
    out.text("eig_scan.svg", &svg)?;

    let n = scan.reports.len() as f64;
    let summary = json!({
        "shape": shape,
        "source": if scan.numeric { "numeric" } else { "analytic" },
        "n_states": scan.reports.len(),
        "e_min": config.states().e_min,
        "anisotropy_index": anisotropy_index(&shape),
        "mrd": mrd(&scan.reports)?,
        "mrd_p2": mrd_p2(&scan.reports)?,
        "mean_PS_over_kBT": scan.reports.iter().map(|r| r.ps / r.kbt).sum::<f64>() / n,
        "max_abs_rel_dev": scan.reports.iter().map(|r| r.rel_dev.abs()).fold(0.0, f64::max),
        "max_abs_rel_dev2": scan.reports.iter().map(|r| r.rel_dev2.abs()).fold(0.0, f64::max),
        "max_rellich_dev": scan.max_rellich_dev,
        "short": scan.short,
    });
    out.json("summary.json", &summary)?;
    let tol = json!({ "solver_residual": 1e-8 });
    Ok((
        RunOutcome {
            degraded: scan.short,
            summary,
        },
        tol,
    ))
}
