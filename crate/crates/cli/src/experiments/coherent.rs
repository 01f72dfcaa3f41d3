use anyhow::{bail, Result};
use billiard_core::dynamics::{coherent_state, evolve_coherent, project};
use billiard_core::thermo::{mrd, mrd_p2};
use billiard_core::{
    CoherentRun, CoherentStateSpec, DynamicsSettings, EigenBasis, PressureReport, RectangleBasis,
    Shape, SolverSettings,
};
use serde::Serialize;
use serde_json::json;

use super::RunOutcome;
use crate::archive::Archive;
use crate::config::ExperimentConfig;
use crate::output::{read_columns, OutputDir};
use crate::svg::{plot, Mark, Series};

/// Eigenbasis a coherent state is expanded in.
pub enum CsBasis {
    Numeric(Box<EigenBasis>),
    Rectangle(RectangleBasis),
}

impl CsBasis {
    /// Numeric when `solver` is given, else the analytic rectangle basis up
    /// to `e_max`.
    pub fn load(
        shape: &Shape,
        solver: Option<&SolverSettings>,
        e_max: f64,
        archive: &Archive,
    ) -> Result<Self> {
        match (solver, *shape) {
            (Some(s), _) => Ok(Self::Numeric(Box::new(archive.load_or_solve(shape, s)?))),
            (None, Shape::Rectangle { lx, ly }) => {
                Ok(Self::Rectangle(RectangleBasis::below(lx, ly, e_max)?))
            }
            (None, _) => bail!("coherent states in a {} need solver settings", shape.kind()),
        }
    }

    pub fn source(&self) -> &'static str {
        match self {
            Self::Numeric(_) => "numeric",
            Self::Rectangle(_) => "analytic",
        }
    }

    pub fn evolve(
        &self,
        shape: &Shape,
        spec: &CoherentStateSpec,
        settings: &DynamicsSettings,
    ) -> Result<CoherentRun> {
        let tau = spec.tau(shape)?;
        let run = match self {
            Self::Numeric(b) => {
                let field = coherent_state(spec, &b.grid)?;
                let coeffs = project(b, &field.values);
                evolve_coherent(
                    b.as_ref(),
                    &coeffs,
                    field.discarded_mass,
                    spec,
                    tau,
                    settings,
                )?
            }
            Self::Rectangle(b) => {
                let (coeffs, discarded) = b.project(spec)?;
                evolve_coherent(b, &coeffs, discarded, spec, tau, settings)?
            }
        };
        Ok(run)
    }
}

/// Analytic basis cutoff covering a packet of width `w` around `|P| = k_m`.
pub fn default_e_max(k_m: f64, width: f64) -> f64 {
    (k_m + 5.0 / width).powi(2)
}

fn run_summary(run: &CoherentRun, source: &str) -> serde_json::Value {
    json!({
        "coherent": run.spec,
        "source": source,
        "tau": run.tau,
        "captured_norm": run.expansion.captured_norm,
        "n_states": run.expansion.len(),
        "degraded": run.degraded(),
        "expansion_degraded": run.expansion.degraded,
        "discarded_mass": run.discarded_mass,
        "kBT": run.kbt,
        "kBT_drift": run.kbt_drift,
        "PS_diag": run.ps_diag,
        "P2S_diag": run.p2s_diag,
        "PS_avg": run.transient.average,
        "P2S_avg": run.transient_p2.average,
        "transient_detected": run.transient.detected,
        "t_relax_over_tau": run.transient.t_relax / run.tau,
        "PS_floor": run.transient.floor,
        "convergence_slope": run.slope,
    })
}

fn tolerances(settings: &DynamicsSettings) -> serde_json::Value {
    json!({ "expansion_threshold": settings.threshold, "accept_degraded": settings.accept_degraded })
}

pub fn run_evolve(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    archive: &Archive,
) -> Result<(RunOutcome, serde_json::Value)> {
    let shape = config.shape()?;
    let spec = config.section(&config.coherent, "coherent")?;
    let settings = config.dynamics();
    let e_max = config
        .scan
        .as_ref()
        .and_then(|s| s.basis_e_max)
        .unwrap_or_else(|| default_e_max(spec.k_m(), spec.width));
    let basis = CsBasis::load(&shape, config.solver.as_ref(), e_max, archive)?;
    let run = basis.evolve(&shape, spec, &settings)?;

    let rows = run
        .times
        .iter()
        .zip(&run.ps)
        .zip(&run.p2s)
        .map(|((t, ps), p2s)| vec![t / run.tau, *ps, *p2s, run.ps_diag, run.p2s_diag]);
    let csv = out.csv_columns(
        "timeseries.csv",
        &["t_over_tau", "PS", "P2S", "PS_diag", "P2S_diag"],
        rows,
    )?;

    let c = read_columns(&csv, &["t_over_tau", "PS", "P2S", "PS_diag", "P2S_diag"])?;
    let svg = plot(
        "coherent-state pressure",
        "t / tau",
        "PS, P2S",
        &[
            Series::new("PS", "red", Mark::Line, &c[0], &c[1]),
            Series::new("P2S", "black", Mark::Line, &c[0], &c[2]),
            Series::new("PS diagonal", "red", Mark::Dashed, &c[0], &c[3]),
            Series::new("P2S diagonal", "black", Mark::Dashed, &c[0], &c[4]),
        ],
        false,
    );
    out.text("timeseries.svg", &svg)?;

    let mut summary = run_summary(&run, basis.source());
    summary["shape"] = json!(shape);
    out.json("summary.json", &summary)?;
    Ok((
        RunOutcome {
            degraded: run.degraded(),
            summary,
        },
        tolerances(&settings),
    ))
}

/// Row of `cs_scan.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub label: String,
    #[serde(rename = "Px")]
    pub px: f64,
    #[serde(rename = "Py")]
    pub py: f64,
    #[serde(rename = "kBT")]
    pub kbt: f64,
    #[serde(rename = "PS")]
    pub ps: f64,
    #[serde(rename = "P2S")]
    pub p2s: f64,
    pub rel_dev: f64,
    pub rel_dev2: f64,
    #[serde(rename = "PS_diag")]
    pub ps_diag: f64,
    #[serde(rename = "P2S_diag")]
    pub p2s_diag: f64,
    pub captured_norm: f64,
    pub n_states: usize,
    pub degraded: bool,
}

/// Time-averaged pressures of every coherent state in `specs`. Expansions
/// short of the threshold are kept and flagged rather than failing the scan.
pub fn scan(
    shape: &Shape,
    basis: &CsBasis,
    specs: &[CoherentStateSpec],
    settings: &DynamicsSettings,
) -> Result<Vec<ScanRow>> {
    let settings = DynamicsSettings {
        accept_degraded: true,
        ..*settings
    };
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let run = basis.evolve(shape, spec, &settings)?;
        let report = PressureReport::new(
            format!("P=({:.4},{:.4})", spec.px, spec.py),
            run.kbt,
            run.transient.average,
            run.transient_p2.average,
        )?;
        log::info!(
            "{}: kBT {:.4} PS {:.4} captured {:.5}",
            report.label,
            report.kbt,
            report.ps,
            run.expansion.captured_norm
        );
        rows.push(ScanRow {
            label: report.label,
            px: spec.px,
            py: spec.py,
            kbt: report.kbt,
            ps: report.ps,
            p2s: report.p2s,
            rel_dev: report.rel_dev,
            rel_dev2: report.rel_dev2,
            ps_diag: run.ps_diag,
            p2s_diag: run.p2s_diag,
            captured_norm: run.expansion.captured_norm,
            n_states: run.expansion.len(),
            degraded: run.degraded(),
        });
    }
    Ok(rows)
}

pub fn reports(rows: &[ScanRow]) -> Result<Vec<PressureReport>> {
    Ok(rows
        .iter()
        .map(|r| PressureReport::new(r.label.clone(), r.kbt, r.ps, r.p2s))
        .collect::<Result<_, _>>()?)
}

pub fn run_scan(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    archive: &Archive,
) -> Result<(RunOutcome, serde_json::Value)> {
    let shape = config.shape()?;
    let scan_cfg = config.section(&config.scan, "scan")?;
    let specs = scan_cfg.specs()?;
    let settings = config.dynamics();
    let widest = specs
        .iter()
        .map(|s| default_e_max(s.k_m(), s.width))
        .fold(0.0, f64::max);
    let basis = CsBasis::load(
        &shape,
        config.solver.as_ref(),
        scan_cfg.basis_e_max.unwrap_or(widest),
        archive,
    )?;
    let rows = scan(&shape, &basis, &specs, &settings)?;
    let csv = out.csv("cs_scan.csv", &rows)?;

    let c = read_columns(&csv, &["kBT", "PS", "P2S", "PS_diag"])?;
    let svg = plot(
        &format!("coherent states in a {}", shape.kind()),
        "kBT",
        "PS, P2S",
        &[
            Series::new("PS", "red", Mark::Dot, &c[0], &c[1]),
            Series::new("P2S", "black", Mark::Triangle, &c[0], &c[2]),
            Series::new("PS diagonal", "green", Mark::Triangle, &c[0], &c[3]),
        ],
        true,
    );
    out.text("cs_scan.svg", &svg)?;

    let reps = reports(&rows)?;
    let n_degraded = rows.iter().filter(|r| r.degraded).count();
    let summary = json!({
        "shape": shape,
        "source": basis.source(),
        "n_points": rows.len(),
        "n_degraded": n_degraded,
        "mrd": mrd(&reps)?,
        "mrd_p2": mrd_p2(&reps)?,
        "max_abs_diag_gap": rows.iter().map(|r| ((r.ps - r.ps_diag) / r.kbt).abs()).fold(0.0, f64::max),
    });
    out.json("summary.json", &summary)?;
    Ok((
        RunOutcome {
            degraded: n_degraded > 0,
            summary,
        },
        tolerances(&settings),
    ))
}
