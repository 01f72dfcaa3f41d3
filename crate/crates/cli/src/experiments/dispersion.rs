use anyhow::{bail, Result};
use billiard_core::geometry::anisotropy_index;
use billiard_core::thermo::mrd;
use billiard_core::{CoherentStateSpec, Shape, Vec2};
use serde::Serialize;
use serde_json::json;

use super::coherent::{default_e_max, reports, scan, CsBasis};
use super::{eigen_scan, RunOutcome};
use crate::archive::Archive;
use crate::config::{DispersionConfig, ExperimentConfig};
use crate::output::{read_columns, OutputDir};
use crate::svg::{plot, Mark, Series};

/// Row of `dispersion.csv`. `param` is `Lx/Ly` for rectangles, `Ls` for
/// stadiums and `R` for the circle.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionRow {
    pub shape: String,
    pub param: f64,
    #[serde(rename = "AI")]
    pub ai: f64,
    pub sigma_eig: f64,
    pub sigma_cs: Option<f64>,
    pub n_states: usize,
    pub n_cs: usize,
}

/// Rectangle of area `area` and anisotropy index `ai`.
pub fn rectangle_with_ai(area: f64, ai: f64) -> Result<(f64, Shape)> {
    if !(0.0..1.0).contains(&ai) {
        bail!("anisotropy index {ai} has no rectangle");
    }
    let aspect = 1.0 / (1.0 - ai).sqrt();
    Ok((aspect, rectangle_with_aspect(area, aspect)?))
}

pub fn rectangle_with_aspect(area: f64, aspect: f64) -> Result<Shape> {
    Ok(Shape::rectangle(
        (area * aspect).sqrt(),
        (area / aspect).sqrt(),
    )?)
}

/// The packet fits inside `shape` with three widths to spare.
fn fits(shape: &Shape, spec: &CoherentStateSpec) -> bool {
    let r = 3.0 * spec.width;
    let q = spec.center();
    (0..8).all(|i| {
        let a = i as f64 * std::f64::consts::FRAC_PI_4;
        shape.contains(q + Vec2::new(a.cos(), a.sin()) * r)
    })
}

struct Member {
    family: &'static str,
    param: f64,
    shape: Shape,
    numeric: bool,
}

fn members(cfg: &DispersionConfig) -> Result<Vec<Member>> {
    let mut out = Vec::new();
    let stadiums: Vec<Shape> = cfg
        .stadium_ls
        .iter()
        .map(|&ls| Shape::stadium_quarter(ls, cfg.stadium_radius))
        .collect::<Result<_, _>>()?;
    let area = cfg
        .rectangle_area
        .or(stadiums.first().map(|s| s.area()))
        .unwrap_or(1.0);
    for &a in &cfg.rectangle_aspects {
        out.push(Member {
            family: "rectangle",
            param: a,
            shape: rectangle_with_aspect(area, a)?,
            numeric: false,
        });
    }
    for (s, &ls) in stadiums.iter().zip(&cfg.stadium_ls) {
        if cfg.match_stadium_ai {
            let (aspect, rect) = rectangle_with_ai(s.area(), anisotropy_index(s))?;
            out.push(Member {
                family: "rectangle",
                param: aspect,
                shape: rect,
                numeric: false,
            });
        }
        out.push(Member {
            family: "stadium_quarter",
            param: ls,
            shape: *s,
            numeric: true,
        });
    }
    if cfg.include_circle {
        out.push(Member {
            family: "circle",
            param: 1.0,
            shape: Shape::circle(1.0)?,
            numeric: false,
        });
    }
    Ok(out)
}

pub fn run(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    archive: &Archive,
) -> Result<(RunOutcome, serde_json::Value)> {
    let cfg = config.section(&config.dispersion, "dispersion")?;
    let window = config.states();
    let specs = if cfg.cs_shapes.is_empty() {
        Vec::new()
    } else {
        config.section(&config.scan, "scan")?.specs()?
    };
    let settings = config.dynamics();
    let mut rows = Vec::new();
    let mut degraded = false;
    for m in members(cfg)? {
        let solver = if m.numeric {
            Some(config.solver()?)
        } else {
            None
        };
        let eig = eigen_scan(&m.shape, solver.as_ref(), window, archive)?;
        degraded |= eig.short;
        let sigma_eig = mrd(&eig.reports)?;
        let mut sigma_cs = None;
        let mut n_cs = 0;
        if cfg.cs_shapes.iter().any(|s| s == m.family) {
            let usable: Vec<CoherentStateSpec> = specs
                .iter()
                .copied()
                .filter(|s| fits(&m.shape, s))
                .collect();
            if usable.len() < specs.len() {
                log::warn!(
                    "{} {}: {} coherent states do not fit",
                    m.family,
                    m.param,
                    specs.len() - usable.len()
                );
            }
            if !usable.is_empty() {
                let e_max = usable
                    .iter()
                    .map(|s| default_e_max(s.k_m(), s.width))
                    .fold(0.0, f64::max);
                let basis = CsBasis::load(&m.shape, solver.as_ref(), e_max, archive)?;
                let scanned = scan(&m.shape, &basis, &usable, &settings)?;
                degraded |= scanned.iter().any(|r| r.degraded);
                sigma_cs = Some(mrd(&reports(&scanned)?)?);
                n_cs = scanned.len();
            }
        }
        log::info!(
            "{} {}: sigma_eig {sigma_eig:.5} sigma_cs {sigma_cs:?}",
            m.family,
            m.param
        );
        rows.push(DispersionRow {
            shape: m.family.to_string(),
            param: m.param,
            ai: anisotropy_index(&m.shape),
            sigma_eig,
            sigma_cs,
            n_states: eig.reports.len(),
            n_cs,
        });
    }
    rows.sort_by(|a, b| a.shape.cmp(&b.shape).then(a.ai.total_cmp(&b.ai)));
    let csv = out.csv("dispersion.csv", &rows)?;

    let c = read_columns(&csv, &["AI", "sigma_eig", "sigma_cs"])?;
    let mut series = Vec::new();
    for (fam, color) in [
        ("rectangle", "blue"),
        ("stadium_quarter", "red"),
        ("circle", "black"),
    ] {
        let idx: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.shape == fam)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let pick = |col: &Vec<f64>| idx.iter().map(|&i| col[i]).collect::<Vec<f64>>();
        series.push(Series::new(
            &format!("{fam} eigenstates"),
            color,
            Mark::Dot,
            &pick(&c[0]),
            &pick(&c[1]),
        ));
        series.push(Series::new(
            &format!("{fam} coherent"),
            color,
            Mark::Triangle,
            &pick(&c[0]),
            &pick(&c[2]),
        ));
    }
    out.text(
        "dispersion.svg",
        &plot("dispersion vs anisotropy", "AI", "sigma", &series, false),
    )?;

    let summary = json!({ "n_states": window.count, "rows": rows });
    out.json("summary.json", &summary)?;
    Ok((
        RunOutcome { degraded, summary },
        json!({ "expansion_threshold": settings.threshold }),
    ))
}
