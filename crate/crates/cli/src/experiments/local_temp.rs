use anyhow::{bail, Context, Result};
use billiard_core::analytic::{CircleState, RectangleState};
use billiard_core::thermo::local_temperature;
use billiard_core::{LocalTempConvention, Shape, Vec2};
use serde_json::json;

use super::RunOutcome;
use crate::archive::Archive;
use crate::config::{ExperimentConfig, StateRef};
use crate::output::{read_columns, OutputDir};
use crate::svg::heatmap;

/// Sampled kinetic-energy density of one state.
#[derive(Debug, Clone)]
pub struct Raster {
    pub label: String,
    pub energy: f64,
    pub points: Vec<Vec2>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub cell: f64,
}

impl Raster {
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}

/// Cell centres of a raster over the bounding box, `n` along the longer side.
fn cells(shape: &Shape, n: usize) -> (Vec<Vec2>, f64) {
    let (lo, hi) = shape.bounding_box();
    let d = (hi.x - lo.x).max(hi.y - lo.y) / n.max(1) as f64;
    let (nx, ny) = (
        ((hi.x - lo.x) / d).round() as usize,
        ((hi.y - lo.y) / d).round() as usize,
    );
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(lo.x + (i as f64 + 0.5) * d, lo.y + (j as f64 + 0.5) * d);
            if shape.contains(p) {
                pts.push(p);
            }
        }
    }
    (pts, d)
}

fn closed_form(
    shape: &Shape,
    n: usize,
    label: String,
    energy: f64,
    density: impl Fn(Vec2) -> f64,
) -> Raster {
    let (points, d) = cells(shape, n);
    let values = points.iter().map(|&p| density(p)).collect();
    let weights = vec![d * d; points.len()];
    Raster {
        label,
        energy,
        points,
        values,
        weights,
        cell: d,
    }
}

pub fn rasterize(config: &ExperimentConfig, archive: &Archive) -> Result<Raster> {
    let shape = config.shape()?;
    let lt = config.section(&config.local_temp, "local_temp")?;
    let conv = lt.convention;
    match (lt.state, shape) {
        (StateRef::Numeric { index }, _) => {
            let basis = archive.load_or_solve(&shape, &config.solver()?)?;
            if index == 0 || index > basis.len() {
                bail!(
                    "state index {index} out of range: the archive holds {} states",
                    basis.len()
                );
            }
            let s = &basis.states[index - 1];
            let f = local_temperature(&basis.grid, &s.field, conv);
            Ok(Raster {
                label: format!("n={index}"),
                energy: s.energy,
                points: f.points,
                values: f.values,
                weights: f.weights,
                cell: basis.grid.h,
            })
        }
        (StateRef::Rectangle { nx, ny }, Shape::Rectangle { lx, ly }) => {
            let s = RectangleState::new(nx, ny, lx, ly)?;
            Ok(closed_form(
                &shape,
                lt.raster,
                s.label(),
                s.energy,
                |p| match conv {
                    LocalTempConvention::Gradient => s.gradient_density(p),
                    LocalTempConvention::Laplacian => s.laplacian_density(p),
                },
            ))
        }
        (StateRef::Circle { j, n }, Shape::Circle { radius }) => {
            let s = CircleState::new(j, n, radius)?;
            let step = 1e-5 * radius;
            Ok(closed_form(
                &shape,
                lt.raster,
                s.label(),
                s.energy,
                |p| match conv {
                    LocalTempConvention::Gradient => {
                        let dx = (s.psi(p + Vec2::new(step, 0.0))
                            - s.psi(p - Vec2::new(step, 0.0)))
                            / (2.0 * step);
                        let dy = (s.psi(p + Vec2::new(0.0, step))
                            - s.psi(p - Vec2::new(0.0, step)))
                            / (2.0 * step);
                        dx.norm_sqr() + dy.norm_sqr()
                    }
                    LocalTempConvention::Laplacian => s.energy * s.psi(p).norm_sqr(),
                },
            ))
        }
        (state, _) => bail!("state {state:?} does not belong to a {}", shape.kind()),
    }
}

pub fn run(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    archive: &Archive,
) -> Result<(RunOutcome, serde_json::Value)> {
    let r = rasterize(config, archive)?;
    let peak = r.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let rows = r
        .points
        .iter()
        .zip(&r.values)
        .map(|(p, v)| vec![p.x, p.y, *v, v * scale]);
    let csv = out.csv_columns("local_temp.csv", &["x", "y", "value", "normalized"], rows)?;

    let c = read_columns(&csv, &["x", "y", "normalized"])?;
    let conv = config
        .local_temp
        .map(|l| l.convention)
        .context("local_temp section")?;
    out.text(
        "local_temp.svg",
        &heatmap(
            &format!("local temperature, {}", r.label),
            &c[0],
            &c[1],
            &c[2],
            r.cell,
        ),
    )?;

    let integral = r.integral();
    let summary = json!({
        "state": r.label,
        "E": r.energy,
        "convention": conv,
        "integral": integral,
        "integral_rel_err": (integral / r.energy - 1.0).abs(),
        "peak": peak,
        "n_points": r.points.len(),
    });
    out.json("summary.json", &summary)?;
    Ok((
        RunOutcome {
            degraded: false,
            summary,
        },
        json!({}),
    ))
}
