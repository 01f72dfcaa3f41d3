use anyhow::{bail, Result};
use billiard_core::classical::{
    ensemble_values, evolve, pressure_from_log, random_start, summarize, PressureWindow, Trajectory,
};
use billiard_core::{Billiard, Shape, Vec2};
use serde_json::json;

use super::RunOutcome;
use crate::config::{ClassicalConfig, ClassicalMode, ExperimentConfig};
use crate::output::{read_columns, OutputDir};
use crate::svg::{plot, Mark, Series};

const DEFAULT_LOG_LIMIT: usize = 100_000;
const BLOCKS: usize = 20;

pub fn billiard(shape: &Shape, cfg: &ClassicalConfig) -> Billiard {
    if cfg.quarter_domain {
        Billiard::native(shape)
    } else {
        Billiard::mirror_completed(shape)
    }
}

/// Standard error of `PS/kBT` from the spread over equal blocks of the log.
fn block_stderr(traj: &Trajectory, b: &Billiard) -> Option<f64> {
    let per = traj.collisions.len() / BLOCKS;
    if per < 2 {
        return None;
    }
    let vals: Vec<f64> = traj
        .collisions
        .chunks_exact(per)
        .map(|c| {
            let impulse: f64 = c[1..].iter().map(|x| 2.0 * x.pn).sum();
            impulse / ((c[per - 1].t - c[0].t) * b.perimeter) * b.area / traj.kbt()
        })
        .collect();
    Some(summarize(&vals, per).stderr)
}

pub fn run(
    config: &ExperimentConfig,
    out: &mut OutputDir,
) -> Result<(RunOutcome, serde_json::Value)> {
    let shape = config.shape()?;
    let cfg = config.section(&config.classical, "classical")?;
    let b = billiard(&shape, cfg);
    let tol = json!({ "corner_nudge": 1e-9, "time_floor_over_perimeter": 1e-10 });
    match cfg.mode {
        ClassicalMode::Single => {
            let (pos, vel) = match cfg.initial {
                Some(i) => (Vec2::new(i.x, i.y), Vec2::new(i.vx, i.vy)),
                None => random_start(&b, cfg.energy, cfg.mass, config.seed, 0),
            };
            let traj = evolve(&b, pos, vel, cfg.mass, cfg.n_collisions)?;
            let p = pressure_from_log(&traj, &b, PressureWindow::Collisions)?;
            let limit = cfg.log_limit.unwrap_or(DEFAULT_LOG_LIMIT);
            let rows = traj
                .collisions
                .iter()
                .take(limit)
                .map(|c| vec![c.t, c.wall_id as f64, c.pn]);
            let csv = out.csv_columns("collisions.csv", &["t", "wall_id", "pn"], rows)?;

            let c = read_columns(&csv, &["t", "pn"])?;
            let mut acc = 0.0;
            let cumulative: Vec<f64> = c[1]
                .iter()
                .map(|pn| {
                    acc += 2.0 * pn;
                    acc
                })
                .collect();
            let svg = plot(
                "accumulated wall impulse",
                "t",
                "sum 2 pn",
                &[Series::new(
                    "impulse",
                    "black",
                    Mark::Line,
                    &c[0],
                    &cumulative,
                )],
                false,
            );
            out.text("collisions.svg", &svg)?;

            let summary = json!({
                "mode": "single",
                "full_domain": b.full,
                "initial": { "x": pos.x, "y": pos.y, "vx": vel.x, "vy": vel.y },
                "PS_over_kBT": p.ps_over_kbt,
                "stderr": block_stderr(&traj, &b),
                "pressure": p.total,
                "per_wall": p.per_wall,
                "kBT": p.kbt,
                "n_collisions": p.n_collisions,
                "logged": limit.min(traj.collisions.len()),
                "elapsed": traj.time,
                "corner_nudges": traj.corner_nudges,
            });
            out.json("summary.json", &summary)?;
            Ok((
                RunOutcome {
                    degraded: false,
                    summary,
                },
                tol,
            ))
        }
        ClassicalMode::Ensemble => {
            if cfg.n_samples < 2 {
                bail!("ensemble needs at least two samples");
            }
            let values = ensemble_values(
                &b,
                cfg.n_samples,
                cfg.energy,
                cfg.mass,
                cfg.n_collisions,
                config.seed,
            )?;
            let csv = out.csv_columns(
                "ensemble.csv",
                &["sample", "PS_over_kBT"],
                values.iter().enumerate().map(|(i, v)| vec![i as f64, *v]),
            )?;

            let c = read_columns(&csv, &["sample", "PS_over_kBT"])?;
            let svg = plot(
                "ensemble PS / kBT",
                "sample",
                "PS / kBT",
                &[Series::new("trajectories", "blue", Mark::Dot, &c[0], &c[1])],
                false,
            );
            out.text("ensemble.svg", &svg)?;

            let r = summarize(&values, cfg.n_collisions);
            let summary = json!({
                "mode": "ensemble",
                "full_domain": b.full,
                "PS_over_kBT": r.mean,
                "stderr": r.stderr,
                "n_samples": r.n_samples,
                "n_collisions": r.n_collisions,
            });
            out.json("summary.json", &summary)?;
            Ok((
                RunOutcome {
                    degraded: false,
                    summary,
                },
                tol,
            ))
        }
    }
}
