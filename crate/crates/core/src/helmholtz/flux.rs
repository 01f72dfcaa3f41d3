//! Outward normal derivative of a grid field at boundary samples.
//!
//! Both methods reduce to a fixed linear stencil per sample, built once per
//! grid and reused for every eigenvector.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::geometry::{BoundaryPiece, BoundarySample, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FluxMethod {
    /// Cubic extrapolation through bilinear probes at `h, 2h, 3h` along the
    /// inward normal.
    Probe,
    /// Weighted least-squares fit of `d · poly(d, s)` in boundary-fitted
    /// coordinates over nearby unknowns.
    #[default]
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxStencil {
    pub terms: Vec<(u32, f64)>,
    /// Set when the primary construction failed and a one-sided fallback is used.
    pub fallback: bool,
}

impl FluxStencil {
    pub fn apply(&self, field: &[f64]) -> f64 {
        self.terms.iter().map(|&(q, w)| w * field[q as usize]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxOperator {
    pub method: FluxMethod,
    pub stencils: Vec<FluxStencil>,
}

impl FluxOperator {
    pub fn build(grid: &Grid, samples: &[BoundarySample], method: FluxMethod) -> Self {
        let pieces = grid.shape.pieces();
        let stencils = samples
            .iter()
            .map(|s| match method {
                FluxMethod::Probe => probe_stencil(grid, s),
                FluxMethod::LeastSquares => least_squares_stencil(grid, s, &pieces[s.piece])
                    .unwrap_or_else(|| {
                        let mut p = probe_stencil(grid, s);
                        p.fallback = true;
                        p
                    }),
            })
            .collect();
        Self { method, stencils }
    }

    pub fn apply(&self, field: &[f64]) -> Vec<f64> {
        self.stencils.iter().map(|s| s.apply(field)).collect()
    }

    pub fn flags(&self) -> Vec<bool> {
        self.stencils.iter().map(|s| s.fallback).collect()
    }

    pub fn flagged(&self) -> usize {
        self.stencils.iter().filter(|s| s.fallback).count()
    }
}

fn merge(terms: &mut Vec<(u32, f64)>) {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(terms.len());
    for &(q, w) in terms.iter() {
        match out.last_mut() {
            Some(last) if last.0 == q => last.1 += w,
            _ => out.push((q, w)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    *terms = out;
}

fn probe_stencil(grid: &Grid, s: &BoundarySample) -> FluxStencil {
    let h = grid.h;
    // u(d) = a d + b d² + c d³ through d = h, 2h, 3h; outward flux is -a
    let coef = [3.0, -1.5, 1.0 / 3.0];
    let mut terms = Vec::new();
    let mut fallback = false;
    for (m, c) in coef.iter().enumerate() {
        let p = s.point - s.normal * (h * (m + 1) as f64);
        if !grid.shape.contains(p) {
            fallback = true;
            break;
        }
        match grid.bilinear_stencil(p) {
            Some((st, _)) => terms.extend(st.into_iter().map(|(q, w)| (q, -c * w / h))),
            None => {
                fallback = true;
                break;
            }
        }
    }
    if fallback {
        // first-order one-sided value at the nearest probe that is inside
        terms.clear();
        for m in 1..=3 {
            let d = h * m as f64 / 2.0;
            let p = s.point - s.normal * d;
            if grid.shape.contains(p) {
                if let Some((st, _)) = grid.bilinear_stencil(p) {
                    terms.extend(st.into_iter().map(|(q, w)| (q, -w / d)));
                    break;
                }
            }
        }
    }
    merge(&mut terms);
    FluxStencil { terms, fallback }
}

/// Boundary-fitted coordinates `(d, s)` of `x` relative to the sample:
/// `d` inward distance from the (extended) piece, `s` arclength offset.
fn local_coords(piece: &BoundaryPiece, sample: &BoundarySample, x: Vec2) -> (f64, f64) {
    match *piece {
        BoundaryPiece::Segment { .. } => {
            let n = sample.normal;
            let t = Vec2::new(-n.y, n.x);
            ((sample.point - x).dot(&n), (x - sample.point).dot(&t))
        }
        BoundaryPiece::Arc { center, radius, .. } => {
            let r = x - center;
            let rb = sample.point - center;
            let mut dphi = r.y.atan2(r.x) - rb.y.atan2(rb.x);
            if dphi > std::f64::consts::PI {
                dphi -= std::f64::consts::TAU;
            } else if dphi <= -std::f64::consts::PI {
                dphi += std::f64::consts::TAU;
            }
            (radius - r.norm(), radius * dphi)
        }
    }
}

const DEGREE_4: [(i32, i32); 10] = [
    (1, 0),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 0),
    (2, 1),
    (2, 2),
    (3, 0),
    (3, 1),
    (4, 0),
];
const DEGREE_3: [(i32, i32); 6] = [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (3, 0)];

fn least_squares_stencil(
    grid: &Grid,
    s: &BoundarySample,
    piece: &BoundaryPiece,
) -> Option<FluxStencil> {
    let h = grid.h;
    // cut-cell rows carry the largest local truncation error, so only
    // unknowns with four interior neighbours enter the fit
    for (radius, basis) in [
        (5.0, &DEGREE_4[..]),
        (6.0, &DEGREE_4[..]),
        (6.0, &DEGREE_3[..]),
    ] {
        let rho = radius * h;
        let mut nodes = grid.nodes_within(s.point, rho);
        nodes.retain(|&q| !grid.nodes[q].is_cut());
        if nodes.len() < basis.len() + basis.len() / 2 {
            continue;
        }
        let rows = nodes.len();
        let mut a = DMatrix::zeros(rows, basis.len());
        let mut sw = Vec::with_capacity(rows);
        for (r, &q) in nodes.iter().enumerate() {
            let x = grid.nodes[q].pos;
            let (d, t) = local_coords(piece, s, x);
            let (d, t) = (d / h, t / h);
            let dist = (x - s.point).norm() / rho;
            let w = ((1.0 - dist * dist).max(0.0).powi(2) + 1e-3).sqrt();
            sw.push(w);
            for (c, &(pa, pb)) in basis.iter().enumerate() {
                a[(r, c)] = w * d.powi(pa) * t.powi(pb);
            }
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-9 * smax) {
            continue;
        }
        let pinv = svd.pseudo_inverse(1e-12 * smax).ok()?;
        let mut terms: Vec<(u32, f64)> = nodes
            .iter()
            .enumerate()
            .map(|(r, &q)| (q as u32, -pinv[(0, r)] * sw[r] / h))
            .collect();
        merge(&mut terms);
        return Some(FluxStencil {
            terms,
            fallback: false,
        });
    }
    None
}
