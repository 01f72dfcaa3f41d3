//! Embedded-boundary grid and the symmetric pencil `K u = λ M u`.
//!
//! Each interior node carries four arm fractions `θ ∈ (0, 1]`, the distance
//! to the next unknown (or to the boundary) along `±x`, `±y` in units of `h`.
//! Row `P` of `K` is `a_x (-u_xx) + a_y (-u_yy)` with the Shortley–Weller
//! second differences and `a_x = (θ_E + θ_W)/2`, which makes every coupling
//! between two unknowns `-1/h²`. `M` is diagonal with `m_P = (a_x + a_y)/2`.

use super::banded::SymBand;
use crate::error::{Error, Result};
use crate::geometry::{Shape, Vec2};

/// Arms closer to the boundary than this fraction of `h` drop the node.
pub const DROP_FRACTION: f64 = 1e-2;

/// Minimum number of unknowns accepted.
pub const MIN_INTERIOR: usize = 100;

pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub pos: Vec2,
    /// Arm fractions in the order east, west, north, south.
    pub theta: [f64; 4],
    /// Neighbouring unknowns in the same order.
    pub neighbor: [Option<u32>; 4],
    pub mass: f64,
}

impl Node {
    pub fn is_cut(&self) -> bool {
        self.neighbor.iter().any(Option::is_none)
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub shape: Shape,
    pub h: f64,
    /// Position of grid index `(0, 0)`.
    pub origin: Vec2,
    /// Number of grid lines along x and y.
    pub lines: (usize, usize),
    pub nodes: Vec<Node>,
    index_of: Vec<u32>,
    x_fast: bool,
    bandwidth: usize,
}

const NONE: u32 = u32::MAX;

impl Grid {
    pub fn new(shape: &Shape, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be > 0, got {h}"
            )));
        }
        let (lo, hi) = shape.bounding_box();
        let span = hi - lo;
        let nx = (span.x / h + 1e-9).floor() as usize + 1;
        let ny = (span.y / h + 1e-9).floor() as usize + 1;
        if nx.saturating_mul(ny) > 200_000_000 {
            return Err(Error::InvalidArgument(format!(
                "grid spacing {h} is too fine"
            )));
        }
        let pos = |i: usize, j: usize| lo + Vec2::new(i as f64 * h, j as f64 * h);
        let dirs = [
            Vec2::new(1.0, 0.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, -1.0),
        ];

        // arm fractions to the physical boundary, capped at one
        let mut arms: Vec<Option<[f64; 4]>> = vec![None; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let p = pos(i, j);
                if !shape.contains(p) {
                    continue;
                }
                let mut th = [1.0; 4];
                for (k, d) in dirs.iter().enumerate() {
                    if let Some(t) = shape.ray_exit(p, *d) {
                        th[k] = (t / h).min(1.0);
                    }
                }
                if th.iter().all(|&t| t >= DROP_FRACTION) {
                    arms[i * ny + j] = Some(th);
                }
            }
        }

        // the short axis runs fastest to keep the band narrow
        let x_fast = nx < ny;
        let mut index_of = vec![NONE; nx * ny];
        let mut count = 0u32;
        let (outer, inner) = if x_fast { (ny, nx) } else { (nx, ny) };
        for a in 0..outer {
            for b in 0..inner {
                let (i, j) = if x_fast { (b, a) } else { (a, b) };
                if arms[i * ny + j].is_some() {
                    index_of[i * ny + j] = count;
                    count += 1;
                }
            }
        }
        if (count as usize) < MIN_INTERIOR {
            return Err(Error::GridTooCoarse {
                interior: count as usize,
                required: MIN_INTERIOR,
            });
        }

        let mut nodes = Vec::with_capacity(count as usize);
        let mut bandwidth = 0usize;
        for a in 0..outer {
            for b in 0..inner {
                let (i, j) = if x_fast { (b, a) } else { (a, b) };
                let Some(raw) = arms[i * ny + j] else {
                    continue;
                };
                let me = index_of[i * ny + j];
                let nb = [
                    (i + 1 < nx).then(|| (i + 1) * ny + j),
                    (i > 0).then(|| (i - 1) * ny + j),
                    (j + 1 < ny).then(|| i * ny + j + 1),
                    (j > 0).then(|| i * ny + j - 1),
                ];
                let mut theta = [1.0; 4];
                let mut neighbor = [None; 4];
                for k in 0..4 {
                    match nb[k].map(|q| index_of[q]).filter(|&q| q != NONE) {
                        Some(q) => {
                            neighbor[k] = Some(q);
                            bandwidth = bandwidth.max(q.abs_diff(me) as usize);
                        }
                        None => theta[k] = raw[k],
                    }
                }
                let ax = 0.5 * (theta[EAST] + theta[WEST]);
                let ay = 0.5 * (theta[NORTH] + theta[SOUTH]);
                nodes.push(Node {
                    i,
                    j,
                    pos: pos(i, j),
                    theta,
                    neighbor,
                    mass: 0.5 * (ax + ay),
                });
            }
        }
        Ok(Self {
            shape: *shape,
            h,
            origin: lo,
            lines: (nx, ny),
            nodes,
            index_of,
            x_fast,
            bandwidth,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn x_fast(&self) -> bool {
        self.x_fast
    }

    /// Unknown at grid index `(i, j)`, if any.
    pub fn unknown(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.lines.0 || j >= self.lines.1 {
            return None;
        }
        let q = self.index_of[i * self.lines.1 + j];
        (q != NONE).then_some(q as usize)
    }

    /// Diagonal of `K` (without the `1/h²` factor).
    pub fn k_diag_unscaled(&self, p: usize) -> f64 {
        self.nodes[p].theta.iter().map(|t| 1.0 / t).sum()
    }

    /// `y = K x`.
    pub fn apply_k(&self, x: &[f64], y: &mut [f64]) {
        let inv_h2 = 1.0 / (self.h * self.h);
        for (p, node) in self.nodes.iter().enumerate() {
            let mut acc = self.k_diag_unscaled(p) * x[p];
            for q in node.neighbor.iter().flatten() {
                acc -= x[*q as usize];
            }
            y[p] = acc * inv_h2;
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mass).collect()
    }

    /// Grid quadrature `h² Σ m_P a_P b_P`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let h2 = self.h * self.h;
        self.nodes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(n, (x, y))| n.mass * x * y)
            .sum::<f64>()
            * h2
    }

    /// `B = M^{-1/2} K M^{-1/2}` in band storage.
    pub fn scaled_band(&self) -> SymBand {
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut band = SymBand::zeros(self.len(), self.bandwidth);
        for (p, node) in self.nodes.iter().enumerate() {
            band.set(p, p, self.k_diag_unscaled(p) * inv_h2 / node.mass);
            for q in node.neighbor.iter().flatten() {
                let q = *q as usize;
                if q < p {
                    band.set(p, q, -inv_h2 / (node.mass * self.nodes[q].mass).sqrt());
                }
            }
        }
        band
    }

    /// Bilinear interpolation of a nodal field, with zero at positions that
    /// are not unknowns. `None` if the point is outside the grid box.
    pub fn interpolate(&self, field: &[f64], p: Vec2) -> Option<f64> {
        let rel = (p - self.origin) / self.h;
        if rel.x < 0.0 || rel.y < 0.0 {
            return None;
        }
        let (i0, j0) = (rel.x.floor() as usize, rel.y.floor() as usize);
        if i0 + 1 >= self.lines.0 || j0 + 1 >= self.lines.1 {
            return None;
        }
        let (fx, fy) = (rel.x - i0 as f64, rel.y - j0 as f64);
        let val = |i, j| self.unknown(i, j).map_or(0.0, |q| field[q]);
        Some(
            (1.0 - fx) * (1.0 - fy) * val(i0, j0)
                + fx * (1.0 - fy) * val(i0 + 1, j0)
                + (1.0 - fx) * fy * val(i0, j0 + 1)
                + fx * fy * val(i0 + 1, j0 + 1),
        )
    }

    /// Bilinear weights `(unknown, weight)` at `p`; corners without an
    /// unknown are skipped. Second value is false if any corner was skipped.
    pub fn bilinear_stencil(&self, p: Vec2) -> Option<(Vec<(u32, f64)>, bool)> {
        let rel = (p - self.origin) / self.h;
        if rel.x < 0.0 || rel.y < 0.0 {
            return None;
        }
        let (i0, j0) = (rel.x.floor() as usize, rel.y.floor() as usize);
        if i0 + 1 >= self.lines.0 || j0 + 1 >= self.lines.1 {
            return None;
        }
        let (fx, fy) = (rel.x - i0 as f64, rel.y - j0 as f64);
        let mut out = Vec::with_capacity(4);
        let mut complete = true;
        for (di, dj, w) in [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ] {
            match self.unknown(i0 + di, j0 + dj) {
                Some(q) => out.push((q as u32, w)),
                None if w > 1e-14 => complete = false,
                None => {}
            }
        }
        Some((out, complete))
    }

    /// Unknowns within Euclidean distance `radius` of `p`.
    pub fn nodes_within(&self, p: Vec2, radius: f64) -> Vec<usize> {
        let rel = (p - self.origin) / self.h;
        let r = radius / self.h;
        let i_lo = (rel.x - r).floor().max(0.0) as usize;
        let j_lo = (rel.y - r).floor().max(0.0) as usize;
        let i_hi = ((rel.x + r).ceil() as usize).min(self.lines.0.saturating_sub(1));
        let j_hi = ((rel.y + r).ceil() as usize).min(self.lines.1.saturating_sub(1));
        let mut out = Vec::new();
        for i in i_lo..=i_hi {
            for j in j_lo..=j_hi {
                if let Some(q) = self.unknown(i, j) {
                    if (self.nodes[q].pos - p).norm() <= radius {
                        out.push(q);
                    }
                }
            }
        }
        out
    }
}
