//! Event-driven classical billiard with momentum-transfer pressure.
//!
//! Free flight is straight, so each step solves for the nearest boundary
//! crossing exactly and reflects specularly. Nothing is time-stepped.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPiece, Shape, Vec2};

/// Particle mass matching `2m = 1`.
pub const NATURAL_MASS: f64 = 0.5;

/// Boundary a classical particle moves in.
#[derive(Debug, Clone, PartialEq)]
pub struct Billiard {
    pub shape: Shape,
    /// True when a quarter stadium was mirrored into the full stadium.
    pub full: bool,
    pub pieces: Vec<BoundaryPiece>,
    pub area: f64,
    pub perimeter: f64,
    /// Cumulative arclength at the start of each piece.
    offsets: Vec<f64>,
}

impl Billiard {
    /// The native domain of `shape`.
    pub fn native(shape: &Shape) -> Self {
        Self::build(shape, false)
    }

    /// The full stadium for a quarter stadium; other shapes as is.
    pub fn mirror_completed(shape: &Shape) -> Self {
        Self::build(shape, matches!(shape, Shape::StadiumQuarter { .. }))
    }

    fn build(shape: &Shape, full: bool) -> Self {
        let pieces = if full {
            shape.mirror_completed_pieces()
        } else {
            shape.pieces()
        };
        let mut offsets = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            offsets.push(acc);
            acc += p.length();
        }
        let area = if full {
            4.0 * shape.area()
        } else {
            shape.area()
        };
        Self {
            shape: *shape,
            full,
            pieces,
            area,
            perimeter: acc,
            offsets,
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match (self.full, self.shape) {
            (true, Shape::StadiumQuarter { ls, radius }) => {
                let ax = p.x.abs();
                if ax <= ls {
                    p.y.abs() < radius
                } else {
                    (ax - ls).powi(2) + p.y * p.y < radius * radius
                }
            }
            _ => self.shape.contains(p),
        }
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match (self.full, self.shape) {
            (true, Shape::StadiumQuarter { ls, radius }) => (
                Vec2::new(-ls - radius, -radius),
                Vec2::new(ls + radius, radius),
            ),
            _ => self.shape.bounding_box(),
        }
    }

    /// Uniform interior point by rejection from the bounding box.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> Vec2 {
        let (lo, hi) = self.bounding_box();
        loop {
            let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if self.contains(p) {
                return p;
            }
        }
    }

    /// Arclength coordinate of a point on wall `wall`.
    pub fn arclength(&self, wall: usize, point: Vec2) -> f64 {
        let piece = &self.pieces[wall];
        let u = match *piece {
            BoundaryPiece::Segment { start, end } => {
                let e = end - start;
                ((point - start).dot(&e) / e.norm_squared()).clamp(0.0, 1.0)
            }
            BoundaryPiece::Arc {
                center,
                start_angle,
                end_angle,
                ..
            } => {
                let q = point - center;
                let rel = (q.y.atan2(q.x) - start_angle).rem_euclid(TAU);
                (rel / (end_angle - start_angle)).min(1.0)
            }
        };
        self.offsets[wall] + u * piece.length()
    }

    /// True when the two pieces meeting at the end of `wall` are not tangent.
    fn corner_after(&self, wall: usize) -> bool {
        let next = (wall + 1) % self.pieces.len();
        self.pieces[wall]
            .normal(1.0)
            .dot(&self.pieces[next].normal(0.0))
            < 1.0 - 1e-9
    }

    fn corner_before(&self, wall: usize) -> bool {
        let prev = (wall + self.pieces.len() - 1) % self.pieces.len();
        self.corner_after(prev)
    }
}

/// One wall collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub t: f64,
    pub wall_id: usize,
    /// Normal momentum `m |v·n|` just before the bounce.
    pub pn: f64,
    #[serde(skip)]
    pub point: Vec2,
}

/// A run of `n` collisions with its log.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mass: f64,
    pub speed: f64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub time: f64,
    pub collisions: Vec<Collision>,
    /// Number of corner hits resolved by nudging the direction.
    pub corner_nudges: usize,
}

impl Trajectory {
    /// Equipartition temperature `p²/2m`.
    pub fn kbt(&self) -> f64 {
        0.5 * self.mass * self.speed * self.speed
    }
}

const CORNER_NUDGE: f64 = 1e-9;

/// Advances from `pos` with velocity `vel` through `n` collisions, calling
/// `visit` on each. Returns the final state and the number of corner nudges.
pub fn run<F: FnMut(&Collision)>(
    billiard: &Billiard,
    pos: Vec2,
    vel: Vec2,
    mass: f64,
    n: usize,
    mut visit: F,
) -> Result<(Vec2, Vec2, f64, usize)> {
    if !billiard.contains(pos) {
        return Err(Error::OutsideDomain { x: pos.x, y: pos.y });
    }
    let speed = vel.norm();
    if !(speed.is_finite() && speed > 0.0) {
        return Err(Error::InvalidArgument(
            "velocity must be nonzero and finite".into(),
        ));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mass must be > 0, got {mass}"
        )));
    }
    let scale = billiard.perimeter;
    let t_min = 1e-10 * scale;
    let (mut p, mut v, mut t) = (pos, vel, 0.0);
    let mut nudges = 0usize;
    for _ in 0..n {
        let mut d = v / speed;
        let mut tries = 0;
        let (dist, wall) = loop {
            let hit = billiard
                .pieces
                .iter()
                .enumerate()
                .filter_map(|(i, piece)| piece.intersect_ray(p, d, t_min).map(|(s, u)| (s, i, u)))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let Some((dist, wall, u)) = hit else {
                return Err(Error::InvalidArgument(format!(
                    "ray from ({}, {}) left the billiard",
                    p.x, p.y
                )));
            };
            let len = billiard.pieces[wall].length();
            let at_corner = (u * len < 1e-12 * scale && billiard.corner_before(wall))
                || ((1.0 - u) * len < 1e-12 * scale && billiard.corner_after(wall));
            if !at_corner || tries == 8 {
                if tries > 0 {
                    nudges += 1;
                }
                break (dist, wall);
            }
            // rotate away from the corner, alternating the sign between events
            let sign = if nudges % 2 == 0 { 1.0 } else { -1.0 };
            let (s, c) = (sign * CORNER_NUDGE * 2f64.powi(tries)).sin_cos();
            d = Vec2::new(c * d.x - s * d.y, s * d.x + c * d.y);
            v = d * speed;
            tries += 1;
        };
        let piece = &billiard.pieces[wall];
        let hit = piece.project(p + d * dist);
        t += dist / speed;
        let normal = piece.normal_at(hit);
        let vn = v.dot(&normal);
        visit(&Collision {
            t,
            wall_id: wall,
            pn: mass * vn.abs(),
            point: hit,
        });
        let reflected = v - normal * (2.0 * vn);
        v = reflected * (speed / reflected.norm());
        p = hit;
    }
    Ok((p, v, t, nudges))
}

/// Runs `n` collisions and keeps the full log.
pub fn evolve(
    billiard: &Billiard,
    pos: Vec2,
    vel: Vec2,
    mass: f64,
    n: usize,
) -> Result<Trajectory> {
    let mut collisions = Vec::with_capacity(n);
    let (position, velocity, time, corner_nudges) =
        run(billiard, pos, vel, mass, n, |c| collisions.push(*c))?;
    Ok(Trajectory {
        mass,
        speed: vel.norm(),
        position,
        velocity,
        time,
        collisions,
        corner_nudges,
    })
}

/// Time window used to turn impulses into a pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureWindow {
    /// From the first to the last logged collision; impulses of all but the
    /// first collision are counted. Exact for periodic wall sequences.
    Collisions,
    /// `[0, T]`, counting every collision at `t ≤ T`.
    Fixed(f64),
}

/// Impulse accounting for one wall or the whole boundary.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Impulses {
    first: Option<f64>,
    last: f64,
    after_first: f64,
    total: f64,
    count: usize,
}

impl Impulses {
    fn add(&mut self, c: &Collision) {
        if self.first.is_none() {
            self.first = Some(c.t);
        } else {
            self.after_first += 2.0 * c.pn;
        }
        self.total += 2.0 * c.pn;
        self.last = c.t;
        self.count += 1;
    }

    fn pressure(&self, length: f64, window: PressureWindow) -> Option<f64> {
        match window {
            PressureWindow::Collisions => {
                let first = self.first?;
                (self.count >= 2 && self.last > first)
                    .then(|| self.after_first / ((self.last - first) * length))
            }
            PressureWindow::Fixed(t) => Some(self.total / (t * length)),
        }
    }
}

/// Boundary-averaged and per-wall pressures from a collision log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPressure {
    pub total: f64,
    /// `None` for walls hit fewer than twice.
    pub per_wall: Vec<Option<f64>>,
    pub kbt: f64,
    #[serde(rename = "PS_over_kBT")]
    pub ps_over_kbt: f64,
    pub n_collisions: usize,
}

/// `P = Σ 2pₙ / (T L)` on each wall and over the whole boundary.
pub fn pressure_from_log(
    traj: &Trajectory,
    billiard: &Billiard,
    window: PressureWindow,
) -> Result<ClassicalPressure> {
    if let PressureWindow::Fixed(t) = window {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("pressure window must be > 0".into()));
        }
    }
    let mut total = Impulses::default();
    let mut walls = vec![Impulses::default(); billiard.pieces.len()];
    for c in &traj.collisions {
        if let PressureWindow::Fixed(t) = window {
            if c.t > t {
                break;
            }
        }
        total.add(c);
        walls[c.wall_id].add(c);
    }
    let p = total
        .pressure(billiard.perimeter, window)
        .ok_or(Error::Empty("pressure needs at least two collisions"))?;
    let kbt = traj.kbt();
    Ok(ClassicalPressure {
        total: p,
        per_wall: walls
            .iter()
            .zip(&billiard.pieces)
            .map(|(w, piece)| w.pressure(piece.length(), window))
            .collect(),
        kbt,
        ps_over_kbt: p * billiard.area / kbt,
        n_collisions: traj.collisions.len(),
    })
}

/// `PS/k_BT` of one trajectory without keeping its log.
pub fn single_ps_over_kbt(
    billiard: &Billiard,
    pos: Vec2,
    vel: Vec2,
    mass: f64,
    n: usize,
) -> Result<f64> {
    let mut acc = Impulses::default();
    run(billiard, pos, vel, mass, n, |c| acc.add(c))?;
    let p = acc
        .pressure(billiard.perimeter, PressureWindow::Collisions)
        .ok_or(Error::Empty("pressure needs at least two collisions"))?;
    Ok(p * billiard.area / (0.5 * mass * vel.norm_squared()))
}

/// Mean of `PS/k_BT` over random initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    #[serde(rename = "PS_over_kBT")]
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_collisions: usize,
}

/// `PS/k_BT` of `n_samples` trajectories from uniform positions and
/// directions at fixed energy `E = p²/2m`. Sample `i` draws from stream `i` of
/// a ChaCha8 generator seeded with `seed`, so the values do not depend on
/// thread scheduling.
pub fn ensemble_values(
    billiard: &Billiard,
    n_samples: usize,
    energy: f64,
    mass: f64,
    collisions_per_sample: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(energy > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "energy must be > 0, got {energy}"
        )));
    }
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let (pos, vel) = random_start(billiard, energy, mass, seed, i as u64);
            single_ps_over_kbt(billiard, pos, vel, mass, collisions_per_sample)
        })
        .collect()
}

/// Uniform position and direction at energy `p²/2m`, drawn from stream
/// `stream` of the generator seeded with `seed`.
pub fn random_start(
    billiard: &Billiard,
    energy: f64,
    mass: f64,
    seed: u64,
    stream: u64,
) -> (Vec2, Vec2) {
    let mut rng = initial_rng(seed, stream);
    let pos = billiard.sample_interior(&mut rng);
    let theta = rng.gen_range(0.0..TAU);
    (
        pos,
        Vec2::new(theta.cos(), theta.sin()) * (2.0 * energy / mass).sqrt(),
    )
}

/// Mean and standard error of [`ensemble_values`].
pub fn ensemble_igl(
    billiard: &Billiard,
    n_samples: usize,
    energy: f64,
    mass: f64,
    collisions_per_sample: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "ensemble needs at least two samples".into(),
        ));
    }
    let values = ensemble_values(
        billiard,
        n_samples,
        energy,
        mass,
        collisions_per_sample,
        seed,
    )?;
    Ok(summarize(&values, collisions_per_sample))
}

pub fn summarize(values: &[f64], collisions_per_sample: usize) -> EnsembleResult {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    EnsembleResult {
        mean,
        stderr: (var / n).sqrt(),
        n_samples: values.len(),
        n_collisions: values.len() * collisions_per_sample,
    }
}

/// Generator for sample `stream` of a seeded ensemble.
pub fn initial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn circle_chords_and_exact_pressure() {
        let shape = Shape::circle(1.0).unwrap();
        let b = Billiard::native(&shape);
        let m = NATURAL_MASS;
        let vel = Vec2::new(3.0, 1.2);
        let traj = evolve(&b, Vec2::new(0.3, -0.5), vel, m, 2000).unwrap();
        let cols = &traj.collisions;
        let chord = (cols[1].point - cols[0].point).norm();
        let cos_a = chord / 2.0;
        for w in cols.windows(2).skip(1) {
            assert!(((w[1].point - w[0].point).norm() - chord).abs() < 1e-9);
            assert!((w[1].pn - w[0].pn).abs() < 1e-9 * w[0].pn);
        }
        // the normal momentum fixes the incidence angle
        assert!((cols[5].pn - m * vel.norm() * cos_a).abs() < 1e-9);
        for c in cols {
            assert!((c.point.norm() - 1.0).abs() < 1e-9);
        }
        // mean force per bounce p²/(mR)
        let dt = cols[11].t - cols[10].t;
        let p = m * vel.norm();
        assert!((2.0 * cols[11].pn / dt - p * p / m).abs() < 1e-9 * p * p / m);
        let pr = pressure_from_log(&traj, &b, PressureWindow::Collisions).unwrap();
        assert!((pr.ps_over_kbt - 1.0).abs() < 1e-9);
        assert!((traj.velocity.norm() / vel.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rectangle_components_and_wall_pressures() {
        let (lx, ly) = (1.0 + PI / 4.0, 1.0);
        let b = Billiard::native(&Shape::rectangle(lx, ly).unwrap());
        let m = NATURAL_MASS;
        let vel = Vec2::new(2.0, 0.7);
        let traj = evolve(&b, Vec2::new(0.41, 0.33), vel, m, 20_000).unwrap();
        let mut v = vel;
        for c in &traj.collisions {
            let n = b.pieces[c.wall_id].normal(0.5);
            v -= n * (2.0 * v.dot(&n));
            assert!((v.x.abs() - 2.0).abs() < 1e-12 && (v.y.abs() - 0.7).abs() < 1e-12);
        }
        let pr = pressure_from_log(&traj, &b, PressureWindow::Collisions).unwrap();
        let s = lx * ly;
        // walls: bottom, right, top, left
        for (w, want) in [
            (0, m * 0.49 / s),
            (1, m * 4.0 / s),
            (2, m * 0.49 / s),
            (3, m * 4.0 / s),
        ] {
            let got = pr.per_wall[w].unwrap();
            assert!((got / want - 1.0).abs() < 1e-6, "wall {w}: {got} vs {want}");
        }
        let ratio = pr.per_wall[1].unwrap() / pr.per_wall[0].unwrap();
        assert!((ratio - 4.0 / 0.49).abs() < 1e-6 * ratio);

        // 45 degrees: equal walls and PS = kBT
        let diag = evolve(&b, Vec2::new(0.2, 0.3), Vec2::new(1.0, 1.0), m, 20_000).unwrap();
        let pr = pressure_from_log(&diag, &b, PressureWindow::Collisions).unwrap();
        assert!((pr.per_wall[0].unwrap() / pr.per_wall[1].unwrap() - 1.0).abs() < 1e-6);
        assert!((pr.ps_over_kbt - 1.0).abs() < 1e-3);
    }

    #[test]
    fn corners_are_nudged() {
        let b = Billiard::native(&Shape::rectangle(1.0, 1.0).unwrap());
        let traj = evolve(&b, Vec2::new(0.5, 0.5), Vec2::new(1.0, 1.0), 1.0, 10).unwrap();
        assert!(traj.corner_nudges > 0);
        for c in &traj.collisions {
            let on = c.point.x.abs() < 1e-9
                || (c.point.x - 1.0).abs() < 1e-9
                || c.point.y.abs() < 1e-9
                || (c.point.y - 1.0).abs() < 1e-9;
            assert!(on);
        }
    }

    #[test]
    fn stadium_trajectory_covers_the_boundary() {
        let b = Billiard::mirror_completed(&Shape::stadium_quarter(1.0, 1.0).unwrap());
        assert!((b.area - (4.0 + PI)).abs() < 1e-12);
        assert!((b.perimeter - (4.0 + 2.0 * PI)).abs() < 1e-12);
        let traj = evolve(
            &b,
            Vec2::new(0.1, 0.2),
            Vec2::new(1.0, 0.37),
            NATURAL_MASS,
            10_000,
        )
        .unwrap();
        let mut deciles = [0usize; 10];
        for c in &traj.collisions {
            let s = b.arclength(c.wall_id, c.point) / b.perimeter;
            deciles[((s * 10.0) as usize).min(9)] += 1;
        }
        assert!(deciles.iter().all(|&d| d > 0), "{deciles:?}");
        let walls: std::collections::HashSet<usize> =
            traj.collisions.iter().map(|c| c.wall_id).collect();
        assert_eq!(walls.len(), 4);
    }

    #[test]
    fn ensemble_is_reproducible() {
        let b = Billiard::native(&Shape::rectangle(1.5, 1.0).unwrap());
        let a = ensemble_igl(&b, 200, 10.0, NATURAL_MASS, 500, 7).unwrap();
        let c = ensemble_igl(&b, 200, 10.0, NATURAL_MASS, 500, 7).unwrap();
        assert_eq!(a.mean.to_bits(), c.mean.to_bits());
        assert!((a.mean - 1.0).abs() < 5.0 * a.stderr + 0.01);
        let d = ensemble_igl(&b, 200, 10.0, NATURAL_MASS, 500, 8).unwrap();
        assert_ne!(a.mean.to_bits(), d.mean.to_bits());
        assert!(ensemble_igl(&b, 1, 10.0, NATURAL_MASS, 500, 7).is_err());
    }

    #[test]
    fn rejects_bad_initial_state() {
        let b = Billiard::native(&Shape::circle(1.0).unwrap());
        assert!(evolve(&b, Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0), 1.0, 5).is_err());
        assert!(evolve(&b, Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0), 1.0, 5).is_err());
    }
}
