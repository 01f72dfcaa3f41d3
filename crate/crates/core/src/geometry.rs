//! Billiard domains, boundary parametrization and boundary quadrature.
//!
//! Coordinates per variant:
//! - circle: centered at the origin;
//! - rectangle: `[0, Lx] x [0, Ly]`;
//! - quarter stadium: `[0, Ls] x [0, R]` joined with the quarter disc of radius
//!   `R` centered at `(Ls, 0)`, Dirichlet on the whole boundary (including the
//!   two symmetry lines).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;

#[inline]
fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// A billiard domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub enum Shape {
    Circle {
        radius: f64,
    },
    Rectangle {
        lx: f64,
        ly: f64,
    },
    /// Quarter of a Bunimovich stadium: straight part of length `ls`, quarter
    /// circle of radius `radius` at the right end. `ls = 0` is a quarter disc.
    StadiumQuarter {
        ls: f64,
        radius: f64,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeRepr {
    Circle {
        #[serde(rename = "R")]
        radius: f64,
    },
    Rectangle {
        #[serde(rename = "Lx")]
        lx: f64,
        #[serde(rename = "Ly")]
        ly: f64,
    },
    StadiumQuarter {
        #[serde(rename = "Ls")]
        ls: f64,
        #[serde(rename = "R")]
        radius: f64,
    },
}

impl TryFrom<ShapeRepr> for Shape {
    type Error = Error;

    fn try_from(repr: ShapeRepr) -> Result<Self> {
        match repr {
            ShapeRepr::Circle { radius } => Shape::circle(radius),
            ShapeRepr::Rectangle { lx, ly } => Shape::rectangle(lx, ly),
            ShapeRepr::StadiumQuarter { ls, radius } => Shape::stadium_quarter(ls, radius),
        }
    }
}

impl From<Shape> for ShapeRepr {
    fn from(shape: Shape) -> Self {
        match shape {
            Shape::Circle { radius } => ShapeRepr::Circle { radius },
            Shape::Rectangle { lx, ly } => ShapeRepr::Rectangle { lx, ly },
            Shape::StadiumQuarter { ls, radius } => ShapeRepr::StadiumQuarter { ls, radius },
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidShape(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

/// One smooth piece of a boundary, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPiece {
    Segment {
        start: Vec2,
        end: Vec2,
    },
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
}

impl BoundaryPiece {
    pub fn length(&self) -> f64 {
        match *self {
            BoundaryPiece::Segment { start, end } => (end - start).norm(),
            BoundaryPiece::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle),
        }
    }

    /// Point at fractional arclength `u` in `[0, 1]`.
    pub fn point(&self, u: f64) -> Vec2 {
        match *self {
            BoundaryPiece::Segment { start, end } => start + (end - start) * u,
            BoundaryPiece::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let phi = start_angle + u * (end_angle - start_angle);
                center + Vec2::new(phi.cos(), phi.sin()) * radius
            }
        }
    }

    /// Outward unit normal at fractional arclength `u`.
    pub fn normal(&self, u: f64) -> Vec2 {
        match *self {
            BoundaryPiece::Segment { start, end } => {
                let t = (end - start).normalize();
                Vec2::new(t.y, -t.x)
            }
            BoundaryPiece::Arc {
                start_angle,
                end_angle,
                ..
            } => {
                let phi = start_angle + u * (end_angle - start_angle);
                Vec2::new(phi.cos(), phi.sin())
            }
        }
    }

    /// Outward unit normal at a point lying on this piece.
    pub fn normal_at(&self, p: Vec2) -> Vec2 {
        match *self {
            BoundaryPiece::Segment { .. } => self.normal(0.0),
            BoundaryPiece::Arc { center, .. } => (p - center).normalize(),
        }
    }

    /// Orthogonal projection of `p` onto the curve carrying this piece.
    pub fn project(&self, p: Vec2) -> Vec2 {
        match *self {
            BoundaryPiece::Segment { start, end } => {
                let e = end - start;
                let s = ((p - start).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
                start + e * s
            }
            BoundaryPiece::Arc { center, radius, .. } => center + (p - center).normalize() * radius,
        }
    }

    /// Smallest ray parameter `t > t_min` at which `p + t d` meets this piece,
    /// together with the fractional arclength of the hit.
    pub fn intersect_ray(&self, p: Vec2, d: Vec2, t_min: f64) -> Option<(f64, f64)> {
        match *self {
            BoundaryPiece::Segment { start, end } => {
                let e = end - start;
                let denom = cross(d, e);
                if denom.abs() < 1e-300 {
                    return None;
                }
                let ap = start - p;
                let t = cross(ap, e) / denom;
                let s = cross(ap, d) / denom;
                const TOL: f64 = 1e-12;
                if t > t_min && (-TOL..=1.0 + TOL).contains(&s) {
                    Some((t, s.clamp(0.0, 1.0)))
                } else {
                    None
                }
            }
            BoundaryPiece::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let f = p - center;
                let a = d.norm_squared();
                let b = f.dot(&d) / a;
                let c = (f.norm_squared() - radius * radius) / a;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let span = end_angle - start_angle;
                let mut best: Option<(f64, f64)> = None;
                for t in [-b - sq, -b + sq] {
                    if t <= t_min {
                        continue;
                    }
                    let q = f + d * t;
                    let mut rel = q.y.atan2(q.x) - start_angle;
                    rel = rel.rem_euclid(TAU);
                    // tolerate tiny overshoots at the arc ends
                    if rel > span + 1e-12 && rel < TAU - 1e-12 {
                        continue;
                    }
                    let u = if rel > span + 1e-12 {
                        0.0
                    } else {
                        (rel / span).min(1.0)
                    };
                    if best.is_none_or(|(bt, _)| t < bt) {
                        best = Some((t, u));
                    }
                }
                best
            }
        }
    }
}

/// Quadrature node on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub point: Vec2,
    /// Outward unit normal.
    pub normal: Vec2,
    /// Arclength weight.
    pub weight: f64,
    /// `(point - origin) . normal`.
    pub r_n: f64,
    /// Index of the boundary piece carrying this node.
    pub piece: usize,
}

/// Area, centroid and central second moments of a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaMoments {
    pub area: f64,
    pub centroid: Vec2,
    /// Central moment `∫ (x - cx)^2 dA`.
    pub ixx: f64,
    /// Central moment `∫ (y - cy)^2 dA`.
    pub iyy: f64,
    /// Central product moment `∫ (x - cx)(y - cy) dA`.
    pub ixy: f64,
}

impl AreaMoments {
    /// Principal second moments, smaller first.
    pub fn principal(&self) -> (f64, f64) {
        let mean = 0.5 * (self.ixx + self.iyy);
        let half_diff = 0.5 * (self.ixx - self.iyy);
        let r = half_diff.hypot(self.ixy);
        (mean - r, mean + r)
    }

    pub fn anisotropy_index(&self) -> f64 {
        let (lo, hi) = self.principal();
        1.0 - lo / hi
    }
}

/// Raw (origin-based) moments accumulated over simple regions.
#[derive(Debug, Default, Clone, Copy)]
struct RawMoments {
    m0: f64,
    mx: f64,
    my: f64,
    mxx: f64,
    myy: f64,
    mxy: f64,
}

impl RawMoments {
    fn add_rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) {
        let (wx, wy) = (x1 - x0, y1 - y0);
        let sx = 0.5 * (x1 * x1 - x0 * x0);
        let sy = 0.5 * (y1 * y1 - y0 * y0);
        self.m0 += wx * wy;
        self.mx += sx * wy;
        self.my += sy * wx;
        self.mxx += (x1.powi(3) - x0.powi(3)) / 3.0 * wy;
        self.myy += (y1.powi(3) - y0.powi(3)) / 3.0 * wx;
        self.mxy += sx * sy;
    }

    /// Circular sector of radius `r` centered at `c`, polar angles `[a, b]`.
    fn add_sector(&mut self, c: Vec2, r: f64, a: f64, b: f64) {
        let area = 0.5 * r * r * (b - a);
        let r3 = r.powi(3) / 3.0;
        let r4 = r.powi(4) / 4.0;
        let u = r3 * (b.sin() - a.sin());
        let v = r3 * (a.cos() - b.cos());
        let uu = r4 * (0.5 * (b - a) + 0.25 * ((2.0 * b).sin() - (2.0 * a).sin()));
        let vv = r4 * (0.5 * (b - a) - 0.25 * ((2.0 * b).sin() - (2.0 * a).sin()));
        let uv = r4 * 0.5 * (b.sin().powi(2) - a.sin().powi(2));
        self.m0 += area;
        self.mx += c.x * area + u;
        self.my += c.y * area + v;
        self.mxx += c.x * c.x * area + 2.0 * c.x * u + uu;
        self.myy += c.y * c.y * area + 2.0 * c.y * v + vv;
        self.mxy += c.x * c.y * area + c.x * v + c.y * u + uv;
    }

    fn central(&self) -> AreaMoments {
        let cx = self.mx / self.m0;
        let cy = self.my / self.m0;
        AreaMoments {
            area: self.m0,
            centroid: Vec2::new(cx, cy),
            ixx: self.mxx - cx * cx * self.m0,
            iyy: self.myy - cy * cy * self.m0,
            ixy: self.mxy - cx * cy * self.m0,
        }
    }
}

impl Shape {
    pub fn circle(radius: f64) -> Result<Self> {
        check_positive("R", radius)?;
        Ok(Shape::Circle { radius })
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        check_positive("Lx", lx)?;
        check_positive("Ly", ly)?;
        Ok(Shape::Rectangle { lx, ly })
    }

    pub fn stadium_quarter(ls: f64, radius: f64) -> Result<Self> {
        if !(ls.is_finite() && ls >= 0.0) {
            return Err(Error::InvalidShape(format!(
                "Ls must be finite and >= 0, got {ls}"
            )));
        }
        check_positive("R", radius)?;
        Ok(Shape::StadiumQuarter { ls, radius })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Rectangle { .. } => "rectangle",
            Shape::StadiumQuarter { .. } => "stadium_quarter",
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Circle { radius } => PI * radius * radius,
            Shape::Rectangle { lx, ly } => lx * ly,
            Shape::StadiumQuarter { ls, radius } => radius * (ls + 0.25 * PI * radius),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            Shape::Circle { radius } => TAU * radius,
            Shape::Rectangle { lx, ly } => 2.0 * (lx + ly),
            Shape::StadiumQuarter { ls, radius } => 2.0 * (ls + radius) + FRAC_PI_2 * radius,
        }
    }

    /// Characteristic length used by the quasi-orthogonality criterion.
    pub fn characteristic_length(&self) -> f64 {
        match *self {
            Shape::Circle { radius } | Shape::StadiumQuarter { radius, .. } => radius,
            Shape::Rectangle { lx, ly } => lx.min(ly),
        }
    }

    /// Length entering the bounce time `tau = m * length / p`.
    pub fn bounce_length(&self) -> f64 {
        match *self {
            Shape::Circle { radius } => radius,
            Shape::Rectangle { lx, ly } => 0.5 * (lx + ly),
            Shape::StadiumQuarter { ls, radius } => ls + radius,
        }
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match *self {
            Shape::Circle { radius } => (Vec2::new(-radius, -radius), Vec2::new(radius, radius)),
            Shape::Rectangle { lx, ly } => (Vec2::zeros(), Vec2::new(lx, ly)),
            Shape::StadiumQuarter { ls, radius } => (Vec2::zeros(), Vec2::new(ls + radius, radius)),
        }
    }

    /// Boundary pieces in counterclockwise order.
    pub fn pieces(&self) -> Vec<BoundaryPiece> {
        match *self {
            Shape::Circle { radius } => vec![BoundaryPiece::Arc {
                center: Vec2::zeros(),
                radius,
                start_angle: 0.0,
                end_angle: TAU,
            }],
            Shape::Rectangle { lx, ly } => {
                let c = [
                    Vec2::new(0.0, 0.0),
                    Vec2::new(lx, 0.0),
                    Vec2::new(lx, ly),
                    Vec2::new(0.0, ly),
                ];
                (0..4)
                    .map(|i| BoundaryPiece::Segment {
                        start: c[i],
                        end: c[(i + 1) % 4],
                    })
                    .collect()
            }
            Shape::StadiumQuarter { ls, radius } => {
                let mut pieces = vec![
                    BoundaryPiece::Segment {
                        start: Vec2::new(0.0, 0.0),
                        end: Vec2::new(ls + radius, 0.0),
                    },
                    BoundaryPiece::Arc {
                        center: Vec2::new(ls, 0.0),
                        radius,
                        start_angle: 0.0,
                        end_angle: FRAC_PI_2,
                    },
                ];
                if ls > 0.0 {
                    pieces.push(BoundaryPiece::Segment {
                        start: Vec2::new(ls, radius),
                        end: Vec2::new(0.0, radius),
                    });
                }
                pieces.push(BoundaryPiece::Segment {
                    start: Vec2::new(0.0, radius),
                    end: Vec2::new(0.0, 0.0),
                });
                pieces
            }
        }
    }

    /// Boundary of the full stadium obtained by mirroring a quarter stadium
    /// across both symmetry lines; other shapes return their own boundary.
    pub fn mirror_completed_pieces(&self) -> Vec<BoundaryPiece> {
        match *self {
            Shape::StadiumQuarter { ls, radius } => {
                let mut pieces = Vec::with_capacity(4);
                if ls > 0.0 {
                    pieces.push(BoundaryPiece::Segment {
                        start: Vec2::new(-ls, -radius),
                        end: Vec2::new(ls, -radius),
                    });
                }
                pieces.push(BoundaryPiece::Arc {
                    center: Vec2::new(ls, 0.0),
                    radius,
                    start_angle: -FRAC_PI_2,
                    end_angle: FRAC_PI_2,
                });
                if ls > 0.0 {
                    pieces.push(BoundaryPiece::Segment {
                        start: Vec2::new(ls, radius),
                        end: Vec2::new(-ls, radius),
                    });
                }
                pieces.push(BoundaryPiece::Arc {
                    center: Vec2::new(-ls, 0.0),
                    radius,
                    start_angle: FRAC_PI_2,
                    end_angle: 1.5 * PI,
                });
                pieces
            }
            _ => self.pieces(),
        }
    }

    /// True iff `p` lies strictly inside the open domain.
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Shape::Circle { radius } => p.norm_squared() < radius * radius,
            Shape::Rectangle { lx, ly } => p.x > 0.0 && p.x < lx && p.y > 0.0 && p.y < ly,
            Shape::StadiumQuarter { ls, radius } => {
                if !(p.x > 0.0 && p.y > 0.0 && p.y < radius) {
                    return false;
                }
                if p.x <= ls {
                    true
                } else {
                    let dx = p.x - ls;
                    dx * dx + p.y * p.y < radius * radius
                }
            }
        }
    }

    /// Distance from the interior point `p` to the boundary along the unit
    /// direction `d`.
    pub fn ray_exit(&self, p: Vec2, d: Vec2) -> Option<f64> {
        self.pieces()
            .iter()
            .filter_map(|piece| piece.intersect_ray(p, d, 0.0))
            .map(|(t, _)| t)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Area moments computed from exact integrals over the simple regions
    /// (rectangles, circular sectors) composing the domain.
    pub fn moments(&self) -> AreaMoments {
        let mut raw = RawMoments::default();
        match *self {
            Shape::Circle { radius } => raw.add_sector(Vec2::zeros(), radius, 0.0, TAU),
            Shape::Rectangle { lx, ly } => raw.add_rect(0.0, lx, 0.0, ly),
            Shape::StadiumQuarter { ls, radius } => {
                if ls > 0.0 {
                    raw.add_rect(0.0, ls, 0.0, radius);
                }
                raw.add_sector(Vec2::new(ls, 0.0), radius, 0.0, FRAC_PI_2);
            }
        }
        raw.central()
    }

    /// Area moments of the mirror-completed full stadium (identical to
    /// [`Shape::moments`] for circles and rectangles).
    pub fn mirror_completed_moments(&self) -> AreaMoments {
        match *self {
            Shape::StadiumQuarter { ls, radius } => {
                let mut raw = RawMoments::default();
                if ls > 0.0 {
                    raw.add_rect(-ls, ls, -radius, radius);
                }
                raw.add_sector(Vec2::new(ls, 0.0), radius, -FRAC_PI_2, FRAC_PI_2);
                raw.add_sector(Vec2::new(-ls, 0.0), radius, FRAC_PI_2, 1.5 * PI);
                raw.central()
            }
            _ => self.moments(),
        }
    }

    pub fn centroid(&self) -> Vec2 {
        match *self {
            Shape::Circle { .. } => Vec2::zeros(),
            Shape::Rectangle { lx, ly } => Vec2::new(0.5 * lx, 0.5 * ly),
            Shape::StadiumQuarter { .. } => self.moments().centroid,
        }
    }
}

pub fn area(shape: &Shape) -> f64 {
    shape.area()
}

/// `(point - origin) . normal`.
pub fn r_n_of(point: Vec2, normal: Vec2, origin: Vec2) -> f64 {
    (point - origin).dot(&normal)
}

/// Anisotropy index `1 - I_min / I_max` of the domain itself.
pub fn anisotropy_index(shape: &Shape) -> f64 {
    shape.moments().anisotropy_index()
}

/// Anisotropy index of the mirror-completed domain (full stadium).
pub fn anisotropy_index_mirror_completed(shape: &Shape) -> f64 {
    shape.mirror_completed_moments().anisotropy_index()
}

pub fn contains(shape: &Shape, p: Vec2) -> bool {
    shape.contains(p)
}

/// Composite midpoint rule on every boundary piece with about
/// `n_per_unit_length` nodes per unit length; `r_n` measured from the centroid.
pub fn sample_boundary(shape: &Shape, n_per_unit_length: f64) -> Result<Vec<BoundarySample>> {
    sample_boundary_with_origin(shape, n_per_unit_length, shape.centroid())
}

pub fn sample_boundary_with_origin(
    shape: &Shape,
    n_per_unit_length: f64,
    origin: Vec2,
) -> Result<Vec<BoundarySample>> {
    if !(n_per_unit_length.is_finite() && n_per_unit_length >= 10.0) {
        return Err(Error::InvalidArgument(format!(
            "boundary sample density must be >= 10 per unit length, got {n_per_unit_length}"
        )));
    }
    let mut out = Vec::new();
    for (index, piece) in shape.pieces().iter().enumerate() {
        let len = piece.length();
        let n = ((len * n_per_unit_length - 1e-9).ceil() as usize).max(1);
        let closed = matches!(piece, BoundaryPiece::Arc { start_angle, end_angle, .. }
            if (end_angle - start_angle - TAU).abs() < 1e-12);
        let delta = if closed {
            None
        } else {
            midpoint_end_corrections(n)
        };
        for k in 0..n {
            let u = (k as f64 + 0.5) / n as f64;
            let point = piece.point(u);
            let normal = piece.normal(u);
            let mut weight = len / n as f64;
            if let Some(d) = delta {
                let edge = k.min(n - 1 - k);
                if edge < d.len() {
                    weight *= 1.0 + d[edge];
                }
            }
            out.push(BoundarySample {
                point,
                normal,
                weight,
                r_n: r_n_of(point, normal, origin),
                piece: index,
            });
        }
    }
    Ok(out)
}

/// Relative weight corrections on the three outermost midpoint nodes at each
/// end of an open piece, chosen so the rule integrates polynomials of degree
/// up to five exactly.
fn midpoint_end_corrections(n: usize) -> Option<[f64; 3]> {
    if n < 6 {
        return None;
    }
    let nf = n as f64;
    let node = |k: usize| (k as f64 + 0.5) / nf;
    let mut a = nalgebra::Matrix3::zeros();
    let mut b = nalgebra::Vector3::zeros();
    for (row, deg) in [0i32, 2, 4].into_iter().enumerate() {
        let plain: f64 = (0..n).map(|k| node(k).powi(deg)).sum::<f64>() / nf;
        b[row] = 1.0 / (deg as f64 + 1.0) - plain;
        for j in 0..3 {
            a[(row, j)] = (node(j).powi(deg) + node(n - 1 - j).powi(deg)) / nf;
        }
    }
    let d = a.lu().solve(&b)?;
    Some([d[0], d[1], d[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn areas_match_closed_forms() {
        assert!(rel(Shape::circle(1.0).unwrap().area(), PI) < 1e-15);
        assert_eq!(Shape::rectangle(1.0, 1.0).unwrap().area(), 1.0);
        let st = Shape::stadium_quarter(1.0, 1.0).unwrap();
        assert!(rel(st.area(), 1.0 + PI / 4.0) < 1e-15);
        assert!(rel(st.moments().area, st.area()) < 1e-14);
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(Shape::circle(0.0).is_err());
        assert!(Shape::rectangle(1.0, -2.0).is_err());
        assert!(Shape::stadium_quarter(-0.1, 1.0).is_err());
        assert!(Shape::stadium_quarter(0.0, 1.0).is_ok());
        assert!(Shape::circle(f64::NAN).is_err());
    }

    #[test]
    fn sample_counts_and_perimeters() {
        let c = sample_boundary(&Shape::circle(1.0).unwrap(), 100.0).unwrap();
        assert!((628..=629).contains(&c.len()));
        let total: f64 = c.iter().map(|s| s.weight).sum();
        assert!(rel(total, TAU) < 1e-12);

        let r = sample_boundary(&Shape::rectangle(2.0, 1.0).unwrap(), 10.0).unwrap();
        assert_eq!(r.len(), 60);
        let walls: std::collections::BTreeSet<_> = r.iter().map(|s| s.piece).collect();
        assert_eq!(walls.len(), 4);

        let st = Shape::stadium_quarter(1.0, 1.0).unwrap();
        let s = sample_boundary(&st, 100.0).unwrap();
        let total: f64 = s.iter().map(|s| s.weight).sum();
        assert!(rel(total, 2.0 + 1.0 + 1.0 + PI / 2.0) < 1e-12);
        assert!(rel(st.perimeter(), 4.0 + PI / 2.0) < 1e-15);
    }

    #[test]
    fn density_below_floor_rejected() {
        let c = Shape::circle(1.0).unwrap();
        assert!(sample_boundary(&c, 0.0).is_err());
        assert!(sample_boundary(&c, -5.0).is_err());
        assert!(sample_boundary(&c, 9.0).is_err());
    }

    #[test]
    fn r_n_examples() {
        let c = sample_boundary(&Shape::circle(1.0).unwrap(), 50.0).unwrap();
        for s in &c {
            assert!((s.r_n - 1.0).abs() < 1e-14);
            assert!((s.normal.norm() - 1.0).abs() < 1e-12);
        }
        // vertical wall of a centered rectangle
        let v = r_n_of(Vec2::new(1.0, 0.3), Vec2::new(1.0, 0.0), Vec2::zeros());
        assert_eq!(v, 1.0);
        // stadium arc with origin at the arc center
        let st = Shape::stadium_quarter(1.0, 1.0).unwrap();
        let arc = st.pieces()[1];
        for u in [0.1, 0.5, 0.9] {
            let p = arc.point(u);
            assert!((r_n_of(p, arc.normal(u), Vec2::new(1.0, 0.0)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn r_n_identity_from_centroid() {
        for shape in [
            Shape::circle(1.3).unwrap(),
            Shape::rectangle(1.0 + PI / 4.0, 1.0).unwrap(),
            Shape::stadium_quarter(1.0, 1.0).unwrap(),
            Shape::stadium_quarter(0.7123, 1.0).unwrap(),
            Shape::stadium_quarter(0.0, 1.0).unwrap(),
        ] {
            let s = sample_boundary(&shape, 100.0).unwrap();
            let sum: f64 = s.iter().map(|b| b.weight * b.r_n).sum();
            let ratio = sum / (2.0 * shape.area());
            let tol = if matches!(shape, Shape::StadiumQuarter { .. }) {
                1e-9
            } else {
                1e-12
            };
            assert!((ratio - 1.0).abs() < tol, "{shape:?}: {ratio}");
        }
    }

    #[test]
    fn contains_examples() {
        assert!(Shape::circle(1.0).unwrap().contains(Vec2::zeros()));
        assert!(!Shape::rectangle(1.0, 1.0)
            .unwrap()
            .contains(Vec2::new(1.1, 0.5)));
        let st = Shape::stadium_quarter(1.0, 1.0).unwrap();
        assert!(st.contains(Vec2::new(1.5, 0.5)));
        assert!(!st.contains(Vec2::new(1.9, 0.9)));
        assert!(!st.contains(Vec2::new(0.0, 0.5)));
    }

    #[test]
    fn anisotropy_examples() {
        assert!(anisotropy_index(&Shape::rectangle(1.0, 1.0).unwrap()).abs() < 1e-15);
        assert!((anisotropy_index(&Shape::rectangle(2.0, 1.0).unwrap()) - 0.75).abs() < 1e-14);
        assert!(anisotropy_index(&Shape::circle(2.0).unwrap()).abs() < 1e-14);
        let q0 = Shape::stadium_quarter(0.0, 1.0).unwrap();
        assert!(anisotropy_index_mirror_completed(&q0).abs() < 1e-14);
    }

    #[test]
    fn ray_exit_hits_nearest_wall() {
        let r = Shape::rectangle(2.0, 1.0).unwrap();
        let t = r
            .ray_exit(Vec2::new(0.5, 0.5), Vec2::new(1.0, 0.0))
            .unwrap();
        assert!((t - 1.5).abs() < 1e-14);
        let st = Shape::stadium_quarter(1.0, 1.0).unwrap();
        let t = st
            .ray_exit(Vec2::new(1.0, 0.5), Vec2::new(1.0, 0.0))
            .unwrap();
        assert!((t - 0.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let s = Shape::stadium_quarter(1.0, 1.0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"stadium_quarter","Ls":1.0,"R":1.0}"#);
        let back: Shape = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let c: Shape = serde_json::from_str(r#"{"kind":"circle","R":2.0}"#).unwrap();
        assert_eq!(c, Shape::Circle { radius: 2.0 });
        assert!(serde_json::from_str::<Shape>(r#"{"kind":"circle","R":2.0,"Lx":1}"#).is_err());
        assert!(serde_json::from_str::<Shape>(r#"{"kind":"circle","R":-2.0}"#).is_err());
    }
}
