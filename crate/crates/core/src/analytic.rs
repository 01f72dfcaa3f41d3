//! Closed-form eigenstates of the circular and rectangular billiards.
//!
//! Natural units: `ħ = 1`, `2m = 1`, so `E = k²`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundarySample, Vec2};
use crate::specfun;

/// Angular dependence of a circle state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircleAngular {
    /// `e^{ijθ}`
    Exp,
    /// `e^{-ijθ}`, the degenerate partner of `Exp` for `j ≥ 1`.
    ExpConj,
    /// `√2 cos(jθ)` (plain `1` for `j = 0`).
    Cos,
    /// `√2 sin(jθ)`, only for `j ≥ 1`.
    Sin,
}

/// `ψ = C J_j(kr) Θ(θ)` on the disc of radius `R` centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleState {
    pub j: u32,
    pub n: u32,
    pub radius: f64,
    /// Bessel zero `x_jn`.
    pub zero: f64,
    pub k: f64,
    pub energy: f64,
    /// `C_jn`, real and positive.
    pub norm_const: f64,
    pub angular: CircleAngular,
}

impl CircleState {
    pub fn new(j: u32, n: u32, radius: f64) -> Result<Self> {
        Self::with_angular(j, n, radius, CircleAngular::Exp)
    }

    pub fn with_angular(j: u32, n: u32, radius: f64, angular: CircleAngular) -> Result<Self> {
        let zero = specfun::bessel_zero(j, n)?.value;
        Self::from_zero(j, n, radius, zero, angular)
    }

    fn from_zero(j: u32, n: u32, radius: f64, zero: f64, angular: CircleAngular) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidShape(format!(
                "radius must be > 0, got {radius}"
            )));
        }
        if j == 0 && angular == CircleAngular::Sin {
            return Err(Error::InvalidArgument(
                "sin(0θ) vanishes identically".into(),
            ));
        }
        let jp1 = specfun::bessel_j(j + 1, zero)?;
        let norm_const = 1.0 / (PI.sqrt() * radius * jp1.abs());
        let k = zero / radius;
        Ok(Self {
            j,
            n,
            radius,
            zero,
            k,
            energy: k * k,
            norm_const,
            angular,
        })
    }

    pub fn label(&self) -> String {
        let tag = match self.angular {
            CircleAngular::Exp => "",
            CircleAngular::ExpConj => "-",
            CircleAngular::Cos => "c",
            CircleAngular::Sin => "s",
        };
        format!("j={}{},n={}", tag, self.j, self.n)
    }

    fn angular_factor(&self, theta: f64) -> Complex64 {
        let jt = self.j as f64 * theta;
        let real_scale = if self.j == 0 {
            1.0
        } else {
            std::f64::consts::SQRT_2
        };
        match self.angular {
            CircleAngular::Exp => Complex64::from_polar(1.0, jt),
            CircleAngular::ExpConj => Complex64::from_polar(1.0, -jt),
            CircleAngular::Cos => Complex64::new(real_scale * jt.cos(), 0.0),
            CircleAngular::Sin => Complex64::new(real_scale * jt.sin(), 0.0),
        }
    }

    /// `ψ(r, θ)`; zero outside the disc.
    pub fn psi_polar(&self, r: f64, theta: f64) -> Complex64 {
        if r >= self.radius {
            return Complex64::new(0.0, 0.0);
        }
        let radial = specfun::jn_sequence(self.j as usize, self.k * r)[self.j as usize];
        self.angular_factor(theta) * (self.norm_const * radial)
    }

    pub fn psi(&self, p: Vec2) -> Complex64 {
        self.psi_polar(p.norm(), p.y.atan2(p.x))
    }

    /// Outward normal derivative `∂ψ/∂r` at `r = R`:
    /// `C k J'_j(x_jn) Θ(θ) = -C k J_{j+1}(x_jn) Θ(θ)`.
    pub fn boundary_flux(&self, theta: f64) -> Complex64 {
        let seq = specfun::jn_sequence(self.j as usize + 1, self.zero);
        let dj = specfun::derivative_from_sequence(&seq, self.j as usize);
        self.angular_factor(theta) * (self.norm_const * self.k * dj)
    }

    /// `|∂ψ/∂n|²` at the boundary for the complex convention, `k²/(πR²)`.
    pub fn uniform_flux_sq(&self) -> f64 {
        self.k * self.k / (PI * self.radius * self.radius)
    }

    /// Flux at each boundary sample of a circle of the same radius.
    pub fn flux_on(&self, samples: &[BoundarySample]) -> Vec<Complex64> {
        let seq = specfun::jn_sequence(self.j as usize + 1, self.zero);
        let dj = specfun::derivative_from_sequence(&seq, self.j as usize);
        let amp = self.norm_const * self.k * dj;
        samples
            .iter()
            .map(|s| self.angular_factor(s.point.y.atan2(s.point.x)) * amp)
            .collect()
    }

    /// Real flux; only valid for the `Cos`/`Sin` conventions.
    pub fn real_flux_on(&self, samples: &[BoundarySample]) -> Result<Vec<f64>> {
        if matches!(self.angular, CircleAngular::Exp | CircleAngular::ExpConj) && self.j > 0 {
            return Err(Error::InvalidArgument(
                "complex circle state has no real flux".into(),
            ));
        }
        Ok(self.flux_on(samples).into_iter().map(|c| c.re).collect())
    }
}

/// Wall of the rectangle `[0, Lx] x [0, Ly]`, in boundary order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    Bottom,
    Right,
    Top,
    Left,
}

/// `ψ = (2/√(LxLy)) sin(nxπx/Lx) sin(nyπy/Ly)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleState {
    pub nx: u32,
    pub ny: u32,
    pub lx: f64,
    pub ly: f64,
    pub energy: f64,
}

/// Wall-resolved and boundary-averaged pressures of a rectangle eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectanglePressures {
    /// Average over either wall `x = 0` or `x = Lx`.
    pub wall_vertical: f64,
    /// Average over either wall `y = 0` or `y = Ly`.
    pub wall_horizontal: f64,
    pub mean: f64,
    pub p2: f64,
}

impl RectangleState {
    pub fn new(nx: u32, ny: u32, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(
                "rectangle quantum numbers start at 1".into(),
            ));
        }
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return Err(Error::InvalidShape(format!(
                "rectangle sides must be > 0, got {lx} x {ly}"
            )));
        }
        let energy = PI * PI * ((nx as f64 / lx).powi(2) + (ny as f64 / ly).powi(2));
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            energy,
        })
    }

    pub fn label(&self) -> String {
        format!("nx={},ny={}", self.nx, self.ny)
    }

    pub fn k(&self) -> f64 {
        self.energy.sqrt()
    }

    fn amp(&self) -> f64 {
        2.0 / (self.lx * self.ly).sqrt()
    }

    fn kx(&self) -> f64 {
        self.nx as f64 * PI / self.lx
    }

    fn ky(&self) -> f64 {
        self.ny as f64 * PI / self.ly
    }

    pub fn psi(&self, p: Vec2) -> f64 {
        self.amp() * (self.kx() * p.x).sin() * (self.ky() * p.y).sin()
    }

    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let (sx, cx) = (self.kx() * p.x).sin_cos();
        let (sy, cy) = (self.ky() * p.y).sin_cos();
        Vec2::new(self.kx() * cx * sy, self.ky() * sx * cy) * self.amp()
    }

    /// Outward normal derivative at `point` with outward `normal`.
    pub fn normal_derivative(&self, point: Vec2, normal: Vec2) -> f64 {
        self.gradient(point).dot(&normal)
    }

    pub fn flux_on(&self, samples: &[BoundarySample]) -> Vec<f64> {
        samples
            .iter()
            .map(|s| self.normal_derivative(s.point, s.normal))
            .collect()
    }

    /// Outward normal derivative on `wall` at arclength coordinate `s`
    /// (`y` on vertical walls, `x` on horizontal ones).
    pub fn wall_flux(&self, wall: Wall, s: f64) -> f64 {
        let (p, n) = match wall {
            Wall::Bottom => (Vec2::new(s, 0.0), Vec2::new(0.0, -1.0)),
            Wall::Right => (Vec2::new(self.lx, s), Vec2::new(1.0, 0.0)),
            Wall::Top => (Vec2::new(s, self.ly), Vec2::new(0.0, 1.0)),
            Wall::Left => (Vec2::new(0.0, s), Vec2::new(-1.0, 0.0)),
        };
        self.normal_derivative(p, n)
    }

    /// `-ψ ∇²ψ = E ψ²`, the pointwise Laplacian-form energy density.
    pub fn laplacian_density(&self, p: Vec2) -> f64 {
        self.energy * self.psi(p).powi(2)
    }

    /// `|∇ψ|²`.
    pub fn gradient_density(&self, p: Vec2) -> f64 {
        self.gradient(p).norm_squared()
    }
}

/// Closed-form wall and mean pressures of a rectangle eigenstate.
pub fn rectangle_pressures(state: &RectangleState) -> RectanglePressures {
    let RectangleState { nx, ny, lx, ly, .. } = *state;
    let pi2 = PI * PI;
    let (nx2, ny2) = ((nx as f64).powi(2), (ny as f64).powi(2));
    RectanglePressures {
        wall_vertical: 2.0 * nx2 * pi2 / (lx.powi(3) * ly),
        wall_horizontal: 2.0 * ny2 * pi2 / (ly.powi(3) * lx),
        mean: 2.0 * pi2 * (nx2 / lx.powi(3) + ny2 / ly.powi(3)) / (lx + ly),
        p2: pi2 * (nx2 / (lx * lx) + ny2 / (ly * ly)) / (lx * ly),
    }
}

/// Closed-form off-diagonal pressure kernels between two states of the same
/// rectangle: `(P_ab, P2_ab)` with `P_ab = (1/L)∮ f_a f_b dl` and
/// `P2_ab = (1/2S)∮ f_a f_b r_n dl` (origin at the center).
pub fn rectangle_pressure_pair(a: &RectangleState, b: &RectangleState) -> (f64, f64) {
    let (lx, ly) = (a.lx, a.ly);
    let s = lx * ly;
    let parity = |m: u32, n: u32| if (m + n) % 2 == 0 { 2.0 } else { 0.0 };
    let vertical = if a.ny == b.ny {
        4.0 / s * (a.kx() * b.kx()) * (ly / 2.0) * parity(a.nx, b.nx)
    } else {
        0.0
    };
    let horizontal = if a.nx == b.nx {
        4.0 / s * (a.ky() * b.ky()) * (lx / 2.0) * parity(a.ny, b.ny)
    } else {
        0.0
    };
    let p = (vertical + horizontal) / (2.0 * (lx + ly));
    let p2 = (vertical * lx / 2.0 + horizontal * ly / 2.0) / (2.0 * s);
    (p, p2)
}

fn sort_by_energy<T>(states: &mut [T], key: impl Fn(&T) -> (f64, u32, u32, u8)) {
    states.sort_by(|a, b| {
        let (ea, a1, a2, a3) = key(a);
        let (eb, b1, b2, b3) = key(b);
        ea.total_cmp(&eb)
            .then(a1.cmp(&b1))
            .then(a2.cmp(&b2))
            .then(a3.cmp(&b3))
    });
}

/// All rectangle states with `E ≤ e_max`, ascending in energy.
pub fn rectangle_spectrum_below(lx: f64, ly: f64, e_max: f64) -> Result<Vec<RectangleState>> {
    RectangleState::new(1, 1, lx, ly)?;
    let mut out = Vec::new();
    let nx_max = (lx * e_max.max(0.0).sqrt() / PI).floor() as u32;
    for nx in 1..=nx_max {
        let rest = e_max - (PI * nx as f64 / lx).powi(2);
        if rest <= 0.0 {
            break;
        }
        let ny_max = (ly * rest.sqrt() / PI).floor() as u32;
        for ny in 1..=ny_max {
            let s = RectangleState::new(nx, ny, lx, ly)?;
            if s.energy <= e_max {
                out.push(s);
            }
        }
    }
    sort_by_energy(&mut out, |s| (s.energy, s.nx, s.ny, 0));
    Ok(out)
}

/// The lowest `count` rectangle states.
pub fn rectangle_lowest(lx: f64, ly: f64, count: usize) -> Result<Vec<RectangleState>> {
    let s = lx * ly;
    let mut e_max = (4.0 * PI * count as f64 / s).max(RectangleState::new(1, 1, lx, ly)?.energy);
    loop {
        let spec = rectangle_spectrum_below(lx, ly, e_max)?;
        if spec.len() >= count {
            return Ok(spec.into_iter().take(count).collect());
        }
        e_max *= 1.25;
    }
}

/// All circle states with `E ≤ e_max`; levels with `j ≥ 1` appear twice
/// (`Exp` and `ExpConj`) when `with_partners` is set, once otherwise.
pub fn circle_spectrum_below(
    radius: f64,
    e_max: f64,
    with_partners: bool,
) -> Result<Vec<CircleState>> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidShape(format!(
            "radius must be > 0, got {radius}"
        )));
    }
    let x_max = radius * e_max.max(0.0).sqrt();
    let mut out = Vec::new();
    let mut j = 0u32;
    while (j as f64) < x_max {
        let zeros = specfun::bessel_zeros_below(j, x_max)?;
        if zeros.is_empty() {
            break;
        }
        for z in zeros {
            out.push(CircleState::from_zero(
                j,
                z.index,
                radius,
                z.value,
                CircleAngular::Exp,
            )?);
            if with_partners && j > 0 {
                out.push(CircleState::from_zero(
                    j,
                    z.index,
                    radius,
                    z.value,
                    CircleAngular::ExpConj,
                )?);
            }
        }
        j += 1;
    }
    out.retain(|s| s.energy <= e_max);
    sort_by_energy(&mut out, |s| {
        (
            s.energy,
            s.j,
            s.n,
            u8::from(s.angular == CircleAngular::ExpConj),
        )
    });
    Ok(out)
}

/// The lowest `count` circle states, degenerate partners counted separately.
pub fn circle_lowest(radius: f64, count: usize, with_partners: bool) -> Result<Vec<CircleState>> {
    let s = PI * radius * radius;
    let mut e_max = (4.0 * PI * count as f64 / s).max(10.0 / (radius * radius));
    loop {
        let spec = circle_spectrum_below(radius, e_max, with_partners)?;
        if spec.len() >= count {
            return Ok(spec.into_iter().take(count).collect());
        }
        e_max *= 1.25;
    }
}

/// Leading Weyl estimate `S E / 4π` of the number of states below `E`.
pub fn weyl_count(area: f64, energy: f64) -> f64 {
    area * energy / (4.0 * PI)
}

/// Weyl estimate including the Dirichlet perimeter correction `-L√E/4π`.
pub fn weyl_count_corrected(area: f64, perimeter: f64, energy: f64) -> f64 {
    (area * energy - perimeter * energy.max(0.0).sqrt()) / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_boundary, Shape};

    #[test]
    fn circle_ground_state_energy() {
        let s = CircleState::new(0, 1, 1.0).unwrap();
        let x = specfun::bessel_zero(0, 1).unwrap().value;
        assert!((s.energy - x * x).abs() < 1e-12);
        assert!((s.energy - 5.7832).abs() < 1e-4);
    }

    #[test]
    fn circle_dirichlet_and_flux() {
        for (j, n) in [(0u32, 1u32), (1, 1), (3, 2), (7, 4)] {
            let s = CircleState::new(j, n, 1.3).unwrap();
            for t in 0..16 {
                let theta = t as f64 * 0.39;
                let edge = specfun::bessel_j(j, s.zero).unwrap() * s.norm_const;
                assert!(edge.abs() < 1e-12);
                let f = s.boundary_flux(theta);
                assert!((f.norm_sqr() - s.uniform_flux_sq()).abs() < 1e-10 * s.uniform_flux_sq());
            }
            // PS = E from the uniform flux
            let ps = s.uniform_flux_sq() * PI * 1.3 * 1.3;
            assert!((ps / s.energy - 1.0).abs() < 1e-12);
        }
    }

    /// Polar quadrature of |ψ|² over the disc: Gauss-free composite Simpson
    /// in r and a periodic trapezoid in θ.
    fn disc_norm(s: &CircleState) -> f64 {
        let nr = 2000;
        let nt = 4 * s.j as usize + 16;
        let hr = s.radius / nr as f64;
        let mut total = 0.0;
        for i in 0..=nr {
            let r = i as f64 * hr;
            let w = if i == 0 || i == nr {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let ring: f64 = (0..nt)
                .map(|t| s.psi_polar(r, t as f64 * 2.0 * PI / nt as f64).norm_sqr())
                .sum::<f64>()
                * 2.0
                * PI
                / nt as f64;
            total += w * ring * r;
        }
        total * hr / 3.0
    }

    #[test]
    fn circle_normalization_by_quadrature() {
        for (j, n, ang) in [
            (0u32, 1u32, CircleAngular::Exp),
            (2, 3, CircleAngular::Exp),
            (5, 1, CircleAngular::Cos),
            (4, 2, CircleAngular::Sin),
        ] {
            let s = CircleState::with_angular(j, n, 0.8, ang).unwrap();
            assert!((disc_norm(&s) - 1.0).abs() < 1e-8, "j={j} n={n}");
        }
        assert!(CircleState::with_angular(0, 1, 1.0, CircleAngular::Sin).is_err());
    }

    #[test]
    fn rectangle_examples() {
        let s = RectangleState::new(1, 1, 1.0, 1.0).unwrap();
        assert!((s.energy - 2.0 * PI * PI).abs() < 1e-12);
        assert!((s.psi(Vec2::new(0.5, 0.5)) - 2.0).abs() < 1e-15);
        let r = RectangleState::new(3, 2, 1.7, 1.0).unwrap();
        let p = rectangle_pressures(&r);
        assert!((p.wall_vertical - 2.0 * 9.0 * PI * PI / (1.7f64.powi(3))).abs() < 1e-12);
        // the flux at the left wall midpoint has magnitude (2/√S)(nxπ/Lx)
        let s = RectangleState::new(1, 1, 1.5, 1.0).unwrap();
        let f = s.wall_flux(Wall::Left, 0.5);
        assert!((f.abs() - 2.0 / 1.5f64.sqrt() * PI / 1.5).abs() < 1e-12);
        assert!(RectangleState::new(0, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn rectangle_exact_igl() {
        for &lx in &[1.0, 1.0 + PI / 4.0, 1.5 + PI / 4.0] {
            for s in rectangle_lowest(lx, 1.0, 500).unwrap() {
                let p = rectangle_pressures(&s);
                assert!((p.p2 * lx / s.energy - 1.0).abs() < 1e-12);
                if lx == 1.0 && s.nx == s.ny {
                    assert!((p.mean * lx / s.energy - 1.0).abs() < 1e-12);
                }
            }
        }
        // any square state obeys PS = E, not only nx = ny
        for s in rectangle_lowest(2.0, 2.0, 50).unwrap() {
            assert!((rectangle_pressures(&s).mean * 4.0 / s.energy - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn anisotropic_splitting() {
        let lx = 1.0 + PI / 4.0;
        let a = rectangle_pressures(&RectangleState::new(3, 1, lx, 1.0).unwrap()).mean * lx;
        let b = rectangle_pressures(&RectangleState::new(1, 3, lx, 1.0).unwrap()).mean * lx;
        // direct evaluation of the definition: wall averages weighted by wall lengths
        let direct = |nx: f64, ny: f64| {
            let pv = 2.0 * nx * nx * PI * PI / (lx.powi(3));
            let ph = 2.0 * ny * ny * PI * PI / lx;
            (2.0 * 1.0 * pv + 2.0 * lx * ph) / (2.0 * (lx + 1.0)) * lx
        };
        assert!((a - direct(3.0, 1.0)).abs() < 1e-12);
        assert!((b - direct(1.0, 3.0)).abs() < 1e-12);
        assert!((a - b).abs() > 1.0);
    }

    /// Independent 1-D composite Simpson oracle of ∮|∂ψ/∂n|² dl.
    fn boundary_integral_oracle(s: &RectangleState, weight_rn: bool) -> f64 {
        let n = 4000;
        let mut total = 0.0;
        for (wall, len, rn) in [
            (Wall::Bottom, s.lx, s.ly / 2.0),
            (Wall::Right, s.ly, s.lx / 2.0),
            (Wall::Top, s.lx, s.ly / 2.0),
            (Wall::Left, s.ly, s.lx / 2.0),
        ] {
            let h = len / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * s.wall_flux(wall, i as f64 * h).powi(2);
            }
            total += acc * h / 3.0 * if weight_rn { rn } else { 1.0 };
        }
        total
    }

    #[test]
    fn closed_forms_match_boundary_integral() {
        let lx = 1.0 + PI / 4.0;
        for (nx, ny) in [(1u32, 1u32), (3, 1), (1, 3), (4, 7)] {
            let s = RectangleState::new(nx, ny, lx, 1.0).unwrap();
            let p = rectangle_pressures(&s);
            let l = 2.0 * (lx + 1.0);
            assert!((boundary_integral_oracle(&s, false) / l / p.mean - 1.0).abs() < 1e-10);
            assert!((boundary_integral_oracle(&s, true) / (2.0 * lx) / p.p2 - 1.0).abs() < 1e-10);
            // twice π²(nx²/Lx³ + ny²/Ly³)/(Lx + Ly)
            let half = PI * PI / (lx + 1.0) * ((nx * nx) as f64 / lx.powi(3) + (ny * ny) as f64);
            assert!((p.mean / half - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_kernel_matches_quadrature() {
        let lx = 1.3;
        let shape = Shape::rectangle(lx, 1.0).unwrap();
        let samples = sample_boundary(&shape, 400.0).unwrap();
        let states = rectangle_lowest(lx, 1.0, 12).unwrap();
        for a in &states {
            for b in &states {
                let (fa, fb) = (a.flux_on(&samples), b.flux_on(&samples));
                let raw: f64 = samples
                    .iter()
                    .zip(fa.iter().zip(&fb))
                    .map(|(s, (x, y))| s.weight * x * y)
                    .sum();
                let raw2: f64 = samples
                    .iter()
                    .zip(fa.iter().zip(&fb))
                    .map(|(s, (x, y))| s.weight * s.r_n * x * y)
                    .sum();
                let (p, p2) = rectangle_pressure_pair(a, b);
                let scale = a.energy.max(b.energy);
                assert!(
                    (raw / shape.perimeter() - p).abs() < 1e-8 * scale,
                    "{a:?} {b:?}"
                );
                assert!((raw2 / (2.0 * shape.area()) - p2).abs() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn spectrum_enumeration() {
        let pi2 = PI * PI;
        let sq = rectangle_spectrum_below(1.0, 1.0, 50.0 * pi2).unwrap();
        let mut brute = 0;
        for nx in 1..=8 {
            for ny in 1..=8 {
                if nx * nx + ny * ny <= 50 {
                    brute += 1;
                }
            }
        }
        assert_eq!(sq.len(), brute);
        assert!(sq.windows(2).all(|w| w[0].energy <= w[1].energy));
        let lx = 1.0 + PI / 4.0;
        let low = rectangle_lowest(lx, 1.0, 1).unwrap();
        assert_eq!((low[0].nx, low[0].ny), (1, 1));

        // circle R=1, E ≤ 100: brute-force count over Bessel zeros
        let circ = circle_spectrum_below(1.0, 100.0, true).unwrap();
        let mut count = 0;
        for j in 0..20u32 {
            for z in specfun::bessel_zeros(j, 6).unwrap() {
                if z.value * z.value <= 100.0 {
                    count += if j == 0 { 1 } else { 2 };
                }
            }
        }
        assert_eq!(circ.len(), count);
        assert!(circ.windows(2).all(|w| w[0].energy <= w[1].energy));
        let once = circle_spectrum_below(1.0, 100.0, false).unwrap();
        assert!(once.len() < circ.len());
    }

    #[test]
    fn weyl_consistency() {
        let lx = 1.0 + PI / 4.0;
        let e = 4000.0;
        let n = rectangle_spectrum_below(lx, 1.0, e).unwrap().len() as f64;
        let w = weyl_count(lx, e);
        assert!((n / w - 1.0).abs() < 0.15);
        let corrected = weyl_count_corrected(lx, 2.0 * (lx + 1.0), e);
        assert!((n / corrected - 1.0).abs() < 0.02);
        let c = circle_spectrum_below(1.0, e, true).unwrap().len() as f64;
        assert!((c / weyl_count(PI, e) - 1.0).abs() < 0.15);
    }
}
