//! Equipartition temperature, boundary pressures and the ideal-gas check.
//!
//! In natural units `k_BT` is the kinetic energy `E`, the mean pressure is
//! `P = (1/L)∮|∂ψ/∂n|² dl` and the weighted pressure is
//! `P₂ = (1/2S)∮|∂ψ/∂n|² r_n dl`.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundarySample, Vec2};
use crate::helmholtz::Grid;

/// One point of an ideal-gas scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureReport {
    pub label: String,
    #[serde(rename = "kBT")]
    pub kbt: f64,
    #[serde(rename = "PS")]
    pub ps: f64,
    #[serde(rename = "P2S")]
    pub p2s: f64,
    pub rel_dev: f64,
    pub rel_dev2: f64,
}

impl PressureReport {
    pub fn new(label: impl Into<String>, kbt: f64, ps: f64, p2s: f64) -> Result<Self> {
        if !(kbt.is_finite() && kbt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kBT must be > 0, got {kbt}"
            )));
        }
        Ok(Self {
            label: label.into(),
            kbt,
            ps,
            p2s,
            rel_dev: (ps - kbt) / kbt,
            rel_dev2: (p2s - kbt) / kbt,
        })
    }
}

/// `Σ w`, the perimeter seen by the quadrature.
pub fn quadrature_length(samples: &[BoundarySample]) -> f64 {
    samples.iter().map(|s| s.weight).sum()
}

/// `P = (1/L) Σ w f²`.
pub fn pressure_mean(samples: &[BoundarySample], flux: &[f64]) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(flux)
        .map(|(s, f)| s.weight * f * f)
        .sum();
    sum / quadrature_length(samples)
}

/// `P₂ = (1/2S) Σ w r_n f²`.
pub fn pressure_p2(samples: &[BoundarySample], flux: &[f64], area: f64) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(flux)
        .map(|(s, f)| s.weight * s.r_n * f * f)
        .sum();
    sum / (2.0 * area)
}

pub fn pressure_mean_complex(samples: &[BoundarySample], flux: &[Complex64]) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(flux)
        .map(|(s, f)| s.weight * f.norm_sqr())
        .sum();
    sum / quadrature_length(samples)
}

pub fn pressure_p2_complex(samples: &[BoundarySample], flux: &[Complex64], area: f64) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(flux)
        .map(|(s, f)| s.weight * s.r_n * f.norm_sqr())
        .sum();
    sum / (2.0 * area)
}

/// Pressure kernels between real states on a common quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureMatrices {
    /// `P_ij = (1/L) Σ w f_i f_j`.
    pub p: DMatrix<f64>,
    /// `(1/2S) Σ w r_n f_i f_j`.
    pub p2: DMatrix<f64>,
}

pub fn pressure_matrix(
    samples: &[BoundarySample],
    fluxes: &[&[f64]],
    area: f64,
) -> PressureMatrices {
    let n = fluxes.len();
    let len = quadrature_length(samples);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut p = vec![0.0; n];
            let mut p2 = vec![0.0; n];
            for j in i..n {
                let (mut a, mut b) = (0.0, 0.0);
                for (s, (x, y)) in samples.iter().zip(fluxes[i].iter().zip(fluxes[j])) {
                    let w = s.weight * x * y;
                    a += w;
                    b += w * s.r_n;
                }
                p[j] = a / len;
                p2[j] = b / (2.0 * area);
            }
            (p, p2)
        })
        .collect();
    let mut p = DMatrix::zeros(n, n);
    let mut p2 = DMatrix::zeros(n, n);
    for (i, (rp, rp2)) in rows.into_iter().enumerate() {
        for j in i..n {
            p[(i, j)] = rp[j];
            p[(j, i)] = rp[j];
            p2[(i, j)] = rp2[j];
            p2[(j, i)] = rp2[j];
        }
    }
    PressureMatrices { p, p2 }
}

/// Off-diagonal Rellich form `(1/(E_i + E_j)) Σ w r_n f_i f_j`.
pub fn rellich_offdiagonal(
    samples: &[BoundarySample],
    fi: &[f64],
    fj: &[f64],
    ei: f64,
    ej: f64,
) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(fi.iter().zip(fj))
        .map(|(s, (a, b))| s.weight * s.r_n * a * b)
        .sum();
    sum / (ei + ej)
}

/// Root-mean-square relative deviation of `PS` from `k_BT`.
pub fn mrd(points: &[PressureReport]) -> Result<f64> {
    mrd_by(points, |p| p.ps)
}

/// Same statistic for `P₂S`.
pub fn mrd_p2(points: &[PressureReport]) -> Result<f64> {
    mrd_by(points, |p| p.p2s)
}

fn mrd_by(points: &[PressureReport], value: impl Fn(&PressureReport) -> f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("mrd needs at least one point"));
    }
    let mut sum = 0.0;
    for p in points {
        if !(p.kbt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kBT must be > 0 in {}",
                p.label
            )));
        }
        sum += ((value(p) - p.kbt) / p.kbt).powi(2);
    }
    Ok((sum / points.len() as f64).sqrt())
}

/// `k_BT = Σ|c_j|² E_j` for normalized coefficients.
pub fn temperature(
    coeffs: &[Complex64],
    energies: &[f64],
    captured_norm: f64,
    threshold: f64,
) -> f64 {
    if captured_norm < threshold {
        warn!("captured norm {captured_norm} below threshold {threshold}");
    }
    coeffs
        .iter()
        .zip(energies)
        .map(|(c, e)| c.norm_sqr() * e)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LocalTempConvention {
    /// `|∇ψ|²`, pointwise nonnegative.
    #[default]
    Gradient,
    /// `-ψ ∇²ψ`, equal to `E ψ²` for an eigenstate.
    Laplacian,
}

/// Kinetic-energy density on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTemperatureField {
    pub convention: LocalTempConvention,
    pub points: Vec<Vec2>,
    pub values: Vec<f64>,
    /// Quadrature weights `h² m_P`.
    pub weights: Vec<f64>,
}

impl LocalTemperatureField {
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Values scaled to `[0, 1]` by the maximum magnitude.
    pub fn normalized(&self) -> Vec<f64> {
        let m = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            return self.values.clone();
        }
        self.values.iter().map(|v| v / m).collect()
    }
}

/// Discrete local temperature of a real nodal field normalized as
/// `h² Σ m_P u_P² = 1`. The gradient form splits the discrete energy
/// `h² uᵀKu` over nodes (half of each interior edge to either end, the cut
/// arms to their own node), so it integrates exactly to the Rayleigh quotient.
pub fn local_temperature(
    grid: &Grid,
    field: &[f64],
    convention: LocalTempConvention,
) -> LocalTemperatureField {
    let h2 = grid.h * grid.h;
    let values = grid
        .nodes
        .iter()
        .enumerate()
        .map(|(p, node)| {
            let up = field[p];
            let energy = match convention {
                LocalTempConvention::Gradient => {
                    let mut acc = 0.0;
                    for (k, nb) in node.neighbor.iter().enumerate() {
                        match nb {
                            Some(q) => acc += 0.5 * (field[*q as usize] - up).powi(2),
                            None => acc += up * up / node.theta[k],
                        }
                    }
                    acc
                }
                LocalTempConvention::Laplacian => {
                    let mut ku = grid.k_diag_unscaled(p) * up;
                    for q in node.neighbor.iter().flatten() {
                        ku -= field[*q as usize];
                    }
                    up * ku
                }
            };
            energy / (h2 * node.mass)
        })
        .collect();
    LocalTemperatureField {
        convention,
        points: grid.nodes.iter().map(|n| n.pos).collect(),
        values,
        weights: grid.nodes.iter().map(|n| h2 * n.mass).collect(),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::analytic::{
        circle_lowest, rectangle_lowest, rectangle_pressure_pair, rectangle_pressures,
        RectangleState,
    };
    use crate::geometry::{sample_boundary, Shape};

    #[test]
    fn report_fields() {
        let r = PressureReport::new("x", 2.0, 2.2, 1.9).unwrap();
        assert!((r.rel_dev - 0.1).abs() < 1e-15);
        assert!((r.rel_dev2 + 0.05).abs() < 1e-15);
        assert!(PressureReport::new("x", 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mrd_examples() {
        let on = vec![PressureReport::new("a", 1.0, 1.0, 1.0).unwrap(); 3];
        assert_eq!(mrd(&on).unwrap(), 0.0);
        let d = 0.07;
        let pts = [
            PressureReport::new("a", 2.0, 2.0 * (1.0 + d), 2.0).unwrap(),
            PressureReport::new("b", 5.0, 5.0 * (1.0 - d), 5.0).unwrap(),
        ];
        assert!((mrd(&pts).unwrap() - d).abs() < 1e-15);
        assert!(mrd(&[]).is_err());
    }

    #[test]
    fn circle_states_on_the_line() {
        let shape = Shape::circle(1.0).unwrap();
        let samples = sample_boundary(&shape, 200.0).unwrap();
        let mut pts = Vec::new();
        for s in circle_lowest(1.0, 60, true).unwrap() {
            let f = s.flux_on(&samples);
            let ps = pressure_mean_complex(&samples, &f) * shape.area();
            let p2s = pressure_p2_complex(&samples, &f, shape.area()) * shape.area();
            assert!((ps - p2s).abs() < 1e-10 * ps);
            pts.push(PressureReport::new(s.label(), s.energy, ps, p2s).unwrap());
        }
        assert!(mrd(&pts).unwrap() < 1e-10);
        assert_eq!(pressure_mean(&samples, &vec![0.0; samples.len()]), 0.0);
    }

    #[test]
    fn rectangle_quadrature_matches_closed_forms() {
        let lx = 1.0 + PI / 4.0;
        let shape = Shape::rectangle(lx, 1.0).unwrap();
        let samples = sample_boundary(&shape, 600.0).unwrap();
        let dense = sample_boundary(&shape, 1200.0).unwrap();
        for s in rectangle_lowest(lx, 1.0, 40).unwrap() {
            let closed = rectangle_pressures(&s);
            let f = s.flux_on(&samples);
            let p = pressure_mean(&samples, &f);
            let p2 = pressure_p2(&samples, &f, shape.area());
            assert!((p / closed.mean - 1.0).abs() < 1e-8);
            assert!((p2 / closed.p2 - 1.0).abs() < 1e-8);
            // density doubling moves nothing
            let fd = s.flux_on(&dense);
            assert!((pressure_mean(&dense, &fd) / p - 1.0).abs() < 1e-8);
            // global phase invariance
            let neg: Vec<f64> = f.iter().map(|x| -x).collect();
            assert_eq!(pressure_mean(&samples, &neg), p);
        }
    }

    #[test]
    fn matrix_diagonal_symmetry_and_oracle() {
        let shape = Shape::rectangle(1.0, 1.0).unwrap();
        let samples = sample_boundary(&shape, 600.0).unwrap();
        let states: Vec<RectangleState> = [(1, 1), (2, 2), (1, 3), (3, 1), (2, 1)]
            .iter()
            .map(|&(a, b)| RectangleState::new(a, b, 1.0, 1.0).unwrap())
            .collect();
        let fluxes: Vec<Vec<f64>> = states.iter().map(|s| s.flux_on(&samples)).collect();
        let refs: Vec<&[f64]> = fluxes.iter().map(|f| f.as_slice()).collect();
        let m = pressure_matrix(&samples, &refs, 1.0);
        for i in 0..states.len() {
            assert!((m.p[(i, i)] - pressure_mean(&samples, &fluxes[i])).abs() < 1e-12);
            for j in 0..states.len() {
                assert!((m.p[(i, j)] - m.p[(j, i)]).abs() < 1e-12);
                let (pij, p2ij) = rectangle_pressure_pair(&states[i], &states[j]);
                assert!((m.p[(i, j)] - pij).abs() < 1e-8 * m.p[(i, i)].max(1.0));
                assert!((m.p2[(i, j)] - p2ij).abs() < 1e-8 * m.p[(i, i)].max(1.0));
            }
        }
        // (1,1) and (2,2): nx + nx' odd on both wall pairs, so the kernel vanishes
        assert!(m.p[(0, 1)].abs() < 1e-10);
        // (1,1) and (1,3) share nx with ny + ny' even: nonzero on the horizontal walls
        let want = 4.0 * (PI * PI * 3.0) * 0.5 * 2.0 / 4.0;
        assert!((m.p[(0, 2)] / want - 1.0).abs() < 1e-8);
    }

    #[test]
    fn local_temperature_of_a_grid_rectangle_state() {
        let shape = Shape::rectangle(1.0, 1.0).unwrap();
        let grid = Grid::new(&shape, 1.0 / 40.0).unwrap();
        let st = RectangleState::new(1, 1, 1.0, 1.0).unwrap();
        let mut field: Vec<f64> = grid.nodes.iter().map(|n| st.psi(n.pos)).collect();
        let norm = grid.inner(&field, &field).sqrt();
        field.iter_mut().for_each(|v| *v /= norm);
        let g = local_temperature(&grid, &field, LocalTempConvention::Gradient);
        let l = local_temperature(&grid, &field, LocalTempConvention::Laplacian);
        assert!(g.values.iter().all(|&v| v >= 0.0));
        // both forms integrate to the discrete Rayleigh quotient
        let mut ku = vec![0.0; field.len()];
        grid.apply_k(&field, &mut ku);
        let rq: f64 = field.iter().zip(&ku).map(|(a, b)| a * b).sum::<f64>() * grid.h * grid.h;
        assert!((g.integral() - rq).abs() < 1e-10 * rq);
        assert!((l.integral() - rq).abs() < 1e-10 * rq);
        assert!((rq / st.energy - 1.0).abs() < 2e-3);
        // the gradient form nearly vanishes at the center
        let center = grid.unknown(20, 20).unwrap();
        assert!(g.values[center] < 1e-2 * g.values.iter().cloned().fold(0.0, f64::max));
    }
}
