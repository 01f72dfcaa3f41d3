//! Coherent states, their eigenbasis expansion and the time-dependent
//! boundary pressure.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::RectangleState;
use crate::error::{Error, Result};
use crate::geometry::{Shape, Vec2};
use crate::helmholtz::{EigenBasis, Grid};
use crate::thermo::{pressure_matrix, PressureMatrices};

/// Gaussian wavepacket `exp(-|r-Q|²/(2w²) + i P·r)`. With `w = 1` the
/// position variance is 1/2 per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherentStateSpec {
    #[serde(rename = "Qx")]
    pub qx: f64,
    #[serde(rename = "Qy")]
    pub qy: f64,
    #[serde(rename = "Px")]
    pub px: f64,
    #[serde(rename = "Py")]
    pub py: f64,
    #[serde(default = "unit_width")]
    pub width: f64,
}

fn unit_width() -> f64 {
    1.0
}

impl CoherentStateSpec {
    pub fn new(q: Vec2, p: Vec2, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coherent-state width must be > 0, got {width}"
            )));
        }
        if !(q.x.is_finite() && q.y.is_finite() && p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::InvalidArgument(
                "coherent-state parameters must be finite".into(),
            ));
        }
        Ok(Self {
            qx: q.x,
            qy: q.y,
            px: p.x,
            py: p.y,
            width,
        })
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.qx, self.qy)
    }

    pub fn momentum(&self) -> Vec2 {
        Vec2::new(self.px, self.py)
    }

    /// `k_m = |P|`.
    pub fn k_m(&self) -> f64 {
        self.momentum().norm()
    }

    /// Kinetic energy of the untruncated packet, `|P|² + 1/w²`.
    pub fn mean_energy(&self) -> f64 {
        self.k_m().powi(2) + 1.0 / (self.width * self.width)
    }

    /// Classical bounce time `m L / p` with `m = 1/2`.
    pub fn tau(&self, shape: &Shape) -> Result<f64> {
        let p = self.k_m();
        if p <= 0.0 {
            return Err(Error::InvalidArgument(
                "bounce time needs nonzero momentum".into(),
            ));
        }
        Ok(0.5 * shape.bounce_length() / p)
    }

    /// Unnormalized packet value.
    pub fn value(&self, r: Vec2) -> Complex64 {
        let d = r - self.center();
        let amp = (-d.norm_squared() / (2.0 * self.width * self.width)).exp();
        Complex64::from_polar(amp, self.momentum().dot(&r))
    }

    fn check_inside(&self, shape: &Shape) -> Result<()> {
        if !shape.contains(self.center()) {
            return Err(Error::OutsideDomain {
                x: self.qx,
                y: self.qy,
            });
        }
        Ok(())
    }
}

/// Coherent state sampled on a solver grid and renormalized on the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentField {
    pub values: Vec<Complex64>,
    /// Fraction of the free packet's probability that falls outside.
    pub discarded_mass: f64,
}

pub fn coherent_state(spec: &CoherentStateSpec, grid: &Grid) -> Result<CoherentField> {
    spec.check_inside(&grid.shape)?;
    let mut values: Vec<Complex64> = grid.nodes.iter().map(|n| spec.value(n.pos)).collect();
    let h2 = grid.h * grid.h;
    let inside: f64 = grid
        .nodes
        .iter()
        .zip(&values)
        .map(|(n, v)| h2 * n.mass * v.norm_sqr())
        .sum();
    let free = std::f64::consts::PI * spec.width * spec.width;
    let discarded_mass = (1.0 - inside / free).max(0.0);
    if discarded_mass > 0.01 {
        warn!(
            "coherent state loses {:.2}% of its mass to the boundary",
            100.0 * discarded_mass
        );
    }
    let scale = 1.0 / inside.sqrt();
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(CoherentField {
        values,
        discarded_mass,
    })
}

/// `h² Σ m φ ψ` for every state of a numeric basis.
pub fn project(basis: &EigenBasis, field: &[Complex64]) -> Vec<Complex64> {
    let grid = &basis.grid;
    let w: Vec<f64> = grid
        .nodes
        .iter()
        .map(|n| grid.h * grid.h * n.mass)
        .collect();
    basis
        .states
        .par_iter()
        .map(|s| {
            s.field
                .iter()
                .zip(field)
                .zip(&w)
                .map(|((phi, psi), w)| psi * (phi * w))
                .sum()
        })
        .collect()
}

/// Discrete kinetic energy `h² ψ* K ψ` of a nodal field.
pub fn grid_kinetic_energy(grid: &Grid, field: &[Complex64]) -> f64 {
    let re: Vec<f64> = field.iter().map(|c| c.re).collect();
    let im: Vec<f64> = field.iter().map(|c| c.im).collect();
    let mut k = vec![0.0; field.len()];
    let mut e = 0.0;
    for part in [&re, &im] {
        grid.apply_k(part, &mut k);
        e += part.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>();
    }
    e * grid.h * grid.h
}

/// Truncated, renormalized expansion on a window `|k - k_m| ≤ Δk`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralExpansion {
    /// Basis indices, ascending.
    pub support: Vec<usize>,
    /// Coefficients on `support`, scaled to unit norm.
    pub coeffs: Vec<Complex64>,
    pub energies: Vec<f64>,
    /// `Σ|c_j|²` over the window before renormalization.
    pub captured_norm: f64,
    pub k_m: f64,
    pub delta_k: f64,
    /// Set when the whole basis was used without reaching the threshold.
    pub degraded: bool,
}

impl SpectralExpansion {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `k_BT = Σ|c_j|² E_j`.
    pub fn temperature(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c.norm_sqr() * e)
            .sum()
    }

    /// `Σ|c_j(t)|² E_j` with the phases applied, constant up to rounding.
    pub fn temperature_at(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| (c * Complex64::from_polar(1.0, -e * t)).norm_sqr() * e)
            .sum()
    }
}

/// Picks the narrowest k-window around `k_m` capturing `threshold` of the norm.
pub fn expand(
    coeffs: &[Complex64],
    energies: &[f64],
    k_m: f64,
    threshold: f64,
    accept_degraded: bool,
) -> Result<SpectralExpansion> {
    if coeffs.len() != energies.len() {
        return Err(Error::InvalidArgument(
            "coefficient and energy counts differ".into(),
        ));
    }
    if coeffs.is_empty() {
        return Err(Error::Empty("expansion basis"));
    }
    let dk: Vec<f64> = energies
        .iter()
        .map(|e| (e.max(0.0).sqrt() - k_m).abs())
        .collect();
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| dk[a].total_cmp(&dk[b]).then(a.cmp(&b)));
    let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if total > 1.0 + 1e-9 {
        warn!("captured norm {total} exceeds one");
    }
    let mut captured = 0.0;
    let mut taken = 0;
    while taken < order.len() {
        // take the whole shell at this |k - k_m| so ties are not split
        let edge = dk[order[taken]];
        while taken < order.len() && dk[order[taken]] <= edge {
            captured += coeffs[order[taken]].norm_sqr();
            taken += 1;
        }
        if captured >= threshold {
            break;
        }
    }
    let delta_k = dk[order[taken - 1]];
    let degraded = captured < threshold;
    if degraded {
        let k_lo = (k_m - delta_k).max(0.0);
        if !accept_degraded {
            return Err(Error::InsufficientNorm {
                captured,
                threshold,
                k_lo,
                k_hi: k_m + delta_k,
            });
        }
        warn!("expansion degraded: captured norm {captured:.6} over the whole basis");
    }
    let mut support: Vec<usize> = order[..taken].to_vec();
    support.sort_unstable();
    let scale = 1.0 / captured.sqrt();
    Ok(SpectralExpansion {
        coeffs: support.iter().map(|&i| coeffs[i] * scale).collect(),
        energies: support.iter().map(|&i| energies[i]).collect(),
        support,
        captured_norm: captured,
        k_m,
        delta_k,
        degraded,
    })
}

/// Source of the pressure kernels `P_ij` and `P2_ij`.
pub trait PressureKernels: Sync {
    fn area(&self) -> f64;
    fn energies(&self) -> Vec<f64>;
    /// Kernels restricted to `support` (in that order).
    fn kernels(&self, support: &[usize]) -> PressureMatrices;
}

impl PressureKernels for EigenBasis {
    fn area(&self) -> f64 {
        self.shape.area()
    }

    fn energies(&self) -> Vec<f64> {
        EigenBasis::energies(self)
    }

    fn kernels(&self, support: &[usize]) -> PressureMatrices {
        let fluxes: Vec<&[f64]> = support
            .iter()
            .map(|&i| self.states[i].flux.as_slice())
            .collect();
        pressure_matrix(&self.samples, &fluxes, self.area())
    }
}

/// Analytic rectangle eigenbasis with closed-form kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangleBasis {
    pub lx: f64,
    pub ly: f64,
    pub states: Vec<RectangleState>,
}

impl RectangleBasis {
    pub fn below(lx: f64, ly: f64, e_max: f64) -> Result<Self> {
        Ok(Self {
            lx,
            ly,
            states: crate::analytic::rectangle_spectrum_below(lx, ly, e_max)?,
        })
    }

    /// Overlaps with a truncated, renormalized coherent state from separable
    /// 1-D integrals. Returns the coefficients and the discarded mass.
    pub fn project(&self, spec: &CoherentStateSpec) -> Result<(Vec<Complex64>, f64)> {
        let shape = Shape::rectangle(self.lx, self.ly)?;
        spec.check_inside(&shape)?;
        let w = spec.width;
        let ix = gauss_mass(spec.qx, w, self.lx);
        let iy = gauss_mass(spec.qy, w, self.ly);
        let discarded = (1.0 - ix * iy / (std::f64::consts::PI * w * w)).max(0.0);
        if discarded > 0.01 {
            warn!(
                "coherent state loses {:.2}% of its mass to the walls",
                100.0 * discarded
            );
        }
        let nx_max = self.states.iter().map(|s| s.nx).max().unwrap_or(0);
        let ny_max = self.states.iter().map(|s| s.ny).max().unwrap_or(0);
        let ox: Vec<Complex64> = (1..=nx_max)
            .map(|n| sine_overlap(n, self.lx, spec.qx, spec.px, w))
            .collect();
        let oy: Vec<Complex64> = (1..=ny_max)
            .map(|n| sine_overlap(n, self.ly, spec.qy, spec.py, w))
            .collect();
        let norm = 1.0 / (ix * iy).sqrt();
        let c = self
            .states
            .iter()
            .map(|s| ox[s.nx as usize - 1] * oy[s.ny as usize - 1] * norm)
            .collect();
        Ok((c, discarded))
    }
}

impl PressureKernels for RectangleBasis {
    fn area(&self) -> f64 {
        self.lx * self.ly
    }

    fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    fn kernels(&self, support: &[usize]) -> PressureMatrices {
        let n = support.len();
        let mut p = DMatrix::zeros(n, n);
        let mut p2 = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let (x, y) = crate::analytic::rectangle_pressure_pair(
                    &self.states[support[a]],
                    &self.states[support[b]],
                );
                p[(a, b)] = x;
                p[(b, a)] = x;
                p2[(a, b)] = y;
                p2[(b, a)] = y;
            }
        }
        PressureMatrices { p, p2 }
    }
}

const PANELS: usize = 4000;

/// Integration range of a Gaussian centred at `q` clipped to `[0, len]`.
fn gauss_range(q: f64, w: f64, len: f64) -> (f64, f64) {
    ((q - 12.0 * w).max(0.0), (q + 12.0 * w).min(len))
}

fn simpson(a: f64, b: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let n = PANELS;
    let step = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + step * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (step / 3.0)
}

/// `∫_0^len exp(-(x-q)²/w²) dx`.
fn gauss_mass(q: f64, w: f64, len: f64) -> f64 {
    let (a, b) = gauss_range(q, w, len);
    simpson(a, b, |x| {
        Complex64::new((-(x - q).powi(2) / (w * w)).exp(), 0.0)
    })
    .re
}

/// `∫_0^len √(2/len) sin(nπx/len) exp(-(x-q)²/(2w²) + ipx) dx`.
fn sine_overlap(n: u32, len: f64, q: f64, p: f64, w: f64) -> Complex64 {
    let k = n as f64 * std::f64::consts::PI / len;
    let amp = (2.0 / len).sqrt();
    let (a, b) = gauss_range(q, w, len);
    simpson(a, b, |x| {
        Complex64::from_polar(
            amp * (k * x).sin() * (-(x - q).powi(2) / (2.0 * w * w)).exp(),
            p * x,
        )
    })
}

/// `Σ_jk c_j* c_k e^{i(E_j-E_k)t} K_jk`; the imaginary part is rounding only.
pub fn pressure_at(expansion: &SpectralExpansion, kernel: &DMatrix<f64>, t: f64) -> Complex64 {
    let a: Vec<Complex64> = expansion
        .coeffs
        .iter()
        .zip(&expansion.energies)
        .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
        .collect();
    let n = a.len();
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut ka = Complex64::new(0.0, 0.0);
        for k in 0..n {
            ka += a[k] * kernel[(k, j)];
        }
        sum += a[j].conj() * ka;
    }
    sum
}

pub fn pressure_timeseries(
    expansion: &SpectralExpansion,
    kernel: &DMatrix<f64>,
    times: &[f64],
) -> Vec<f64> {
    times
        .par_iter()
        .map(|&t| pressure_at(expansion, kernel, t).re)
        .collect()
}

/// `Σ|c_i|² K_ii`.
pub fn diagonal_pressure(expansion: &SpectralExpansion, kernel: &DMatrix<f64>) -> f64 {
    expansion
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm_sqr() * kernel[(i, i)])
        .sum()
}

/// Mean of `e^{iωt}` over `[t0, t0 + len]`.
pub fn phase_average(omega: f64, t0: f64, len: f64) -> Complex64 {
    let x = omega * len;
    if x.abs() < 1e-8 {
        return Complex64::from_polar(1.0, omega * (t0 + 0.5 * len));
    }
    Complex64::from_polar(1.0, omega * t0) * (Complex64::from_polar(1.0, x) - 1.0)
        / Complex64::new(0.0, x)
}

/// Exact time average of the pressure over `[t0, t0 + len]`.
pub fn window_average(
    expansion: &SpectralExpansion,
    kernel: &DMatrix<f64>,
    t0: f64,
    len: f64,
) -> f64 {
    let (c, e) = (&expansion.coeffs, &expansion.energies);
    let n = c.len();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += c[j].conj() * c[k] * kernel[(j, k)] * phase_average(e[j] - e[k], t0, len);
            }
            acc.re
        })
        .sum()
}

/// Relaxation time and post-transient mean of a sampled series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transient {
    pub t_relax: f64,
    pub average: f64,
    /// Long-run level of the sliding standard deviation.
    pub floor: f64,
    pub detected: bool,
}

/// Sliding standard deviation over `window` samples, one value per start.
fn sliding_std(series: &[f64], window: usize) -> Vec<f64> {
    let mut s1 = vec![0.0; series.len() + 1];
    let mut s2 = vec![0.0; series.len() + 1];
    for (i, x) in series.iter().enumerate() {
        s1[i + 1] = s1[i] + x;
        s2[i + 1] = s2[i] + x * x;
    }
    let w = window as f64;
    (0..=series.len() - window)
        .map(|i| {
            let m = (s1[i + window] - s1[i]) / w;
            ((s2[i + window] - s2[i]) / w - m * m).max(0.0).sqrt()
        })
        .collect()
}

/// `t_relax` is the first window start after which the sliding 10τ standard
/// deviation stays below twice its long-run floor (the median over the second
/// half of the run). Relaxation found in the second half is not accepted and
/// the whole-series mean is returned instead.
pub fn transient_and_average(series: &[f64], dt: f64, tau: f64) -> Result<Transient> {
    if series.is_empty() {
        return Err(Error::Empty("time series"));
    }
    if !(dt > 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument(
            "time step and tau must be > 0".into(),
        ));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let window = ((10.0 * tau / dt).round() as usize).max(2);
    if series.len() < 4 * window {
        warn!("series shorter than four transient windows");
        return Ok(Transient {
            t_relax: 0.0,
            average: mean(series),
            floor: f64::NAN,
            detected: false,
        });
    }
    let sd = sliding_std(series, window);
    let mut tail: Vec<f64> = sd[sd.len() / 2..].to_vec();
    tail.sort_by(f64::total_cmp);
    let floor = tail[tail.len() / 2];
    let limit = 2.0 * floor + 1e-14 * series.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut start = sd.len();
    for i in (0..sd.len()).rev() {
        if sd[i] > limit {
            break;
        }
        start = i;
    }
    if start >= series.len() / 2 {
        warn!("no relaxation detected before mid-run");
        return Ok(Transient {
            t_relax: 0.0,
            average: mean(series),
            floor,
            detected: false,
        });
    }
    Ok(Transient {
        t_relax: start as f64 * dt,
        average: mean(&series[start..]),
        floor,
        detected: true,
    })
}

/// Log-log slope of `|mean_{[t0, t0+T]} P - target|` against `T`, fitted on
/// the running upper envelope of the error over log-spaced windows.
pub fn averaging_slope(
    expansion: &SpectralExpansion,
    kernel: &DMatrix<f64>,
    t0: f64,
    t_min: f64,
    t_max: f64,
    target: f64,
) -> f64 {
    let n = 32;
    let lens: Vec<f64> = (0..n)
        .map(|i| t_min * (t_max / t_min).powf(i as f64 / (n - 1) as f64))
        .collect();
    let mut err: Vec<f64> = lens
        .iter()
        .map(|&len| {
            (window_average(expansion, kernel, t0, len) - target)
                .abs()
                .max(1e-300)
        })
        .collect();
    for i in (0..n - 1).rev() {
        err[i] = err[i].max(err[i + 1]);
    }
    let xs: Vec<f64> = lens.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let (mx, my) = (
        xs.iter().sum::<f64>() / n as f64,
        ys.iter().sum::<f64>() / n as f64,
    );
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Knobs for a coherent-state run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSettings {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub accept_degraded: bool,
    #[serde(default = "default_steps")]
    pub steps_per_tau: f64,
    #[serde(default = "default_horizon")]
    pub horizon_tau: f64,
}

fn default_threshold() -> f64 {
    0.999
}

fn default_steps() -> f64 {
    50.0
}

fn default_horizon() -> f64 {
    300.0
}

impl Default for DynamicsSettings {
    fn default() -> Self {
        Self {
            threshold: default_threshold(),
            accept_degraded: false,
            steps_per_tau: default_steps(),
            horizon_tau: default_horizon(),
        }
    }
}

/// Evolved pressures of one coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentRun {
    pub spec: CoherentStateSpec,
    pub tau: f64,
    pub area: f64,
    pub expansion: SpectralExpansion,
    pub discarded_mass: f64,
    pub kbt: f64,
    /// Largest relative excursion of `Σ|c_j(t)|² E_j` over the samples.
    pub kbt_drift: f64,
    pub times: Vec<f64>,
    pub ps: Vec<f64>,
    pub p2s: Vec<f64>,
    pub ps_diag: f64,
    pub p2s_diag: f64,
    pub transient: Transient,
    pub transient_p2: Transient,
    /// Log-log convergence slope of the windowed `PS` average to `PS_diag`.
    pub slope: f64,
}

impl CoherentRun {
    pub fn degraded(&self) -> bool {
        self.expansion.degraded || !self.transient.detected
    }
}

/// Expands `coeffs` (one per basis state) and evolves `PS` and `P₂S`.
pub fn evolve_coherent<K: PressureKernels>(
    basis: &K,
    coeffs: &[Complex64],
    discarded_mass: f64,
    spec: &CoherentStateSpec,
    tau: f64,
    settings: &DynamicsSettings,
) -> Result<CoherentRun> {
    let energies = basis.energies();
    let expansion = expand(
        coeffs,
        &energies,
        spec.k_m(),
        settings.threshold,
        settings.accept_degraded,
    )?;
    let kern = basis.kernels(&expansion.support);
    let area = basis.area();
    let dt = tau / settings.steps_per_tau;
    let steps = (settings.horizon_tau * settings.steps_per_tau).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let ps: Vec<f64> = pressure_timeseries(&expansion, &kern.p, &times)
        .into_iter()
        .map(|p| p * area)
        .collect();
    let p2s: Vec<f64> = pressure_timeseries(&expansion, &kern.p2, &times)
        .into_iter()
        .map(|p| p * area)
        .collect();
    let kbt = expansion.temperature();
    let kbt_drift = times
        .iter()
        .map(|&t| (expansion.temperature_at(t) / kbt - 1.0).abs())
        .fold(0.0, f64::max);
    let ps_diag = diagonal_pressure(&expansion, &kern.p) * area;
    let p2s_diag = diagonal_pressure(&expansion, &kern.p2) * area;
    let transient = transient_and_average(&ps, dt, tau)?;
    let transient_p2 = transient_and_average(&p2s, dt, tau)?;
    let t_end = *times.last().unwrap_or(&0.0);
    let span = (t_end - transient.t_relax).max(20.0 * tau);
    let slope = averaging_slope(
        &expansion,
        &kern.p,
        transient.t_relax,
        10.0 * tau,
        span,
        ps_diag / area,
    );
    Ok(CoherentRun {
        spec: *spec,
        tau,
        area,
        expansion,
        discarded_mass,
        kbt,
        kbt_drift,
        times,
        ps,
        p2s,
        ps_diag,
        p2s_diag,
        transient,
        transient_p2,
        slope,
    })
}
