//! Spectrum slicing with shift-invert Lanczos on a symmetric banded matrix.
//!
//! Sylvester inertia of `B - σI` gives the exact number of eigenvalues below
//! `σ`, so the spectrum is cut into windows holding a known number of
//! eigenvalues. Each window is solved by Lanczos on `(B - σI)^{-1}` about its
//! midpoint with full reorthogonalization, locking and explicit restarts;
//! restarting against the locked vectors recovers every member of a
//! degenerate eigenspace.

use log::{debug, warn};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::{BandLdl, SymBand};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSettings {
    /// Desired number of eigenvalues per window.
    pub window_target: usize,
    pub max_restarts: usize,
    /// Required `‖Bv - λv‖ / λ`.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self {
            window_target: 40,
            max_restarts: 40,
            residual_tol: 1e-8,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit eigenvector of `B`.
    pub vector: Vec<f64>,
    /// `‖Bv - λv‖ / λ`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(v, u)| *v += alpha * u);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Factorizes `B - σI`, nudging `σ` away from an exact eigenvalue.
pub fn factor_nudged(b: &SymBand, sigma: f64) -> Result<BandLdl> {
    let step = 1e-7 * sigma.abs().max(1.0);
    let mut last = None;
    for attempt in 0..6 {
        let s = sigma + step * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        match b.factor_shifted(s) {
            Ok(f) => return Ok(f),
            Err(e) => {
                debug!("factorization at shift {s} failed: {e}");
                last = Some(e);
            }
        }
    }
    Err(last.unwrap_or(Error::Factorization {
        shift: sigma,
        reason: "no attempt".into(),
    }))
}

/// Number of eigenvalues of `B` below `sigma` (and the shift actually used).
pub fn count_below(b: &SymBand, sigma: f64) -> Result<(usize, f64)> {
    let f = factor_nudged(b, sigma)?;
    Ok((f.negative_count(), f.shift()))
}

fn residual(b: &SymBand, v: &[f64], lambda: f64, scratch: &mut [f64]) -> f64 {
    b.matvec(v, scratch);
    let r: f64 = scratch
        .iter()
        .zip(v)
        .map(|(bv, x)| (bv - lambda * x).powi(2))
        .sum();
    r.sqrt() / lambda.abs().max(f64::MIN_POSITIVE)
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// All eigenpairs of `B` in `[lo, hi)`, of which there are exactly `expected`.
pub fn solve_window(
    b: &SymBand,
    lo: f64,
    hi: f64,
    expected: usize,
    settings: &EigenSettings,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    let n = b.n();
    if expected == 0 {
        return Ok(Vec::new());
    }
    let fac = factor_nudged(b, 0.5 * (lo + hi))?;
    let sigma = fac.shift();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = (2 * expected + 40).min(n);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut scratch = vec![0.0; n];
    let mut start = random_unit(n, &mut rng);

    for restart in 0..settings.max_restarts {
        orthogonalize(&mut start, &locked);
        let mut s = norm(&start);
        if s < 1e-8 {
            start = random_unit(n, &mut rng);
            orthogonalize(&mut start, &locked);
            s = norm(&start);
        }
        start.iter_mut().for_each(|x| *x /= s);

        let mut q: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut tail: f64;
        loop {
            let k = alpha.len();
            let mut w = q[k].clone();
            fac.solve_in_place(&mut w);
            let a = dot(&q[k], &w);
            axpy(-a, &q[k], &mut w);
            if k > 0 {
                axpy(-beta[k - 1], &q[k - 1], &mut w);
            }
            orthogonalize(&mut w, &locked);
            orthogonalize(&mut w, &q);
            alpha.push(a);
            let bn = norm(&w);
            tail = bn;
            let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if alpha.len() >= kmax || bn <= 1e-13 * scale {
                break;
            }
            if alpha.len() % 10 == 0 {
                let (theta, last_row) = tridiag_eigs(&alpha, &beta);
                let done = theta
                    .iter()
                    .zip(&last_row)
                    .filter(|(t, s)| {
                        let lam = sigma + 1.0 / **t;
                        lam >= lo && lam < hi && (bn * s.abs()) <= 1e-10 * t.abs()
                    })
                    .count();
                if done + locked.len() >= expected {
                    break;
                }
            }
            beta.push(bn);
            w.iter_mut().for_each(|x| *x /= bn);
            q.push(w);
        }

        let (theta, vecs) = tridiag_full(&alpha, &beta);
        let m = alpha.len();
        let mut unconverged = vec![0.0; n];
        let mut any_unconverged = false;
        for (i, t) in theta.iter().enumerate() {
            let lam_est = sigma + 1.0 / t;
            if !(lam_est >= lo && lam_est < hi) {
                continue;
            }
            let mut y = vec![0.0; n];
            for j in 0..m {
                axpy(vecs[(j, i)], &q[j], &mut y);
            }
            let yn = norm(&y);
            y.iter_mut().for_each(|x| *x /= yn);
            b.matvec(&y, &mut scratch);
            let lam = dot(&y, &scratch);
            let res = residual(b, &y, lam, &mut scratch);
            let est = tail * vecs[(m - 1, i)].abs();
            if res < settings.residual_tol && lam >= lo && lam < hi {
                orthogonalize(&mut y, &locked);
                let yn = norm(&y);
                if yn > 0.5 {
                    y.iter_mut().for_each(|x| *x /= yn);
                    locked.push(y);
                }
            } else {
                debug!(
                    "window [{lo}, {hi}) restart {restart}: λ≈{lam_est} res {res:e} est {est:e}"
                );
                axpy(1.0, &y, &mut unconverged);
                any_unconverged = true;
            }
        }
        if locked.len() >= expected {
            break;
        }
        start = if any_unconverged {
            let noise = random_unit(n, &mut rng);
            axpy(1e-3, &noise, &mut unconverged);
            unconverged
        } else {
            random_unit(n, &mut rng)
        };
    }

    // Rayleigh–Ritz on the locked subspace
    let m = locked.len();
    let mut bv = vec![vec![0.0; n]; m];
    for (v, out) in locked.iter().zip(bv.iter_mut()) {
        b.matvec(v, out);
    }
    let g = DMatrix::from_fn(m, m, |i, j| {
        0.5 * (dot(&locked[i], &bv[j]) + dot(&locked[j], &bv[i]))
    });
    let eig = SymmetricEigen::new(g);
    let mut pairs: Vec<EigenPair> = (0..m)
        .map(|c| {
            let mut v = vec![0.0; n];
            for (r, l) in locked.iter().enumerate() {
                axpy(eig.eigenvectors[(r, c)], l, &mut v);
            }
            let vn = norm(&v);
            v.iter_mut().for_each(|x| *x /= vn);
            b.matvec(&v, &mut scratch);
            let value = dot(&v, &scratch);
            let res = residual(b, &v, value, &mut scratch);
            EigenPair {
                value,
                vector: v,
                residual: res,
            }
        })
        .collect();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    pairs.retain(|p| p.value >= lo && p.value < hi);
    if pairs.len() != expected || pairs.iter().any(|p| p.residual >= settings.residual_tol) {
        return Err(Error::EigenNonConvergence {
            lo,
            hi,
            found: pairs.len(),
            expected,
        });
    }
    Ok(pairs)
}

fn tridiag_matrix(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

fn tridiag_eigs(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (vals, vecs) = tridiag_full(alpha, beta);
    let m = alpha.len();
    let last = (0..vals.len()).map(|i| vecs[(m - 1, i)]).collect();
    (vals, last)
}

fn tridiag_full(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(tridiag_matrix(alpha, &beta[..alpha.len() - 1]));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// How far to slice the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceTarget {
    /// Every eigenvalue `≤ e_max`.
    Below(f64),
    /// The lowest `count` eigenvalues.
    Lowest(usize),
}

/// Eigenpairs of the positive definite `B` from the bottom of the spectrum,
/// ascending. `density` is an estimate of eigenvalues per unit energy used
/// only to size the windows.
pub fn slice_spectrum(
    b: &SymBand,
    target: SliceTarget,
    density: f64,
    settings: &EigenSettings,
) -> Result<Vec<EigenPair>> {
    let goal = settings.window_target.max(4);
    let mut width = goal as f64 / density.max(1e-12);
    let mut lo = 0.0;
    let mut c_lo = 0usize;
    let mut out: Vec<EigenPair> = Vec::new();
    let mut window = 0u64;
    let e_cap = match target {
        SliceTarget::Below(e) => Some(e * (1.0 + 1e-12)),
        SliceTarget::Lowest(c) if c > b.n() => {
            return Err(Error::InvalidArgument(format!(
                "{c} eigenvalues requested from {} unknowns",
                b.n()
            )))
        }
        SliceTarget::Lowest(_) => None,
    };
    loop {
        if let SliceTarget::Lowest(c) = target {
            if out.len() >= c {
                out.truncate(c);
                break;
            }
        }
        if let Some(cap) = e_cap {
            if lo >= cap {
                break;
            }
        }
        let mut hi = lo + width;
        if let Some(cap) = e_cap {
            hi = hi.min(cap);
        }
        let (c_hi, hi_used) = count_below(b, hi)?;
        let m = c_hi - c_lo;
        if m > goal + goal / 2 && hi_used < e_cap.unwrap_or(f64::INFINITY) {
            width *= 0.6 * goal as f64 / m as f64;
            continue;
        }
        if m == 0 {
            lo = hi_used;
            width *= 2.0;
            continue;
        }
        let pairs = solve_window(
            b,
            lo,
            hi_used,
            m,
            settings,
            settings.seed ^ window.wrapping_mul(0x9e37_79b9),
        )?;
        debug!("window [{lo:.4}, {hi_used:.4}) -> {m} eigenvalues");
        out.extend(pairs);
        window += 1;
        lo = hi_used;
        c_lo = c_hi;
        width *= (goal as f64 / m as f64).clamp(0.5, 2.0);
    }
    if out.windows(2).any(|w| w[0].value > w[1].value) {
        warn!("eigenvalues out of order across windows");
        out.sort_by(|a, b| a.value.total_cmp(&b.value));
    }
    Ok(out)
}
