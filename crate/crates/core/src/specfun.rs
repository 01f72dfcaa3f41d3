//! Integer-order Bessel functions of the first kind and their zeros.
//!
//! `J_j(x)` is evaluated with Miller's backward recurrence normalized by
//! `J_0 + 2 Σ J_2k = 1`, switching to the Hankel asymptotic expansion plus
//! forward recurrence once `x` is large compared with `j²`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Positive zero `x_jn` of `J_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselZero {
    pub order: u32,
    /// 1-based index `n`.
    pub index: u32,
    pub value: f64,
}

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_BY: f64 = 1e-200;

fn check_argument(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )))
    }
}

/// `J_j(x)`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_argument(x)?;
    Ok(jn_sequence(order as usize, x)[order as usize])
}

/// `J'_j(x)`, using `J'_0 = -J_1` and `J'_j = (J_{j-1} - J_{j+1}) / 2`.
pub fn bessel_j_derivative(order: u32, x: f64) -> Result<f64> {
    check_argument(x)?;
    let j = order as usize;
    let seq = jn_sequence(j + 1, x);
    Ok(derivative_from_sequence(&seq, j))
}

/// `[J_0(x), ..., J_max(x)]`.
pub fn bessel_j_sequence(max_order: u32, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    Ok(jn_sequence(max_order as usize, x))
}

pub(crate) fn derivative_from_sequence(seq: &[f64], j: usize) -> f64 {
    if j == 0 {
        -seq[1]
    } else {
        0.5 * (seq[j - 1] - seq[j + 1])
    }
}

fn use_asymptotic(max_order: usize, x: f64) -> bool {
    let m = max_order as f64;
    x >= 500.0 && x >= 4.0 * m * m + 100.0
}

/// Unchecked evaluation of `J_0..=J_max` for `x >= 0`.
pub(crate) fn jn_sequence(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if use_asymptotic(max_order, x) {
        out[0] = hankel_asymptotic(0, x);
        if max_order >= 1 {
            out[1] = hankel_asymptotic(1, x);
        }
        // forward recurrence is stable while the order stays below x
        for k in 1..max_order {
            out[k + 1] = 2.0 * k as f64 / x * out[k] - out[k - 1];
        }
        return out;
    }
    miller(max_order, x, &mut out);
    out
}

fn miller(max_order: usize, x: f64, out: &mut [f64]) {
    let n = max_order.max(x.ceil() as usize);
    let mut start = n + 20 + (12.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut f_next = 0.0;
    let mut f = 1.0;
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k <= max_order {
            out[k] = f;
        }
        if k % 2 == 0 {
            sum += 2.0 * f;
        }
        let f_prev = k as f64 * two_over_x * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE_ABOVE {
            f *= RESCALE_BY;
            f_next *= RESCALE_BY;
            sum *= RESCALE_BY;
            for v in out[k.min(max_order + 1)..].iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = f;
    sum += f;
    for v in out.iter_mut() {
        *v /= sum;
    }
}

/// Hankel expansion `J_ν(x) ~ sqrt(2/(πx)) (P cos χ - Q sin χ)`.
fn hankel_asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// McMahon's large-`n` estimate of `x_jn`.
pub fn mcmahon_estimate(order: u32, index: u32) -> f64 {
    let beta = (index as f64 + 0.5 * order as f64 - 0.25) * PI;
    let mu = 4.0 * (order as f64).powi(2);
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
}

fn value_and_slope(j: usize, x: f64) -> (f64, f64) {
    let seq = jn_sequence(j + 1, x);
    (seq[j], derivative_from_sequence(&seq, j))
}

/// Safeguarded Newton inside a sign-change bracket.
fn polish(j: usize, mut a: f64, mut b: f64, guess: f64) -> f64 {
    let (fa, _) = value_and_slope(j, a);
    let mut sign_a = fa.signum();
    let mut x = if guess > a && guess < b {
        guess
    } else {
        0.5 * (a + b)
    };
    for _ in 0..100 {
        let (f, df) = value_and_slope(j, x);
        if f == 0.0 {
            return x;
        }
        if f.signum() == sign_a {
            a = x;
            sign_a = f.signum();
        } else {
            b = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x || b - a <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

const SCAN_STEP: f64 = 0.5;

/// Walks `J_j` upward from `x = j` (no zero lies below), bracketing sign
/// changes. Consecutive zeros are more than two units apart, so each step
/// holds at most one.
fn scan_zeros(order: u32, limit: ScanLimit) -> Result<Vec<BesselZero>> {
    let j = order as usize;
    let mut zeros = Vec::new();
    let mut a = order as f64;
    let (mut fa, _) = value_and_slope(j, a.max(1e-300));
    if order == 0 {
        fa = 1.0;
    }
    let hard_cap = 1e5;
    loop {
        let index = zeros.len() as u32 + 1;
        match limit {
            ScanLimit::Count(n) if zeros.len() >= n => break,
            ScanLimit::Below(xm) if a > xm => break,
            _ => {}
        }
        if a > hard_cap {
            return Err(Error::Bracketing {
                order,
                index,
                reason: format!("scan exceeded x = {hard_cap}"),
            });
        }
        let b = a + SCAN_STEP;
        let (fb, _) = value_and_slope(j, b);
        if fa * fb < 0.0 || fb == 0.0 {
            let x = if fb == 0.0 {
                b
            } else {
                polish(j, a, b, mcmahon_estimate(order, index))
            };
            let (residual, _) = value_and_slope(j, x);
            if residual.abs() >= 1e-12 || !(x > a && x <= b) {
                return Err(Error::Bracketing {
                    order,
                    index,
                    reason: format!("polished root {x} leaves residual {residual:e}"),
                });
            }
            if let ScanLimit::Below(xm) = limit {
                if x > xm {
                    break;
                }
            }
            zeros.push(BesselZero {
                order,
                index,
                value: x,
            });
            // restart just past the root so the next bracket sees a clean sign
            a = b;
            fa = if fb == 0.0 {
                value_and_slope(j, b + 1e-3).0
            } else {
                fb
            };
            continue;
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

#[derive(Debug, Clone, Copy)]
enum ScanLimit {
    Count(usize),
    Below(f64),
}

/// The `index`-th positive zero of `J_order`.
pub fn bessel_zero(order: u32, index: u32) -> Result<BesselZero> {
    if index == 0 {
        return Err(Error::InvalidArgument(
            "Bessel zero index is 1-based".into(),
        ));
    }
    let zeros = scan_zeros(order, ScanLimit::Count(index as usize))?;
    zeros.last().copied().ok_or_else(|| Error::Bracketing {
        order,
        index,
        reason: "no root found".into(),
    })
}

/// The first `count` positive zeros of `J_order`.
pub fn bessel_zeros(order: u32, count: usize) -> Result<Vec<BesselZero>> {
    scan_zeros(order, ScanLimit::Count(count))
}

/// All positive zeros of `J_order` not exceeding `x_max`.
pub fn bessel_zeros_below(order: u32, x_max: f64) -> Result<Vec<BesselZero>> {
    if x_max <= order as f64 {
        return Ok(Vec::new());
    }
    scan_zeros(order, ScanLimit::Below(x_max))
}
