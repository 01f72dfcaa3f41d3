//! Minimal SVG scatter, line and heatmap renderings.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 20.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 50.0;
/// Lines are thinned to about this many vertices.
const MAX_LINE_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Dot,
    Triangle,
    Line,
    Dashed,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub mark: Mark,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: &str, color: &'static str, mark: Mark, xs: &[f64], ys: &[f64]) -> Self {
        let points = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (x, y))
            .collect();
        Self {
            name: name.to_string(),
            color,
            mark,
            points,
        }
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let d = 0.5 * lo.abs().max(1.0);
        return (lo - d, hi + d);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Scatter/line plot; `identity` draws `y = x` across the data range.
pub fn plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], identity: bool) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (mut y0, mut y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    if identity {
        y0 = y0.min(x0);
        y1 = y1.max(x1);
    }
    let sx = |x: f64| PAD_L + (x - x0) / (x1 - x0) * (W - PAD_L - PAD_R);
    let sy = |y: f64| H - PAD_B - (y - y0) / (y1 - y0) * (H - PAD_T - PAD_B);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD_L}" y="{PAD_T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - PAD_L - PAD_R,
        H - PAD_T - PAD_B
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            H - PAD_B + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            PAD_L - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    if identity {
        let (a, b) = (x0.max(y0), x1.min(y1));
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="4 3"/>"##,
            sx(a),
            sy(a),
            sx(b),
            sy(b)
        );
    }
    for (k, ser) in series.iter().enumerate() {
        match ser.mark {
            Mark::Line | Mark::Dashed => {
                let mut d = String::new();
                let stride = ser.points.len().div_ceil(MAX_LINE_POINTS).max(1);
                let last = ser.points.len().saturating_sub(1);
                let kept = ser
                    .points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % stride == 0 || *i == last)
                    .map(|(_, p)| p);
                for (i, &(x, y)) in kept.enumerate() {
                    let _ = write!(
                        d,
                        "{}{:.2},{:.2} ",
                        if i == 0 { "M" } else { "L" },
                        sx(x),
                        sy(y)
                    );
                }
                let dash = if ser.mark == Mark::Dashed {
                    r#" stroke-dasharray="6 4""#
                } else {
                    ""
                };
                let _ = writeln!(
                    s,
                    r#"<path d="{}" fill="none" stroke="{}" stroke-width="1"{dash}/>"#,
                    d.trim_end(),
                    ser.color
                );
            }
            Mark::Dot => {
                for &(x, y) in &ser.points {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
                        sx(x),
                        sy(y),
                        ser.color
                    );
                }
            }
            Mark::Triangle => {
                for &(x, y) in &ser.points {
                    let (cx, cy) = (sx(x), sy(y));
                    let _ = writeln!(
                        s,
                        r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{}"/>"#,
                        cx,
                        cy - 4.0,
                        cx - 3.5,
                        cy + 3.0,
                        cx + 3.5,
                        cy + 3.0,
                        ser.color
                    );
                }
            }
        }
        let ly = PAD_T + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{}">{}</text>"#,
            PAD_L + 10.0,
            ser.color,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Cells of side `cell` centred at each `(x, y)`, shaded by `value` in `[0, 1]`.
pub fn heatmap(title: &str, xs: &[f64], ys: &[f64], values: &[f64], cell: f64) -> String {
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min) - cell,
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + cell,
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min) - cell,
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + cell,
    );
    let scale = ((W - 40.0) / (x1 - x0)).min((H - 60.0) / (y1 - y0));
    let (w, h) = ((x1 - x0) * scale + 40.0, (y1 - y0) * scale + 60.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let side = cell * scale;
    for ((&x, &y), &v) in xs.iter().zip(ys).zip(values) {
        let px = 20.0 + (x - x0 - cell / 2.0) * scale;
        let py = 40.0 + (y1 - y - cell / 2.0) * scale;
        let _ = writeln!(
            s,
            r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            side + 0.05,
            side + 0.05,
            color(v)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Dark blue through yellow.
fn color(v: f64) -> String {
    let v = if v.is_finite() {
        v.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let stops = [
        (0.0, [13.0, 8.0, 135.0]),
        (0.5, [204.0, 71.0, 120.0]),
        (1.0, [240.0, 249.0, 33.0]),
    ];
    let (a, b) = if v <= 0.5 {
        (stops[0], stops[1])
    } else {
        (stops[1], stops[2])
    };
    let t = (v - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3)
        .map(|i| (a.1[i] + t * (b.1[i] - a.1[i])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let xs = [1.0, 2.0, 3.0];
        let s = plot(
            "t",
            "x",
            "y",
            &[Series::new("a<b", "red", Mark::Dot, &xs, &xs)],
            true,
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains("a&lt;b"));
        let h = heatmap("h", &[0.0, 1.0], &[0.0, 0.0], &[0.0, 1.0], 1.0);
        assert!(h.contains("#0d0887") && h.contains("#f0f921"));
    }
}
