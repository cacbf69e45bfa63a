//! Minimal standalone SVG figures: axes, polylines, markers.

use std::fmt::Write as _;

use super::prune::PruneReport;
use crate::error::Result;
use crate::focus::{focus_coefficients, positions, FocusParams};
use crate::numerics::Matrix;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn color(i: usize) -> &'static str {
    COLORS[i % COLORS.len()]
}

/// Plot canvas mapping data coordinates onto a fixed pixel frame.
pub struct Figure {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let mut f = Self {
            x: pad(x),
            y: pad(y),
            body: String::new(),
        };
        let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN / 2.0, MARGIN / 2.0);
        let _ = write!(
            f.body,
            r#"<text x="{}" y="16" text-anchor="middle" font-size="13">{}</text>
<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>
<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>
<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>
"#,
            W / 2.0,
            escape(title),
            (x0 + x1) / 2.0,
            H - 10.0,
            escape(x_label),
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
        for k in 0..=4 {
            let fx = f.x.0 + (f.x.1 - f.x.0) * k as f64 / 4.0;
            let fy = f.y.0 + (f.y.1 - f.y.0) * k as f64 / 4.0;
            let (px, _) = f.map(fx, f.y.0);
            let (_, py) = f.map(f.x.0, fy);
            let _ = writeln!(
                f.body,
                r#"<text x="{px:.1}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
                y0 + 14.0,
                tick(fx)
            );
            let _ = writeln!(
                f.body,
                r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
                x0 - 4.0,
                py + 3.0,
                tick(fy)
            );
        }
        f
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 1.5 * MARGIN);
        let py = H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 1.5 * MARGIN);
        (px, py)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, dashed: bool) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = self.map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
    }

    pub fn square(&mut self, (x, y): (f64, f64), fill: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{fill}"/>"#,
            px - 3.5,
            py - 3.5
        );
    }

    pub fn triangle(&mut self, (x, y): (f64, f64), fill: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"/>"#,
            px - 4.0,
            py - 4.0,
            px - 4.0,
            py + 4.0,
            px + 5.0,
            py
        );
    }

    pub fn legend(&mut self, row: usize, label: &str, stroke: &str) {
        let y = MARGIN / 2.0 + 12.0 + 14.0 * row as f64;
        let x = W - MARGIN / 2.0 - 110.0;
        let _ = writeln!(
            self.body,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{stroke}" stroke-width="2"/><text x="{}" y="{}" font-size="10">{}</text>"#,
            x + 16.0,
            x + 20.0,
            y + 3.0,
            escape(label)
        );
    }

    pub fn finish(self) -> String {
        format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="100%" height="100%" fill="white"/>
{}</svg>
"#,
            self.body
        )
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Foci paths in the `(mu, sigma)` plane.
pub fn trajectory_plot(paths: &[Vec<(f64, f64)>], title: &str) -> String {
    let (_, s_hi) = extent(paths.iter().flatten().map(|p| p.1));
    let mut fig = Figure::new(title, "mu", "sigma", (0.0, 1.0), (0.0, (s_hi * 1.1).max(0.05)));
    for (j, path) in paths.iter().enumerate() {
        let c = color(j);
        fig.polyline(path, c, false);
        if let (Some(&a), Some(&b)) = (path.first(), path.last()) {
            fig.square(a, c);
            fig.triangle(b, c);
        }
    }
    fig.finish()
}

/// Focus coefficient curves `phi_j(tau)` per neuron. `sets` pairs a label
/// with parameters; the first set is drawn dashed (for before/after plots).
pub fn focus_curves(sets: &[(&str, &FocusParams)], title: &str) -> Result<String> {
    let mut curves = Vec::new();
    for (label, params) in sets {
        let tau = positions(params.inputs)?;
        let phi = focus_coefficients(params)?.phi;
        curves.push((*label, tau, phi));
    }
    let (_, hi) = extent(curves.iter().flat_map(|c| c.2.as_slice().iter().copied()));
    let mut fig = Figure::new(title, "input position", "phi", (0.0, 1.0), (0.0, hi * 1.05));
    for (k, (label, tau, phi)) in curves.iter().enumerate() {
        for j in 0..phi.cols() {
            let pts: Vec<(f64, f64)> = tau.iter().copied().zip(phi.column(j)).collect();
            fig.polyline(&pts, color(j), k == 0 && curves.len() > 1);
        }
        fig.legend(
            k,
            &format!("{label}{}", if k == 0 && curves.len() > 1 { " (dashed)" } else { "" }),
            "black",
        );
    }
    Ok(fig.finish())
}

/// Effective weights of each neuron against input position.
pub fn focused_weights(effective: &Matrix, title: &str) -> Result<String> {
    let tau = positions(effective.rows())?;
    let (lo, hi) = extent(effective.as_slice().iter().copied());
    let mut fig = Figure::new(title, "input position", "effective weight", (0.0, 1.0), (lo, hi));
    for j in 0..effective.cols() {
        let pts: Vec<(f64, f64)> = tau.iter().copied().zip(effective.column(j)).collect();
        fig.polyline(&pts, color(j), false);
    }
    Ok(fig.finish())
}

/// Test accuracy against focus-layer sparsity.
pub fn sparsity_chart(reports: &[PruneReport]) -> String {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter_map(|r| r.accuracy_after.map(|a| (r.sparsity(), a)))
        .collect();
    let (lo, hi) = extent(pts.iter().map(|p| p.1));
    let lo = if lo.is_finite() { lo } else { 0.0 };
    let hi = if hi.is_finite() { hi } else { 1.0 };
    let mut fig = Figure::new(
        "accuracy vs sparsity",
        "sparsity",
        "test accuracy",
        (0.0, 1.0),
        (lo, hi),
    );
    fig.polyline(&pts, color(0), false);
    for &p in &pts {
        fig.square(p, color(0));
    }
    fig.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figures_are_well_formed() {
        let params = FocusParams::new(vec![0.2, 0.7], vec![0.1, 0.2], 25).unwrap();
        let moved = FocusParams::new(vec![0.4, 0.9], vec![0.15, 0.2], 25).unwrap();
        let svg = focus_curves(&[("initial", &params), ("final", &moved)], "foci").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.trim_end().ends_with("</svg>"));
        let plot = trajectory_plot(&[vec![(0.5, 0.1), (0.6, 0.12)]], "t <1>");
        assert!(plot.contains("t &lt;1&gt;"));
        let eff = Matrix::from_fn(10, 3, |r, c| (r + c) as f64);
        assert_eq!(focused_weights(&eff, "w").unwrap().matches("<polyline").count(), 3);
    }
}
