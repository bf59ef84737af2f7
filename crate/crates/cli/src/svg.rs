//! Minimal line plots with fixed axes.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - y / self.y1 * (HEIGHT - 2.0 * MARGIN)
    }
}

fn polyline(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], style: &str) {
    out.push_str("<polyline fill=\"none\" ");
    out.push_str(style);
    out.push_str(" points=\"");
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(out, "{:.2},{:.2} ", frame.px(*x), frame.py(*y));
    }
    out.push_str("\"/>\n");
}

/// PSD (solid black, scaled to unit peak) over the envelope (dashed blue).
pub fn fig1(nu: &[f64], psd: &[f64], envelope: &[f64]) -> String {
    let x0 = nu.first().copied().unwrap_or(0.0);
    let x1 = nu.last().copied().unwrap_or(1.0).max(x0 + 1e-12);
    let frame = Frame { x0, x1, y1: 1.05 };
    let peak = psd.iter().cloned().fold(0.0, f64::max);
    let scaled: Vec<f64> = psd
        .iter()
        .map(|v| if peak > 0.0 { v / peak } else { 0.0 })
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let first = x0.ceil() as i64;
    let last = x1.floor() as i64;
    for k in first..=last {
        let x = frame.px(k as f64);
        let y = HEIGHT - MARGIN;
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{k}</text>",
            y + 5.0,
            y + 20.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">frequency (arb. units)</text>",
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    polyline(
        &mut out,
        &frame,
        nu,
        &scaled,
        "stroke=\"black\" stroke-width=\"1\"",
    );
    polyline(
        &mut out,
        &frame,
        nu,
        envelope,
        "stroke=\"blue\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"",
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let nu = [0.0, 0.5, 1.0];
        let s = fig1(&nu, &[0.0, 2.0, 1.0], &[0.5, 1.0, 0.5]);
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("stroke-dasharray"));
    }
}
