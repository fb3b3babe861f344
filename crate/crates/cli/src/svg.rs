//! Minimal self-contained SVG line chart for a [`CurveSet`].

use std::fmt::Write as _;

use crate::curves::CurveSet;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn render(set: &CurveSet) -> String {
    let (x0, x1) = bounds(set.series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = bounds(set.series.iter().flat_map(|s| s.y.iter().copied()));
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(xv),
            HEIGHT - MARGIN + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} [{}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&set.x_label),
        escape(&set.x_unit)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{} [{}]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&set.y_label),
        escape(&set.y_unit)
    );
    for (k, s) in set.series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = s.x.iter().zip(&s.y).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{colour}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 8.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::Series;

    #[test]
    fn well_formed() {
        let set = CurveSet {
            x_label: "T".into(),
            x_unit: "K".into(),
            y_label: "S".into(),
            y_unit: "k_B".into(),
            series: vec![Series {
                label: "a<b".into(),
                x: vec![1.0, 2.0],
                y: vec![0.5, 0.5],
            }],
            extremum: None,
        };
        let svg = render(&set);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b") && svg.contains("<polyline"));
        assert!(!svg.contains("NaN"));
    }
}
