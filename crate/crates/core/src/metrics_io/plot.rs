use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{CoverageCurve, Metric};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    NoCurves,
    #[error("cannot write plot {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 2] = ["", "6,4"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick positions at 1/2/5·10^k spacing covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|i| i as f64 * step).collect()
}

/// Renders coverage curves as a standalone SVG document. Rate curves use a
/// logarithmic x axis.
pub fn render_svg<T: Real>(curves: &[CoverageCurve<T>]) -> Result<String, PlotError> {
    let first = curves.first().ok_or(PlotError::NoCurves)?;
    let log_x = first.metric == Metric::RateBps;
    let fx = |t: T| {
        let v = t.as_f64();
        if log_x {
            v.log10()
        } else {
            v
        }
    };

    let xs = curves.iter().flat_map(|c| c.thresholds.iter().map(|t| fx(*t))).filter(|v| v.is_finite());
    let (mut lo, mut hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (v - lo) / (hi - lo) * plot_w;
    let py = |c: f64| TOP + (1.0 - c) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let _ = writeln!(svg, r##"<g class="axes" stroke="#888" stroke-width="0.5">"##);
    for c in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let y = py(c);
        let _ = writeln!(svg, r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, LEFT + plot_w);
    }
    let xticks = if log_x {
        (lo.ceil() as i64..=hi.floor() as i64).map(|k| k as f64).collect()
    } else {
        nice_ticks(lo, hi)
    };
    for v in &xticks {
        let x = px(*v);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}"/>"#, TOP + plot_h);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for c in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{c:.1}</text>"#,
            LEFT - 6.0,
            py(c) + 4.0
        );
    }
    for v in &xticks {
        let label = if log_x { format!("1e{}", *v as i64) } else { format!("{v}") };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            px(*v),
            TOP + plot_h + 18.0
        );
    }
    let x_title = match first.metric {
        Metric::SinrDb => "SINR threshold [dB]",
        Metric::RateBps => "Rate threshold [bit/s]",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_title}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">Coverage probability</text>"#,
        TOP + plot_h / 2.0
    );

    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let mut points = String::new();
        for (t, c) in curve.thresholds.iter().zip(&curve.coverage) {
            let x = fx(*t);
            if x.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(x), py(c.as_f64()));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" stroke-dasharray="{dash}" points="{}"/>"#,
            points.trim_end()
        );
    }

    let lx = WIDTH - RIGHT + 15.0;
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let y = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.8" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 24.0,
            lx + 30.0,
            y + 4.0,
            escape(&curve.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot<T: Real>(curves: &[CoverageCurve<T>], path: impl AsRef<Path>) -> Result<(), PlotError> {
    let svg = render_svg(curves)?;
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|source| PlotError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(label: &str, metric: Metric, t: Vec<f64>, c: Vec<f64>) -> CoverageCurve<f64> {
        CoverageCurve {
            label: label.into(),
            metric,
            sample_count: 10,
            thresholds: t,
            coverage: c,
        }
    }

    #[test]
    fn one_curve_one_polyline() {
        let svg = render_svg(&[curve("NoSharing/Model3", Metric::SinrDb, vec![0.0, 10.0], vec![0.9, 0.4])]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn four_legend_entries() {
        let curves: Vec<_> = ["s1", "s2", "s3", "s4"]
            .iter()
            .map(|l| curve(l, Metric::RateBps, vec![1e5, 1e8, 1e10], vec![1.0, 0.5, 0.0]))
            .collect();
        let svg = render_svg(&curves).unwrap();
        assert_eq!(svg.matches(r#"class="legend-entry""#).count(), 4);
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains(">1e8<"));
    }

    #[test]
    fn constant_curve_is_horizontal() {
        let svg = render_svg(&[curve("flat", Metric::SinrDb, vec![-5.0, 0.0, 5.0], vec![0.5; 3])]).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
        // a single threshold still renders
        render_svg(&[curve("pt", Metric::SinrDb, vec![3.0], vec![1.0])]).unwrap();
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_svg(&[curve("a<b", Metric::SinrDb, vec![0.0, 1.0], vec![1.0, 0.0])]).unwrap();
        assert!(svg.contains("a&lt;b"));
    }

    #[test]
    fn no_curves_is_an_error() {
        assert!(matches!(render_svg::<f64>(&[]), Err(PlotError::NoCurves)));
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        emit_plot(&[curve("x", Metric::SinrDb, vec![0.0, 1.0], vec![1.0, 0.0])], &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().contains("<polyline"));
        let bad = dir.path().join("missing").join("p.svg");
        assert!(matches!(
            emit_plot(&[curve("x", Metric::SinrDb, vec![0.0], vec![1.0])], bad),
            Err(PlotError::Io { .. })
        ));
    }

    #[test]
    fn tick_spacing() {
        assert_eq!(nice_ticks(-20.0, 60.0), vec![-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
    }
}
