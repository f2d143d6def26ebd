//! Plot-ready SVG output for benchmark sweeps.
//!
//! The scatter mirrors the CSV: one point per record at (wall time,
//! deviation) with a log time axis, colored by method. The output is a
//! self-contained SVG string with no external references, so it renders
//! anywhere and diffs cleanly.

use crate::bench::BenchRecord;
use crate::experiment::Method;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 55.0;

fn color(method: Method) -> &'static str {
    match method {
        Method::DenseSinkhorn => "#1f77b4",
        Method::RfSinkhorn => "#d62728",
        Method::RfAccelerated => "#2ca02c",
    }
}

/// Renders records as a time-versus-deviation scatter.
///
/// Records with non-finite or non-positive times, or non-finite
/// deviations, are skipped; an all-skipped input still yields a valid
/// empty chart.
pub fn scatter_svg(records: &[BenchRecord]) -> String {
    let points: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.wall_time_s.is_finite() && r.wall_time_s > 0.0 && r.deviation_pct.is_finite())
        .collect();

    let (x_lo, x_hi) = padded_range(
        points.iter().map(|r| r.wall_time_s.log10()),
        (-3.0, 0.0),
        0.05,
    );
    let (y_lo, y_hi) = padded_range(points.iter().map(|r| r.deviation_pct), (95.0, 105.0), 0.05);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: f64| MARGIN_LEFT + (t.log10() - x_lo) / (x_hi - x_lo) * plot_w;
    let y_of = |d: f64| MARGIN_TOP + (y_hi - d) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\"/>\n"
    ));

    for i in 0..=4 {
        let t = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let x = MARGIN_LEFT + plot_w * i as f64 / 4.0;
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{}\" x2=\"{x:.1}\" y2=\"{}\" stroke=\"#999\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_TOP + plot_h + 20.0,
            format_pow10(t)
        ));
    }
    for i in 0..=4 {
        let d = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let y = MARGIN_TOP + plot_h * (1.0 - i as f64 / 4.0);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.1}\" x2=\"{}\" y2=\"{y:.1}\" stroke=\"#999\"/>\n",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{d:.2}</text>\n",
            MARGIN_LEFT - 9.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">wall time (s)</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.1})\">deviation (%)</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    for record in &points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
            x_of(record.wall_time_s),
            y_of(record.deviation_pct),
            color(record.method)
        ));
    }

    let mut methods: Vec<Method> = Vec::new();
    for record in &points {
        if !methods.contains(&record.method) {
            methods.push(record.method);
        }
    }
    for (i, method) in methods.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT - 130.0;
        svg.push_str(&format!(
            "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"{}\"/>\n",
            y - 4.0,
            color(*method)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{y:.1}\">{}</text>\n",
            x + 9.0,
            method.label()
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Range of an iterator padded on both ends, or the fallback when the
/// iterator is empty or degenerate.
fn padded_range(
    values: impl Iterator<Item = f64>,
    fallback: (f64, f64),
    pad: f64,
) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return fallback;
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let width = hi - lo;
    (lo - pad * width, hi + pad * width)
}

/// Tick label for a base-10 exponent position.
fn format_pow10(exponent: f64) -> String {
    format!("1e{exponent:.1}")
}
