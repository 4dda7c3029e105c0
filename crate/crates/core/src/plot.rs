//! Self-contained SVG line charts of sweep results on a log-y axis.
//!
//! Input is the result CSV produced by [`crate::sim::write_csv`]; output is a
//! standalone SVG string with one polyline per (scheme, filter) curve.
//! Nonpositive metric values cannot appear on a log axis and are dropped
//! point-wise (an all-zero curve keeps its legend entry but draws nothing).

use crate::error::{Error, Result};
use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Metric column to plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Ser,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Ser => "ser",
        }
    }

    fn axis_title(&self) -> &'static str {
        match self {
            Metric::Mse => "channel MSE",
            Metric::Ser => "symbol error rate",
        }
    }

    fn column(&self) -> usize {
        match self {
            Metric::Mse => 5,
            Metric::Ser => 6,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mse" => Ok(Metric::Mse),
            "ser" => Ok(Metric::Ser),
            other => Err(Error::Config(format!("unknown metric \"{other}\" (expected mse or ser)"))),
        }
    }
}

#[derive(Debug, Clone)]
struct Curve {
    name: String,
    points: Vec<(f64, f64)>,
}

/// Parses the result CSV and groups `(snr_db, metric)` points by curve,
/// preserving first-seen order.
fn read_curves(csv: &str, metric: Metric) -> Result<Vec<Curve>> {
    let mut lines = csv.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty CSV".into()))?;
    if header.trim() != crate::sim::CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header \"{header}\"")));
    }
    let mut curves: Vec<Curve> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Config(format!("CSV row {}: expected 9 fields", i + 2)));
        }
        let parse = |col: usize| -> Result<f64> {
            fields[col].trim().parse().map_err(|_| {
                Error::Config(format!("CSV row {}: bad number \"{}\"", i + 2, fields[col]))
            })
        };
        let snr = parse(4)?;
        let value = parse(metric.column())?;
        let name = if fields[1] == "none" {
            fields[0].to_string()
        } else {
            format!("{} ({})", fields[0], fields[1])
        };
        match curves.iter_mut().find(|c| c.name == name) {
            Some(c) => c.points.push((snr, value)),
            None => curves.push(Curve { name, points: vec![(snr, value)] }),
        }
    }
    if curves.is_empty() {
        return Err(Error::Config("CSV holds no data rows".into()));
    }
    Ok(curves)
}

fn nice_log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let lo_exp = lo.log10().floor() as i32;
    let hi_exp = hi.log10().ceil() as i32;
    (lo_exp..=hi_exp).map(|e| 10f64.powi(e)).collect()
}

fn fmt_pow10(v: f64) -> String {
    let e = v.log10().round() as i32;
    if (-3..=3).contains(&e) {
        format!("{v}")
    } else {
        format!("1e{e}")
    }
}

/// Renders the chart. Fails when no positive value is left to place on the
/// log axis.
pub fn render_svg(csv: &str, metric: Metric) -> Result<String> {
    let curves = read_curves(csv, metric)?;

    let xs: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.1))
        .filter(|v| *v > 0.0)
        .collect();
    if ys.is_empty() {
        return Err(Error::Config(format!(
            "no positive {} values to draw on a log axis",
            metric.label()
        )));
    }
    let (x_min, x_max) = xs.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (x_min, x_max) = if x_min == x_max { (x_min - 1.0, x_max + 1.0) } else { (x_min, x_max) };
    let y_ticks = {
        let lo = ys.iter().cloned().fold(f64::MAX, f64::min);
        let hi = ys.iter().cloned().fold(f64::MIN, f64::max);
        nice_log_ticks(lo, hi)
    };
    let (y_lo, y_hi) = (y_ticks[0], *y_ticks.last().unwrap());
    let (y_lo, y_hi) = if y_lo == y_hi { (y_lo / 10.0, y_hi * 10.0) } else { (y_lo, y_hi) };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |v: f64| MARGIN_LEFT + (v - x_min) / (x_max - x_min) * plot_w;
    let y_of =
        |v: f64| MARGIN_TOP + (y_hi.log10() - v.log10()) / (y_hi.log10() - y_lo.log10()) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    );
    let _ = write!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n<rect x=\"{MARGIN_LEFT}\" \
         y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#333\"/>\n"
    );

    for &tick in &y_ticks {
        if tick < y_lo || tick > y_hi {
            continue;
        }
        let y = y_of(tick);
        let _ = write!(
            svg,
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#ddd\"/>\n<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            fmt_pow10(tick)
        );
    }
    let mut x_tick = x_min;
    while x_tick <= x_max + 1e-9 {
        let x = x_of(x_tick);
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>\n\
             <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_tick}</text>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 20.0,
        );
        x_tick += 5.0;
    }
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">SNR (dB)</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = write!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        metric.axis_title()
    );

    for (ci, curve) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let drawable: Vec<(f64, f64)> =
            curve.points.iter().filter(|p| p.1 > 0.0).cloned().collect();
        if !drawable.is_empty() {
            let coords: Vec<String> = drawable
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", x_of(x), y_of(y)))
                .collect();
            let _ = write!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                coords.join(" ")
            );
            for &(x, y) in &drawable {
                let _ = write!(
                    svg,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                    x_of(x),
                    y_of(y)
                );
            }
        }
        let ly = MARGIN_TOP + 16.0 + 22.0 * ci as f64;
        let _ = write!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"1.8\"/>\n<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            WIDTH - MARGIN_RIGHT + 12.0,
            WIDTH - MARGIN_RIGHT + 40.0,
            WIDTH - MARGIN_RIGHT + 46.0,
            ly + 4.0,
            curve.name
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
