//! Minimal SVG line charts with error bars for benchmark summaries.

use std::fmt::Write;

use crate::bench::{Aggregate, Stat};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Linear,
    Log10,
}

/// A point `(x, y, error)`.
pub type Point = (f64, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_axis: Axis,
    pub series: Vec<Series>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    f * mag
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Linear ticks as `(value, label)`.
fn linear_ticks(lo: f64, hi: f64) -> (f64, f64, Vec<(f64, String)>) {
    let (lo, hi) = if hi - lo < 1e-12 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let step = nice_step(hi - lo);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut v = start;
    while v <= end + step * 1e-9 {
        ticks.push((v, fmt_tick(v)));
        v += step;
    }
    (start, end, ticks)
}

/// Decade ticks in log₁₀ space, labelled `10^k`.
fn log_ticks(lo: f64, hi: f64) -> (f64, f64, Vec<(f64, String)>) {
    let a = lo.log10().floor();
    let b = hi.log10().ceil().max(a + 1.0);
    let ticks = (a as i32..=b as i32).map(|k| (k as f64, format!("1e{k}"))).collect();
    (a, b, ticks)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let pts: Vec<&Point> = self.series.iter().flat_map(|s| &s.points).collect();
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
            escape(&self.title)
        );
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
        );
        if pts.is_empty() {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#,
                MARGIN_L + plot_w / 2.0,
                MARGIN_T + plot_h / 2.0
            );
            svg.push_str("</svg>\n");
            return svg;
        }

        let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let (x0, x1, xticks) = linear_ticks(xmin, xmax);

        let ylo_raw = pts.iter().map(|p| p.1 - p.2).fold(f64::INFINITY, f64::min);
        let yhi_raw = pts.iter().map(|p| p.1 + p.2).fold(f64::NEG_INFINITY, f64::max);
        let (y0, y1, yticks, ty): (f64, f64, _, Box<dyn Fn(f64) -> f64>) = match self.y_axis {
            Axis::Linear => {
                let (a, b, t) = linear_ticks(ylo_raw, yhi_raw);
                (a, b, t, Box::new(|v| v))
            }
            Axis::Log10 => {
                let floor = pts.iter().map(|p| p.1).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
                let floor = if floor.is_finite() { floor / 10.0 } else { 1e-6 };
                let lo = ylo_raw.max(floor);
                let hi = yhi_raw.max(lo * 10.0);
                let (a, b, t) = log_ticks(lo, hi);
                (a, b, t, Box::new(move |v: f64| v.max(floor).log10()))
            }
        };
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

        for (v, label) in &xticks {
            let x = sx(*v);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                MARGIN_T + plot_h,
                MARGIN_T + plot_h + 5.0,
                MARGIN_T + plot_h + 18.0
            );
        }
        for (v, label) in &yticks {
            let y = sy(*v);
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                MARGIN_L + plot_w,
                MARGIN_L - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(ty(p.1))))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
            for &(x, y, e) in &s.points {
                let (px, py) = (sx(x), sy(ty(y)));
                if e > 0.0 {
                    let (top, bot) = (sy(ty(y + e)), sy(ty(y - e)));
                    let _ = writeln!(
                        svg,
                        r#"<path d="M{px:.2},{top:.2}V{bot:.2}M{:.2},{top:.2}H{:.2}M{:.2},{bot:.2}H{:.2}" stroke="{color}"/>"#,
                        px - 4.0,
                        px + 4.0,
                        px - 4.0,
                        px + 4.0
                    );
                }
                let _ = writeln!(svg, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
            }
            let ly = MARGIN_T + 14.0 + 18.0 * k as f64;
            let lx = MARGIN_L + plot_w + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 18.0,
                lx + 24.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn series_of(aggs: &[Aggregate], f: impl Fn(&Aggregate) -> Option<(f64, f64)>) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for a in aggs {
        let Some((y, e)) = f(a) else { continue };
        let point = (a.buses as f64, y, e);
        match out.iter_mut().find(|s| s.label == a.config) {
            Some(s) => s.points.push(point),
            None => out.push(Series {
                label: a.config.clone(),
                points: vec![point],
            }),
        }
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

fn stat_point(s: Option<Stat>) -> Option<(f64, f64)> {
    s.map(|s| (s.mean, s.std))
}

/// One chart per metric over per-size aggregates, as `(file stem, svg)`.
pub fn metric_plots(aggs: &[Aggregate]) -> Vec<(String, String)> {
    let chart = |title: &str, y_label: &str, y_axis: Axis, series: Vec<Series>| Chart {
        title: title.into(),
        x_label: "buses".into(),
        y_label: y_label.into(),
        y_axis,
        series,
    };
    vec![
        (
            "objective",
            chart("Objective (successful runs)", "objective", Axis::Linear, series_of(aggs, |a| stat_point(a.objective))),
        ),
        (
            "success_rate",
            chart("Success rate", "fraction of runs", Axis::Linear, series_of(aggs, |a| Some((a.success_rate, 0.0)))),
        ),
        (
            "iterations",
            chart("Iterations", "iterations", Axis::Linear, series_of(aggs, |a| stat_point(a.iterations))),
        ),
        (
            "qubo_size",
            chart("QUBO size", "variables", Axis::Linear, series_of(aggs, |a| stat_point(a.qubo_size))),
        ),
        (
            "solve_time",
            chart("Solve time", "seconds (log scale)", Axis::Log10, series_of(aggs, |a| stat_point(a.solve_time))),
        ),
        (
            "total_time",
            chart("Total time", "seconds (log scale)", Axis::Log10, series_of(aggs, |a| stat_point(a.total_time))),
        ),
    ]
    .into_iter()
    .map(|(name, c)| (name.to_string(), c.to_svg()))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_axis_uses_decade_ticks() {
        let c = Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            y_axis: Axis::Log10,
            series: vec![Series {
                label: "a".into(),
                points: vec![(3.0, 0.002, 0.0), (4.0, 0.5, 0.1)],
            }],
        };
        let svg = c.to_svg();
        assert!(svg.contains(">1e-3<"));
        assert!(svg.contains(">1e0<"));
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn empty_chart_renders() {
        let c = Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            y_axis: Axis::Linear,
            series: vec![],
        };
        assert!(c.to_svg().contains("no data"));
    }
}
