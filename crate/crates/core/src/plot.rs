//! Static SVG line charts built from a finished trace.

use std::fmt::Write;

use crate::energy::EnergyLedger;
use crate::engine::SimulationTrace;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Same scale on both axes (trajectory plots).
    pub equal_aspect: bool,
    /// Draw a marker at the first point of every series.
    pub mark_start: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    (0..).map(|i| first + i as f64 * step).take_while(|v| *v <= hi + step * 1e-9).collect()
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = points.iter().step_by(stride).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

impl Chart {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let p = 0.04 * (hi - lo);
                (lo - p, hi + p)
            }
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        if !self.equal_aspect {
            return (x0, x1, y0, y1);
        }
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let scale = ((x1 - x0) / plot_w).max((y1 - y0) / plot_h);
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        (cx - scale * plot_w / 2.0, cx + scale * plot_w / 2.0, cy - scale * plot_h / 2.0, cy + scale * plot_h / 2.0)
    }

    pub fn to_svg(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_L + plot_w / 2.0,
            escape(&self.title)
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/>"##,
                MARGIN_T,
                MARGIN_T + plot_h
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                MARGIN_T + plot_h + 16.0,
                fmt_tick(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_L:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/>"##,
                MARGIN_L + plot_w
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (n, series) in self.series.iter().enumerate() {
            let color = PALETTE[n % PALETTE.len()];
            let pts = thin(&series.points);
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
                path.join(" ")
            );
            if self.mark_start {
                if let Some(&(x, y)) = pts.first() {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, sx(x), sy(y));
                }
            }
            let ly = MARGIN_T + 14.0 + 20.0 * n as f64;
            let lx = MARGIN_L + plot_w + 14.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
                lx + 22.0
            );
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&series.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn agent_label(i: usize) -> String {
    format!("agent {}", i + 1)
}

fn per_agent(trace: &SimulationTrace<f64>, f: impl Fn(usize, usize) -> (f64, f64)) -> Vec<Series> {
    (0..trace.n_agents)
        .map(|i| Series { label: agent_label(i), points: (0..trace.records.len()).map(|k| f(k, i)).collect() })
        .collect()
}

pub fn trajectories(trace: &SimulationTrace<f64>) -> String {
    Chart {
        title: "Agent trajectories".into(),
        x_label: "x (m)".into(),
        y_label: "y (m)".into(),
        series: per_agent(trace, |k, i| {
            let p = trace.records[k].positions[i];
            (p.x, p.y)
        }),
        equal_aspect: true,
        mark_start: true,
    }
    .to_svg()
}

pub fn x_components(trace: &SimulationTrace<f64>) -> String {
    component_chart(trace, "x components of the trajectories", "x (m)", |k, i| trace.records[k].positions[i].x)
}

pub fn y_components(trace: &SimulationTrace<f64>) -> String {
    component_chart(trace, "y components of the trajectories", "y (m)", |k, i| trace.records[k].positions[i].y)
}

fn component_chart(
    trace: &SimulationTrace<f64>,
    title: &str,
    y_label: &str,
    f: impl Fn(usize, usize) -> f64,
) -> String {
    let t = trace.sampling_period;
    Chart {
        title: title.into(),
        x_label: "time (s)".into(),
        y_label: y_label.into(),
        series: per_agent(trace, |k, i| (k as f64 * t, f(k, i))),
        equal_aspect: false,
        mark_start: false,
    }
    .to_svg()
}

pub fn ranges(trace: &SimulationTrace<f64>) -> String {
    Chart {
        title: "Communication ranges".into(),
        x_label: "step".into(),
        y_label: "radius (m)".into(),
        series: per_agent(trace, |k, i| (k as f64, trace.records[k].radii[i])),
        equal_aspect: false,
        mark_start: false,
    }
    .to_svg()
}

fn cumulative(ledger: &EnergyLedger<f64>, agent: Option<usize>) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    (0..ledger.steps())
        .map(|k| {
            acc += match agent {
                Some(i) => ledger.step(k)[i],
                None => ledger.team_step(k),
            };
            (k as f64, acc)
        })
        .collect()
}

/// Cumulative energy per agent plus the team total.
pub fn energy(trace: &SimulationTrace<f64>) -> String {
    let mut series: Vec<Series> = (0..trace.n_agents)
        .map(|i| Series { label: agent_label(i), points: cumulative(&trace.energy, Some(i)) })
        .collect();
    series.push(Series { label: "team".into(), points: cumulative(&trace.energy, None) });
    Chart {
        title: format!("Cumulative communication energy ({})", trace.policy_label),
        x_label: "step".into(),
        y_label: "energy".into(),
        series,
        equal_aspect: false,
        mark_start: false,
    }
    .to_svg()
}

/// Team cumulative energy of several runs on one chart.
pub fn energy_overlay(runs: &[(String, &EnergyLedger<f64>)]) -> String {
    Chart {
        title: "Cumulative team communication energy".into(),
        x_label: "step".into(),
        y_label: "energy".into(),
        series: runs.iter().map(|(label, l)| Series { label: label.clone(), points: cumulative(l, None) }).collect(),
        equal_aspect: false,
        mark_start: false,
    }
    .to_svg()
}
