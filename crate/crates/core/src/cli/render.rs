//! SVG figure of a run directory: site box, initial (hollow) and final
//! (filled) turbines, and the best-J history of both stages.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::layout::{read_layout_csv, Layout, Site};
use crate::pipeline::Scenario;

use super::config::{load_config, RunConfig};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const PANEL_HEIGHT: f64 = 200.0;

/// `best_J` column of a trace file, in order.
pub fn read_trace_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::Parse { path: path.to_path_buf(), line, msg: msg.to_string() };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("iteration,evaluations,best_J") {
        return Err(bad(1, "expected header `iteration,evaluations,best_J`"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.rsplit(',')
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(k + 2, "bad best_J value"))
        })
        .collect()
}

/// Renders the run directory written by `farmopt run`.
pub fn render_run_dir(dir: &Path) -> Result<String> {
    let cfg: RunConfig = load_config(&dir.join("config.toml"))?;
    let scenario = Scenario::preset(&cfg.scenario, cfg.n_turbines)?;
    let initial = read_layout_csv::<f64>(&dir.join("layout_initial.csv"))?;
    let final_layout = read_layout_csv::<f64>(&dir.join("layout_final.csv"))?;
    let mut history = read_trace_values(&dir.join("trace_stage1.csv"))?;
    history.extend(read_trace_values(&dir.join("trace_stage2.csv"))?);
    Ok(render_svg(&scenario.site, scenario.spec.radius(), &initial, &final_layout, &history))
}

/// Site coordinates map to the inner viewBox by `(x - x_min, y_max - y)`.
pub fn render_svg(
    site: &Site<f64>,
    radius: f64,
    initial: &Layout<f64>,
    final_layout: &Layout<f64>,
    history: &[f64],
) -> String {
    let (w, h) = (site.width(), site.height());
    let map_w = WIDTH - 2.0 * MARGIN;
    let map_h = map_w * h / w;
    let with_panel = history.len() >= 2;
    let total_h = map_h + 2.0 * MARGIN + if with_panel { PANEL_HEIGHT + MARGIN } else { 0.0 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_h:.3}" viewBox="0 0 {WIDTH} {total_h:.3}">"#
    );
    let _ = writeln!(
        s,
        r#"<svg x="{MARGIN}" y="{MARGIN}" width="{map_w:.3}" height="{map_h:.3}" viewBox="0 0 {w:.3} {h:.3}" preserveAspectRatio="none">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="#eef4fa" stroke="#333" stroke-dasharray="4 2"/>"##
    );
    let to_px = |p: [f64; 2]| (p[0] - site.x_min, site.y_max - p[1]);
    for p in initial.positions() {
        let (x, y) = to_px(p);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="{radius:.3}" fill="none" stroke="#888"/>"##);
    }
    for p in final_layout.positions() {
        let (x, y) = to_px(p);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="{radius:.3}" fill="#c0392b"/>"##);
    }
    s.push_str("</svg>\n");

    if with_panel {
        let top = map_h + 2.0 * MARGIN;
        let (lo, hi) = history.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let last = (history.len() - 1) as f64;
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN}" y="{top:.3}" width="{map_w:.3}" height="{PANEL_HEIGHT}" fill="none" stroke="#333"/>"##
        );
        let points: Vec<String> = history
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let x = MARGIN + map_w * k as f64 / last;
                let y = top + PANEL_HEIGHT * (1.0 - (v - lo) / span);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(s, r##"<polyline fill="none" stroke="#2c3e50" points="{}"/>"##, points.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.3}" font-size="12">best J: {lo:.4e} to {hi:.4e}</text>"#,
            MARGIN + 4.0,
            top + 14.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site() -> Site<f64> {
        Site::new(160.0, 480.0, 80.0, 240.0).unwrap()
    }

    #[test]
    fn counts_and_corner_mapping() {
        let a = Layout::pack(&[[160.0, 240.0], [480.0, 80.0]]);
        let b = Layout::pack(&[[200.0, 100.0], [300.0, 200.0]]);
        let svg = render_svg(&site(), 10.0, &a, &b, &[1.0, 2.0, 3.0]);
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains(r#"viewBox="0 0 320.000 160.000""#));
        assert!(svg.contains(r#"cx="0.000" cy="0.000""#));
        assert!(svg.contains(r#"cx="320.000" cy="160.000""#));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn short_history_drops_panel() {
        let a = Layout::pack(&[[200.0, 100.0]]);
        let svg = render_svg(&site(), 10.0, &a, &a, &[]);
        assert!(!svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
