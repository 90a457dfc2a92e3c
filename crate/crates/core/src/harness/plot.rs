use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::guidance::GuidanceMode;
use crate::harness::aggregate::{curves, Curve, CurvePoint};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const FALLBACK: [&str; 4] = ["#DE8F05", "#D55E00", "#56B4E9", "#949494"];

/// Fixed color for a method label; ablation variants get fallbacks.
pub fn method_color(method: &str, index: usize) -> &'static str {
    match GuidanceMode::from_method_name(method) {
        Some(m) => m.color(),
        None => FALLBACK[index % FALLBACK.len()],
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One SVG: mean lines over shaded ±std bands, with a legend entry per curve.
pub fn render_svg(task: &str, task_curves: &[&Curve]) -> Result<String> {
    if task_curves.is_empty() || task_curves.iter().any(|c| c.points.is_empty()) {
        return Err(Error::Usage(format!("no curves to plot for {task}")));
    }
    let x_max = task_curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let (y_lo, y_hi) = task_curves
        .iter()
        .flat_map(|c| c.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]))
        .fold((0.0f64, 1.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let px = |x: f64| LEFT + x / x_max * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(task));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (px(0.0), px(x_max), py(y_lo), py(y_hi));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1} {y1:.1} L{x0:.1} {y0:.1} L{x1:.1} {y0:.1}" stroke="black" fill="none"/>"#
    );
    for k in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{y:.2}</text>"#,
            LEFT - 6.0,
            py(y) + 4.0
        );
        let x = x_max * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{x:.0}</text>"#,
            px(x),
            y0 + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">environment steps</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(task)
    );

    for (i, c) in task_curves.iter().enumerate() {
        let color = method_color(&c.method, i);
        let upper: Vec<String> = c.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0 as f64), py(p.1 + p.2))).collect();
        let lower: Vec<String> =
            c.points.iter().rev().map(|p| format!("{:.2},{:.2}", px(p.0 as f64), py(p.1 - p.2))).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = c.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0 as f64), py(p.1))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
    }
    for (i, c) in task_curves.iter().enumerate() {
        let color = method_color(&c.method, i);
        let y = TOP + 8.0 + 18.0 * i as f64;
        let x = LEFT + 12.0;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry" data-method="{m}"><rect x="{x:.1}" y="{:.1}" width="14" height="4" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="12">{m}</text></g>"#,
            y - 2.0,
            x + 20.0,
            y + 4.0,
            m = escape(&c.method)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes `<task>.svg` for every task in the table.
pub fn write_plots(rows: &[CurvePoint], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let all = curves(rows);
    if all.is_empty() {
        return Err(Error::Usage("no curves to plot".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut tasks: Vec<&str> = all.iter().map(|c| c.task.as_str()).collect();
    tasks.dedup();
    let mut written = Vec::new();
    for task in tasks {
        let subset: Vec<&Curve> = all.iter().filter(|c| c.task == task).collect();
        let path = out_dir.join(format!("{task}.svg"));
        fs::write(&path, render_svg(task, &subset)?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
