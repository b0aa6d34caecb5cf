//! CSV metric logs and SVG trajectory renders.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use kcoverage::geometry::Point;
use kcoverage::partition::korder_diagram;
use kcoverage::simulator::{SimConfig, TrajectoryLog};

/// Formats a float with 9 significant digits (scientific), keeping
/// non-finite values readable and stable.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.8e}")
    }
}

/// CSV header for an n-agent log.
pub fn csv_header(n: usize) -> String {
    let mut header =
        String::from("step,time_s,H,messages_step,messages_cum,power_dbm,triggered_ids");
    for i in 1..=n {
        header.push_str(&format!(",p{i}_x,p{i}_y"));
    }
    header
}

/// Writes one row per step: header + steps lines in total. Agent ids in the
/// `triggered_ids` column are 1-based, matching the position column names.
pub fn write_csv(log: &TrajectoryLog, path: &Path) -> Result<()> {
    if log.steps.is_empty() {
        bail!("refusing to write an empty trajectory log");
    }
    let n = log.initial_positions.len();
    let mut out = String::with_capacity(log.steps.len() * 160);
    out.push_str(&csv_header(n));
    out.push('\n');
    for m in &log.steps {
        let triggered: Vec<String> = m.triggered.iter().map(|i| (i + 1).to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            m.step,
            fmt_sig9(m.time_s),
            fmt_sig9(m.h),
            m.messages_step,
            m.messages_cum,
            fmt_sig9(m.power_dbm()),
            triggered.join(";")
        ));
        for p in &m.positions {
            out.push_str(&format!(",{},{}", fmt_sig9(p.x), fmt_sig9(p.y)));
        }
        out.push('\n');
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).ok();
    }
    let mut file =
        std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    file.write_all(out.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

const PALETTE: [&str; 10] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#4699c4", "#f032e6", "#9a6324",
    "#808000", "#000075",
];

/// Renders the domain, the final k-order partition edges, and one polyline
/// per agent trajectory with start (hollow) and end (filled) markers.
pub fn render_svg(log: &TrajectoryLog, config: &SimConfig, path: &Path) -> Result<()> {
    if log.steps.is_empty() {
        bail!("refusing to render an empty trajectory log");
    }
    let (lo, hi) = config.domain.bounding_box();
    let span = (hi.x - lo.x).max(hi.y - lo.y);
    let size = 640.0;
    let pad = 0.05 * size;
    let scale = (size - 2.0 * pad) / span;
    let map = |p: Point| -> (f64, f64) { (pad + (p.x - lo.x) * scale, pad + (hi.y - p.y) * scale) };
    let poly_points = |pts: &[Point]| -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Final k-order partition edges.
    let final_positions = &log.steps.last().expect("nonempty log").positions;
    let diagram = korder_diagram(final_positions, config.k, &config.domain)
        .context("partition for render")?;
    for (_, cell) in diagram.cells() {
        if cell.is_empty() {
            continue;
        }
        svg.push_str(&format!(
            "<polygon points=\"{}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            poly_points(cell.vertices())
        ));
    }
    // Domain boundary on top of cell edges.
    svg.push_str(&format!(
        "<polygon points=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"2\"/>\n",
        poly_points(config.domain.vertices())
    ));

    // Trajectories: initial position plus one point per step.
    let n = log.initial_positions.len();
    for i in 0..n {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = Vec::with_capacity(log.steps.len() + 1);
        pts.push(log.initial_positions[i]);
        pts.extend(log.steps.iter().map(|m| m.positions[i]));
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>\n",
            poly_points(&pts)
        ));
        let (sx, sy) = map(log.initial_positions[i]);
        svg.push_str(&format!(
            "<circle cx=\"{sx:.3}\" cy=\"{sy:.3}\" r=\"4\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n"
        ));
        let (ex, ey) = map(pts[pts.len() - 1]);
        svg.push_str(&format!(
            "<circle cx=\"{ex:.3}\" cy=\"{ey:.3}\" r=\"4\" fill=\"{color}\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");

    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).ok();
    }
    std::fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
