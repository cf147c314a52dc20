//! SVG output: configuration snapshots (optionally with a density panel)
//! and whole-run trajectory plots.
//!
//! Element classes: `domain`, `cell`, `cargo`, `sense`, `agent`,
//! `transport-arrow`, `trajectory`, `density`.

use std::fmt::Write as _;
use std::path::Path;

use swarmcage_core::density::{refresh_components, DensityField, Detection};
use swarmcage_core::geometry::compute_voronoi;
use swarmcage_core::{AgentState, Cargo, CargoPhase, Point2, Rect, RunLog, StepRecord};

use crate::scenario::Scenario;

const MARGIN: f64 = 20.0;
const GAP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Pixels per meter.
    pub scale: f64,
    /// Adds a grayscale φ panel to the right of the configuration.
    pub density_panel: bool,
    pub panel_resolution: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { scale: 50.0, density_panel: true, panel_resolution: 150 }
    }
}

struct Frame {
    domain: Rect,
    scale: f64,
    x0: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        self.x0 + (x - self.domain.min.x) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        MARGIN + (self.domain.max.y - y) * self.scale
    }

    fn width(&self) -> f64 {
        self.domain.width() * self.scale
    }

    fn height(&self) -> f64 {
        self.domain.height() * self.scale
    }
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    out.push_str(
        r#"<defs><marker id="arrowhead" markerWidth="8" markerHeight="8" refX="6" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="crimson"/></marker></defs>"#,
    );
    out.push('\n');
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
}

fn domain_border(out: &mut String, f: &Frame) {
    let _ = writeln!(
        out,
        r#"<rect class="domain" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        f.x(f.domain.min.x),
        f.y(f.domain.max.y),
        f.width(),
        f.height()
    );
}

/// Rebuilds the density field a record was stepped with, from its
/// detections and cargo positions.
pub fn field_for(record: &StepRecord, scenario: &Scenario) -> DensityField {
    let cfg = &scenario.config;
    let agents: Vec<AgentState> = record.positions.iter().enumerate().map(|(i, &p)| AgentState::new(i, p)).collect();
    let cargos: Vec<Cargo> = record.cargos.iter().map(|c| Cargo::new(c.id, c.center, c.radius, None)).collect();
    let detections: Vec<Detection> =
        record.detected.iter().enumerate().map(|(agent, &cargo)| Detection { agent, cargo }).collect();
    let base = DensityField::new(cfg.phi0, agents.len()).expect("validated baseline");
    refresh_components(&base, &detections, &agents, &cargos, cfg.scaling_law(), cfg.peak_anchor)
}

fn density_panel(out: &mut String, f: &Frame, field: &DensityField, res: usize) {
    let d = f.domain;
    let (cw, ch) = (d.width() / res as f64, d.height() / res as f64);
    let mut grid = vec![0.0; res * res];
    let mut peak: f64 = 0.0;
    for r in 0..res {
        for c in 0..res {
            let q = Point2::new(d.min.x + (c as f64 + 0.5) * cw, d.min.y + (r as f64 + 0.5) * ch);
            let v = field.evaluate(q);
            grid[r * res + c] = v;
            peak = peak.max(v);
        }
    }
    let _ = writeln!(out, r#"<g class="density" shape-rendering="crispEdges">"#);
    for r in 0..res {
        // Runs of equal (quantized) shade are merged into one rectangle.
        let mut c = 0;
        while c < res {
            let level = |c: usize| (255.0 * (1.0 - grid[r * res + c] / peak)).round() as u8 / 8 * 8;
            let shade = level(c);
            let start = c;
            while c < res && level(c) == shade {
                c += 1;
            }
            let x = f.x(d.min.x + start as f64 * cw);
            let y = f.y(d.min.y + (r + 1) as f64 * ch);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="rgb({shade},{shade},{shade})"/>"#,
                (c - start) as f64 * cw * f.scale,
                ch * f.scale
            );
        }
    }
    out.push_str("</g>\n");
}

/// Snapshot of one record: Voronoi edges, black agent dots, blue sensing
/// circles, orange cargos and a red arrow per transporting cargo.
pub fn render_snapshot(record: &StepRecord, scenario: &Scenario, opts: &RenderOptions) -> String {
    let cfg = &scenario.config;
    let main = Frame { domain: cfg.domain, scale: opts.scale, x0: MARGIN };
    let mut width = 2.0 * MARGIN + main.width();
    if opts.density_panel {
        width += GAP + main.width();
    }
    let height = 2.0 * MARGIN + main.height() + 20.0;
    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN:.0}" y="{:.3}" font-family="sans-serif" font-size="14">t = {:.2} s (step {})</text>"#,
        height - 6.0,
        record.t,
        record.step
    );

    if let Ok(cells) = compute_voronoi(&record.positions, &cfg.domain) {
        for cell in &cells {
            let pts: Vec<String> =
                cell.region.vertices().iter().map(|v| format!("{:.3},{:.3}", main.x(v.x), main.y(v.y))).collect();
            let _ = writeln!(
                out,
                r#"<polygon class="cell" points="{}" fill="none" stroke="gray" stroke-width="0.8"/>"#,
                pts.join(" ")
            );
        }
    }
    for c in &record.cargos {
        let _ = writeln!(
            out,
            r#"<circle class="cargo" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="orange" fill-opacity="0.8" stroke="darkorange"/>"#,
            main.x(c.center.x),
            main.y(c.center.y),
            c.radius * main.scale
        );
    }
    for p in &record.positions {
        let _ = writeln!(
            out,
            r#"<circle class="sense" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="royalblue" stroke-width="0.8"/>"#,
            main.x(p.x),
            main.y(p.y),
            cfg.r_sense * main.scale
        );
    }
    for p in &record.positions {
        let _ = writeln!(
            out,
            r#"<circle class="agent" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="black"/>"#,
            main.x(p.x),
            main.y(p.y),
            (0.5 * cfg.d_min * main.scale).max(2.0)
        );
    }
    for c in &record.cargos {
        if let (CargoPhase::Transporting, Some(dir)) = (c.phase, c.transport_dir) {
            let tip = c.center + dir * (c.radius + cfg.r_sense.min(1.0));
            let _ = writeln!(
                out,
                r#"<line class="transport-arrow" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="crimson" stroke-width="2.5" marker-end="url(#arrowhead)"/>"#,
                main.x(c.center.x),
                main.y(c.center.y),
                main.x(tip.x),
                main.y(tip.y)
            );
        }
    }
    domain_border(&mut out, &main);

    if opts.density_panel {
        let panel = Frame { x0: MARGIN + main.width() + GAP, ..main };
        density_panel(&mut out, &panel, &field_for(record, scenario), opts.panel_resolution.max(1));
        domain_border(&mut out, &panel);
    }
    out.push_str("</svg>\n");
    out
}

/// Agent paths over the whole run, with cargo start and end positions.
pub fn render_trajectories(log: &RunLog, scenario: &Scenario, opts: &RenderOptions) -> String {
    let cfg = &scenario.config;
    let f = Frame { domain: cfg.domain, scale: opts.scale, x0: MARGIN };
    let (width, height) = (2.0 * MARGIN + f.width(), 2.0 * MARGIN + f.height());
    let mut out = String::new();
    header(&mut out, width, height);
    let (Some(first), Some(last)) = (log.records.first(), log.records.last()) else {
        out.push_str("</svg>\n");
        return out;
    };
    let stride = (log.records.len() / 2000).max(1);
    for (c0, c1) in first.cargos.iter().zip(&last.cargos) {
        let _ = writeln!(
            out,
            r#"<circle class="cargo-start" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="darkorange" stroke-dasharray="4 3"/>"#,
            f.x(c0.center.x),
            f.y(c0.center.y),
            c0.radius * f.scale
        );
        let _ = writeln!(
            out,
            r#"<circle class="cargo" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="orange" fill-opacity="0.8" stroke="darkorange"/>"#,
            f.x(c1.center.x),
            f.y(c1.center.y),
            c1.radius * f.scale
        );
    }
    for agent in 0..first.positions.len() {
        let pts: Vec<String> = log
            .records
            .iter()
            .step_by(stride)
            .chain(std::iter::once(last))
            .map(|r| format!("{:.2},{:.2}", f.x(r.positions[agent].x), f.y(r.positions[agent].y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="trajectory" points="{}" fill="none" stroke="steelblue" stroke-width="1"/>"#,
            pts.join(" ")
        );
    }
    for p in &last.positions {
        let _ = writeln!(
            out,
            r#"<circle class="agent" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="black"/>"#,
            f.x(p.x),
            f.y(p.y),
            (0.5 * cfg.d_min * f.scale).max(2.0)
        );
    }
    domain_border(&mut out, &f);
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, svg: &str) -> std::io::Result<()> {
    std::fs::write(path, svg)
}
