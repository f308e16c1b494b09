//! SVG renderings of run artifacts. Plots read files only, never engine state.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use schemanet::cause_effect::ReliabilityMatrix;
use schemanet_scenarios::detour::TrialOutcome;

use crate::error::HarnessError;
use crate::run::{read_json, read_traces, Phased, RunManifest, DETOUR_TRIALS, MANIFEST, MATRIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Detour paths, one panel per barrier trial.
    Path,
    /// Heading map and its prediction over the last learning trial.
    Mhm,
    /// Scalar port traces over the final ticks of the run.
    Traces,
    /// Reliability matrix, one grid per effect (delay rows, cause columns).
    Matrix,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Path => "path",
            Figure::Mhm => "mhm",
            Figure::Traces => "traces",
            Figure::Matrix => "matrix",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Figure::Path, Figure::Mhm, Figure::Traces, Figure::Matrix].into_iter().find(|f| f.name() == s)
    }
}

/// Ticks shown by the traces figure.
pub const TRACE_WINDOW: u64 = 200;
const MAX_SERIES: usize = 16;

/// Render `figure` from the run in `dir` to `dir/plots/<figure>.svg`.
pub fn plot(dir: &Path, figure: Figure) -> Result<PathBuf, HarnessError> {
    let svg = render(dir, figure)?;
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).map_err(HarnessError::io(&plots))?;
    let path = plots.join(format!("{}.svg", figure.name()));
    fs::write(&path, svg).map_err(HarnessError::io(&path))?;
    Ok(path)
}

pub fn render(dir: &Path, figure: Figure) -> Result<String, HarnessError> {
    match figure {
        Figure::Path => path_figure(dir),
        Figure::Mhm => mhm_figure(dir),
        Figure::Traces => traces_figure(dir),
        Figure::Matrix => matrix_figure(dir),
    }
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self { body: String::new(), width, height }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map(|s| format!(" stroke=\"{s}\" stroke-width=\"0.5\"")).unwrap_or_default();
        let _ = writeln!(self.body, "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"{stroke}/>");
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>"
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(self.body, "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.2\"/>", p.join(" "));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{fill}\"/>");
    }

    fn text(&mut self, x: f64, y: f64, size: f64, s: &str) {
        let s = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(self.body, "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"monospace\" font-size=\"{size}\">{s}</text>");
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn gray(v: f64) -> String {
    let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
    format!("rgb({g},{g},{g})")
}

fn path_figure(dir: &Path) -> Result<String, HarnessError> {
    let manifest: RunManifest = read_json(dir, MANIFEST)?;
    let trials: Vec<Phased<TrialOutcome>> = read_json(dir, DETOUR_TRIALS)?;
    let shown: Vec<_> = trials.iter().filter(|t| t.outcome.barrier_width.is_some()).collect();
    let cfg = &manifest.config.detour;
    let (panel, pad) = (180.0, 20.0);
    let (x_lo, x_hi, y_lo, y_hi) = (-30.0, 30.0, -8.0, cfg.prey.1 + 6.0);
    let cols = shown.len().clamp(1, 4);
    let rows = shown.len().div_ceil(cols).max(1);
    let mut svg = Svg::new(cols as f64 * (panel + pad) + pad, rows as f64 * (panel + 2.0 * pad) + pad);
    for (k, t) in shown.iter().enumerate() {
        let ox = pad + (k % cols) as f64 * (panel + pad);
        let oy = 2.0 * pad + (k / cols) as f64 * (panel + 2.0 * pad);
        let map = |x: f64, y: f64| (ox + (x - x_lo) / (x_hi - x_lo) * panel, oy + panel - (y - y_lo) / (y_hi - y_lo) * panel);
        svg.rect(ox, oy, panel, panel, "none", Some("black"));
        let o = &t.outcome;
        let label = format!("{} {}: {} bumps{}", t.phase, t.index, o.bumps, if o.captured { ", caught" } else { "" });
        svg.text(ox, oy - 6.0, 10.0, &label);
        if let Some(w) = o.barrier_width {
            let (a, b) = (map(-w / 2.0, cfg.fence_y), map(w / 2.0, cfg.fence_y));
            svg.line(a.0, a.1, b.0, b.1, "black", 3.0);
        }
        let prey = map(cfg.prey.0, cfg.prey.1);
        svg.circle(prey.0, prey.1, 3.0, "black");
        let pts: Vec<(f64, f64)> = o.path.iter().map(|p| map(p.x, p.y)).collect();
        svg.polyline(&pts, "steelblue");
        for r in o.records.iter().filter(|r| r.bumped) {
            let p = map(r.pose.x, r.pose.y);
            svg.circle(p.0, p.1, 2.5, "firebrick");
        }
    }
    Ok(svg.finish())
}

fn raster(svg: &mut Svg, ox: f64, oy: f64, rows: &[&[f64]], cell: f64, title: &str) {
    svg.text(ox, oy - 6.0, 10.0, title);
    let peak = rows.iter().flat_map(|r| r.iter()).cloned().fold(0.0, f64::max).max(1e-12);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > 0.0 {
                svg.rect(ox + j as f64 * cell, oy + i as f64 * cell, cell, cell, &gray(v / peak), None);
            }
        }
    }
    let w = rows.first().map_or(0, |r| r.len()) as f64 * cell;
    svg.rect(ox, oy, w, rows.len() as f64 * cell, "none", Some("black"));
}

fn mhm_figure(dir: &Path) -> Result<String, HarnessError> {
    let trials: Vec<Phased<TrialOutcome>> = read_json(dir, DETOUR_TRIALS)?;
    let Some(last) = trials.iter().rev().find(|t| t.phase == "learning") else {
        return Err(HarnessError::Malformed { path: dir.join(DETOUR_TRIALS), message: "no learning trial".into() });
    };
    let recs = &last.outcome.records;
    let bins = recs.first().map_or(0, |r| r.mhm.len());
    let real: Vec<&[f64]> = recs.iter().map(|r| r.mhm.as_slice()).collect();
    let zeros = vec![0.0; bins];
    let pred: Vec<&[f64]> = recs.iter().map(|r| r.predicted.as_deref().unwrap_or(&zeros)).collect();
    let cell = 5.0;
    let w = bins as f64 * cell;
    let mut svg = Svg::new(2.0 * w + 60.0, recs.len() as f64 * cell + 60.0);
    raster(&mut svg, 20.0, 30.0, &real, cell, &format!("mhm, learning trial {}", last.index));
    raster(&mut svg, 40.0 + w, 30.0, &pred, cell, "predicted mhm (next tick)");
    Ok(svg.finish())
}

fn traces_figure(dir: &Path) -> Result<String, HarnessError> {
    let rows = read_traces(dir)?;
    let last = rows.iter().map(|r| r.tick).max().unwrap_or(0);
    let from = last.saturating_sub(TRACE_WINDOW - 1).max(1);
    let mut series: BTreeMap<String, Vec<(u64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.values.len() == 1 && r.tick >= from) {
        series.entry(format!("{}.{}", r.schema, r.port)).or_default().push((r.tick, r.values[0]));
    }
    let shown: Vec<_> = series.into_iter().take(MAX_SERIES).collect();
    let (w, h, pad) = (600.0, 40.0, 14.0);
    let mut svg = Svg::new(w + 160.0, shown.len().max(1) as f64 * (h + pad) + 2.0 * pad);
    let span = (last - from).max(1) as f64;
    for (k, (name, pts)) in shown.iter().enumerate() {
        let oy = pad + k as f64 * (h + pad);
        let amp = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1e-12);
        let mid = oy + h / 2.0;
        svg.line(150.0, mid, 150.0 + w, mid, "lightgray", 0.5);
        svg.text(4.0, mid + 3.0, 9.0, name);
        let line: Vec<(f64, f64)> = pts.iter().map(|(t, v)| (150.0 + (t - from) as f64 / span * w, mid - v / amp * h / 2.0)).collect();
        svg.polyline(&line, "black");
    }
    Ok(svg.finish())
}

fn matrix_figure(dir: &Path) -> Result<String, HarnessError> {
    let m: ReliabilityMatrix = read_json(dir, MATRIX)?;
    let s = &m.space;
    let nd = s.delays.len();
    let mut peak = 0.0f64;
    for e in 0..s.effects.len() {
        for c in 0..s.causes.len() {
            for d in 0..nd {
                peak = peak.max(m.get(e, c, d).abs());
            }
        }
    }
    let peak = peak.max(1e-12);
    let cell = 14.0;
    let panel_w = s.causes.len() as f64 * cell;
    let panel_h = nd as f64 * cell;
    let cols = s.effects.len().clamp(1, 4);
    let rows = s.effects.len().div_ceil(cols).max(1);
    let (pad, top) = (40.0, 70.0);
    let mut svg = Svg::new(cols as f64 * (panel_w + pad) + pad, rows as f64 * (panel_h + top) + pad);
    for (e, effect) in s.effects.iter().enumerate() {
        let ox = pad + (e % cols) as f64 * (panel_w + pad);
        let oy = top + (e / cols) as f64 * (panel_h + top);
        svg.text(ox, oy - 50.0, 10.0, &effect.schema);
        for (c, cause) in s.causes.iter().enumerate() {
            svg.text(ox + c as f64 * cell + 2.0, oy - 4.0 - (c % 3) as f64 * 12.0, 7.0, &cause.schema);
            for d in 0..nd {
                let r = m.get(e, c, d);
                let side = r.abs() / peak * (cell - 2.0);
                if side < 0.5 {
                    continue;
                }
                let x = ox + c as f64 * cell + (cell - side) / 2.0;
                let y = oy + d as f64 * cell + (cell - side) / 2.0;
                if r > 0.0 {
                    svg.rect(x, y, side, side, "black", None);
                } else {
                    svg.rect(x, y, side, side, "white", Some("black"));
                }
            }
        }
        for (d, tau) in s.delays.iter().enumerate() {
            svg.text(ox - 14.0, oy + d as f64 * cell + cell * 0.7, 7.0, &tau.to_string());
        }
        svg.rect(ox, oy, panel_w, panel_h, "none", Some("gray"));
    }
    Ok(svg.finish())
}
