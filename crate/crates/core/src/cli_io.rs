//! Scenario files, run manifests, CSV output and SVG rendering.

use crate::geometry::{ArcPolygon, ConvexPolygon, Disk, Orientation, Piece, Point2, Window};
use crate::optimizer::{Bounds, OptResult, SamplingPlan};
use crate::power_diagram::PowerDiagram;
use crate::protocol_coverage::{CoverageMap, ProtocolTransmitter};
use crate::sinr_model::{capture_with, PowerVector, SinrScenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("transmitter {index}: {reason}")]
    Model { index: usize, reason: String },
    #[error("{0}")]
    Scenario(String),
}

fn parse_err(path: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        path: path.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Protocol,
    Sinr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub int_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: Model,
    pub transmitters: Vec<TransmitterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Parses and validates a scenario. Schema errors carry the JSON path of the
/// offending field.
pub fn parse_scenario(bytes: &[u8]) -> Result<ScenarioFile, ScenarioError> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err("$", format!("not UTF-8: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let sc: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        parse_err(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })?;
    sc.validate()?;
    Ok(sc)
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.window.is_valid() {
            return Err(parse_err("window", "need finite x0 < x1 and y0 < y1"));
        }
        for (i, t) in self.transmitters.iter().enumerate() {
            if !(t.x.is_finite() && t.y.is_finite()) {
                return Err(parse_err(format!("transmitters[{i}]"), "coordinates must be finite"));
            }
        }
        match self.model {
            Model::Protocol => {
                for (i, t) in self.transmitters.iter().enumerate() {
                    let (Some(tx), Some(int)) = (t.tx_radius, t.int_radius) else {
                        let field = if t.tx_radius.is_none() { "tx_radius" } else { "int_radius" };
                        return Err(parse_err(
                            format!("transmitters[{i}].{field}"),
                            "required by the protocol model",
                        ));
                    };
                    if !(tx.is_finite() && int.is_finite() && tx > 0.0) {
                        return Err(ScenarioError::Model {
                            index: i,
                            reason: "radii must be finite and positive".into(),
                        });
                    }
                    if tx > int {
                        return Err(ScenarioError::Model {
                            index: i,
                            reason: format!("transmission radius {tx} exceeds interference radius {int}"),
                        });
                    }
                }
            }
            Model::Sinr => {
                for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("noise", self.noise)] {
                    if v.is_none() {
                        return Err(parse_err(name, "required by the sinr model"));
                    }
                }
                if self.transmitters.is_empty() {
                    return Err(parse_err("transmitters", "sinr model needs at least one transmitter"));
                }
                let with_power = self.transmitters.iter().filter(|t| t.power.is_some()).count();
                if with_power != 0 && with_power != self.transmitters.len() {
                    let i = self.transmitters.iter().position(|t| t.power.is_none()).unwrap_or(0);
                    return Err(parse_err(format!("transmitters[{i}].power"), "give a power for every transmitter or none"));
                }
                if with_power == 0 && self.bounds.is_none() {
                    return Err(parse_err("bounds", "sinr model needs transmitter powers or bounds"));
                }
                if let Some(b) = &self.bounds {
                    b.validate(self.transmitters.len())
                        .map_err(|_| parse_err("bounds", "need one 0 <= p_min <= p_max pair per transmitter"))?;
                }
                if let Some(p) = &self.sampling {
                    p.validate().map_err(|e| parse_err("sampling", e.to_string()))?;
                }
                self.sinr()?;
            }
        }
        Ok(())
    }

    pub fn protocol(&self) -> Result<Vec<ProtocolTransmitter>, ScenarioError> {
        if self.model != Model::Protocol {
            return Err(parse_err("model", "expected a protocol scenario"));
        }
        Ok(self
            .transmitters
            .iter()
            .map(|t| {
                ProtocolTransmitter::new(
                    Point2::new(t.x, t.y),
                    t.tx_radius.unwrap_or(0.0),
                    t.int_radius.unwrap_or(0.0),
                )
            })
            .collect())
    }

    /// Powers come from the transmitters, or from the upper bounds when none
    /// are given.
    pub fn sinr(&self) -> Result<SinrScenario, ScenarioError> {
        if self.model != Model::Sinr {
            return Err(parse_err("model", "expected a sinr scenario"));
        }
        let sites = self.transmitters.iter().map(|t| Point2::new(t.x, t.y)).collect();
        let powers = match (&self.bounds, self.transmitters.iter().all(|t| t.power.is_some())) {
            (_, true) => PowerVector::new(self.transmitters.iter().map(|t| t.power.unwrap_or(0.0)).collect()),
            (Some(b), false) => b.p_max.clone(),
            (None, false) => return Err(parse_err("bounds", "sinr model needs transmitter powers or bounds")),
        };
        SinrScenario::new(
            sites,
            powers,
            self.alpha.unwrap_or(f64::NAN),
            self.beta.unwrap_or(f64::NAN),
            self.noise.unwrap_or(f64::NAN),
            self.window,
        )
        .map_err(|e| ScenarioError::Scenario(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub tool_version: String,
    pub wall_time_ms: f64,
}

impl RunManifest {
    pub fn new(command: &str, input: Option<&[u8]>, seed: Option<u64>, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            input_sha256: input.map(sha256_hex),
            seed,
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: 0.0,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn trace_csv(r: &OptResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["evaluation", "best_area"]).expect("in-memory write");
    for (k, a) in &r.trace {
        w.serialize((k, a)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn sweep_csv(rows: &[(f64, f64)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["power", "area"]).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

const REGION_FILL: &str = "#9ecae1";

/// SVG document over a window, flipped so y points up, with a 5% margin.
pub struct SvgCanvas {
    window: Window,
    stroke: f64,
    body: String,
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

impl SvgCanvas {
    pub fn new(window: Window) -> Self {
        SvgCanvas {
            window,
            stroke: 0.002 * window.width().max(window.height()),
            body: String::new(),
        }
    }

    fn x(&self, p: Point2) -> String {
        num(p.x)
    }

    fn y(&self, p: Point2) -> String {
        num(self.window.y0 + self.window.y1 - p.y)
    }

    fn xy(&self, p: Point2) -> String {
        format!("{} {}", self.x(p), self.y(p))
    }

    /// Window boundary, solid.
    pub fn frame(&mut self) {
        let w = self.window;
        let _ = writeln!(
            self.body,
            r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
            num(w.x0),
            num(w.y0),
            num(w.width()),
            num(w.height()),
            num(self.stroke)
        );
    }

    pub fn interference_disk(&mut self, d: &Disk) {
        self.circle(d, "interference", "");
    }

    pub fn transmission_disk(&mut self, d: &Disk) {
        let dash = format!(r#" stroke-dasharray="{} {}""#, num(self.stroke), num(3.0 * self.stroke));
        self.circle(d, "transmission", &dash);
    }

    fn circle(&mut self, d: &Disk, class: &str, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{}"{extra}/>"#,
            self.x(d.center),
            self.y(d.center),
            num(d.radius),
            num(self.stroke)
        );
    }

    pub fn site(&mut self, p: Point2) {
        let _ = writeln!(
            self.body,
            r#"<circle class="site" cx="{}" cy="{}" r="{}" fill="black"/>"#,
            self.x(p),
            self.y(p),
            num(2.0 * self.stroke)
        );
    }

    /// Diagram edge, dashed.
    pub fn edge(&mut self, a: Point2, b: Point2) {
        let _ = writeln!(
            self.body,
            r#"<line class="edge" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
            self.x(a),
            self.y(a),
            self.x(b),
            self.y(b),
            num(self.stroke),
            num(4.0 * self.stroke),
            num(2.0 * self.stroke)
        );
    }

    pub fn region(&mut self, r: &ArcPolygon, fill: &str) {
        let mut d = String::new();
        for (k, piece) in r.pieces.iter().enumerate() {
            if k == 0 {
                let _ = write!(d, "M {} ", self.xy(piece.start()));
            }
            match piece {
                Piece::Segment(_, b) => {
                    let _ = write!(d, "L {} ", self.xy(*b));
                }
                Piece::Arc(a) => {
                    let rad = num(a.supporting_disk.radius);
                    // the y flip turns counterclockwise into SVG's negative sweep
                    let sweep_flag = match a.orientation {
                        Orientation::Outward => 0,
                        Orientation::Inward => 1,
                    };
                    let halves = if a.is_full_circle() { 2 } else { 1 };
                    for h in 1..=halves {
                        let end = piece.point_at(h as f64 / halves as f64);
                        let large = (a.sweep().abs() / halves as f64 > PI) as u8;
                        let _ = write!(d, "A {rad} {rad} 0 {large} {sweep_flag} {} ", self.xy(end));
                    }
                }
            }
        }
        d.push('Z');
        let _ = writeln!(
            self.body,
            r#"<path class="region" d="{d}" fill="{fill}" fill-opacity="0.6" stroke="none"/>"#
        );
    }

    pub fn cell_rect(&mut self, lo: Point2, hi: Point2, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect class="pixel" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            self.x(lo),
            self.y(Point2::new(lo.x, hi.y)),
            num(hi.x - lo.x),
            num(hi.y - lo.y)
        );
    }

    pub fn finish(self) -> String {
        let w = self.window;
        let (mx, my) = (0.05 * w.width(), 0.05 * w.height());
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n{}</svg>\n",
            num(w.x0 - mx),
            num(w.y0 - my),
            num(w.width() + 2.0 * mx),
            num(w.height() + 2.0 * my),
            self.body
        )
    }
}

fn on_frame(a: Point2, b: Point2, w: &Window) -> bool {
    let tol = 1e-9 * w.diameter();
    let same = |u: f64, v: f64, c: f64| (u - c).abs() <= tol && (v - c).abs() <= tol;
    same(a.x, b.x, w.x0) || same(a.x, b.x, w.x1) || same(a.y, b.y, w.y0) || same(a.y, b.y, w.y1)
}

/// Interior cell edges, each shared edge drawn once.
pub fn cell_edges<'a>(cells: impl Iterator<Item = &'a ConvexPolygon>, w: &Window) -> Vec<(Point2, Point2)> {
    let key = |p: Point2| (format!("{:.6}", p.x), format!("{:.6}", p.y));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in cells {
        for (a, b) in c.edges() {
            if a.dist(b) <= 1e-12 * w.diameter() || on_frame(a, b, w) {
                continue;
            }
            let (ka, kb) = (key(a), key(b));
            let k = if ka <= kb { (ka, kb) } else { (kb, ka) };
            if seen.insert(k) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn render_power_diagram(pd: &PowerDiagram) -> String {
    let mut svg = SvgCanvas::new(pd.window);
    for (a, b) in cell_edges(pd.cells.iter().flatten(), &pd.window) {
        svg.edge(a, b);
    }
    for d in &pd.sites {
        svg.interference_disk(d);
        svg.site(d.center);
    }
    svg.frame();
    svg.finish()
}

pub fn render_coverage_map(map: &CoverageMap) -> String {
    render_regions(
        map.window,
        &map.transmitters,
        map.regions.iter().flatten(),
        map.diagram.iter().flat_map(|pd| pd.cells.iter().flatten()),
    )
}

/// Shaded regions over transmitter disks and cell edges.
pub fn render_regions<'a>(
    window: Window,
    txs: &[ProtocolTransmitter],
    regions: impl Iterator<Item = &'a ArcPolygon>,
    cells: impl Iterator<Item = &'a ConvexPolygon>,
) -> String {
    let mut svg = SvgCanvas::new(window);
    for r in regions {
        svg.region(r, REGION_FILL);
    }
    for (a, b) in cell_edges(cells, &window) {
        svg.edge(a, b);
    }
    for t in txs {
        svg.interference_disk(&t.int_disk());
        svg.transmission_disk(&t.tx_disk());
        svg.site(t.location);
    }
    svg.frame();
    svg.finish()
}

fn palette(i: usize) -> String {
    format!("hsl({},65%,70%)", (i * 137) % 360)
}

/// `n × n` raster of the window colored by capture transmitter, blank where
/// the SINR threshold is not met.
pub fn render_capture_raster(s: &SinrScenario, n: usize) -> String {
    let w = s.window;
    let mut svg = SvgCanvas::new(w);
    let (dx, dy) = (w.width() / n as f64, w.height() / n as f64);
    for j in 0..n {
        for i in 0..n {
            let lo = Point2::new(w.x0 + i as f64 * dx, w.y0 + j as f64 * dy);
            let c = lo + Point2::new(0.5 * dx, 0.5 * dy);
            let (t, sinr) = capture_with(s, &s.powers.values, c);
            if sinr >= s.beta {
                svg.cell_rect(lo, lo + Point2::new(dx, dy), &palette(t));
            }
        }
    }
    for &p in &s.sites {
        svg.site(p);
    }
    svg.frame();
    svg.finish()
}
