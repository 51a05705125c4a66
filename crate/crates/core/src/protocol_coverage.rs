//! Static coverage map in the protocol model.
//!
//! A point is covered by `p` when it lies in p's transmission disk and outside
//! every other interference disk. The power diagram over interference disks
//! confines each region to its owner's cell, and inside the piece of the cell
//! nearest to neighbor `q` only q's interference disk needs subtracting.
//! Sites with empty cells still interfere with the site whose disk swallows
//! them, so they join the nearest-interferer split of every cell they reach.

use crate::geometry::{
    arc_polygon_area, region_disk_boolean, ArcPolygon, ConvexPolygon, Disk, Orientation, Point2, Window,
};
use crate::power_diagram::{frame_piece, DiagramError, PowerDiagram, SiteId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTransmitter {
    pub location: Point2,
    pub tx_radius: f64,
    pub int_radius: f64,
}

impl ProtocolTransmitter {
    pub fn new(location: Point2, tx_radius: f64, int_radius: f64) -> Self {
        ProtocolTransmitter {
            location,
            tx_radius,
            int_radius,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.location.is_finite()
            && self.tx_radius > 0.0
            && self.int_radius.is_finite()
            && self.int_radius >= self.tx_radius
    }

    pub fn tx_disk(&self) -> Disk {
        Disk::new(self.location, self.tx_radius)
    }

    pub fn int_disk(&self) -> Disk {
        Disk::new(self.location, self.int_radius)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("transmitter {0} needs 0 < tx_radius <= int_radius")]
    InvalidTransmitter(usize),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageMap {
    pub window: Window,
    pub transmitters: Vec<ProtocolTransmitter>,
    /// χ(p) indexed by site.
    pub regions: Vec<Vec<ArcPolygon>>,
    pub diagram: Option<PowerDiagram>,
}

impl CoverageMap {
    pub fn empty(window: Window) -> Self {
        CoverageMap {
            window,
            transmitters: Vec::new(),
            regions: Vec::new(),
            diagram: None,
        }
    }

    pub fn region(&self, p: SiteId) -> &[ArcPolygon] {
        &self.regions[p.0]
    }

    pub fn region_area(&self, p: SiteId) -> f64 {
        self.regions[p.0]
            .iter()
            .map(|a| arc_polygon_area(a).unwrap_or(0.0))
            .sum()
    }

    pub fn arc_count(&self) -> usize {
        self.regions
            .iter()
            .flatten()
            .map(|a| a.arcs().count())
            .sum()
    }

    /// Site whose region contains `x`, if any.
    pub fn covering_site(&self, x: Point2) -> Option<SiteId> {
        self.regions
            .iter()
            .position(|r| r.iter().any(|a| a.contains(x)))
            .map(SiteId)
    }
}

/// χ(p) for a site with a non-empty cell. `hidden` lists empty-cell sites
/// whose interference disks reach into the cell; they take part in the
/// nearest-interferer split exactly like neighbors.
pub(crate) fn site_region(
    pd: &PowerDiagram,
    tx: &ProtocolTransmitter,
    p: SiteId,
    hidden: &[SiteId],
) -> Vec<ArcPolygon> {
    let Some(cell) = pd.cell(p) else {
        return Vec::new();
    };
    let mut gamma: Vec<SiteId> = pd.neighbors_of(p).iter().copied().collect();
    gamma.extend(hidden.iter().copied().filter(|&h| h != p));
    gamma.sort();
    gamma.dedup();
    if gamma.is_empty() {
        let nothing = Disk::new(tx.location, 0.0);
        return region_disk_boolean(cell, &tx.tx_disk(), &nothing);
    }
    let mut out = Vec::new();
    for &q in &gamma {
        if let Some(piece) = frame_piece(pd, cell, q, &gamma) {
            out.extend(region_disk_boolean(&piece, &tx.tx_disk(), &pd.sites[q.0]));
        }
    }
    out
}

/// True when the disk meets the interior of the convex polygon.
pub(crate) fn disk_meets_polygon(d: &Disk, poly: &ConvexPolygon) -> bool {
    if poly.contains(d.center) {
        return true;
    }
    poly.edges().any(|(a, b)| {
        let ab = b - a;
        let t = ((d.center - a).dot(ab) / ab.norm2()).clamp(0.0, 1.0);
        a.lerp(b, t).dist(d.center) < d.radius
    })
}

/// For every site, the empty-cell sites whose disks overlap its cell. The
/// overlapping cells form a connected patch, walked from the cell holding
/// the hidden disk's center.
pub(crate) fn hidden_overlaps(pd: &PowerDiagram) -> Vec<Vec<SiteId>> {
    let n = pd.len();
    let mut out: Vec<Vec<SiteId>> = vec![Vec::new(); n];
    let visible: Vec<SiteId> = (0..n).map(SiteId).filter(|&s| pd.cell(s).is_some()).collect();
    for h in (0..n).map(SiteId).filter(|&s| pd.cell(s).is_none()) {
        let d = pd.sites[h.0];
        let Some(&start) = visible
            .iter()
            .min_by(|&&a, &&b| pd.power_of(d.center, a).total_cmp(&pd.power_of(d.center, b)))
        else {
            continue;
        };
        let mut seen = std::collections::BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            let cell = pd.cell(s).expect("visible");
            if !disk_meets_polygon(&d, cell) && s != start {
                continue;
            }
            out[s.0].push(h);
            for &q in pd.neighbors_of(s) {
                if seen.insert(q) {
                    stack.push(q);
                }
            }
        }
    }
    out
}

/// Build χ(p) for every transmitter.
pub fn compute_coverage_map(
    txs: &[ProtocolTransmitter],
    window: Window,
) -> Result<CoverageMap, CoverageError> {
    if let Some(i) = txs.iter().position(|t| !t.is_valid()) {
        return Err(CoverageError::InvalidTransmitter(i));
    }
    if txs.is_empty() {
        return Ok(CoverageMap::empty(window));
    }
    let disks: Vec<Disk> = txs.iter().map(|t| t.int_disk()).collect();
    let pd = PowerDiagram::build(&disks, window)?;
    let hidden = hidden_overlaps(&pd);
    let regions: Vec<Vec<ArcPolygon>> = (0..txs.len())
        .into_par_iter()
        .map(|i| site_region(&pd, &txs[i], SiteId(i), &hidden[i]))
        .collect();
    Ok(CoverageMap {
        window,
        transmitters: txs.to_vec(),
        regions,
        diagram: Some(pd),
    })
}

/// Total covered area; regions of distinct sites live in disjoint cells.
pub fn coverage_area(map: &CoverageMap) -> f64 {
    (0..map.regions.len()).map(|i| map.region_area(SiteId(i))).sum()
}

/// A site whose transmission disk meets another interference disk, found by
/// looking for an empty region, an interference arc, or a transmission
/// boundary that is not a full turn.
pub fn find_interference_bound(map: &CoverageMap) -> Option<SiteId> {
    for (i, region) in map.regions.iter().enumerate() {
        if region.is_empty() {
            return Some(SiteId(i));
        }
        let tx = map.transmitters[i].tx_disk();
        let mut turn = 0.0;
        for arc in region.iter().flat_map(|a| a.arcs()) {
            if arc.orientation == Orientation::Inward || arc.supporting_disk != tx {
                return Some(SiteId(i));
            }
            turn += arc.sweep();
        }
        if turn < TAU - 1e-6 {
            return Some(SiteId(i));
        }
    }
    None
}

/// Collinear gadget: transmitters at `(a_i, 0)` with radii ε/3 and 2ε/3, so
/// a transmitter is interference-bound exactly when some pair is closer than ε.
pub fn epsilon_gadget(seq: &[f64], eps: f64) -> (Vec<ProtocolTransmitter>, Window) {
    let txs: Vec<ProtocolTransmitter> = seq
        .iter()
        .map(|&a| ProtocolTransmitter::new(Point2::new(a, 0.0), eps / 3.0, 2.0 * eps / 3.0))
        .collect();
    let lo = seq.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = seq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let window = Window::new(lo - eps, -eps, hi + eps, eps);
    (txs, window)
}

/// Membership oracle: covered iff exactly one interference disk holds `x`
/// and `x` is inside that transmitter's transmission disk.
pub fn grid_oracle_area(txs: &[ProtocolTransmitter], window: Window, n: usize) -> f64 {
    let dx = window.width() / n as f64;
    let dy = window.height() / n as f64;
    let hits: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = window.x0 + (i as f64 + 0.5) * dx;
            let mut c = 0usize;
            for j in 0..n {
                let q = Point2::new(x, window.y0 + (j as f64 + 0.5) * dy);
                if point_covered(txs, q) {
                    c += 1;
                }
            }
            c
        })
        .sum();
    hits as f64 * dx * dy
}

pub fn point_covered(txs: &[ProtocolTransmitter], q: Point2) -> bool {
    let mut holder = None;
    for (k, t) in txs.iter().enumerate() {
        if q.dist2(t.location) < t.int_radius * t.int_radius {
            if holder.is_some() {
                return false;
            }
            holder = Some(k);
        }
    }
    holder.is_some_and(|k| q.dist2(txs[k].location) < txs[k].tx_radius * txs[k].tx_radius)
}
