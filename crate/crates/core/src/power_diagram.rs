//! Power diagram of a disk set clipped to a rectangular window.
//!
//! Each cell starts as the window and is clipped by the bisectors of nearby
//! sites, visited in rings of a uniform grid. The scan for a site stops once
//! no farther site can reach the current cell, which keeps the build close to
//! linear for spread-out inputs.

use crate::geometry::{
    clip_labeled, eps_geom, ConvexPolygon, Disk, HalfPlane, Point2, Window,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteId(pub usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("no sites given")]
    NoSites,
    #[error("sites {0:?} and {1:?} are identical disks")]
    DuplicateSite(SiteId, SiteId),
    #[error("site {0:?} has an empty power region")]
    HiddenSite(SiteId),
    #[error("window is not a valid rectangle")]
    BadWindow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerDiagram {
    pub window: Window,
    pub sites: Vec<Disk>,
    pub cells: Vec<Option<ConvexPolygon>>,
    pub neighbors: Vec<BTreeSet<SiteId>>,
    /// Perturbed weights r² + eps/2^i.
    weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFrame {
    pub owner: SiteId,
    pub partitions: BTreeMap<SiteId, ConvexPolygon>,
}

/// Index-ordered symbolic perturbation of r².
pub(crate) fn perturbed_weight(radius: f64, index: usize, eps: f64) -> f64 {
    radius * radius + eps * 0.5f64.powi(index.min(1074) as i32)
}

/// Half-plane of points whose weighted power distance to `ci` is at most
/// that to `cj`, written in a frame centered at `ci` then shifted back.
fn bisector(ci: Point2, wi: f64, cj: Point2, wj: f64) -> HalfPlane {
    let n = (cj - ci) * 2.0;
    let off = (cj - ci).norm2() + wi - wj;
    HalfPlane::new(n, off + n.dot(ci))
}

impl PowerDiagram {
    pub fn build(disks: &[Disk], window: Window) -> Result<PowerDiagram, DiagramError> {
        if disks.is_empty() {
            return Err(DiagramError::NoSites);
        }
        if !window.is_valid() {
            return Err(DiagramError::BadWindow);
        }
        let mut seen: HashMap<(u64, u64, u64), usize> = HashMap::new();
        for (i, d) in disks.iter().enumerate() {
            let key = (d.center.x.to_bits(), d.center.y.to_bits(), d.radius.to_bits());
            if let Some(&j) = seen.get(&key) {
                return Err(DiagramError::DuplicateSite(SiteId(j), SiteId(i)));
            }
            seen.insert(key, i);
        }

        let eps = eps_geom(window.diameter());
        // work in a frame centered on the window to limit cancellation
        let origin = window.center();
        let local: Vec<Point2> = disks.iter().map(|d| d.center - origin).collect();
        let weights: Vec<f64> = disks
            .iter()
            .enumerate()
            .map(|(i, d)| perturbed_weight(d.radius, i, eps))
            .collect();
        let wmax = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let n = disks.len();
        let g = ((n as f64).sqrt().ceil() as usize).max(1);
        let lo = Point2::new(window.x0, window.y0) - origin;
        let cw = window.width() / g as f64;
        let ch = window.height() / g as f64;
        let cell_of = |p: Point2| -> (usize, usize) {
            let gx = ((p.x - lo.x) / cw).floor().clamp(0.0, (g - 1) as f64) as usize;
            let gy = ((p.y - lo.y) / ch).floor().clamp(0.0, (g - 1) as f64) as usize;
            (gx, gy)
        };
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); g * g];
        for (i, &c) in local.iter().enumerate() {
            let (gx, gy) = cell_of(c);
            buckets[gy * g + gx].push(i);
        }
        // centers outside the window sit in border buckets; account for it
        let overshoot = local
            .iter()
            .map(|c| {
                let dx = (lo.x - c.x).max(c.x - (lo.x + window.width())).max(0.0);
                let dy = (lo.y - c.y).max(c.y - (lo.y + window.height())).max(0.0);
                dx.hypot(dy)
            })
            .fold(0.0, f64::max);

        let win_poly: Vec<Point2> = window
            .polygon()
            .vertices
            .into_iter()
            .map(|v| v - origin)
            .collect();
        let step = cw.min(ch);

        let mut cells: Vec<Option<ConvexPolygon>> = Vec::with_capacity(n);
        let mut labels_all: Vec<Vec<Option<usize>>> = Vec::with_capacity(n);
        for i in 0..n {
            let ci = local[i];
            let wi = weights[i];
            let mut verts = win_poly.clone();
            let mut labels: Vec<Option<usize>> = vec![None; 4];
            let (gx, gy) = cell_of(ci);
            let mut empty = false;
            let mut ring = 0usize;
            'rings: loop {
                if ring > 0 {
                    let reach = verts.iter().map(|v| v.dist(ci)).fold(0.0, f64::max);
                    let dmin = (ring as f64 - 1.0) * step - 2.0 * overshoot;
                    if dmin > 0.0 && (dmin * dmin + wi - wmax) / (2.0 * dmin) >= reach {
                        break;
                    }
                }
                if ring > g {
                    break;
                }
                let (x0, x1) = (gx as isize - ring as isize, gx as isize + ring as isize);
                let (y0, y1) = (gy as isize - ring as isize, gy as isize + ring as isize);
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        let on_ring = yy == y0 || yy == y1 || xx == x0 || xx == x1;
                        if !on_ring || xx < 0 || yy < 0 || xx >= g as isize || yy >= g as isize {
                            continue;
                        }
                        for &j in &buckets[yy as usize * g + xx as usize] {
                            if j == i {
                                continue;
                            }
                            let cj = local[j];
                            if cj == ci {
                                if weights[j] > wi {
                                    empty = true;
                                    break 'rings;
                                }
                                continue;
                            }
                            let h = bisector(ci, wi, cj, weights[j]);
                            let (nv, nl) = clip_labeled(&verts, &labels, &h, Some(j), eps);
                            verts = nv;
                            labels = nl;
                            if verts.len() < 3 {
                                empty = true;
                                break 'rings;
                            }
                        }
                    }
                }
                ring += 1;
            }
            let area = crate::geometry::ConvexPolygon::new(verts.clone()).area();
            if empty || verts.len() < 3 || area <= 1e-18 * window.diameter().powi(2) {
                cells.push(None);
                labels_all.push(Vec::new());
            } else {
                cells.push(Some(ConvexPolygon::new(
                    verts.into_iter().map(|v| v + origin).collect(),
                )));
                labels_all.push(labels);
            }
        }

        let mut neighbors: Vec<BTreeSet<SiteId>> = vec![BTreeSet::new(); n];
        for i in 0..n {
            if let Some(c) = &cells[i] {
                let m = c.vertices.len();
                for k in 0..m {
                    if let Some(j) = labels_all[i][k] {
                        let len = c.vertices[k].dist(c.vertices[(k + 1) % m]);
                        if len > eps && cells[j].is_some() {
                            neighbors[i].insert(SiteId(j));
                            neighbors[j].insert(SiteId(i));
                        }
                    }
                }
            }
        }

        Ok(PowerDiagram {
            window,
            sites: disks.to_vec(),
            cells,
            neighbors,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn cell(&self, p: SiteId) -> Option<&ConvexPolygon> {
        self.cells[p.0].as_ref()
    }

    pub fn neighbors_of(&self, p: SiteId) -> &BTreeSet<SiteId> {
        &self.neighbors[p.0]
    }

    /// Number of unordered neighbor pairs.
    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Weighted power distance used for cell ownership.
    pub fn power_of(&self, x: Point2, p: SiteId) -> f64 {
        x.dist2(self.sites[p.0].center) - self.weights[p.0]
    }

    /// ρ-argmin over all sites by direct scan.
    pub fn nearest_site(&self, x: Point2) -> SiteId {
        (0..self.len())
            .map(SiteId)
            .min_by(|&a, &b| self.power_of(x, a).total_cmp(&self.power_of(x, b)))
            .expect("non-empty diagram")
    }

    /// ▲(p, q) pieces: the cell of p split by which neighbor is ρ-closest.
    pub fn power_frame(&self, p: SiteId) -> Result<PowerFrame, DiagramError> {
        let cell = self.cell(p).ok_or(DiagramError::HiddenSite(p))?;
        let gamma: Vec<SiteId> = self.neighbors_of(p).iter().copied().collect();
        let mut partitions = BTreeMap::new();
        for &q in &gamma {
            if let Some(piece) = frame_piece(self, cell, q, &gamma) {
                partitions.insert(q, piece);
            }
        }
        Ok(PowerFrame {
            owner: p,
            partitions,
        })
    }
}

/// The part of `cell` where `q` is ρ-closest among `gamma`.
pub(crate) fn frame_piece(
    pd: &PowerDiagram,
    cell: &ConvexPolygon,
    q: SiteId,
    gamma: &[SiteId],
) -> Option<ConvexPolygon> {
    let o = pd.window.center();
    let eps = eps_geom(pd.window.diameter());
    let mut verts: Vec<Point2> = cell.vertices.iter().map(|&v| v - o).collect();
    let mut labels = vec![(); verts.len()];
    let cq = pd.sites[q.0].center - o;
    for &r in gamma {
        if r == q {
            continue;
        }
        let cr = pd.sites[r.0].center - o;
        if cr == cq {
            if pd.weights[r.0] > pd.weights[q.0] {
                return None;
            }
            continue;
        }
        let h = bisector(cq, pd.weights[q.0], cr, pd.weights[r.0]);
        let (nv, nl) = clip_labeled(&verts, &labels, &h, (), eps);
        verts = nv;
        labels = nl;
        if verts.len() < 3 {
            return None;
        }
    }
    let poly = ConvexPolygon::new(verts.into_iter().map(|v| v + o).collect());
    if poly.area() <= 1e-18 * pd.window.diameter().powi(2) {
        None
    } else {
        Some(poly)
    }
}

/// Split sites into those with non-empty and empty power regions.
pub fn remove_redundant(
    disks: &[Disk],
    window: Window,
) -> Result<(Vec<SiteId>, Vec<SiteId>), DiagramError> {
    let pd = PowerDiagram::build(disks, window)?;
    let (kept, removed): (Vec<SiteId>, Vec<SiteId>) =
        (0..pd.len()).map(SiteId).partition(|&s| pd.cell(s).is_some());
    Ok((kept, removed))
}
