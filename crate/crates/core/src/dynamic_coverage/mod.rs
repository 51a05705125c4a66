//! Coverage maps maintained under single-transmitter insertion and deletion.
//!
//! Interference disks are lifted to upper half-spaces whose intersection is a
//! convex polytope; its faces project to power cells. The polytope's facial
//! lattice keeps a history of additions ordered by random priority, which is
//! searched to find conflicts with a new half-space. Sites whose half-spaces
//! are redundant are parked as hidden disks and revived when a deletion
//! exposes them.

pub mod lattice;
pub mod lift;
pub mod treap;

use crate::geometry::{
    clip_convex, convex_polygon_intersection, power_bisector, power_distance, region_disk_boolean, ArcPolygon,
    ConvexPolygon, Disk, Point2, Window,
};
use crate::power_diagram::SiteId;
use crate::protocol_coverage::{disk_meets_polygon, ProtocolTransmitter};
use lattice::{AddOutcome, Plane, PlaneId, Shuffle, VertexId, BOX_PLANES};
use lift::{lift_weighted, HalfSpace3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;
use thiserror::Error;


#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicError {
    #[error("transmitter radii must satisfy 0 < tx <= int and be finite")]
    InvalidTransmitter,
    #[error("an identical interference disk is already present as site {0:?}")]
    DuplicateSite(SiteId),
    #[error("no site {0:?}")]
    UnknownSite(SiteId),
    #[error("invalid window")]
    BadWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpdateReport {
    pub site: SiteId,
    pub inserted: bool,
    /// The site itself ended up (or was) hidden.
    pub hidden: bool,
    /// Sites whose regions were recomputed.
    pub affected: Vec<SiteId>,
    pub newly_hidden: Vec<SiteId>,
    pub revived: Vec<SiteId>,
    /// Faces of the lifted polytope whose geometry changed.
    pub structural_change: usize,
    pub rebuilt: bool,
    pub elapsed_ms: f64,
}

/// Uniform bucket grid over hidden interference disks, sized by the largest
/// radius so each disk lands in at most a 3×3 block.
struct DiskBuckets {
    size: f64,
    cells: HashMap<(i64, i64), Vec<SiteId>>,
}

impl DiskBuckets {
    fn new(disks: &[(SiteId, Disk)]) -> Self {
        let size = disks.iter().map(|d| 2.0 * d.1.radius).fold(f64::MIN_POSITIVE, f64::max);
        let mut cells: HashMap<(i64, i64), Vec<SiteId>> = HashMap::new();
        for (id, d) in disks {
            let (lo, hi) = (d.center - Point2::new(d.radius, d.radius), d.center + Point2::new(d.radius, d.radius));
            for key in Self::keys(size, lo, hi) {
                cells.entry(key).or_default().push(*id);
            }
        }
        DiskBuckets { size, cells }
    }

    fn keys(size: f64, lo: Point2, hi: Point2) -> impl Iterator<Item = (i64, i64)> {
        let k = |v: f64| (v / size).floor() as i64;
        let (x0, x1, y0, y1) = (k(lo.x), k(hi.x), k(lo.y), k(hi.y));
        (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
    }

    /// Candidates whose bucket overlaps the bounding box of `poly`.
    fn near(&self, poly: &ConvexPolygon) -> BTreeSet<SiteId> {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &poly.vertices {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        if self.cells.is_empty() || lo.x > hi.x {
            return BTreeSet::new();
        }
        if ((hi.x - lo.x) / self.size) * ((hi.y - lo.y) / self.size) > self.cells.len() as f64 {
            return self.cells.values().flatten().copied().collect();
        }
        Self::keys(self.size, lo, hi)
            .filter_map(|key| self.cells.get(&key))
            .flatten()
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Visible,
    Hidden(Option<SiteId>),
}

#[derive(Debug, Clone)]
struct Site {
    tx: ProtocolTransmitter,
    priority: f64,
    state: State,
}

#[derive(Debug, Default)]
struct Change {
    touched: BTreeSet<SiteId>,
    newly_hidden: Vec<SiteId>,
    faces: usize,
}

impl Change {
    fn absorb(&mut self, o: Change) {
        self.touched.extend(o.touched);
        self.newly_hidden.extend(o.newly_hidden);
        self.faces += o.faces;
    }
}

fn plane_of(id: SiteId) -> PlaneId {
    BOX_PLANES + id.0 as PlaneId
}

fn site_of(p: PlaneId) -> Option<SiteId> {
    (p >= BOX_PLANES).then(|| SiteId((p - BOX_PLANES) as usize))
}

#[derive(Debug, Clone)]
pub struct DynamicCoverage {
    window: Window,
    seed: u64,
    rng: ChaCha8Rng,
    origin: Point2,
    scale: f64,
    half_side: f64,
    height: f64,
    shuffle: Shuffle,
    sites: Vec<Option<Site>>,
    regions: BTreeMap<SiteId, Vec<ArcPolygon>>,
}

impl DynamicCoverage {
    pub fn new(window: Window, seed: u64) -> Result<Self, DynamicError> {
        if !window.is_valid() {
            return Err(DynamicError::BadWindow);
        }
        let (h, z) = (4.0, 4.0);
        Ok(DynamicCoverage {
            window,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            origin: window.center(),
            scale: window.diameter(),
            half_side: h,
            height: z,
            shuffle: Shuffle::new(h, z),
            sites: Vec::new(),
            regions: BTreeMap::new(),
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shuffle(&self) -> &Shuffle {
        &self.shuffle
    }

    /// Live sites in id order.
    pub fn site_ids(&self) -> Vec<SiteId> {
        (0..self.sites.len())
            .filter(|&i| self.sites[i].is_some())
            .map(SiteId)
            .collect()
    }

    pub fn transmitter(&self, id: SiteId) -> Option<&ProtocolTransmitter> {
        self.sites.get(id.0).and_then(|s| s.as_ref()).map(|s| &s.tx)
    }

    /// Live transmitters in id order; index `i` matches `site_ids()[i]`.
    pub fn transmitters(&self) -> Vec<ProtocolTransmitter> {
        self.sites.iter().flatten().map(|s| s.tx).collect()
    }

    pub fn priority(&self, id: SiteId) -> Option<f64> {
        self.sites.get(id.0).and_then(|s| s.as_ref()).map(|s| s.priority)
    }

    pub fn region(&self, id: SiteId) -> &[ArcPolygon] {
        self.regions.get(&id).map_or(&[], |r| r.as_slice())
    }

    pub fn regions(&self) -> &BTreeMap<SiteId, Vec<ArcPolygon>> {
        &self.regions
    }

    pub fn region_area(&self, id: SiteId) -> f64 {
        self.region(id)
            .iter()
            .map(|p| crate::geometry::arc_polygon_area(p).unwrap_or(0.0))
            .sum()
    }

    pub fn coverage_area(&self) -> f64 {
        self.regions.keys().map(|&id| self.region_area(id)).sum()
    }

    /// Hidden site → site whose power cell held its center when parked.
    pub fn hidden(&self) -> BTreeMap<SiteId, SiteId> {
        self.sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s.as_ref()?.state {
                State::Hidden(Some(o)) => Some((SiteId(i), o)),
                _ => None,
            })
            .collect()
    }

    pub fn is_hidden(&self, id: SiteId) -> bool {
        matches!(self.sites.get(id.0).and_then(|s| s.as_ref()).map(|s| s.state), Some(State::Hidden(_)))
    }

    /// V + E + F of the lifted polytope.
    pub fn lattice_size(&self) -> usize {
        let (v, e, f) = self.shuffle.lattice().counts();
        v + e + f
    }

    pub fn euler_characteristic(&self) -> i64 {
        let (v, e, f) = self.shuffle.lattice().counts();
        v as i64 - e as i64 + f as i64
    }

    /// Power cell of a visible site, clipped to the window.
    pub fn cell(&self, id: SiteId) -> Option<ConvexPolygon> {
        let lat = self.shuffle.lattice();
        let cycle = lat.face(plane_of(id))?;
        // site faces point down, so the projected cycle runs clockwise
        let verts: Vec<Point2> = cycle
            .iter()
            .rev()
            .map(|&v| {
                let p = lat.position(v);
                self.origin + Point2::new(p[0], p[1]) * self.scale
            })
            .collect();
        convex_polygon_intersection(&ConvexPolygon::new(verts), &self.window.polygon())
    }

    /// Sites sharing a lattice edge with this site's face.
    pub fn neighbors(&self, id: SiteId) -> Vec<SiteId> {
        self.shuffle
            .lattice()
            .adjacent_planes(plane_of(id))
            .into_iter()
            .filter_map(site_of)
            .collect()
    }

    fn local_plane(&self, center: Point2, weight: f64) -> Plane {
        let c = (center - self.origin) * (1.0 / self.scale);
        let h = lift_weighted(c, weight / (self.scale * self.scale));
        Plane {
            n: [h.a, h.b, -1.0],
            d: -h.c,
        }
    }

    fn local_bound(&self, tx: &ProtocolTransmitter, h: f64) -> (f64, f64) {
        let c = (tx.location - self.origin) * (1.0 / self.scale);
        let r = tx.int_radius / self.scale;
        let cn = c.norm();
        (cn, 2.0 * std::f64::consts::SQRT_2 * cn * h + cn * cn + r * r)
    }

    fn fits(&self, tx: &ProtocolTransmitter) -> bool {
        let (cn, b) = self.local_bound(tx, self.half_side);
        2.0 * cn <= self.half_side && 2.0 * b <= self.height
    }

    /// The conflict search on a world-space half-space.
    pub fn traverse_shuffle(&self, s: &HalfSpace3) -> Option<VertexId> {
        self.traverse_shuffle_counted(s).0
    }

    /// Also returns the number of history nodes examined.
    pub fn traverse_shuffle_counted(&self, s: &HalfSpace3) -> (Option<VertexId>, usize) {
        let (c, w) = s.center_weight();
        self.shuffle.traverse(&self.local_plane(c, w))
    }

    fn draw_priority(&mut self) -> f64 {
        loop {
            let p: f64 = self.rng.gen();
            if p > 0.0 {
                return p;
            }
        }
    }

    fn visible_owner(&self, x: Point2) -> Option<SiteId> {
        self.sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Some(s) if s.state == State::Visible => Some((i, power_distance(x, &s.tx.int_disk()))),
                _ => None,
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| SiteId(i))
    }

    fn site(&self, id: SiteId) -> &Site {
        self.sites[id.0].as_ref().expect("live site")
    }

    fn site_mut(&mut self, id: SiteId) -> &mut Site {
        self.sites[id.0].as_mut().expect("live site")
    }

    fn face_geometry(&self, p: PlaneId) -> Vec<[u64; 3]> {
        let lat = self.shuffle.lattice();
        let mut g: Vec<[u64; 3]> = lat
            .face(p)
            .map(|c| {
                c.iter()
                    .map(|&v| {
                        let q = lat.position(v);
                        [q[0].to_bits(), q[1].to_bits(), q[2].to_bits()]
                    })
                    .collect()
            })
            .unwrap_or_default();
        g.sort_unstable();
        g
    }

    /// Rewinds the history to `slot`, then replays the undone half-spaces in
    /// priority order with `insert` added and `remove` dropped. Replayed
    /// half-spaces that turn out redundant are parked.
    fn rewrite(&mut self, slot: usize, insert: Option<SiteId>, remove: Option<SiteId>) -> Change {
        let mut before: HashMap<PlaneId, Vec<[u64; 3]>> = HashMap::new();
        for step in &self.shuffle.history[slot..] {
            for &(f, _) in &step.snapshots {
                before.entry(f).or_insert_with(|| self.face_geometry(f));
            }
        }
        let mut queue: Vec<PlaneId> = Vec::new();
        while self.shuffle.history_len() > slot {
            queue.push(self.shuffle.undo_last().expect("non-empty history"));
        }
        queue.reverse();
        if let Some(r) = remove {
            queue.retain(|&p| p != plane_of(r));
        }
        if let Some(i) = insert {
            let p = plane_of(i);
            let k = queue.partition_point(|&q| (self.shuffle.priority(q), q) < (self.shuffle.priority(p), p));
            queue.insert(k, p);
            before.entry(p).or_default();
        }

        let mut change = Change::default();
        for p in queue {
            let site = site_of(p).expect("site plane");
            match self.shuffle.add(p) {
                AddOutcome::Added => {
                    let step = self.shuffle.history.last().expect("just added");
                    for (f, old) in &step.snapshots {
                        if !before.contains_key(f) {
                            // untouched by the old suffix, so the snapshot is the prior geometry
                            let lat = self.shuffle.lattice();
                            let mut g: Vec<[u64; 3]> = old
                                .iter()
                                .flatten()
                                .map(|&v| {
                                    let q = lat.position(v);
                                    [q[0].to_bits(), q[1].to_bits(), q[2].to_bits()]
                                })
                                .collect();
                            g.sort_unstable();
                            before.insert(*f, g);
                        }
                    }
                    self.site_mut(site).state = State::Visible;
                }
                AddOutcome::Redundant => {
                    self.site_mut(site).state = State::Hidden(None);
                    change.newly_hidden.push(site);
                    change.touched.insert(site);
                }
            }
        }
        for (f, g) in before {
            if self.face_geometry(f) != g {
                change.faces += 1;
                if let Some(s) = site_of(f) {
                    change.touched.insert(s);
                }
            }
        }
        if let Some(r) = remove {
            change.touched.insert(r);
        }
        change
    }

    /// Parks visible sites whose faces were cut away entirely.
    fn purge_dead(&mut self, change: &mut Change) {
        loop {
            let dead = change
                .touched
                .iter()
                .copied()
                .filter(|&s| {
                    self.sites[s.0].as_ref().is_some_and(|x| x.state == State::Visible)
                        && self.shuffle.lattice().face(plane_of(s)).is_none()
                })
                .min_by_key(|&s| self.shuffle.history_index(plane_of(s)));
            let Some(d) = dead else { break };
            let slot = self.shuffle.history_index(plane_of(d)).expect("visible site in history");
            let c = self.rewrite(slot, None, Some(d));
            self.site_mut(d).state = State::Hidden(None);
            change.newly_hidden.push(d);
            change.absorb(c);
        }
    }

    fn assign_owners(&mut self) {
        let pending: Vec<SiteId> = (0..self.sites.len())
            .map(SiteId)
            .filter(|&i| match self.sites[i.0].as_ref().map(|s| s.state) {
                Some(State::Hidden(None)) => true,
                Some(State::Hidden(Some(o))) => !matches!(
                    self.sites.get(o.0).and_then(|s| s.as_ref()).map(|s| s.state),
                    Some(State::Visible)
                ),
                _ => false,
            })
            .collect();
        for h in pending {
            let owner = self.visible_owner(self.site(h).tx.location);
            self.site_mut(h).state = State::Hidden(owner);
        }
    }

    /// Visible sites whose cells meet the interference disk.
    fn cells_meeting(&self, d: &Disk) -> Vec<SiteId> {
        let Some(start) = self.visible_owner(d.center) else {
            return Vec::new();
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            let meets = match self.cell(s) {
                Some(c) => disk_meets_polygon(d, &c),
                None => false,
            };
            if !meets && s != start {
                continue;
            }
            out.push(s);
            for q in self.neighbors(s) {
                if seen.insert(q) {
                    stack.push(q);
                }
            }
        }
        out
    }

    fn compute_region(&self, id: SiteId, hidden: &DiskBuckets) -> Vec<ArcPolygon> {
        let Some(cell) = self.cell(id) else {
            return Vec::new();
        };
        let tx = self.site(id).tx;
        let mut gamma: BTreeSet<SiteId> = self.neighbors(id).into_iter().collect();
        gamma.extend(
            hidden
                .near(&cell)
                .into_iter()
                .filter(|&h| disk_meets_polygon(&self.site(h).tx.int_disk(), &cell)),
        );
        let others: Vec<Disk> = gamma
            .iter()
            .map(|&q| self.site(q).tx.int_disk())
            .filter(|d| disk_meets_polygon(d, &cell))
            .collect();
        if others.is_empty() {
            return region_disk_boolean(&cell, &tx.tx_disk(), &Disk::new(tx.location, 0.0));
        }
        let mut out = Vec::new();
        'pieces: for (i, q) in others.iter().enumerate() {
            let mut piece = cell.clone();
            for (j, r) in others.iter().enumerate() {
                if i == j {
                    continue;
                }
                match power_bisector(q, r) {
                    Ok(h) => match clip_convex(&piece, &h) {
                        Some(p) => piece = p,
                        None => continue 'pieces,
                    },
                    Err(_) => {
                        if r.radius > q.radius {
                            continue 'pieces;
                        }
                    }
                }
            }
            out.extend(region_disk_boolean(&piece, &tx.tx_disk(), q));
        }
        out
    }

    fn refresh_regions(&mut self, ids: &BTreeSet<SiteId>) {
        let visible: Vec<SiteId> = ids
            .iter()
            .copied()
            .filter(|&s| matches!(self.sites.get(s.0).and_then(|x| x.as_ref()).map(|x| x.state), Some(State::Visible)))
            .collect();
        let hidden: Vec<(SiteId, Disk)> = self
            .sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Some(s) if matches!(s.state, State::Hidden(_)) => Some((SiteId(i), s.tx.int_disk())),
                _ => None,
            })
            .collect();
        let hidden = DiskBuckets::new(&hidden);
        let fresh: Vec<(SiteId, Vec<ArcPolygon>)> = visible
            .par_iter()
            .map(|&s| (s, self.compute_region(s, &hidden)))
            .collect();
        for &s in ids {
            self.regions.remove(&s);
        }
        for (s, r) in fresh {
            self.regions.insert(s, r);
        }
    }

    /// Re-fits the bounding box and rebuilds the history from scratch,
    /// replaying every live site in priority order.
    fn rebuild(&mut self) {
        let live: Vec<SiteId> = self.site_ids();
        let mut h: f64 = 1.0;
        for &s in &live {
            h = h.max(self.local_bound(&self.site(s).tx, 0.0).0);
        }
        let h = 4.0 * h;
        let mut z: f64 = 1.0;
        for &s in &live {
            z = z.max(self.local_bound(&self.site(s).tx, h).1);
        }
        self.half_side = h;
        self.height = 4.0 * z;
        self.shuffle = Shuffle::new(self.half_side, self.height);
        let mut order: Vec<(f64, SiteId)> = live.iter().map(|&s| (self.site(s).priority, s)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(p, s) in &order {
            let tx = self.site(s).tx;
            let plane = self.local_plane(tx.location, tx.int_radius * tx.int_radius);
            self.shuffle.set_plane(plane_of(s), plane, p);
        }
        // a plane whose face is later cut away leaves the polytope unchanged,
        // so one more pass without those planes yields a clean history
        let mut parked: BTreeSet<SiteId> = BTreeSet::new();
        loop {
            for &(_, s) in &order {
                if parked.contains(&s) {
                    self.site_mut(s).state = State::Hidden(None);
                    continue;
                }
                match self.shuffle.add(plane_of(s)) {
                    AddOutcome::Added => self.site_mut(s).state = State::Visible,
                    AddOutcome::Redundant => self.site_mut(s).state = State::Hidden(None),
                }
            }
            let dead: Vec<SiteId> = order
                .iter()
                .map(|e| e.1)
                .filter(|&s| self.site(s).state == State::Visible && self.shuffle.lattice().face(plane_of(s)).is_none())
                .collect();
            if dead.is_empty() {
                break;
            }
            parked.extend(dead);
            while self.shuffle.undo_last().is_some() {}
        }
        for &s in &live {
            if let State::Hidden(_) = self.site(s).state {
                self.site_mut(s).state = State::Hidden(None);
            }
        }
        self.assign_owners();
        self.regions.clear();
        let all: BTreeSet<SiteId> = live.into_iter().collect();
        self.refresh_regions(&all);
    }

    fn register(&mut self, tx: ProtocolTransmitter) -> Result<SiteId, DynamicError> {
        if !tx.is_valid() {
            return Err(DynamicError::InvalidTransmitter);
        }
        for (i, s) in self.sites.iter().enumerate() {
            if let Some(s) = s {
                if s.tx.location == tx.location && s.tx.int_radius == tx.int_radius {
                    return Err(DynamicError::DuplicateSite(SiteId(i)));
                }
            }
        }
        let priority = self.draw_priority();
        let id = SiteId(self.sites.len());
        self.sites.push(Some(Site {
            tx,
            priority,
            state: State::Hidden(None),
        }));
        let plane = self.local_plane(tx.location, tx.int_radius * tx.int_radius);
        self.shuffle.set_plane(plane_of(id), plane, priority);
        Ok(id)
    }

    pub fn insert_transmitter(&mut self, tx: ProtocolTransmitter) -> Result<UpdateReport, DynamicError> {
        let t0 = Instant::now();
        let id = self.register(tx)?;
        let mut report = UpdateReport {
            site: id,
            inserted: true,
            hidden: false,
            affected: Vec::new(),
            newly_hidden: Vec::new(),
            revived: Vec::new(),
            structural_change: 0,
            rebuilt: false,
            elapsed_ms: 0.0,
        };
        if !self.fits(&tx) {
            self.rebuild();
            report.rebuilt = true;
            report.hidden = self.is_hidden(id);
            report.affected = self.regions.keys().copied().collect();
            report.newly_hidden = self.hidden().into_keys().collect();
            report.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
            return Ok(report);
        }
        let plane = self.shuffle.plane(plane_of(id));
        let mut refresh = BTreeSet::new();
        if self.shuffle.traverse(&plane).0.is_none() {
            let owner = self.visible_owner(tx.location);
            self.site_mut(id).state = State::Hidden(owner);
            report.hidden = true;
            report.newly_hidden.push(id);
            refresh.extend(self.cells_meeting(&tx.int_disk()));
        } else {
            let slot = self.shuffle.slot_for(self.site(id).priority, plane_of(id));
            let mut change = self.rewrite(slot, Some(id), None);
            self.purge_dead(&mut change);
            self.assign_owners();
            report.structural_change = change.faces;
            report.newly_hidden = change.newly_hidden;
            report.hidden = self.is_hidden(id);
            refresh.extend(change.touched);
        }
        self.refresh_regions(&refresh);
        report.affected = refresh.into_iter().collect();
        report.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
        Ok(report)
    }

    pub fn delete_transmitter(&mut self, id: SiteId) -> Result<UpdateReport, DynamicError> {
        let t0 = Instant::now();
        let Some(site) = self.sites.get(id.0).and_then(|s| s.clone()) else {
            return Err(DynamicError::UnknownSite(id));
        };
        let mut report = UpdateReport {
            site: id,
            inserted: false,
            hidden: matches!(site.state, State::Hidden(_)),
            affected: Vec::new(),
            newly_hidden: Vec::new(),
            revived: Vec::new(),
            structural_change: 0,
            rebuilt: false,
            elapsed_ms: 0.0,
        };
        let mut refresh = BTreeSet::new();
        if report.hidden {
            refresh.extend(self.cells_meeting(&site.tx.int_disk()));
            self.sites[id.0] = None;
        } else {
            let slot = self.shuffle.history_index(plane_of(id)).expect("visible site in history");
            let mut change = self.rewrite(slot, None, Some(id));
            self.sites[id.0] = None;
            self.purge_dead(&mut change);

            // re-probe parked disks keyed to the deleted site or any touched cell
            let mut keys: BTreeSet<SiteId> = change.touched.clone();
            keys.insert(id);
            loop {
                let candidates: Vec<SiteId> = self
                    .hidden_keyed_to(&keys)
                    .into_iter()
                    .filter(|h| !change.newly_hidden.contains(h))
                    .collect();
                let mut revived_any = false;
                for h in candidates {
                    let plane = self.shuffle.plane(plane_of(h));
                    if self.shuffle.traverse(&plane).0.is_none() {
                        continue;
                    }
                    let slot = self.shuffle.slot_for(self.site(h).priority, plane_of(h));
                    let mut c = self.rewrite(slot, Some(h), None);
                    self.purge_dead(&mut c);
                    keys.extend(c.touched.iter().copied());
                    change.absorb(c);
                    report.revived.push(h);
                    revived_any = true;
                }
                if !revived_any {
                    break;
                }
            }
            self.assign_owners();
            report.structural_change = change.faces;
            report.newly_hidden = change.newly_hidden;
            refresh.extend(change.touched);
        }
        self.regions.remove(&id);
        refresh.remove(&id);
        self.refresh_regions(&refresh);
        report.affected = refresh.into_iter().collect();
        report.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
        Ok(report)
    }

    fn hidden_keyed_to(&self, keys: &BTreeSet<SiteId>) -> Vec<SiteId> {
        (0..self.sites.len())
            .map(SiteId)
            .filter(|&i| match self.sites[i.0].as_ref().map(|s| s.state) {
                Some(State::Hidden(Some(o))) => keys.contains(&o),
                Some(State::Hidden(None)) => true,
                _ => false,
            })
            .collect()
    }

    /// Builds from scratch: priorities are drawn in input order, then sites
    /// are added in increasing priority so every addition lands at the end
    /// of the history.
    pub fn bulk_insert(&mut self, txs: &[ProtocolTransmitter]) -> Result<Vec<SiteId>, DynamicError> {
        let mut ids = Vec::with_capacity(txs.len());
        for tx in txs {
            ids.push(self.register(*tx)?);
        }
        self.rebuild();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol_coverage::compute_coverage_map;
    use rand::Rng;

    fn t(x: f64, y: f64, tx: f64, int: f64) -> ProtocolTransmitter {
        ProtocolTransmitter::new(Point2::new(x, y), tx, int)
    }

    fn win() -> Window {
        Window::new(-20.0, -20.0, 20.0, 20.0)
    }

    /// Per-site areas against a static rebuild of the live set.
    pub(crate) fn assert_matches_static(dc: &DynamicCoverage) {
        let ids = dc.site_ids();
        let txs = dc.transmitters();
        let map = compute_coverage_map(&txs, dc.window()).unwrap();
        let wa = dc.window().area();
        for (i, &id) in ids.iter().enumerate() {
            let a = dc.region_area(id);
            let b = map.region_area(SiteId(i));
            assert!(
                (a - b).abs() <= 1e-6 * a.max(b) + 1e-12 * wa,
                "site {id:?}: dynamic {a} static {b} (hidden {})",
                dc.is_hidden(id)
            );
        }
        assert_eq!(dc.euler_characteristic(), 2);
    }

    #[test]
    fn single_insert_matches_static() {
        let mut dc = DynamicCoverage::new(win(), 1).unwrap();
        dc.insert_transmitter(t(1.0, 2.0, 3.0, 5.0)).unwrap();
        assert_matches_static(&dc);
        assert!((dc.coverage_area() - 9.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn empty_box_probe_finds_a_corner() {
        let dc = DynamicCoverage::new(win(), 1).unwrap();
        let v = dc.traverse_shuffle(&lift::lift(&Disk::new(Point2::new(0.0, 0.0), 1.0)));
        assert!(v.is_some_and(|v| v < 8));
    }

    #[test]
    fn collinear_middle_disk_is_hidden_and_revives() {
        // the revived cell lies at x < -21.75
        let mut dc = DynamicCoverage::new(Window::new(-30.0, -30.0, 30.0, 30.0), 3).unwrap();
        let a = dc.insert_transmitter(t(0.0, 0.0, 5.0, 10.0)).unwrap().site;
        dc.insert_transmitter(t(4.0, 0.0, 5.0, 10.0)).unwrap();
        let mid = Disk::new(Point2::new(2.0, 0.0), 1.0);
        assert!(dc.traverse_shuffle(&lift::lift(&mid)).is_none());
        let far = Disk::new(Point2::new(15.0, 15.0), 1.0);
        assert!(dc.traverse_shuffle(&lift::lift(&far)).is_some());

        let r = dc.insert_transmitter(t(2.0, 0.0, 0.5, 1.0)).unwrap();
        assert!(r.hidden);
        assert!(dc.hidden().contains_key(&r.site));
        assert_matches_static(&dc);

        let d = dc.delete_transmitter(a).unwrap();
        assert_eq!(d.revived, vec![r.site]);
        assert!(!dc.is_hidden(r.site));
        assert!(dc.cell(r.site).unwrap().vertices.iter().all(|v| v.x < -21.7));
        assert_matches_static(&dc);
    }

    #[test]
    fn insert_then_delete_restores_regions() {
        let mut dc = DynamicCoverage::new(win(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let r = rng.gen_range(1.0..4.0);
            dc.insert_transmitter(t(rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0), r, r * 1.5))
                .unwrap();
        }
        let before: Vec<(SiteId, f64)> = dc.site_ids().iter().map(|&s| (s, dc.region_area(s))).collect();
        let id = dc.insert_transmitter(t(0.5, 0.5, 3.0, 4.0)).unwrap().site;
        dc.delete_transmitter(id).unwrap();
        for (s, a) in before {
            assert!((dc.region_area(s) - a).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn delete_only_site_empties_map() {
        let mut dc = DynamicCoverage::new(win(), 2).unwrap();
        let id = dc.insert_transmitter(t(0.0, 0.0, 1.0, 2.0)).unwrap().site;
        dc.delete_transmitter(id).unwrap();
        assert!(dc.regions().is_empty());
        assert_eq!(dc.coverage_area(), 0.0);
        assert_eq!(dc.delete_transmitter(id), Err(DynamicError::UnknownSite(id)));
    }

    #[test]
    fn duplicate_rejected() {
        let mut dc = DynamicCoverage::new(win(), 2).unwrap();
        let id = dc.insert_transmitter(t(0.0, 0.0, 1.0, 2.0)).unwrap().site;
        assert_eq!(dc.insert_transmitter(t(0.0, 0.0, 0.5, 2.0)), Err(DynamicError::DuplicateSite(id)));
    }

    #[test]
    fn random_inserts_match_static_on_every_prefix() {
        let mut dc = DynamicCoverage::new(win(), 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..100 {
            let r = rng.gen_range(0.5..4.0);
            dc.insert_transmitter(t(rng.gen_range(-19.0..19.0), rng.gen_range(-19.0..19.0), r, r * rng.gen_range(1.0..2.0)))
                .unwrap();
            assert_matches_static(&dc);
            let visible = dc.site_ids().len() - dc.hidden().len();
            if visible >= 10 {
                assert!(dc.lattice_size() <= 20 * visible, "size {} at {i}", dc.lattice_size());
            }
        }
    }

    #[test]
    fn interleaved_updates_with_nested_disks() {
        let mut dc = DynamicCoverage::new(win(), 13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut live: Vec<SiteId> = Vec::new();
        for _ in 0..150 {
            if live.is_empty() || rng.gen_bool(0.6) {
                let tx = if !live.is_empty() && rng.gen_bool(0.3) {
                    // nested inside an existing interference disk
                    let host = dc.transmitter(live[rng.gen_range(0..live.len())]).copied().unwrap();
                    let r = host.int_radius * rng.gen_range(0.1..0.5);
                    let off = host.int_radius * rng.gen_range(0.0..0.3);
                    let a = rng.gen_range(0.0..std::f64::consts::TAU);
                    t(host.location.x + off * a.cos(), host.location.y + off * a.sin(), r * 0.8, r)
                } else {
                    let r = rng.gen_range(0.5..4.0);
                    t(rng.gen_range(-19.0..19.0), rng.gen_range(-19.0..19.0), r, r * rng.gen_range(1.0..2.0))
                };
                live.push(dc.insert_transmitter(tx).unwrap().site);
            } else {
                let k = rng.gen_range(0..live.len());
                dc.delete_transmitter(live.swap_remove(k)).unwrap();
            }
            assert_matches_static(&dc);
        }
    }
}
