//! Facial lattice of the lifted polytope plus the addition history used to
//! locate conflicts.
//!
//! The polytope is the intersection of a bounding box with upper half-spaces.
//! Every vertex is simple (exactly three planes). Faces are stored per plane
//! as vertex cycles, counter-clockwise about the outward normal. Vertices and
//! additions live in LIFO arenas so the most recent addition can be undone
//! exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

pub type VertexId = u32;
pub type PlaneId = u32;

/// Planes `0..6` bound the box: `x ≤ h, −x ≤ h, y ≤ h, −y ≤ h, z ≤ Z, −z ≤ Z`.
pub const BOX_PLANES: u32 = 6;

/// Inside is `n·p ≤ d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Plane {
    pub n: [f64; 3],
    pub d: f64,
}

impl Plane {
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.n[0] * p[0] + self.n[1] * p[1] + self.n[2] * p[2] - self.d
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Vertex {
    pub pos: [f64; 3],
    pub planes: [PlaneId; 3],
    pub creator: Option<PlaneId>,
    pub killer: Option<PlaneId>,
}

/// One history step: the half-space, the face it created and what it
/// replaced.
#[derive(Debug, Clone)]
pub(crate) struct Addition {
    pub plane: PlaneId,
    first_created: VertexId,
    /// createdFace, in face-traversal order.
    pub created: Vec<VertexId>,
    killed: Vec<VertexId>,
    /// Face cycles before the addition (deletedEdges / prev).
    pub snapshots: Vec<(PlaneId, Option<Vec<VertexId>>)>,
}

#[derive(Debug, Clone)]
pub struct FacialLattice {
    pub(crate) planes: Vec<Option<Plane>>,
    pub(crate) vertices: Vec<Vertex>,
    pub(crate) faces: Vec<Option<Vec<VertexId>>>,
}

#[derive(Debug, Clone)]
pub struct Shuffle {
    pub(crate) lattice: FacialLattice,
    pub(crate) history: Vec<Addition>,
    position: Vec<Option<usize>>,
    priority: Vec<f64>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn shared_planes(a: &Vertex, b: &Vertex) -> Vec<PlaneId> {
    a.planes.iter().copied().filter(|p| b.planes.contains(p)).collect()
}

impl FacialLattice {
    fn boxed(h: f64, z: f64) -> Self {
        let planes = vec![
            Plane { n: [1.0, 0.0, 0.0], d: h },
            Plane { n: [-1.0, 0.0, 0.0], d: h },
            Plane { n: [0.0, 1.0, 0.0], d: h },
            Plane { n: [0.0, -1.0, 0.0], d: h },
            Plane { n: [0.0, 0.0, 1.0], d: z },
            Plane { n: [0.0, 0.0, -1.0], d: z },
        ];
        let mut vertices = Vec::with_capacity(8);
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    let px = if sx > 0.0 { 0 } else { 1 };
                    let py = if sy > 0.0 { 2 } else { 3 };
                    let pz = if sz > 0.0 { 4 } else { 5 };
                    vertices.push(Vertex {
                        pos: [sx * h, sy * h, sz * z],
                        planes: [px, py, pz],
                        creator: None,
                        killer: None,
                    });
                }
            }
        }
        let mut faces = vec![None; 6];
        for (f, face) in faces.iter_mut().enumerate() {
            let n = planes[f].n;
            let mut ids: Vec<VertexId> = (0..8u32)
                .filter(|&v| vertices[v as usize].planes.contains(&(f as u32)))
                .collect();
            let c = ids.iter().fold([0.0; 3], |acc, &v| {
                let p = vertices[v as usize].pos;
                [acc[0] + p[0] / 4.0, acc[1] + p[1] / 4.0, acc[2] + p[2] / 4.0]
            });
            let u = if n[0] != 0.0 { [0.0, 1.0, 0.0] } else { [1.0, 0.0, 0.0] };
            let w = cross(n, u);
            ids.sort_by(|&a, &b| {
                let ang = |v: VertexId| {
                    let d = sub(vertices[v as usize].pos, c);
                    dot(d, w).atan2(dot(d, u))
                };
                ang(a).total_cmp(&ang(b))
            });
            *face = Some(ids);
        }
        FacialLattice {
            planes: planes.into_iter().map(Some).collect(),
            vertices,
            faces,
        }
    }

    pub fn face(&self, p: PlaneId) -> Option<&[VertexId]> {
        self.faces.get(p as usize).and_then(|f| f.as_deref())
    }

    pub fn position(&self, v: VertexId) -> [f64; 3] {
        self.vertices[v as usize].pos
    }

    /// Half-space whose addition created the vertex; `None` for box corners.
    pub fn creator(&self, v: VertexId) -> Option<PlaneId> {
        self.vertices[v as usize].creator
    }

    pub fn is_alive(&self, v: VertexId) -> bool {
        self.vertices[v as usize].killer.is_none()
    }

    /// Planes of the faces sharing an edge with face `p`.
    pub fn adjacent_planes(&self, p: PlaneId) -> BTreeSet<PlaneId> {
        let mut out = BTreeSet::new();
        if let Some(cycle) = self.face(p) {
            for i in 0..cycle.len() {
                let a = &self.vertices[cycle[i] as usize];
                let b = &self.vertices[cycle[(i + 1) % cycle.len()] as usize];
                out.extend(shared_planes(a, b).into_iter().filter(|&q| q != p));
            }
        }
        out
    }

    /// (V, E, F) of the current polytope.
    pub fn counts(&self) -> (usize, usize, usize) {
        let v = self.vertices.iter().filter(|v| v.killer.is_none()).count();
        let (mut e2, mut f) = (0, 0);
        for c in self.faces.iter().flatten() {
            e2 += c.len();
            f += 1;
        }
        (v, e2 / 2, f)
    }

    fn neighbors_of_vertex(&self, v: VertexId) -> [VertexId; 6] {
        let mut out = [v; 6];
        for (k, &p) in self.vertices[v as usize].planes.iter().enumerate() {
            let cycle = self.faces[p as usize].as_ref().expect("vertex on a live face");
            let i = cycle.iter().position(|&x| x == v).expect("vertex in its face cycle");
            out[2 * k] = cycle[(i + 1) % cycle.len()];
            out[2 * k + 1] = cycle[(i + cycle.len() - 1) % cycle.len()];
        }
        out
    }
}

pub(crate) enum AddOutcome {
    Added,
    Redundant,
}

impl Shuffle {
    pub fn new(h: f64, z: f64) -> Self {
        Shuffle {
            lattice: FacialLattice::boxed(h, z),
            history: Vec::new(),
            position: vec![None; BOX_PLANES as usize],
            priority: vec![0.0; BOX_PLANES as usize],
        }
    }

    pub fn lattice(&self) -> &FacialLattice {
        &self.lattice
    }

    pub(crate) fn set_plane(&mut self, id: PlaneId, plane: Plane, priority: f64) {
        let i = id as usize;
        if self.lattice.planes.len() <= i {
            self.lattice.planes.resize(i + 1, None);
            self.lattice.faces.resize(i + 1, None);
            self.position.resize(i + 1, None);
            self.priority.resize(i + 1, 0.0);
        }
        self.lattice.planes[i] = Some(plane);
        self.priority[i] = priority;
    }

    pub(crate) fn plane(&self, id: PlaneId) -> Plane {
        self.lattice.planes[id as usize].expect("registered plane")
    }

    pub fn priority(&self, id: PlaneId) -> f64 {
        self.priority[id as usize]
    }

    pub fn is_added(&self, id: PlaneId) -> bool {
        self.position.get(id as usize).copied().flatten().is_some()
    }

    pub fn history_index(&self, id: PlaneId) -> Option<usize> {
        self.position.get(id as usize).copied().flatten()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Index at which a half-space of this priority belongs in the history.
    pub fn slot_for(&self, priority: f64, id: PlaneId) -> usize {
        self.history
            .partition_point(|a| (self.priority[a.plane as usize], a.plane) < (priority, id))
    }

    /// A current vertex strictly outside the half-space, or `None` when the
    /// polytope lies inside it; also returns the number of nodes examined.
    pub(crate) fn traverse(&self, s: &Plane) -> (Option<VertexId>, usize) {
        let lat = &self.lattice;
        let mut visited = 0;
        let mut cur = None;
        for r in 0..8u32 {
            visited += 1;
            if s.eval(lat.vertices[r as usize].pos) > 0.0 {
                cur = Some(r);
                break;
            }
        }
        while let Some(u) = cur {
            let Some(k) = lat.vertices[u as usize].killer else {
                return (Some(u), visited);
            };
            let step = &self.history[self.position[k as usize].expect("killer in history")];
            cur = None;
            for &w in &step.created {
                visited += 1;
                if s.eval(lat.vertices[w as usize].pos) > 0.0 {
                    cur = Some(w);
                    break;
                }
            }
        }
        (None, visited)
    }

    /// Cuts the polytope with plane `id` and appends the step to the history.
    pub(crate) fn add(&mut self, id: PlaneId) -> AddOutcome {
        let s = self.plane(id);
        let (start, _) = self.traverse(&s);
        let Some(start) = start else {
            return AddOutcome::Redundant;
        };
        let lat = &mut self.lattice;

        let mut outside: BTreeSet<VertexId> = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for w in lat.neighbors_of_vertex(u) {
                if !outside.contains(&w) && s.eval(lat.vertices[w as usize].pos) > 0.0 {
                    outside.insert(w);
                    queue.push_back(w);
                }
            }
        }
        let touched: BTreeSet<PlaneId> = outside
            .iter()
            .flat_map(|&v| lat.vertices[v as usize].planes)
            .collect();

        let first_created = lat.vertices.len() as VertexId;
        let mut on_edge: HashMap<(VertexId, VertexId), VertexId> = HashMap::new();
        let mut succ: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut snapshots = Vec::with_capacity(touched.len() + 1);
        snapshots.push((id, lat.faces[id as usize].clone()));

        let mut split = |lat: &mut FacialLattice, a: VertexId, b: VertexId| -> VertexId {
            // a inside, b outside
            *on_edge.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (va, vb) = (&lat.vertices[a as usize], &lat.vertices[b as usize]);
                let (ga, gb) = (s.eval(va.pos), s.eval(vb.pos));
                let t = ga / (ga - gb);
                let pos = [
                    va.pos[0] + t * (vb.pos[0] - va.pos[0]),
                    va.pos[1] + t * (vb.pos[1] - va.pos[1]),
                    va.pos[2] + t * (vb.pos[2] - va.pos[2]),
                ];
                let sh = shared_planes(va, vb);
                debug_assert_eq!(sh.len(), 2, "edge endpoints share two planes");
                lat.vertices.push(Vertex {
                    pos,
                    planes: [sh[0], sh[1], id],
                    creator: Some(id),
                    killer: None,
                });
                (lat.vertices.len() - 1) as VertexId
            })
        };

        for &f in &touched {
            let old = lat.faces[f as usize].clone().expect("touched face is live");
            let out_flags: Vec<bool> = old.iter().map(|v| outside.contains(v)).collect();
            if out_flags.iter().all(|&o| o) {
                lat.faces[f as usize] = None;
                snapshots.push((f, Some(old)));
                continue;
            }
            let m = old.len();
            // start at an inside vertex so every exit follows its entry
            let i0 = out_flags.iter().position(|&o| !o).expect("partially cut face");
            let mut cycle = Vec::with_capacity(m + 2);
            let mut entry = None;
            for k in 0..m {
                let (i, j) = ((i0 + k) % m, (i0 + k + 1) % m);
                let (a, b) = (old[i], old[j]);
                let (ao, bo) = (out_flags[i], out_flags[j]);
                if !ao {
                    cycle.push(a);
                }
                if !ao && bo {
                    let x = split(lat, a, b);
                    cycle.push(x);
                    entry = Some(x);
                } else if ao && !bo {
                    let x = split(lat, b, a);
                    cycle.push(x);
                    succ.insert(x, entry.take().expect("entry precedes exit"));
                }
            }
            lat.faces[f as usize] = Some(cycle);
            snapshots.push((f, Some(old)));
        }

        let first = *succ.keys().next().expect("cut produces new vertices");
        let mut created = Vec::with_capacity(succ.len());
        let mut v = first;
        loop {
            created.push(v);
            v = succ[&v];
            if v == first || created.len() > succ.len() {
                break;
            }
        }
        assert_eq!(created.len(), succ.len(), "new face must be a single cycle");
        lat.faces[id as usize] = Some(created.clone());
        for &k in &outside {
            lat.vertices[k as usize].killer = Some(id);
        }
        self.position[id as usize] = Some(self.history.len());
        self.history.push(Addition {
            plane: id,
            first_created,
            created,
            killed: outside.into_iter().collect(),
            snapshots,
        });
        AddOutcome::Added
    }

    /// Undoes the latest addition and returns its plane.
    pub(crate) fn undo_last(&mut self) -> Option<PlaneId> {
        let step = self.history.pop()?;
        let lat = &mut self.lattice;
        for &k in &step.killed {
            lat.vertices[k as usize].killer = None;
        }
        for (f, old) in step.snapshots.into_iter().rev() {
            lat.faces[f as usize] = old;
        }
        lat.vertices.truncate(step.first_created as usize);
        self.position[step.plane as usize] = None;
        Some(step.plane)
    }
}
