//! Embedded planar tiling graphs: a half-edge structure whose faces are either
//! placed tiles (normal faces) or special faces standing for the unknown
//! region and for degenerate slivers between collinear edges.
//!
//! Conventions. Every face is traversed counter-clockwise through `next`, so
//! the face lies to the left of each of its half-edges. The angle stored on a
//! half-edge is the corner of its face at its origin, between `prev` and the
//! half-edge itself. A non-mirrored tile reads corners 1,2,3,4,5 in that
//! traversal; edge label `i` sits between corners `i` and `i+1`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::exactmath::{format_rational, parse_rational, LinearSystem, Rational};
use crate::vectypes::{VecType, VecTypeSet};

pub type VertexId = usize;
pub type HalfEdgeId = usize;
pub type FaceId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AngleLabel {
    /// Tile corner `1..=5`.
    Corner(u8),
    Empty,
    Pi,
    Unknown,
}

impl AngleLabel {
    pub fn is_flat(self) -> bool {
        matches!(self, AngleLabel::Empty | AngleLabel::Pi)
    }

    /// Size in multiples of π of a flat angle.
    fn flat_value(self) -> Option<i64> {
        match self {
            AngleLabel::Empty => Some(0),
            AngleLabel::Pi => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for AngleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleLabel::Corner(i) => write!(f, "{i}"),
            AngleLabel::Empty => f.write_str("e"),
            AngleLabel::Pi => f.write_str("p"),
            AngleLabel::Unknown => f.write_str("?"),
        }
    }
}

impl FromStr for AngleLabel {
    type Err = TilingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" => Ok(AngleLabel::Empty),
            "p" => Ok(AngleLabel::Pi),
            "?" => Ok(AngleLabel::Unknown),
            _ => match s.parse::<u8>() {
                Ok(i @ 1..=5) => Ok(AngleLabel::Corner(i)),
                _ => Err(TilingError::Parse(format!("bad angle label {s:?}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Normal { mirrored: bool },
    Special,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: VertexId,
    pub twin: HalfEdgeId,
    pub next: HalfEdgeId,
    pub prev: HalfEdgeId,
    pub face: FaceId,
    pub angle: AngleLabel,
    /// Length label `1..=5` of the underlying edge.
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub kind: FaceKind,
    pub half: HalfEdgeId,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("half-edge {0} has inconsistent links")]
    Structure(HalfEdgeId),
    #[error("Euler characteristic is {0}")]
    Euler(i64),
    #[error("graph is not connected")]
    Disconnected,
    #[error("normal face {0} is not a labelled pentagon")]
    BadNormalFace(FaceId),
    #[error("edge of half-edge {0} does not separate a normal and a special face")]
    EdgeSides(HalfEdgeId),
    #[error("{0} non-complete special faces")]
    NonCompleteFaces(usize),
    #[error("complete special face {0} does not have exactly two empty angles")]
    BadCompleteFace(FaceId),
    #[error("vertex {0} has more than one unknown angle")]
    MultipleUnknown(VertexId),
    #[error("vertex {0} has two flat angles of size pi")]
    TwoPi(VertexId),
    #[error("no member of X dominates the type of vertex {0}")]
    NoDominatingType(VertexId),
    #[error("complete vertex {0} has a type outside X")]
    CompleteTypeNotInX(VertexId),
    #[error("a run on face {0} has more than two empty angles")]
    RunTooManyEmpty(FaceId),
    #[error("vertex {0} qualifies for both completion rules")]
    AmbiguousCompletion(VertexId),
    #[error("merge impossible: {0}")]
    MergeCreatesViolation(&'static str),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("edge label {found} clashes with the forced label {expected}")]
    LabelClash { expected: u8, found: u8 },
    #[error("vertex {0} has no unknown angle to attach into")]
    NotAttachable(VertexId),
    #[error("snapshot: {0}")]
    Parse(String),
    #[error(transparent)]
    Violation(#[from] Violation),
}

/// Which boundary edge at `w` the new tile lies against: the one leaving `w`
/// along the unknown face, or the one arriving at `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attachment {
    pub vertex: VertexId,
    pub side: Side,
    pub corner: u8,
    pub mirrored: bool,
    /// Label of the new tile's edge lying along the boundary edge.
    pub edge_label: u8,
}

/// Corner labels of a tile read counter-clockwise from `corner`.
pub fn tile_corners(corner: u8, mirrored: bool) -> [u8; 5] {
    std::array::from_fn(|k| {
        let k = k as i32;
        let step = if mirrored { -k } else { k };
        ((corner as i32 - 1 + step).rem_euclid(5) + 1) as u8
    })
}

/// Label of the tile edge between two adjacent corners.
pub fn edge_between(a: u8, b: u8) -> u8 {
    if b == a % 5 + 1 {
        a
    } else {
        debug_assert_eq!(a, b % 5 + 1, "corners {a} and {b} are not adjacent");
        b
    }
}

impl Attachment {
    pub fn new(vertex: VertexId, side: Side, corner: u8, mirrored: bool) -> Attachment {
        let cs = tile_corners(corner, mirrored);
        let edge_label = match side {
            Side::Forward => edge_between(cs[0], cs[1]),
            Side::Backward => edge_between(cs[4], cs[0]),
        };
        Attachment { vertex, side, corner, mirrored, edge_label }
    }
}

/// A maximal stretch of flat angles on a special face, with the two flanking
/// vertices. `edges` are consecutive half-edges of the face; the run's points
/// are the origins of `edges` followed, when not cyclic, by the end of the
/// last edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub face: FaceId,
    pub edges: Vec<HalfEdgeId>,
    pub cyclic: bool,
}

/// Integer combination of the five edge lengths.
pub type LengthForm = [i64; 5];

/// Two points of a run that might coincide. `d` is the signed distance from
/// `a` to `b` along the run's line; merging them closes the stretch of the
/// face running from occurrence `a` to occurrence `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunPair {
    pub a: HalfEdgeId,
    pub b: HalfEdgeId,
    pub d: LengthForm,
}

impl Run {
    /// Half-edges whose origins are the run's points, in order.
    pub fn occurrences(&self, g: &TilingGraph) -> Vec<HalfEdgeId> {
        let mut occ = self.edges.clone();
        if !self.cyclic {
            occ.push(g.half(*self.edges.last().unwrap()).next);
        }
        occ
    }

    pub fn vertices(&self, g: &TilingGraph) -> Vec<VertexId> {
        self.occurrences(g).into_iter().map(|h| g.half(h).origin).collect()
    }

    /// Position of every point on the run's line, the first at 0.
    pub fn positions(&self, g: &TilingGraph) -> Vec<LengthForm> {
        let mut pos = vec![[0i64; 5]];
        let mut dir = 1;
        for (j, &e) in self.edges.iter().enumerate() {
            let mut p = *pos.last().unwrap();
            p[g.half(e).label as usize - 1] += dir;
            if j + 1 < self.edges.len() && g.half(self.edges[j + 1]).angle == AngleLabel::Empty {
                dir = -dir;
            }
            pos.push(p);
        }
        if self.cyclic {
            pos.pop();
        }
        pos
    }

    /// The pairs whose merge is combinatorially possible: distinct
    /// occurrences, not joined by a single edge, with one or two turns
    /// between them.
    pub fn pairs(&self, g: &TilingGraph) -> Vec<RunPair> {
        let occ = self.occurrences(g);
        let pos = self.positions(g);
        let mut out = Vec::new();
        for a in 0..occ.len() {
            for b in a + 2..occ.len() {
                if self.cyclic && a == 0 && b == occ.len() - 1 {
                    continue;
                }
                let turns = (a + 1..b).filter(|&j| g.half(occ[j]).angle == AngleLabel::Empty).count();
                if turns == 0 || turns > 2 {
                    continue;
                }
                let d = std::array::from_fn(|i| pos[b][i] - pos[a][i]);
                out.push(RunPair { a: occ[a], b: occ[b], d });
            }
        }
        out
    }
}

impl TilingGraph {
    /// One non-mirrored tile and the unknown region around it.
    pub fn initial() -> TilingGraph {
        let mut g = TilingGraph::default();
        let inner = g.faces.len();
        g.faces.push(Face { kind: FaceKind::Normal { mirrored: false }, half: 0 });
        let outer = g.faces.len();
        g.faces.push(Face { kind: FaceKind::Special, half: 1 });
        for k in 0..5 {
            g.vertices.push(Some(2 * k));
        }
        // Half-edge 2k runs from vertex k to k+1 inside the tile; 2k+1 is its
        // twin, running backwards around the outer face.
        for k in 0..5 {
            let (n, p) = ((k + 1) % 5, (k + 4) % 5);
            g.halves.push(HalfEdge {
                origin: k,
                twin: 2 * k + 1,
                next: 2 * n,
                prev: 2 * p,
                face: inner,
                angle: AngleLabel::Corner(k as u8 + 1),
                label: k as u8 + 1,
            });
            g.halves.push(HalfEdge {
                origin: n,
                twin: 2 * k,
                next: 2 * p + 1,
                prev: 2 * n + 1,
                face: outer,
                angle: AngleLabel::Unknown,
                label: k as u8 + 1,
            });
        }
        g
    }

    pub fn half(&self, h: HalfEdgeId) -> &HalfEdge {
        &self.halves[h]
    }

    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f]
    }

    pub fn halves(&self) -> &[HalfEdge] {
        &self.halves
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().enumerate().filter_map(|(v, h)| h.map(|_| v))
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        self.vertices.get(v).is_some_and(Option::is_some)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().flatten().count()
    }

    pub fn edge_count(&self) -> usize {
        self.halves.len() / 2
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn tile_count(&self) -> usize {
        self.faces.iter().filter(|f| matches!(f.kind, FaceKind::Normal { .. })).count()
    }

    /// Half-edges of a face in traversal order, starting at its representative.
    pub fn face_cycle(&self, f: FaceId) -> Vec<HalfEdgeId> {
        self.cycle_from(self.faces[f].half)
    }

    fn cycle_from(&self, start: HalfEdgeId) -> Vec<HalfEdgeId> {
        let mut out = vec![start];
        let mut h = self.halves[start].next;
        while h != start {
            out.push(h);
            h = self.halves[h].next;
            assert!(out.len() <= self.halves.len(), "face cycle does not close");
        }
        out
    }

    /// Outgoing half-edges of `v` in counter-clockwise order.
    pub fn outgoing(&self, v: VertexId) -> Vec<HalfEdgeId> {
        self.rotation(v).collect()
    }

    fn rotation(&self, v: VertexId) -> impl Iterator<Item = HalfEdgeId> + '_ {
        let start = self.vertices[v].expect("live vertex");
        let limit = self.halves.len();
        let mut next = Some(start);
        let mut steps = 0;
        std::iter::from_fn(move || {
            let h = next?;
            steps += 1;
            assert!(steps <= limit, "rotation does not close");
            let n = self.halves[self.halves[h].prev].twin;
            next = (n != start).then_some(n);
            Some(h)
        })
    }

    pub fn angles_at(&self, v: VertexId) -> Vec<AngleLabel> {
        self.rotation(v).map(|h| self.halves[h].angle).collect()
    }

    pub fn vect(&self, v: VertexId) -> VecType {
        let mut c = [0u32; 5];
        for h in self.rotation(v) {
            if let AngleLabel::Corner(i) = self.halves[h].angle {
                c[i as usize - 1] += 1;
            }
        }
        VecType(c)
    }

    pub fn has_pi(&self, v: VertexId) -> bool {
        self.rotation(v).any(|h| self.halves[h].angle == AngleLabel::Pi)
    }

    /// The vertex type, doubled at a half vertex.
    pub fn cvect(&self, v: VertexId) -> VecType {
        let t = self.vect(v);
        if self.has_pi(v) {
            t.scaled(2)
        } else {
            t
        }
    }

    /// The outgoing half-edge of `v` carrying its unknown angle.
    pub fn unknown_at(&self, v: VertexId) -> Option<HalfEdgeId> {
        self.rotation(v).find(|&h| self.halves[h].angle == AngleLabel::Unknown)
    }

    pub fn is_complete_vertex(&self, v: VertexId) -> bool {
        self.unknown_at(v).is_none()
    }

    pub fn is_complete_face(&self, f: FaceId) -> bool {
        self.face_cycle(f).iter().all(|&h| self.halves[h].angle != AngleLabel::Unknown)
    }

    /// The special face still holding unknown angles.
    pub fn open_face(&self) -> Option<FaceId> {
        (0..self.faces.len()).find(|&f| self.faces[f].kind == FaceKind::Special && !self.is_complete_face(f))
    }

    pub fn non_complete_vertices(&self) -> Vec<VertexId> {
        self.vertex_ids().filter(|&v| !self.is_complete_vertex(v)).collect()
    }

    /// All maximal runs: faces by id, and within a face in traversal order
    /// from its first non-flat angle.
    pub fn find_runs(&self) -> Vec<Run> {
        let mut out = Vec::new();
        for f in 0..self.faces.len() {
            if self.faces[f].kind != FaceKind::Special {
                continue;
            }
            let cycle = self.face_cycle(f);
            let flat: Vec<bool> = cycle.iter().map(|&h| self.halves[h].angle.is_flat()).collect();
            let Some(start) = flat.iter().position(|&x| !x) else {
                let lowest = cycle.iter().position(|&h| h == *cycle.iter().min().unwrap()).unwrap();
                let mut edges = cycle.clone();
                edges.rotate_left(lowest);
                out.push(Run { face: f, edges, cyclic: true });
                continue;
            };
            let n = cycle.len();
            let mut k = 1;
            while k <= n {
                let j = (start + k) % n;
                if !flat[j] {
                    k += 1;
                    continue;
                }
                let mut edges = vec![cycle[(start + k - 1) % n]];
                while k <= n && flat[(start + k) % n] {
                    edges.push(cycle[(start + k) % n]);
                    k += 1;
                }
                out.push(Run { face: f, edges, cyclic: false });
            }
        }
        out
    }

    /// Applies both completion rules until nothing changes. Returns whether
    /// any angle was relabelled.
    pub fn complete_vertices(&mut self, x: &VecTypeSet) -> Result<bool, Violation> {
        let mut any = false;
        loop {
            let mut changed = false;
            for v in self.vertex_ids().collect::<Vec<_>>() {
                let Some(h) = self.unknown_at(v) else { continue };
                let to_empty = x.contains(&self.cvect(v));
                let to_pi = !self.has_pi(v) && x.contains(&self.vect(v).scaled(2));
                match (to_empty, to_pi) {
                    (true, true) => return Err(Violation::AmbiguousCompletion(v)),
                    (true, false) => self.halves[h].angle = AngleLabel::Empty,
                    (false, true) => self.halves[h].angle = AngleLabel::Pi,
                    (false, false) => continue,
                }
                changed = true;
            }
            if !changed {
                return Ok(any);
            }
            any = true;
        }
    }

    /// Checks every structural and legality condition, reporting the first
    /// failure in a fixed order.
    pub fn check_invariants(&self, x: &VecTypeSet) -> Result<(), Violation> {
        self.check_structure()?;
        let euler = self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64;
        if euler != 2 {
            return Err(Violation::Euler(euler));
        }
        self.check_connected()?;
        for (f, face) in self.faces.iter().enumerate() {
            if let FaceKind::Normal { mirrored } = face.kind {
                self.check_tile(f, mirrored)?;
            }
        }
        for (h, e) in self.halves.iter().enumerate() {
            let a = self.faces[e.face].kind == FaceKind::Special;
            let b = self.faces[self.halves[e.twin].face].kind == FaceKind::Special;
            if a == b {
                return Err(Violation::EdgeSides(h));
            }
        }
        let mut open = 0;
        for f in 0..self.faces.len() {
            if self.faces[f].kind != FaceKind::Special {
                continue;
            }
            if self.is_complete_face(f) {
                let empties = self.face_cycle(f).iter().filter(|&&h| self.halves[h].angle == AngleLabel::Empty).count();
                if empties != 2 {
                    return Err(Violation::BadCompleteFace(f));
                }
            } else {
                open += 1;
            }
        }
        if open != 1 {
            return Err(Violation::NonCompleteFaces(open));
        }
        for v in self.vertex_ids() {
            let angles = self.angles_at(v);
            if angles.iter().filter(|&&a| a == AngleLabel::Unknown).count() > 1 {
                return Err(Violation::MultipleUnknown(v));
            }
            if angles.iter().filter(|&&a| a == AngleLabel::Pi).count() > 1 {
                return Err(Violation::TwoPi(v));
            }
            let t = self.cvect(v);
            if !x.iter().any(|w| t.dominated_by(w)) {
                return Err(Violation::NoDominatingType(v));
            }
            if !angles.contains(&AngleLabel::Unknown) && !x.contains(&t) {
                return Err(Violation::CompleteTypeNotInX(v));
            }
        }
        for run in self.find_runs() {
            let empties = run.edges.iter().skip(usize::from(!run.cyclic)).filter(|&&h| self.halves[h].angle == AngleLabel::Empty).count();
            if empties > 2 {
                return Err(Violation::RunTooManyEmpty(run.face));
            }
        }
        Ok(())
    }

    fn check_structure(&self) -> Result<(), Violation> {
        for (h, e) in self.halves.iter().enumerate() {
            let t = &self.halves[e.twin];
            let ok = t.twin == h
                && self.halves[e.next].prev == h
                && self.halves[e.prev].next == h
                && self.halves[e.next].face == e.face
                && self.halves[e.next].origin == t.origin
                && t.label == e.label
                && self.is_live(e.origin)
                && e.face < self.faces.len();
            if !ok {
                return Err(Violation::Structure(h));
            }
        }
        for (v, h) in self.vertices.iter().enumerate() {
            if let Some(h) = h {
                if self.halves[*h].origin != v {
                    return Err(Violation::Structure(*h));
                }
            }
        }
        for face in &self.faces {
            if self.halves[face.half].face != self.halves[self.halves[face.half].next].face {
                return Err(Violation::Structure(face.half));
            }
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<(), Violation> {
        let Some(start) = self.vertex_ids().next() else { return Ok(()) };
        let mut seen = vec![false; self.vertices.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for h in self.outgoing(v) {
                let w = self.halves[self.halves[h].twin].origin;
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        if count == self.vertex_count() {
            Ok(())
        } else {
            Err(Violation::Disconnected)
        }
    }

    fn check_tile(&self, f: FaceId, mirrored: bool) -> Result<(), Violation> {
        let cycle = self.face_cycle(f);
        if cycle.len() != 5 {
            return Err(Violation::BadNormalFace(f));
        }
        let AngleLabel::Corner(c0) = self.halves[cycle[0]].angle else {
            return Err(Violation::BadNormalFace(f));
        };
        let expected = tile_corners(c0, mirrored);
        for k in 0..5 {
            let e = &self.halves[cycle[k]];
            if e.angle != AngleLabel::Corner(expected[k]) || e.label != edge_between(expected[k], expected[(k + 1) % 5]) {
                return Err(Violation::BadNormalFace(f));
            }
        }
        Ok(())
    }

    /// Identifies the points at occurrences `a` and `b` of one special face,
    /// closing the stretch of the face from `a` up to `b` into its own
    /// complete special face.
    pub fn merge_occurrences(&mut self, a: HalfEdgeId, b: HalfEdgeId) -> Result<(), Violation> {
        let f = self.halves[a].face;
        if a == b || self.halves[b].face != f || self.faces[f].kind != FaceKind::Special {
            return Err(Violation::MergeCreatesViolation("occurrences are not on one special face"));
        }
        let (va, vb) = (self.halves[a].origin, self.halves[b].origin);
        if va == vb {
            return Err(Violation::MergeCreatesViolation("the two points are already one vertex"));
        }
        // The closed stretch a .. prev(b) must consist of flat angles with one
        // or two turns; the closing angle completes a sliver with two turns.
        let mut closed = vec![a];
        let mut h = self.halves[a].next;
        while h != b {
            if h == a {
                return Err(Violation::MergeCreatesViolation("occurrences are not on one face cycle"));
            }
            closed.push(h);
            h = self.halves[h].next;
        }
        let mut turns = 0;
        for &h in &closed[1..] {
            match self.halves[h].angle {
                AngleLabel::Empty => turns += 1,
                AngleLabel::Pi => {}
                _ => return Err(Violation::MergeCreatesViolation("the closed stretch is not flat")),
            }
        }
        let closing = match turns {
            1 => AngleLabel::Empty,
            2 => AngleLabel::Pi,
            _ => return Err(Violation::MergeCreatesViolation("the closed stretch cannot fold into a sliver")),
        };
        let (ta, tb) = (self.halves[a].angle, self.halves[b].angle);
        let other = match (ta.flat_value(), tb.flat_value()) {
            _ if ta == AngleLabel::Unknown || tb == AngleLabel::Unknown => AngleLabel::Unknown,
            (Some(x), Some(y)) => match x + y - 2 - closing.flat_value().unwrap() {
                0 => AngleLabel::Empty,
                1 => AngleLabel::Pi,
                _ => return Err(Violation::MergeCreatesViolation("angles around the merged point do not add up")),
            },
            _ => return Err(Violation::MergeCreatesViolation("corner angle on a special face")),
        };

        let (pa, pb) = (self.halves[a].prev, self.halves[b].prev);
        self.halves[pb].next = a;
        self.halves[a].prev = pb;
        self.halves[pa].next = b;
        self.halves[b].prev = pa;
        self.halves[a].angle = closing;
        self.halves[b].angle = other;
        let new_face = self.faces.len();
        self.faces.push(Face { kind: FaceKind::Special, half: a });
        for &h in &closed {
            self.halves[h].face = new_face;
        }
        self.faces[f].half = b;

        let (keep, gone) = (va.min(vb), va.max(vb));
        for e in &mut self.halves {
            if e.origin == gone {
                e.origin = keep;
            }
        }
        self.vertices[gone] = None;
        Ok(())
    }

    /// Merges two vertices sharing a run, picking the first pair of their
    /// occurrences that a run offers.
    pub fn merge_vertices(&mut self, v: VertexId, w: VertexId) -> Result<(), Violation> {
        if v == w {
            return Err(Violation::MergeCreatesViolation("a vertex cannot merge with itself"));
        }
        for run in self.find_runs() {
            let occ = run.occurrences(self);
            for (i, &a) in occ.iter().enumerate() {
                for &b in &occ[i + 1..] {
                    let (oa, ob) = (self.halves[a].origin, self.halves[b].origin);
                    if (oa, ob) == (v, w) || (oa, ob) == (w, v) {
                        return self.merge_occurrences(a, b);
                    }
                }
            }
        }
        Err(Violation::MergeCreatesViolation("the vertices share no run"))
    }

    /// Glues a new tile into the unknown angle at `a.vertex`.
    pub fn add_face(&mut self, a: &Attachment) -> Result<FaceId, TilingError> {
        let w = a.vertex;
        if !self.is_live(w) {
            return Err(TilingError::NotAttachable(w));
        }
        let h_out = self.unknown_at(w).ok_or(TilingError::NotAttachable(w))?;
        let corners = tile_corners(a.corner, a.mirrored);
        let forced = match a.side {
            Side::Forward => edge_between(corners[0], corners[1]),
            Side::Backward => edge_between(corners[4], corners[0]),
        };
        if forced != a.edge_label {
            return Err(TilingError::LabelClash { expected: forced, found: a.edge_label });
        }
        let outer = self.halves[h_out].face;
        let h_in = self.halves[h_out].prev;

        let tile = self.faces.len();
        let v0 = self.vertices.len();
        let base = self.halves.len();
        let seq = [w, v0, v0 + 1, v0 + 2, v0 + 3];
        // Tile half-edge t_k = base + 2k runs seq[k] -> seq[k+1]; its twin
        // o_k = base + 2k + 1 runs backwards on the outer face, where the new
        // chain reads h_in, o_4, o_3, o_2, o_1, o_0, h_out.
        let t = |k: usize| base + 2 * (k % 5);
        let o = |k: usize| base + 2 * (k % 5) + 1;
        for k in 0..5 {
            let label = edge_between(corners[k], corners[(k + 1) % 5]);
            self.halves.push(HalfEdge {
                origin: seq[k],
                twin: o(k),
                next: t(k + 1),
                prev: t(k + 4),
                face: tile,
                angle: AngleLabel::Corner(corners[k]),
                label,
            });
            self.halves.push(HalfEdge {
                origin: seq[(k + 1) % 5],
                twin: t(k),
                next: if k == 0 { h_out } else { o(k - 1) },
                prev: if k == 4 { h_in } else { o(k + 1) },
                face: outer,
                angle: AngleLabel::Unknown,
                label,
            });
        }
        self.halves[h_in].next = o(4);
        self.halves[h_out].prev = o(0);
        match a.side {
            Side::Forward => self.halves[h_out].angle = AngleLabel::Empty,
            Side::Backward => self.halves[o(4)].angle = AngleLabel::Empty,
        }
        for k in 1..5 {
            self.vertices.push(Some(t(k)));
        }
        self.faces.push(Face { kind: FaceKind::Normal { mirrored: a.mirrored }, half: t(0) });
        Ok(tile)
    }

    /// Every attachment at `w` on the given sides whose immediate result,
    /// after the completion rules, is still legal.
    pub fn attachments_on(&self, w: VertexId, x: &VecTypeSet, sides: &[Side]) -> Vec<Attachment> {
        let mut out = Vec::new();
        if self.unknown_at(w).is_none() {
            return out;
        }
        for &side in sides {
            for mirrored in [false, true] {
                for corner in 1..=5 {
                    let a = Attachment::new(w, side, corner, mirrored);
                    let mut g = self.clone();
                    if g.add_face(&a).is_ok() && g.complete_vertices(x).is_ok() && g.check_invariants(x).is_ok() {
                        out.push(a);
                    }
                }
            }
        }
        out
    }

    /// Attachments against either boundary edge at `w`.
    pub fn enumerate_attachments(&self, w: VertexId, x: &VecTypeSet) -> Vec<Attachment> {
        self.attachments_on(w, x, &[Side::Forward, Side::Backward])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TilingGraph {
    vertices: Vec<Option<HalfEdgeId>>,
    halves: Vec<HalfEdge>,
    faces: Vec<Face>,
}

pub fn initial_graph() -> TilingGraph {
    TilingGraph::initial()
}

const SNAPSHOT_HEADER: &str = "pentile-graph v1";

/// A search state as written to disk: the case, the graph and the length
/// program over `(ℓ1..ℓ5)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub case: usize,
    pub graph: TilingGraph,
    pub lengths: LinearSystem,
}

impl Snapshot {
    pub fn encode(&self) -> String {
        let g = &self.graph;
        let mut out = String::new();
        let _ = writeln!(out, "{SNAPSHOT_HEADER}");
        let _ = writeln!(out, "case {}", self.case);
        let _ = writeln!(out, "vertices {}", g.vertices.len());
        for h in &g.vertices {
            match h {
                Some(h) => {
                    let _ = writeln!(out, "{h}");
                }
                None => out.push_str("-\n"),
            }
        }
        let _ = writeln!(out, "halves {}", g.halves.len());
        for e in &g.halves {
            let _ = writeln!(out, "{} {} {} {} {} {} {}", e.origin, e.twin, e.next, e.prev, e.face, e.angle, e.label);
        }
        let _ = writeln!(out, "faces {}", g.faces.len());
        for f in &g.faces {
            let kind = match f.kind {
                FaceKind::Normal { mirrored: false } => "tile",
                FaceKind::Normal { mirrored: true } => "mirror",
                FaceKind::Special => "special",
            };
            let _ = writeln!(out, "{kind} {}", f.half);
        }
        let q = &self.lengths;
        let _ = writeln!(out, "rows {}", q.equalities.len() + q.inequalities.len());
        let row = |out: &mut String, op: &str, c: &[Rational], r: &Rational| {
            let cs: Vec<String> = c.iter().map(format_rational).collect();
            let _ = writeln!(out, "{op} {} {}", cs.join(" "), format_rational(r));
        };
        for e in &q.equalities {
            row(&mut out, "=", &e.coeffs, &e.rhs);
        }
        for r in &q.inequalities {
            row(&mut out, if r.strict { "<" } else { "<=" }, &r.coeffs, &r.rhs);
        }
        out.push_str("end\n");
        out
    }

    pub fn decode(text: &str) -> Result<Snapshot, TilingError> {
        let err = |m: String| TilingError::Parse(m);
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines.next().map(|(n, l)| (n + 1, l)).ok_or_else(|| err(format!("missing {what}")))
        };
        let (_, head) = next("header")?;
        if head != SNAPSHOT_HEADER {
            return Err(err(format!("unknown header {head:?}")));
        }
        fn field<T: FromStr>(n: usize, s: Option<&str>) -> Result<T, TilingError> {
            s.and_then(|s| s.parse().ok()).ok_or_else(|| TilingError::Parse(format!("line {n}: bad field")))
        }
        let counted = |line: (usize, &str), key: &str| -> Result<usize, TilingError> {
            let mut it = line.1.split_whitespace();
            if it.next() != Some(key) {
                return Err(TilingError::Parse(format!("line {}: expected {key}", line.0)));
            }
            field(line.0, it.next())
        };
        let case = counted(next("case")?, "case")?;
        let nv = counted(next("vertices")?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, l) = next("vertex")?;
            vertices.push(if l == "-" { None } else { Some(field(n, Some(l))?) });
        }
        let nh = counted(next("halves")?, "halves")?;
        let mut halves = Vec::with_capacity(nh);
        for _ in 0..nh {
            let (n, l) = next("half-edge")?;
            let p: Vec<&str> = l.split_whitespace().collect();
            if p.len() != 7 {
                return Err(err(format!("line {n}: expected 7 fields")));
            }
            let label: u8 = field(n, Some(p[6]))?;
            if !(1..=5).contains(&label) {
                return Err(err(format!("line {n}: edge label out of range")));
            }
            halves.push(HalfEdge {
                origin: field(n, Some(p[0]))?,
                twin: field(n, Some(p[1]))?,
                next: field(n, Some(p[2]))?,
                prev: field(n, Some(p[3]))?,
                face: field(n, Some(p[4]))?,
                angle: p[5].parse()?,
                label,
            });
        }
        let nf = counted(next("faces")?, "faces")?;
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (n, l) = next("face")?;
            let (kind, half) = l.split_once(' ').ok_or_else(|| err(format!("line {n}: bad face")))?;
            let kind = match kind {
                "tile" => FaceKind::Normal { mirrored: false },
                "mirror" => FaceKind::Normal { mirrored: true },
                "special" => FaceKind::Special,
                _ => return Err(err(format!("line {n}: bad face kind"))),
            };
            faces.push(Face { kind, half: field(n, Some(half))? });
        }
        let nr = counted(next("rows")?, "rows")?;
        let mut lengths = LinearSystem::new(5);
        for _ in 0..nr {
            let (n, l) = next("row")?;
            let p: Vec<&str> = l.split_whitespace().collect();
            if p.len() != 7 {
                return Err(err(format!("line {n}: expected 7 fields")));
            }
            let nums = p[1..]
                .iter()
                .map(|s| parse_rational(s).ok_or_else(|| err(format!("line {n}: bad number"))))
                .collect::<Result<Vec<_>, _>>()?;
            let (c, r) = (nums[..5].to_vec(), nums[5].clone());
            match p[0] {
                "=" => lengths.push_eq(c, r),
                "<=" => lengths.push_le(c, r),
                "<" => lengths.push_lt(c, r),
                _ => return Err(err(format!("line {n}: bad relation"))),
            };
        }
        let (n, end) = next("end")?;
        if end != "end" {
            return Err(err(format!("line {n}: expected end")));
        }
        // Reject dangling references before anything walks the structure.
        let g = TilingGraph { vertices, halves, faces };
        let nh = g.halves.len();
        let refs_ok = g.halves.iter().all(|e| {
            e.twin < nh && e.next < nh && e.prev < nh && e.face < g.faces.len() && e.origin < g.vertices.len()
        }) && g.faces.iter().all(|f| f.half < nh)
            && g.vertices.iter().flatten().all(|&h| h < nh);
        if !refs_ok || g.check_structure().is_err() {
            return Err(err("inconsistent half-edge links".into()));
        }
        Ok(Snapshot { case, graph: g, lengths })
    }
}

/// Five tiles of a tiling with angle types 00120 02001 20010 00004, grown
/// from one tile by attachments and merges, together with its length program
/// (sum 1, positive lengths, ℓ4 = ℓ5) and names for the points involved.
pub fn five_tile_example() -> (Snapshot, BTreeMap<&'static str, VertexId>) {
    let x: VecTypeSet = "00120 02001 20010 00004".parse().unwrap();
    let x = crate::vectypes::compat(&x).expect("bounded polytope");
    let mut g = initial_graph();
    let mut names = BTreeMap::from([("y", 0), ("x", 1), ("z", 4)]);
    let tile_points = |g: &TilingGraph, f: FaceId| -> Vec<VertexId> {
        g.face_cycle(f).into_iter().map(|h| g.half(h).origin).collect()
    };

    let b = g.add_face(&Attachment::new(0, Side::Backward, 1, true)).unwrap();
    let pb = tile_points(&g, b);
    g.merge_vertices(1, pb[4]).unwrap();
    names.insert("u'", pb[1]);
    names.insert("r'", pb[2]);

    let e = g.add_face(&Attachment::new(0, Side::Forward, 4, false)).unwrap();
    let pe = tile_points(&g, e);
    g.merge_vertices(4, pe[1]).unwrap();
    g.complete_vertices(&x).unwrap();
    let t = pe[4];
    names.insert("s'", pe[3]);
    names.insert("t", t);

    let d = g.add_face(&Attachment::new(t, Side::Forward, 4, false)).unwrap();
    let pd = tile_points(&g, d);
    names.insert("s", pd[1]);
    names.insert("w", pd[4]);

    let c = g.add_face(&Attachment::new(t, Side::Forward, 4, true)).unwrap();
    let pc = tile_points(&g, c);
    names.insert("w'", pc[1]);
    names.insert("r", pc[3]);
    names.insert("u", pc[4]);
    g.complete_vertices(&x).unwrap();

    let mut lengths = base_lengths();
    lengths.push_eq(crate::exactmath::rvec(&[0, 0, 0, 1, -1]), crate::exactmath::int(0));
    (Snapshot { case: 303, graph: g, lengths }, names)
}

/// `Σℓ = 1` and `ℓ_i > 0`.
pub fn base_lengths() -> LinearSystem {
    use crate::exactmath::{int, rvec};
    let mut q = LinearSystem::new(5);
    q.push_eq(rvec(&[1, 1, 1, 1, 1]), int(1));
    for i in 0..5 {
        let mut c = vec![int(0); 5];
        c[i] = int(1);
        q.push_gt(c, int(0));
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, rat, rvec};

    fn x1() -> VecTypeSet {
        "00022 11100".parse().unwrap()
    }

    #[test]
    fn initial_shape() {
        let g = initial_graph();
        assert_eq!((g.vertex_count(), g.edge_count(), g.face_count()), (5, 5, 2));
        assert_eq!(g.check_invariants(&x1()), Ok(()));
        assert!(g.find_runs().is_empty());
        for v in g.vertex_ids() {
            let angles = g.angles_at(v);
            assert_eq!(angles.iter().filter(|&&a| a == AngleLabel::Unknown).count(), 1);
            assert_eq!(g.cvect(v), VecType::unit(v));
        }
    }

    #[test]
    fn corner_orders() {
        assert_eq!(tile_corners(1, false), [1, 2, 3, 4, 5]);
        assert_eq!(tile_corners(2, true), [2, 1, 5, 4, 3]);
        assert_eq!(edge_between(5, 1), 5);
        assert_eq!(edge_between(3, 2), 2);
    }

    #[test]
    fn attach_grows_one_face() {
        let g = initial_graph();
        let mut h = g.clone();
        let a = Attachment::new(0, Side::Forward, 1, true);
        h.add_face(&a).unwrap();
        assert_eq!(h.face_count(), g.face_count() + 1);
        assert_eq!(h.vertex_count() as i64 - h.edge_count() as i64 + h.face_count() as i64, 2);
        let mut bad = a;
        bad.edge_label = a.edge_label % 5 + 1;
        assert!(matches!(g.clone().add_face(&bad), Err(TilingError::LabelClash { .. })));
    }

    #[test]
    fn mirrored_neighbour_merges_into_a_sliver() {
        // A mirror image glued along edge 5: both ends of the shared edge
        // line up and the run closes with two empty angles.
        let x: VecTypeSet = "00022 11100 20010 02001".parse().unwrap();
        let mut g = initial_graph();
        g.add_face(&Attachment::new(0, Side::Forward, 1, true)).unwrap();
        let runs = g.find_runs();
        assert_eq!(runs.len(), 1);
        let pairs = runs[0].pairs(&g);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].d, [0; 5]);
        g.merge_occurrences(pairs[0].a, pairs[0].b).unwrap();
        assert_eq!(g.vertex_count(), 8);
        g.check_invariants(&x).unwrap();
        let slivers: Vec<_> = (0..g.face_count()).filter(|&f| g.face(f).kind == FaceKind::Special && g.is_complete_face(f)).collect();
        assert_eq!(slivers.len(), 1);
        assert_eq!(g.face_cycle(slivers[0]).len(), 2);
    }

    #[test]
    fn adjacent_points_do_not_merge() {
        let mut g = initial_graph();
        g.add_face(&Attachment::new(0, Side::Forward, 1, true)).unwrap();
        let run = &g.find_runs()[0];
        let occ = run.occurrences(&g);
        assert!(matches!(g.merge_occurrences(occ[0], occ[1]), Err(Violation::MergeCreatesViolation(_))));
    }

    #[test]
    fn dominance_violation() {
        let mut g = initial_graph();
        // Three corner-5 angles at one vertex.
        g.add_face(&Attachment::new(4, Side::Forward, 5, true)).unwrap();
        g.add_face(&Attachment::new(4, Side::Forward, 5, false)).unwrap();
        assert_eq!(g.cvect(4), VecType([0, 0, 0, 0, 3]));
        assert_eq!(g.check_invariants(&x1()), Err(Violation::NoDominatingType(4)));
    }

    #[test]
    fn snapshot_round_trip() {
        let mut g = initial_graph();
        g.add_face(&Attachment::new(2, Side::Backward, 4, false)).unwrap();
        let mut q = LinearSystem::new(5);
        q.push_eq(rvec(&[1, 1, 1, 1, 1]), int(1));
        q.push_lt(rvec(&[-1, 0, 0, 0, 0]), rat(-1, 3));
        let s = Snapshot { case: 7, graph: g, lengths: q };
        let text = s.encode();
        let back = Snapshot::decode(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.encode(), text);
        assert!(Snapshot::decode("pentile-graph v1\ncase x\n").is_err());
    }
}
