//! Trapezoidal map with its history search structure.
//!
//! [`SearchStructure`] performs the randomized incremental construction. With
//! merging enabled it is the history DAG; with merging disabled it is the
//! trapezoidal search tree of [`crate::tree`]. Both share every other step of
//! the construction so that the two can be compared path by path.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{lex_compare, orient, side_of, Point, Segment, SegmentId, Side, XPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TrapId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl TrapId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Lower or upper boundary of a trapezoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Boundary {
    Floor,
    Ceiling,
    Segment(SegmentId),
}

impl Boundary {
    pub fn segment(self) -> Option<SegmentId> {
        match self {
            Boundary::Segment(id) => Some(id),
            _ => None,
        }
    }
}

/// One trapezoid of the map, live or historical.
///
/// A side with a single neighbor stores it in both slots of that side; a side
/// with no neighbor (a degenerate side or a side at infinity) stores `None` in both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trapezoid {
    pub left_wall: XPoint,
    pub right_wall: XPoint,
    pub bottom: Boundary,
    pub top: Boundary,
    pub upper_left: Option<TrapId>,
    pub lower_left: Option<TrapId>,
    pub upper_right: Option<TrapId>,
    pub lower_right: Option<TrapId>,
    pub alive: bool,
    pub birth_iteration: u32,
    pub death_iteration: Option<u32>,
    /// Leaf node while alive; after destruction, the root of the subtree that replaced it.
    pub node: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    Point { point: Point, left: NodeId, right: NodeId },
    Segment { segment: SegmentId, above: NodeId, below: NodeId },
    Leaf { trapezoid: TrapId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Longest root-to-node path, counted in internal nodes.
    pub depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Left,
    Right,
    Above,
    Below,
}

/// One decision on a root-to-leaf path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Step {
    pub node: NodeId,
    pub branch: Branch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Location {
    pub trapezoid: TrapId,
    pub path_length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error, Serialize)]
pub enum LocateError {
    #[error("query coincides with endpoint {0}")]
    OnVertex(Point),
    #[error("query lies on segment {0}")]
    OnSegment(SegmentId),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("segment id {0} is out of range")]
    UnknownSegment(SegmentId),
    #[error("segment {0} was already inserted")]
    AlreadyInserted(SegmentId),
    #[error("insertion order is not a permutation of the segment ids")]
    NotAPermutation,
    #[error("topology violation while inserting segment {segment}: {detail}")]
    TopologyViolation { segment: SegmentId, detail: String },
    #[error("structure grew past {limit} nodes")]
    SizeLimitExceeded { limit: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InsertReport {
    pub destroyed: usize,
    pub created: usize,
    pub inner_created: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub node_count: usize,
    pub inner_count: usize,
    pub leaf_count: usize,
    pub depth: u32,
    pub registry_size: usize,
}

#[derive(Clone, Copy, Debug)]
enum Nb {
    Ext(Option<TrapId>),
    Upper(usize),
    Lower(usize),
    LeftCap,
    RightCap,
}

struct Piece {
    left_wall: XPoint,
    right_wall: XPoint,
    bottom: Boundary,
    top: Boundary,
    left: (Nb, Nb),
    right: (Nb, Nb),
    left_origin: TrapId,
    right_origin: TrapId,
}

/// Incremental trapezoidal map plus search structure.
#[derive(Clone, Debug)]
pub struct SearchStructure {
    segments: Vec<Segment>,
    nodes: Vec<Node>,
    traps: Vec<Trapezoid>,
    merge: bool,
    order: Vec<SegmentId>,
    inserted: Vec<bool>,
    max_depth: u32,
    leaf_count: usize,
    node_limit: Option<usize>,
}

fn strictly_below(s: &[Segment], w: Point, b: Boundary) -> bool {
    match b {
        Boundary::Ceiling => true,
        Boundary::Floor => false,
        Boundary::Segment(id) => side_of(w, &s[id.index()]) == Side::Below,
    }
}

fn strictly_above(s: &[Segment], w: Point, b: Boundary) -> bool {
    match b {
        Boundary::Floor => true,
        Boundary::Ceiling => false,
        Boundary::Segment(id) => side_of(w, &s[id.index()]) == Side::Above,
    }
}

impl SearchStructure {
    fn empty(segments: Vec<Segment>, merge: bool) -> Self {
        let n = segments.len();
        let plane = Trapezoid {
            left_wall: XPoint::NegInfinity,
            right_wall: XPoint::PosInfinity,
            bottom: Boundary::Floor,
            top: Boundary::Ceiling,
            upper_left: None,
            lower_left: None,
            upper_right: None,
            lower_right: None,
            alive: true,
            birth_iteration: 0,
            death_iteration: None,
            node: NodeId(0),
        };
        SearchStructure {
            segments,
            nodes: vec![Node { kind: NodeKind::Leaf { trapezoid: TrapId(0) }, depth: 0 }],
            traps: vec![plane],
            merge,
            order: Vec::with_capacity(n),
            inserted: vec![false; n],
            max_depth: 0,
            leaf_count: 1,
            node_limit: None,
        }
    }

    fn build_from(
        segments: &[Segment],
        order: &[SegmentId],
        merge: bool,
        node_limit: Option<usize>,
    ) -> Result<Self, BuildError> {
        check_permutation(segments.len(), order)?;
        let mut st = Self::empty(segments.to_vec(), merge);
        st.node_limit = node_limit;
        for &id in order {
            st.insert(id)?;
        }
        Ok(st)
    }

    pub fn merges(&self) -> bool {
        self.merge
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> &Segment {
        &self.segments[id.index()]
    }

    pub fn insertion_order(&self) -> &[SegmentId] {
        &self.order
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn trapezoid(&self, id: TrapId) -> &Trapezoid {
        &self.traps[id.index()]
    }

    /// Every trapezoid ever created, in creation order.
    pub fn registry(&self) -> &[Trapezoid] {
        &self.traps
    }

    pub fn live_trapezoids(&self) -> impl Iterator<Item = (TrapId, &Trapezoid)> {
        self.traps.iter().enumerate().filter(|(_, t)| t.alive).map(|(i, t)| (TrapId(i as u32), t))
    }

    /// Maximum leaf depth, maintained during construction.
    pub fn depth(&self) -> u32 {
        self.max_depth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn stats(&self) -> Stats {
        Stats {
            n: self.order.len(),
            node_count: self.nodes.len(),
            inner_count: self.nodes.len() - self.leaf_count,
            leaf_count: self.leaf_count,
            depth: self.max_depth,
            registry_size: self.traps.len(),
        }
    }

    /// Distinct vertices of the current map: wall points plus the finite feet of their walls.
    pub fn vertex_count(&self) -> usize {
        #[derive(PartialEq, Eq, Hash)]
        enum Corner {
            Endpoint(Point),
            Foot(Point, SegmentId),
        }
        let mut seen = HashSet::new();
        for (_, t) in self.live_trapezoids() {
            for wall in [t.left_wall, t.right_wall] {
                let Some(w) = wall.finite() else { continue };
                seen.insert(Corner::Endpoint(w));
                for b in [t.bottom, t.top] {
                    if let Boundary::Segment(id) = b {
                        if self.segment(id).has_endpoint(w) {
                            seen.insert(Corner::Endpoint(w));
                        } else {
                            seen.insert(Corner::Foot(w, id));
                        }
                    }
                }
            }
        }
        seen.len()
    }

    /// Point location; `path_length` counts the internal nodes visited.
    pub fn locate(&self, q: Point) -> Result<Location, LocateError> {
        let mut len = 0;
        let trapezoid = self.descend(q, |_| len += 1)?;
        Ok(Location { trapezoid, path_length: len })
    }

    /// Point location returning the full decision path.
    pub fn locate_path(&self, q: Point) -> Result<(TrapId, Vec<Step>), LocateError> {
        let mut path = Vec::new();
        let t = self.descend(q, |s| path.push(s))?;
        Ok((t, path))
    }

    fn descend(&self, q: Point, mut visit: impl FnMut(Step)) -> Result<TrapId, LocateError> {
        let mut cur = self.root();
        loop {
            let (branch, next) = match self.nodes[cur.index()].kind {
                NodeKind::Leaf { trapezoid } => return Ok(trapezoid),
                NodeKind::Point { point, left, right } => match lex_compare(q, point) {
                    Ordering::Less => (Branch::Left, left),
                    Ordering::Greater => (Branch::Right, right),
                    Ordering::Equal => return Err(LocateError::OnVertex(point)),
                },
                NodeKind::Segment { segment, above, below } => {
                    match side_of(q, &self.segments[segment.index()]) {
                        Side::Above => (Branch::Above, above),
                        Side::Below => (Branch::Below, below),
                        Side::On => return Err(LocateError::OnSegment(segment)),
                    }
                }
            };
            visit(Step { node: cur, branch });
            cur = next;
        }
    }

    /// Locates the trapezoid entered by `s` immediately to the right of its left endpoint.
    fn locate_start(&self, s: &Segment) -> Result<TrapId, BuildError> {
        let p = s.left;
        let mut cur = self.root();
        loop {
            cur = match self.nodes[cur.index()].kind {
                NodeKind::Leaf { trapezoid } => return Ok(trapezoid),
                NodeKind::Point { point, left, right } => {
                    if lex_compare(p, point) == Ordering::Less {
                        left
                    } else {
                        right
                    }
                }
                NodeKind::Segment { segment, above, below } => {
                    let other = &self.segments[segment.index()];
                    let side = match side_of(p, other) {
                        Side::On if p == other.left => match orient(other.left, other.right, s.right) {
                            Ordering::Greater => Side::Above,
                            Ordering::Less => Side::Below,
                            Ordering::Equal => Side::On,
                        },
                        side => side,
                    };
                    match side {
                        Side::Above => above,
                        Side::Below => below,
                        Side::On => {
                            return Err(BuildError::TopologyViolation {
                                segment: s.id,
                                detail: format!("left endpoint overlaps segment {}", other.id),
                            })
                        }
                    }
                }
            }
        }
    }

    fn push_node(&mut self, kind: NodeKind, depth: u32) -> NodeId {
        self.nodes.push(Node { kind, depth });
        NodeId(self.nodes.len() as u32 - 1)
    }

    fn relink(&mut self, n: TrapId, on_right_of_n: bool, old: TrapId, upper: TrapId, lower: TrapId) {
        let t = &mut self.traps[n.index()];
        let (u, l) = if on_right_of_n {
            (&mut t.upper_right, &mut t.lower_right)
        } else {
            (&mut t.upper_left, &mut t.lower_left)
        };
        if *u == Some(old) {
            *u = Some(upper);
        }
        if *l == Some(old) {
            *l = Some(lower);
        }
    }

    /// Inserts one segment: walk, split, merge (DAG only), relink and grow the search structure.
    pub fn insert(&mut self, id: SegmentId) -> Result<InsertReport, BuildError> {
        let seg = *self.segments.get(id.index()).ok_or(BuildError::UnknownSegment(id))?;
        if self.inserted[id.index()] {
            return Err(BuildError::AlreadyInserted(id));
        }
        let violation = |detail: String| BuildError::TopologyViolation { segment: id, detail };
        let iteration = self.order.len() as u32 + 1;
        let right_end = XPoint::Finite(seg.right);

        // Collect the intersected trapezoids from left to right.
        let mut chain = vec![self.locate_start(&seg)?];
        let mut walls: Vec<Point> = Vec::new();
        loop {
            let t = &self.traps[chain.last().unwrap().index()];
            if t.right_wall >= right_end {
                break;
            }
            let w = t.right_wall.finite().ok_or_else(|| violation("walk ran past +inf".into()))?;
            let next = match side_of(w, &seg) {
                Side::Below => t.upper_right,
                Side::Above => t.lower_right,
                Side::On => return Err(violation(format!("wall point {w} lies on the segment"))),
            }
            .ok_or_else(|| violation(format!("no neighbor across wall {w}")))?;
            let nt = &self.traps[next.index()];
            if !nt.alive || nt.left_wall != t.right_wall {
                return Err(violation(format!("neighbor across wall {w} is not intersected")));
            }
            walls.push(w);
            chain.push(next);
        }
        let k = chain.len();
        let first = self.traps[chain[0].index()].clone();
        let last = self.traps[chain[k - 1].index()].clone();
        let left_cap = first.left_wall < XPoint::Finite(seg.left);
        let right_cap = right_end < last.right_wall;
        // true when the wall between chain[j] and chain[j+1] starts above the new segment
        let wall_above: Vec<bool> = walls.iter().map(|&w| side_of(w, &seg) == Side::Above).collect();

        let segs = &self.segments;
        let sb = Boundary::Segment(id);
        let mut upper = Vec::with_capacity(k);
        let mut lower = Vec::with_capacity(k);
        for (j, &tid) in chain.iter().enumerate() {
            let t = &self.traps[tid.index()];
            let lw = if j == 0 { XPoint::Finite(seg.left) } else { t.left_wall };
            let rw = if j == k - 1 { right_end } else { t.right_wall };

            let up_left = if j == 0 {
                if left_cap {
                    (Nb::LeftCap, Nb::LeftCap)
                } else if strictly_below(segs, seg.left, t.top) {
                    (Nb::Ext(t.upper_left), Nb::Ext(t.upper_left))
                } else {
                    (Nb::Ext(None), Nb::Ext(None))
                }
            } else if wall_above[j - 1] && strictly_below(segs, walls[j - 1], t.top) {
                (Nb::Ext(t.upper_left), Nb::Upper(j - 1))
            } else {
                (Nb::Upper(j - 1), Nb::Upper(j - 1))
            };
            let up_right = if j == k - 1 {
                if right_cap {
                    (Nb::RightCap, Nb::RightCap)
                } else if strictly_below(segs, seg.right, t.top) {
                    (Nb::Ext(t.upper_right), Nb::Ext(t.upper_right))
                } else {
                    (Nb::Ext(None), Nb::Ext(None))
                }
            } else if wall_above[j] && strictly_below(segs, walls[j], t.top) {
                (Nb::Ext(t.upper_right), Nb::Upper(j + 1))
            } else {
                (Nb::Upper(j + 1), Nb::Upper(j + 1))
            };
            let low_left = if j == 0 {
                if left_cap {
                    (Nb::LeftCap, Nb::LeftCap)
                } else if strictly_above(segs, seg.left, t.bottom) {
                    (Nb::Ext(t.lower_left), Nb::Ext(t.lower_left))
                } else {
                    (Nb::Ext(None), Nb::Ext(None))
                }
            } else if !wall_above[j - 1] && strictly_above(segs, walls[j - 1], t.bottom) {
                (Nb::Lower(j - 1), Nb::Ext(t.lower_left))
            } else {
                (Nb::Lower(j - 1), Nb::Lower(j - 1))
            };
            let low_right = if j == k - 1 {
                if right_cap {
                    (Nb::RightCap, Nb::RightCap)
                } else if strictly_above(segs, seg.right, t.bottom) {
                    (Nb::Ext(t.lower_right), Nb::Ext(t.lower_right))
                } else {
                    (Nb::Ext(None), Nb::Ext(None))
                }
            } else if !wall_above[j] && strictly_above(segs, walls[j], t.bottom) {
                (Nb::Lower(j + 1), Nb::Ext(t.lower_right))
            } else {
                (Nb::Lower(j + 1), Nb::Lower(j + 1))
            };
            upper.push(Piece {
                left_wall: lw,
                right_wall: rw,
                bottom: sb,
                top: t.top,
                left: up_left,
                right: up_right,
                left_origin: tid,
                right_origin: tid,
            });
            lower.push(Piece {
                left_wall: lw,
                right_wall: rw,
                bottom: t.bottom,
                top: sb,
                left: low_left,
                right: low_right,
                left_origin: tid,
                right_origin: tid,
            });
        }

        // Group consecutive pieces whose separating wall was cut off by the new segment.
        let group = |pieces: &[Piece], merge_here: &dyn Fn(usize) -> bool| -> Vec<usize> {
            let mut g = vec![0usize; pieces.len()];
            for j in 1..pieces.len() {
                g[j] = if merge_here(j - 1) { g[j - 1] } else { g[j - 1] + 1 };
            }
            g
        };
        let merge = self.merge;
        let upper_group = group(&upper, &|j| merge && !wall_above[j] && upper[j].top == upper[j + 1].top);
        let lower_group =
            group(&lower, &|j| merge && wall_above[j] && lower[j].bottom == lower[j + 1].bottom);
        let n_upper = upper_group[k - 1] + 1;
        let n_lower = lower_group[k - 1] + 1;

        // Allocate trapezoid ids: left cap, upper groups, lower groups, right cap.
        let base = self.traps.len() as u32;
        let left_cap_id = left_cap.then_some(TrapId(base));
        let upper_base = base + left_cap as u32;
        let lower_base = upper_base + n_upper as u32;
        let right_cap_id = right_cap.then_some(TrapId(lower_base + n_lower as u32));
        let upper_id = |j: usize| TrapId(upper_base + upper_group[j] as u32);
        let lower_id = |j: usize| TrapId(lower_base + lower_group[j] as u32);
        let resolve = |nb: Nb| -> Option<TrapId> {
            match nb {
                Nb::Ext(t) => t,
                Nb::Upper(j) => Some(upper_id(j)),
                Nb::Lower(j) => Some(lower_id(j)),
                Nb::LeftCap => left_cap_id,
                Nb::RightCap => right_cap_id,
            }
        };
        let merged = |pieces: &[Piece], groups: &[usize]| -> Vec<Piece> {
            let mut out: Vec<Piece> = Vec::new();
            for (j, p) in pieces.iter().enumerate() {
                if j > 0 && groups[j] == groups[j - 1] {
                    let m = out.last_mut().unwrap();
                    m.right_wall = p.right_wall;
                    m.right = p.right;
                    m.right_origin = p.right_origin;
                } else {
                    out.push(Piece { ..*p });
                }
            }
            out
        };
        let upper_groups = merged(&upper, &upper_group);
        let lower_groups = merged(&lower, &lower_group);

        let mut created: Vec<(Trapezoid, TrapId, TrapId)> = Vec::new();
        let make = |p: &Piece| Trapezoid {
            left_wall: p.left_wall,
            right_wall: p.right_wall,
            bottom: p.bottom,
            top: p.top,
            upper_left: resolve(p.left.0),
            lower_left: resolve(p.left.1),
            upper_right: resolve(p.right.0),
            lower_right: resolve(p.right.1),
            alive: true,
            birth_iteration: iteration,
            death_iteration: None,
            node: NodeId(u32::MAX),
        };
        if left_cap {
            created.push((
                Trapezoid {
                    left_wall: first.left_wall,
                    right_wall: XPoint::Finite(seg.left),
                    bottom: first.bottom,
                    top: first.top,
                    upper_left: first.upper_left,
                    lower_left: first.lower_left,
                    upper_right: Some(upper_id(0)),
                    lower_right: Some(lower_id(0)),
                    alive: true,
                    birth_iteration: iteration,
                    death_iteration: None,
                    node: NodeId(u32::MAX),
                },
                chain[0],
                chain[0],
            ));
        }
        for p in upper_groups.iter().chain(lower_groups.iter()) {
            created.push((make(p), p.left_origin, p.right_origin));
        }
        if right_cap {
            created.push((
                Trapezoid {
                    left_wall: right_end,
                    right_wall: last.right_wall,
                    bottom: last.bottom,
                    top: last.top,
                    upper_left: Some(upper_id(k - 1)),
                    lower_left: Some(lower_id(k - 1)),
                    upper_right: last.upper_right,
                    lower_right: last.lower_right,
                    alive: true,
                    birth_iteration: iteration,
                    death_iteration: None,
                    node: NodeId(u32::MAX),
                },
                chain[k - 1],
                chain[k - 1],
            ));
        }
        let n_created = created.len();
        let nodes_before = self.nodes.len();

        // Retire the intersected trapezoids and register the new ones.
        for &tid in &chain {
            let t = &mut self.traps[tid.index()];
            t.alive = false;
            t.death_iteration = Some(iteration);
        }
        let mut ext_links = Vec::new();
        for (t, lo, ro) in created {
            let nid = TrapId(self.traps.len() as u32);
            ext_links.push((nid, lo, ro));
            self.traps.push(t);
        }

        // Point outside neighbors at their replacements. Upper pieces come first so that a
        // single outside neighbor spanning both sides of an endpoint gets split correctly.
        let u0 = upper_id(0);
        let d0 = lower_id(0);
        let uk = upper_id(k - 1);
        let dk = lower_id(k - 1);
        for (nid, lo, ro) in ext_links {
            let t = self.traps[nid.index()].clone();
            let internal = |x: Option<TrapId>| x.is_some_and(|x| x.0 >= base);
            for n in [t.upper_left, t.lower_left].into_iter().flatten().collect::<HashSet<_>>() {
                if internal(Some(n)) {
                    continue;
                }
                let lower_target = if nid == u0 && !left_cap && self.traps[d0.index()].lower_left == Some(n) {
                    d0
                } else {
                    nid
                };
                self.relink(n, true, lo, nid, lower_target);
            }
            for n in [t.upper_right, t.lower_right].into_iter().flatten().collect::<HashSet<_>>() {
                if internal(Some(n)) {
                    continue;
                }
                let lower_target = if nid == uk && !right_cap && self.traps[dk.index()].lower_right == Some(n) {
                    dk
                } else {
                    nid
                };
                self.relink(n, false, ro, nid, lower_target);
            }
        }

        // Leaves for the new pieces; depths of grouped leaves are fixed below.
        let leaf_of = |st: &mut Self, t: TrapId, depth: u32| {
            let node = st.push_node(NodeKind::Leaf { trapezoid: t }, depth);
            st.traps[t.index()].node = node;
            node
        };
        let upper_leaves: Vec<NodeId> =
            (0..n_upper).map(|g| leaf_of(self, TrapId(upper_base + g as u32), 0)).collect();
        let lower_leaves: Vec<NodeId> =
            (0..n_lower).map(|g| leaf_of(self, TrapId(lower_base + g as u32), 0)).collect();
        let mut upper_depth = vec![0u32; n_upper];
        let mut lower_depth = vec![0u32; n_lower];

        for (j, &tid) in chain.iter().enumerate() {
            let host = self.traps[tid.index()].node;
            let d = self.nodes[host.index()].depth;
            let seg_kind = NodeKind::Segment {
                segment: id,
                above: upper_leaves[upper_group[j]],
                below: lower_leaves[lower_group[j]],
            };
            let with_left = j == 0 && left_cap;
            let with_right = j == k - 1 && right_cap;
            let seg_depth = match (with_left, with_right) {
                (false, false) => {
                    self.nodes[host.index()].kind = seg_kind;
                    d
                }
                (true, false) => {
                    let l = leaf_of(self, left_cap_id.unwrap(), d + 1);
                    let s = self.push_node(seg_kind, d + 1);
                    self.nodes[host.index()].kind = NodeKind::Point { point: seg.left, left: l, right: s };
                    d + 1
                }
                (false, true) => {
                    let s = self.push_node(seg_kind, d + 1);
                    let r = leaf_of(self, right_cap_id.unwrap(), d + 1);
                    self.nodes[host.index()].kind = NodeKind::Point { point: seg.right, left: s, right: r };
                    d + 1
                }
                (true, true) => {
                    let l = leaf_of(self, left_cap_id.unwrap(), d + 1);
                    let s = self.push_node(seg_kind, d + 2);
                    let r = leaf_of(self, right_cap_id.unwrap(), d + 2);
                    let q = self.push_node(NodeKind::Point { point: seg.right, left: s, right: r }, d + 1);
                    self.nodes[host.index()].kind = NodeKind::Point { point: seg.left, left: l, right: q };
                    d + 2
                }
            };
            upper_depth[upper_group[j]] = upper_depth[upper_group[j]].max(seg_depth + 1);
            lower_depth[lower_group[j]] = lower_depth[lower_group[j]].max(seg_depth + 1);
        }
        for (leaf, d) in upper_leaves.iter().zip(&upper_depth).chain(lower_leaves.iter().zip(&lower_depth)) {
            self.nodes[leaf.index()].depth = *d;
        }
        for node in &self.nodes[nodes_before..] {
            if let NodeKind::Leaf { .. } = node.kind {
                self.max_depth = self.max_depth.max(node.depth);
            }
        }

        self.leaf_count = self.leaf_count + n_created - k;
        self.inserted[id.index()] = true;
        self.order.push(id);
        let report = InsertReport {
            destroyed: k,
            created: n_created,
            // k leaves turned into inner nodes, plus the fresh inner nodes
            inner_created: k + (self.nodes.len() - nodes_before) - n_created,
        };
        if let Some(limit) = self.node_limit {
            if self.nodes.len() > limit {
                return Err(BuildError::SizeLimitExceeded { limit });
            }
        }
        Ok(report)
    }
}

fn check_permutation(n: usize, order: &[SegmentId]) -> Result<(), BuildError> {
    if order.len() != n {
        return Err(BuildError::NotAPermutation);
    }
    let mut seen = vec![false; n];
    for id in order {
        match seen.get_mut(id.index()) {
            Some(s) if !*s => *s = true,
            _ => return Err(BuildError::NotAPermutation),
        }
    }
    Ok(())
}

/// The history DAG: construction with merges.
#[derive(Clone, Debug)]
pub struct HistoryDag(SearchStructure);

impl HistoryDag {
    /// A DAG over `segments` with nothing inserted yet; feed it with [`HistoryDag::insert`].
    pub fn new(segments: Vec<Segment>) -> Self {
        HistoryDag(SearchStructure::empty(segments, true))
    }

    pub fn build(segments: &[Segment], order: &[SegmentId]) -> Result<Self, BuildError> {
        SearchStructure::build_from(segments, order, true, None).map(HistoryDag)
    }

    /// Like [`HistoryDag::build`], failing as soon as the arena exceeds `node_limit` nodes.
    pub fn build_with_limit(
        segments: &[Segment],
        order: &[SegmentId],
        node_limit: usize,
    ) -> Result<Self, BuildError> {
        SearchStructure::build_from(segments, order, true, Some(node_limit)).map(HistoryDag)
    }

    pub fn insert(&mut self, id: SegmentId) -> Result<InsertReport, BuildError> {
        self.0.insert(id)
    }

    pub fn structure(&self) -> &SearchStructure {
        &self.0
    }
}

impl Deref for HistoryDag {
    type Target = SearchStructure;
    fn deref(&self) -> &SearchStructure {
        &self.0
    }
}

pub(crate) fn build_tree(segments: &[Segment], order: &[SegmentId]) -> Result<SearchStructure, BuildError> {
    SearchStructure::build_from(segments, order, false, None)
}

pub(crate) fn empty_tree(segments: Vec<Segment>) -> SearchStructure {
    SearchStructure::empty(segments, false)
}

/// Identity order `0..n`.
pub fn identity_order(n: usize) -> Vec<SegmentId> {
    (0..n as u32).map(SegmentId).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: u32, a: (i64, i64), b: (i64, i64)) -> Segment {
        Segment::new(id, Point::new(a.0, a.1), Point::new(b.0, b.1))
    }

    #[test]
    fn empty_map() {
        let dag = HistoryDag::build(&[], &[]).unwrap();
        let st = dag.stats();
        assert_eq!((st.node_count, st.leaf_count, st.depth), (1, 1, 0));
        assert_eq!(dag.locate(Point::new(3, 4)).unwrap(), Location { trapezoid: TrapId(0), path_length: 0 });
    }

    #[test]
    fn single_segment() {
        let s = [seg(0, (0, 0), (10, 0))];
        let dag = HistoryDag::build(&s, &identity_order(1)).unwrap();
        let st = dag.stats();
        assert_eq!(st.leaf_count, 4);
        assert_eq!(st.inner_count, 3);
        assert_eq!(st.depth, 3);
        assert_eq!(st.registry_size, 5);
        let left = dag.locate(Point::new(-5, 0)).unwrap();
        assert_eq!(left.path_length, 1);
        let t = dag.trapezoid(left.trapezoid);
        assert_eq!((t.bottom, t.top), (Boundary::Floor, Boundary::Ceiling));
        // the left trapezoid touches only the two pieces along the segment
        assert_ne!(t.upper_right, t.lower_right);
        assert_eq!(t.upper_left, None);
        assert_eq!(dag.locate(Point::new(5, 1)).unwrap().path_length, 3);
        assert_eq!(dag.locate(Point::new(0, 0)), Err(LocateError::OnVertex(Point::new(0, 0))));
        assert_eq!(dag.locate(Point::new(4, 0)), Err(LocateError::OnSegment(SegmentId(0))));
    }

    #[test]
    fn segment_inside_one_trapezoid_adds_three_leaves() {
        let s = [seg(0, (0, 0), (10, 0)), seg(1, (2, 5), (6, 5))];
        let mut dag = HistoryDag::new(s.to_vec());
        dag.insert(SegmentId(0)).unwrap();
        let before = dag.leaf_count();
        let r = dag.insert(SegmentId(1)).unwrap();
        assert_eq!(dag.leaf_count(), before + 3);
        assert_eq!(r.destroyed, 1);
        assert_eq!(r.created, 4);
        assert_eq!(r.inner_created, r.created - 1);
    }

    #[test]
    fn rejects_bad_orders() {
        let s = [seg(0, (0, 0), (1, 0))];
        assert_eq!(HistoryDag::build(&s, &[]).unwrap_err(), BuildError::NotAPermutation);
        let mut dag = HistoryDag::new(s.to_vec());
        dag.insert(SegmentId(0)).unwrap();
        assert_eq!(dag.insert(SegmentId(0)), Err(BuildError::AlreadyInserted(SegmentId(0))));
        assert_eq!(dag.insert(SegmentId(7)), Err(BuildError::UnknownSegment(SegmentId(7))));
    }

    #[test]
    fn overlapping_input_is_a_topology_violation() {
        let s = [seg(0, (0, 0), (10, 0)), seg(1, (0, 0), (5, 0))];
        let err = HistoryDag::build(&s, &identity_order(2)).unwrap_err();
        assert!(matches!(err, BuildError::TopologyViolation { .. }));
    }

    #[test]
    fn size_limit_aborts() {
        let s = [seg(0, (0, 0), (10, 0)), seg(1, (2, 5), (6, 5))];
        let err = HistoryDag::build_with_limit(&s, &identity_order(2), 8).unwrap_err();
        assert_eq!(err, BuildError::SizeLimitExceeded { limit: 8 });
    }

    #[test]
    fn shared_endpoints_and_vertical_segments() {
        let s = [
            seg(0, (0, 0), (4, 0)),
            seg(1, (4, 0), (8, 3)),
            seg(2, (4, 0), (4, 6)),
            seg(3, (0, 0), (0, -5)),
            seg(4, (4, 6), (9, 6)),
        ];
        for order in [[0, 1, 2, 3, 4], [4, 3, 2, 1, 0], [2, 0, 4, 1, 3]] {
            let order: Vec<SegmentId> = order.iter().map(|&i| SegmentId(i)).collect();
            let dag = HistoryDag::build(&s, &order).unwrap();
            assert!(dag.leaf_count() <= 3 * 5 + 1);
            // covertical queries above and below the vertical segment at x = 4
            let a = dag.trapezoid(dag.locate(Point::new(4, 7)).unwrap().trapezoid);
            assert_eq!(a.left_wall, XPoint::Finite(Point::new(4, 6)));
            assert_eq!(a.right_wall, XPoint::Finite(Point::new(9, 6)));
            assert_eq!(a.bottom, Boundary::Segment(SegmentId(4)));
            let b = dag.trapezoid(dag.locate(Point::new(4, -1)).unwrap().trapezoid);
            assert_eq!(b.left_wall, XPoint::Finite(Point::new(0, 0)));
            assert_eq!(b.right_wall, XPoint::Finite(Point::new(4, 0)));
            assert_eq!((b.bottom, b.top), (Boundary::Floor, Boundary::Segment(SegmentId(0))));
            assert_eq!(dag.locate(Point::new(4, 3)), Err(LocateError::OnSegment(SegmentId(2))));
        }
    }
}
