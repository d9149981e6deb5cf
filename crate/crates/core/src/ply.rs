//! Ply of the trapezoids created during construction.
//!
//! Every query path visits at most three nodes per trapezoid containing the
//! query, so three times the ply of the registry bounds the longest query path.
//! Replacing each segment by its rank in a vertical total order turns the
//! trapezoids into axis-parallel rectangles with the same overlap pattern, and
//! the ply of rectangles falls out of one sweep over a segment tree.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::dag::{Boundary, SearchStructure};
use crate::geometry::{compare_over_overlap, lex_compare, Point, Segment, SegmentId, XPoint};
use crate::verify::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlyError {
    #[error("vertical order of the segments contains a cycle")]
    Cycle,
}

/// Rank of every segment in a vertical total order; Floor is 0 and Ceiling is n + 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankMap {
    ranks: Vec<u32>,
    order: Vec<SegmentId>,
}

impl RankMap {
    pub fn new(segments: &[Segment]) -> Result<Self, PlyError> {
        let order = compute_total_order(segments)?;
        Ok(Self::from_order(order))
    }

    /// Builds the map from an order listed bottom to top.
    pub fn from_order(order: Vec<SegmentId>) -> Self {
        let mut ranks = vec![0; order.len()];
        for (i, id) in order.iter().enumerate() {
            ranks[id.index()] = i as u32 + 1;
        }
        RankMap { ranks, order }
    }

    pub fn rank(&self, id: SegmentId) -> u32 {
        self.ranks[id.index()]
    }

    pub fn boundary_rank(&self, b: Boundary) -> u32 {
        match b {
            Boundary::Floor => 0,
            Boundary::Ceiling => self.ranks.len() as u32 + 1,
            Boundary::Segment(id) => self.rank(id),
        }
    }

    pub fn order(&self) -> &[SegmentId] {
        &self.order
    }
}

#[derive(Clone, Copy, Debug)]
struct Status(Segment);

impl PartialEq for Status {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Status {}

impl PartialOrd for Status {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Status {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0.id == other.0.id {
            return Ordering::Equal;
        }
        compare_over_overlap(&self.0, &other.0).unwrap_or_else(|| self.0.id.cmp(&other.0.id))
    }
}

/// Orders the segments from bottom to top.
///
/// A sweep collects every pair that is ever vertically adjacent; the order is
/// then a topological sort of those pairs that always emits the available
/// segment with the leftmost left endpoint.
pub fn compute_total_order(segments: &[Segment]) -> Result<Vec<SegmentId>, PlyError> {
    let n = segments.len();
    let mut events: Vec<(Point, bool, usize)> = Vec::with_capacity(2 * n);
    for (i, s) in segments.iter().enumerate() {
        // removals sort before insertions at the same point
        events.push((s.left, true, i));
        events.push((s.right, false, i));
    }
    events.sort_by(|a, b| lex_compare(a.0, b.0).then(a.1.cmp(&b.1)));

    let mut status: BTreeSet<Status> = BTreeSet::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &(_, insert, i) in &events {
        let key = Status(segments[i]);
        let below = status.range(..key).next_back().map(|s| s.0.id.index());
        let above = status.range(key..).find(|s| s.0.id.index() != i).map(|s| s.0.id.index());
        if insert {
            below.into_iter().for_each(|b| edges.push((b, i)));
            above.into_iter().for_each(|a| edges.push((i, a)));
            status.insert(key);
        } else {
            status.remove(&key);
            if let (Some(b), Some(a)) = (below, above) {
                edges.push((b, a));
            }
        }
    }
    topological_order(segments, &edges)
}

/// Kahn's algorithm over `below -> above` edges, breaking ties by left endpoint then id.
pub fn topological_order(segments: &[Segment], edges: &[(usize, usize)]) -> Result<Vec<SegmentId>, PlyError> {
    let n = segments.len();
    let mut out_edges = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for &(b, a) in edges {
        out_edges[b].push(a);
        indegree[a] += 1;
    }
    let key = |i: usize| Reverse((segments[i].left.x, segments[i].left.y, segments[i].id));
    let mut heap: BinaryHeap<_> = (0..n).filter(|&i| indegree[i] == 0).map(|i| (key(i), i)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, i)) = heap.pop() {
        order.push(segments[i].id);
        for &a in &out_edges[i] {
            indegree[a] -= 1;
            if indegree[a] == 0 {
                heap.push((key(a), a));
            }
        }
    }
    if order.len() < n {
        return Err(PlyError::Cycle);
    }
    Ok(order)
}

/// Axis-parallel rectangle with per-side closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x_lo: XPoint,
    pub x_hi: XPoint,
    pub y_lo: i64,
    pub y_hi: i64,
    pub closed_left: bool,
    pub closed_right: bool,
    pub closed_bottom: bool,
    pub closed_top: bool,
}

impl Rect {
    pub fn open(x_lo: XPoint, x_hi: XPoint, y_lo: i64, y_hi: i64) -> Self {
        Rect { x_lo, x_hi, y_lo, y_hi, closed_left: false, closed_right: false, closed_bottom: false, closed_top: false }
    }

    pub fn closed(x_lo: XPoint, x_hi: XPoint, y_lo: i64, y_hi: i64) -> Self {
        Rect { x_lo, x_hi, y_lo, y_hi, closed_left: true, closed_right: true, closed_bottom: true, closed_top: true }
    }

    fn spans_y(&self) -> bool {
        self.y_lo < self.y_hi || (self.y_lo == self.y_hi && self.closed_bottom && self.closed_top)
    }
}

/// One open rectangle per registry trapezoid, in rank space.
pub fn reduce(st: &SearchStructure, ranks: &RankMap) -> Vec<Rect> {
    st.registry()
        .iter()
        .filter(|t| t.left_wall < t.right_wall)
        .map(|t| {
            Rect::open(
                t.left_wall,
                t.right_wall,
                ranks.boundary_rank(t.bottom) as i64,
                ranks.boundary_rank(t.top) as i64,
            )
        })
        .collect()
}

/// Range-add, global-max segment tree over elementary x-intervals.
struct CoverageTree {
    size: usize,
    add: Vec<i64>,
    max: Vec<i64>,
}

impl CoverageTree {
    fn new(leaves: usize) -> Self {
        let size = leaves.max(1);
        CoverageTree { size, add: vec![0; 4 * size], max: vec![0; 4 * size] }
    }

    fn update(&mut self, lo: usize, hi: usize, d: i64) {
        self.update_at(1, 0, self.size - 1, lo, hi, d);
    }

    fn update_at(&mut self, node: usize, l: usize, r: usize, lo: usize, hi: usize, d: i64) {
        if hi < l || r < lo {
            return;
        }
        if lo <= l && r <= hi {
            self.add[node] += d;
            self.max[node] += d;
            return;
        }
        let m = (l + r) / 2;
        self.update_at(2 * node, l, m, lo, hi, d);
        self.update_at(2 * node + 1, m + 1, r, lo, hi, d);
        self.max[node] = self.add[node] + self.max[2 * node].max(self.max[2 * node + 1]);
    }

    fn global_max(&self) -> i64 {
        self.max[1]
    }
}

/// Maximum number of rectangles sharing a point.
pub fn max_ply(rects: &[Rect]) -> usize {
    let mut xs: Vec<XPoint> = rects.iter().flat_map(|r| [r.x_lo, r.x_hi]).collect();
    xs.sort();
    xs.dedup();
    let idx = |x: XPoint| xs.binary_search(&x).unwrap();
    // (y, group, leaf lo, leaf hi, delta); groups order the events sharing one y
    let mut events: Vec<(Reverse<i64>, u8, usize, usize, i64)> = Vec::new();
    for r in rects {
        if !r.spans_y() {
            continue;
        }
        let lo = if r.closed_left { 2 * idx(r.x_lo) } else { 2 * idx(r.x_lo) + 1 };
        let hi_point = 2 * idx(r.x_hi);
        let hi = if r.closed_right {
            hi_point
        } else if hi_point == 0 {
            continue;
        } else {
            hi_point - 1
        };
        if lo > hi {
            continue;
        }
        let open_group = if r.closed_top { 1 } else { 3 };
        let close_group = if r.closed_bottom { 2 } else { 0 };
        events.push((Reverse(r.y_hi), open_group, lo, hi, 1));
        events.push((Reverse(r.y_lo), close_group, lo, hi, -1));
    }
    events.sort();
    let mut tree = CoverageTree::new(2 * xs.len());
    let mut best = 0;
    for (_, _, lo, hi, d) in events {
        tree.update(lo, hi, d);
        best = best.max(tree.global_max());
    }
    best as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PlyReport {
    pub ply: usize,
    pub rectangles: usize,
}

/// Ply of all trapezoids ever created by `st`.
pub fn registry_ply(st: &SearchStructure) -> Result<PlyReport, PlyError> {
    let ranks = RankMap::new(st.segments())?;
    let rects = reduce(st, &ranks);
    Ok(PlyReport { ply: max_ply(&rects), rectangles: rects.len() })
}

/// PASS iff three times the registry ply is at most `bound`.
pub fn verify_by_ply(st: &SearchStructure, bound: usize) -> Result<Verdict, PlyError> {
    let value = 3 * registry_ply(st)?.ply;
    Ok(Verdict { pass: value <= bound, value, bound })
}
