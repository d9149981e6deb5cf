//! Brute-force references used by the test suites.
//!
//! Everything here is deliberately slow and direct: linear scans, exhaustive
//! slab decompositions and explicit structural walks.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trapmap::geometry::{compare_over_overlap, compatible, lex_compare, side_of, Side};
use trapmap::ply::Rect;
use trapmap::{
    Boundary, HistoryDag, NodeKind, Point, SearchStructure, SearchTree, Segment, SegmentId, TrapId, Trapezoid, XPoint,
};

/// Whether `q` lies in the open trapezoid `t`.
pub fn contains_open(st: &SearchStructure, t: &Trapezoid, q: Point) -> bool {
    let x = XPoint::Finite(q);
    if !(t.left_wall < x && x < t.right_wall) {
        return false;
    }
    let above_bottom = match t.bottom {
        Boundary::Floor => true,
        Boundary::Ceiling => false,
        Boundary::Segment(id) => side_of(q, st.segment(id)) == Side::Above,
    };
    let below_top = match t.top {
        Boundary::Ceiling => true,
        Boundary::Floor => false,
        Boundary::Segment(id) => side_of(q, st.segment(id)) == Side::Below,
    };
    above_bottom && below_top
}

/// All live trapezoids containing `q`.
pub fn linear_scan_locate(st: &SearchStructure, q: Point) -> Vec<TrapId> {
    st.live_trapezoids().filter(|(_, t)| contains_open(st, t, q)).map(|(id, _)| id).collect()
}

/// Whether `q` touches any segment of `segments`.
pub fn on_boundary(segments: &[Segment], q: Point) -> bool {
    segments.iter().any(|s| {
        s.has_endpoint(q) || (s.spans(q) && side_of(q, s) == Side::On)
    })
}

pub fn scale(segments: &[Segment], m: i64) -> Vec<Segment> {
    segments
        .iter()
        .map(|s| {
            Segment::new(s.id.0, Point::new(s.left.x * m, s.left.y * m), Point::new(s.right.x * m, s.right.y * m))
        })
        .collect()
}

/// Applies `(x, y) -> (m·x + y, y)` with `m` larger than twice every |y|.
///
/// The map has positive determinant, so every orientation keeps its sign, and
/// it sends lexicographic order to plain x order. The image has no vertical
/// segments and no covertical endpoints but builds the same structure.
pub fn shear(segments: &[Segment]) -> Vec<Segment> {
    let ymax = segments.iter().flat_map(|s| [s.left.y.abs(), s.right.y.abs()]).max().unwrap_or(0);
    let m = 2 * ymax + 1;
    let f = |p: Point| Point::new(m * p.x + p.y, p.y);
    segments.iter().map(|s| Segment::new(s.id.0, f(s.left), f(s.right))).collect()
}

/// y of the supporting line of `s` at `x`, as numerator over positive denominator.
fn y_at(s: &Segment, x: i64) -> (i128, i128) {
    let dx = (s.right.x - s.left.x) as i128;
    let dy = (s.right.y - s.left.y) as i128;
    (s.left.y as i128 * dx + dy * (x - s.left.x) as i128, dx)
}

fn floor_div(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

/// An integer point strictly inside trapezoid `t`, if one exists near the middle.
///
/// Intended for instances scaled up by a large factor, where every trapezoid of
/// positive width has room for lattice points.
pub fn interior_point(st: &SearchStructure, t: &Trapezoid) -> Option<Point> {
    let pad = 1 << 12;
    let (x, mut lo, mut hi): (i64, Option<i128>, Option<i128>) = match (t.left_wall, t.right_wall) {
        (XPoint::Finite(a), XPoint::Finite(b)) if a.x == b.x => (a.x, Some(a.y as i128), Some(b.y as i128)),
        (XPoint::Finite(a), XPoint::Finite(b)) => ((a.x + b.x).div_euclid(2), None, None),
        (XPoint::Finite(a), _) => (a.x + pad, None, None),
        (_, XPoint::Finite(b)) => (b.x - pad, None, None),
        _ => (0, None, None),
    };
    let wall_x = |w: XPoint| w.finite().map(|p| p.x);
    if wall_x(t.left_wall) == Some(x) && wall_x(t.right_wall) != Some(x) {
        return None;
    }
    // exclusive integer bounds from the boundaries at x
    if let Boundary::Segment(id) = t.bottom {
        let s = st.segment(id);
        if s.left.x == s.right.x {
            return None;
        }
        let (num, den) = y_at(s, x);
        let b = floor_div(num, den);
        lo = Some(lo.map_or(b, |l| l.max(b)));
    }
    if let Boundary::Segment(id) = t.top {
        let s = st.segment(id);
        if s.left.x == s.right.x {
            return None;
        }
        let (num, den) = y_at(s, x);
        let c = -floor_div(-num, den);
        hi = Some(hi.map_or(c, |h| h.min(c)));
    }
    let y = match (lo, hi) {
        (Some(l), Some(h)) => {
            if l + 1 >= h {
                return None;
            }
            (l + h).div_euclid(2)
        }
        (Some(l), None) => l + pad as i128,
        (None, Some(h)) => h - pad as i128,
        (None, None) => 0,
    };
    let q = Point::new(x, y as i64);
    contains_open(st, t, q).then_some(q)
}

/// Longest DAG path over one interior point of every tree leaf, on the instance scaled by 2^12.
///
/// Slivers without lattice points are skipped, so instances with covertical
/// endpoints should be passed through [`shear`] first.
pub fn witnessed_max(segments: &[Segment], order: &[SegmentId]) -> usize {
    let s = scale(segments, 1 << 12);
    let dag = HistoryDag::build(&s, order).unwrap();
    let tree = SearchTree::build(&s, order).unwrap();
    tree.live_trapezoids()
        .filter_map(|(_, t)| interior_point(&tree, t))
        .map(|q| dag.locate(q).unwrap().path_length)
        .max()
        .unwrap_or(0)
}

/// Checks that every neighbor pointer is answered by a pointer back.
pub fn neighbor_symmetry(st: &SearchStructure) -> Result<(), String> {
    for (id, t) in st.live_trapezoids() {
        for n in [t.upper_right, t.lower_right].into_iter().flatten() {
            let o = st.trapezoid(n);
            if !o.alive {
                return Err(format!("{id:?} points right to dead {n:?}"));
            }
            if o.upper_left != Some(id) && o.lower_left != Some(id) {
                return Err(format!("{id:?} -> {n:?} has no back pointer"));
            }
            if o.left_wall != t.right_wall {
                return Err(format!("{id:?} -> {n:?} walls disagree"));
            }
        }
        for n in [t.upper_left, t.lower_left].into_iter().flatten() {
            let o = st.trapezoid(n);
            if !o.alive {
                return Err(format!("{id:?} points left to dead {n:?}"));
            }
            if o.upper_right != Some(id) && o.lower_right != Some(id) {
                return Err(format!("{id:?} <- {n:?} has no back pointer"));
            }
        }
    }
    Ok(())
}

/// Checks that live trapezoids and leaves correspond one to one.
pub fn leaf_bijection(st: &SearchStructure) -> Result<(), String> {
    let mut seen = HashMap::new();
    for (i, node) in st.nodes().iter().enumerate() {
        if let NodeKind::Leaf { trapezoid } = node.kind {
            if seen.insert(trapezoid, i).is_some() {
                return Err(format!("{trapezoid:?} has two leaves"));
            }
            let t = st.trapezoid(trapezoid);
            if !t.alive || t.node.index() != i {
                return Err(format!("leaf {i} and {trapezoid:?} disagree"));
            }
        }
    }
    let live = st.live_trapezoids().count();
    if live != seen.len() {
        return Err(format!("{live} live trapezoids but {} leaves", seen.len()));
    }
    Ok(())
}

/// Longest root-to-node path of every node, recomputed from scratch.
pub fn recomputed_depths(st: &SearchStructure) -> Vec<Option<u32>> {
    let n = st.node_count();
    let mut depth: Vec<Option<u32>> = vec![None; n];
    let mut indegree = vec![0usize; n];
    let children = |k: NodeKind| -> Vec<usize> {
        match k {
            NodeKind::Point { left, right, .. } => vec![left.index(), right.index()],
            NodeKind::Segment { above, below, .. } => vec![above.index(), below.index()],
            NodeKind::Leaf { .. } => vec![],
        }
    };
    for node in st.nodes() {
        for c in children(node.kind) {
            indegree[c] += 1;
        }
    }
    let mut stack = vec![st.root().index()];
    depth[st.root().index()] = Some(0);
    while let Some(u) = stack.pop() {
        let du = depth[u].unwrap();
        for c in children(st.nodes()[u].kind) {
            depth[c] = Some(depth[c].map_or(du + 1, |d| d.max(du + 1)));
            indegree[c] -= 1;
            if indegree[c] == 0 {
                stack.push(c);
            }
        }
    }
    depth
}

/// Vertical total order from all pairwise comparisons.
pub fn pairwise_total_order(segments: &[Segment]) -> Vec<SegmentId> {
    let mut edges = Vec::new();
    for (i, a) in segments.iter().enumerate() {
        for (j, b) in segments.iter().enumerate() {
            if compare_over_overlap(a, b) == Some(Ordering::Less) {
                edges.push((i, j));
            }
        }
    }
    trapmap::ply::topological_order(segments, &edges).expect("pairwise order is acyclic")
}

/// Whether `order` puts `a` below `b` for every pair that overlaps with `a` below `b`.
pub fn respects_vertical_order(segments: &[Segment], order: &[SegmentId]) -> bool {
    let mut rank = vec![0; segments.len()];
    for (i, id) in order.iter().enumerate() {
        rank[id.index()] = i;
    }
    segments.iter().all(|a| {
        segments.iter().all(|b| compare_over_overlap(a, b) != Some(Ordering::Less) || rank[a.id.index()] < rank[b.id.index()])
    })
}

/// Ply of the open trapezoids in the registry, by slab decomposition.
pub fn registry_ply_by_slabs(st: &SearchStructure) -> usize {
    let traps: Vec<&Trapezoid> = st.registry().iter().filter(|t| t.left_wall < t.right_wall).collect();
    let mut xs: Vec<XPoint> = traps.iter().flat_map(|t| [t.left_wall, t.right_wall]).collect();
    xs.sort();
    xs.dedup();
    let mut best = 0;
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let inside = |lo: XPoint, hi: XPoint| lo <= a && b <= hi;
        let mut spanning: Vec<&Segment> =
            st.segments().iter().filter(|s| inside(XPoint::Finite(s.left), XPoint::Finite(s.right))).collect();
        spanning.sort_by(|p, q| compare_over_overlap(p, q).unwrap_or(Ordering::Equal));
        // gap g lies between spanning[g - 1] and spanning[g]
        let pos = |bnd: Boundary| -> usize {
            match bnd {
                Boundary::Floor => 0,
                Boundary::Ceiling => spanning.len() + 1,
                Boundary::Segment(id) => spanning.iter().position(|s| s.id == id).expect("boundary spans slab") + 1,
            }
        };
        let mut count = vec![0usize; spanning.len() + 1];
        for t in traps.iter().filter(|t| inside(t.left_wall, t.right_wall)) {
            for c in &mut count[pos(t.bottom)..pos(t.top)] {
                *c += 1;
            }
        }
        best = best.max(count.into_iter().max().unwrap_or(0));
    }
    best
}

/// Maximum rectangle ply by checking every elementary cell.
pub fn naive_rect_ply(rects: &[Rect]) -> usize {
    let mut xs: Vec<XPoint> = rects.iter().flat_map(|r| [r.x_lo, r.x_hi]).collect();
    xs.sort();
    xs.dedup();
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| [r.y_lo, r.y_hi]).collect();
    ys.sort();
    ys.dedup();
    // a cell is a coordinate or the open gap after it: (index, is_gap)
    let cells = |len: usize| (0..len).flat_map(move |i| [(i, false), (i, true)]).filter(move |&(i, g)| !g || i + 1 < len);
    let covers = |lo: usize, hi: usize, closed_lo: bool, closed_hi: bool, (i, gap): (usize, bool)| {
        if lo == hi {
            !gap && i == lo && closed_lo && closed_hi
        } else if gap {
            lo <= i && i < hi
        } else {
            (lo < i && i < hi) || (i == lo && closed_lo && lo <= hi) || (i == hi && closed_hi && lo <= hi)
        }
    };
    let mut best = 0;
    for cx in cells(xs.len()) {
        for cy in cells(ys.len()) {
            let c = rects
                .iter()
                .filter(|r| {
                    let xl = xs.binary_search(&r.x_lo).unwrap();
                    let xh = xs.binary_search(&r.x_hi).unwrap();
                    let yl = ys.binary_search(&r.y_lo).unwrap();
                    let yh = ys.binary_search(&r.y_hi).unwrap();
                    covers(xl, xh, r.closed_left, r.closed_right, cx) && covers(yl, yh, r.closed_bottom, r.closed_top, cy)
                })
                .count();
            best = best.max(c);
        }
    }
    best
}

/// Random pairwise compatible segments on a small grid, so shared endpoints,
/// vertical segments and covertical endpoints are common.
pub fn random_instance(seed: u64, n: usize, grid: i64) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Segment> = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 200 * n + 200 {
        tries += 1;
        let a = Point::new(rng.gen_range(0..grid), rng.gen_range(0..grid));
        let b = if rng.gen_bool(0.2) {
            Point::new(a.x, rng.gen_range(0..grid))
        } else {
            Point::new(rng.gen_range(0..grid), rng.gen_range(0..grid))
        };
        if a == b {
            continue;
        }
        let s = Segment::new(out.len() as u32, a, b);
        if compatible(&out, &s).is_ok() {
            out.push(s);
        }
    }
    out
}

/// Like [`random_instance`], but no two distinct endpoints share an x-coordinate.
pub fn general_position_instance(seed: u64, n: usize, grid: i64) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Segment> = Vec::new();
    let mut used: HashMap<i64, Point> = HashMap::new();
    let mut tries = 0;
    while out.len() < n && tries < 200 * n + 200 {
        tries += 1;
        let pick = |rng: &mut ChaCha8Rng| -> Point {
            if !out.is_empty() && rng.gen_bool(0.25) {
                let s = &out[rng.gen_range(0..out.len())];
                if rng.gen_bool(0.5) { s.left } else { s.right }
            } else {
                Point::new(rng.gen_range(0..grid), rng.gen_range(0..grid))
            }
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        if a.x == b.x || [a, b].iter().any(|p| used.get(&p.x).is_some_and(|q| q != p)) {
            continue;
        }
        let s = Segment::new(out.len() as u32, a, b);
        if compatible(&out, &s).is_ok() {
            used.insert(a.x, a);
            used.insert(b.x, b);
            out.push(s);
        }
    }
    out
}

/// Random lattice query points in a box, skipping those on a segment or endpoint.
pub fn random_queries(seed: u64, segments: &[Segment], count: usize, lo: i64, hi: i64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q = Point::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        if !on_boundary(segments, q) {
            out.push(q);
        }
    }
    out
}

/// Lexicographic comparison re-exported for tests that sort points.
pub fn lex(a: &Point, b: &Point) -> Ordering {
    lex_compare(*a, *b)
}
