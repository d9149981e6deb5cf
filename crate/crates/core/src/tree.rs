//! Trapezoidal search tree and bouncing-aware DAG traversal.
//!
//! The tree runs the same construction as the DAG without merging, so no node
//! ever has two parents. Every DAG query path, once its bouncing point nodes
//! are dropped, coincides with the tree path for the same query.

use std::ops::Deref;

use serde::Serialize;

use crate::dag::{build_tree, empty_tree, Branch, BuildError, InsertReport, LocateError, NodeKind, SearchStructure, Step};
use crate::geometry::{lex_compare, Point, Segment, SegmentId, XPoint};

#[derive(Clone, Debug)]
pub struct SearchTree(SearchStructure);

impl SearchTree {
    pub fn new(segments: Vec<Segment>) -> Self {
        SearchTree(empty_tree(segments))
    }

    pub fn build(segments: &[Segment], order: &[SegmentId]) -> Result<Self, BuildError> {
        build_tree(segments, order).map(SearchTree)
    }

    pub fn insert(&mut self, id: SegmentId) -> Result<InsertReport, BuildError> {
        self.0.insert(id)
    }

    pub fn structure(&self) -> &SearchStructure {
        &self.0
    }
}

impl Deref for SearchTree {
    type Target = SearchStructure;
    fn deref(&self) -> &SearchStructure {
        &self.0
    }
}

/// What a node tests, independent of which structure it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Test {
    Point(Point),
    Segment(SegmentId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TracedStep {
    pub step: Step,
    pub test: Test,
    /// A point node whose point lies outside the x-interval reached so far.
    pub bouncing: bool,
}

fn test_of(st: &SearchStructure, step: Step) -> Test {
    match st.node(step.node).kind {
        NodeKind::Point { point, .. } => Test::Point(point),
        NodeKind::Segment { segment, .. } => Test::Segment(segment),
        NodeKind::Leaf { .. } => unreachable!("leaves are not path steps"),
    }
}

/// Locates `q`, marking each point node as bouncing or normal.
///
/// The open x-interval starts at (-inf, +inf) and shrinks at every normal point
/// node. A point node outside the interval is bouncing and leaves it unchanged.
pub fn locate_with_bouncing(st: &SearchStructure, q: Point) -> Result<Vec<TracedStep>, LocateError> {
    let (_, path) = st.locate_path(q)?;
    let mut lo = XPoint::NegInfinity;
    let mut hi = XPoint::PosInfinity;
    let mut out = Vec::with_capacity(path.len());
    for step in path {
        let test = test_of(st, step);
        let bouncing = match test {
            Test::Point(p) => {
                let x = XPoint::Finite(p);
                if lo < x && x < hi {
                    match step.branch {
                        Branch::Left => hi = x,
                        _ => lo = x,
                    }
                    false
                } else {
                    true
                }
            }
            Test::Segment(_) => false,
        };
        out.push(TracedStep { step, test, bouncing });
    }
    Ok(out)
}

/// The (test, branch) sequence of the tree path for `q`.
pub fn tree_path(tree: &SearchTree, q: Point) -> Result<Vec<(Test, Branch)>, LocateError> {
    let (_, path) = tree.locate_path(q)?;
    Ok(path.into_iter().map(|s| (test_of(tree, s), s.branch)).collect())
}

/// The DAG path for `q` with bouncing nodes removed.
pub fn reduced_dag_path(st: &SearchStructure, q: Point) -> Result<Vec<(Test, Branch)>, LocateError> {
    Ok(locate_with_bouncing(st, q)?
        .into_iter()
        .filter(|t| !t.bouncing)
        .map(|t| (t.test, t.step.branch))
        .collect())
}

/// Direct evaluation of a node test, used to sanity-check bouncing outcomes.
pub fn evaluate(test: Test, q: Point) -> Option<Branch> {
    match test {
        Test::Point(p) => match lex_compare(q, p) {
            std::cmp::Ordering::Less => Some(Branch::Left),
            std::cmp::Ordering::Greater => Some(Branch::Right),
            std::cmp::Ordering::Equal => None,
        },
        Test::Segment(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{identity_order, HistoryDag};

    fn seg(id: u32, a: (i64, i64), b: (i64, i64)) -> Segment {
        Segment::new(id, Point::new(a.0, a.1), Point::new(b.0, b.1))
    }

    fn staircase() -> Vec<Segment> {
        vec![
            seg(0, (0, 0), (20, 0)),
            seg(1, (2, 5), (18, 5)),
            seg(2, (4, 10), (16, 10)),
            seg(3, (6, -5), (14, -5)),
            seg(4, (25, 3), (30, 3)),
        ]
    }

    #[test]
    fn tree_never_merges() {
        let s = staircase();
        let tree = SearchTree::build(&s, &identity_order(s.len())).unwrap();
        let mut parents = vec![0u32; tree.node_count()];
        for n in tree.nodes() {
            match n.kind {
                NodeKind::Point { left, right, .. } => {
                    parents[left.index()] += 1;
                    parents[right.index()] += 1;
                }
                NodeKind::Segment { above, below, .. } => {
                    parents[above.index()] += 1;
                    parents[below.index()] += 1;
                }
                NodeKind::Leaf { .. } => {}
            }
        }
        assert!(parents.iter().all(|&p| p <= 1));
        let dag = HistoryDag::build(&s, &identity_order(s.len())).unwrap();
        assert!(tree.node_count() >= dag.node_count());
    }

    #[test]
    fn reduced_paths_match() {
        let s = staircase();
        let order = identity_order(s.len());
        let dag = HistoryDag::build(&s, &order).unwrap();
        let tree = SearchTree::build(&s, &order).unwrap();
        for x in -3..34 {
            for y in -8..14 {
                let q = Point::new(x, y);
                let Ok(t) = tree_path(&tree, q) else { continue };
                assert_eq!(reduced_dag_path(&dag, q).unwrap(), t, "query {q}");
            }
        }
    }

    #[test]
    fn bouncing_steps_agree_with_interval() {
        let s = staircase();
        let dag = HistoryDag::build(&s, &identity_order(s.len())).unwrap();
        let traced = locate_with_bouncing(&dag, Point::new(17, 7)).unwrap();
        for t in &traced {
            if let Test::Point(p) = t.test {
                assert_eq!(evaluate(t.test, Point::new(17, 7)), Some(t.step.branch), "point {p}");
            }
        }
    }
}
