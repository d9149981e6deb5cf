//! Exact worst query path length of a search structure.
//!
//! A depth-first traversal carries the open x-interval of queries that can
//! still reach the current node. A point node outside that interval sends every
//! such query the same way, so only the realizable child is explored.
//!
//! Intervals are taken in lexicographic order, so covertical endpoints bound
//! regions of infinitesimal width. Paths into such regions count: the result is
//! exact for the sheared input, and for real queries on degenerate inputs it is
//! an upper bound.

use serde::Serialize;
use thiserror::Error;

use crate::dag::{NodeId, NodeKind, SearchStructure, TrapId};
use crate::geometry::XPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PathReport {
    /// Longest realizable root-to-leaf path, in internal nodes.
    pub max_length: usize,
    /// Leaf trapezoid at the end of one longest path.
    pub witness: TrapId,
    /// Whether the traversal stopped early after exceeding the abort threshold.
    pub aborted: bool,
    pub states_visited: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("empty x-interval reached at node {0:?}")]
    EmptyInterval(NodeId),
}

/// Computes the maximum query path length exactly.
pub fn max_query_path(st: &SearchStructure) -> Result<PathReport, VerifyError> {
    max_query_path_bounded(st, None)
}

/// As [`max_query_path`], returning as soon as a path longer than `abort_above` is found.
pub fn max_query_path_bounded(
    st: &SearchStructure,
    abort_above: Option<usize>,
) -> Result<PathReport, VerifyError> {
    let mut stack = vec![(st.root(), XPoint::NegInfinity, XPoint::PosInfinity, 0usize)];
    let mut best = PathReport { max_length: 0, witness: TrapId(0), aborted: false, states_visited: 0 };
    let mut have = false;
    while let Some((node, lo, hi, len)) = stack.pop() {
        best.states_visited += 1;
        if lo >= hi {
            return Err(VerifyError::EmptyInterval(node));
        }
        match st.node(node).kind {
            NodeKind::Leaf { trapezoid } => {
                if !have || len > best.max_length {
                    have = true;
                    best.max_length = len;
                    best.witness = trapezoid;
                    if abort_above.is_some_and(|b| len > b) {
                        best.aborted = true;
                        return Ok(best);
                    }
                }
            }
            NodeKind::Segment { above, below, .. } => {
                stack.push((below, lo, hi, len + 1));
                stack.push((above, lo, hi, len + 1));
            }
            NodeKind::Point { point, left, right } => {
                let p = XPoint::Finite(point);
                if hi <= p {
                    stack.push((left, lo, hi, len + 1));
                } else if p <= lo {
                    stack.push((right, lo, hi, len + 1));
                } else {
                    stack.push((right, p, hi, len + 1));
                    stack.push((left, lo, p, len + 1));
                }
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// The certified quantity: L for the exact method, 3 * ply for the ply method, D for depth.
    pub value: usize,
    pub bound: usize,
}

/// PASS iff the exact maximum query path length is at most `bound`.
pub fn verify_path_bound(st: &SearchStructure, bound: usize) -> Result<Verdict, VerifyError> {
    let r = max_query_path_bounded(st, Some(bound))?;
    Ok(Verdict { pass: !r.aborted && r.max_length <= bound, value: r.max_length, bound })
}

/// PASS iff the maximum leaf depth is at most `bound`. Depth only bounds L from above.
pub fn verify_depth_bound(st: &SearchStructure, bound: usize) -> Verdict {
    let d = st.depth() as usize;
    Verdict { pass: d <= bound, value: d, bound }
}
