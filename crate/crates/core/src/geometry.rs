//! Exact integer primitives for interior-disjoint segments.
//!
//! Every x-comparison in the crate goes through the lexicographic `(x, y)`
//! order on points, which acts as an infinitesimal shear of the plane: no two
//! distinct points share a sheared x-coordinate, so covertical endpoints and
//! vertical segments need no special treatment anywhere else.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinates must satisfy `|c| <= COORD_LIMIT`.
pub const COORD_LIMIT: i64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn in_range(&self) -> bool {
        self.x.abs() <= COORD_LIMIT && self.y.abs() <= COORD_LIMIT
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Compare by x, then by y.
pub fn lex_compare(a: Point, b: Point) -> Ordering {
    a.x.cmp(&b.x).then(a.y.cmp(&b.y))
}

/// A point of the lexicographically ordered line extended by two sentinels.
///
/// The derived `Ord` relies on the variant order: `NegInfinity < Finite(_) < PosInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum XPoint {
    NegInfinity,
    Finite(Point),
    PosInfinity,
}

impl XPoint {
    pub fn finite(self) -> Option<Point> {
        match self {
            XPoint::Finite(p) => Some(p),
            _ => None,
        }
    }
}

impl From<Point> for XPoint {
    fn from(p: Point) -> Self {
        XPoint::Finite(p)
    }
}

impl fmt::Display for XPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XPoint::NegInfinity => f.write_str("-inf"),
            XPoint::Finite(p) => p.fmt(f),
            XPoint::PosInfinity => f.write_str("+inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentId(pub u32);

impl SegmentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A segment in canonical orientation: `left <_lex right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub id: SegmentId,
    pub left: Point,
    pub right: Point,
}

impl Segment {
    /// Builds a segment, swapping the endpoints into lexicographic order.
    pub fn new(id: u32, a: Point, b: Point) -> Self {
        let (left, right) = if lex_compare(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
        Segment { id: SegmentId(id), left, right }
    }

    pub fn has_endpoint(&self, p: Point) -> bool {
        self.left == p || self.right == p
    }

    /// True when `p` lies strictly inside the lexicographic x-range.
    pub fn spans(&self, p: Point) -> bool {
        lex_compare(self.left, p) == Ordering::Less && lex_compare(p, self.right) == Ordering::Less
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Above,
    On,
    Below,
}

/// Sign of the orientation determinant of `(a, b, c)`: positive for a left turn.
pub fn orient(a: Point, b: Point, c: Point) -> Ordering {
    let (ax, ay) = (a.x as i128, a.y as i128);
    let det = (b.x as i128 - ax) * (c.y as i128 - ay) - (b.y as i128 - ay) * (c.x as i128 - ax);
    det.cmp(&0)
}

/// Position of `p` relative to the supporting line of `s`, seen from left to right.
pub fn side_of(p: Point, s: &Segment) -> Side {
    match orient(s.left, s.right, p) {
        Ordering::Greater => Side::Above,
        Ordering::Equal => Side::On,
        Ordering::Less => Side::Below,
    }
}

/// Exact closed-segment containment.
pub fn on_segment(p: Point, s: &Segment) -> bool {
    side_of(p, s) == Side::On
        && lex_compare(s.left, p) != Ordering::Greater
        && lex_compare(p, s.right) != Ordering::Greater
}

/// Vertical order of two segments over their common open x-range.
///
/// Returns `None` when the open x-ranges do not overlap, or when the segments
/// are collinear over the overlap (which valid input never produces).
pub fn compare_over_overlap(a: &Segment, b: &Segment) -> Option<Ordering> {
    let lo = a.left.max(b.left);
    let hi = a.right.min(b.right);
    if lex_compare(lo, hi) != Ordering::Less {
        return None;
    }
    // Evaluate at the later-starting left endpoint; on a shared start use the directions.
    let (first, other, flip) = if a.left == lo { (a, b, false) } else { (b, a, true) };
    let ord = match side_of(first.left, other) {
        Side::Above => Ordering::Greater,
        Side::Below => Ordering::Less,
        Side::On => match orient(other.left, other.right, first.right) {
            Ordering::Equal => return None,
            o => o,
        },
    };
    Some(if flip { ord.reverse() } else { ord })
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum Violation {
    #[error("segments {0} and {1} cross")]
    Crossing(SegmentId, SegmentId),
    #[error("an endpoint of segment {1} lies in the interior of segment {0}")]
    EndpointOnInterior(SegmentId, SegmentId),
    #[error("segment {0} has zero length")]
    Degenerate(SegmentId),
    #[error("segments {0} and {1} are identical")]
    Duplicate(SegmentId, SegmentId),
    #[error("segment {0} has a coordinate outside +-2^30")]
    OutOfRange(SegmentId),
}

/// Interior point of `s` equal to `p` (not an endpoint).
fn in_interior(p: Point, s: &Segment) -> bool {
    on_segment(p, s) && !s.has_endpoint(p)
}

fn check_pair(a: &Segment, b: &Segment) -> Result<(), Violation> {
    if a.left == b.left && a.right == b.right {
        return Err(Violation::Duplicate(a.id, b.id));
    }
    if in_interior(b.left, a) || in_interior(b.right, a) {
        return Err(Violation::EndpointOnInterior(a.id, b.id));
    }
    if in_interior(a.left, b) || in_interior(a.right, b) {
        return Err(Violation::EndpointOnInterior(b.id, a.id));
    }
    let d1 = orient(a.left, a.right, b.left);
    let d2 = orient(a.left, a.right, b.right);
    let d3 = orient(b.left, b.right, a.left);
    let d4 = orient(b.left, b.right, a.right);
    let proper = d1 != Ordering::Equal
        && d2 != Ordering::Equal
        && d1 != d2
        && d3 != Ordering::Equal
        && d4 != Ordering::Equal
        && d3 != d4;
    if proper {
        return Err(Violation::Crossing(a.id, b.id));
    }
    Ok(())
}

/// Checks a single segment on its own.
pub fn validate_segment(s: &Segment) -> Result<(), Violation> {
    if !s.left.in_range() || !s.right.in_range() {
        return Err(Violation::OutOfRange(s.id));
    }
    if s.left == s.right {
        return Err(Violation::Degenerate(s.id));
    }
    Ok(())
}

/// Checks whether `candidate` can join `existing` without breaking interior-disjointness.
pub fn compatible(existing: &[Segment], candidate: &Segment) -> Result<(), Violation> {
    validate_segment(candidate)?;
    existing.iter().try_for_each(|s| check_pair(s, candidate))
}

/// Pairwise O(n^2) input check: nonzero length, no duplicates, no crossings,
/// no endpoint in another segment's interior. Shared endpoints are fine.
pub fn validate_input(segments: &[Segment]) -> Result<(), Violation> {
    for s in segments {
        validate_segment(s)?;
    }
    for (i, a) in segments.iter().enumerate() {
        for b in &segments[i + 1..] {
            check_pair(a, b)?;
        }
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: expected {expected} integers, found `{text}`")]
    Malformed { line: usize, expected: usize, text: String },
}

fn parse_ints(line_no: usize, line: &str, expected: usize) -> Result<Vec<i64>, ParseError> {
    let vals: Result<Vec<i64>, _> = line.split_whitespace().map(str::parse::<i64>).collect();
    match vals {
        Ok(v) if v.len() == expected => Ok(v),
        _ => Err(ParseError::Malformed { line: line_no, expected, text: line.to_string() }),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses `x1 y1 x2 y2` lines; ids follow line order starting at 0.
pub fn parse_segments(text: &str) -> Result<Vec<Segment>, ParseError> {
    data_lines(text)
        .enumerate()
        .map(|(id, (line_no, line))| {
            let v = parse_ints(line_no, line, 4)?;
            Ok(Segment::new(id as u32, Point::new(v[0], v[1]), Point::new(v[2], v[3])))
        })
        .collect()
}

/// Parses `x y` query lines.
pub fn parse_points(text: &str) -> Result<Vec<Point>, ParseError> {
    data_lines(text)
        .map(|(line_no, line)| {
            let v = parse_ints(line_no, line, 2)?;
            Ok(Point::new(v[0], v[1]))
        })
        .collect()
}

pub fn format_segments(segments: &[Segment]) -> String {
    let mut out = String::new();
    for s in segments {
        out.push_str(&format!("{} {} {} {}\n", s.left.x, s.left.y, s.right.x, s.right.y));
    }
    out
}
