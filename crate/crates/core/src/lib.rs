//! Planar point location with trapezoidal maps.
//!
//! The history DAG built by randomized incremental construction answers
//! point-location queries in expected logarithmic time. Its worst query path
//! can be certified either exactly, by a recursive traversal, or within a
//! factor of three, through a ply computation over the trapezoids ever created.

pub mod dag;
pub mod driver;
pub mod generators;
pub mod geometry;
pub mod ply;
pub mod tree;
pub mod verify;

pub use dag::{
    identity_order, Boundary, BuildError, HistoryDag, Location, LocateError, Node, NodeId, NodeKind,
    SearchStructure, Stats, TrapId, Trapezoid,
};
pub use driver::{build_guaranteed, random_order, BuildConfig, BuildReport, DriverError, VerifierKind};
pub use geometry::{Point, Segment, SegmentId, Side, XPoint};
pub use tree::SearchTree;
