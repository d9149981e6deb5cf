//! Guaranteed construction: build, check size and query time, rebuild on failure.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dag::{identity_order, BuildError, HistoryDag};
use crate::geometry::{Segment, SegmentId};
use crate::ply::{verify_by_ply, PlyError};
use crate::verify::{verify_depth_bound, verify_path_bound, VerifyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierKind {
    Recursive,
    Ply,
    /// Compares the depth D with the bound. Passing says nothing certain about L.
    DepthOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildConfig {
    pub lambda: f64,
    pub size_rho: f64,
    pub verifier: VerifierKind,
    pub max_rebuilds: u32,
    pub seed: u64,
    /// Replaces the computed path bound; used to exercise the failure path.
    pub bound_override: Option<usize>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            lambda: 20.0,
            size_rho: 3.0,
            verifier: VerifierKind::Recursive,
            max_rebuilds: 64,
            seed: 0,
            bound_override: None,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<(), DriverError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(DriverError::InvalidConfig("lambda must be positive".into()));
        }
        if !(self.size_rho > 0.0 && self.size_rho.is_finite()) {
            return Err(DriverError::InvalidConfig("size_rho must be positive".into()));
        }
        if self.max_rebuilds < 1 {
            return Err(DriverError::InvalidConfig("max_rebuilds must be at least 1".into()));
        }
        Ok(())
    }

    /// ⌈3λ ln(n+1)⌉ unless overridden.
    pub fn path_bound(&self, n: usize) -> usize {
        self.bound_override.unwrap_or_else(|| path_bound(self.lambda, n))
    }

    /// ⌈15ρn⌉ nodes, and at least one node.
    pub fn size_threshold(&self, n: usize) -> usize {
        ((15.0 * self.size_rho * n as f64).ceil() as usize).max(1)
    }
}

/// The permutation of the first attempt of [`build_guaranteed`] under `seed`.
pub fn random_order(n: usize, seed: u64) -> Vec<SegmentId> {
    let mut order = identity_order(n);
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

pub fn path_bound(lambda: f64, n: usize) -> usize {
    (3.0 * lambda * ((n + 1) as f64).ln()).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    Pass,
    SizeExceeded,
    BoundExceeded { value: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub build_ms: f64,
    pub verify_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub method: VerifierKind,
    /// Certified quantity: L, 3·ply, or D.
    pub value: usize,
    pub bound: usize,
    /// False for the depth-only heuristic.
    pub certifying: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildReport {
    pub n: usize,
    pub rebuilds: u32,
    pub seed: u64,
    pub permutation: Vec<SegmentId>,
    pub node_count: usize,
    pub leaf_count: usize,
    pub size_threshold: usize,
    pub depth: u32,
    pub certificate: Certificate,
    pub attempts: Vec<AttemptOutcome>,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no attempt passed within {attempts} builds")]
    RebuildLimitExceeded { attempts: u32, outcomes: Vec<AttemptOutcome> },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Ply(#[from] PlyError),
}

/// Builds until an attempt meets both the size threshold and the path bound.
///
/// Each attempt inserts a fresh random permutation drawn from a generator
/// seeded with `config.seed`, so the whole loop is reproducible.
pub fn build_guaranteed(segments: &[Segment], config: &BuildConfig) -> Result<(HistoryDag, BuildReport), DriverError> {
    config.validate()?;
    let n = segments.len();
    let bound = config.path_bound(n);
    let limit = config.size_threshold(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut outcomes = Vec::new();
    let mut timing = Timing { build_ms: 0.0, verify_ms: 0.0 };

    for attempt in 0..config.max_rebuilds {
        let mut order = identity_order(n);
        order.shuffle(&mut rng);

        let start = Instant::now();
        let built = HistoryDag::build_with_limit(segments, &order, limit);
        timing.build_ms += start.elapsed().as_secs_f64() * 1e3;
        let dag = match built {
            Ok(dag) => dag,
            Err(BuildError::SizeLimitExceeded { .. }) => {
                outcomes.push(AttemptOutcome::SizeExceeded);
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        let start = Instant::now();
        let verdict = match config.verifier {
            VerifierKind::Recursive => verify_path_bound(&dag, bound)?,
            VerifierKind::Ply => verify_by_ply(&dag, bound)?,
            VerifierKind::DepthOnly => verify_depth_bound(&dag, bound),
        };
        timing.verify_ms += start.elapsed().as_secs_f64() * 1e3;
        if !verdict.pass {
            outcomes.push(AttemptOutcome::BoundExceeded { value: verdict.value });
            continue;
        }
        outcomes.push(AttemptOutcome::Pass);
        let stats = dag.stats();
        let report = BuildReport {
            n,
            rebuilds: attempt,
            seed: config.seed,
            permutation: order,
            node_count: stats.node_count,
            leaf_count: stats.leaf_count,
            size_threshold: limit,
            depth: stats.depth,
            certificate: Certificate {
                method: config.verifier,
                value: verdict.value,
                bound,
                certifying: config.verifier != VerifierKind::DepthOnly,
            },
            attempts: outcomes,
            timing,
        };
        return Ok((dag, report));
    }
    Err(DriverError::RebuildLimitExceeded { attempts: config.max_rebuilds, outcomes })
}
