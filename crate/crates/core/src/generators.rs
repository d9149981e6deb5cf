//! Instance generators: random disjoint segments and block constructions with deep DAGs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dag::identity_order;
use crate::geometry::{compatible, Point, Segment, SegmentId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Horizontal segments at distinct heights.
    HorizontalLevels,
    /// Short segments in general direction, kept only if they avoid all earlier ones.
    NoncrossingRejection,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("gave up after {attempts} attempts with {produced} segments placed")]
    GenerationTimeout { produced: usize, attempts: usize },
    #[error("{0} is not a perfect square of at least 4")]
    NotPerfectSquare(usize),
    #[error("need at least 2 segments, got {0}")]
    TooSmall(usize),
}

/// `n` pairwise compatible segments, deterministic in `(n, seed, profile)`.
pub fn gen_random_disjoint(n: usize, seed: u64, profile: Profile) -> Result<Vec<Segment>, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match profile {
        Profile::HorizontalLevels => Ok(horizontal_levels(n, &mut rng)),
        Profile::NoncrossingRejection => rejection(n, &mut rng),
    }
}

fn horizontal_levels(n: usize, rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let width = (16 * n as i64).max(64);
    let mut ys: Vec<i64> = (0..4 * n as i64).collect();
    ys.shuffle(rng);
    (0..n)
        .map(|i| {
            let a = rng.gen_range(0..width);
            let mut b = rng.gen_range(0..width);
            while b == a {
                b = rng.gen_range(0..width);
            }
            Segment::new(i as u32, Point::new(a, ys[i]), Point::new(b, ys[i]))
        })
        .collect()
}

fn rejection(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Segment>, GenError> {
    let side = ((n as f64).sqrt().ceil() as i64 * 64).max(256);
    let reach = side / 8;
    let budget = 200 * n + 1000;
    let mut out: Vec<Segment> = Vec::with_capacity(n);
    let mut endpoints = HashSet::new();
    let mut attempts = 0;
    while out.len() < n {
        if attempts == budget {
            return Err(GenError::GenerationTimeout { produced: out.len(), attempts });
        }
        attempts += 1;
        let a = Point::new(rng.gen_range(0..side), rng.gen_range(0..side));
        let b = Point::new(
            (a.x + rng.gen_range(-reach..=reach)).clamp(0, side - 1),
            (a.y + rng.gen_range(-reach..=reach)).clamp(0, side - 1),
        );
        if a == b || endpoints.contains(&a) || endpoints.contains(&b) {
            continue;
        }
        let s = Segment::new(out.len() as u32, a, b);
        if compatible(&out, &s).is_ok() {
            endpoints.insert(a);
            endpoints.insert(b);
            out.push(s);
        }
    }
    Ok(out)
}

struct Layout {
    segs: Vec<(i64, i64)>,
}

impl Layout {
    fn push(&mut self, l: i64, r: i64) -> usize {
        self.segs.push((l, r));
        self.segs.len() - 1
    }

    /// Horizontal segments at heights following insertion order, top to bottom.
    fn finish(self) -> (Vec<Segment>, Vec<SegmentId>) {
        let n = self.segs.len();
        let segs = self
            .segs
            .into_iter()
            .enumerate()
            .map(|(i, (l, r))| Segment::new(i as u32, Point::new(l, -(i as i64)), Point::new(r, -(i as i64))))
            .collect();
        (segs, identity_order(n))
    }
}

/// `k = √n` blocks of `k` segments each: a cover followed by `k - 1` shrinking segments.
///
/// Each block sits left of and below the previous one, and its cover reaches
/// right underneath the previous block's lowest segment. Inserting top to
/// bottom drives the depth linearly while queries skip a block per comparison.
pub fn gen_sqrt_blocks(n_target: usize) -> Result<(Vec<Segment>, Vec<SegmentId>), GenError> {
    let k = (n_target as f64).sqrt().round() as usize;
    if k < 2 || k * k != n_target {
        return Err(GenError::NotPerfectSquare(n_target));
    }
    let k = k as i64;
    let width = 2 * k + 2;
    let mut layout = Layout { segs: Vec::new() };
    for b in 0..k {
        let x = -b * (width + 2);
        let right = if b == 0 { x + width } else { x + width + 2 + k + 1 };
        layout.push(x, right);
        for i in 1..k {
            layout.push(x + i, x + width - i);
        }
    }
    Ok(layout.finish())
}

/// Recursive blocks with geometrically shrinking sizes.
///
/// A run of size `m` is a row of blocks of sizes ⌈m/2⌉, ⌈m/4⌉, … laid out right to
/// left. Each block is a cover over a run of its remaining segments, and every
/// cover after the first in a row reaches under the lowest segment of the block
/// to its right.
pub fn gen_adversarial_blocks(n_target: usize) -> Result<(Vec<Segment>, Vec<SegmentId>), GenError> {
    if n_target < 2 {
        return Err(GenError::TooSmall(n_target));
    }
    let mut layout = Layout { segs: Vec::new() };
    run(&mut layout, n_target, 0);
    Ok(layout.finish())
}

/// Lays out a run whose rightmost x is `right`; returns (leftmost x, range of its lowest segment).
fn run(layout: &mut Layout, m: usize, right: i64) -> (i64, (i64, i64)) {
    let mut rem = m;
    let mut left = right;
    let mut lowest: Option<(i64, i64)> = None;
    while rem > 0 {
        let size = rem.div_ceil(2);
        rem -= size;
        let (cover_right, inner_right) = match lowest {
            None => (right, right - 1),
            Some((l, r)) => ((l + r) / 2, left - 2),
        };
        let (block_left, block_lowest) = block(layout, size, cover_right, inner_right);
        left = block_left;
        lowest = Some(block_lowest);
    }
    (left, lowest.unwrap())
}

fn block(layout: &mut Layout, size: usize, cover_right: i64, inner_right: i64) -> (i64, (i64, i64)) {
    if size == 1 {
        let l = inner_right - 3;
        layout.push(l, cover_right);
        return (l, (l, cover_right));
    }
    let cover = layout.push(0, cover_right);
    let (inner_left, lowest) = run(layout, size - 1, inner_right);
    layout.segs[cover].0 = inner_left - 1;
    (inner_left - 1, lowest)
}
