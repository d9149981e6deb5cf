use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trapmap::generators::{gen_adversarial_blocks, gen_sqrt_blocks};
use trapmap::verify::max_query_path;
use trapmap::{Boundary, HistoryDag, Point, SegmentId};

/// D / (L · n / log₂ n) measured once for n = 2⁶..2¹²; frozen here.
const SEPARATION: [(usize, f64); 7] = [
    (64, 0.7143),
    (128, 0.7292),
    (256, 0.7407),
    (512, 0.7500),
    (1024, 0.7576),
    (2048, 0.7639),
    (4096, 0.7692),
];

fn depth_and_path(n: usize) -> (usize, usize) {
    let (s, order) = gen_adversarial_blocks(n).unwrap();
    let dag = HistoryDag::build(&s, &order).unwrap();
    (dag.depth() as usize, max_query_path(&dag).unwrap().max_length)
}

#[test]
fn separation_grows_like_n_over_log_n() {
    let mut last_ratio = 0.0;
    for (n, frozen) in SEPARATION {
        let (d, l) = depth_and_path(n);
        let ratio = d as f64 / l as f64;
        assert!(ratio > last_ratio, "n = {n}");
        last_ratio = ratio;
        let c = d as f64 / (l as f64 * n as f64 / (n as f64).log2());
        assert!((c - frozen).abs() <= 0.25 * frozen, "n = {n}: {c}");
        assert!((c - frozen).abs() < 1e-3, "n = {n} drifted from {frozen} to {c}");
    }
}

#[test]
fn smallest_adversarial_instance() {
    let (s, order) = gen_adversarial_blocks(2).unwrap();
    assert_eq!(s.len(), 2);
    let dag = HistoryDag::build(&s, &order).unwrap();
    assert!(max_query_path(&dag).unwrap().max_length <= dag.depth() as usize);
}

#[test]
fn random_order_collapses_depth() {
    let (s, order) = gen_adversarial_blocks(512).unwrap();
    let prescribed = HistoryDag::build(&s, &order).unwrap().depth();
    let mut shuffled = order.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let random = HistoryDag::build(&s, &shuffled).unwrap().depth();
    assert!(random * 5 < prescribed, "{random} vs {prescribed}");
}

#[test]
fn four_segment_block_witness() {
    // cover, two shrinking segments, then the next block's cover reaching under them
    let (s, order) = gen_sqrt_blocks(9).unwrap();
    let mut dag = HistoryDag::new(s.clone());
    for &id in &order[..4] {
        dag.insert(id).unwrap();
    }
    let cover = order[3];
    let q = Point::new(s[cover.index()].left.x + 1, s[cover.index()].left.y - 5);
    let loc = dag.locate(q).unwrap();
    let t = dag.trapezoid(loc.trapezoid);
    assert_eq!(t.top, Boundary::Segment(cover));
    assert_eq!(loc.path_length, 3);
    assert_eq!(dag.node(t.node).depth, 11);
    assert_eq!(dag.depth(), 11);
}

#[test]
fn sqrt_blocks_beat_random_order() {
    let (s, order) = gen_sqrt_blocks(16).unwrap();
    let dag = HistoryDag::build(&s, &order).unwrap();
    let prescribed = dag.depth() as f64 / max_query_path(&dag).unwrap().max_length as f64;
    let mut worse = 0;
    for seed in 0..20 {
        let mut o: Vec<SegmentId> = order.clone();
        o.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let r = HistoryDag::build(&s, &o).unwrap();
        let ratio = r.depth() as f64 / max_query_path(&r).unwrap().max_length as f64;
        if ratio < prescribed {
            worse += 1;
        }
    }
    assert_eq!(worse, 20);
}
