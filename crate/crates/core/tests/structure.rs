use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trapmap::generators::{gen_adversarial_blocks, gen_random_disjoint, gen_sqrt_blocks, Profile};
use trapmap::geometry::validate_input;
use trapmap::{identity_order, HistoryDag, Point, SearchTree, Segment, SegmentId};
use trapmap_oracle as oracle;

fn seg(id: u32, a: (i64, i64), b: (i64, i64)) -> Segment {
    Segment::new(id, Point::new(a.0, a.1), Point::new(b.0, b.1))
}

fn shuffled(n: usize, seed: u64) -> Vec<SegmentId> {
    let mut order = identity_order(n);
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Inserts one segment at a time, checking every structural invariant after each step.
fn check_incremental(segments: &[Segment], order: &[SegmentId], full: bool) {
    let mut dag = HistoryDag::new(segments.to_vec());
    for (i, &id) in order.iter().enumerate() {
        let i = i + 1;
        let r = dag.insert(id).unwrap();
        assert_eq!(r.inner_created, r.created - 1, "insertion {i}");
        assert!(dag.leaf_count() <= 3 * i + 1, "leaves after {i}");
        assert!(dag.vertex_count() <= 6 * i + 4, "vertices after {i}");
        assert_eq!(dag.leaf_count(), dag.live_trapezoids().count());
        if full {
            oracle::neighbor_symmetry(&dag).unwrap();
            oracle::leaf_bijection(&dag).unwrap();
        }
    }
    let depths = oracle::recomputed_depths(&dag);
    for (node, d) in dag.nodes().iter().zip(&depths) {
        assert_eq!(Some(node.depth), *d);
    }
    assert_eq!(depths.iter().flatten().max().copied().unwrap_or(0), dag.depth());
}

#[test]
fn one_and_two_segment_leaf_counts() {
    let s = [seg(0, (0, 0), (10, 2)), seg(1, (3, 6), (7, 5))];
    let mut dag = HistoryDag::new(s.to_vec());
    dag.insert(SegmentId(0)).unwrap();
    assert_eq!(dag.leaf_count(), 4);
    let st = dag.stats();
    assert_eq!((st.node_count, st.inner_count, st.depth), (7, 3, 3));
    dag.insert(SegmentId(1)).unwrap();
    assert_eq!(dag.leaf_count(), 7);
}

#[test]
fn counting_bounds_on_random_instances() {
    for seed in 0..60 {
        let n = 5 + (seed as usize * 7) % 60;
        let s = oracle::random_instance(seed, n, 24);
        check_incremental(&s, &shuffled(s.len(), seed), true);
    }
    for seed in 0..10 {
        let s = gen_random_disjoint(300, seed, Profile::HorizontalLevels).unwrap();
        check_incremental(&s, &shuffled(s.len(), seed), false);
        let s = gen_random_disjoint(200, seed, Profile::NoncrossingRejection).unwrap();
        check_incremental(&s, &shuffled(s.len(), seed), false);
    }
}

#[test]
fn counting_bounds_on_block_instances() {
    for n in [2, 3, 5, 16, 64, 200] {
        let (s, order) = gen_adversarial_blocks(n).unwrap();
        check_incremental(&s, &order, true);
    }
    for n in [4, 9, 25, 64] {
        let (s, order) = gen_sqrt_blocks(n).unwrap();
        check_incremental(&s, &order, true);
    }
}

#[test]
fn tree_satisfies_the_same_invariants() {
    for seed in 0..20 {
        let s = oracle::random_instance(seed, 30, 20);
        let order = shuffled(s.len(), seed);
        let tree = SearchTree::build(&s, &order).unwrap();
        oracle::neighbor_symmetry(&tree).unwrap();
        oracle::leaf_bijection(&tree).unwrap();
        let dag = HistoryDag::build(&s, &order).unwrap();
        assert!(tree.node_count() >= dag.node_count());
    }
}

#[test]
fn registry_records_every_trapezoid() {
    let s = oracle::random_instance(3, 25, 16);
    let dag = HistoryDag::build(&s, &shuffled(s.len(), 3)).unwrap();
    let reg = dag.registry();
    assert_eq!(reg[0].birth_iteration, 0);
    assert!(reg.iter().all(|t| t.birth_iteration as usize <= s.len()));
    for t in reg.iter().filter(|t| !t.alive) {
        assert!(t.death_iteration.unwrap() > t.birth_iteration);
    }
    assert_eq!(reg.iter().filter(|t| t.alive).count(), dag.leaf_count());
}

#[test]
fn build_is_deterministic() {
    let s = oracle::random_instance(11, 40, 30);
    let order = shuffled(s.len(), 5);
    let a = HistoryDag::build(&s, &order).unwrap();
    let b = HistoryDag::build(&s, &order).unwrap();
    assert_eq!(a.nodes(), b.nodes());
    assert_eq!(a.registry(), b.registry());
}

fn instance() -> impl Strategy<Value = (Vec<Segment>, Vec<SegmentId>)> {
    (any::<u64>(), 1usize..40, 4i64..40).prop_map(|(seed, n, grid)| {
        let s = oracle::random_instance(seed, n, grid);
        let order = shuffled(s.len(), seed ^ 0x9e37);
        (s, order)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_hold_for_any_order((s, order) in instance()) {
        validate_input(&s).unwrap();
        check_incremental(&s, &order, true);
    }

    #[test]
    fn tree_never_has_fewer_leaves((s, order) in instance()) {
        let dag = HistoryDag::build(&s, &order).unwrap();
        let tree = SearchTree::build(&s, &order).unwrap();
        prop_assert!(tree.leaf_count() >= dag.leaf_count());
        prop_assert_eq!(dag.insertion_order(), tree.insertion_order());
    }
}
