use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use submat::instance::random_transversal;
use submat::reference::{hopcroft_karp, max_vertex_weight_matching};
use submat::transversal::{DecrementalMatching, LStableMatching, Level, TransversalIncremental, TransversalMatroid};
use submat::{ElementId, IncrementalOracle};

fn e(i: usize) -> ElementId {
    ElementId::new(i)
}

fn hk_size(adj: &[Vec<u32>], nr: usize) -> usize {
    hopcroft_karp(adj, nr).iter().filter(|m| m.is_some()).count()
}

#[test]
fn single_edge_lowers_virtual_weight() {
    let m = LStableMatching::new(1, &[vec![0]], vec![Some(3)], 0.5, 3).unwrap();
    assert_eq!(m.mate(0), Some(0));
    assert_eq!(m.virtual_weight(0), Some(2));
    m.check_invariants().unwrap();
}

#[test]
fn heavier_neighbour_wins() {
    let m = LStableMatching::new(1, &[vec![0], vec![0]], vec![Some(2), Some(0)], 0.25, 2).unwrap();
    assert_eq!(m.mate_of_right(0), Some(0));
    assert_eq!(m.mate(1), None);
    m.check_invariants().unwrap();
}

#[test]
fn isolated_right_vertex_stays_free() {
    let m = LStableMatching::new(2, &[vec![0]], vec![Some(0)], 0.5, 0).unwrap();
    assert_eq!(m.mate_of_right(1), None);
    m.check_invariants().unwrap();
}

#[test]
fn steal_chain_matches_both_right_vertices() {
    // l0 - r0 - l1 - r1: r0 first takes l1, r1 steals it, r0 falls back to l0
    let m = LStableMatching::new(2, &[vec![0], vec![0, 1]], vec![Some(0), Some(2)], 0.5, 2).unwrap();
    assert_eq!(m.mate(0), Some(0));
    assert_eq!(m.mate(1), Some(1));
    assert_eq!(m.virtual_weight(1), Some(0));
    m.check_invariants().unwrap();
}

#[test]
fn match_r_rejects_matched_vertex() {
    let mut m = LStableMatching::new(1, &[vec![0]], vec![Some(0)], 0.5, 0).unwrap();
    assert!(m.match_r(0).is_err());
}

#[test]
fn decrementing_unmatched_vertex_reports_nothing() {
    let mut m = LStableMatching::new(1, &[vec![0], vec![0]], vec![Some(2), Some(1)], 0.5, 2).unwrap();
    assert!(m.decrement(1, Some(0)).unwrap().is_empty());
    assert_eq!(m.virtual_weight(1), Some(0));
    m.check_invariants().unwrap();
}

#[test]
fn zero_weight_vertex_is_rematched_by_fallback() {
    let mut m = LStableMatching::new(1, &[vec![0]], vec![Some(0)], 0.5, 0).unwrap();
    let changes = m.decrement(0, None).unwrap();
    assert!(changes.is_empty(), "{changes:?} {:?}", m.mate(0));
    assert_eq!(m.mate(0), Some(0));
    assert_eq!(m.matching_weight(), 0.0);
    m.check_invariants().unwrap();
}

#[test]
fn decrement_to_the_virtual_level_releases_the_vertex() {
    // l0 matched at level 2 holds vw 1; dropping its weight to level 1 must
    // reopen the competition with l1
    let mut m = LStableMatching::new(1, &[vec![0], vec![0]], vec![Some(2), Some(1)], 0.5, 2).unwrap();
    assert_eq!(m.mate(0), Some(0));
    let changes = m.decrement(0, Some(1)).unwrap();
    m.check_invariants().unwrap();
    assert!(changes.removed.iter().all(|&x| x == e(0)));
}

#[test]
fn bad_decrements_and_freezes() {
    let mut m = LStableMatching::new(1, &[vec![0], vec![0]], vec![Some(2), Some(1)], 0.5, 2).unwrap();
    assert!(m.decrement(0, Some(2)).is_err());
    assert!(m.decrement(0, Some(3)).is_err());
    assert!(m.freeze(1).is_err());
    m.freeze(0).unwrap();
    assert!(m.decrement(0, Some(1)).is_err());
    assert!(m.decrement(5, None).is_err());
    assert!(LStableMatching::new(1, &[vec![0]], vec![Some(4)], 0.5, 2).is_err());
}

/// Alternating path l0 r0 l1 r1 ... with every right vertex adjacent to its
/// two neighbours on the path.
fn path_instance(len: usize) -> Vec<Vec<u32>> {
    (0..=len).map(|l| {
        let mut nbrs = Vec::new();
        if l > 0 {
            nbrs.push((l - 1) as u32);
        }
        if l < len {
            nbrs.push(l as u32);
        }
        nbrs
    }).collect()
}

#[test]
fn frozen_interior_of_a_path_survives() {
    let len = 12;
    let adj = path_instance(len);
    let eps = 0.25;
    let top = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let weights: Vec<Level> = (0..=len).map(|_| Some(rng.gen_range(0..=top))).collect();
    let mut m = LStableMatching::new(len, &adj, weights, eps, top).unwrap();
    let frozen: Vec<usize> = (1..len).filter(|&l| m.is_matched(l) && l % 2 == 0).collect();
    for &l in &frozen {
        m.freeze(l).unwrap();
    }
    for _ in 0..200 {
        let l = rng.gen_range(0..=len);
        if m.is_frozen(l) || m.weight(l).is_none() {
            continue;
        }
        let w = m.weight(l).unwrap();
        let target = if w - 1 < m.floor_level() { None } else { Some(rng.gen_range(m.floor_level()..w)) };
        m.decrement(l, target).unwrap();
        m.check_invariants().unwrap();
        assert!(frozen.iter().all(|&f| m.is_matched(f)));
    }
}

fn random_levels(rng: &mut ChaCha8Rng, n: usize, lowest: i32, top: i32) -> Vec<Level> {
    (0..n).map(|_| if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(lowest..=top)) }).collect()
}

#[test]
fn random_decrement_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for round in 0..200 {
        let eps = if round % 2 == 0 { 0.1 } else { 0.25 };
        let nl = rng.gen_range(1..=20);
        let nr = rng.gen_range(1..=20);
        let t = random_transversal(nl, nr, 4, &mut rng).unwrap();
        let top = rng.gen_range(0..=12);
        let mut m = LStableMatching::new(nr, t.adjacency(), random_levels(&mut rng, nl, 0, top), eps, top).unwrap();
        for step in 0..40 {
            m.check_invariants().unwrap();
            let weights: Vec<f64> = (0..nl).map(|l| m.level_value(m.weight(l))).collect();
            let best = max_vertex_weight_matching(t.adjacency(), nr, &weights);
            assert!(m.matching_weight() >= (1.0 - 3.0 * eps) * best - 1e-9, "round {round} step {step}: {} vs {best}", m.matching_weight());
            assert!(2 * m.matching_size() >= hk_size(t.adjacency(), nr));
            let l = rng.gen_range(0..nl);
            if let Some(w) = m.weight(l) {
                // non-zero weights stay at or above level 0, where the guarantee applies
                let target = if rng.gen_bool(0.2) || w == 0 { None } else { Some(rng.gen_range(0..w)) };
                let changes = m.decrement(l, target).unwrap();
                assert!(changes.removed.iter().all(|&x| x == e(l)));
            }
        }
        let k = top as f64;
        let bound = 4.0 * t.num_edges() as f64 * (k + 1.0 / eps + 2.0);
        assert!(m.scans() as f64 <= bound.max(4.0 * nl as f64));
    }
}

#[test]
fn decremental_single_element() {
    let t = TransversalMatroid::new(1, vec![vec![0]]).unwrap();
    let mut d = DecrementalMatching::new(&t, &[], 0.25).unwrap();
    assert_eq!(d.batch_insert(&[e(0)]).unwrap(), vec![e(0)]);
    assert!(d.test(e(0)));
    assert_eq!(d.delete(e(0)).unwrap(), vec![]);
    assert!(!d.test(e(0)));
    assert!(d.delete(e(0)).is_err());
}

#[test]
fn rebuild_keeps_the_previous_basis() {
    // l0..l2 form a perfect matching with r0..r2; l3..l5 compete for the same rights
    let adjacency = vec![vec![0, 1], vec![1, 2], vec![2, 0], vec![0], vec![1], vec![2]];
    let t = TransversalMatroid::new(3, adjacency).unwrap();
    let seeded = DecrementalMatching::new(&t, &[e(0), e(1), e(2)], 0.25).unwrap();
    assert_eq!(seeded.matching_size(), 3);
    let mut d = DecrementalMatching::new(&t, &[], 0.25).unwrap();
    d.batch_insert(&[e(0), e(1), e(2)]).unwrap();
    assert_eq!(d.basis(), vec![e(0), e(1), e(2)]);
    let added = d.batch_insert(&[e(3), e(4), e(5)]).unwrap();
    assert!(added.is_empty());
    assert_eq!(d.basis(), vec![e(0), e(1), e(2)]);
    // deleting l1 lets a competitor take its right vertex
    let replaced = d.delete(e(1)).unwrap();
    assert_eq!(replaced.len(), 1);
    assert_eq!(d.matching_size(), 3);
}

#[test]
fn seed_vertices_cannot_be_deleted() {
    let t = TransversalMatroid::new(2, vec![vec![0], vec![1]]).unwrap();
    let mut d = DecrementalMatching::new(&t, &[e(0)], 0.25).unwrap();
    assert!(d.delete(e(0)).is_err());
    assert!(d.basis().is_empty());
    assert!(DecrementalMatching::new(&TransversalMatroid::new(1, vec![vec![0], vec![0]]).unwrap(), &[e(0), e(1)], 0.25).is_err());
}

#[test]
fn decremental_stays_near_maximum() {
    let eps = 0.25;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let nl = rng.gen_range(1..=30);
        let nr = rng.gen_range(1..=20);
        let t = TransversalMatroid::new(nr, random_transversal(nl, nr, 3, &mut rng).unwrap().adjacency().to_vec()).unwrap();
        let mut d = DecrementalMatching::new(&t, &[], eps).unwrap();
        for _ in 0..20 {
            let matched_before: Vec<ElementId> = (0..nl).map(e).filter(|&x| d.test(x)).collect();
            if rng.gen_bool(0.3) || d.present_set().is_empty() {
                let batch: Vec<ElementId> = (0..nl).map(e).filter(|_| rng.gen_bool(0.3)).collect();
                d.batch_insert(&batch).unwrap();
                assert!(matched_before.iter().all(|&x| d.test(x)));
            } else {
                let present = d.present_set();
                let x = present[rng.gen_range(0..present.len())];
                d.delete(x).unwrap();
                assert!(matched_before.iter().filter(|&&y| y != x).all(|&y| d.test(y)));
            }
            let adj: Vec<Vec<u32>> = d.present_set().iter().map(|x| t.neighbors(*x).to_vec()).collect();
            let best = hk_size(&adj, nr);
            assert!(d.matching_size() as f64 >= (1.0 - eps) * best as f64);
            assert!(d.has_no_short_path());
            assert!(t.is_independent(&(0..nl).map(e).filter(|&x| d.test(x)).collect::<Vec<_>>()));
        }
    }
}

#[test]
fn incremental_matches_exact_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let nl = rng.gen_range(1..=20);
        let nr = rng.gen_range(1..=12);
        let t = random_transversal(nl, nr, 3, &mut rng).unwrap();
        let mut inc = TransversalIncremental::new(&t, &[]).unwrap();
        for i in 0..nl {
            let mut with = inc.members();
            with.push(e(i));
            let ok = t.is_independent(&with);
            assert_eq!(inc.test(e(i)), ok);
            if ok {
                inc.insert(e(i)).unwrap();
            } else {
                assert!(inc.insert(e(i)).is_err());
            }
        }
        assert_eq!(inc.members().len(), t.rank());
    }
}

#[test]
fn weight_class_oracle_tracks_its_matching() {
    use submat::transversal::TransversalOracle;
    use submat::{MaxWeightOracle, WeightClassifier};
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for round in 0..150 {
        let nl = rng.gen_range(1..=25);
        let nr = rng.gen_range(1..=15);
        let t = random_transversal(nl, nr, 3, &mut rng).unwrap();
        let c = WeightClassifier::new(100.0, 0.1, t.rank().max(1)).unwrap();
        let bottom = c.num_classes();
        // classes the classifier can actually produce: live ones and the bottom
        let deepest = c.deepest_live_class().unwrap();
        let mut classes: Vec<usize> = (0..nl).map(|_| rng.gen_range(0..=deepest.min(30))).collect();
        let mut o = TransversalOracle::new(&t, c.clone(), &classes).unwrap();
        let mut current = o.current();
        let mut frozen = Vec::new();
        let freezing = round % 2 == 1;
        for _ in 0..50 {
            let x = rng.gen_range(0..nl);
            let changes = if freezing && rng.gen_bool(0.1) && o.contains(e(x)) {
                frozen.push(e(x));
                o.freeze(e(x)).unwrap()
            } else if !frozen.contains(&e(x)) && classes[x] < bottom {
                classes[x] = if classes[x] >= deepest || rng.gen_bool(0.1) {
                    bottom
                } else {
                    rng.gen_range(classes[x] + 1..=deepest)
                };
                o.decrement(e(x), classes[x]).unwrap()
            } else {
                continue;
            };
            changes.apply_to(&mut current);
            assert_eq!(current, o.current());
            assert!(t.is_independent(&current));
            assert!(frozen.iter().all(|&f| o.contains(f)));
            o.matching().check_invariants().unwrap();
            let values: Vec<f64> = classes.iter().map(|&k| c.class_value(k).unwrap()).collect();
            let sum: f64 = current.iter().map(|x| values[x.index()]).sum();
            assert!((sum - o.approx_base_weight()).abs() < 1e-6 * (1.0 + sum));
            if !freezing {
                let best = max_vertex_weight_matching(t.adjacency(), nr, &values);
                assert!(sum >= 0.5 * best - 1e-9, "{sum} vs {best}");
            }
        }
    }
}
