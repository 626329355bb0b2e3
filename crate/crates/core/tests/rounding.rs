use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use submat::graphic::{GraphicMatroid, UnionFind};
use submat::instance::{generate, GenConfig, ObjectiveKind};
use submat::laminar::LaminarFamily;
use submat::reference::{feasibility_verify, matroid_greedy_basis};
use submat::rounding::{find_exchange, merge_bases, swap_round, swap_round_contracted};
use submat::transversal::TransversalMatroid;
use submat::{ElementId, FractionalSolution, Matroid, MatroidKind};

fn e(i: usize) -> ElementId {
    ElementId::new(i)
}

fn random_matroid(kind: MatroidKind, n: usize, seed: u64) -> Matroid {
    generate(&GenConfig::new(kind, ObjectiveKind::Additive, n, seed)).unwrap().matroid
}

fn random_basis(m: &Matroid, rng: &mut ChaCha8Rng) -> Vec<ElementId> {
    let weights: Vec<f64> = (0..m.n()).map(|_| rng.gen()).collect();
    matroid_greedy_basis(&weights, m)
}

fn is_basis(m: &Matroid, set: &[ElementId]) -> bool {
    set.len() == m.rank() && feasibility_verify(set, m)
}

fn swapped(set: &[ElementId], out: ElementId, inn: ElementId) -> Vec<ElementId> {
    let mut v: Vec<ElementId> = set.iter().copied().filter(|&x| x != out).collect();
    v.push(inn);
    v.sort_unstable();
    v
}

/// Asserts `count` successes out of `trials` are within 4 standard deviations of `p`.
fn within_four_sigma(count: usize, trials: usize, p: f64) {
    let mean = trials as f64 * p;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((count as f64 - mean).abs() <= 4.0 * sd + 1e-9, "{count} of {trials}, expected {mean:.1} +- {sd:.1}");
}

#[test]
fn rank_one_merge_is_a_fair_coin() {
    let matroids = [
        Matroid::Laminar(LaminarFamily::uniform(2, 1)),
        Matroid::Graphic(GraphicMatroid::new(2, vec![(0, 1), (0, 1)]).unwrap()),
        Matroid::Transversal(TransversalMatroid::new(1, vec![vec![0], vec![0]]).unwrap()),
    ];
    for m in &matroids {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 10_000;
        let mut first = 0;
        for _ in 0..trials {
            let out = merge_bases(0.5, &[e(0)], 0.5, &[e(1)], m, &mut rng).unwrap();
            assert_eq!(out.len(), 1);
            if out == [e(0)] {
                first += 1;
            }
        }
        within_four_sigma(first, trials, 0.5);
    }
}

#[test]
fn exchanges_are_valid_for_every_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..150 {
        let kind = MatroidKind::ALL[seed as usize % 3];
        let m = random_matroid(kind, rng.gen_range(2..=30), seed);
        let b1 = random_basis(&m, &mut rng);
        let b2 = random_basis(&m, &mut rng);
        for &i in b1.iter().filter(|x| !b2.contains(x)) {
            let j = find_exchange(i, &b1, &b2, &m).unwrap();
            assert!(b2.contains(&j) && !b1.contains(&j));
            assert!(is_basis(&m, &swapped(&b1, i, j)));
            assert!(is_basis(&m, &swapped(&b2, j, i)));
        }
    }
}

#[test]
fn transversal_partner_shares_the_component() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for seed in 0..100 {
        let m = random_matroid(MatroidKind::Transversal, rng.gen_range(2..=30), seed);
        let Matroid::Transversal(t) = &m else { unreachable!() };
        let b1 = random_basis(&m, &mut rng);
        let b2 = random_basis(&m, &mut rng);
        // vertices: left ids, then right ids shifted by n
        let mut uf = UnionFind::new(t.n() + t.num_right());
        let mut degree = vec![0usize; t.n() + t.num_right()];
        for set in [&b1, &b2] {
            for (l, r) in t.matching_of(set) {
                uf.union(l.index(), t.n() + r);
                degree[l.index()] += 1;
                degree[t.n() + r] += 1;
            }
        }
        // the union of two matchings has maximum degree two
        assert!(degree.iter().all(|&d| d <= 2));
        for &i in b1.iter().filter(|x| !b2.contains(x)) {
            let j = find_exchange(i, &b1, &b2, &m).unwrap();
            assert!(uf.same(i.index(), j.index()));
        }
    }
}

#[test]
fn merge_preserves_marginals_on_laminar_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..6 {
        let m = random_matroid(MatroidKind::Laminar, 14, 100 + seed);
        let b1 = random_basis(&m, &mut rng);
        let b2 = random_basis(&m, &mut rng);
        let (a1, a2) = (rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0));
        let trials = 4000;
        let mut hits = vec![0usize; m.n()];
        for _ in 0..trials {
            let out = merge_bases(a1, &b1, a2, &b2, &m, &mut rng).unwrap();
            assert!(is_basis(&m, &out));
            for x in out {
                hits[x.index()] += 1;
            }
        }
        for x in 0..m.n() {
            let p = (a1 * f64::from(u8::from(b1.contains(&e(x)))) + a2 * f64::from(u8::from(b2.contains(&e(x))))) / (a1 + a2);
            within_four_sigma(hits[x], trials, p);
        }
    }
}

#[test]
fn trivial_combinations_round_to_themselves() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for kind in MatroidKind::ALL {
        let m = random_matroid(kind, 12, 3);
        let b = random_basis(&m, &mut rng);
        let single = FractionalSolution::new(m.n(), vec![(1.0, b.clone())]).unwrap();
        assert_eq!(swap_round(&single, &m, &mut rng).unwrap(), b);
        let double = FractionalSolution::new(m.n(), vec![(0.5, b.clone()), (0.5, b.clone())]).unwrap();
        assert_eq!(swap_round(&double, &m, &mut rng).unwrap(), b);
    }
}

#[test]
fn three_base_laminar_mix_matches_the_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m = random_matroid(MatroidKind::Laminar, 12, 21);
    let bases: Vec<(f64, Vec<ElementId>)> =
        [0.5, 0.3, 0.2].iter().map(|&a| (a, random_basis(&m, &mut rng))).collect();
    let frac = FractionalSolution::new(m.n(), bases).unwrap();
    let x = frac.point();
    let trials = 10_000;
    let mut hits = vec![0usize; m.n()];
    for _ in 0..trials {
        let out = swap_round(&frac, &m, &mut rng).unwrap();
        assert!(is_basis(&m, &out));
        for y in out {
            hits[y.index()] += 1;
        }
    }
    for i in 0..m.n() {
        within_four_sigma(hits[i], trials, x.get(e(i)));
    }
}

#[test]
fn contracted_rounding_excludes_the_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for kind in MatroidKind::ALL {
        let m = random_matroid(kind, 16, 8);
        let full = random_basis(&m, &mut rng);
        let seed: Vec<ElementId> = full.iter().copied().take(2).collect();
        let mut bases = Vec::new();
        for a in [0.25, 0.75] {
            let mut weights: Vec<f64> = (0..m.n()).map(|_| rng.gen()).collect();
            for s in &seed {
                weights[s.index()] = 10.0;
            }
            let b: Vec<ElementId> = matroid_greedy_basis(&weights, &m).into_iter().filter(|x| !seed.contains(x)).collect();
            bases.push((a, b));
        }
        let frac = FractionalSolution::new(m.n(), bases).unwrap();
        let out = swap_round_contracted(&frac, &m, &seed, &mut rng).unwrap();
        assert!(out.iter().all(|x| !seed.contains(x)));
        let mut with: Vec<ElementId> = out.iter().chain(&seed).copied().collect();
        with.sort_unstable();
        assert!(is_basis(&m, &with));
    }
}

#[test]
fn non_basis_inputs_are_rejected() {
    let m = Matroid::Laminar(LaminarFamily::uniform(4, 2));
    let frac = FractionalSolution::new(4, vec![(1.0, vec![e(0)])]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(swap_round(&frac, &m, &mut rng).is_err());
    assert!(find_exchange(e(0), &[e(0), e(1)], &[e(0), e(2)], &m).is_err());
    assert!(FractionalSolution::new(4, vec![(0.4, vec![e(0)])]).is_err());
}
