//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL` line with
//! the measured values and then asserts the same condition.
//!
//! Run with `cargo test -p submat --test acceptance -- --nocapture --test-threads 1`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use submat::graphic::{GraphicForestOracle, UnionFind};
use submat::instance::{generate, random_graphic, random_laminar, random_transversal, GenConfig, ObjectiveKind};
use submat::laminar::{LaminarStructure, SlowLaminar, TopTreeLaminar};
use submat::optimizer::DtVariant;
use submat::reference::{brute_force_opt, greedy_basis_with, hopcroft_karp, kruskal_weight, matroid_greedy_basis, max_vertex_weight_matching};
use submat::rounding::swap_round;
use submat::sampler::BucketSampler;
use submat::transversal::{LStableMatching, Level};
use submat::{
    run_pipeline, ElementId, FractionalSolution, Matroid, MatroidKind, MaxWeightOracle, PipelineConfig, ValueOracle,
    WeightClassifier,
};

fn e(i: usize) -> ElementId {
    ElementId::new(i)
}

/// Prints the verdict line and fails the test when `pass` is false.
fn report(criterion: u32, pass: bool, elapsed: Duration, details: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} ({:.1}s) {details}", elapsed.as_secs_f64());
    assert!(pass, "criterion {criterion} failed: {details}");
}

fn within_four_sigma(count: usize, trials: usize, p: f64) -> bool {
    let mean = trials as f64 * p;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= 4.0 * sd + 1e-9
}

fn instance(kind: MatroidKind, n: usize, seed: u64) -> (ValueOracle, Matroid) {
    let inst = generate(&GenConfig::new(kind, ObjectiveKind::Coverage, n, seed)).unwrap();
    (ValueOracle::new(inst.objective).unwrap(), inst.matroid)
}

#[test]
fn criterion_1_and_9_end_to_end_approximation() {
    let start = Instant::now();
    let eps = 0.2;
    let target = 1.0 - (-1.0f64).exp() - eps;
    let mean_target = 1.0 - (-1.0f64).exp() - 0.1;
    let config = PipelineConfig::new(eps);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pass = true;
    let mut details = Vec::new();
    let (mut small_seed, mut runs) = (0usize, 0usize);
    for kind in MatroidKind::ALL {
        let (mut good, mut total, mut ratio_sum) = (0usize, 0usize, 0.0);
        for i in 0..30u64 {
            let n = rng.gen_range(8..=12);
            let (f, m) = instance(kind, n, 1000 * i + n as u64);
            let (_, opt) = brute_force_opt(&f, &m).unwrap();
            for seed in 0..100u64 {
                let out = run_pipeline(&f, &m, &config, seed).unwrap();
                assert!(m.is_independent(&out.solution));
                let ratio = if opt > 0.0 { out.value / opt } else { 1.0 };
                good += usize::from(ratio >= target - 1e-12);
                ratio_sum += ratio;
                total += 1;
                small_seed += usize::from(out.frozen.len() as f64 <= eps * m.rank() as f64 / 2.0);
                runs += 1;
            }
        }
        let share = good as f64 / total as f64;
        let mean = ratio_sum / total as f64;
        pass &= share >= 0.95 && mean >= mean_target;
        details.push(format!("{}: {:.1}% above {target:.3}, mean ratio {mean:.4}", kind.name(), 100.0 * share));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(300);
    let seed_share = small_seed as f64 / runs as f64;
    println!(
        "criterion 9: {} |S0| <= eps r / 2 in {:.2}% of {runs} runs",
        if seed_share >= 0.99 { "PASS" } else { "FAIL" },
        100.0 * seed_share
    );
    report(1, pass, elapsed, details.join("; "));
    assert!(seed_share >= 0.99, "criterion 9 failed");
}

#[test]
fn criterion_2_laminar_differential() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ops, mut mismatches) = (0usize, 0usize);
    let (mut worst_elements, mut worst_tree) = (0.0f64, 0.0f64);
    let mut trial = 0;
    while ops < 10_000 {
        let n = rng.gen_range(2..=64);
        let (depth, branching) = if trial % 3 == 0 { (64, 1) } else { (rng.gen_range(1..=6), rng.gen_range(1..=4)) };
        trial += 1;
        let family = random_laminar(n, depth, branching, &mut rng).unwrap();
        let mut slow = SlowLaminar::new(&family);
        let mut top = TopTreeLaminar::new(&family);
        let mut weights = vec![0.0; n];
        let mut present = vec![false; n];
        for _ in 0..50 {
            let i = rng.gen_range(0..n);
            let before = top.structural_ops();
            let (a, b) = if present[i] {
                (slow.delete(e(i)).unwrap(), top.delete(e(i)).unwrap())
            } else {
                weights[i] = rng.gen_range(0..20) as f64;
                let node = family.element_node(e(i));
                (slow.insert(e(i), node, weights[i]).unwrap(), top.insert(e(i), node, weights[i]).unwrap())
            };
            present[i] = !present[i];
            ops += 1;
            let cost = (top.structural_ops() - before) as f64;
            worst_elements = worst_elements.max(cost / (n as f64).log2());
            worst_tree = worst_tree.max(cost / (top.tree_size().max(2) as f64).log2());
            let candidates: Vec<ElementId> = (0..n).filter(|&j| present[j]).map(e).collect();
            let greedy = greedy_basis_with(&weights, &candidates, |set| family.is_independent(set));
            if a != b || slow.basis() != greedy || top.basis() != greedy {
                mismatches += 1;
            }
        }
        if top.check_consistency().is_err() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && worst_elements <= 12.0 && elapsed <= Duration::from_secs(60);
    report(
        2,
        pass,
        elapsed,
        format!(
            "{ops} ops, {mismatches} mismatches, worst joins+splits per log2(elements) {worst_elements:.2}, per log2(tree nodes) {worst_tree:.2}"
        ),
    );
}

#[test]
fn criterion_3_single_element_stability() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = (0usize, 0usize);
    let mut violations = 0;
    for trial in 0..1000u64 {
        let kind = MatroidKind::ALL[trial as usize % 3];
        let n = rng.gen_range(1..=30);
        let m = generate(&GenConfig::new(kind, ObjectiveKind::Additive, n, trial)).unwrap().matroid;
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut present: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.6)).collect();
        let basis_of = |present: &[bool]| {
            let candidates: Vec<ElementId> = (0..n).filter(|&j| present[j]).map(e).collect();
            greedy_basis_with(&weights, &candidates, |set| m.is_independent(set))
        };
        let before = basis_of(&present);
        let i = rng.gen_range(0..n);
        present[i] = !present[i];
        let after = basis_of(&present);
        let added = after.iter().filter(|x| !before.contains(x)).count();
        let removed = before.iter().filter(|x| !after.contains(x)).count();
        worst = (worst.0.max(added), worst.1.max(removed));
        violations += usize::from(added > 1 || removed > 1);
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && elapsed <= Duration::from_secs(30);
    report(3, pass, elapsed, format!("1000 triples, max added {}, max removed {}", worst.0, worst.1));
}

fn is_acyclic(num_vertices: usize, edges: &[(u32, u32)], set: &[ElementId]) -> bool {
    let mut uf = UnionFind::new(num_vertices);
    set.iter().all(|&x| {
        let (u, v) = edges[x.index()];
        uf.union(u as usize, v as usize).is_some()
    })
}

#[test]
fn criterion_4_graphic_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let classifier = WeightClassifier::new(10.0, 0.1, 100).unwrap();
    let bottom = classifier.num_classes();
    let (mut weight_ratio, mut size_ratio) = (f64::INFINITY, f64::INFINITY);
    let mut violations = 0;
    let mut steps = 0;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=500);
        let g = random_graphic(m, rng.gen_range(0.5..3.0), &mut rng).unwrap();
        let mut classes: Vec<usize> = (0..m).map(|_| rng.gen_range(0..bottom)).collect();
        let mut o = GraphicForestOracle::new(&g, classifier.clone(), &classes).unwrap();
        for _ in 0..12 {
            let x = rng.gen_range(0..m);
            if rng.gen_bool(0.2) && o.contains(e(x)) {
                o.freeze(e(x)).unwrap();
            } else if !o.is_frozen(e(x)) && classes[x] < bottom {
                classes[x] = rng.gen_range(classes[x] + 1..=bottom);
                o.decrement(e(x), classes[x]).unwrap();
            } else {
                continue;
            }
            steps += 1;
            let forest = o.current();
            let ws: Vec<f64> = (0..m).map(|i| o.weight(e(i))).collect();
            let (best, rank) = kruskal_weight(g.num_vertices(), g.edges(), &ws, |_| true, &[]);
            let weight: f64 = forest.iter().map(|f| ws[f.index()]).sum();
            if best > 0.0 {
                weight_ratio = weight_ratio.min(weight / best);
            }
            if rank > 0 {
                size_ratio = size_ratio.min(forest.len() as f64 / rank as f64);
            }
            let ok = is_acyclic(g.num_vertices(), g.edges(), &forest)
                && weight >= best / 2.0 - 1e-9
                && 2 * forest.len() >= rank;
            violations += usize::from(!ok);
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && elapsed <= Duration::from_secs(60);
    report(
        4,
        pass,
        elapsed,
        format!("{steps} ops, {violations} violations, min weight/Kruskal {weight_ratio:.3}, min |F|/rank {size_ratio:.3}"),
    );
}

fn hk_size(adj: &[Vec<u32>], num_right: usize) -> usize {
    hopcroft_karp(adj, num_right).iter().filter(|m| m.is_some()).count()
}

#[test]
fn criterion_5_transversal_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut weight_ratio, mut size_ratio, mut scan_ratio) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    let mut failures: Vec<String> = Vec::new();
    for round in 0..1000 {
        let eps = if round % 2 == 0 { 0.1 } else { 0.25 };
        let nl = rng.gen_range(1..=40);
        let nr = rng.gen_range(1..=40);
        let t = random_transversal(nl, nr, rng.gen_range(1..=4), &mut rng).unwrap();
        let top = rng.gen_range(0..=12);
        let levels: Vec<Level> =
            (0..nl).map(|_| if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0..=top)) }).collect();
        let mut m = LStableMatching::new(nr, t.adjacency(), levels, eps, top).unwrap();
        for _ in 0..30 {
            if let Err(msg) = m.check_invariants() {
                failures.push(msg);
            }
            let weights: Vec<f64> = (0..nl).map(|l| m.level_value(m.weight(l))).collect();
            let best = max_vertex_weight_matching(t.adjacency(), nr, &weights);
            if best > 0.0 {
                weight_ratio = weight_ratio.min(m.matching_weight() / best);
            }
            if m.matching_weight() < (1.0 - 3.0 * eps) * best - 1e-9 {
                failures.push(format!("weight {} below (1-3eps) of {best}", m.matching_weight()));
            }
            let maximum = hk_size(t.adjacency(), nr);
            if maximum > 0 {
                size_ratio = size_ratio.min(m.matching_size() as f64 / maximum as f64);
            }
            if 2 * m.matching_size() < maximum {
                failures.push(format!("size {} below half of {maximum}", m.matching_size()));
            }
            let l = rng.gen_range(0..nl);
            if rng.gen_bool(0.05) && m.is_matched(l) {
                m.freeze(l).unwrap();
                continue;
            }
            let Some(w) = m.weight(l) else { continue };
            if m.is_frozen(l) {
                continue;
            }
            let matched_before: Vec<usize> = (0..nl).filter(|&x| m.is_matched(x)).collect();
            let target = if rng.gen_bool(0.2) || w == 0 { None } else { Some(rng.gen_range(0..w)) };
            let changes = m.decrement(l, target).unwrap();
            // only the decremented vertex may leave the matching
            if changes.removed.iter().any(|&x| x != e(l)) || matched_before.iter().any(|&x| x != l && !m.is_matched(x)) {
                failures.push(format!("decrement of {l} unmatched another vertex"));
            }
        }
        let bound = 4.0 * t.num_edges() as f64 * (f64::from(top) + 1.0 / eps + 2.0);
        if t.num_edges() > 0 {
            scan_ratio = scan_ratio.max(m.scans() as f64 / bound);
        }
        if m.scans() as f64 > bound {
            failures.push(format!("{} scans above {bound}", m.scans()));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed <= Duration::from_secs(120);
    report(
        5,
        pass,
        elapsed,
        format!(
            "{} failures{}, min weight/Hungarian {weight_ratio:.3}, min size/HK {size_ratio:.3}, max scans/bound {scan_ratio:.3}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    );
}

/// Upper critical value of the chi-square distribution at level 0.001 by the
/// Wilson-Hilferty approximation.
fn chi_square_critical(df: f64) -> f64 {
    let z = 3.090;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn criterion_6_sampler_laws() {
    let start = Instant::now();
    let classifier = WeightClassifier::new(100.0, 0.2, 20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 40;
    let mut sampler = BucketSampler::new(&classifier, n).unwrap();
    let mut values = vec![0.0; n];
    for i in 0..n {
        let class = rng.gen_range(0..=classifier.num_classes());
        sampler.add(e(i), class).unwrap();
        values[i] = classifier.class_value(class).unwrap();
    }
    let total: f64 = values.iter().sum();
    let draws = 10_000;
    let mut outliers = 0;
    for t in [0.5, 3.0, 12.0] {
        let mut hits = vec![0usize; n];
        for _ in 0..draws {
            for x in sampler.sample(t, &mut rng) {
                hits[x.index()] += 1;
            }
        }
        for i in 0..n {
            let p = (t * values[i] / total).min(1.0);
            outliers += usize::from(!within_four_sigma(hits[i], draws, p));
        }
    }
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        counts[sampler.uniform_sample(&mut rng).unwrap().index()] += 1;
    }
    let expected = draws as f64 / n as f64;
    let chi: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = chi_square_critical((n - 1) as f64);
    let elapsed = start.elapsed();
    let pass = outliers == 0 && chi <= critical && elapsed <= Duration::from_secs(30);
    report(
        6,
        pass,
        elapsed,
        format!("{outliers} inclusion frequencies outside 4 sigma, uniform chi-square {chi:.1} vs critical {critical:.1}"),
    );
}

#[test]
fn criterion_7_budget_gates() {
    let start = Instant::now();
    let n = 200;
    let nf = n as f64;
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 4];
    let mut check = |slot: usize, name: &str, used: u64, bound: f64, label: &str| {
        worst[slot] = worst[slot].max(used as f64 / bound);
        if used as f64 > bound {
            failures.push(format!("{label}: {name} {used} > {bound:.0}"));
        }
    };
    for eps in [0.2, 0.25] {
        for kind in MatroidKind::ALL {
            let mut variants = vec![None];
            if kind == MatroidKind::Transversal {
                variants.push(Some(DtVariant::Incremental));
            }
            for seed in 0..2u64 {
                let (f, m) = instance(kind, n, seed);
                let r = m.rank().max(1) as f64;
                for &variant in &variants {
                    // a low loop threshold keeps the first phase active at this size
                    for threshold_factor in [PipelineConfig::new(eps).threshold_factor, 0.02] {
                        let config = PipelineConfig { variant, threshold_factor, ..PipelineConfig::new(eps) };
                        let out = run_pipeline(&f, &m, &config, seed).unwrap();
                        let c = &out.counters;
                        let label = format!("{} eps {eps} seed {seed}", kind.name());
                        check(0, "phase-1 queries", c.phase1_queries, 8.0 * nf / eps * (r / eps).ln(), &label);
                        check(1, "phase-2 queries", c.phase2_queries, 8.0 * nf * eps.powi(-5) * (nf / eps).ln().powi(2), &label);
                        let dt = &c.phase2.dt;
                        if c.phase2.variant == Some(DtVariant::Incremental) {
                            check(2, "tests+inserts", dt.tests + dt.inserts, 8.0 * nf / eps, &label);
                        } else {
                            check(3, "batch inserts", dt.batch_inserts, 8.0 / eps * r.ln().max(1.0), &label);
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed <= Duration::from_secs(120);
    report(
        7,
        pass,
        elapsed,
        format!(
            "{} violations; worst used/budget: phase-1 {:.4}, phase-2 {:.4}, tests+inserts {:.3}, batch inserts {:.3}",
            failures.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        ),
    );
}

#[test]
fn criterion_8_swap_rounding_marginals() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rounds = 10_000;
    let mut outliers = 0;
    let mut dependent = 0;
    let mut details = Vec::new();
    for kind in MatroidKind::ALL {
        let m = generate(&GenConfig::new(kind, ObjectiveKind::Additive, 16, 8)).unwrap().matroid;
        let bases: Vec<(f64, Vec<ElementId>)> = [0.5, 0.3, 0.2]
            .iter()
            .map(|&a| {
                let w: Vec<f64> = (0..m.n()).map(|_| rng.gen()).collect();
                (a, matroid_greedy_basis(&w, &m))
            })
            .collect();
        let frac = FractionalSolution::new(m.n(), bases).unwrap();
        let x = frac.point();
        let mut hits = vec![0usize; m.n()];
        for _ in 0..rounds {
            let out = swap_round(&frac, &m, &mut rng).unwrap();
            dependent += usize::from(!m.is_independent(&out));
            for y in out {
                hits[y.index()] += 1;
            }
        }
        let bad = (0..m.n()).filter(|&i| !within_four_sigma(hits[i], rounds, x.get(e(i)))).count();
        outliers += bad;
        details.push(format!("{}: rank {}, {bad} outliers", kind.name(), m.rank()));
    }
    let elapsed = start.elapsed();
    let pass = outliers == 0 && dependent == 0 && elapsed <= Duration::from_secs(60);
    report(8, pass, elapsed, format!("{}; {dependent} dependent outputs", details.join(", ")));
}
