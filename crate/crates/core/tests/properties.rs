use faithkit::graph::{complement, delete_edges, join_graphs, permute, topk_binarize, topk_count};
use faithkit::metrics::{
    exact_expectation, faith, monte_carlo, normalize_nec, normalize_suf, Divergence, FaithValue,
};
use faithkit::models::{Classifier, GinParams, HashClassifier};
use faithkit::oracles::{hit_stats_budget, hit_stats_enumerated};
use faithkit::perturb::{sample, Family, PerturbationSpec, Side};
use faithkit::seed::task_rng;
use faithkit::{AnnotatedGraph, Edge, EdgeMask};
use proptest::prelude::*;

/// Random simple graph on 2..=7 nodes with at least one edge and features in
/// [-1, 1] of width 2.
fn graph() -> impl Strategy<Value = AnnotatedGraph> {
    (2usize..=7)
        .prop_flat_map(|n| {
            let slots = n * (n - 1) / 2;
            (
                Just(n),
                prop::collection::vec(any::<bool>(), slots),
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), n),
            )
        })
        .prop_filter_map("needs an edge", |(n, pick, features)| {
            let slots: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let edges: Vec<Edge> = slots
                .into_iter()
                .zip(pick)
                .filter(|(_, p)| *p)
                .map(|(s, _)| Edge::from(s))
                .collect();
            if edges.is_empty() {
                return None;
            }
            AnnotatedGraph::new(n, edges, features).ok()
        })
}

fn graph_and_bits() -> impl Strategy<Value = (AnnotatedGraph, Vec<bool>)> {
    graph().prop_flat_map(|g| {
        let m = g.edge_count();
        (Just(g), prop::collection::vec(any::<bool>(), m))
    })
}

fn scores(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = EdgeMask> {
    prop::collection::vec(0.0f64..=1.0, len).prop_map(|s| EdgeMask::new(s).unwrap())
}

proptest! {
    #[test]
    fn complement_partitions_the_edges((_, bits) in graph_and_bits()) {
        let mask = EdgeMask::from_bits(&bits);
        let c = complement(&mask).unwrap();
        let cb = c.bits().unwrap();
        for (a, b) in bits.iter().zip(&cb) {
            prop_assert!(a ^ b);
        }
        prop_assert_eq!(complement(&c).unwrap(), mask);
    }

    #[test]
    fn topk_is_idempotent_and_keeps_a_top_set(mask in scores(1..=30), ratio in 0.01f64..=1.0) {
        let cut = topk_binarize(&mask, ratio).unwrap();
        prop_assert_eq!(cut.count_selected(), topk_count(ratio, mask.len()));
        prop_assert_eq!(topk_binarize(&cut, ratio).unwrap(), cut.clone());
        let bits = cut.bits().unwrap();
        let lowest_kept = (0..mask.len()).filter(|&i| bits[i]).map(|i| mask.score(i)).fold(f64::INFINITY, f64::min);
        let highest_dropped = (0..mask.len()).filter(|&i| !bits[i]).map(|i| mask.score(i)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lowest_kept >= highest_dropped);
    }

    #[test]
    fn topk_ignores_appended_lower_edges(mask in scores(1..=20), extra in 0usize..20) {
        // same keep count, strictly lower edges appended: same winners
        let m = mask.len();
        let k = topk_count(0.5, m);
        let mut longer = mask.scores().to_vec();
        longer.extend(std::iter::repeat_n(0.0, extra));
        let floor = mask.scores().iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(floor > 0.0);
        let grown = EdgeMask::new(longer).unwrap();
        let ratio = k as f64 / (m + extra) as f64;
        let a = topk_binarize(&mask, 0.5).unwrap().bits().unwrap();
        let b = topk_binarize(&grown, ratio).unwrap().bits().unwrap();
        prop_assert_eq!(&b[..m], &a[..]);
        prop_assert!(b[m..].iter().all(|x| !x));
    }

    #[test]
    fn join_contains_the_left_graph(r in graph(), c in graph(), k in 0usize..6) {
        let k = k.min(r.node_count() * c.node_count());
        let j = join_graphs(&r, &c, k, &mut task_rng(1, 2, 3, 4)).unwrap();
        prop_assert_eq!(j.node_count(), r.node_count() + c.node_count());
        prop_assert_eq!(j.edge_count(), r.edge_count() + c.edge_count() + k);
        prop_assert_eq!(&j.edges()[..r.edge_count()], r.edges());
        prop_assert_eq!(&j.features()[..r.node_count()], r.features());
        for e in &j.edges()[r.edge_count() + c.edge_count()..] {
            let (a, b) = e.endpoints();
            prop_assert!(a.min(b) < r.node_count() && a.max(b) >= r.node_count());
        }
    }

    #[test]
    fn deleting_edges_keeps_nodes_and_features((g, bits) in graph_and_bits()) {
        let drop: Vec<Edge> = g.edges().iter().zip(&bits).filter(|(_, b)| **b).map(|(e, _)| *e).collect();
        let h = delete_edges(&g, &drop).unwrap();
        prop_assert_eq!(h.node_count(), g.node_count());
        prop_assert_eq!(h.features(), g.features());
        prop_assert_eq!(h.edge_count(), g.edge_count() - drop.len());
        prop_assert!(drop.iter().all(|e| !h.has_edge(*e)));
    }

    #[test]
    fn models_are_permutation_invariant(g in graph(), seed in 0u64..50, node in 0usize..7) {
        let (p, relabel) = permute(&g, &mut task_rng(seed, 0, 0, 0));
        let u = node % g.node_count();
        let hash = HashClassifier::default();
        prop_assert_eq!(hash.evaluate(&g, None).unwrap(), hash.evaluate(&p, None).unwrap());
        let local = HashClassifier::local(1);
        prop_assert_eq!(
            local.evaluate(&g, Some(u)).unwrap(),
            local.evaluate(&p, Some(relabel.node_map[u])).unwrap()
        );
        let gin = GinParams::seeded(2, 3, 2, seed);
        for (target, mapped) in [(None, None), (Some(u), Some(relabel.node_map[u]))] {
            let a = gin.evaluate(&g, target).unwrap();
            let b = gin.evaluate(&p, mapped).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn faith_stays_between_its_parts(suf in 0.0f64..50.0, nec in 0.0f64..50.0) {
        let v = FaithValue::from_raw(suf, nec).unwrap();
        prop_assert!((0.0..=1.0).contains(&v.suf_n) && (0.0..=1.0).contains(&v.nec_n));
        let (lo, hi) = (v.suf_n.min(v.nec_n), v.suf_n.max(v.nec_n));
        prop_assert!(lo - 1e-15 <= v.faith && v.faith <= hi + 1e-15);
        prop_assert!(v.faith <= 2.0 * lo + 1e-15);
        prop_assert_eq!(v.faith, faith(normalize_suf(suf).unwrap(), normalize_nec(nec).unwrap()));
    }

    #[test]
    fn hit_count_matches_enumeration(m in 1u64..=10, r in 0u64..=10, b in 1u64..=10) {
        prop_assume!(r <= m && b <= m);
        prop_assert_eq!(hit_stats_budget(m, r, b).unwrap(), hit_stats_enumerated(m, r, b).unwrap());
    }

    #[test]
    fn bernoulli_deletes_at_the_keep_rate((g, bits) in graph_and_bits(), keep in 0.1f64..0.9, seed in 0u64..1000) {
        let perturbable = bits.iter().filter(|b| !**b).count();
        prop_assume!(perturbable > 0);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Bernoulli { keep }).with_seed(seed);
        let mask = EdgeMask::from_bits(&bits);
        let n = 400usize;
        let mut deleted = 0usize;
        for s in 0..n {
            let out = sample(&spec, &g, &mask, &mut task_rng(seed, 0, 0, s as u64)).unwrap();
            deleted += g.edge_count() - out.graph.edge_count();
        }
        let trials = (n * perturbable) as f64;
        let expected = trials * (1.0 - keep);
        let sigma = (trials * keep * (1.0 - keep)).sqrt();
        prop_assert!((deleted as f64 - expected).abs() <= 4.0 * sigma, "{deleted} vs {expected} ± {sigma}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monte_carlo_agrees_with_exact((g, bits) in graph_and_bits(), seed in 0u64..1000) {
        prop_assume!(bits.iter().any(|b| !b));
        let model = GinParams::seeded(2, 3, 2, seed);
        let mask = EdgeMask::from_bits(&bits);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Bernoulli { keep: 0.6 }).with_seed(seed);
        let exact = exact_expectation(&model, &g, &mask, None, &spec, &Divergence::L1).unwrap().value;
        let n = 2000;
        let (mean, std, _) = monte_carlo(&model, &g, &mask, None, &spec, &Divergence::L1, n, 0, 0).unwrap();
        let se = std / (n as f64).sqrt();
        prop_assert!((mean - exact).abs() <= 4.0 * se + 1e-12, "{mean} vs {exact}, se {se}");
    }
}
