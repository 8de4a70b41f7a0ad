use bdcut_core::instance::{Assignment, Edge, Max2LinInstance};
use bdcut_core::localsearch::{analyze_candidates, apply_flips, Epsilon};
use bdcut_core::numerics::{arcsin_partial, band_mass, band_mass_bounds, sheppard};
use bdcut_core::oracle::{brute_force_opt, naive_opt};
use bdcut_core::rng;
use bdcut_core::rounding::{hyperplane_round, sample_gaussian};
use bdcut_core::sdp::{enumerate_triples, max_violation, SdpEmbedding, TriangleMode};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random instance with edge density `p`, mixed signs and weights.
fn random_instance(n: usize, p: f64, seed: u64) -> Max2LinInstance {
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let sign = if rng.random::<bool>() { 1 } else { -1 };
                let weight = if rng.random::<bool>() {
                    1.0
                } else {
                    rng.random_range(0.01..3.0)
                };
                edges.push(Edge::new(i, j, sign, weight));
            }
        }
    }
    edges.shuffle(&mut rng);
    Max2LinInstance::new(n, edges).unwrap()
}

fn random_assignment(n: usize, seed: u64) -> Assignment {
    let mut rng = rng::seeded(seed);
    Assignment::new(
        (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect(),
    )
    .unwrap()
}

fn random_embedding(n: usize, rank: usize, seed: u64) -> SdpEmbedding {
    let mut rng = rng::seeded(seed);
    let data = (0..n * rank).map(|_| rng::normal(&mut rng)).collect();
    SdpEmbedding::normalized(n, rank, data).unwrap()
}

proptest! {
    #[test]
    fn satisfied_plus_violated_is_total(n in 1usize..30, p in 0.0f64..1.0, seed: u64, xs: u64) {
        let inst = random_instance(n, p, seed);
        let x = random_assignment(n, xs);
        let sum = inst.evaluate(&x).unwrap() + inst.violated_weight(&x).unwrap();
        prop_assert!((sum - inst.total_weight()).abs() <= 1e-12 * inst.total_weight().max(1.0));
    }

    #[test]
    fn global_flip_is_free(n in 1usize..30, p in 0.0f64..1.0, seed: u64, xs: u64) {
        let inst = random_instance(n, p, seed);
        let x = random_assignment(n, xs);
        prop_assert_eq!(inst.evaluate(&x).unwrap(), inst.evaluate(&x.negated()).unwrap());
    }

    #[test]
    fn oracle_matches_naive_scan(n in 1usize..=12, p in 0.0f64..1.0, seed: u64) {
        let inst = random_instance(n, p, seed);
        let res = brute_force_opt(&inst).unwrap();
        prop_assert_eq!(res.opt, naive_opt(&inst).unwrap());
        prop_assert_eq!(inst.evaluate(&res.argmax).unwrap(), res.opt);
        prop_assert_eq!(res.argmax.get(0), 1);
    }

    #[test]
    fn oracle_ignores_labels(n in 2usize..=11, p in 0.0f64..1.0, seed: u64, pseed: u64) {
        let inst = random_instance(n, p, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng::seeded(pseed));
        let relabeled = inst.relabel(&perm).unwrap();
        let a = brute_force_opt(&inst).unwrap().opt;
        let b = brute_force_opt(&relabeled).unwrap().opt;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn flips_never_lose(
        n in 2usize..40,
        p in 0.0f64..0.5,
        rank in 1usize..5,
        eps in 0.001f64..1.5,
        seed: u64,
        gseed: u64,
    ) {
        let inst = random_instance(n, p, seed);
        let emb = random_embedding(n, rank, seed ^ 0x5eed);
        let g = sample_gaussian(rank, gseed);
        let x = hyperplane_round(&emb, &g).unwrap();
        let eps = Epsilon::from_value(eps).unwrap();
        let analysis = analyze_candidates(&inst, &emb, &g, &x, &eps).unwrap();
        let (flipped, gain) = apply_flips(&inst, &x, &analysis).unwrap();
        prop_assert!(gain >= -1e-9);
        prop_assert!(gain >= analysis.guaranteed_gain() - 1e-9);
        for v in 0..n {
            if !analysis.is_candidate(v) {
                prop_assert_eq!(flipped.get(v), x.get(v));
            }
        }
        for c in &analysis.candidates {
            prop_assert_eq!(c.flip, flipped.get(c.vertex) != x.get(c.vertex));
            prop_assert_eq!(c.a.len() + c.b.len() + c.c.len(), inst.degree(c.vertex));
            prop_assert!(c.delta >= 0.0);
        }
    }

    #[test]
    fn integral_points_are_feasible(n in 3usize..9, xs: u64) {
        let x = random_assignment(n, xs);
        let emb = SdpEmbedding::integral(x.as_slice());
        let triples = enumerate_triples(&Max2LinInstance::new(n, vec![]).unwrap(), TriangleMode::All);
        prop_assert_eq!(max_violation(&emb, &triples), 0.0);
    }

    #[test]
    fn orthant_probability_is_monotone(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (pl, ph) = (sheppard(lo).unwrap(), sheppard(hi).unwrap());
        prop_assert!(pl <= ph && (0.0..=0.5).contains(&pl) && (0.0..=0.5).contains(&ph));
    }

    #[test]
    fn band_mass_is_bracketed(eps in 0.0f64..3.0) {
        let (lo, hi) = band_mass_bounds(eps);
        let m = band_mass(eps);
        prop_assert!(lo <= m + 1e-15 && m <= hi + 1e-15);
    }

    #[test]
    fn taylor_partials_stay_below(x in 0.0f64..=1.0, tau in 0usize..300) {
        let p = arcsin_partial(x, tau).unwrap();
        prop_assert!(p <= x.asin() * (1.0 + 4.0 * f64::EPSILON));
        prop_assert!(arcsin_partial(x, tau + 1).unwrap() >= p);
    }
}
