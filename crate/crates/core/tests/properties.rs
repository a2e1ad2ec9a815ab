//! Randomized invariants over permutations, models, coarsening, and
//! aggregation.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use coarserank::aggregate::{argsort_desc, ScoreVector};
use coarserank::coarsening::{coarsen, CoarsenedObservation, CoarseningSpec};
use coarserank::models::{PlParams, RankingModel};
use coarserank::perm::{kendall_distance, Ordering, Ranking};

fn permutation(k: usize) -> impl Strategy<Value = Ranking> {
    Just((1..=k).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Ranking::new(v).unwrap())
}

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..10.0, k)
}

proptest! {
    #[test]
    fn ranking_ordering_inverse(r in (2usize..8).prop_flat_map(permutation)) {
        prop_assert_eq!(r.to_ordering().to_ranking(), r);
    }

    #[test]
    fn kendall_is_a_metric(
        (a, b, c) in (2usize..7).prop_flat_map(|k| (permutation(k), permutation(k), permutation(k)))
    ) {
        let ab = kendall_distance(&a, &b).unwrap();
        let ba = kendall_distance(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(ab == 0, a == b);
        let bc = kendall_distance(&b, &c).unwrap();
        let ac = kendall_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc);
        let max = (a.len() * (a.len() - 1) / 2) as u64;
        prop_assert!(ab <= max);
    }

    #[test]
    fn pl_probability_is_scale_free(
        theta in (2usize..6).prop_flat_map(weights),
        scale in 0.1f64..50.0,
        seed in any::<u64>(),
    ) {
        let k = theta.len();
        let a = PlParams::new(theta.clone()).unwrap();
        let b = PlParams::new(theta.iter().map(|t| t * scale).collect()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let pi = a.sample(&mut rng);
        prop_assert!((RankingModel::probability(&a, &pi) - RankingModel::probability(&b, &pi)).abs() < 1e-12);
        prop_assert_eq!(a.mode(), b.mode());
        let _ = k;
    }

    #[test]
    fn coarsened_pair_respects_the_ranking(
        (r, seed) in (3usize..7).prop_flat_map(|k| (permutation(k), any::<u64>())),
    ) {
        let k = r.len();
        let spec = CoarseningSpec::uniform_pairs(k).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        match coarsen(&r, &spec, &mut rng).unwrap() {
            CoarsenedObservation::Pair(p) => {
                // the winner is the better-ranked of the two
                prop_assert!(r.rank_of(p.winner()) < r.rank_of(p.loser()));
            }
            CoarsenedObservation::Incomplete(_) => prop_assert!(false, "pairwise spec"),
        }
    }

    #[test]
    fn argsort_inverts_strictly_ordered_scores(
        r in (2usize..8).prop_flat_map(permutation),
    ) {
        // score item i by -rank(i): best rank gets the largest score
        let scores: Vec<f64> = (1..=r.len()).map(|i| -(r.rank_of(i) as f64)).collect();
        let predicted = argsort_desc(&ScoreVector::new(scores)).unwrap();
        prop_assert_eq!(predicted, r);
    }

    #[test]
    fn pl_mode_is_weight_order(theta in (2usize..7).prop_flat_map(weights)) {
        let pl = PlParams::new(theta.clone()).unwrap();
        let mode = pl.mode();
        let o = mode.to_ordering();
        for pos in 1..o.len() {
            let prev = theta[o.item_at(pos) - 1];
            let next = theta[o.item_at(pos + 1) - 1];
            prop_assert!(prev >= next);
        }
        let _ = Ordering::identity(theta.len());
    }
}
