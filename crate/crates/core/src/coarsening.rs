//! Rank-dependent coarsening: distributions over rank subsets, the sampler
//! turning full rankings into pairwise observations, and the exact
//! coarsened-observation tables q and q'.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::models::RankingModel;
use crate::pairwise::PairwisePreference;
use crate::perm::{all_orderings, Ranking};

/// Largest K for which exact enumeration of `S_K` is permitted.
pub const EXACT_ENUMERATION_LIMIT: usize = 10;

/// A rank-dependent coarsening distribution over subsets of positions.
#[derive(Debug, Clone, PartialEq)]
pub enum CoarseningSpec {
    /// Always select ranks `{first, second}` with `first < second`.
    DegeneratePair {
        k: usize,
        first: usize,
        second: usize,
    },
    /// Every rank pair equally likely: `lambda = 2 / (K^2 - K)`.
    UniformPairs { k: usize },
    /// Explicit probabilities on rank pairs, summing to 1. Stored dense
    /// `k*k` row-major with mass only at `r < s`.
    CustomPairs { k: usize, lambda: Vec<f64> },
    /// Project to ranks `{1, ..., keep}`.
    TopK { k: usize, keep: usize },
    /// Keep rank `r` independently with probability `lambda[r-1]`; weights
    /// strictly decreasing in (0,1).
    IndependentPositions { lambda: Vec<f64> },
}

/// A coarsened observation: a pairwise preference, or a longer incomplete
/// ranking given as the kept items, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoarsenedObservation {
    Pair(PairwisePreference),
    Incomplete(Vec<usize>),
}

impl CoarseningSpec {
    pub fn degenerate_pair(k: usize, first: usize, second: usize) -> Result<Self> {
        if first == 0 || second == 0 || first >= second || second > k {
            return Err(Error::InvalidCoarsening(format!(
                "degenerate pair needs ranks 1 <= i < j <= {k}, got ({first}, {second})"
            )));
        }
        Ok(Self::DegeneratePair { k, first, second })
    }

    pub fn uniform_pairs(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidCoarsening(
                "uniform pair coarsening needs at least two items".into(),
            ));
        }
        Ok(Self::UniformPairs { k })
    }

    /// Builds a custom pairwise spec from `(i, j, lambda)` triples on ranks.
    pub fn custom_pairs(k: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut lambda = vec![0.0; k * k];
        let mut total = 0.0;
        for &(i, j, l) in entries {
            if i == 0 || j == 0 || i >= j || j > k {
                return Err(Error::InvalidCoarsening(format!(
                    "rank pair ({i}, {j}) out of range for K = {k}"
                )));
            }
            if !(l >= 0.0) {
                return Err(Error::InvalidCoarsening(format!(
                    "negative lambda {l} for rank pair ({i}, {j})"
                )));
            }
            lambda[(i - 1) * k + (j - 1)] += l;
            total += l;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCoarsening(format!(
                "pair probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::CustomPairs { k, lambda })
    }

    pub fn top_k(k: usize, keep: usize) -> Result<Self> {
        if keep < 2 || keep > k {
            return Err(Error::InvalidCoarsening(format!(
                "top-k projection needs 2 <= keep <= {k}, got {keep}"
            )));
        }
        Ok(Self::TopK { k, keep })
    }

    pub fn independent_positions(lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::InvalidCoarsening(
                "independent-position coarsening needs at least two ranks".into(),
            ));
        }
        for w in lambda.windows(2) {
            if !(w[0] > w[1]) {
                return Err(Error::InvalidCoarsening(
                    "independent-position weights must be strictly decreasing".into(),
                ));
            }
        }
        if !lambda.iter().all(|&l| l > 0.0 && l < 1.0) {
            return Err(Error::InvalidCoarsening(
                "independent-position weights must lie strictly in (0, 1)".into(),
            ));
        }
        Ok(Self::IndependentPositions { lambda })
    }

    pub fn k(&self) -> usize {
        match self {
            Self::DegeneratePair { k, .. }
            | Self::UniformPairs { k }
            | Self::CustomPairs { k, .. }
            | Self::TopK { k, .. } => *k,
            Self::IndependentPositions { lambda } => lambda.len(),
        }
    }

    /// Whether the spec yields pairwise observations. Top-2 projection is
    /// the degenerate pair on ranks (1, 2); longer top-k is not pairwise.
    /// Independent positions count as pairwise through conditioning on
    /// subsets of size two.
    pub fn is_pairwise(&self) -> bool {
        match self {
            Self::TopK { keep, .. } => *keep == 2,
            _ => true,
        }
    }

    /// The distribution over rank pairs, dense `k*k` with mass at `r < s`.
    /// For independent positions this is the law conditioned on exactly two
    /// surviving ranks.
    pub fn pairwise_lambda(&self) -> Result<Vec<f64>> {
        let k = self.k();
        match self {
            Self::DegeneratePair { first, second, .. } => {
                let mut t = vec![0.0; k * k];
                t[(first - 1) * k + (second - 1)] = 1.0;
                Ok(t)
            }
            Self::UniformPairs { .. } => {
                let l = 2.0 / ((k * k - k) as f64);
                let mut t = vec![0.0; k * k];
                for r in 0..k {
                    for s in (r + 1)..k {
                        t[r * k + s] = l;
                    }
                }
                Ok(t)
            }
            Self::CustomPairs { lambda, .. } => Ok(lambda.clone()),
            Self::TopK { keep: 2, .. } => {
                let mut t = vec![0.0; k * k];
                t[1] = 1.0; // ranks (1, 2)
                Ok(t)
            }
            Self::TopK { .. } => Err(Error::NotPairwise),
            Self::IndependentPositions { lambda } => {
                let mut t = vec![0.0; k * k];
                let all_drop: f64 = lambda.iter().map(|l| 1.0 - l).product();
                let mut total = 0.0;
                for r in 0..k {
                    for s in (r + 1)..k {
                        let w = all_drop / (1.0 - lambda[r]) / (1.0 - lambda[s])
                            * lambda[r]
                            * lambda[s];
                        t[r * k + s] = w;
                        total += w;
                    }
                }
                if total <= 0.0 {
                    return Err(Error::InvalidCoarsening(
                        "independent-position law puts no mass on pairs".into(),
                    ));
                }
                for v in &mut t {
                    *v /= total;
                }
                Ok(t)
            }
        }
    }

    /// Same pair distribution in exact rational arithmetic. Float-specified
    /// weights are converted exactly (every f64 is rational).
    pub fn pairwise_lambda_rational(&self) -> Result<Vec<BigRational>> {
        let k = self.k();
        match self {
            Self::DegeneratePair { first, second, .. } => {
                let mut t = vec![BigRational::zero(); k * k];
                t[(first - 1) * k + (second - 1)] = BigRational::one();
                Ok(t)
            }
            Self::UniformPairs { .. } => {
                let l = BigRational::new(BigInt::from(2), BigInt::from(k * k - k));
                let mut t = vec![BigRational::zero(); k * k];
                for r in 0..k {
                    for s in (r + 1)..k {
                        t[r * k + s] = l.clone();
                    }
                }
                Ok(t)
            }
            Self::TopK { keep: 2, .. } => {
                let mut t = vec![BigRational::zero(); k * k];
                t[1] = BigRational::one();
                Ok(t)
            }
            _ => {
                let float = self.pairwise_lambda()?;
                Ok(float
                    .into_iter()
                    .map(|v| BigRational::from_float(v).unwrap_or_else(BigRational::zero))
                    .collect())
            }
        }
    }
}

fn draw_rank_pair(lambda: &[f64], k: usize, rng: &mut dyn RngCore) -> (usize, usize) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = (1, 2);
    for r in 0..k {
        for s in (r + 1)..k {
            let l = lambda[r * k + s];
            if l <= 0.0 {
                continue;
            }
            acc += l;
            last = (r + 1, s + 1);
            if u < acc {
                return last;
            }
        }
    }
    last
}

/// Draws a rank subset from `spec` and projects the ordering of `pi` onto
/// it. Item identities never influence the draw.
pub fn coarsen(
    pi: &Ranking,
    spec: &CoarseningSpec,
    rng: &mut dyn RngCore,
) -> Result<CoarsenedObservation> {
    let k = pi.len();
    if spec.k() != k {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            got: k,
        });
    }
    let ordering = pi.to_ordering();
    match spec {
        CoarseningSpec::TopK { keep, .. } if *keep > 2 => Ok(CoarsenedObservation::Incomplete(
            (1..=*keep).map(|r| ordering.item_at(r)).collect(),
        )),
        CoarseningSpec::IndependentPositions { lambda } => {
            let kept: Vec<usize> = (1..=k)
                .filter(|&r| rng.gen::<f64>() < lambda[r - 1])
                .map(|r| ordering.item_at(r))
                .collect();
            if kept.len() == 2 {
                Ok(CoarsenedObservation::Pair(PairwisePreference::new(
                    kept[0], kept[1],
                )?))
            } else {
                Ok(CoarsenedObservation::Incomplete(kept))
            }
        }
        _ => {
            let lambda = spec.pairwise_lambda()?;
            let (r, s) = draw_rank_pair(&lambda, k, rng);
            Ok(CoarsenedObservation::Pair(PairwisePreference::new(
                ordering.item_at(r),
                ordering.item_at(s),
            )?))
        }
    }
}

/// Draws `n` i.i.d. pairwise observations: full ranking from `model`, then
/// a rank pair from `spec`. For independent positions the subset law is
/// conditioned on exactly two surviving ranks.
pub fn generate_pairwise_dataset(
    model: &dyn RankingModel,
    spec: &CoarseningSpec,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<PairwisePreference>> {
    if !spec.is_pairwise() {
        return Err(Error::NotPairwise);
    }
    let k = model.k();
    if spec.k() != k {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            got: k,
        });
    }
    let lambda = spec.pairwise_lambda()?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let pi = model.sample(rng);
        let ordering = pi.to_ordering();
        let (r, s) = draw_rank_pair(&lambda, k, rng);
        out.push(PairwisePreference::new(
            ordering.item_at(r),
            ordering.item_at(s),
        )?);
    }
    Ok(out)
}

/// Exact probabilities of coarsened pairwise observations, together with
/// the marginal preference probabilities of the underlying distribution.
#[derive(Debug, Clone)]
pub struct ExactQTable {
    k: usize,
    q: Vec<f64>,
    p: Vec<f64>,
}

impl ExactQTable {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Probability of observing `a_i > a_j` after coarsening.
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[(i - 1) * self.k + (j - 1)]
    }

    /// Marginal probability that `a_i` precedes `a_j` in a full ranking.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[(i - 1) * self.k + (j - 1)]
    }

    /// Conditional win probability `q_{i,j} / (q_{i,j} + q_{j,i})`;
    /// `None` when the pair carries no mass at all.
    pub fn qprime(&self, i: usize, j: usize) -> Option<f64> {
        let denom = self.q(i, j) + self.q(j, i);
        if denom > 0.0 {
            Some(self.q(i, j) / denom)
        } else {
            None
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Enumerates `S_K` and computes `q_{i,j}` per the two-stage model. Works
/// for any enumerable ranking distribution. Hard error above
/// [`EXACT_ENUMERATION_LIMIT`]: the oracle never silently samples.
pub fn exact_q(model: &dyn RankingModel, spec: &CoarseningSpec) -> Result<ExactQTable> {
    let k = model.k();
    if k > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooManyItems {
            k,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    if spec.k() != k {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            got: k,
        });
    }
    let lambda = spec.pairwise_lambda()?;
    let mut q = vec![0.0; k * k];
    let mut p = vec![0.0; k * k];
    for ordering in all_orderings(k) {
        let ranking = ordering.to_ranking();
        let prob = model.probability(&ranking);
        if prob == 0.0 {
            continue;
        }
        for r in 1..=k {
            let a = ordering.item_at(r);
            for s in (r + 1)..=k {
                let b = ordering.item_at(s);
                p[(a - 1) * k + (b - 1)] += prob;
                let l = lambda[(r - 1) * k + (s - 1)];
                if l > 0.0 {
                    q[(a - 1) * k + (b - 1)] += prob * l;
                }
            }
        }
    }
    Ok(ExactQTable { k, q, p })
}

/// [`ExactQTable`] in exact rational arithmetic, for integral PL weights.
#[derive(Debug, Clone)]
pub struct RationalQTable {
    k: usize,
    q: Vec<BigRational>,
    p: Vec<BigRational>,
}

impl RationalQTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self, i: usize, j: usize) -> &BigRational {
        &self.q[(i - 1) * self.k + (j - 1)]
    }

    pub fn p(&self, i: usize, j: usize) -> &BigRational {
        &self.p[(i - 1) * self.k + (j - 1)]
    }

    pub fn qprime(&self, i: usize, j: usize) -> Option<BigRational> {
        let denom = self.q(i, j) + self.q(j, i);
        if denom.is_zero() {
            None
        } else {
            Some(self.q(i, j) / denom)
        }
    }
}

/// Exact q for a PL model with integer weights, enumerating `S_K` in
/// rational arithmetic.
pub fn exact_q_rational(theta: &[i64], spec: &CoarseningSpec) -> Result<RationalQTable> {
    let k = theta.len();
    if k > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooManyItems {
            k,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    if spec.k() != k {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            got: k,
        });
    }
    for (i, &t) in theta.iter().enumerate() {
        if t <= 0 {
            return Err(Error::NonPositiveWeight {
                index: i,
                value: t as f64,
            });
        }
    }
    let lambda = spec.pairwise_lambda_rational()?;
    let rat = |n: i64| BigRational::from_integer(BigInt::from(n));
    let mut q = vec![BigRational::zero(); k * k];
    let mut p = vec![BigRational::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                p[i * k + j] = rat(theta[i]) / rat(theta[i] + theta[j]);
            }
        }
    }
    for ordering in all_orderings(k) {
        let mut prob = BigRational::one();
        let mut tail: i64 = theta.iter().sum();
        for r in 1..=k {
            let w = theta[ordering.item_at(r) - 1];
            prob *= rat(w) / rat(tail);
            tail -= w;
        }
        for r in 1..=k {
            for s in (r + 1)..=k {
                let l = &lambda[(r - 1) * k + (s - 1)];
                if !l.is_zero() {
                    let a = ordering.item_at(r);
                    let b = ordering.item_at(s);
                    q[(a - 1) * k + (b - 1)] += &prob * l;
                }
            }
        }
    }
    Ok(RationalQTable { k, q, p })
}

/// Sign agreement between `p_{i,j} - 1/2` and `q'_{i,j} - 1/2` for one
/// unordered item pair.
#[derive(Debug, Clone)]
pub struct PairPreservation {
    pub i: usize,
    pub j: usize,
    pub p: f64,
    pub qprime: Option<f64>,
    pub preserved: bool,
}

/// Result of checking order preservation across all item pairs.
#[derive(Debug, Clone)]
pub struct OrderPreservationReport {
    pub pairs: Vec<PairPreservation>,
}

impl OrderPreservationReport {
    pub fn violations(&self) -> usize {
        self.pairs.iter().filter(|p| !p.preserved).count()
    }

    pub fn all_preserved(&self) -> bool {
        self.violations() == 0
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Compares the sign of `p_{i,j} - 1/2` with the sign of `q'_{i,j} - 1/2`
/// for every item pair. For PL models all pairs agree; general
/// distributions may violate. A pair with undefined q' counts as preserved
/// only if `p_{i,j} = 1/2`.
pub fn check_order_preservation(
    model: &dyn RankingModel,
    spec: &CoarseningSpec,
) -> Result<OrderPreservationReport> {
    let table = exact_q(model, spec)?;
    let k = table.k();
    let mut pairs = Vec::new();
    for i in 1..=k {
        for j in (i + 1)..=k {
            let p = table.p(i, j);
            let qp = table.qprime(i, j);
            let preserved = match qp {
                Some(v) => sign(p - 0.5) == sign(v - 0.5),
                None => sign(p - 0.5) == 0,
            };
            pairs.push(PairPreservation {
                i,
                j,
                p,
                qprime: qp,
                preserved,
            });
        }
    }
    Ok(OrderPreservationReport { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{MallowsParams, PlParams, TabularDistribution};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn pl_14_5_1() -> PlParams {
        PlParams::new(vec![14.0, 5.0, 1.0]).unwrap()
    }

    fn top2(k: usize) -> CoarseningSpec {
        CoarseningSpec::degenerate_pair(k, 1, 2).unwrap()
    }

    #[test]
    fn degenerate_projection_is_deterministic() {
        let pi = Ranking::new(vec![2, 4, 3, 1, 5]).unwrap();
        let spec = top2(5);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        match coarsen(&pi, &spec, &mut rng).unwrap() {
            CoarsenedObservation::Pair(p) => {
                assert_eq!(p.winner(), 4);
                assert_eq!(p.loser(), 1);
            }
            other => panic!("expected a pair, got {other:?}"),
        }
    }

    #[test]
    fn top3_projection_is_deterministic() {
        let pi = Ranking::new(vec![2, 4, 3, 1, 5]).unwrap();
        let spec = CoarseningSpec::top_k(5, 3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        match coarsen(&pi, &spec, &mut rng).unwrap() {
            CoarsenedObservation::Incomplete(items) => assert_eq!(items, vec![4, 1, 3]),
            other => panic!("expected incomplete ranking, got {other:?}"),
        }
    }

    #[test]
    fn uniform_pairs_select_each_rank_pair_equally() {
        let pi = Ranking::new(vec![3, 1, 2]).unwrap();
        let spec = CoarseningSpec::uniform_pairs(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let n = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            if let CoarsenedObservation::Pair(p) = coarsen(&pi, &spec, &mut rng).unwrap() {
                *counts.entry((p.winner(), p.loser())).or_insert(0u64) += 1;
            }
        }
        assert_eq!(counts.len(), 3);
        let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / n as f64).sqrt();
        for (_, c) in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn rank_dependence_identical_pair_law_across_rankings() {
        // The distribution over selected rank pairs must not depend on the
        // ranking being coarsened.
        let spec = CoarseningSpec::custom_pairs(3, &[(1, 2, 0.5), (1, 3, 0.3), (2, 3, 0.2)])
            .unwrap();
        let expected = [0.5, 0.3, 0.2];
        let n = 100_000;
        for ranks in [vec![1, 2, 3], vec![3, 1, 2]] {
            let pi = Ranking::new(ranks).unwrap();
            let ordering = pi.to_ordering();
            let mut rng = ChaCha12Rng::seed_from_u64(77);
            let mut counts = [0u64; 3];
            for _ in 0..n {
                if let CoarsenedObservation::Pair(p) = coarsen(&pi, &spec, &mut rng).unwrap() {
                    // recover which rank pair was drawn from the items
                    let wr = pi.rank_of(p.winner());
                    let lr = pi.rank_of(p.loser());
                    assert_eq!(ordering.item_at(wr), p.winner());
                    let slot = match (wr, lr) {
                        (1, 2) => 0,
                        (1, 3) => 1,
                        (2, 3) => 2,
                        other => panic!("unexpected rank pair {other:?}"),
                    };
                    counts[slot] += 1;
                }
            }
            let chi2: f64 = counts
                .iter()
                .zip(expected.iter())
                .map(|(&c, &e)| {
                    let exp = e * n as f64;
                    (c as f64 - exp).powi(2) / exp
                })
                .sum();
            // 2 degrees of freedom; 99.9th percentile about 13.8
            assert!(chi2 < 16.0, "chi-square {chi2}");
        }
    }

    #[test]
    fn exact_q_reproduces_worked_example() {
        let table = exact_q(&pl_14_5_1(), &top2(3)).unwrap();
        let d = 1140.0;
        assert_abs_diff_eq!(table.q(1, 2), 665.0 / d, epsilon = 1e-12);
        assert_abs_diff_eq!(table.q(1, 3), 133.0 / d, epsilon = 1e-12);
        assert_abs_diff_eq!(table.q(2, 3), 19.0 / d, epsilon = 1e-12);
        assert_abs_diff_eq!(table.q(2, 1), 266.0 / d, epsilon = 1e-12);
        assert_abs_diff_eq!(table.q(3, 1), 42.0 / d, epsilon = 1e-12);
        assert_abs_diff_eq!(table.q(3, 2), 15.0 / d, epsilon = 1e-12);
        assert_abs_diff_eq!(table.qprime(1, 2).unwrap(), 665.0 / 931.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.qprime(1, 3).unwrap(), 133.0 / 175.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.qprime(2, 3).unwrap(), 19.0 / 34.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_q_rational_reproduces_worked_example() {
        let table = exact_q_rational(&[14, 5, 1], &top2(3)).unwrap();
        let frac = |n: i64, d: i64| {
            BigRational::new(BigInt::from(n), BigInt::from(d))
        };
        assert_eq!(*table.q(1, 2), frac(665, 1140));
        assert_eq!(*table.q(1, 3), frac(133, 1140));
        assert_eq!(*table.q(2, 3), frac(19, 1140));
        assert_eq!(*table.q(2, 1), frac(266, 1140));
        assert_eq!(*table.q(3, 1), frac(42, 1140));
        assert_eq!(*table.q(3, 2), frac(15, 1140));
        assert_eq!(table.qprime(1, 2).unwrap(), frac(665, 931));
        assert_eq!(table.qprime(1, 3).unwrap(), frac(133, 175));
        assert_eq!(table.qprime(2, 3).unwrap(), frac(19, 34));
        assert_eq!(*table.p(1, 2), frac(840, 1140));
    }

    #[test]
    fn uniform_lambda_is_neutral() {
        let pl = PlParams::new(vec![3.0, 1.5, 0.7, 2.2]).unwrap();
        let spec = CoarseningSpec::uniform_pairs(4).unwrap();
        let table = exact_q(&pl, &spec).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                if i != j {
                    assert_abs_diff_eq!(
                        table.qprime(i, j).unwrap(),
                        pl.pairwise_marginal(i, j).unwrap(),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn generated_frequencies_match_worked_example() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let n = 114_000;
        let data = generate_pairwise_dataset(&pl_14_5_1(), &top2(3), n, &mut rng).unwrap();
        let wins = data
            .iter()
            .filter(|p| p.winner() == 1 && p.loser() == 2)
            .count() as f64;
        let q = 665.0 / 1140.0;
        let sigma = (q * (1.0 - q) * n as f64).sqrt();
        assert!((wins - q * n as f64).abs() < 3.0 * sigma);
    }

    #[test]
    fn generated_frequencies_match_mallows_oracle() {
        let m = MallowsParams::new(Ranking::new(vec![1, 2, 3]).unwrap(), 1.0).unwrap();
        let spec = CoarseningSpec::degenerate_pair(3, 2, 3).unwrap();
        let table = exact_q(&m, &spec).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let n = 100_000usize;
        let data = generate_pairwise_dataset(&m, &spec, n, &mut rng).unwrap();
        let mut counts = vec![0u64; 9];
        for p in &data {
            counts[(p.winner() - 1) * 3 + (p.loser() - 1)] += 1;
        }
        for i in 1..=3 {
            for j in 1..=3 {
                if i == j {
                    continue;
                }
                let expected = table.q(i, j);
                let observed = counts[(i - 1) * 3 + (j - 1)] as f64 / n as f64;
                let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
                assert!(
                    (observed - expected).abs() < 3.5 * sigma + 1e-9,
                    "cell ({i},{j}): observed {observed}, expected {expected}"
                );
            }
        }
    }

    #[test]
    fn uniform_theta_uniform_lambda_full_symmetry() {
        let pl = PlParams::new(vec![1.0, 1.0, 1.0]).unwrap();
        let spec = CoarseningSpec::uniform_pairs(3).unwrap();
        let table = exact_q(&pl, &spec).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                if i != j {
                    assert_abs_diff_eq!(table.q(i, j), 1.0 / 6.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_pairwise_spec_rejected_for_generation() {
        let spec = CoarseningSpec::top_k(4, 3).unwrap();
        let pl = PlParams::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(matches!(
            generate_pairwise_dataset(&pl, &spec, 10, &mut rng),
            Err(Error::NotPairwise)
        ));
    }

    #[test]
    fn enumeration_limit_enforced() {
        let theta: Vec<f64> = (1..=11).map(|i| i as f64).collect();
        let pl = PlParams::new(theta).unwrap();
        let spec = CoarseningSpec::uniform_pairs(11).unwrap();
        assert!(matches!(
            exact_q(&pl, &spec),
            Err(Error::TooManyItems { .. })
        ));
    }

    #[test]
    fn order_preservation_holds_for_pl() {
        let report = check_order_preservation(&pl_14_5_1(), &top2(3)).unwrap();
        assert!(report.all_preserved());
    }

    #[test]
    fn order_preservation_counterexample_detected() {
        let t = TabularDistribution::new(
            3,
            vec![
                (Ranking::new(vec![1, 2, 3]).unwrap(), 0.8),
                (Ranking::new(vec![3, 1, 2]).unwrap(), 0.1),
                (Ranking::new(vec![3, 2, 1]).unwrap(), 0.1),
            ],
        )
        .unwrap();
        let spec = CoarseningSpec::degenerate_pair(3, 2, 3).unwrap();
        let table = exact_q(&t, &spec).unwrap();
        assert_abs_diff_eq!(table.p(1, 2), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(table.p(1, 3), 0.8, epsilon = 1e-12);
        assert_eq!(table.qprime(1, 2), Some(0.0));
        assert_eq!(table.qprime(1, 3), Some(0.0));
        let report = check_order_preservation(&t, &spec).unwrap();
        assert_eq!(report.violations(), 2);
    }

    #[test]
    fn independent_positions_validation() {
        assert!(CoarseningSpec::independent_positions(vec![0.9, 0.5, 0.2]).is_ok());
        assert!(CoarseningSpec::independent_positions(vec![0.5, 0.9]).is_err());
        assert!(CoarseningSpec::independent_positions(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn independent_positions_conditional_pair_law() {
        let spec = CoarseningSpec::independent_positions(vec![0.9, 0.5, 0.2]).unwrap();
        let lambda = spec.pairwise_lambda().unwrap();
        let total: f64 = lambda.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        // joint subset masses, conditioned on |A| = 2
        let m12 = 0.9 * 0.5 * 0.8;
        let m13 = 0.9 * 0.5 * 0.2;
        let m23 = 0.1 * 0.5 * 0.2;
        let z = m12 + m13 + m23;
        assert_abs_diff_eq!(lambda[1], m12 / z, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda[2], m13 / z, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda[5], m23 / z, epsilon = 1e-12);
    }

    #[test]
    fn premise_implies_q_direction() {
        // distributions where p(pi) >= p(swapped pi) on E(a_i > a_j)
        // must yield q_{i,j} > q_{j,i}; PL with theta_i > theta_j
        // satisfies the premise for every lambda.
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..50 {
            let k = 3 + (rng.gen::<u64>() % 3) as usize;
            let mut theta: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.1).collect();
            theta.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let pl = PlParams::new(theta).unwrap();
            let mut entries = Vec::new();
            let mut rest = 1.0;
            for i in 1..=k {
                for j in (i + 1)..=k {
                    let l = rng.gen::<f64>() * rest;
                    entries.push((i, j, l));
                    rest -= l;
                }
            }
            let last = entries.len() - 1;
            entries[last].2 += rest;
            let spec = CoarseningSpec::custom_pairs(k, &entries).unwrap();
            let table = exact_q(&pl, &spec).unwrap();
            for i in 1..=k {
                for j in (i + 1)..=k {
                    assert!(table.q(i, j) > table.q(j, i), "items ({i},{j})");
                }
            }
        }
    }
}
