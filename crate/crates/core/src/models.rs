//! Distributions over complete rankings: Plackett-Luce, Mallows, and
//! explicitly tabulated distributions.

use std::collections::HashMap;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::perm::{all_orderings, kendall_distance, Ordering, Ranking};

/// A distribution over `S_K` that can be evaluated pointwise and sampled.
pub trait RankingModel {
    fn k(&self) -> usize;

    /// Probability of the complete ranking `pi`.
    fn probability(&self, pi: &Ranking) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> Ranking;

    /// The most probable ranking; ties broken by ascending item index.
    fn mode(&self) -> Ranking;
}

/// Plackett-Luce parameters: strictly positive item weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PlParams {
    theta: Vec<f64>,
}

impl PlParams {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        for (i, &t) in theta.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::NonPositiveWeight { index: i, value: t });
            }
        }
        Ok(Self { theta })
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.theta
    }

    /// Weight of item `i` (1-indexed).
    pub fn weight(&self, i: usize) -> f64 {
        self.theta[i - 1]
    }

    /// Weights scaled to sum 1, for reporting.
    pub fn normalized(&self) -> Vec<f64> {
        let s: f64 = self.theta.iter().sum();
        self.theta.iter().map(|t| t / s).collect()
    }

    /// Stage-wise product of choice probabilities.
    pub fn probability(&self, pi: &Ranking) -> Result<f64> {
        if pi.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: pi.len(),
            });
        }
        let ordering = pi.to_ordering();
        let mut tail: f64 = self.theta.iter().sum();
        let mut p = 1.0;
        for pos in 1..=self.k() {
            let w = self.weight(ordering.item_at(pos));
            p *= w / tail;
            tail -= w;
        }
        Ok(p)
    }

    /// Sequential selection without replacement, proportional to weight.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Ranking {
        let k = self.k();
        let mut remaining: Vec<usize> = (1..=k).collect();
        let mut total: f64 = self.theta.iter().sum();
        let mut items = Vec::with_capacity(k);
        while remaining.len() > 1 {
            let u: f64 = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = remaining.len() - 1;
            for (pos, &item) in remaining.iter().enumerate() {
                acc += self.weight(item);
                if u < acc {
                    chosen = pos;
                    break;
                }
            }
            let item = remaining.swap_remove(chosen);
            total -= self.weight(item);
            items.push(item);
        }
        items.push(remaining[0]);
        Ordering::new(items).expect("sampled ordering is a permutation").to_ranking()
    }

    /// BTL marginal `theta_i / (theta_i + theta_j)`.
    pub fn pairwise_marginal(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::DegeneratePair);
        }
        for idx in [i, j] {
            if idx == 0 || idx > self.k() {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    k: self.k(),
                });
            }
        }
        Ok(self.weight(i) / (self.weight(i) + self.weight(j)))
    }

    /// Marginal over a subset of items: PL with the sub-vector of weights,
    /// in the order the items are given.
    pub fn marginal(&self, items: &[usize]) -> Result<PlParams> {
        if items.is_empty() {
            return Err(Error::EmptyInput("marginal subset".into()));
        }
        let mut theta = Vec::with_capacity(items.len());
        for &i in items {
            if i == 0 || i > self.k() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    k: self.k(),
                });
            }
            theta.push(self.weight(i));
        }
        PlParams::new(theta)
    }

    /// Argsort of the weights in descending order; ties by ascending index.
    pub fn mode(&self) -> Ranking {
        let mut idx: Vec<usize> = (1..=self.k()).collect();
        idx.sort_by(|&a, &b| {
            self.weight(b)
                .partial_cmp(&self.weight(a))
                .unwrap()
                .then(a.cmp(&b))
        });
        Ordering::new(idx).unwrap().to_ranking()
    }
}

impl RankingModel for PlParams {
    fn k(&self) -> usize {
        self.k()
    }

    fn probability(&self, pi: &Ranking) -> f64 {
        PlParams::probability(self, pi).expect("dimension checked by caller")
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Ranking {
        PlParams::sample(self, rng)
    }

    fn mode(&self) -> Ranking {
        PlParams::mode(self)
    }
}

/// Mallows parameters: reference ranking and dispersion `phi >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsParams {
    reference: Ranking,
    phi: f64,
}

impl MallowsParams {
    pub fn new(reference: Ranking, phi: f64) -> Result<Self> {
        if !(phi >= 0.0) || !phi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "Mallows dispersion must be finite and >= 0, got {phi}"
            )));
        }
        Ok(Self { reference, phi })
    }

    pub fn k(&self) -> usize {
        self.reference.len()
    }

    pub fn reference(&self) -> &Ranking {
        &self.reference
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Normalization constant as the closed-form product of geometric sums:
    /// `Z = prod_{i=1..K} (1 + q + ... + q^{i-1})` with `q = exp(-phi)`.
    pub fn normalization(&self) -> f64 {
        let q = (-self.phi).exp();
        let mut z = 1.0;
        let mut geom = 1.0; // 1 + q + ... + q^{i-1}
        for _ in 2..=self.k() {
            geom = geom * q + 1.0;
            z *= geom;
        }
        z
    }

    pub fn probability(&self, pi: &Ranking) -> Result<f64> {
        let d = kendall_distance(pi, &self.reference)? as f64;
        Ok((-self.phi * d).exp() / self.normalization())
    }

    /// Exact sampling by repeated insertion: the item on reference position
    /// `r` is inserted at slot `j <= r` with probability proportional to
    /// `exp(-phi * (r - j))`.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Ranking {
        let k = self.k();
        let q = (-self.phi).exp();
        let reference = self.reference.to_ordering();
        let mut items: Vec<usize> = Vec::with_capacity(k);
        for r in 1..=k {
            // weights q^{r-1}, ..., q^0 for slots 1..=r
            let mut total = 0.0;
            let mut w = 1.0;
            for _ in 0..r {
                total += w;
                w *= q;
            }
            let u: f64 = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut slot = 0; // 0-based from the bottom weight
            let mut w = 1.0;
            for s in 0..r {
                acc += w;
                if u < acc {
                    slot = s;
                    break;
                }
                w *= q;
                slot = s + 1;
            }
            // weight q^{r-j} belongs to slot j; iteration above walks
            // j = r, r-1, ..., 1
            let j = r - slot.min(r - 1);
            items.insert(j - 1, reference.item_at(r));
        }
        Ordering::new(items).expect("insertion keeps a permutation").to_ranking()
    }

    pub fn mode(&self) -> Ranking {
        self.reference.clone()
    }
}

impl RankingModel for MallowsParams {
    fn k(&self) -> usize {
        self.k()
    }

    fn probability(&self, pi: &Ranking) -> f64 {
        MallowsParams::probability(self, pi).expect("dimension checked by caller")
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Ranking {
        MallowsParams::sample(self, rng)
    }

    fn mode(&self) -> Ranking {
        MallowsParams::mode(self)
    }
}

/// An explicitly tabulated distribution over `S_K`. Rankings not listed
/// carry probability zero.
#[derive(Debug, Clone)]
pub struct TabularDistribution {
    k: usize,
    entries: Vec<(Ranking, f64)>,
    index: HashMap<Vec<usize>, f64>,
}

impl TabularDistribution {
    pub fn new(k: usize, entries: Vec<(Ranking, f64)>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut total = 0.0;
        for (r, p) in &entries {
            if r.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: r.len(),
                });
            }
            if !(*p >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "negative probability {p} for ranking {r}"
                )));
            }
            total += p;
            index.insert(r.as_slice().to_vec(), *p);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "tabulated probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { k, entries, index })
    }

    pub fn entries(&self) -> &[(Ranking, f64)] {
        &self.entries
    }
}

impl RankingModel for TabularDistribution {
    fn k(&self) -> usize {
        self.k
    }

    fn probability(&self, pi: &Ranking) -> f64 {
        self.index.get(pi.as_slice()).copied().unwrap_or(0.0)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Ranking {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (r, p) in &self.entries {
            acc += p;
            if u < acc {
                return r.clone();
            }
        }
        self.entries.last().expect("non-empty table").0.clone()
    }

    fn mode(&self) -> Ranking {
        self.entries
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("non-empty table")
            .0
            .clone()
    }
}

/// Sums `model.probability` over all of `S_K`; enumeration oracle used by
/// tests and the exact-q machinery.
pub fn enumerate_probabilities(model: &dyn RankingModel) -> Vec<(Ranking, f64)> {
    all_orderings(model.k())
        .map(|o| {
            let r = o.to_ranking();
            let p = model.probability(&r);
            (r, p)
        })
        .collect()
}
