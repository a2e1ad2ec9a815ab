//! The fifteen rank aggregation methods, plus the shared numerical kernels
//! (MM iteration, least squares, stationary distributions, subset dynamic
//! programming for linear ordering, fixed-point coupling, constrained
//! quadratic solve).
//!
//! Score orientation: every method returns a [`ScoreVector`] where higher
//! means preferred. The printed transition matrices of RC, MC3 and WU1
//! accumulate stationary mass at dominated items, so their scores are the
//! negated stationary distribution; MC2 accumulates mass at winners and is
//! used as is. The convention is pinned by the two-item majority test and
//! the consistency harness.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pairwise::{ComparisonMatrix, ProbabilityMatrix, UndefinedPolicy};
use crate::perm::{Ordering, Ranking};

/// Per-item strengths; higher means preferred.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Self {
        Self { scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    /// Score of item `i` (1-indexed).
    pub fn score(&self, i: usize) -> f64 {
        self.scores[i - 1]
    }
}

/// Row-stochastic transition probabilities.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    k: usize,
    q: Vec<f64>,
}

impl TransitionMatrix {
    pub fn new(k: usize, q: Vec<f64>) -> Result<Self> {
        assert_eq!(q.len(), k * k);
        for row in 0..k {
            let mut sum = 0.0;
            for col in 0..k {
                let v = q[row * k + col];
                if v < -1e-12 {
                    return Err(Error::NonStochastic { row: row + 1, sum: v });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-10 {
                return Err(Error::NonStochastic { row: row + 1, sum });
            }
        }
        Ok(Self { k, q })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[(i - 1) * self.k + (j - 1)]
    }
}

/// Run flags surfaced to the experiment harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// The printed transition matrix was not row-stochastic and was rescaled.
    pub normalized: bool,
    /// Stationary computation fell back to teleportation mixing.
    pub teleported: bool,
}

impl Diagnostics {
    pub fn merge(&mut self, other: Diagnostics) {
        self.normalized |= other.normalized;
        self.teleported |= other.teleported;
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.normalized {
            v.push("normalized");
        }
        if self.teleported {
            v.push("teleported");
        }
        v
    }
}

/// The closed catalog of aggregation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodId {
    Btl,
    BtlR,
    Ls,
    Borda,
    Copeland,
    Rc,
    Mc2,
    Mc3,
    Fas,
    FasR,
    FasB,
    Ht,
    Price,
    Wu1,
    Wu2,
}

impl MethodId {
    pub const ALL: [MethodId; 15] = [
        MethodId::Btl,
        MethodId::BtlR,
        MethodId::Ls,
        MethodId::Borda,
        MethodId::Copeland,
        MethodId::Rc,
        MethodId::Mc2,
        MethodId::Mc3,
        MethodId::Fas,
        MethodId::FasR,
        MethodId::FasB,
        MethodId::Ht,
        MethodId::Price,
        MethodId::Wu1,
        MethodId::Wu2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodId::Btl => "BTL",
            MethodId::BtlR => "BTL_R",
            MethodId::Ls => "LS",
            MethodId::Borda => "Borda",
            MethodId::Copeland => "Copeland",
            MethodId::Rc => "RC",
            MethodId::Mc2 => "MC2",
            MethodId::Mc3 => "MC3",
            MethodId::Fas => "FAS",
            MethodId::FasR => "FAS_R",
            MethodId::FasB => "FAS_B",
            MethodId::Ht => "HT",
            MethodId::Price => "Price",
            MethodId::Wu1 => "WU1",
            MethodId::Wu2 => "WU2",
        }
    }
}

impl std::fmt::Display for MethodId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "btl" => Ok(MethodId::Btl),
            "btlr" => Ok(MethodId::BtlR),
            "ls" | "hodgerank" => Ok(MethodId::Ls),
            "borda" => Ok(MethodId::Borda),
            "copeland" | "cp" => Ok(MethodId::Copeland),
            "rc" | "rankcentrality" => Ok(MethodId::Rc),
            "mc2" => Ok(MethodId::Mc2),
            "mc3" => Ok(MethodId::Mc3),
            "fas" => Ok(MethodId::Fas),
            "fasr" => Ok(MethodId::FasR),
            "fasb" => Ok(MethodId::FasB),
            "ht" => Ok(MethodId::Ht),
            "price" => Ok(MethodId::Price),
            "wu1" => Ok(MethodId::Wu1),
            "wu2" => Ok(MethodId::Wu2),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

/// Item with the largest score gets rank 1; ties broken by ascending item
/// index.
pub fn argsort_desc(s: &ScoreVector) -> Result<Ranking> {
    for (i, &v) in s.as_slice().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteScore { index: i });
        }
    }
    let mut idx: Vec<usize> = (1..=s.len()).collect();
    idx.sort_by(|&a, &b| {
        s.score(b)
            .partial_cmp(&s.score(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    Ok(Ordering::new(idx).unwrap().to_ranking())
}

// ---------------------------------------------------------------------------
// statistical estimation

fn strongly_connected(k: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..k {
                if !seen[v] {
                    let connected = if forward { edge(u, v) } else { edge(v, u) };
                    if connected {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

const BTL_TOL: f64 = 1e-10;
const BTL_MAX_ITER: usize = 200_000;

/// Maximum likelihood BTL strengths via minorization-maximization.
///
/// With `weighted` set, the win weights are the relative frequencies
/// (the BTL(R) variant); otherwise the raw counts. A comparison graph that
/// is not two-way connected is an explicit estimation error.
pub fn btl_mle(c: &ComparisonMatrix, weighted: bool) -> Result<ScoreVector> {
    let k = c.k();
    let mut w = vec![0.0f64; k * k];
    for i in 1..=k {
        for j in 1..=k {
            if i == j {
                continue;
            }
            let n = c.count(i, j) + c.count(j, i);
            w[(i - 1) * k + (j - 1)] = if weighted {
                if n > 0 {
                    c.count(i, j) as f64 / n as f64
                } else {
                    0.0
                }
            } else {
                c.count(i, j) as f64
            };
        }
    }
    if !strongly_connected(k, |u, v| w[u * k + v] > 0.0) {
        return Err(Error::DisconnectedComparisons);
    }
    let wins: Vec<f64> = (0..k).map(|i| (0..k).map(|j| w[i * k + j]).sum()).collect();
    let mut theta = vec![1.0 / k as f64; k];
    let mut converged = false;
    for _ in 0..BTL_MAX_ITER {
        let mut next = vec![0.0; k];
        for i in 0..k {
            let mut denom = 0.0;
            for j in 0..k {
                if i == j {
                    continue;
                }
                let n = w[i * k + j] + w[j * k + i];
                if n > 0.0 {
                    denom += n / (theta[i] + theta[j]);
                }
            }
            next[i] = wins[i] / denom;
        }
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        let delta = theta
            .iter()
            .zip(&next)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0f64, f64::max);
        theta = next;
        if delta <= BTL_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::DisconnectedComparisons);
    }
    // stationarity residual of the likelihood equations
    for i in 0..k {
        let mut denom = 0.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let n = w[i * k + j] + w[j * k + i];
            if n > 0.0 {
                denom += n / (theta[i] + theta[j]);
            }
        }
        let scale = wins[i].max(1.0);
        debug_assert!((wins[i] - theta[i] * denom).abs() <= 1e-8 * scale);
    }
    Ok(ScoreVector::new(theta))
}

/// HodgeRank: least squares fit of score differences to pairwise log odds.
///
/// The printed objective fits `theta_j - theta_i` to
/// `log(p_{i,j}/p_{j,i})`, which makes dominated items large; the returned
/// scores are negated so that higher means preferred.
pub fn hodgerank_ls(p: &ProbabilityMatrix) -> Result<ScoreVector> {
    let k = p.k();
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..=k {
        for j in (i + 1)..=k {
            let pij = p.value(i, j);
            let pji = p.value(j, i);
            let x = if pji > 0.0 && pji < 1.0 && p.get(i, j).is_some() {
                (pij / pji).ln()
            } else {
                0.0
            };
            if x != 0.0 {
                rows.push((i, j, x));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    let a = DMatrix::from_fn(rows.len(), k, |r, c| {
        let (i, j, _) = rows[r];
        if c + 1 == j {
            1.0
        } else if c + 1 == i {
            -1.0
        } else {
            0.0
        }
    });
    let b = DVector::from_fn(rows.len(), |r, _| rows[r].2);
    let svd = a.svd(true, true);
    let theta = svd.solve(&b, 1e-12).map_err(|_| Error::SingularSystem)?;
    let mean = theta.iter().sum::<f64>() / k as f64;
    Ok(ScoreVector::new(
        theta.iter().map(|t| -(t - mean)).collect(),
    ))
}

// ---------------------------------------------------------------------------
// voting

/// Borda: sum of weighted votes in favor of each item.
pub fn borda(p: &ProbabilityMatrix) -> ScoreVector {
    let k = p.k();
    let scores = (1..=k)
        .map(|i| {
            (1..=k)
                .filter(|&j| j != i)
                .filter_map(|j| p.get(i, j))
                .sum()
        })
        .collect();
    ScoreVector::new(scores)
}

/// Copeland: number of strict majority wins.
pub fn copeland(p: &ProbabilityMatrix) -> ScoreVector {
    let k = p.k();
    let scores = (1..=k)
        .map(|i| {
            (1..=k)
                .filter(|&j| j != i)
                .filter(|&j| p.get(i, j).map_or(false, |v| v > 0.5))
                .count() as f64
        })
        .collect();
    ScoreVector::new(scores)
}

// ---------------------------------------------------------------------------
// spectral

const STATIONARY_TOL: f64 = 1e-10;
const STATIONARY_MAX_ITER: usize = 1_000_000;
const TELEPORT_BETA: f64 = 1e-6;

fn power_iterate(k: usize, q: &[f64], max_iter: usize) -> Option<Vec<f64>> {
    let mut x = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    for iter in 0..max_iter {
        // after an initial plain phase, average with the current iterate so
        // periodic chains settle on their stationary distribution
        let lazy = iter >= 5_000;
        for v in next.iter_mut() {
            *v = 0.0;
        }
        for i in 0..k {
            let xi = x[i];
            for j in 0..k {
                next[j] += xi * q[i * k + j];
            }
        }
        let residual: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        if lazy {
            for (n, o) in next.iter_mut().zip(&x) {
                *n = 0.5 * *n + 0.5 * o;
            }
        }
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        std::mem::swap(&mut x, &mut next);
        if residual <= STATIONARY_TOL {
            return Some(x);
        }
    }
    None
}

/// Stationary distribution by power iteration. Reducible chains fall back
/// to teleportation mixing toward uniform (reported via `diag`).
pub fn stationary_distribution(q: &TransitionMatrix, diag: &mut Diagnostics) -> Result<Vec<f64>> {
    let k = q.k();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let irreducible = strongly_connected(k, |u, v| u != v && q.q[u * k + v] > 1e-15);
    let teleport = |m: &[f64]| -> Vec<f64> {
        m.iter()
            .map(|v| (1.0 - TELEPORT_BETA) * v + TELEPORT_BETA / k as f64)
            .collect()
    };
    if !irreducible {
        diag.teleported = true;
        let mixed = teleport(&q.q);
        return power_iterate(k, &mixed, STATIONARY_MAX_ITER)
            .ok_or(Error::StationaryDiverged {
                max_iter: STATIONARY_MAX_ITER,
            });
    }
    if let Some(x) = power_iterate(k, &q.q, STATIONARY_MAX_ITER) {
        return Ok(x);
    }
    diag.teleported = true;
    let mixed = teleport(&q.q);
    power_iterate(k, &mixed, STATIONARY_MAX_ITER).ok_or(Error::StationaryDiverged {
        max_iter: STATIONARY_MAX_ITER,
    })
}

/// Rescales a printed transition matrix into a row-stochastic one without
/// distorting relative rates: divides every row by the maximum row sum and
/// completes the diagonal. Per-row normalization would rescale rows
/// unevenly and can erase the preference magnitudes entirely (two items,
/// printed MC2), so a single global factor is used.
fn normalize_printed(k: usize, raw: Vec<f64>, diag: &mut Diagnostics) -> Result<TransitionMatrix> {
    let mut max_sum = 0.0f64;
    let mut stochastic = true;
    for i in 0..k {
        let sum: f64 = (0..k).map(|j| raw[i * k + j]).sum();
        if (sum - 1.0).abs() > 1e-9 {
            stochastic = false;
        }
        max_sum = max_sum.max(sum);
    }
    if stochastic {
        return TransitionMatrix::new(k, raw);
    }
    diag.normalized = true;
    if max_sum <= 0.0 {
        // no preference mass at all: uniform chain
        return TransitionMatrix::new(k, vec![1.0 / k as f64; k * k]);
    }
    let mut q = vec![0.0; k * k];
    for i in 0..k {
        let mut sum = 0.0;
        for j in 0..k {
            let v = raw[i * k + j].max(0.0) / max_sum;
            q[i * k + j] = v;
            sum += v;
        }
        q[i * k + i] += 1.0 - sum;
    }
    TransitionMatrix::new(k, q)
}

fn val(p: &ProbabilityMatrix, i: usize, j: usize) -> f64 {
    if i == j {
        0.0
    } else {
        p.get(i, j).unwrap_or(0.0)
    }
}

/// Rank centrality: stationary scores of the printed chain
/// `Q_{i,j} = p_{i,j}/K`, diagonal completing against the column mass.
pub fn rank_centrality(p: &ProbabilityMatrix, diag: &mut Diagnostics) -> Result<ScoreVector> {
    let k = p.k();
    let mut raw = vec![0.0; k * k];
    for i in 1..=k {
        let mut col_mass = 0.0;
        for j in 1..=k {
            if i != j {
                raw[(i - 1) * k + (j - 1)] = val(p, i, j) / k as f64;
                col_mass += val(p, j, i);
            }
        }
        raw[(i - 1) * k + (i - 1)] = 1.0 - col_mass / k as f64;
    }
    let q = normalize_printed(k, raw, diag)?;
    let pi = stationary_distribution(&q, diag)?;
    Ok(ScoreVector::new(pi.into_iter().map(|v| -v).collect()))
}

/// The spectral variant used by [`spectral_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McVariant {
    Mc2,
    Mc3,
}

/// MC2/MC3 spectral ranking on the printed transition matrices.
pub fn spectral_mc(
    p: &ProbabilityMatrix,
    variant: McVariant,
    diag: &mut Diagnostics,
) -> Result<ScoreVector> {
    let k = p.k();
    let mut raw = vec![0.0; k * k];
    match variant {
        McVariant::Mc2 => {
            for i in 1..=k {
                let row_mass: f64 = (1..=k).map(|j| val(p, i, j)).sum();
                if row_mass > 0.0 {
                    for j in 1..=k {
                        if i != j {
                            raw[(i - 1) * k + (j - 1)] = val(p, j, i) / row_mass;
                        }
                    }
                }
            }
        }
        McVariant::Mc3 => {
            for i in 1..=k {
                let out = (1..=k).filter(|&j| j != i && val(p, i, j) > 0.0).count();
                let inc = (1..=k).filter(|&j| j != i && val(p, j, i) > 0.0).count();
                let deg = out.max(inc).max(1) as f64;
                let mut col_mass = 0.0;
                for j in 1..=k {
                    if i != j {
                        raw[(i - 1) * k + (j - 1)] = val(p, i, j) / deg;
                        col_mass += val(p, j, i);
                    }
                }
                raw[(i - 1) * k + (i - 1)] = 1.0 - col_mass / deg;
            }
        }
    }
    let q = normalize_printed(k, raw, diag)?;
    let pi = stationary_distribution(&q, diag)?;
    let scores = match variant {
        McVariant::Mc2 => pi,
        McVariant::Mc3 => pi.into_iter().map(|v| -v).collect(),
    };
    Ok(ScoreVector::new(scores))
}

// ---------------------------------------------------------------------------
// graph-based

/// Weight source for the feedback arc set variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FasSource {
    /// Raw win counts (FAS).
    Counts,
    /// Relative winning frequencies (FAS(R)).
    Relative,
    /// Binary majority indicators (FAS(B)).
    Binary,
}

/// Largest K for the exact subset dynamic program.
pub const FAS_LIMIT: usize = 20;

/// Builds the FAS weight matrix for a variant.
pub fn fas_weights(
    c: &ComparisonMatrix,
    source: FasSource,
    policy: UndefinedPolicy,
) -> Vec<f64> {
    let k = c.k();
    let mut w = vec![0.0; k * k];
    match source {
        FasSource::Counts => {
            for i in 1..=k {
                for j in 1..=k {
                    if i != j {
                        w[(i - 1) * k + (j - 1)] = c.count(i, j) as f64;
                    }
                }
            }
        }
        FasSource::Relative | FasSource::Binary => {
            let p = c.to_probability_matrix(policy);
            for i in 1..=k {
                for j in 1..=k {
                    if i != j {
                        let v = val(&p, i, j);
                        w[(i - 1) * k + (j - 1)] = match source {
                            FasSource::Relative => v,
                            FasSource::Binary => {
                                if v > 0.5 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                            FasSource::Counts => unreachable!(),
                        };
                    }
                }
            }
        }
    }
    w
}

/// Exact minimum feedback arc set ordering by subset dynamic programming:
/// minimizes the total weight `w_{j,i}` over pairs ranked `i` before `j`.
/// Ties among optimal orderings are broken lexicographically.
pub fn fas_solve(weights: &[f64], k: usize) -> Result<Ranking> {
    assert_eq!(weights.len(), k * k);
    if k > FAS_LIMIT {
        return Err(Error::TooManyItems { k, limit: FAS_LIMIT });
    }
    if k == 0 {
        return Err(Error::EmptyInput("weight matrix".into()));
    }
    let full: usize = (1usize << k) - 1;
    // dp[s] = minimal internal penalty of arranging item set s on the last
    // |s| positions
    let mut dp = vec![f64::INFINITY; full + 1];
    dp[0] = 0.0;
    for s in 1..=full {
        let mut best = f64::INFINITY;
        // j placed first among s, preceding the rest of s
        let mut bits = s;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << j);
            if dp[rest].is_infinite() {
                continue;
            }
            let mut penalty = 0.0;
            let mut r = rest;
            while r != 0 {
                let t = r.trailing_zeros() as usize;
                r &= r - 1;
                penalty += weights[t * k + j];
            }
            let cost = dp[rest] + penalty;
            if cost < best {
                best = cost;
            }
        }
        dp[s] = best;
    }
    // reconstruct from the front, preferring the smallest item on ties
    let mut items = Vec::with_capacity(k);
    let mut s = full;
    while s != 0 {
        let mut chosen = None;
        for j in 0..k {
            if s & (1 << j) == 0 {
                continue;
            }
            let rest = s & !(1 << j);
            let mut penalty = 0.0;
            let mut r = rest;
            while r != 0 {
                let t = r.trailing_zeros() as usize;
                r &= r - 1;
                penalty += weights[t * k + j];
            }
            if dp[rest] + penalty <= dp[s] + 1e-9 {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("dp table admits a reconstruction");
        items.push(j + 1);
        s &= !(1 << j);
    }
    Ok(Ordering::new(items)?.to_ranking())
}

// ---------------------------------------------------------------------------
// pairwise coupling

const HT_TOL: f64 = 1e-10;
const HT_MAX_ITER: usize = 100_000;

/// Hastie-Tibshirani coupling: fixed-point minimization of the weighted KL
/// distance between observed frequencies and the coupled model.
pub fn ht_coupling(c: &ComparisonMatrix) -> Result<ScoreVector> {
    let k = c.k();
    for i in 1..=k {
        let appearances: u64 = (1..=k)
            .filter(|&j| j != i)
            .map(|j| c.count(i, j) + c.count(j, i))
            .sum();
        if appearances == 0 {
            return Err(Error::IsolatedItem { item: i });
        }
    }
    let n = |i: usize, j: usize| (c.count(i, j) + c.count(j, i)) as f64;
    let phat = |i: usize, j: usize| c.count(i, j) as f64 / n(i, j);
    let objective = |p: &[f64]| -> f64 {
        let mut l = 0.0;
        for i in 1..=k {
            for j in (i + 1)..=k {
                if n(i, j) == 0.0 {
                    continue;
                }
                let mu = p[i - 1] / (p[i - 1] + p[j - 1]);
                let ph = phat(i, j);
                let mut term = 0.0;
                if ph > 0.0 {
                    term += ph * (ph / mu).ln();
                }
                if ph < 1.0 {
                    term += (1.0 - ph) * ((1.0 - ph) / (1.0 - mu)).ln();
                }
                l += n(i, j) * term;
            }
        }
        l
    };
    let mut p = vec![1.0 / k as f64; k];
    let mut prev = objective(&p);
    for _ in 0..HT_MAX_ITER {
        for i in 1..=k {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 1..=k {
                if j == i || n(i, j) == 0.0 {
                    continue;
                }
                num += n(i, j) * phat(i, j);
                den += n(i, j) * p[i - 1] / (p[i - 1] + p[j - 1]);
            }
            if den > 0.0 {
                p[i - 1] *= num / den;
            }
            let total: f64 = p.iter().sum();
            for v in p.iter_mut() {
                *v /= total;
            }
        }
        let l = objective(&p);
        debug_assert!(l <= prev + 1e-9, "coupling objective increased: {prev} -> {l}");
        if prev - l < HT_TOL {
            break;
        }
        prev = l;
    }
    Ok(ScoreVector::new(p))
}

/// Price et al. estimator: `theta_i = 1 / (sum_j 1/p_{i,j} - (K - 2))`.
/// Requires strictly positive probabilities.
pub fn price(p: &ProbabilityMatrix) -> Result<ScoreVector> {
    let k = p.k();
    let mut scores = Vec::with_capacity(k);
    for i in 1..=k {
        let mut inv_sum = 0.0;
        for j in 1..=k {
            if j == i {
                continue;
            }
            let v = val(p, i, j);
            if v <= 0.0 {
                return Err(Error::ZeroProbabilityCell { i, j });
            }
            inv_sum += 1.0 / v;
        }
        scores.push(1.0 / (inv_sum - (k as f64 - 2.0)));
    }
    Ok(ScoreVector::new(scores))
}

/// Wu et al., Markov chain variant: stationary scores of the printed chain
/// with off-diagonal `p_{i,j}/(K-1)`.
pub fn wu1(p: &ProbabilityMatrix, diag: &mut Diagnostics) -> Result<ScoreVector> {
    let k = p.k();
    let mut raw = vec![0.0; k * k];
    for i in 1..=k {
        let mut row_mass = 0.0;
        for j in 1..=k {
            if i != j {
                let v = val(p, i, j) / (k as f64 - 1.0);
                raw[(i - 1) * k + (j - 1)] = v;
                row_mass += v;
            }
        }
        raw[(i - 1) * k + (i - 1)] = row_mass;
    }
    let q = normalize_printed(k, raw, diag)?;
    let pi = stationary_distribution(&q, diag)?;
    Ok(ScoreVector::new(pi.into_iter().map(|v| -v).collect()))
}

/// Wu et al., quadratic variant: minimizes `theta^T Q theta` subject to
/// `sum theta = 1` via the Lagrangian linear system. Negative components
/// are permitted.
pub fn wu2(p: &ProbabilityMatrix) -> Result<ScoreVector> {
    let k = p.k();
    let mut q = DMatrix::zeros(k, k);
    for i in 1..=k {
        let mut diag_term = 0.0;
        for j in 1..=k {
            if i != j {
                q[(i - 1, j - 1)] = -val(p, i, j) * val(p, j, i);
                diag_term += val(p, j, i).powi(2);
            }
        }
        q[(i - 1, i - 1)] = diag_term;
    }
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..k {
            kkt[(i, j)] = 2.0 * q[(i, j)];
        }
        kkt[(i, k)] = -1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    Ok(ScoreVector::new(sol.as_slice()[..k].to_vec()))
}

// ---------------------------------------------------------------------------
// dispatch

/// The outcome of running one aggregation method.
#[derive(Debug, Clone)]
pub struct AggregateOutcome {
    pub ranking: Ranking,
    pub scores: Option<ScoreVector>,
    pub diagnostics: Diagnostics,
}

/// Runs `method` on the comparison matrix; score-based outputs are turned
/// into a ranking by [`argsort_desc`].
pub fn aggregate(
    method: MethodId,
    c: &ComparisonMatrix,
    policy: UndefinedPolicy,
) -> Result<AggregateOutcome> {
    let mut diag = Diagnostics::default();
    let p = || c.to_probability_matrix(policy);
    let scores = match method {
        MethodId::Btl => Some(btl_mle(c, false)?),
        MethodId::BtlR => Some(btl_mle(c, true)?),
        MethodId::Ls => Some(hodgerank_ls(&p())?),
        MethodId::Borda => Some(borda(&p())),
        MethodId::Copeland => Some(copeland(&p())),
        MethodId::Rc => Some(rank_centrality(&p(), &mut diag)?),
        MethodId::Mc2 => Some(spectral_mc(&p(), McVariant::Mc2, &mut diag)?),
        MethodId::Mc3 => Some(spectral_mc(&p(), McVariant::Mc3, &mut diag)?),
        MethodId::Ht => Some(ht_coupling(c)?),
        MethodId::Price => Some(price(&p())?),
        MethodId::Wu1 => Some(wu1(&p(), &mut diag)?),
        MethodId::Wu2 => Some(wu2(&p())?),
        MethodId::Fas | MethodId::FasR | MethodId::FasB => None,
    };
    let ranking = match method {
        MethodId::Fas => fas_solve(&fas_weights(c, FasSource::Counts, policy), c.k())?,
        MethodId::FasR => fas_solve(&fas_weights(c, FasSource::Relative, policy), c.k())?,
        MethodId::FasB => fas_solve(&fas_weights(c, FasSource::Binary, policy), c.k())?,
        _ => argsort_desc(scores.as_ref().unwrap())?,
    };
    Ok(AggregateOutcome {
        ranking,
        scores,
        diagnostics: diag,
    })
}
