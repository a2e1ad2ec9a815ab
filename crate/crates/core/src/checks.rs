//! Reusable property suites over the exact oracles and the Monte Carlo
//! harness. The CLI `check` subcommand runs them at desk scale; the
//! acceptance tests run them at full scale.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::aggregate::{aggregate, fas_solve, MethodId};
use crate::coarsening::{
    check_order_preservation, exact_q, exact_q_rational, generate_pairwise_dataset, CoarseningSpec,
};
use crate::error::Result;
use crate::experiment::{mix_seed, run_consistency_check, ExperimentConfig, ModelSpec};
use crate::models::{enumerate_probabilities, MallowsParams, PlParams, TabularDistribution};
use crate::pairwise::{ComparisonMatrix, UndefinedPolicy};
use crate::perm::{all_orderings, Ranking};

/// Outcome of one property check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> Self {
        Self {
            name,
            pass: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self {
            name,
            pass: false,
            detail,
        }
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_theta(rng: &mut ChaCha12Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.gen::<f64>() * 4.0 + 0.05).collect()
}

fn random_pair_lambda(rng: &mut ChaCha12Rng, k: usize) -> Vec<(usize, usize, f64)> {
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    for i in 1..=k {
        for j in (i + 1)..=k {
            weights.push((i, j, rng.gen::<f64>() + 1e-3));
        }
    }
    let total: f64 = weights.iter().map(|w| w.2).sum();
    for (i, j, w) in weights {
        entries.push((i, j, w / total));
    }
    entries
}

/// The worked K=3 example: exact q and q' values in rational arithmetic.
pub fn check_exact_table() -> CheckOutcome {
    const NAME: &str = "exact-table";
    let spec = match CoarseningSpec::degenerate_pair(3, 1, 2) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
    };
    let table = match exact_q_rational(&[14, 5, 1], &spec) {
        Ok(t) => t,
        Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
    };
    let expected_q = [
        (1, 2, ratio(665, 1140)),
        (1, 3, ratio(133, 1140)),
        (2, 3, ratio(19, 1140)),
        (2, 1, ratio(266, 1140)),
        (3, 1, ratio(42, 1140)),
        (3, 2, ratio(15, 1140)),
    ];
    for (i, j, want) in &expected_q {
        if table.q(*i, *j) != want {
            return CheckOutcome::fail(
                NAME,
                format!("q[{i},{j}] = {}, want {}", table.q(*i, *j), want),
            );
        }
    }
    let expected_qp = [
        (1, 2, ratio(665, 931)),
        (1, 3, ratio(133, 175)),
        (2, 3, ratio(19, 34)),
    ];
    for (i, j, want) in &expected_qp {
        match table.qprime(*i, *j) {
            Some(v) if &v == want => {}
            other => {
                return CheckOutcome::fail(NAME, format!("q'[{i},{j}] = {other:?}, want {want}"))
            }
        }
    }
    // floating point agrees to 1e-12
    let pl = PlParams::new(vec![14.0, 5.0, 1.0]).unwrap();
    let ft = exact_q(&pl, &spec).unwrap();
    for (i, j, want) in &expected_q {
        let w = want.numer().to_string().parse::<f64>().unwrap()
            / want.denom().to_string().parse::<f64>().unwrap();
        if (ft.q(*i, *j) - w).abs() > 1e-12 {
            return CheckOutcome::fail(NAME, format!("float q[{i},{j}] off by >1e-12"));
        }
    }
    CheckOutcome::pass(NAME, "all nine q and three q' values exact".into())
}

/// Uniform rank-pair coarsening never biases: exact q' equals the pairwise
/// marginal table.
pub fn check_uniform_neutrality(instances: usize, seed: u64) -> CheckOutcome {
    const NAME: &str = "uniform-neutrality";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for t in 0..instances {
        let k = 3 + t % 3;
        let pl = PlParams::new(random_theta(&mut rng, k)).unwrap();
        let spec = CoarseningSpec::uniform_pairs(k).unwrap();
        let table = match exact_q(&pl, &spec) {
            Ok(t) => t,
            Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
        };
        for i in 1..=k {
            for j in 1..=k {
                if i == j {
                    continue;
                }
                let qp = table.qprime(i, j).unwrap();
                worst = worst.max((qp - table.p(i, j)).abs());
            }
        }
    }
    if worst <= 1e-12 {
        CheckOutcome::pass(NAME, format!("{instances} instances, max |q'-p| = {worst:.2e}"))
    } else {
        CheckOutcome::fail(NAME, format!("max |q'-p| = {worst:.2e} > 1e-12"))
    }
}

/// Order preservation holds for every PL model and every rank-pair
/// coarsening.
pub fn check_order_preservation_random(instances: usize, seed: u64) -> CheckOutcome {
    const NAME: &str = "order-preservation";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for t in 0..instances {
        let k = 3 + t % 4;
        let pl = PlParams::new(random_theta(&mut rng, k)).unwrap();
        let entries = random_pair_lambda(&mut rng, k);
        let spec = CoarseningSpec::custom_pairs(k, &entries).unwrap();
        let report = match check_order_preservation(&pl, &spec) {
            Ok(r) => r,
            Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
        };
        if !report.all_preserved() {
            return CheckOutcome::fail(
                NAME,
                format!("instance {t} (K={k}): {} sign disagreements", report.violations()),
            );
        }
    }
    CheckOutcome::pass(NAME, format!("{instances} random (theta, lambda) instances"))
}

/// The known non-PL distribution where rank-dependent coarsening reverses
/// preference directions; the oracle must report the violation.
pub fn check_counterexample() -> CheckOutcome {
    const NAME: &str = "counterexample";
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
    let table = match exact_q(&t, &spec) {
        Ok(t) => t,
        Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
    };
    let ok = (table.p(1, 2) - 0.8).abs() < 1e-12
        && (table.p(1, 3) - 0.8).abs() < 1e-12
        && table.qprime(1, 2) == Some(0.0)
        && table.qprime(1, 3) == Some(0.0);
    if !ok {
        return CheckOutcome::fail(
            NAME,
            format!(
                "p(1,2)={}, p(1,3)={}, q'(1,2)={:?}, q'(1,3)={:?}",
                table.p(1, 2),
                table.p(1, 3),
                table.qprime(1, 2),
                table.qprime(1, 3)
            ),
        );
    }
    let report = check_order_preservation(&t, &spec).unwrap();
    if report.violations() == 2 {
        CheckOutcome::pass(NAME, "q'(1,2) = q'(1,3) = 0 while p = 0.8; violation detected".into())
    } else {
        CheckOutcome::fail(NAME, format!("{} violations, want 2", report.violations()))
    }
}

/// When the underlying distribution puts more mass on every ranking with
/// `i` before `j` than on its swapped image, the coarsened observation
/// probabilities preserve that direction.
pub fn check_premise_direction(instances: usize, seed: u64) -> CheckOutcome {
    const NAME: &str = "premise-direction";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for t in 0..instances {
        let k = 3 + t % 3;
        // PL with sorted weights satisfies the premise for every pair
        let mut theta = random_theta(&mut rng, k);
        theta.sort_by(|a, b| b.partial_cmp(a).unwrap());
        theta.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        while theta.len() < k {
            theta.push(theta.last().unwrap() * 0.5);
        }
        let pl = PlParams::new(theta).unwrap();
        let entries = random_pair_lambda(&mut rng, k);
        let spec = CoarseningSpec::custom_pairs(k, &entries).unwrap();
        let table = match exact_q(&pl, &spec) {
            Ok(t) => t,
            Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
        };
        // sample a pair to validate per instance, then verify all
        let i = 1 + (rng.gen::<u64>() as usize) % k;
        let mut j = 1 + (rng.gen::<u64>() as usize) % k;
        if j == i {
            j = if i == k { 1 } else { i + 1 };
        }
        let (hi, lo) = if i < j { (i, j) } else { (j, i) };
        if table.q(hi, lo) <= table.q(lo, hi) {
            return CheckOutcome::fail(
                NAME,
                format!("instance {t}: q({hi},{lo}) <= q({lo},{hi})"),
            );
        }
    }
    CheckOutcome::pass(NAME, format!("{instances} premise-satisfying instances"))
}

/// The subset dynamic program matches exhaustive search on random weight
/// matrices.
pub fn check_fas_oracle(instances: usize, k: usize, seed: u64) -> CheckOutcome {
    const NAME: &str = "fas-oracle";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let objective = |w: &[f64], r: &Ranking| {
        let mut obj = 0.0;
        for i in 1..=k {
            for j in 1..=k {
                if i != j && r.rank_of(i) < r.rank_of(j) {
                    obj += w[(j - 1) * k + (i - 1)];
                }
            }
        }
        obj
    };
    for t in 0..instances {
        let mut w = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    w[i * k + j] = rng.gen_range(0..50) as f64;
                }
            }
        }
        let dp = match fas_solve(&w, k) {
            Ok(r) => r,
            Err(e) => return CheckOutcome::fail(NAME, e.to_string()),
        };
        let best = all_orderings(k)
            .map(|o| objective(&w, &o.to_ranking()))
            .fold(f64::INFINITY, f64::min);
        if (objective(&w, &dp) - best).abs() > 1e-9 {
            return CheckOutcome::fail(NAME, format!("instance {t}: dp objective != optimum"));
        }
    }
    CheckOutcome::pass(NAME, format!("{instances} random {k}-item matrices"))
}

/// Empirical coarsened pair frequencies match the exact table within three
/// binomial standard deviations; full-ranking samplers match enumeration.
pub fn check_sampler_fidelity(instances: usize, n: usize, seed: u64) -> CheckOutcome {
    const NAME: &str = "sampler-fidelity";
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for t in 0..instances {
        let k = 3 + t % 3;
        let pl = PlParams::new(random_theta(&mut rng, k)).unwrap();
        let entries = random_pair_lambda(&mut rng, k);
        let spec = CoarseningSpec::custom_pairs(k, &entries).unwrap();
        let table = exact_q(&pl, &spec).unwrap();
        let mut sample_rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, t as u64));
        let data = generate_pairwise_dataset(&pl, &spec, n, &mut sample_rng).unwrap();
        let c = ComparisonMatrix::from_preferences(&data, k).unwrap();
        for i in 1..=k {
            for j in 1..=k {
                if i == j {
                    continue;
                }
                let q = table.q(i, j);
                let sd = (n as f64 * q * (1.0 - q)).sqrt();
                let dev = (c.count(i, j) as f64 - n as f64 * q).abs();
                if dev > 3.0 * sd.max(1.0) {
                    return CheckOutcome::fail(
                        NAME,
                        format!("instance {t}: cell ({i},{j}) off by {:.1} sd", dev / sd),
                    );
                }
            }
        }
    }
    // full-ranking samplers vs enumeration at K = 4
    let pl = PlParams::new(vec![2.0, 9.0, 4.0, 7.0]).unwrap();
    let mallows =
        MallowsParams::new(Ranking::new(vec![2, 4, 1, 3]).unwrap(), 0.8).unwrap();
    let n_full = 200_000;
    for (label, model) in [
        ("pl", &pl as &dyn crate::models::RankingModel),
        ("mallows", &mallows as &dyn crate::models::RankingModel),
    ] {
        let probs = enumerate_probabilities(model);
        let mut counts = std::collections::HashMap::new();
        let mut sample_rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, 1000));
        for _ in 0..n_full {
            *counts.entry(model.sample(&mut sample_rng)).or_insert(0usize) += 1;
        }
        for (pi, p) in probs {
            let sd = (n_full as f64 * p * (1.0 - p)).sqrt();
            let observed = *counts.get(&pi).unwrap_or(&0) as f64;
            if (observed - n_full as f64 * p).abs() > 3.0 * sd.max(1.0) {
                return CheckOutcome::fail(NAME, format!("{label} sampler off on {pi}"));
            }
        }
    }
    CheckOutcome::pass(
        NAME,
        format!("{instances} coarsened instances at N={n}; both full samplers at K=4"),
    )
}

/// All fifteen methods return the strength order on exact pairwise tables.
pub fn check_method_recovery() -> CheckOutcome {
    const NAME: &str = "method-recovery";
    for theta in [
        vec![9.0, 3.0, 1.0],
        vec![1.0, 8.0, 3.0, 6.0],
        vec![2.0, 16.0, 1.0, 4.0, 8.0],
    ] {
        let k = theta.len();
        let pl = PlParams::new(theta.clone()).unwrap();
        let expected = pl.mode();
        let mut c = ComparisonMatrix::zeros(k);
        for i in 1..=k {
            for j in 1..=k {
                if i != j {
                    let p = theta[i - 1] / (theta[i - 1] + theta[j - 1]);
                    for _ in 0..((p * 1_000_000.0).round() as u64) {
                        c.add(i, j).unwrap();
                    }
                }
            }
        }
        for m in MethodId::ALL {
            match aggregate(m, &c, UndefinedPolicy::Half) {
                Ok(out) if out.ranking == expected => {}
                Ok(out) => {
                    return CheckOutcome::fail(
                        NAME,
                        format!("{m} returned {} on theta {theta:?}", out.ranking),
                    )
                }
                Err(e) => return CheckOutcome::fail(NAME, format!("{m}: {e}")),
            }
        }
    }
    CheckOutcome::pass(NAME, "15 methods x 3 tables".into())
}

/// Desk-scale consistency: unbiased coarsening, growing N, recovery
/// reaches the threshold.
pub fn check_consistency_desk(quick: bool) -> CheckOutcome {
    const NAME: &str = "consistency";
    let cfg = ExperimentConfig {
        model: ModelSpec::Pl(PlParams::new(vec![14.0, 5.0, 1.0]).unwrap()),
        coarsening: CoarseningSpec::uniform_pairs(3).unwrap(),
        methods: vec![MethodId::Copeland, MethodId::FasB],
        sizes: if quick {
            vec![100, 1000]
        } else {
            vec![100, 1000, 10_000]
        },
        reps: if quick { 40 } else { 100 },
        seed: 20_240,
        baseline: false,
        policy: UndefinedPolicy::Half,
    };
    match run_consistency_check(&cfg, 0.9) {
        Ok(outcomes) => {
            for o in &outcomes {
                if !o.pass() {
                    return CheckOutcome::fail(
                        NAME,
                        format!("{} recoveries {:?}", o.method, o.recoveries),
                    );
                }
            }
            let detail = outcomes
                .iter()
                .map(|o| format!("{} {:?}", o.method, o.recoveries))
                .collect::<Vec<_>>()
                .join("; ");
            CheckOutcome::pass(NAME, detail)
        }
        Err(e) => CheckOutcome::fail(NAME, e.to_string()),
    }
}

/// Runs the whole suite; `quick` shrinks instance counts to finish within
/// seconds.
pub fn run_all(quick: bool) -> Result<Vec<CheckOutcome>> {
    let (inst_small, inst_big, n) = if quick {
        (20, 50, 20_000)
    } else {
        (100, 300, 100_000)
    };
    Ok(vec![
        check_exact_table(),
        check_uniform_neutrality(inst_small, 101),
        check_order_preservation_random(inst_big, 102),
        check_counterexample(),
        check_premise_direction(inst_small, 103),
        check_fas_oracle(if quick { 20 } else { 100 }, 7, 104),
        check_sampler_fidelity(if quick { 3 } else { 10 }, n, 105),
        check_method_recovery(),
        check_consistency_desk(quick),
    ])
}
