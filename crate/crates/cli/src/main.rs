//! Command-line workbench: data generation, aggregation, exact oracles,
//! Monte Carlo experiments, and property checks.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use coarserank::aggregate::{aggregate, MethodId};
use coarserank::checks;
use coarserank::coarsening::{
    check_order_preservation, exact_q, exact_q_rational, generate_pairwise_dataset,
    CoarseningSpec, RationalQTable,
};
use coarserank::config::Config;
use coarserank::error::Error;
use coarserank::experiment::{
    export_results, load_dataset_file, run_real_experiment, run_synthetic, ModelSpec,
};
use coarserank::models::{RankingModel, TabularDistribution};
use coarserank::pairwise::{
    read_preferences_file, write_preferences, ComparisonMatrix, UndefinedPolicy,
};
use coarserank::perm::{Ordering, Ranking};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "coarserank", version, about = "Incomplete-ranking workbench")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// key=value overrides applied on top of the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config, Error> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::parse("")?,
        };
        cfg.apply_overrides(&self.overrides)?;
        if let Some(seed) = self.seed {
            cfg.apply_overrides(&[format!("seed={seed}")])?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample coarsened pairwise preferences from a configured model.
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Number of preferences (overrides the config key `n`).
        #[arg(short = 'n', long = "count")]
        count: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a preference file into a predicted ordering.
    Aggregate {
        /// Preference file: one `i j` pair per line.
        file: PathBuf,
        #[arg(long)]
        method: String,
        /// Undefined-cell policy: half, zero, or skip.
        #[arg(long, default_value = "half")]
        policy: String,
        /// Item count (default: largest index in the file).
        #[arg(long)]
        items: Option<usize>,
        /// Also print the score vector.
        #[arg(long)]
        scores: bool,
    },
    /// Print the exact p / q / q' tables of a configured instance.
    Oracle {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Explicit ranking distribution file (`i1 .. iK prob` per line,
        /// best first) used instead of the configured model.
        #[arg(long)]
        distribution: Option<PathBuf>,
    },
    /// Run a Monte Carlo study and export CSV tables.
    Experiment {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the property suites.
    Check {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Smaller instance counts, finishes in seconds.
        #[arg(long)]
        quick: bool,
        /// With --distribution: succeed only if order preservation is
        /// violated.
        #[arg(long)]
        expect_violation: bool,
        /// Ranking distribution file for the violation check.
        #[arg(long)]
        distribution: Option<PathBuf>,
    },
}

fn error_exit(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_)
        | Error::UnknownMethod(_)
        | Error::TooManyItems { .. }
        | Error::InvalidCoarsening(_)
        | Error::NonPositiveWeight { .. }
        | Error::NotPairwise => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not failures
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match cli.command {
        Command::Generate { cfg, count, out } => cmd_generate(&cfg, count, out.as_deref()),
        Command::Aggregate {
            file,
            method,
            policy,
            items,
            scores,
        } => cmd_aggregate(&file, &method, &policy, items, scores),
        Command::Oracle { cfg, distribution } => cmd_oracle(&cfg, distribution.as_deref()),
        Command::Experiment { cfg, out } => cmd_experiment(&cfg, &out),
        Command::Check {
            cfg,
            quick,
            expect_violation,
            distribution,
        } => return cmd_check(&cfg, quick, expect_violation, distribution.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit(&e))
        }
    }
}

fn cmd_generate(
    args: &ConfigArgs,
    count: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Error> {
    let cfg = args.load()?;
    let model = cfg.model()?;
    let spec = cfg.coarsening(model.k())?;
    let n = match count.or(cfg.sample_count()?) {
        Some(n) => n,
        None => return Err(Error::InvalidConfig("missing sample count (key 'n' or --count)".into())),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed()?);
    let data = generate_pairwise_dataset(model.as_model(), &spec, n, &mut rng)?;
    let truth = model.truth().to_ordering();
    eprintln!("truth: {}", join_items(&truth));
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_preferences(std::io::BufWriter::new(file), &data)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_preferences(stdout.lock(), &data)?;
        }
    }
    Ok(())
}

fn join_items(o: &Ordering) -> String {
    o.as_slice()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_aggregate(
    file: &Path,
    method: &str,
    policy: &str,
    items: Option<usize>,
    scores: bool,
) -> Result<(), Error> {
    let method: MethodId = method.parse()?;
    let policy: UndefinedPolicy = policy.parse()?;
    let prefs = read_preferences_file(file)?;
    if prefs.is_empty() {
        return Err(Error::EmptyInput(file.display().to_string()));
    }
    let observed_max = prefs
        .iter()
        .map(|p| p.winner().max(p.loser()))
        .max()
        .unwrap();
    let k = items.unwrap_or(observed_max);
    let c = ComparisonMatrix::from_preferences(&prefs, k)?;
    let out = aggregate(method, &c, policy)?;
    println!("{}", join_items(&out.ranking.to_ordering()));
    if scores {
        if let Some(s) = &out.scores {
            let rendered = s
                .as_slice()
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(" ");
            println!("scores: {rendered}");
        } else {
            println!("scores: (none; {method} ranks directly)");
        }
    }
    for label in out.diagnostics.labels() {
        eprintln!("note: {label}");
    }
    Ok(())
}

/// `i1 .. iK prob` per line, items best first, `#` comments.
fn read_distribution(path: &Path) -> Result<TabularDistribution, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut entries: Vec<(Ranking, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: "expected 'i1 .. iK prob'".into(),
            });
        }
        let prob: f64 = fields[fields.len() - 1].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid probability '{}'", fields[fields.len() - 1]),
        })?;
        let items = fields[..fields.len() - 1]
            .iter()
            .map(|f| {
                f.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("invalid item index '{f}'"),
                })
            })
            .collect::<Result<Vec<usize>, Error>>()?;
        let ordering = Ordering::new(items).map_err(|_| Error::Parse {
            line: lineno + 1,
            message: "items are not a permutation".into(),
        })?;
        entries.push((ordering.to_ranking(), prob));
    }
    if entries.is_empty() {
        return Err(Error::EmptyInput(path.display().to_string()));
    }
    let k = entries[0].0.len();
    TabularDistribution::new(k, entries)
}

const ORACLE_LIMIT: usize = 10;

fn integral_theta(model: &ModelSpec) -> Option<Vec<i64>> {
    match model {
        ModelSpec::Pl(pl) => {
            let mut out = Vec::with_capacity(pl.k());
            for &w in pl.weights() {
                if w.fract() != 0.0 || w <= 0.0 || w > 1e15 {
                    return None;
                }
                out.push(w as i64);
            }
            Some(out)
        }
        ModelSpec::Mallows(_) => None,
    }
}

fn render_common_denominator(table: &RationalQTable) -> String {
    let k = table.k();
    let mut lcm = BigInt::from(1);
    let mut cells: Vec<(String, BigRational)> = Vec::new();
    for i in 1..=k {
        for j in 1..=k {
            if i == j {
                continue;
            }
            cells.push((format!("p[{i},{j}]"), table.p(i, j).clone()));
            cells.push((format!("q[{i},{j}]"), table.q(i, j).clone()));
        }
    }
    for (_, v) in &cells {
        lcm = lcm.lcm(v.denom());
    }
    let mut out = String::new();
    for section in ["p", "q"] {
        out.push_str(&format!("{section} (common denominator {lcm}):\n"));
        for (name, v) in &cells {
            if name.starts_with(section) {
                let scaled = v.numer() * (&lcm / v.denom());
                out.push_str(&format!("  {name} = {scaled}/{lcm}\n"));
            }
        }
    }
    out.push_str("q':\n");
    for i in 1..=k {
        for j in 1..=k {
            if i == j {
                continue;
            }
            if table.qprime(i, j).is_none() {
                out.push_str(&format!("  q'[{i},{j}] = undefined (pair never observed)\n"));
                continue;
            }
            // numerator and denominator on the shared q scale, so the
            // fraction reads directly as q_ij / (q_ij + q_ji)
            let scale = |v: &BigRational| v.numer() * (&lcm / v.denom());
            let num = scale(table.q(i, j));
            let den = &num + scale(table.q(j, i));
            out.push_str(&format!("  q'[{i},{j}] = {num}/{den}\n"));
        }
    }
    out
}

fn render_decimal(model: &dyn RankingModel, spec: &CoarseningSpec) -> Result<String, Error> {
    let table = exact_q(model, spec)?;
    let k = table.k();
    let mut out = String::new();
    out.push_str("p:\n");
    for i in 1..=k {
        for j in 1..=k {
            if i != j {
                out.push_str(&format!("  p[{i},{j}] = {:.12}\n", table.p(i, j)));
            }
        }
    }
    out.push_str("q:\n");
    for i in 1..=k {
        for j in 1..=k {
            if i != j {
                out.push_str(&format!("  q[{i},{j}] = {:.12}\n", table.q(i, j)));
            }
        }
    }
    out.push_str("q':\n");
    for i in 1..=k {
        for j in 1..=k {
            if i == j {
                continue;
            }
            match table.qprime(i, j) {
                Some(v) => out.push_str(&format!("  q'[{i},{j}] = {v:.12}\n")),
                None => out.push_str(&format!("  q'[{i},{j}] = undefined (pair never observed)\n")),
            }
        }
    }
    Ok(out)
}

fn cmd_oracle(args: &ConfigArgs, distribution: Option<&Path>) -> Result<(), Error> {
    let cfg = args.load()?;
    let tabular = distribution.map(read_distribution).transpose()?;
    let model_spec = match &tabular {
        Some(_) => None,
        None => Some(cfg.model()?),
    };
    let model: &dyn RankingModel = match (&tabular, &model_spec) {
        (Some(t), _) => t,
        (None, Some(m)) => m.as_model(),
        (None, None) => unreachable!(),
    };
    let k = model.k();
    if k > ORACLE_LIMIT {
        return Err(Error::TooManyItems {
            k,
            limit: ORACLE_LIMIT,
        });
    }
    let spec = cfg.coarsening(k)?;
    if !spec.is_pairwise() {
        return Err(Error::NotPairwise);
    }
    match &model_spec {
        Some(ModelSpec::Pl(pl)) => println!(
            "model: PL theta = ({})",
            pl.weights()
                .iter()
                .map(|w| format!("{w}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Some(ModelSpec::Mallows(m)) => println!(
            "model: Mallows reference {} phi {}",
            m.reference().to_ordering(),
            m.phi()
        ),
        None => println!("model: explicit distribution ({k} items)"),
    }
    let rational = model_spec.as_ref().and_then(integral_theta);
    match rational {
        Some(theta) => {
            let table = exact_q_rational(&theta, &spec)?;
            print!("{}", render_common_denominator(&table));
        }
        None => print!("{}", render_decimal(model, &spec)?),
    }
    if matches!(spec, CoarseningSpec::UniformPairs { .. }) {
        println!("q' = p (unbiased)");
    }
    let report = check_order_preservation(model, &spec)?;
    if report.all_preserved() {
        println!("order preservation: all {} pairs preserved", report.pairs.len());
    } else {
        println!(
            "order preservation: {} of {} pairs violated",
            report.violations(),
            report.pairs.len()
        );
        for p in &report.pairs {
            if !p.preserved {
                println!(
                    "  pair ({},{}): p = {:.6}, q' = {}",
                    p.i,
                    p.j,
                    p.p,
                    p.qprime
                        .map(|v| format!("{v:.6}"))
                        .unwrap_or_else(|| "undefined".into())
                );
            }
        }
    }
    Ok(())
}

fn cmd_experiment(args: &ConfigArgs, out: &Path) -> Result<(), Error> {
    let cfg = args.load()?;
    if let Some((path, format)) = cfg.dataset()? {
        let data = load_dataset_file(&path, format)?;
        let spec = cfg.coarsening(data.k())?;
        let reps = cfg.reps()?.unwrap_or(100);
        let results = run_real_experiment(
            &data,
            &spec,
            &cfg.methods()?,
            reps,
            cfg.seed()?,
            cfg.policy()?,
        )?;
        let mut file = std::fs::File::create(out)?;
        writeln!(file, "method,repetition,normalized_kendall")?;
        for r in &results {
            for (rep, d) in r.distances.iter().enumerate() {
                writeln!(file, "{},{},{:.6}", r.method, rep, d)?;
            }
        }
        for r in &results {
            eprintln!(
                "{}: target {}, median {:.4}",
                r.method,
                join_items(&r.target.to_ordering()),
                r.median_distance()
            );
        }
        return Ok(());
    }
    let experiment = cfg.experiment()?;
    let result = run_synthetic(&experiment)?;
    export_results(&result, out)?;
    eprintln!("truth: {}", join_items(&result.truth.to_ordering()));
    Ok(())
}

fn cmd_check(
    args: &ConfigArgs,
    quick: bool,
    expect_violation: bool,
    distribution: Option<&Path>,
) -> ExitCode {
    if expect_violation {
        let outcome = (|| -> Result<bool, Error> {
            let path = distribution.ok_or_else(|| {
                Error::InvalidConfig("--expect-violation needs --distribution FILE".into())
            })?;
            let t = read_distribution(path)?;
            let cfg = args.load()?;
            let spec = cfg.coarsening(t.k())?;
            let report = check_order_preservation(&t, &spec)?;
            Ok(!report.all_preserved())
        })();
        return match outcome {
            Ok(true) => {
                println!("PASS violation-detected");
                ExitCode::SUCCESS
            }
            Ok(false) => {
                println!("FAIL violation-detected: order preservation holds");
                ExitCode::from(EXIT_CHECK)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(error_exit(&e))
            }
        };
    }
    match checks::run_all(quick) {
        Ok(outcomes) => {
            let mut failed = false;
            for o in &outcomes {
                let verdict = if o.pass { "PASS" } else { "FAIL" };
                println!("{verdict} {}: {}", o.name, o.detail);
                failed |= !o.pass;
            }
            if failed {
                ExitCode::from(EXIT_CHECK)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit(&e))
        }
    }
}
