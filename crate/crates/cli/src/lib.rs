//! Command-line front end: `count`, `norm`, `verify`, `search`, `decay`.
//!
//! Exit codes: 0 on success, 1 when a proven bound (or, for `search`, the
//! `3^n` bound being searched) fails numerically, 2 on usage or input
//! errors.

pub mod ordering_spec;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use walshperm::combinatorics::{
    count_a_hat_with, count_a_tilde_with, count_a_with, count_b, count_psi_pairs, decay_report,
    ratio8_nonincreasing, CountResult, CountStrategy, DecaySet,
};
use walshperm::functions::{
    lp_norm_key, lp_norm_key_exact, rp_lower_bound, sup_norm_sample, KeyFunctionSpec, NormResult, Variant,
};
use walshperm::orderings::{NamedOrdering, Ordering};
use walshperm::perturbation::{
    check_pointwise, verify_perturbation_a, verify_perturbation_a_hat, verify_subset_example,
};
use walshperm::search::{
    exhaustive_max_b, pruned_search, BoundStrategy, SearchCheckpoint, SearchConfig, SearchGoal, SearchReport,
};

pub use ordering_spec::{parse_ordering_spec, OrderingSpec};
pub use report::{Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "walshperm", version, about = "Rearranged Walsh systems: witness-set counts, key-function norms and the B-count search")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count a witness set.
    Count(CountArgs),
    /// L_p norm of the key function.
    Norm(NormArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Search permutations for the largest B-count.
    Search(SearchArgs),
    /// Counts and ratios for n = 0..=n_max.
    Decay(DecayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    #[value(name = "A")]
    A,
    #[value(name = "A_v")]
    AV,
    #[value(name = "A_tilde")]
    ATilde,
    #[value(name = "B")]
    B,
    #[value(name = "A_hat_v")]
    AHatV,
    #[value(name = "psi_pairs")]
    PsiPairs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Triples,
    Histogram,
}

impl From<StrategyArg> for CountStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Triples => CountStrategy::Triples,
            StrategyArg::Histogram => CountStrategy::SumHistogram,
        }
    }
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long, value_enum)]
    pub set: SetArg,
    #[arg(long)]
    pub n: u32,
    /// Ordering spec; A_tilde builds it on [2^(n+1)].
    #[arg(long, default_value = "identity")]
    pub ordering: String,
    /// Offset for A_v (an index) and A_hat_v (a signed integer).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub v: i64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Triples)]
    pub strategy: StrategyArg,
    /// Integer table of psi on [2^n] for psi_pairs; random from --seed if absent.
    #[arg(long)]
    pub psi: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Full,
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormMethodArg {
    Grid,
    Count,
    Both,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value = "identity")]
    pub ordering: String,
    /// Exponent; `inf` samples the sup norm on the grid.
    #[arg(long)]
    pub p: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Full)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = NormMethodArg::Grid)]
    pub method: NormMethodArg,
    /// Points in s; the exact grid for even p if omitted.
    #[arg(long)]
    pub grid_s: Option<usize>,
    /// Dyadic cells in t (a power of two).
    #[arg(long)]
    pub grid_t: Option<usize>,
    /// Also report the Dirichlet-kernel lower bound for the equivalence constant.
    #[arg(long)]
    pub lower_bound: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Bounds,
    Perturbation,
    Subset,
    Invariants,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Block exponent (largest exponent for `bounds`).
    #[arg(long)]
    pub n: u32,
    /// Ordering under test; random from --seed when absent (perturbation, invariants).
    #[arg(long)]
    pub ordering: Option<String>,
    /// Comparison ordering for the perturbation suite.
    #[arg(long)]
    pub pi: Option<String>,
    /// Scrambled bit positions for the subset suite, e.g. `0,3`.
    #[arg(long, value_delimiter = ',')]
    pub bits: Vec<u32>,
    /// Number of seeds (subset) or random pairs (perturbation, invariants).
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Pruned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GoalArg {
    Maximize,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Simple,
    Fiber,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Pruned)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = GoalArg::Maximize)]
    pub goal: GoalArg,
    #[arg(long, value_enum, default_value_t = BoundArg::Simple)]
    pub bound: BoundArg,
    #[arg(long)]
    pub split_depth: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// Resume from this file if it exists; progress is saved to it.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Save the checkpoint every this many nodes.
    #[arg(long, default_value_t = 10_000_000)]
    pub checkpoint_interval: u64,
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[arg(long)]
    pub budget_nodes: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecaySetArg {
    #[value(name = "A")]
    A,
    #[value(name = "A_tilde")]
    ATilde,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long, value_enum, default_value_t = DecaySetArg::A)]
    pub set: DecaySetArg,
    #[arg(long)]
    pub n_max: u32,
    /// A spec without files, evaluated at every n.
    #[arg(long, default_value = "identity")]
    pub ordering: String,
}

struct Outcome {
    report: Report,
    violated: bool,
}

/// Parses `argv`, runs the command and writes the report. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &echo.join(" ")) {
        Ok(outcome) => match outcome.report.emit(cli.global.format, cli.global.out.as_deref()) {
            Ok(()) if outcome.violated => EXIT_VIOLATION,
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, echo: &str) -> anyhow::Result<Outcome> {
    if let Some(threads) = cli.global.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    let start = Instant::now();
    let mut outcome = match &cli.command {
        Command::Count(args) => count(args, &cli.global, echo)?,
        Command::Norm(args) => norm(args, echo)?,
        Command::Verify(args) => verify(args, &cli.global, echo)?,
        Command::Search(args) => search(args, echo)?,
        Command::Decay(args) => decay(args, echo)?,
    };
    outcome.report.timing.wall_seconds = start.elapsed().as_secs_f64();
    Ok(outcome)
}

fn parse_spec(text: &str) -> anyhow::Result<OrderingSpec> {
    Ok(text.parse::<OrderingSpec>()?)
}

fn random_psi(n: u32, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (-(1i64 << (n + 1)), 1i64 << (n + 2));
    (0..1usize << n).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn read_psi(path: &Path, n: u32) -> anyhow::Result<Vec<i64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading psi file {}", path.display()))?;
    let values = text
        .split_whitespace()
        .map(|w| w.parse::<i64>().with_context(|| format!("psi file {}: bad integer '{w}'", path.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if values.len() != 1 << n {
        bail!("psi file {} has {} values, need {}", path.display(), values.len(), 1u64 << n);
    }
    Ok(values)
}

fn count(args: &CountArgs, global: &GlobalArgs, echo: &str) -> anyhow::Result<Outcome> {
    let spec = parse_spec(&args.ordering)?;
    let strategy = CountStrategy::from(args.strategy);
    let result = match args.set {
        SetArg::A | SetArg::AV => {
            if args.v < 0 {
                bail!("--v must be a non-negative index for {:?}", args.set);
            }
            if args.set == SetArg::A && args.v != 0 {
                bail!("--v is only used with A_v and A_hat_v");
            }
            count_a_with(args.n, &spec.build(args.n)?, args.v as u64, strategy)?
        }
        SetArg::ATilde => count_a_tilde_with(args.n, &spec.build(args.n + 1)?, strategy)?,
        SetArg::B => count_b(args.n, &spec.build(args.n)?)?,
        SetArg::AHatV => count_a_hat_with(args.n, &spec.build(args.n)?, args.v, strategy)?,
        SetArg::PsiPairs => {
            let psi = match &args.psi {
                Some(path) => read_psi(path, args.n)?,
                None => random_psi(args.n, global.seed),
            };
            count_psi_pairs(args.n, &psi)?
        }
    };
    let parameters = json!({
        "set": format!("{:?}", result.set_kind),
        "n": args.n,
        "ordering": spec.to_string(),
        "v": args.v,
        "strategy": format!("{:?}", args.strategy).to_lowercase(),
        "psi": args.psi.as_ref().map(|p| p.display().to_string()),
        "seed": global.seed,
    });
    let mut report = Report::new(echo, parameters);
    report.push(&result);
    Ok(Outcome { violated: !result.proven_bound_holds(), report })
}

#[derive(Serialize)]
struct NormComparison {
    grid: NormResult,
    count: NormResult,
    relative_difference: f64,
    agree: bool,
}

const NORM_TOLERANCE: f64 = 1e-9;

fn norm(args: &NormArgs, echo: &str) -> anyhow::Result<Outcome> {
    let spec = parse_spec(&args.ordering)?;
    let (variant, domain) = match args.variant {
        VariantArg::Full => (Variant::Full, args.n),
        VariantArg::Tail => (Variant::Tail, args.n + 1),
    };
    let key = KeyFunctionSpec::new(args.n, spec.build(domain)?, variant)?;
    let parameters = json!({
        "n": args.n,
        "ordering": spec.to_string(),
        "p": args.p,
        "variant": format!("{:?}", args.variant).to_lowercase(),
        "method": format!("{:?}", args.method).to_lowercase(),
        "grid_s": args.grid_s,
        "grid_t": args.grid_t,
    });
    let mut report = Report::new(echo, parameters);
    let mut violated = false;

    if args.p == "inf" || args.p == "infinity" {
        if args.method != NormMethodArg::Grid {
            bail!("p = inf only supports --method grid");
        }
        let (s, t) = key.exact_grid(4);
        let value = sup_norm_sample(&key, args.grid_s.unwrap_or(s), args.grid_t.unwrap_or(t))?;
        report.push(&json!({ "p": "inf", "value": value, "method": "grid" }));
        return Ok(Outcome { report, violated });
    }
    let p: f64 = args.p.parse().with_context(|| format!("--p must be a number or 'inf', got '{}'", args.p))?;
    let grid = || -> anyhow::Result<NormResult> {
        Ok(match (args.grid_s, args.grid_t) {
            (None, None) if p.fract() == 0.0 && p as u64 % 2 == 0 => lp_norm_key_exact(&key, p)?,
            (s, t) => {
                let (ds, dt) = key.exact_grid(p.ceil().max(2.0) as u32);
                lp_norm_key(&key, p, s.unwrap_or(ds), t.unwrap_or(dt))?
            }
        })
    };
    let count = || -> anyhow::Result<NormResult> {
        if p != 4.0 {
            bail!("--method count needs p = 4");
        }
        let c = match variant {
            Variant::Full => count_a_with(args.n, key.ordering(), 0, CountStrategy::SumHistogram)?,
            Variant::Tail => count_a_tilde_with(args.n, key.ordering(), CountStrategy::SumHistogram)?,
        };
        Ok(NormResult::from_count(c.count))
    };
    match args.method {
        NormMethodArg::Grid => report.push(&grid()?),
        NormMethodArg::Count => report.push(&count()?),
        NormMethodArg::Both => {
            let (grid, count) = (grid()?, count()?);
            let relative_difference = (grid.integral - count.integral).abs() / count.integral.max(f64::MIN_POSITIVE);
            let agree = relative_difference <= NORM_TOLERANCE;
            violated |= !agree && grid.exact;
            report.push(&NormComparison { grid, count, relative_difference, agree });
        }
    }
    if args.lower_bound {
        report.push(&rp_lower_bound(&key, p)?);
    }
    Ok(Outcome { report, violated })
}

fn ordering_or_random(text: Option<&str>, n: u32, rng: &mut ChaCha8Rng) -> anyhow::Result<(String, Ordering)> {
    match text {
        Some(t) => {
            let spec = parse_spec(t)?;
            Ok((spec.to_string(), spec.build(n)?))
        }
        None => Ok(("random".to_string(), Ordering::random(n, rng)?)),
    }
}

fn verify(args: &VerifyArgs, global: &GlobalArgs, echo: &str) -> anyhow::Result<Outcome> {
    let parameters = json!({
        "suite": format!("{:?}", args.suite).to_lowercase(),
        "n": args.n,
        "ordering": args.ordering,
        "pi": args.pi,
        "bits": args.bits,
        "trials": args.trials,
        "seed": global.seed,
    });
    let mut report = Report::new(echo, parameters);
    let mut violated = false;
    let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
    match args.suite {
        Suite::Bounds => {
            let mut specs: Vec<OrderingSpec> = NamedOrdering::ALL.iter().map(|&o| OrderingSpec::Named(o)).collect();
            if let Some(text) = &args.ordering {
                specs = vec![parse_spec(text)?];
            }
            for spec in &specs {
                for n in 0..=args.n {
                    let results: Vec<CountResult> = vec![
                        count_a_with(n, &spec.build(n)?, 0, CountStrategy::SumHistogram)?,
                        count_b(n, &spec.build(n)?)?,
                        count_a_tilde_with(n, &spec.build(n + 1)?, CountStrategy::SumHistogram)?,
                    ];
                    for r in results {
                        violated |= !r.proven_bound_holds();
                        report.push(&json!({ "ordering": spec.to_string(), "result": r }));
                    }
                }
            }
        }
        Suite::Perturbation => {
            for trial in 0..args.trials {
                let (sigma_name, sigma) = ordering_or_random(args.ordering.as_deref(), args.n, &mut rng)?;
                let (pi_name, pi) = ordering_or_random(args.pi.as_deref(), args.n, &mut rng)?;
                let a = verify_perturbation_a(args.n, &sigma, &pi)?;
                let hat = verify_perturbation_a_hat(args.n, &sigma, &pi)?;
                violated |= !a.holds() || !hat.holds();
                for r in [a, hat] {
                    report.push(&json!({ "trial": trial, "sigma": sigma_name, "pi": pi_name, "result": r }));
                }
            }
        }
        Suite::Subset => {
            for seed in global.seed..global.seed + args.trials {
                let r = verify_subset_example(args.n, &args.bits, seed)?;
                violated |= !r.holds();
                report.push(&r);
            }
        }
        Suite::Invariants => {
            for trial in 0..args.trials {
                let (sigma_name, sigma) = ordering_or_random(args.ordering.as_deref(), args.n, &mut rng)?;
                let (pi_name, pi) = ordering_or_random(args.pi.as_deref(), args.n, &mut rng)?;
                let pointwise = check_pointwise(args.n, &sigma, &pi)?;
                let lambda = Ordering::random_linear(args.n, &mut rng)?;
                let composed = Ordering::compose(&lambda, &sigma)?;
                let a_before = count_a_with(args.n, &sigma, 0, CountStrategy::SumHistogram)?.count;
                let a_after = count_a_with(args.n, &composed, 0, CountStrategy::SumHistogram)?.count;
                let b_before = count_b(args.n, &sigma)?.count;
                let b_after = count_b(args.n, &composed)?.count;
                let invariance = a_before == a_after && b_before == b_after;
                violated |= !pointwise.holds() || !invariance;
                report.push(&json!({
                    "trial": trial,
                    "sigma": sigma_name,
                    "pi": pi_name,
                    "pointwise": pointwise,
                    "linear_precomposition": {
                        "count_a": a_before,
                        "count_a_composed": a_after,
                        "count_b": b_before,
                        "count_b_composed": b_after,
                        "holds": invariance,
                    },
                }));
            }
        }
    }
    Ok(Outcome { report, violated })
}

fn write_checkpoint(path: &Path, cp: &SearchCheckpoint) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, cp.to_json()).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))
}

fn search(args: &SearchArgs, echo: &str) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let parameters = json!({
        "n": args.n,
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "goal": format!("{:?}", args.goal).to_lowercase(),
        "bound": format!("{:?}", args.bound).to_lowercase(),
        "split_depth": args.split_depth,
        "batch_size": args.batch_size,
        "checkpoint": args.checkpoint.as_ref().map(|p| p.display().to_string()),
        "checkpoint_interval": args.checkpoint_interval,
        "budget_seconds": args.budget_seconds,
        "budget_nodes": args.budget_nodes,
    });
    let mut report = Report::new(echo, parameters);
    let result = match args.mode {
        ModeArg::Exhaustive => {
            let r = exhaustive_max_b(args.n)?;
            SearchReport::from_exhaustive(&r, start.elapsed().as_secs_f64())
        }
        ModeArg::Pruned => {
            let config = SearchConfig {
                goal: match args.goal {
                    GoalArg::Maximize => SearchGoal::Maximize,
                    GoalArg::Verify => SearchGoal::Verify,
                },
                bound: match args.bound {
                    BoundArg::Simple => BoundStrategy::Simple,
                    BoundArg::Fiber => BoundStrategy::Fiber,
                },
                split_depth: args.split_depth,
                batch_size: args.batch_size,
                max_nodes: args.budget_nodes,
                max_seconds: args.budget_seconds,
                checkpoint_interval: Some(args.checkpoint_interval),
            };
            let resume = match &args.checkpoint {
                Some(path) if path.exists() => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading checkpoint {}", path.display()))?;
                    Some(SearchCheckpoint::from_json(&text)?)
                }
                _ => None,
            };
            let mut save_error = None;
            let cp = pruned_search(args.n, &config, resume, |cp| {
                if let Some(path) = &args.checkpoint {
                    if let Err(e) = write_checkpoint(path, cp) {
                        save_error.get_or_insert(e);
                    }
                }
            })?;
            if let Some(e) = save_error {
                return Err(e);
            }
            if let Some(path) = &args.checkpoint {
                write_checkpoint(path, &cp)?;
            }
            SearchReport::from_checkpoint(&cp, start.elapsed().as_secs_f64())
        }
    };
    let violated = !result.conjecture_holds;
    report.push(&result);
    Ok(Outcome { report, violated })
}

fn decay(args: &DecayArgs, echo: &str) -> anyhow::Result<Outcome> {
    let spec = parse_spec(&args.ordering)?;
    if !spec.is_family() {
        bail!("decay needs an ordering defined for every n, not '{spec}'");
    }
    let set = match args.set {
        DecaySetArg::A => DecaySet::A,
        DecaySetArg::ATilde => DecaySet::ATilde,
    };
    let family: Vec<Ordering> = (0..=args.n_max + 1).map(|n| spec.build(n)).collect::<anyhow::Result<_>>()?;
    let rows = decay_report(args.n_max, set, |n| Ok(family[n as usize].clone()))?;
    let nonincreasing = ratio8_nonincreasing(&rows);
    let violated = rows.iter().any(|r| !r.proven_bound_holds());
    let parameters = json!({
        "set": format!("{:?}", set),
        "n_max": args.n_max,
        "ordering": spec.to_string(),
    });
    let mut report = Report::new(echo, parameters);
    for r in &rows {
        let within = r.ratio8 <= 0.75f64.powi(r.n as i32) * (1.0 + 1e-12);
        report.push(&json!({ "row": r, "within_three_quarters_pow": within, "ratio8_nonincreasing": nonincreasing }));
    }
    Ok(Outcome { report, violated })
}
