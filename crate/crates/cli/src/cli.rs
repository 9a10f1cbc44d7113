//! Flag parsing and subcommand dispatch for the `es` binary.
//!
//! Values accepted by scalar flags use an `e` shorthand for exponentials:
//! `e0.1` means `exp(0.1)` and `e-0.025` means `exp(-0.025)`, so the exact
//! step-size factors can be given without decimal rounding. An optional
//! config file supplies `key=value` defaults that explicit flags override.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use onefifth_core::error::Error as CoreError;
use onefifth_core::sampling::RngStream;
use onefifth_core::strategies::{
    default_cov_learning_rate, run, Budget, DirectSearchParams, GradientlessParams,
    RandomPursuitParams, RunConfig, Strategy, StrategyParams, Target, TargetMetric,
};
use onefifth_core::theory::{
    annotate_potential, standard_report, verify_additive_drift_lower, verify_additive_drift_upper,
    DriftVerification, LowerDriftProcess, PotentialParams, ReportOptions, UpperDriftProcess,
};

use crate::csvio;
use crate::harness::{
    self, default_start, measure_hitting_time, scaling_study, ExperimentConfig, FigureId,
    ReproduceOptions,
};
use crate::objspec;

/// Parses a scalar that may use the `e<x> = exp(x)` shorthand.
pub fn parse_scalar(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('e') {
        if let Ok(x) = rest.parse::<f64>() {
            return Ok(x.exp());
        }
    }
    s.parse::<f64>()
        .map_err(|_| anyhow!("invalid scalar `{s}` (plain float or e<x> for exp(x))"))
}

fn parse_scalar_arg(s: &str) -> std::result::Result<f64, String> {
    parse_scalar(s).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "es",
    about = "Elitist (1+1) evolution strategies with success-based step-size control: runs, hitting-time studies, scaling studies, theoretical bounds, drift-theorem verification, and figure-style artifacts.",
    disable_help_subcommand = true
)]
struct EsCli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one optimizer once and emit its trace as CSV.
    Run(RunArgs),
    /// Measure first hitting times over independent replicates.
    Hit(HitArgs),
    /// Sphere scaling study across dimensions.
    Scaling(ScalingArgs),
    /// Compute the theoretical bounds for one configuration.
    Theory(TheoryArgs),
    /// Verify the additive-drift theorems on synthetic processes.
    DriftVerify(DriftVerifyArgs),
    /// Reproduce the figure-style CSV artifacts.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Objective id: sphere | ellipsoid:kappa=<v> | quadratic:file=<path> |
    /// linf, with optional wrappers |log1p, |sqrt, |rot=<seed>.
    /// [default: sphere]
    #[arg(long)]
    obj: Option<String>,
    /// Search-space dimension. [default: 10]
    #[arg(long)]
    d: Option<usize>,
    /// Master seed; fully determines all randomness. [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key=value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct StrategyArgs {
    /// Strategy id: es | es-kappa | sds | rp | gld. [default: es]
    #[arg(long)]
    strategy: Option<String>,
    /// Step-size increase factor. [default: e0.1]
    #[arg(long, value_parser = parse_scalar_arg)]
    alpha_up: Option<f64>,
    /// Step-size decrease factor. [default: e-0.025]
    #[arg(long, value_parser = parse_scalar_arg)]
    alpha_down: Option<f64>,
    /// Condition-number cap for es-kappa. [default: 1e6]
    #[arg(long, value_parser = parse_scalar_arg)]
    kappa: Option<f64>,
    /// Rank-one covariance learning rate. [default: 2/(d^2+6)]
    #[arg(long, value_parser = parse_scalar_arg)]
    cov_learning_rate: Option<f64>,
    /// Sufficient-decrease constant of sds. [default: 0.1]
    #[arg(long, value_parser = parse_scalar_arg)]
    ds_c: Option<f64>,
    /// Gradientless-descent target precision. [default: 1e-10]
    #[arg(long, value_parser = parse_scalar_arg)]
    gld_target: Option<f64>,
    /// Gradientless-descent radius-grid ratio. [default: 2]
    #[arg(long, value_parser = parse_scalar_arg)]
    gld_ratio: Option<f64>,
    /// Initial step size. [default: 1]
    #[arg(long, value_parser = parse_scalar_arg)]
    sigma0: Option<f64>,
    /// Initial mean, comma-separated. [default: (1,...,1)/sqrt(d)]
    #[arg(long)]
    m0: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Iteration budget (mutually exclusive with --evals). [default: 1000]
    #[arg(long)]
    iters: Option<u64>,
    /// Evaluation budget.
    #[arg(long, conflicts_with = "iters")]
    evals: Option<u64>,
    /// Stop when the metric reaches this value.
    #[arg(long, value_parser = parse_scalar_arg)]
    epsilon: Option<f64>,
    /// Target metric: distance | f_mu. [default: distance]
    #[arg(long)]
    metric: Option<String>,
    /// Record every k-th iteration. [default: 1]
    #[arg(long)]
    record_every: Option<u64>,
    /// Fill the potential column (v=4/d, ell=alpha_up^-10, u=alpha_down^-10).
    #[arg(long)]
    potential: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct HitArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Target accuracy. [default: 1e-6]
    #[arg(long, value_parser = parse_scalar_arg)]
    epsilon: Option<f64>,
    /// Target metric: distance | f_mu. [default: distance]
    #[arg(long)]
    metric: Option<String>,
    /// Independent replicates. [default: 20]
    #[arg(long)]
    replicates: Option<u32>,
    /// Evaluation budget per replicate. [default: 1000000]
    #[arg(long)]
    budget_evals: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ScalingArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated dimensions. [default: 2,5,10,20,40]
    #[arg(long)]
    dims: Option<String>,
    /// Target accuracy relative to the initial distance. [default: 1e-6]
    #[arg(long, value_parser = parse_scalar_arg)]
    epsilon_rel: Option<f64>,
    /// Independent replicates per dimension. [default: 20]
    #[arg(long)]
    replicates: Option<u32>,
    /// Evaluation budget per replicate. [default: 1000000]
    #[arg(long)]
    budget_evals: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct TheoryArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Target accuracy for the hitting-time bounds. [default: 1e-6]
    #[arg(long, value_parser = parse_scalar_arg)]
    epsilon: Option<f64>,
    /// Drift truncation constant A. [default: 1/d]
    #[arg(long, value_parser = parse_scalar_arg)]
    a: Option<f64>,
    /// Window lower edge. [default: alpha_up^-10]
    #[arg(long, value_parser = parse_scalar_arg)]
    ell: Option<f64>,
    /// Window upper edge. [default: alpha_down^-10]
    #[arg(long, value_parser = parse_scalar_arg)]
    u: Option<f64>,
    /// Monte-Carlo samples per grid point. [default: 100000]
    #[arg(long)]
    mc_samples: Option<u64>,
    /// Also write the report as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DriftVerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Truncation constant A of the upper theorem. [default: 1]
    #[arg(long, value_parser = parse_scalar_arg)]
    a: Option<f64>,
    /// Drift constant B of the upper theorem. [default: 0.1]
    #[arg(long, value_parser = parse_scalar_arg)]
    b: Option<f64>,
    /// Drift magnitude C of the lower theorem. [default: 0.1]
    #[arg(long, value_parser = parse_scalar_arg)]
    c: Option<f64>,
    /// Start level. [default: 1]
    #[arg(long, value_parser = parse_scalar_arg)]
    beta0: Option<f64>,
    /// Target level. [default: 0]
    #[arg(long, value_parser = parse_scalar_arg)]
    beta: Option<f64>,
    /// Simulated runs per process. [default: 10000]
    #[arg(long)]
    runs: Option<u64>,
    /// Also verify a custom rare-jump process `X - jump` w.p. `prob`.
    #[arg(long, value_parser = parse_scalar_arg, requires = "custom_prob")]
    custom_jump: Option<f64>,
    #[arg(long, value_parser = parse_scalar_arg, requires = "custom_jump")]
    custom_prob: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ReproduceArgs {
    /// Figure id: fig1 | fig2 | appendixA.
    figure: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory. [default: ./out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Budget scale factor for quick smoke runs. [default: 1]
    #[arg(long, value_parser = parse_scalar_arg)]
    scale: Option<f64>,
}

/// Config-file values: flat `key=value` lines, `#` comments allowed. Keys
/// use the flag names with either `-` or `_`.
#[derive(Debug, Default, Clone)]
struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    anyhow!("{}:{}: expected key=value", path.display(), lineno + 1)
                })?;
                values.insert(key.trim().replace('-', "_"), value.trim().to_string());
            }
            let known = [
                "obj",
                "d",
                "seed",
                "strategy",
                "alpha_up",
                "alpha_down",
                "kappa",
                "cov_learning_rate",
                "ds_c",
                "gld_target",
                "gld_ratio",
                "sigma0",
                "m0",
                "iters",
                "evals",
                "epsilon",
                "epsilon_rel",
                "metric",
                "record_every",
                "replicates",
                "budget_evals",
                "dims",
            ];
            for key in values.keys() {
                if !known.contains(&key.as_str()) {
                    bail!("unknown config key `{key}` in {}", path.display());
                }
            }
        }
        Ok(Self { values })
    }

    fn scalar(&self, key: &str) -> Result<Option<f64>> {
        self.values.get(key).map(|s| parse_scalar(s)).transpose()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| anyhow!("invalid config value for `{key}`: {s}"))
            })
            .transpose()
    }

    fn string(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }
}

/// The fully resolved problem/strategy configuration shared by run-like
/// subcommands, plus its echo for CSV preambles.
struct Resolved {
    obj_spec: String,
    d: usize,
    seed: u64,
    strategy: Strategy,
    strategy_id: String,
    alpha_up: f64,
    alpha_down: f64,
    sigma0: f64,
    mean0: DVector<f64>,
    params: StrategyParams,
}

fn resolve(common: &CommonArgs, strat: &StrategyArgs, file: &FileConfig) -> Result<Resolved> {
    let obj_spec = common
        .obj
        .clone()
        .or(file.string("obj"))
        .unwrap_or_else(|| "sphere".to_string());
    let d = common.d.or(file.parse("d")?).unwrap_or(10);
    if d == 0 {
        bail!("--d must be positive");
    }
    let seed = common.seed.or(file.parse("seed")?).unwrap_or(0);
    let strategy_id = strat
        .strategy
        .clone()
        .or(file.string("strategy"))
        .unwrap_or_else(|| "es".to_string());
    let alpha_up = strat
        .alpha_up
        .or(file.scalar("alpha_up")?)
        .unwrap_or_else(|| 0.1_f64.exp());
    let alpha_down = strat
        .alpha_down
        .or(file.scalar("alpha_down")?)
        .unwrap_or_else(|| (-0.025_f64).exp());
    let sigma0 = strat.sigma0.or(file.scalar("sigma0")?).unwrap_or(1.0);
    let mean0 = match strat.m0.clone().or(file.string("m0")) {
        Some(spec) => {
            let coords: Result<Vec<f64>> = spec
                .split(',')
                .map(|tok| parse_scalar(tok).context("invalid --m0 coordinate"))
                .collect();
            let coords = coords?;
            if coords.len() != d {
                bail!("--m0 has {} coordinates, expected {}", coords.len(), d);
            }
            DVector::from_vec(coords)
        }
        None => default_start(d),
    };

    let es_params = |kappa_default: f64| -> Result<StrategyParams> {
        Ok(StrategyParams::new(alpha_up, alpha_down)?.with_rank_one(
            strat
                .kappa
                .or(file.scalar("kappa")?)
                .unwrap_or(kappa_default),
            strat
                .cov_learning_rate
                .or(file.scalar("cov_learning_rate")?)
                .unwrap_or_else(|| default_cov_learning_rate(d)),
        )?)
    };
    let (strategy, params) = match strategy_id.as_str() {
        "es" => {
            let p = StrategyParams::new(alpha_up, alpha_down)?;
            (Strategy::Es(p), p)
        }
        "es-kappa" => {
            let p = es_params(1e6)?;
            (Strategy::Es(p), p)
        }
        "sds" => {
            let c = strat.ds_c.or(file.scalar("ds_c")?).unwrap_or(0.1);
            (
                Strategy::DirectSearch(DirectSearchParams { c }),
                StrategyParams::new(alpha_up, alpha_down)?,
            )
        }
        "rp" => (
            Strategy::RandomPursuit(RandomPursuitParams::for_sigma0(sigma0)),
            StrategyParams::new(alpha_up, alpha_down)?,
        ),
        "gld" => {
            let target = strat
                .gld_target
                .or(file.scalar("gld_target")?)
                .unwrap_or(1e-10);
            let ratio = strat.gld_ratio.or(file.scalar("gld_ratio")?).unwrap_or(2.0);
            (
                Strategy::Gradientless(GradientlessParams::new(sigma0, target, ratio)?),
                StrategyParams::new(alpha_up, alpha_down)?,
            )
        }
        other => bail!("unknown strategy `{other}` (expected es, es-kappa, sds, rp, or gld)"),
    };
    Ok(Resolved {
        obj_spec,
        d,
        seed,
        strategy,
        strategy_id,
        alpha_up,
        alpha_down,
        sigma0,
        mean0,
        params,
    })
}

fn parse_metric(metric: Option<String>, file: &FileConfig) -> Result<TargetMetric> {
    match metric
        .or(file.string("metric"))
        .unwrap_or_else(|| "distance".to_string())
        .as_str()
    {
        "distance" => Ok(TargetMetric::Distance),
        "f_mu" => Ok(TargetMetric::FMu),
        other => bail!("unknown metric `{other}` (expected distance or f_mu)"),
    }
}

fn base_echo(r: &Resolved) -> Vec<(String, String)> {
    vec![
        ("obj".to_string(), r.obj_spec.clone()),
        ("d".to_string(), r.d.to_string()),
        ("seed".to_string(), r.seed.to_string()),
        ("strategy".to_string(), r.strategy_id.clone()),
        ("alpha_up".to_string(), csvio::fmt_float(r.alpha_up)),
        ("alpha_down".to_string(), csvio::fmt_float(r.alpha_down)),
        ("sigma0".to_string(), csvio::fmt_float(r.sigma0)),
    ]
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_ref())?;
    let r = resolve(&args.common, &args.strategy, &file)?;
    let obj = objspec::parse_objective(&r.obj_spec, r.d)?;
    let budget = match (
        args.iters.or(file.parse("iters")?),
        args.evals.or(file.parse("evals")?),
    ) {
        (_, Some(evals)) => Budget::Evaluations(evals),
        (Some(iters), None) => Budget::Iterations(iters),
        (None, None) => Budget::Iterations(1000),
    };
    let target = match args.epsilon.or(file.scalar("epsilon")?) {
        Some(epsilon) => Some(Target {
            metric: parse_metric(args.metric.clone(), &file)?,
            epsilon,
        }),
        None => None,
    };
    let record_every = args
        .record_every
        .or(file.parse("record_every")?)
        .unwrap_or(1);
    let config = RunConfig {
        budget,
        target,
        record_every,
    };
    let mut rng = RngStream::new(r.seed, 1);
    let mut trace = run(
        &r.strategy,
        &obj,
        r.mean0.clone(),
        r.sigma0,
        &config,
        &mut rng,
    )?;
    if args.potential {
        let pp = PotentialParams::reference(r.d, &r.params)?;
        annotate_potential(&mut trace, &pp, &r.params);
    }
    let mut echo = base_echo(&r);
    echo.push(("budget".to_string(), format!("{budget:?}")));
    echo.push(("record_every".to_string(), record_every.to_string()));
    let mut w = open_out(&args.out)?;
    csvio::write_trace(&mut w, &trace, &echo)?;
    Ok(())
}

fn cmd_hit(args: &HitArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_ref())?;
    let r = resolve(&args.common, &args.strategy, &file)?;
    let obj = objspec::parse_objective(&r.obj_spec, r.d)?;
    let epsilon = args.epsilon.or(file.scalar("epsilon")?).unwrap_or(1e-6);
    let metric = parse_metric(args.metric.clone(), &file)?;
    let replicates = args.replicates.or(file.parse("replicates")?).unwrap_or(20);
    let budget = Budget::Evaluations(
        args.budget_evals
            .or(file.parse("budget_evals")?)
            .unwrap_or(1_000_000),
    );
    let kappa_f = objspec::objective_kappa_f(&obj);
    let cfg = ExperimentConfig {
        objective: obj,
        strategy: r.strategy.clone(),
        mean0: r.mean0.clone(),
        sigma0: r.sigma0,
        budget,
        target: Some(Target { metric, epsilon }),
        n_replicates: replicates,
        master_seed: r.seed,
        record_every: 1 << 20,
    };
    let results = measure_hitting_time(&cfg)?;
    let mut echo = base_echo(&r);
    echo.push(("epsilon".to_string(), csvio::fmt_float(epsilon)));
    echo.push(("metric".to_string(), metric.name().to_string()));
    echo.push(("replicates".to_string(), replicates.to_string()));
    echo.push(("budget".to_string(), format!("{budget:?}")));
    let mut w = open_out(&args.out)?;
    csvio::write_hitting(&mut w, r.d, kappa_f, &r.strategy_id, &results, &echo)?;
    Ok(())
}

fn cmd_scaling(args: &ScalingArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_ref())?;
    let seed = args.common.seed.or(file.parse("seed")?).unwrap_or(0);
    let dims: Vec<usize> = args
        .dims
        .clone()
        .or(file.string("dims"))
        .unwrap_or_else(|| "2,5,10,20,40".to_string())
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .context("invalid dimension list")
        })
        .collect::<Result<_>>()?;
    let epsilon_rel = args
        .epsilon_rel
        .or(file.scalar("epsilon_rel")?)
        .unwrap_or(1e-6);
    let replicates = args.replicates.or(file.parse("replicates")?).unwrap_or(20);
    let budget = Budget::Evaluations(
        args.budget_evals
            .or(file.parse("budget_evals")?)
            .unwrap_or(1_000_000),
    );
    let rows = scaling_study(&dims, epsilon_rel, replicates, budget, seed)?;
    let echo = vec![
        ("obj".to_string(), "sphere".to_string()),
        ("strategy".to_string(), "es".to_string()),
        ("alpha".to_string(), "exp(4/d), exp(-1/d)".to_string()),
        (
            "dims".to_string(),
            dims.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        ),
        ("epsilon_rel".to_string(), csvio::fmt_float(epsilon_rel)),
        ("replicates".to_string(), replicates.to_string()),
        ("budget".to_string(), format!("{budget:?}")),
        ("seed".to_string(), seed.to_string()),
    ];
    let mut w = open_out(&args.out)?;
    csvio::write_scaling(&mut w, &rows, &echo)?;
    Ok(())
}

fn cmd_theory(args: &TheoryArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_ref())?;
    let r = resolve(&args.common, &args.strategy, &file)?;
    let obj = objspec::parse_objective(&r.obj_spec, r.d)?;
    let epsilon = args.epsilon.or(file.scalar("epsilon")?).unwrap_or(1e-6);
    let opts = ReportOptions {
        a: args.a,
        ell: args.ell,
        u: args.u,
        mc_samples: args.mc_samples.unwrap_or(100_000),
        ..ReportOptions::default()
    };
    let mut rng = RngStream::new(r.seed, 2);
    let report = standard_report(
        &obj, &r.params, &r.mean0, r.sigma0, epsilon, &opts, &mut rng,
    )?;
    print!("{}", csvio::render_report_text(&report));
    if let Some(path) = &args.csv {
        let mut echo = base_echo(&r);
        echo.push(("epsilon".to_string(), csvio::fmt_float(epsilon)));
        let mut w =
            fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        csvio::write_report_csv(&mut w, &report, &echo)?;
    }
    Ok(())
}

fn print_verification(name: &str, v: &DriftVerification) {
    println!(
        "{name}: {}  mean={:.6} ci99=[{:.6}, {:.6}] bound={:.6} runs={}",
        if v.pass { "PASS" } else { "FAIL" },
        v.empirical_mean,
        v.ci99.0,
        v.ci99.1,
        v.bound,
        v.n_runs
    );
}

fn cmd_drift_verify(args: &DriftVerifyArgs) -> Result<()> {
    let seed = args.common.seed.unwrap_or(0);
    let a = args.a.unwrap_or(1.0);
    let b = args.b.unwrap_or(0.1);
    let c = args.c.unwrap_or(0.1);
    let beta0 = args.beta0.unwrap_or(1.0);
    let beta = args.beta.unwrap_or(0.0);
    let runs = args.runs.unwrap_or(10_000);
    let mut rng = RngStream::new(seed, 3);
    let mut all_pass = true;
    let upper = [
        (
            "upper/deterministic",
            UpperDriftProcess::DeterministicDecrement,
        ),
        ("upper/two-point", UpperDriftProcess::TwoPoint),
    ];
    for (name, process) in upper {
        let v = verify_additive_drift_upper(process, a, b, beta0, beta, runs, &mut rng)?;
        print_verification(name, &v);
        all_pass &= v.pass;
    }
    if let (Some(jump), Some(prob)) = (args.custom_jump, args.custom_prob) {
        let v = verify_additive_drift_upper(
            UpperDriftProcess::Custom { jump, prob },
            a,
            b,
            beta0,
            beta,
            runs,
            &mut rng,
        )?;
        print_verification("upper/custom", &v);
        all_pass &= v.pass;
    }
    let lower = [
        (
            "lower/deterministic",
            LowerDriftProcess::DeterministicDecrement,
        ),
        ("lower/exponential", LowerDriftProcess::Exponential),
    ];
    for (name, process) in lower {
        let v = verify_additive_drift_lower(process, c, beta0, beta, runs, &mut rng)?;
        print_verification(name, &v);
        all_pass &= v.pass;
    }
    if !all_pass {
        bail!("at least one drift verification failed");
    }
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<()> {
    let figure = FigureId::parse(&args.figure)?;
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let opts = ReproduceOptions {
        master_seed: args.common.seed.unwrap_or(0),
        scale: args.scale.unwrap_or(1.0),
    };
    let paths = harness::reproduce_figure(figure, &out_dir, &opts)?;
    for path in paths {
        println!("{}", path.display());
    }
    Ok(())
}

/// Exit status: 0 success, 1 configuration error, 2 numeric abort.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match EsCli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let ok = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if ok { 0 } else { 1 };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Hit(args) => cmd_hit(args),
        Command::Scaling(args) => cmd_scaling(args),
        Command::Theory(args) => cmd_theory(args),
        Command::DriftVerify(args) => cmd_drift_verify(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numeric = err.chain().any(|cause| {
                matches!(
                    cause.downcast_ref::<CoreError>(),
                    Some(CoreError::StepSizeOutOfRange { .. })
                )
            });
            if numeric {
                2
            } else {
                1
            }
        }
    }
}
