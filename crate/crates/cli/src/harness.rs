//! Experiment orchestration: hitting-time measurement, dimension scaling
//! studies, figure-style CSV artifacts, and aggregation.
//!
//! Replicates and grid cells run concurrently; every cell derives its own
//! random stream from the master seed, so results are independent of the
//! host's parallelism, and files are assembled by a single writer after a
//! deterministic sort.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use rayon::prelude::*;

use onefifth_core::objectives::{make_ellipsoid, make_sphere, Objective};
use onefifth_core::sampling::RngStream;
use onefifth_core::strategies::{
    default_cov_learning_rate, run, Budget, DirectSearchParams, GradientlessParams,
    RandomPursuitParams, RunConfig, Strategy, StrategyParams, Target, TargetMetric,
};
use onefifth_core::theory::{annotate_potential, hitting_time_lower_bound, PotentialParams};

use crate::csvio;

/// One full experiment: an objective, a strategy, the initial state, the
/// budget, an optional target, and how many independent replicates to run.
#[derive(Clone)]
pub struct ExperimentConfig {
    pub objective: Objective,
    pub strategy: Strategy,
    pub mean0: DVector<f64>,
    pub sigma0: f64,
    pub budget: Budget,
    pub target: Option<Target>,
    pub n_replicates: u32,
    pub master_seed: u64,
    pub record_every: u64,
}

impl ExperimentConfig {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            budget: self.budget,
            target: self.target,
            record_every: self.record_every,
        }
    }
}

/// The standard starting point `(1, …, 1)/√d`.
pub fn default_start(d: usize) -> DVector<f64> {
    DVector::from_element(d, 1.0 / (d as f64).sqrt())
}

/// Stream id for a (cell, replicate) pair: cells own the high 32 bits so
/// grid cells and replicates never collide.
pub fn replicate_stream(cell: u64, replicate: u32) -> u64 {
    ((cell + 1) << 32) | u64::from(replicate)
}

/// First-hitting-time measurement of one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingTimeResult {
    pub replicate: u32,
    pub epsilon: f64,
    pub metric: TargetMetric,
    pub hit_iteration: Option<u64>,
    pub hit_evals: Option<u64>,
    pub censored: bool,
}

/// Runs all replicates of `cfg` (in parallel) and reports when each first
/// reached the target. Censoring is a value, not an error.
pub fn measure_hitting_time(cfg: &ExperimentConfig) -> Result<Vec<HittingTimeResult>> {
    measure_hitting_time_in_cell(cfg, 0)
}

/// As [`measure_hitting_time`], with an explicit grid-cell index for stream
/// derivation when several measurements share one master seed.
pub fn measure_hitting_time_in_cell(
    cfg: &ExperimentConfig,
    cell: u64,
) -> Result<Vec<HittingTimeResult>> {
    let target = cfg
        .target
        .context("hitting-time measurement needs a target")?;
    let results: Result<Vec<_>> = (0..cfg.n_replicates)
        .into_par_iter()
        .map(|replicate| {
            let mut rng = RngStream::new(cfg.master_seed, replicate_stream(cell, replicate));
            let trace = run(
                &cfg.strategy,
                &cfg.objective,
                cfg.mean0.clone(),
                cfg.sigma0,
                &cfg.run_config(),
                &mut rng,
            )?;
            let last = trace.final_row().expect("traces contain the initial row");
            let metric_value = match target.metric {
                TargetMetric::Distance => last.dist,
                TargetMetric::FMu => last.f_mu,
            };
            let hit = metric_value <= target.epsilon;
            Ok(HittingTimeResult {
                replicate,
                epsilon: target.epsilon,
                metric: target.metric,
                hit_iteration: hit.then_some(last.t),
                hit_evals: hit.then_some(last.evals),
                censored: !hit,
            })
        })
        .collect();
    let mut results = results?;
    results.sort_by_key(|r| r.replicate);
    Ok(results)
}

/// One row of a dimension-scaling study.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub d: usize,
    /// Mean hitting time over the uncensored replicates (iterations).
    pub mean_t: f64,
    /// `mean_t / (d · log(‖m₀‖/ε))`.
    pub ratio: f64,
    /// The distance lower bound with κ = 1.
    pub lower_bound: f64,
    pub censored: u32,
    pub hit_iterations: Vec<u64>,
}

/// Sphere scaling study: for each dimension, the (1+1)-ES with
/// dimension-scaled factors `α↑ = exp(4/d)`, `α↓ = α↑^{-1/4}` is run until
/// the distance to the optimum falls below `epsilon_rel · ‖m₀‖`.
pub fn scaling_study(
    dims: &[usize],
    epsilon_rel: f64,
    n_replicates: u32,
    budget: Budget,
    master_seed: u64,
) -> Result<Vec<ScalingRow>> {
    if !(epsilon_rel > 0.0 && epsilon_rel < 1.0) {
        bail!("epsilon_rel must lie in (0,1)");
    }
    let mut rows = Vec::with_capacity(dims.len());
    for (cell, &d) in dims.iter().enumerate() {
        if d < 2 {
            bail!("scaling study needs d >= 2, got {d}");
        }
        let mean0 = default_start(d);
        let dist0 = mean0.norm();
        let epsilon = epsilon_rel * dist0;
        let cfg = ExperimentConfig {
            objective: make_sphere(d),
            strategy: Strategy::Es(StrategyParams::dimension_scaled(d)),
            mean0,
            sigma0: 1.0,
            budget,
            target: Some(Target {
                metric: TargetMetric::Distance,
                epsilon,
            }),
            n_replicates,
            master_seed,
            record_every: 1 << 20,
        };
        let results = measure_hitting_time_in_cell(&cfg, cell as u64)?;
        let hits: Vec<u64> = results.iter().filter_map(|r| r.hit_iteration).collect();
        let censored = results.iter().filter(|r| r.censored).count() as u32;
        // Censored replicates are excluded from the mean; their count is
        // reported alongside so they are never silently mixed in.
        let mean_t = if hits.is_empty() {
            f64::NAN
        } else {
            hits.iter().sum::<u64>() as f64 / hits.len() as f64
        };
        let denom = d as f64 * (dist0 / epsilon).ln();
        rows.push(ScalingRow {
            d,
            mean_t,
            ratio: mean_t / denom,
            lower_bound: hitting_time_lower_bound(d, 1.0, dist0, epsilon)?,
            censored,
            hit_iterations: hits,
        });
    }
    Ok(rows)
}

/// Pointwise statistic for curve aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Median,
    Mean,
    Quantile(f64),
}

fn statistic_of(sorted: &[f64], stat: Statistic) -> f64 {
    let n = sorted.len();
    match stat {
        Statistic::Mean => sorted.iter().sum::<f64>() / n as f64,
        // Even counts take the midpoint of the central pair.
        Statistic::Median => {
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
        Statistic::Quantile(q) => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        }
    }
}

/// Aligns best-so-far step functions on their union grid of evaluation
/// counts and takes the pointwise statistic. Curves must be non-empty.
pub fn aggregate(curves: &[Vec<(u64, f64)>], stat: Statistic) -> Result<Vec<(u64, f64)>> {
    if curves.is_empty() || curves.iter().any(|c| c.is_empty()) {
        bail!("aggregate needs at least one non-empty curve");
    }
    let mut grid: Vec<u64> = curves.iter().flatten().map(|(e, _)| *e).collect();
    grid.sort_unstable();
    grid.dedup();
    let mut cursors = vec![0usize; curves.len()];
    let mut out = Vec::with_capacity(grid.len());
    for &evals in &grid {
        let mut values = Vec::with_capacity(curves.len());
        for (curve, cursor) in curves.iter().zip(cursors.iter_mut()) {
            while *cursor + 1 < curve.len() && curve[*cursor + 1].0 <= evals {
                *cursor += 1;
            }
            // Step interpolation; before a curve's first point its first
            // value is used.
            values.push(curve[*cursor].1);
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push((evals, statistic_of(&values, stat)));
    }
    Ok(out)
}

/// Which figure-style artifact to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Ellipsoids of growing conditioning, fixed vs adaptive covariance.
    Fig1,
    /// Sphere runs from drastically misadapted initial step sizes, with the
    /// potential-function column filled in.
    Fig2,
    /// The five-strategy comparison on sphere and ellipsoid.
    AppendixA,
}

impl FigureId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "appendixA" | "appendixa" => Ok(FigureId::AppendixA),
            _ => bail!("unknown figure id `{s}` (expected fig1, fig2, or appendixA)"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReproduceOptions {
    pub master_seed: u64,
    /// Budget scale factor; 1.0 is the full artifact, smaller values give
    /// quick smoke runs with identical schemas.
    pub scale: f64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            master_seed: 0,
            scale: 1.0,
        }
    }
}

fn scaled(n: u64, scale: f64) -> u64 {
    ((n as f64 * scale).round() as u64).max(8)
}

/// Writes the CSV artifacts for one figure and returns the file paths.
pub fn reproduce_figure(
    figure: FigureId,
    out_dir: &Path,
    opts: &ReproduceOptions,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    match figure {
        FigureId::Fig1 => reproduce_fig1(out_dir, opts),
        FigureId::Fig2 => reproduce_fig2(out_dir, opts),
        FigureId::AppendixA => reproduce_appendix_a(out_dir, opts),
    }
}

fn echo(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn reproduce_fig1(out_dir: &Path, opts: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    let d = 10;
    let iters = scaled(200_000, opts.scale);
    let record_every = (iters / 4_000).max(1);
    let params = StrategyParams::smooth();
    let adaptive = params
        .with_rank_one(1e6, default_cov_learning_rate(d))
        .expect("valid parameters");
    let cells: Vec<(u32, u32)> = (0..=6u32).flat_map(|k| [(0u32, k), (1u32, k)]).collect();
    let traces: Result<Vec<_>> = cells
        .par_iter()
        .enumerate()
        .map(|(cell, &(which, k))| {
            let kappa_f = 10f64.powi(k as i32);
            let obj = make_ellipsoid(d, kappa_f)?;
            let strategy = if which == 0 {
                Strategy::Es(params)
            } else {
                Strategy::Es(adaptive)
            };
            let mut rng = RngStream::new(opts.master_seed, replicate_stream(cell as u64, 0));
            let config = RunConfig {
                budget: Budget::Iterations(iters),
                target: Some(Target {
                    metric: TargetMetric::Distance,
                    epsilon: 1e-9,
                }),
                record_every,
            };
            let trace = run(&strategy, &obj, default_start(d), 1.0, &config, &mut rng)?;
            Ok((which, k, trace))
        })
        .collect();
    let mut paths = Vec::new();
    for (which, k, trace) in traces? {
        let name = if which == 0 { "es" } else { "es-kappa" };
        let path = out_dir.join(format!("fig1_{name}_kf1e{k}.csv"));
        let mut file = fs::File::create(&path)?;
        csvio::write_trace(
            &mut file,
            &trace,
            &echo(&[
                ("figure", "fig1".into()),
                ("objective", format!("ellipsoid:kappa=1e{k}")),
                ("strategy", name.into()),
                ("d", d.to_string()),
                ("sigma0", "1".into()),
                ("iters", iters.to_string()),
                ("record_every", record_every.to_string()),
                ("seed", opts.master_seed.to_string()),
            ]),
        )?;
        paths.push(path);
    }
    Ok(paths)
}

fn reproduce_fig2(out_dir: &Path, opts: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    let d = 10;
    let iters = scaled(10_000, opts.scale);
    let params = StrategyParams::smooth();
    let pp = PotentialParams::reference(d, &params)?;
    let sigmas = [(1e-4, "1e-4"), (1.0, "1"), (1e4, "1e4")];
    let traces: Result<Vec<_>> = sigmas
        .par_iter()
        .enumerate()
        .map(|(cell, &(sigma0, _))| {
            let obj = make_sphere(d);
            let mut rng = RngStream::new(opts.master_seed, replicate_stream(cell as u64, 0));
            let config = RunConfig {
                budget: Budget::Iterations(iters),
                target: None,
                record_every: 1,
            };
            let mut trace = run(
                &Strategy::Es(params),
                &obj,
                default_start(d),
                sigma0,
                &config,
                &mut rng,
            )?;
            annotate_potential(&mut trace, &pp, &params);
            Ok(trace)
        })
        .collect();
    let mut paths = Vec::new();
    for (trace, (sigma0, label)) in traces?.into_iter().zip(sigmas) {
        let path = out_dir.join(format!("fig2_sigma{label}.csv"));
        let mut file = fs::File::create(&path)?;
        csvio::write_trace(
            &mut file,
            &trace,
            &echo(&[
                ("figure", "fig2".into()),
                ("objective", "sphere".into()),
                ("strategy", "es".into()),
                ("d", d.to_string()),
                ("sigma0", format!("{sigma0:e}")),
                ("iters", iters.to_string()),
                ("potential_v", csvio::fmt_float(pp.v)),
                ("potential_ell", csvio::fmt_float(pp.ell)),
                ("potential_u", csvio::fmt_float(pp.u)),
                ("seed", opts.master_seed.to_string()),
            ]),
        )?;
        paths.push(path);
    }
    Ok(paths)
}

/// The three setups of the five-strategy comparison.
const APPENDIX_SETUPS: [(&str, f64, u64); 3] = [
    ("sphere-s1", 1.0, 100),
    ("sphere-small", 1e-3, 700),
    ("ellipsoid", 1.0, 500),
];

fn appendix_strategy(name: &str, d: usize, sigma0: f64) -> Strategy {
    match name {
        "es" => Strategy::Es(StrategyParams::dimension_scaled(d)),
        "es-kappa" => Strategy::Es(
            StrategyParams::dimension_scaled(d)
                .with_rank_one(1e6, default_cov_learning_rate(d))
                .expect("valid parameters"),
        ),
        "sds" => Strategy::DirectSearch(DirectSearchParams::default()),
        "rp" => Strategy::RandomPursuit(RandomPursuitParams::for_sigma0(sigma0)),
        "gld" => Strategy::Gradientless(
            GradientlessParams::new(sigma0, 1e-10, 2.0).expect("valid parameters"),
        ),
        _ => unreachable!("unknown appendix strategy"),
    }
}

const APPENDIX_STRATEGIES: [&str; 5] = ["es", "es-kappa", "sds", "rp", "gld"];
const APPENDIX_REPLICATES: u32 = 5;

fn reproduce_appendix_a(out_dir: &Path, opts: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    let mut jobs = Vec::new();
    for (setup_idx, &(setup, sigma0, budget_per_d)) in APPENDIX_SETUPS.iter().enumerate() {
        for (d_idx, &d) in [10usize, 50].iter().enumerate() {
            for (s_idx, &strategy) in APPENDIX_STRATEGIES.iter().enumerate() {
                let cell = ((setup_idx * 2 + d_idx) * APPENDIX_STRATEGIES.len() + s_idx) as u64;
                jobs.push((setup, sigma0, budget_per_d, d, strategy, cell));
            }
        }
    }
    let results: Result<Vec<_>> = jobs
        .par_iter()
        .map(|&(setup, sigma0, budget_per_d, d, strategy_name, cell)| {
            let obj = if setup == "ellipsoid" {
                make_ellipsoid(d, 100.0)?
            } else {
                make_sphere(d)
            };
            let strategy = appendix_strategy(strategy_name, d, sigma0);
            let budget = Budget::Evaluations(scaled(budget_per_d * d as u64, opts.scale));
            let curves: Result<Vec<_>> = (0..APPENDIX_REPLICATES)
                .map(|rep| {
                    let mut rng = RngStream::new(opts.master_seed, replicate_stream(cell, rep));
                    let config = RunConfig {
                        budget,
                        target: None,
                        record_every: 1,
                    };
                    let trace = run(&strategy, &obj, default_start(d), sigma0, &config, &mut rng)?;
                    Ok(trace.best_so_far())
                })
                .collect();
            Ok((setup, d, strategy_name, budget, curves?))
        })
        .collect();

    let mut paths = Vec::new();
    for (setup, d, strategy_name, budget, curves) in results? {
        let base_echo = |kind: &str| {
            echo(&[
                ("figure", "appendixA".into()),
                ("setup", setup.into()),
                ("d", d.to_string()),
                ("strategy", strategy_name.into()),
                ("replicates", APPENDIX_REPLICATES.to_string()),
                ("budget_evals", format!("{budget:?}")),
                ("kind", kind.into()),
                ("seed", opts.master_seed.to_string()),
            ])
        };
        let runs_path = out_dir.join(format!("appendixA_{setup}_d{d}_{strategy_name}.csv"));
        let mut file = fs::File::create(&runs_path)?;
        csvio::write_curves(&mut file, &curves, &base_echo("runs"))?;
        paths.push(runs_path);

        let median = aggregate(&curves, Statistic::Median)?;
        let median_path =
            out_dir.join(format!("appendixA_{setup}_d{d}_{strategy_name}_median.csv"));
        let mut file = fs::File::create(&median_path)?;
        csvio::write_curve(&mut file, &median, None, &base_echo("median"))?;
        paths.push(median_path);
    }
    Ok(paths)
}
