//! The five optimizers: the elitist (1+1)-ES with success-based step-size
//! control (optionally with rank-one covariance adaptation inside the
//! bounded-condition constraint set), simplified direct search, random
//! pursuit, and gradientless descent. Each is a stepwise state machine; a
//! [`run`] drives the chosen step to a budget or target and records a
//! [`Trace`].

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // used by no_std builds for float math
use num_traits::Float;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::sampling::{
    condition_number, project_to_sk, sample_candidate, standard_normal, unit_sphere_direction,
    Covariance, RngStream,
};
use crate::trace::{Trace, TraceRow};

/// Hard bounds on the step size; leaving them aborts the run loudly.
pub const SIGMA_MIN: f64 = 1e-300;
pub const SIGMA_MAX: f64 = 1e300;

/// How the sampling covariance evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovUpdate {
    /// Σ stays at the identity.
    None,
    /// Rank-one update toward successful steps, projected back into the
    /// constraint set after every change.
    RankOne,
}

/// Parameters of the success-based step-size rule (and covariance update).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    /// Step-size increase factor on success, `> 1`.
    pub alpha_up: f64,
    /// Step-size decrease factor on failure, in `(0, 1)`.
    pub alpha_down: f64,
    /// Condition-number cap for the sampling covariance; 1 pins Σ = I.
    pub kappa: f64,
    pub cov_update: CovUpdate,
    /// Learning rate of the rank-one update, in `(0, 1]`.
    pub cov_learning_rate: f64,
}

impl StrategyParams {
    pub fn new(alpha_up: f64, alpha_down: f64) -> Result<Self> {
        let p = Self {
            alpha_up,
            alpha_down,
            kappa: 1.0,
            cov_update: CovUpdate::None,
            cov_learning_rate: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Enables the rank-one covariance update under the given condition cap.
    pub fn with_rank_one(mut self, kappa: f64, learning_rate: f64) -> Result<Self> {
        self.kappa = kappa;
        self.cov_update = CovUpdate::RankOne;
        self.cov_learning_rate = learning_rate;
        self.validate()?;
        Ok(self)
    }

    /// The textbook parameterization `α↑ ≈ 1.5`, `α↓ = 1.5^{-1/4}`.
    pub fn classic() -> Self {
        Self::new(1.5, 1.5_f64.powf(-0.25)).expect("valid by construction")
    }

    /// `α↑ = e^{0.1}`, `α↓ = e^{-0.025}`.
    pub fn smooth() -> Self {
        Self::new((0.1_f64).exp(), (-0.025_f64).exp()).expect("valid by construction")
    }

    /// Dimension-scaled factors `α↑ = exp(4/d)`, `α↓ = α↑^{-1/4}`.
    pub fn dimension_scaled(d: usize) -> Self {
        let up = (4.0 / d as f64).exp();
        Self::new(up, up.powf(-0.25)).expect("valid by construction")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_up > 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha_up",
                reason: "must be > 1",
            });
        }
        if !(self.alpha_down > 0.0 && self.alpha_down < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha_down",
                reason: "must be in (0,1)",
            });
        }
        if !(self.kappa >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: "must be >= 1",
            });
        }
        if self.cov_update == CovUpdate::RankOne
            && !(self.cov_learning_rate > 0.0 && self.cov_learning_rate <= 1.0)
        {
            return Err(Error::InvalidParameter {
                name: "cov_learning_rate",
                reason: "must be in (0,1] for the rank-one update",
            });
        }
        let p = self.p_target();
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha_up/alpha_down",
                reason: "derived target success probability must lie in (0,1)",
            });
        }
        Ok(())
    }

    /// The target success probability implied by the factors,
    /// `log(1/α↓) / log(α↑/α↓)`.
    pub fn p_target(&self) -> f64 {
        crate::theory::target_success_probability(self.alpha_up, self.alpha_down)
    }
}

/// Default rank-one learning rate for dimension `d`.
pub fn default_cov_learning_rate(d: usize) -> f64 {
    2.0 / (d as f64 * d as f64 + 6.0)
}

/// The full algorithm state θ = (m, σ, Σ) plus counters.
#[derive(Debug, Clone)]
pub struct StrategyState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: Covariance,
    pub iteration: u64,
    pub evals: u64,
    /// Objective value at `mean`, cached. Equals `f(mean)` at all times.
    pub best_value: f64,
}

impl StrategyState {
    /// Evaluates the objective once at `mean0` (counted).
    pub fn init(obj: &Objective, mean0: DVector<f64>, sigma0: f64) -> Result<Self> {
        if mean0.len() != obj.dim() {
            return Err(Error::DimensionMismatch {
                expected: obj.dim(),
                got: mean0.len(),
            });
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma0",
                reason: "must be positive",
            });
        }
        let best_value = obj.evaluate(&mean0);
        let d = mean0.len();
        Ok(Self {
            mean: mean0,
            sigma: sigma0,
            cov: Covariance::identity(d),
            iteration: 0,
            evals: 1,
            best_value,
        })
    }

    fn guard_sigma(&self) -> Result<()> {
        if !(self.sigma >= SIGMA_MIN && self.sigma <= SIGMA_MAX) {
            return Err(Error::StepSizeOutOfRange {
                sigma: self.sigma,
                iteration: self.iteration,
            });
        }
        Ok(())
    }
}

/// What one (1+1)-ES iteration did.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub accepted: bool,
    pub candidate: DVector<f64>,
    pub candidate_value: f64,
    pub z_sample: DVector<f64>,
}

/// The rank-one covariance update: on success,
/// `Σ_raw = (1 - c) Σ + c (A z)(A z)ᵀ` with `c` the learning rate; on
/// failure the matrix is returned unchanged. The caller projects the result
/// back into the constraint set.
pub fn rank_one_cov_update(
    cov: &Covariance,
    outcome: &StepOutcome,
    params: &StrategyParams,
) -> DMatrix<f64> {
    let c = params.cov_learning_rate;
    if params.cov_update != CovUpdate::RankOne || c == 0.0 || !outcome.accepted {
        return cov.matrix().clone();
    }
    let y = cov.factor() * &outcome.z_sample;
    let mut raw = cov.matrix() * (1.0 - c);
    raw.ger(c, &y, &y, 1.0);
    raw
}

/// One iteration of the (1+1)-ES: sample `x = m + σ A z`, accept iff
/// `f(x) ≤ f(m)` (ties accept), multiply σ by `α↑` on success and `α↓` on
/// failure, then apply the covariance update. Consumes one evaluation.
pub fn es_step(
    state: &mut StrategyState,
    params: &StrategyParams,
    obj: &Objective,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let (x, z) = sample_candidate(&state.mean, state.sigma, &state.cov, rng);
    es_step_with_sample(state, params, obj, x, z)
}

/// The same iteration with the candidate supplied by the caller, so
/// invariance tests can replay transformed samples.
pub fn es_step_with_sample(
    state: &mut StrategyState,
    params: &StrategyParams,
    obj: &Objective,
    candidate: DVector<f64>,
    z: DVector<f64>,
) -> Result<StepOutcome> {
    let candidate_value = obj.evaluate(&candidate);
    let accepted = candidate_value <= state.best_value;
    let outcome = StepOutcome {
        accepted,
        candidate,
        candidate_value,
        z_sample: z,
    };
    if accepted {
        if params.cov_update == CovUpdate::RankOne && params.cov_learning_rate > 0.0 {
            let raw = rank_one_cov_update(&state.cov, &outcome, params);
            state.cov = project_to_sk(&raw, params.kappa)?;
        }
        state.mean = outcome.candidate.clone();
        state.best_value = candidate_value;
        state.sigma *= params.alpha_up;
    } else {
        state.sigma *= params.alpha_down;
    }
    state.iteration += 1;
    state.evals += 1;
    state.guard_sigma()?;
    debug_assert_eq!(state.best_value, obj.evaluate(&state.mean));
    Ok(outcome)
}

/// Sufficient-decrease constant of simplified direct search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSearchParams {
    pub c: f64,
}

impl Default for DirectSearchParams {
    fn default() -> Self {
        Self { c: 0.1 }
    }
}

/// One sweep of simplified direct search: the polling set `{±e_i}` is walked
/// in a fresh random order, every direction is evaluated, and the first
/// candidate satisfying `f(x) ≤ f(m) - c σ²` is taken. σ is kept on success
/// and halved after a sweep with no success. Consumes `2d` evaluations.
pub fn simplified_direct_search_step(
    state: &mut StrategyState,
    obj: &Objective,
    params: &DirectSearchParams,
    rng: &mut RngStream,
) -> Result<bool> {
    if !(params.c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "ds_c",
            reason: "must be > 0",
        });
    }
    let d = state.mean.len();
    let mut directions: Vec<(usize, f64)> = (0..d).flat_map(|i| [(i, 1.0), (i, -1.0)]).collect();
    directions.shuffle(rng);

    let base = state.mean.clone();
    let threshold = state.best_value - params.c * state.sigma * state.sigma;
    let mut moved = false;
    for (i, sign) in directions {
        let mut x = base.clone();
        x[i] += sign * state.sigma;
        let fx = obj.evaluate(&x);
        if !moved && fx <= threshold {
            state.mean = x;
            state.best_value = fx;
            moved = true;
        }
    }
    state.evals += 2 * d as u64;
    state.iteration += 1;
    if !moved {
        state.sigma *= 0.5;
    }
    state.guard_sigma()?;
    Ok(moved)
}

/// Random-pursuit configuration. σ is carried as the length of the previous
/// step, floored to avoid a degenerate line-search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPursuitParams {
    pub sigma_floor: f64,
}

impl RandomPursuitParams {
    /// The floor used throughout: one millionth of the initial step size.
    pub fn for_sigma0(sigma0: f64) -> Self {
        Self {
            sigma_floor: sigma0 / 1e6,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 - 1)/2

/// Golden-section minimization of `g` on `[a, b]` down to interval width
/// `tol`. Returns the midpoint of the final bracket and the number of
/// evaluations consumed (deterministic for fixed `(b - a)/tol`).
pub fn golden_section_min(g: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, u64) {
    debug_assert!(b > a && tol > 0.0);
    let mut a = a;
    let mut b = b;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    let mut evals = 2;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d);
        }
        evals += 1;
    }
    (0.5 * (a + b), evals)
}

/// Number of evaluations one random-pursuit iteration always consumes:
/// the golden-section probes on `[-2σ, 2σ]` with tolerance `σ/2`, plus the
/// evaluation of the returned point.
pub fn random_pursuit_evals_per_iteration() -> u64 {
    // Interval 4σ shrinks by the golden ratio per probe after the first two.
    let mut width = 4.0;
    let mut evals = 2;
    while width > 0.5 {
        width *= INV_PHI;
        evals += 1;
    }
    evals + 1
}

/// One random-pursuit iteration: a uniform direction on the sphere, a golden
/// section line search on `[-2σ, 2σ]` with target precision `σ/2`, an
/// unconditional move to the section minimizer, and `σ ← max(|γ*|, floor)`.
pub fn random_pursuit_step(
    state: &mut StrategyState,
    obj: &Objective,
    params: &RandomPursuitParams,
    rng: &mut RngStream,
) -> Result<bool> {
    let u = unit_sphere_direction(rng, state.mean.len());
    let sigma = state.sigma;
    let base = state.mean.clone();
    let (gamma, ls_evals) = golden_section_min(
        |t| obj.evaluate(&(&base + &u * t)),
        -2.0 * sigma,
        2.0 * sigma,
        0.5 * sigma,
    );
    let x = &base + &u * gamma;
    let fx = obj.evaluate(&x);
    let improved = fx <= state.best_value;
    state.mean = x;
    state.best_value = fx;
    state.sigma = gamma.abs().max(params.sigma_floor);
    state.evals += ls_evals + 1;
    state.iteration += 1;
    state.guard_sigma()?;
    Ok(improved)
}

/// Gradientless-descent configuration: a geometric grid of candidate radii
/// between the target precision and the maximal (initial) step size.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientlessParams {
    radii: Vec<f64>,
}

impl GradientlessParams {
    pub fn new(sigma_max: f64, target: f64, ratio: f64) -> Result<Self> {
        if !(sigma_max > 0.0 && target > 0.0 && sigma_max >= target) {
            return Err(Error::InvalidParameter {
                name: "gld",
                reason: "requires sigma_max >= target > 0",
            });
        }
        if !(ratio > 1.0) {
            return Err(Error::InvalidParameter {
                name: "gld_ratio",
                reason: "must be > 1",
            });
        }
        let mut radii = Vec::new();
        let mut r = sigma_max;
        while r >= target {
            radii.push(r);
            r /= ratio;
        }
        if radii.is_empty() {
            return Err(Error::InvalidParameter {
                name: "gld",
                reason: "empty radius grid",
            });
        }
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// One gradientless-descent iteration: one Gaussian candidate per radius,
/// move to the best strict improvement (if any). Consumes one evaluation per
/// radius.
pub fn gradientless_descent_step(
    state: &mut StrategyState,
    obj: &Objective,
    params: &GradientlessParams,
    rng: &mut RngStream,
) -> Result<bool> {
    let mut best_x: Option<DVector<f64>> = None;
    let mut best_f = state.best_value;
    for &r in &params.radii {
        let x = &state.mean + standard_normal(rng, state.mean.len()) * r;
        let fx = obj.evaluate(&x);
        if fx < best_f {
            best_f = fx;
            best_x = Some(x);
        }
    }
    state.evals += params.radii.len() as u64;
    state.iteration += 1;
    let improved = best_x.is_some();
    if let Some(x) = best_x {
        state.mean = x;
        state.best_value = best_f;
    }
    Ok(improved)
}

/// One of the five optimizers, carrying its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Es(StrategyParams),
    DirectSearch(DirectSearchParams),
    RandomPursuit(RandomPursuitParams),
    Gradientless(GradientlessParams),
}

impl Strategy {
    /// Stable identifier used in CSV output and on the command line.
    pub fn id(&self) -> &'static str {
        match self {
            Strategy::Es(p) if p.cov_update == CovUpdate::RankOne => "es-kappa",
            Strategy::Es(_) => "es",
            Strategy::DirectSearch(_) => "sds",
            Strategy::RandomPursuit(_) => "rp",
            Strategy::Gradientless(_) => "gld",
        }
    }

    /// Evaluations one iteration consumes, used for exact budget accounting.
    pub fn evals_per_iteration(&self, d: usize) -> u64 {
        match self {
            Strategy::Es(_) => 1,
            Strategy::DirectSearch(_) => 2 * d as u64,
            Strategy::RandomPursuit(_) => random_pursuit_evals_per_iteration(),
            Strategy::Gradientless(p) => p.radii.len() as u64,
        }
    }

    /// Whether the strategy never accepts a worse incumbent.
    pub fn is_elitist(&self) -> bool {
        !matches!(self, Strategy::RandomPursuit(_))
    }
}

/// Run budget, in iterations or objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    Evaluations(u64),
}

/// Progress metric a target is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetMetric {
    /// `‖m - x*‖` (needs a known optimum).
    Distance,
    /// `f_μ(m)` (needs an analytic suboptimality).
    FMu,
}

impl TargetMetric {
    pub fn name(&self) -> &'static str {
        match self {
            TargetMetric::Distance => "distance",
            TargetMetric::FMu => "f_mu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub metric: TargetMetric,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub budget: Budget,
    pub target: Option<Target>,
    /// Record every k-th iteration (the initial and final rows are always
    /// kept). 1 records everything.
    pub record_every: u64,
}

impl RunConfig {
    pub fn iterations(n: u64) -> Self {
        Self {
            budget: Budget::Iterations(n),
            target: None,
            record_every: 1,
        }
    }

    pub fn evaluations(n: u64) -> Self {
        Self {
            budget: Budget::Evaluations(n),
            target: None,
            record_every: 1,
        }
    }

    pub fn with_target(mut self, metric: TargetMetric, epsilon: f64) -> Self {
        self.target = Some(Target { metric, epsilon });
        self
    }

    pub fn with_record_every(mut self, k: u64) -> Self {
        self.record_every = k.max(1);
        self
    }
}

fn metric_value(state: &StrategyState, obj: &Objective, metric: TargetMetric) -> Result<f64> {
    match metric {
        TargetMetric::Distance => {
            let x_star = obj.optimum().ok_or(Error::InvalidParameter {
                name: "target",
                reason: "distance target needs an objective with a known optimum",
            })?;
            Ok((&state.mean - x_star).norm())
        }
        TargetMetric::FMu => obj.suboptimality(&state.mean),
    }
}

fn make_row(state: &StrategyState, obj: &Objective, accepted: bool) -> TraceRow {
    let dist = obj
        .optimum()
        .map(|x_star| (&state.mean - x_star).norm())
        .unwrap_or(f64::NAN);
    let f_mu = obj.suboptimality(&state.mean).unwrap_or(f64::NAN);
    let sigma_bar = if f_mu > 0.0 {
        state.sigma / f_mu
    } else {
        f64::NAN
    };
    TraceRow {
        t: state.iteration,
        evals: state.evals,
        f: state.best_value,
        dist,
        f_mu,
        sigma: state.sigma,
        sigma_bar,
        potential: None,
        cond_sigma: condition_number(&state.cov),
        accepted,
    }
}

/// Drives one strategy from `(mean0, sigma0)` until the budget is exhausted,
/// the target is hit, or a numeric abort occurs. The produced trace starts
/// with the initial state; runs are bit-reproducible given the same stream.
pub fn run(
    strategy: &Strategy,
    obj: &Objective,
    mean0: DVector<f64>,
    sigma0: f64,
    config: &RunConfig,
    rng: &mut RngStream,
) -> Result<Trace> {
    if let Strategy::Es(p) = strategy {
        p.validate()?;
    }
    let mut state = StrategyState::init(obj, mean0, sigma0)?;
    let per_iter = strategy.evals_per_iteration(obj.dim());
    let mut trace = Trace::default();
    trace.rows.push(make_row(&state, obj, false));

    if let Some(tgt) = &config.target {
        if metric_value(&state, obj, tgt.metric)? <= tgt.epsilon {
            return Ok(trace);
        }
    }

    loop {
        match config.budget {
            Budget::Iterations(n) if state.iteration >= n => break,
            Budget::Evaluations(n) if state.evals + per_iter > n => break,
            _ => {}
        }
        let prev_best = state.best_value;
        let accepted = match strategy {
            Strategy::Es(params) => es_step(&mut state, params, obj, rng)?.accepted,
            Strategy::DirectSearch(params) => {
                simplified_direct_search_step(&mut state, obj, params, rng)?
            }
            Strategy::RandomPursuit(params) => random_pursuit_step(&mut state, obj, params, rng)?,
            Strategy::Gradientless(params) => {
                gradientless_descent_step(&mut state, obj, params, rng)?
            }
        };
        if strategy.is_elitist() {
            debug_assert!(state.best_value <= prev_best || !accepted);
        }
        let hit = match &config.target {
            Some(tgt) => metric_value(&state, obj, tgt.metric)? <= tgt.epsilon,
            None => false,
        };
        let record = hit
            || state.iteration % config.record_every == 0
            || matches!(config.budget, Budget::Iterations(n) if state.iteration >= n)
            || matches!(config.budget, Budget::Evaluations(n) if state.evals + per_iter > n);
        if record {
            trace.rows.push(make_row(&state, obj, accepted));
        }
        if hit {
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_black_box, make_sphere};
    use approx::assert_relative_eq;

    fn sphere_state(d: usize, sigma: f64) -> (Objective, StrategyState) {
        let obj = make_sphere(d);
        let mean = DVector::from_element(d, 1.0 / (d as f64).sqrt());
        let state = StrategyState::init(&obj, mean, sigma).unwrap();
        (obj, state)
    }

    #[test]
    fn params_validation() {
        assert!(StrategyParams::new(1.5, 0.9).is_ok());
        assert!(StrategyParams::new(0.9, 0.5).is_err());
        assert!(StrategyParams::new(1.5, 1.1).is_err());
        assert!(StrategyParams::new(1.5, 0.5)
            .unwrap()
            .with_rank_one(0.5, 0.1)
            .is_err());
        assert!(StrategyParams::new(1.5, 0.5)
            .unwrap()
            .with_rank_one(10.0, 0.0)
            .is_err());
        assert_relative_eq!(StrategyParams::classic().p_target(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn accepted_step_updates_mean_and_grows_sigma() {
        let (obj, mut state) = sphere_state(5, 0.3);
        let params = StrategyParams::smooth();
        let mut rng = RngStream::new(8, 0);
        // Step until the first acceptance; check the bookkeeping there.
        loop {
            let sigma_before = state.sigma;
            let mean_before = state.mean.clone();
            let out = es_step(&mut state, &params, &obj, &mut rng).unwrap();
            if out.accepted {
                assert_eq!(state.mean, out.candidate);
                assert_eq!(state.best_value, out.candidate_value);
                assert_relative_eq!(state.sigma, sigma_before * params.alpha_up);
                break;
            }
            assert_eq!(state.mean, mean_before);
            assert_relative_eq!(state.sigma, sigma_before * params.alpha_down);
        }
    }

    #[test]
    fn exact_tie_is_accepted() {
        // A constant objective ties on every candidate, so every step accepts
        // and σ grows monotonically.
        let obj = make_black_box("flat", 3, |_| 1.0);
        let mut state = StrategyState::init(&obj, DVector::zeros(3), 1.0).unwrap();
        let params = StrategyParams::smooth();
        let mut rng = RngStream::new(2, 0);
        for _ in 0..10 {
            let out = es_step(&mut state, &params, &obj, &mut rng).unwrap();
            assert!(out.accepted);
        }
        assert_relative_eq!(state.sigma, params.alpha_up.powi(10), epsilon = 1e-12);
    }

    #[test]
    fn sigma_overflow_aborts_with_iteration_index() {
        let obj = make_black_box("flat", 2, |_| 0.0);
        let mut state = StrategyState::init(&obj, DVector::zeros(2), 1.0).unwrap();
        let params = StrategyParams::new(core::f64::consts::E, 0.5).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut err = None;
        for _ in 0..800 {
            if let Err(e) = es_step(&mut state, &params, &obj, &mut rng) {
                err = Some(e);
                break;
            }
        }
        match err {
            Some(Error::StepSizeOutOfRange { iteration, .. }) => {
                // σ = e^t crosses 1e300 just after t = 300 ln 10 ≈ 690.
                assert_eq!(iteration, 691);
            }
            other => panic!("expected step-size abort, got {other:?}"),
        }
    }

    #[test]
    fn rank_one_update_is_identity_without_success_or_learning() {
        let (_, state) = sphere_state(4, 1.0);
        let mut params = StrategyParams::smooth().with_rank_one(10.0, 0.2).unwrap();
        let outcome = StepOutcome {
            accepted: false,
            candidate: DVector::zeros(4),
            candidate_value: 0.0,
            z_sample: DVector::from_element(4, 1.0),
        };
        assert_eq!(
            rank_one_cov_update(&state.cov, &outcome, &params),
            *state.cov.matrix()
        );
        params.cov_update = CovUpdate::None;
        let accepted = StepOutcome {
            accepted: true,
            ..outcome
        };
        assert_eq!(
            rank_one_cov_update(&state.cov, &accepted, &params),
            *state.cov.matrix()
        );
    }

    #[test]
    fn direct_search_accepts_sufficient_decrease() {
        // m = (1, 0), σ = 0.1: the -e₁ poll gives a decrease of 0.095,
        // comfortably above c σ² = 0.001, so the sweep must move.
        let obj = make_sphere(2);
        let mut state =
            StrategyState::init(&obj, DVector::from_row_slice(&[1.0, 0.0]), 0.1).unwrap();
        let mut rng = RngStream::new(5, 0);
        let moved = simplified_direct_search_step(
            &mut state,
            &obj,
            &DirectSearchParams::default(),
            &mut rng,
        )
        .unwrap();
        assert!(moved);
        assert!(state.best_value <= 0.5 - 0.001);
        assert_eq!(state.evals, 1 + 4);
        assert_relative_eq!(state.sigma, 0.1);
    }

    #[test]
    fn direct_search_halves_sigma_after_failed_sweep() {
        // At the optimum no poll can achieve sufficient decrease.
        let obj = make_sphere(2);
        let mut state = StrategyState::init(&obj, DVector::zeros(2), 1.0).unwrap();
        let mut rng = RngStream::new(6, 0);
        let moved = simplified_direct_search_step(
            &mut state,
            &obj,
            &DirectSearchParams::default(),
            &mut rng,
        )
        .unwrap();
        assert!(!moved);
        assert_relative_eq!(state.sigma, 0.5);
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        // Section through the sphere at (1, 0) along e₁: g(t) = (1+t)²/2,
        // minimizer at t = -1.
        let (t, _) = golden_section_min(|t| 0.5 * (1.0 + t) * (1.0 + t), -2.0, 2.0, 0.5);
        assert!((t + 1.0).abs() <= 0.5, "t = {t}");
        // Orthogonal section: symmetric, minimizer at 0.
        let (t, _) = golden_section_min(|t| 0.5 * (1.0 + t * t), -2.0, 2.0, 0.5);
        assert!(t.abs() <= 0.5, "t = {t}");
    }

    #[test]
    fn random_pursuit_eval_count_is_deterministic() {
        let per = random_pursuit_evals_per_iteration();
        let (obj, mut state) = sphere_state(6, 0.7);
        let mut rng = RngStream::new(7, 0);
        let evals_before = state.evals;
        random_pursuit_step(
            &mut state,
            &obj,
            &RandomPursuitParams::for_sigma0(0.7),
            &mut rng,
        )
        .unwrap();
        assert_eq!(state.evals - evals_before, per);
    }

    #[test]
    fn unit_directions_are_normalized() {
        let mut rng = RngStream::new(9, 0);
        for _ in 0..100 {
            let u = unit_sphere_direction(&mut rng, 8);
            assert!((u.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn gld_grid_spans_the_range() {
        let params = GradientlessParams::new(1.0, 1e-10, 2.0).unwrap();
        // Powers of two from 1 down to 2^-33 ≈ 1.16e-10.
        assert_eq!(params.radii().len(), 34);
        assert!(*params.radii().last().unwrap() >= 1e-10);
        assert!(params.radii().last().unwrap() / 2.0 < 1e-10);
        assert!(GradientlessParams::new(1e-12, 1e-10, 2.0).is_err());
    }

    #[test]
    fn gld_keeps_mean_when_nothing_improves() {
        // Tiny radii at distance 1 from the optimum of |x|∞ with a huge
        // penalty for moving: craft a function where no candidate improves.
        let obj = make_black_box("step", 2, |x| if x.norm() < 0.5 { 0.0 } else { 1.0 });
        let mut state =
            StrategyState::init(&obj, DVector::from_row_slice(&[10.0, 0.0]), 1e-6).unwrap();
        let params = GradientlessParams::new(1e-6, 1e-8, 2.0).unwrap();
        let mut rng = RngStream::new(10, 0);
        let mean_before = state.mean.clone();
        let improved = gradientless_descent_step(&mut state, &obj, &params, &mut rng).unwrap();
        assert!(!improved);
        assert_eq!(state.mean, mean_before);
    }

    #[test]
    fn gld_improves_with_probability_near_half_for_tiny_radius() {
        // With a tiny radius in the grid, a Gaussian candidate improves the
        // sphere with probability close to 1/2 per iteration.
        let obj = make_sphere(3);
        let params = GradientlessParams::new(1e-8, 1e-9, 2.0).unwrap();
        let mut rng = RngStream::new(11, 0);
        let mut improved = 0u32;
        let trials = 10_000;
        for _ in 0..trials {
            let mut state =
                StrategyState::init(&obj, DVector::from_row_slice(&[1.0, 0.0, 0.0]), 1.0).unwrap();
            if gradientless_descent_step(&mut state, &obj, &params, &mut rng).unwrap() {
                improved += 1;
            }
        }
        let rate = improved as f64 / trials as f64;
        assert!(rate > 0.4, "improvement rate {rate}");
    }

    #[test]
    fn run_with_zero_budget_keeps_initial_row_only() {
        let (obj, _) = sphere_state(4, 1.0);
        let strategy = Strategy::Es(StrategyParams::smooth());
        let mut rng = RngStream::new(12, 0);
        let trace = run(
            &strategy,
            &obj,
            DVector::from_element(4, 0.5),
            1.0,
            &RunConfig::iterations(0),
            &mut rng,
        )
        .unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.rows[0].t, 0);
        assert_eq!(trace.rows[0].evals, 1);
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let (obj, _) = sphere_state(6, 1.0);
        let strategy = Strategy::Es(StrategyParams::smooth());
        let config = RunConfig::iterations(500);
        let m0 = DVector::from_element(6, 1.0 / 6.0_f64.sqrt());
        let a = run(
            &strategy,
            &obj,
            m0.clone(),
            1.0,
            &config,
            &mut RngStream::new(99, 4),
        )
        .unwrap();
        let b = run(
            &strategy,
            &obj,
            m0,
            1.0,
            &config,
            &mut RngStream::new(99, 4),
        )
        .unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.f.to_bits(), rb.f.to_bits());
            assert_eq!(ra.sigma.to_bits(), rb.sigma.to_bits());
            assert_eq!(ra.dist.to_bits(), rb.dist.to_bits());
        }
    }

    #[test]
    fn es_converges_on_the_sphere() {
        let obj = make_sphere(10);
        let strategy = Strategy::Es(StrategyParams::smooth());
        let m0 = DVector::from_element(10, 1.0 / 10.0_f64.sqrt());
        let config = RunConfig::iterations(10_000);
        let mut rng = RngStream::new(1, 0);
        let trace = run(&strategy, &obj, m0, 1.0, &config, &mut rng).unwrap();
        let last = trace.final_row().unwrap();
        assert!(last.dist < 1e-10, "final distance {}", last.dist);
        // Elitist acceptance: f(m_t) never increases.
        for pair in trace.rows.windows(2) {
            assert!(pair[1].f <= pair[0].f);
        }
    }

    #[test]
    fn evaluation_budgets_are_respected_exactly() {
        let obj = make_sphere(5);
        for strategy in [
            Strategy::Es(StrategyParams::smooth()),
            Strategy::DirectSearch(DirectSearchParams::default()),
            Strategy::RandomPursuit(RandomPursuitParams::for_sigma0(1.0)),
            Strategy::Gradientless(GradientlessParams::new(1.0, 1e-10, 2.0).unwrap()),
        ] {
            let mut rng = RngStream::new(13, 0);
            let trace = run(
                &strategy,
                &obj,
                DVector::from_element(5, 1.0),
                1.0,
                &RunConfig::evaluations(500),
                &mut rng,
            )
            .unwrap();
            let last = trace.final_row().unwrap();
            assert!(
                last.evals <= 500,
                "{} used {} evals",
                strategy.id(),
                last.evals
            );
            assert!(
                last.evals + strategy.evals_per_iteration(5) > 500,
                "{} stopped early at {} evals",
                strategy.id(),
                last.evals
            );
        }
    }

    #[test]
    fn target_hit_stops_the_run() {
        let obj = make_sphere(4);
        let strategy = Strategy::Es(StrategyParams::smooth());
        let m0 = DVector::from_element(4, 0.5);
        // Target already satisfied at the initial state: only the initial row.
        let config = RunConfig::iterations(100).with_target(TargetMetric::Distance, 10.0);
        let trace = run(
            &strategy,
            &obj,
            m0.clone(),
            1.0,
            &config,
            &mut RngStream::new(14, 0),
        )
        .unwrap();
        assert_eq!(trace.len(), 1);

        let config = RunConfig::iterations(100_000).with_target(TargetMetric::Distance, 1e-3);
        let trace = run(
            &strategy,
            &obj,
            m0,
            1.0,
            &config,
            &mut RngStream::new(14, 0),
        )
        .unwrap();
        let last = trace.final_row().unwrap();
        assert!(last.dist <= 1e-3);
        // All earlier rows are above the target.
        for row in &trace.rows[..trace.len() - 1] {
            assert!(row.dist > 1e-3);
        }
    }
}
