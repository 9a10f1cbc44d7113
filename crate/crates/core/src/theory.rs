//! Success probabilities and their bounds, the potential function, drift
//! constants, hitting-time bounds, and Monte-Carlo verifiers for the two
//! additive-drift theorems.
//!
//! Every Monte-Carlo estimate carries its standard error; comparisons in
//! tests are made with explicit multiples of those errors so stochastic
//! assertions do not flake.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)] // used by no_std builds for float math
use num_traits::Float;

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::sampling::{standard_normal, Covariance, RngStream};
use crate::strategies::{StrategyParams, StrategyState};
use crate::trace::{Trace, TraceRow};

/// Quantile of the standard normal for two-sided 99% confidence intervals.
const Z_99: f64 = 2.575_829_303_548_901;

/// Standard normal distribution function Ψ.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// CDF of the chi-square distribution with `d` degrees of freedom.
pub fn chi_square_cdf(d: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(d as f64 / 2.0, x / 2.0)
}

/// The target success probability implied by the step-size factors:
/// `log(1/α↓) / log(α↑/α↓)`.
pub fn target_success_probability(alpha_up: f64, alpha_down: f64) -> f64 {
    assert!(
        alpha_up > 1.0 && alpha_down > 0.0 && alpha_down < 1.0,
        "requires alpha_up > 1 > alpha_down > 0"
    );
    (1.0 / alpha_down).ln() / (alpha_up / alpha_down).ln()
}

/// `σ̄ = σ / f_μ(m)`, the scale-free step size. Undefined at the optimum.
pub fn normalized_step_size(state: &StrategyState, obj: &Objective) -> Result<f64> {
    let f_mu = obj.suboptimality(&state.mean)?;
    if !(f_mu > 0.0) {
        return Err(Error::AtOptimum);
    }
    Ok(state.sigma / f_mu)
}

/// A binomial frequency estimate. The probability is the raw (unbiased)
/// frequency; the standard error uses the Agresti–Coull adjustment so it
/// stays positive at 0 or n hits, where the plain plug-in formula
/// degenerates and a `3σ` slack would be vacuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl SuccessEstimate {
    fn from_hits(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        let n_adj = n as f64 + 4.0;
        let p_adj = (hits as f64 + 2.0) / n_adj;
        Self {
            probability: p,
            std_error: (p_adj * (1.0 - p_adj) / n_adj).sqrt(),
            n_samples: n,
        }
    }
}

/// Monte-Carlo estimate of the success probability with rate `r` at `m`
/// under normalized step size `σ̄` and sampling covariance `Σ`: the
/// probability that `f_μ(m + f_μ(m) σ̄ A z) ≤ (1 - r) f_μ(m)`.
///
/// Requires an exact suboptimality; estimating the success probability of an
/// estimated suboptimality is refused.
pub fn mc_success_probability(
    obj: &Objective,
    m: &DVector<f64>,
    cov: &Covariance,
    sigma_bar: f64,
    r: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<SuccessEstimate> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "must be in [0,1]",
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be >= 1",
        });
    }
    let f_mu_m = obj.suboptimality(m)?;
    if !(f_mu_m > 0.0) {
        return Err(Error::AtOptimum);
    }
    let scale = f_mu_m * sigma_bar;
    let threshold = (1.0 - r) * f_mu_m;
    let mut hits = 0u64;
    for _ in 0..n {
        let z = standard_normal(rng, m.len());
        let x = m + cov.factor() * z * scale;
        if obj.suboptimality(&x)? <= threshold {
            hits += 1;
        }
    }
    Ok(SuccessEstimate::from_hits(hits, n))
}

/// Monte-Carlo estimate of the m-independent sphere success probability
/// `P[‖e₁ + V_d σ̄ z‖ ≤ 1 - r]`.
pub fn sphere_success_probability(
    sigma_bar: f64,
    r: f64,
    d: usize,
    n: u64,
    rng: &mut RngStream,
) -> SuccessEstimate {
    assert!(d >= 1 && n >= 1);
    let vd = crate::objectives::unit_ball_root(d);
    let scale = vd * sigma_bar;
    let threshold = 1.0 - r;
    let mut hits = 0u64;
    for _ in 0..n {
        // ‖e₁ + s z‖² = (1 + s z₁)² + s² Σ_{i>1} z_i².
        let z1 = rng.normal();
        let mut sq = (1.0 + scale * z1) * (1.0 + scale * z1);
        for _ in 1..d {
            let zi = rng.normal();
            sq += scale * zi * scale * zi;
        }
        if sq.sqrt() <= threshold {
            hits += 1;
        }
    }
    SuccessEstimate::from_hits(hits, n)
}

/// The dimension limit of the sphere success probability under the scaling
/// `σ̄ = σ̂ / (d V_d)` and `r = ρ/d`: `Ψ(-ρ/σ̂ - σ̂/2)`.
pub fn sphere_success_limit(sigma_hat: f64, rho: f64) -> Result<f64> {
    if !(sigma_hat > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_hat",
            reason: "must be > 0",
        });
    }
    if rho < 0.0 {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: "must be >= 0",
        });
    }
    Ok(standard_normal_cdf(-rho / sigma_hat - sigma_hat / 2.0))
}

/// Bounds on the success probability, uniform over the mean and over all
/// covariances in the constraint set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessBounds {
    pub lower: f64,
    pub upper: f64,
    /// Standard error of the Monte-Carlo part of the lower bound (the upper
    /// bound is exact).
    pub lower_std_error: f64,
}

/// Computes the bounds
/// `upper = κ^{d/2} Φ(B̄(0, C_u/(σ̄ √κ)); 0, I)` (exact, via the chi-square
/// CDF) and
/// `lower = κ^{-d/2} Φ(B̄(((2C_u - C_ℓ) √κ/σ̄) e₁, C_ℓ √κ/σ̄); 0, I)`
/// (off-center ball mass, by Monte Carlo), both clamped into `[0, 1]`.
pub fn success_probability_bounds(
    sigma_bar: f64,
    c_lower: f64,
    c_upper: f64,
    kappa: f64,
    d: usize,
    n: u64,
    rng: &mut RngStream,
) -> Result<SuccessBounds> {
    if !(c_lower > 0.0 && c_upper >= c_lower) {
        return Err(Error::InvalidParameter {
            name: "c_lower/c_upper",
            reason: "requires 0 < c_lower <= c_upper",
        });
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "must be >= 1",
        });
    }
    if !(sigma_bar > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_bar",
            reason: "must be > 0",
        });
    }
    let half_d = d as f64 / 2.0;
    let kappa_pow = kappa.powf(half_d);

    let radius_up = c_upper / (sigma_bar * kappa.sqrt());
    let upper = (kappa_pow * chi_square_cdf(d, radius_up * radius_up)).clamp(0.0, 1.0);

    let center = (2.0 * c_upper - c_lower) * kappa.sqrt() / sigma_bar;
    let radius_lo = c_lower * kappa.sqrt() / sigma_bar;
    let mass = offcenter_ball_mass(center, radius_lo, d, n, rng);
    let lower = (mass.probability / kappa_pow).clamp(0.0, 1.0);
    let lower_std_error = mass.std_error / kappa_pow;
    Ok(SuccessBounds {
        lower,
        upper,
        lower_std_error,
    })
}

/// `P[‖Z - c e₁‖ ≤ radius]` for `Z ~ N(0, I_d)`, by Monte Carlo.
fn offcenter_ball_mass(
    center: f64,
    radius: f64,
    d: usize,
    n: u64,
    rng: &mut RngStream,
) -> SuccessEstimate {
    let r2 = radius * radius;
    let mut hits = 0u64;
    for _ in 0..n {
        let z1 = rng.normal() - center;
        let mut sq = z1 * z1;
        for _ in 1..d {
            let zi = rng.normal();
            sq += zi * zi;
        }
        if sq <= r2 {
            hits += 1;
        }
    }
    SuccessEstimate::from_hits(hits, n)
}

/// Parameters of the potential function: weight `v` of the step-size penalty
/// and the normalized step-size window `[ℓ, u]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    pub v: f64,
    pub ell: f64,
    pub u: f64,
}

impl PotentialParams {
    pub fn new(v: f64, ell: f64, u: f64) -> Result<Self> {
        let p = Self { v, ell, u };
        p.validate()?;
        Ok(p)
    }

    /// The reference parameterization: `v = 4/d`, `ℓ = α↑^{-10}`,
    /// `u = α↓^{-10}`.
    pub fn reference(d: usize, params: &StrategyParams) -> Result<Self> {
        Self::new(
            4.0 / d as f64,
            params.alpha_up.powi(-10),
            params.alpha_down.powi(-10),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0 && self.v < 1.0) {
            return Err(Error::InvalidParameter {
                name: "v",
                reason: "must be in (0,1)",
            });
        }
        if !(self.ell > 0.0 && self.u > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ell/u",
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// The pairing constraint with the step-size factors: `u/ℓ ≥ α↑/α↓`.
    pub fn validate_for(&self, params: &StrategyParams) -> Result<()> {
        self.validate()?;
        if self.u / self.ell < params.alpha_up / params.alpha_down {
            return Err(Error::InvalidParameter {
                name: "ell/u",
                reason: "window too narrow: requires u/ell >= alpha_up/alpha_down",
            });
        }
        Ok(())
    }
}

/// `V = log f_μ + max{0, v log(α↑ ℓ f_μ/σ), v log(σ/(α↓ u f_μ))}` evaluated
/// from the raw ingredients. See [`potential`] for the state-based form.
pub fn potential_value(
    f_mu: f64,
    sigma: f64,
    pp: &PotentialParams,
    alpha_up: f64,
    alpha_down: f64,
) -> f64 {
    let small = pp.v * (alpha_up * pp.ell * f_mu / sigma).ln();
    let large = pp.v * (sigma / (alpha_down * pp.u * f_mu)).ln();
    f_mu.ln() + small.max(large).max(0.0)
}

/// The potential of a strategy state. Rejects states at the optimum.
pub fn potential(
    state: &StrategyState,
    obj: &Objective,
    pp: &PotentialParams,
    params: &StrategyParams,
) -> Result<f64> {
    pp.validate_for(params)?;
    let f_mu = obj.suboptimality(&state.mean)?;
    if !(f_mu > 0.0) {
        return Err(Error::AtOptimum);
    }
    Ok(potential_value(
        f_mu,
        state.sigma,
        pp,
        params.alpha_up,
        params.alpha_down,
    ))
}

/// Fills the `potential` column of a trace from its `f_mu` and `sigma`
/// columns.
pub fn annotate_potential(trace: &mut Trace, pp: &PotentialParams, params: &StrategyParams) {
    for row in &mut trace.rows {
        row.potential = (row.f_mu > 0.0)
            .then(|| potential_value(row.f_mu, row.sigma, pp, params.alpha_up, params.alpha_down));
    }
}

/// Ingredients of the drift constant `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftBoundInputs {
    pub a: f64,
    pub v: f64,
    pub p_ell: f64,
    pub p_u: f64,
    pub p_star_r: f64,
    pub alpha_up: f64,
    pub alpha_down: f64,
    /// Truncation rate `r = 1 - exp(-A/(1-v))`, derived.
    pub r: f64,
}

impl DriftBoundInputs {
    pub fn new(
        a: f64,
        v: f64,
        p_ell: f64,
        p_u: f64,
        p_star_r: f64,
        alpha_up: f64,
        alpha_down: f64,
    ) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: "must be > 0",
            });
        }
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter {
                name: "v",
                reason: "must be in (0,1)",
            });
        }
        if v > a / (1.0 / alpha_down).ln() || v > a / alpha_up.ln() {
            return Err(Error::InvalidParameter {
                name: "v",
                reason: "must satisfy v <= min(A/log(1/alpha_down), A/log(alpha_up))",
            });
        }
        let p_target = target_success_probability(alpha_up, alpha_down);
        if !(0.0 < p_u && p_u < p_target && p_target < p_ell && p_ell < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p_ell/p_u",
                reason: "requires 0 < p_u < p_target < p_ell < 1",
            });
        }
        if !(0.0 < p_star_r && p_star_r <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "p_star_r",
                reason: "must be in (0,1]",
            });
        }
        let r = 1.0 - (-a / (1.0 - v)).exp();
        Ok(Self {
            a,
            v,
            p_ell,
            p_u,
            p_star_r,
            alpha_up,
            alpha_down,
            r,
        })
    }

    /// Chooses `p_ℓ` and `p_u` symmetrically around the target probability:
    /// `p_ℓ + p_u = 2 p_target` with the given gap.
    pub fn paired(
        a: f64,
        v: f64,
        gap: f64,
        p_star_r: f64,
        alpha_up: f64,
        alpha_down: f64,
    ) -> Result<Self> {
        let p_target = target_success_probability(alpha_up, alpha_down);
        Self::new(
            a,
            v,
            p_target + gap / 2.0,
            p_target - gap / 2.0,
            p_star_r,
            alpha_up,
            alpha_down,
        )
    }
}

/// `B = min{A p*_r - v log(α↑/α↓), v (p_ℓ - p_u)/2 · log(α↑/α↓)}`.
/// May be non-positive; the caller decides whether to search for a better `v`.
pub fn drift_bound_b(inputs: &DriftBoundInputs) -> f64 {
    let log_ratio = (inputs.alpha_up / inputs.alpha_down).ln();
    let first = inputs.a * inputs.p_star_r - inputs.v * log_ratio;
    let second = inputs.v * (inputs.p_ell - inputs.p_u) / 2.0 * log_ratio;
    first.min(second)
}

/// `(V(θ₀) - log ε + A) / B`.
pub fn hitting_time_upper_bound(v0: f64, epsilon: f64, a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            reason: "must be > 0",
        });
    }
    if !(a >= b) {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: "must satisfy a >= b",
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be > 0",
        });
    }
    Ok((v0 - epsilon.ln() + a) / b)
}

/// `-1/2 + (d / (4 κ^{d/2})) log(dist₀/ε)`, valid for any step-size
/// adaptation mechanism.
pub fn hitting_time_lower_bound(d: usize, kappa: f64, dist0: f64, epsilon: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: d });
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "must be >= 1",
        });
    }
    if !(epsilon > 0.0 && dist0 > epsilon) {
        return Err(Error::InvalidParameter {
            name: "dist0",
            reason: "requires dist0 > epsilon > 0",
        });
    }
    Ok(-0.5 + d as f64 / (4.0 * kappa.powf(d as f64 / 2.0)) * (dist0 / epsilon).ln())
}

/// Synthetic processes for the upper-bound drift theorem. All satisfy the
/// truncated drift condition (checked at verification time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperDriftProcess {
    /// `X_{t+1} = X_t - B` deterministically.
    DeterministicDecrement,
    /// `X_{t+1} = X_t - A` with probability `B/A`, unchanged otherwise.
    TwoPoint,
    /// `X_{t+1} = X_t - jump` with probability `prob`, unchanged otherwise.
    /// Admissible only when `min(jump, A) · prob ≥ B`; large rare jumps
    /// whose truncated drift is too weak are rejected.
    Custom { jump: f64, prob: f64 },
}

/// Monotone synthetic processes for the lower-bound drift theorem, with
/// one-step expectation `-C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerDriftProcess {
    /// `X_{t+1} = X_t - C`.
    DeterministicDecrement,
    /// `X_{t+1} = X_t - E` with `E` exponential of mean `C`.
    Exponential,
}

/// Outcome of a drift-theorem verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftVerification {
    pub empirical_mean: f64,
    pub ci99: (f64, f64),
    pub bound: f64,
    pub n_runs: u64,
    pub pass: bool,
}

fn mean_and_ci(samples: &[f64]) -> (f64, (f64, f64)) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let half = Z_99 * (var / n).sqrt();
    (mean, (mean - half, mean + half))
}

/// Simulates hitting times of a process satisfying the truncated drift
/// condition with constants `(A, B)` and checks the empirical mean against
/// the bound `(A + β₀ - β)/B`. Passes iff the lower CI edge stays below the
/// bound.
pub fn verify_additive_drift_upper(
    process: UpperDriftProcess,
    a: f64,
    b: f64,
    beta0: f64,
    beta: f64,
    n_runs: u64,
    rng: &mut RngStream,
) -> Result<DriftVerification> {
    if !(a >= b && b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a/b",
            reason: "requires a >= b > 0",
        });
    }
    if !(beta0 > beta) {
        return Err(Error::InvalidParameter {
            name: "beta0",
            reason: "must exceed beta",
        });
    }
    // Admissibility: the truncated one-step drift must be at most -B.
    let truncated_drift = match process {
        UpperDriftProcess::DeterministicDecrement => -b.min(a),
        UpperDriftProcess::TwoPoint => -a * (b / a),
        UpperDriftProcess::Custom { jump, prob } => {
            if !(jump > 0.0 && prob > 0.0 && prob <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "process",
                    reason: "requires jump > 0 and prob in (0,1]",
                });
            }
            -jump.min(a) * prob
        }
    };
    if truncated_drift > -b + 1e-12 {
        return Err(Error::InadmissibleProcess {
            reason: "truncated one-step drift is weaker than -B; the bound does not apply",
        });
    }

    let bound = (a + beta0 - beta) / b;
    let cap = (100.0 * bound).max(1e6) as u64;
    let mut times = Vec::with_capacity(n_runs as usize);
    for _ in 0..n_runs {
        let mut x = beta0;
        let mut t = 0u64;
        while x > beta {
            match process {
                UpperDriftProcess::DeterministicDecrement => x -= b,
                UpperDriftProcess::TwoPoint => {
                    if rng.uniform() < b / a {
                        x -= a;
                    }
                }
                UpperDriftProcess::Custom { jump, prob } => {
                    if rng.uniform() < prob {
                        x -= jump;
                    }
                }
            }
            t += 1;
            if t > cap {
                return Err(Error::InadmissibleProcess {
                    reason: "hitting-time simulation exceeded its safety cap",
                });
            }
        }
        times.push(t as f64);
    }
    let (empirical_mean, ci99) = mean_and_ci(&times);
    Ok(DriftVerification {
        empirical_mean,
        ci99,
        bound,
        n_runs,
        pass: ci99.0 <= bound,
    })
}

/// Simulates hitting times of a monotone process with one-step expectation
/// `-C` and checks the empirical mean against the lower bound
/// `-1/2 + (β₀ - β)/(4C)`. Passes iff the upper CI edge stays above the
/// bound.
pub fn verify_additive_drift_lower(
    process: LowerDriftProcess,
    c: f64,
    beta0: f64,
    beta: f64,
    n_runs: u64,
    rng: &mut RngStream,
) -> Result<DriftVerification> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: "must be > 0",
        });
    }
    if beta0 < beta {
        return Err(Error::InvalidParameter {
            name: "beta0",
            reason: "must be >= beta",
        });
    }
    let bound = -0.5 + (beta0 - beta) / (4.0 * c);
    let cap = ((100.0 * (beta0 - beta) / c).max(1e6)) as u64;
    let mut times = Vec::with_capacity(n_runs as usize);
    for _ in 0..n_runs {
        let mut x = beta0;
        let mut t = 0u64;
        while x > beta {
            match process {
                LowerDriftProcess::DeterministicDecrement => x -= c,
                LowerDriftProcess::Exponential => {
                    x -= -c * (1.0 - rng.uniform()).ln();
                }
            }
            t += 1;
            if t > cap {
                return Err(Error::InadmissibleProcess {
                    reason: "hitting-time simulation exceeded its safety cap",
                });
            }
        }
        times.push(t as f64);
    }
    let (empirical_mean, ci99) = mean_and_ci(&times);
    Ok(DriftVerification {
        empirical_mean,
        ci99,
        bound,
        n_runs,
        pass: ci99.1 >= bound,
    })
}

/// Mean one-step change of a per-row quantity, pooled across traces, with a
/// normal-approximation 99% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    pub mean: f64,
    pub ci99: (f64, f64),
    pub n_steps: u64,
}

pub fn empirical_drift(
    traces: &[Trace],
    extractor: impl Fn(&TraceRow) -> f64,
) -> Result<DriftEstimate> {
    let mut diffs = Vec::new();
    for trace in traces {
        if trace.len() < 2 {
            return Err(Error::NotEnoughData {
                what: "empirical drift needs traces with at least 2 rows",
            });
        }
        for pair in trace.rows.windows(2) {
            diffs.push(extractor(&pair[1]) - extractor(&pair[0]));
        }
    }
    if diffs.is_empty() {
        return Err(Error::NotEnoughData {
            what: "no one-step differences",
        });
    }
    let (mean, ci99) = mean_and_ci(&diffs);
    Ok(DriftEstimate {
        mean,
        ci99,
        n_steps: diffs.len() as u64,
    })
}

/// Least-squares slope of `log f_μ(m_t)` against `t` over the rows after
/// `burn_in`. Rows where `f_μ` is zero or undefined are skipped.
pub fn almost_sure_rate(trace: &Trace, burn_in: u64) -> Result<f64> {
    let points: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter(|row| row.t > burn_in && row.f_mu.is_finite() && row.f_mu > 0.0)
        .map(|row| (row.t as f64, row.f_mu.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::NotEnoughData {
            what: "almost-sure rate needs at least 2 usable rows",
        });
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, y) in &points {
        cov += (t - mean_t) * (y - mean_y);
        var += (t - mean_t) * (t - mean_t);
    }
    if var == 0.0 {
        return Err(Error::NotEnoughData {
            what: "degenerate time axis",
        });
    }
    Ok(cov / var)
}

/// A conservative estimate of the worst-case success probability with rate
/// `r` over a normalized step-size window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PStarEstimate {
    /// Grid minimum minus three standard errors (conservative).
    pub conservative: f64,
    /// Raw grid minimum.
    pub grid_min: f64,
    pub std_error: f64,
    pub argmin_sigma_bar: f64,
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo && lo > 0.0);
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Worst-case sphere success probability with rate `r` over
/// `σ̄ ∈ [ℓ, u]`, by Monte Carlo on a log grid.
pub fn sphere_p_star(
    d: usize,
    r: f64,
    ell: f64,
    u: f64,
    grid_points: usize,
    n: u64,
    rng: &mut RngStream,
) -> PStarEstimate {
    let mut best: Option<PStarEstimate> = None;
    for sigma_bar in log_grid(ell, u, grid_points) {
        let est = sphere_success_probability(sigma_bar, r, d, n, rng);
        let replace = best.is_none_or(|b| est.probability < b.grid_min);
        if replace {
            best = Some(PStarEstimate {
                conservative: (est.probability - 3.0 * est.std_error).max(0.0),
                grid_min: est.probability,
                std_error: est.std_error,
                argmin_sigma_bar: sigma_bar,
            });
        }
    }
    best.expect("grid is non-empty")
}

/// Worst-case lower bound on the success probability with rate `r` over
/// `σ̄ ∈ [ℓ, u]`, uniform in the mean and the covariance: the minimum over a
/// log grid of `κ^{-d/2} Φ(B(((2C_u - (1-r)C_ℓ)√κ/σ̄) e₁, (1-r)C_ℓ√κ/σ̄))`,
/// estimated by Monte Carlo, minus three standard errors.
#[allow(clippy::too_many_arguments)]
pub fn p_star_lower_bound(
    c_lower: f64,
    c_upper: f64,
    kappa: f64,
    d: usize,
    r: f64,
    ell: f64,
    u: f64,
    grid_points: usize,
    n: u64,
    rng: &mut RngStream,
) -> PStarEstimate {
    let kappa_pow = kappa.powf(d as f64 / 2.0);
    let shrunk = (1.0 - r) * c_lower;
    let mut best: Option<PStarEstimate> = None;
    for sigma_bar in log_grid(ell, u, grid_points) {
        let center = (2.0 * c_upper - shrunk) * kappa.sqrt() / sigma_bar;
        let radius = shrunk * kappa.sqrt() / sigma_bar;
        let mass = offcenter_ball_mass(center, radius, d, n, rng);
        let value = mass.probability / kappa_pow;
        let se = mass.std_error / kappa_pow;
        let replace = best.is_none_or(|b| value < b.grid_min);
        if replace {
            best = Some(PStarEstimate {
                conservative: (value - 3.0 * se).max(0.0),
                grid_min: value,
                std_error: se,
                argmin_sigma_bar: sigma_bar,
            });
        }
    }
    best.expect("grid is non-empty")
}

/// One reported quantity: a name, a value, an optional Monte-Carlo standard
/// error, and a free-form note (usually the defining formula).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub quantity: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub note: String,
}

/// A flat list of computed theoretical quantities attached to an experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TheoryReport {
    pub entries: Vec<ReportEntry>,
}

impl TheoryReport {
    pub fn push(&mut self, quantity: &str, value: f64, note: &str) {
        self.entries.push(ReportEntry {
            quantity: String::from(quantity),
            value,
            std_error: None,
            note: String::from(note),
        });
    }

    pub fn push_estimate(&mut self, quantity: &str, value: f64, std_error: f64, note: &str) {
        self.entries.push(ReportEntry {
            quantity: String::from(quantity),
            value,
            std_error: Some(std_error),
            note: String::from(note),
        });
    }

    pub fn get(&self, quantity: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }
}

/// Knobs of [`standard_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Truncation constant `A`; defaults to `1/d` when `None`.
    pub a: Option<f64>,
    /// Window `[ℓ, u]`; defaults to `[α↑^{-10}, α↓^{-10}]`.
    pub ell: Option<f64>,
    pub u: Option<f64>,
    /// Gap `p_ℓ - p_u` around the target probability.
    pub gap: f64,
    pub grid_points: usize,
    pub mc_samples: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            a: None,
            ell: None,
            u: None,
            gap: 0.1,
            grid_points: 16,
            mc_samples: 100_000,
        }
    }
}

/// Computes the full set of bounds for one experiment: the target success
/// probability, the worst-case success probability over the step-size
/// window, the drift constant `B`, and the hitting-time bounds for the given
/// target. Requires an objective with geometry and analytic suboptimality.
pub fn standard_report(
    obj: &Objective,
    params: &StrategyParams,
    mean0: &DVector<f64>,
    sigma0: f64,
    epsilon: f64,
    opts: &ReportOptions,
    rng: &mut RngStream,
) -> Result<TheoryReport> {
    params.validate()?;
    let d = obj.dim();
    let geo = obj.geometry().ok_or(Error::SuboptimalityUnavailable)?;
    let f_mu0 = obj.suboptimality(mean0)?;
    if !(f_mu0 > 0.0) {
        return Err(Error::AtOptimum);
    }
    let dist0 = obj
        .optimum()
        .map(|x_star| (mean0 - x_star).norm())
        .unwrap_or(f64::NAN);
    let kappa = params.kappa;
    let p_target = params.p_target();
    let log_ratio = (params.alpha_up / params.alpha_down).ln();

    let a = opts.a.unwrap_or(1.0 / d as f64);
    let ell = opts.ell.unwrap_or(params.alpha_up.powi(-10));
    let u = opts.u.unwrap_or(params.alpha_down.powi(-10));
    let gap = opts.gap.min(1.9 * p_target.min(1.0 - p_target));

    let mut report = TheoryReport::default();
    report.push("d", d as f64, "search-space dimension");
    report.push(
        "kappa",
        kappa,
        "condition-number cap of the sampling covariance",
    );
    report.push("alpha_up", params.alpha_up, "step-size increase factor");
    report.push("alpha_down", params.alpha_down, "step-size decrease factor");
    report.push(
        "p_target",
        p_target,
        "log(1/alpha_down)/log(alpha_up/alpha_down)",
    );
    report.push(
        "c_lower",
        geo.c_lower,
        "inner ball constant of the sublevel sets",
    );
    report.push(
        "c_upper",
        geo.c_upper,
        "outer ball constant of the sublevel sets",
    );
    report.push(
        "unit_ball_root",
        geo.unit_ball_root,
        "d-th root of the unit-ball volume",
    );
    report.push("ell", ell, "lower edge of the normalized step-size window");
    report.push("u", u, "upper edge of the normalized step-size window");
    report.push("A", a, "drift truncation constant");

    // Estimate the worst-case window probability once at the v = 0 rate,
    // then pick v by the scaling recipe. The final rate r exceeds r0 by
    // O(A v) with v itself of order p*, a shift far below the subtracted
    // three-standard-error margin, so the estimate is reused.
    let r0 = 1.0 - (-a).exp();
    let p_star = p_star_lower_bound(
        geo.c_lower,
        geo.c_upper,
        kappa,
        d,
        r0,
        ell,
        u,
        opts.grid_points,
        opts.mc_samples,
        rng,
    );
    let v_cap = (a / (1.0 / params.alpha_down).ln())
        .min(a / params.alpha_up.ln())
        .min(1.0);
    let v = (a * p_star.conservative / log_ratio * 2.0 / (2.0 + gap))
        .min(0.999 * v_cap)
        .max(1e-12);
    let r = 1.0 - (-a / (1.0 - v)).exp();
    report.push("v", v, "penalty weight of the potential function");
    report.push(
        "r",
        r,
        "success rate used by the truncated drift: 1 - exp(-A/(1-v))",
    );
    report.push_estimate(
        "p_star_r",
        p_star.conservative,
        p_star.std_error,
        "worst-case success probability over the window (grid minimum - 3 SE)",
    );

    let b = if p_star.conservative > 0.0 && v > 0.0 {
        match DriftBoundInputs::paired(
            a,
            v,
            gap,
            p_star.conservative,
            params.alpha_up,
            params.alpha_down,
        ) {
            Ok(inputs) => drift_bound_b(&inputs),
            Err(_) => f64::NAN,
        }
    } else {
        f64::NAN
    };
    report.push(
        "B",
        b,
        "drift constant: min(A p*_r - v log(au/ad), v (p_l-p_u)/2 log(au/ad))",
    );

    let pp = PotentialParams {
        v: v.min(0.999),
        ell,
        u,
    };
    let v0 = potential_value(f_mu0, sigma0, &pp, params.alpha_up, params.alpha_down);
    report.push("V0", v0, "potential of the initial state");
    if b.is_finite() && b > 0.0 && a >= b {
        report.push(
            "hitting_time_upper_bound",
            hitting_time_upper_bound(v0, epsilon, a, b)?,
            "(V0 - log(eps) + A)/B, for f_mu reaching eps",
        );
    } else {
        report.push(
            "hitting_time_upper_bound",
            f64::NAN,
            "unavailable: estimated B is not positive at this sample size",
        );
    }
    if d >= 2 && dist0.is_finite() && dist0 > epsilon {
        report.push(
            "hitting_time_lower_bound",
            hitting_time_lower_bound(d, kappa, dist0, epsilon)?,
            "-1/2 + d/(4 kappa^{d/2}) log(dist0/eps), for distance reaching eps",
        );
    }
    report.push("epsilon", epsilon, "target accuracy");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_linf, make_sphere};
    use crate::strategies::StrategyParams;
    use approx::assert_relative_eq;

    #[test]
    fn p_target_reference_values() {
        // 1.5 and 1.5^{-1/4} encode the one-fifth rule exactly.
        let p = target_success_probability(1.5, 1.5_f64.powf(-0.25));
        assert!((p - 0.2).abs() < 1e-12);
        let p = target_success_probability(0.1_f64.exp(), (-0.025_f64).exp());
        assert!((p - 0.2).abs() < 1e-12);
        // Symmetric factors target 1/2.
        let p = target_success_probability(1.3, 1.0 / 1.3);
        assert_relative_eq!(p, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn p_target_is_scale_free() {
        let base = target_success_probability(1.5, 1.5_f64.powf(-0.25));
        for c in [0.25, 0.5, 2.0, 3.7] {
            let scaled = target_success_probability(1.5_f64.powf(c), 1.5_f64.powf(-0.25 * c));
            assert_relative_eq!(scaled, base, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalized_step_size_on_sphere() {
        let obj = make_sphere(2);
        let mut state =
            crate::strategies::StrategyState::init(&obj, DVector::from_row_slice(&[1.0, 0.0]), 1.0)
                .unwrap();
        let sbar = normalized_step_size(&state, &obj).unwrap();
        assert_relative_eq!(sbar, 1.0 / core::f64::consts::PI.sqrt(), epsilon = 1e-12);
        // Linear in sigma, inversely homogeneous in the mean.
        state.sigma = 2.0;
        assert_relative_eq!(normalized_step_size(&state, &obj).unwrap(), 2.0 * sbar);
        state.mean *= 2.0;
        assert_relative_eq!(
            normalized_step_size(&state, &obj).unwrap(),
            sbar,
            epsilon = 1e-12
        );
        state.mean *= 0.0;
        assert!(matches!(
            normalized_step_size(&state, &obj),
            Err(Error::AtOptimum)
        ));
    }

    #[test]
    fn sphere_limit_closed_forms() {
        // Ψ(-1) and Ψ(-1.5) against tabulated values.
        assert_relative_eq!(
            sphere_success_limit(2.0, 0.0).unwrap(),
            0.158_655_253_931_457_07,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            sphere_success_limit(1.0, 1.0).unwrap(),
            0.066_807_201_268_858_07,
            epsilon = 1e-12
        );
        // σ̂ → 0 with ρ = 0 approaches 1/2 from below.
        assert!((sphere_success_limit(1e-8, 0.0).unwrap() - 0.5).abs() < 1e-8);
        assert!(sphere_success_limit(0.0, 0.0).is_err());
    }

    #[test]
    fn sphere_limit_is_monotone() {
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let s = 0.1 * i as f64;
            let p = sphere_success_limit(s, 0.0).unwrap();
            assert!(p < prev);
            assert!(p > 0.0 && p < 0.5);
            prev = p;
        }
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let rho = 0.1 * i as f64;
            let p = sphere_success_limit(1.0, rho).unwrap();
            assert!(p < prev || (i == 0 && p == prev));
            prev = p;
        }
    }

    #[test]
    fn sphere_mc_agrees_with_general_estimator() {
        // Two estimators of the same quantity must agree within combined
        // error on the sphere.
        let d = 10;
        let obj = make_sphere(d);
        let vd = crate::objectives::unit_ball_root(d);
        let m = DVector::from_element(d, 1.0 / (d as f64).sqrt());
        let cov = Covariance::identity(d);
        for (sigma_bar, r) in [
            (0.1 / (d as f64 * vd), 0.0),
            (1.0 / (d as f64 * vd), 0.0),
            (1.0 / (d as f64 * vd), 0.1 / d as f64),
        ] {
            let mut rng = RngStream::new(100, 0);
            let a = mc_success_probability(&obj, &m, &cov, sigma_bar, r, 40_000, &mut rng).unwrap();
            let b = sphere_success_probability(sigma_bar, r, d, 40_000, &mut rng);
            let gap = (a.probability - b.probability).abs();
            let tol = 3.0 * (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
            assert!(gap <= tol.max(1e-3), "gap {gap} tol {tol}");
        }
    }

    #[test]
    fn success_probability_edge_rates() {
        let obj = make_sphere(4);
        let m = DVector::from_element(4, 1.0);
        let cov = Covariance::identity(4);
        let mut rng = RngStream::new(4, 0);
        // r = 1 demands f_mu <= 0: impossible away from the optimum.
        let est = mc_success_probability(&obj, &m, &cov, 0.5, 1.0, 2_000, &mut rng).unwrap();
        assert_eq!(est.probability, 0.0);
        // Monte-Carlo suboptimality is refused.
        let mc_obj = crate::objectives::with_mc_suboptimality(&obj, 1.0);
        assert!(matches!(
            mc_success_probability(&mc_obj, &m, &cov, 0.5, 0.0, 10, &mut rng),
            Err(Error::NestedEstimation)
        ));
        // Large normalized steps almost never succeed.
        let est = sphere_success_probability(1e3, 0.0, 4, 20_000, &mut rng);
        assert!(est.probability < 0.01);
    }

    #[test]
    fn linf_corner_success_probability() {
        // At a corner of the cube all coordinates must move inward:
        // probability 1/2^d in the small-step limit.
        let d = 2;
        let obj = make_linf(d);
        let m = DVector::from_element(d, 1.0 / (d as f64).sqrt());
        let cov = Covariance::identity(d);
        let mut rng = RngStream::new(5, 0);
        let est = mc_success_probability(&obj, &m, &cov, 1e-4, 0.0, 100_000, &mut rng).unwrap();
        assert!(
            (est.probability - 0.25).abs() < 0.01,
            "p = {}",
            est.probability
        );
    }

    #[test]
    fn chi_square_closed_form_d2() {
        // χ²₂ CDF is 1 - exp(-x/2).
        assert_relative_eq!(
            chi_square_cdf(2, 1.0),
            1.0 - (-0.5_f64).exp(),
            epsilon = 1e-12
        );
        assert_eq!(chi_square_cdf(2, 0.0), 0.0);
    }

    #[test]
    fn bounds_upper_closed_form() {
        // κ=1, d=2, C_u = σ̄: upper = P(χ²₂ ≤ 1) = 1 - e^{-1/2}.
        let mut rng = RngStream::new(6, 0);
        let b = success_probability_bounds(0.7, 0.7, 0.7, 1.0, 2, 10_000, &mut rng).unwrap();
        assert_relative_eq!(b.upper, 0.393_469_340_287_366_5, epsilon = 1e-12);
        // σ̄ → ∞ drives the upper bound to zero.
        let b = success_probability_bounds(1e6, 0.7, 0.7, 1.0, 2, 100, &mut rng).unwrap();
        assert!(b.upper < 1e-10);
    }

    #[test]
    fn bounds_sandwich_sphere() {
        // On the sphere with κ=1 the bounds must bracket the Monte-Carlo
        // success probability (3 SE slack).
        let d = 6;
        let obj = make_sphere(d);
        let geo = *obj.geometry().unwrap();
        let m = DVector::from_element(d, 0.5);
        let cov = Covariance::identity(d);
        for scale in [0.5, 1.0, 2.0] {
            let sigma_bar = scale * geo.c_upper;
            let mut rng = RngStream::new(7, 0);
            let est =
                mc_success_probability(&obj, &m, &cov, sigma_bar, 0.0, 50_000, &mut rng).unwrap();
            let b = success_probability_bounds(
                sigma_bar,
                geo.c_lower,
                geo.c_upper,
                1.0,
                d,
                50_000,
                &mut rng,
            )
            .unwrap();
            let slack = 3.0 * (est.std_error + b.lower_std_error);
            assert!(
                b.lower - slack <= est.probability,
                "lower {} vs p {}",
                b.lower,
                est.probability
            );
            assert!(
                est.probability <= b.upper + 3.0 * est.std_error,
                "p {} vs upper {}",
                est.probability,
                b.upper
            );
        }
    }

    #[test]
    fn potential_penalty_shape() {
        let params = StrategyParams::smooth();
        let pp = PotentialParams::reference(10, &params).unwrap();
        let f_mu = 3.0;
        // σ at the lower penalty boundary: max term vanishes.
        let sigma = params.alpha_up * pp.ell * f_mu;
        let v = potential_value(f_mu, sigma, &pp, params.alpha_up, params.alpha_down);
        assert_relative_eq!(v, f_mu.ln(), epsilon = 1e-12);
        // One factor of e below the boundary adds exactly v.
        let v2 = potential_value(
            f_mu,
            sigma / core::f64::consts::E,
            &pp,
            params.alpha_up,
            params.alpha_down,
        );
        assert_relative_eq!(v2, f_mu.ln() + pp.v, epsilon = 1e-12);
    }

    #[test]
    fn potential_dominates_log_f_mu() {
        let params = StrategyParams::smooth();
        let pp = PotentialParams::reference(10, &params).unwrap();
        let f_mu = 0.7;
        let lo = params.alpha_up * pp.ell;
        let hi = params.alpha_down * pp.u;
        for i in 0..200 {
            let sigma_bar = 1e-3 * (10.0_f64 / 1e-3).powf(i as f64 / 199.0);
            let v = potential_value(
                f_mu,
                sigma_bar * f_mu,
                &pp,
                params.alpha_up,
                params.alpha_down,
            );
            assert!(v >= f_mu.ln() - 1e-12);
            let inside = sigma_bar >= lo && sigma_bar <= hi;
            if inside {
                assert_relative_eq!(v, f_mu.ln(), epsilon = 1e-9);
            } else {
                assert!(
                    v > f_mu.ln() + 1e-12,
                    "penalty missing at sigma_bar {sigma_bar}"
                );
            }
        }
    }

    #[test]
    fn drift_bound_arithmetic() {
        // α↑ = e^{0.8}, α↓ = e^{-0.2}: ratio e, p_target 0.2.
        let inputs =
            DriftBoundInputs::new(1.0, 0.1, 0.3, 0.1, 0.5, 0.8_f64.exp(), (-0.2_f64).exp())
                .unwrap();
        assert_relative_eq!(drift_bound_b(&inputs), 0.01, epsilon = 1e-12);
        assert_relative_eq!(inputs.r, 1.0 - (-1.0 / 0.9_f64).exp(), epsilon = 1e-12);
        // B never exceeds A p*_r.
        assert!(drift_bound_b(&inputs) <= inputs.a * inputs.p_star_r);
        // v → 0 sends the second term (and B) to 0.
        let tiny = DriftBoundInputs::new(1.0, 1e-9, 0.3, 0.1, 0.5, 0.8_f64.exp(), (-0.2_f64).exp())
            .unwrap();
        assert!(drift_bound_b(&tiny).abs() < 1e-9);
    }

    #[test]
    fn drift_bound_positive_on_sphere_window() {
        // A = 1/d with the v-recipe yields a positive B on the sphere at
        // d = 10 over the reference window.
        let d = 10;
        let params = StrategyParams::smooth();
        let a = 1.0 / d as f64;
        let ell = params.alpha_up.powi(-10);
        let u = params.alpha_down.powi(-10);
        let log_ratio = (params.alpha_up / params.alpha_down).ln();
        let gap = 0.1;
        let mut rng = RngStream::new(123, 0);
        let r0 = 1.0 - (-a).exp();
        let p = sphere_p_star(d, r0, ell, u, 16, 4_000_000, &mut rng);
        assert!(
            p.conservative > 0.0,
            "conservative p* = {} (min {})",
            p.conservative,
            p.grid_min
        );
        let v = a * p.conservative / log_ratio * 2.0 / (2.0 + gap);
        let inputs = DriftBoundInputs::paired(
            a,
            v,
            gap,
            p.conservative,
            params.alpha_up,
            params.alpha_down,
        )
        .unwrap();
        let b = drift_bound_b(&inputs);
        assert!(b > 0.0, "B = {b}");
        assert!(b < a);
    }

    #[test]
    fn hitting_time_bound_arithmetic() {
        // (0 + 10 + 1)/0.01 = 1100.
        assert_relative_eq!(
            hitting_time_upper_bound(0.0, (-10.0_f64).exp(), 1.0, 0.01).unwrap(),
            1100.0,
            epsilon = 1e-9
        );
        // Already at the target: A/B.
        let v0 = -3.0;
        assert_relative_eq!(
            hitting_time_upper_bound(v0, v0.exp(), 1.0, 0.01).unwrap(),
            100.0,
            epsilon = 1e-9
        );
        // Shrinking ε by e adds exactly 1/B.
        let t1 = hitting_time_upper_bound(0.0, 1e-3, 1.0, 0.02).unwrap();
        let t2 = hitting_time_upper_bound(0.0, 1e-3 / core::f64::consts::E, 1.0, 0.02).unwrap();
        assert_relative_eq!(t2 - t1, 50.0, epsilon = 1e-9);
        assert!(hitting_time_upper_bound(0.0, 1e-3, 1.0, 0.0).is_err());
        assert!(hitting_time_upper_bound(0.0, 1e-3, 0.005, 0.01).is_err());
    }

    #[test]
    fn lower_bound_arithmetic() {
        assert_relative_eq!(
            hitting_time_lower_bound(2, 1.0, core::f64::consts::E, 1.0).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            hitting_time_lower_bound(10, 1.0, 10.0_f64.exp(), 1.0_f64.exp().powi(0)).unwrap(),
            24.5,
            epsilon = 1e-9
        );
        // κ = 4, d = 2: prefactor d/(4κ) = 1/8.
        let t = hitting_time_lower_bound(2, 4.0, core::f64::consts::E, 1.0).unwrap();
        assert_relative_eq!(t, -0.5 + 0.125, epsilon = 1e-12);
        assert!(hitting_time_lower_bound(1, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn upper_drift_verifier() {
        let mut rng = RngStream::new(8, 0);
        // Deterministic decrement of B = 1/8 (exact in binary): hitting
        // time exactly 8, bound (1 + 1)/0.125 = 16.
        let rep = verify_additive_drift_upper(
            UpperDriftProcess::DeterministicDecrement,
            1.0,
            0.125,
            1.0,
            0.0,
            100,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rep.empirical_mean, 8.0);
        assert!(rep.pass);

        // Two-point law: mean close to 10, bound 20.
        let rep = verify_additive_drift_upper(
            UpperDriftProcess::TwoPoint,
            1.0,
            0.1,
            1.0,
            0.0,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(rep.pass, "mean {} bound {}", rep.empirical_mean, rep.bound);
        assert!((rep.empirical_mean - 10.0).abs() < 1.0);
    }

    #[test]
    fn cautionary_rare_jump_process_is_rejected() {
        // Jump 1/p with probability p has untruncated drift -1, but its
        // truncated drift is only -A p: inadmissible when A < 1/p.
        let mut rng = RngStream::new(9, 0);
        let p = 1e-3;
        let err = verify_additive_drift_upper(
            UpperDriftProcess::Custom {
                jump: 1.0 / p,
                prob: p,
            },
            1.0,
            1.0,
            1.0,
            0.0,
            10,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::InadmissibleProcess { .. })));
        // With A >= 1/p the same process is admissible.
        let rep = verify_additive_drift_upper(
            UpperDriftProcess::Custom {
                jump: 1.0 / p,
                prob: p,
            },
            1.0 / p,
            1.0,
            1.0,
            0.0,
            200,
            &mut rng,
        )
        .unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn lower_drift_verifier() {
        let mut rng = RngStream::new(10, 0);
        // Deterministic with C = 1/8 (exact in binary): T = 8 ≥ -1/2 + 2.
        let rep = verify_additive_drift_lower(
            LowerDriftProcess::DeterministicDecrement,
            0.125,
            1.0,
            0.0,
            100,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rep.empirical_mean, 8.0);
        assert!(rep.pass);
        // Exponential steps.
        let rep = verify_additive_drift_lower(
            LowerDriftProcess::Exponential,
            0.1,
            1.0,
            0.0,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(rep.pass, "mean {} bound {}", rep.empirical_mean, rep.bound);
        // β₀ = β: hitting time 0, bound -1/2.
        let rep = verify_additive_drift_lower(
            LowerDriftProcess::Exponential,
            0.1,
            1.0,
            1.0,
            100,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rep.empirical_mean, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn empirical_drift_of_constant_is_zero() {
        let mut trace = Trace::default();
        for t in 0..50 {
            trace.rows.push(TraceRow {
                t,
                evals: t + 1,
                f: 1.0,
                dist: 1.0,
                f_mu: 1.0,
                sigma: 1.0,
                sigma_bar: 1.0,
                potential: None,
                cond_sigma: 1.0,
                accepted: false,
            });
        }
        let est = empirical_drift(core::slice::from_ref(&trace), |row| row.f).unwrap();
        assert_eq!(est.mean, 0.0);
        let short = Trace {
            rows: trace.rows[..1].to_vec(),
        };
        assert!(empirical_drift(&[short], |row| row.f).is_err());
    }

    #[test]
    fn rate_of_exact_geometric_sequence() {
        let mut trace = Trace::default();
        let c = 0.037;
        for t in 0..100u64 {
            trace.rows.push(TraceRow {
                t,
                evals: t + 1,
                f: 0.0,
                dist: 0.0,
                f_mu: (-c * t as f64).exp(),
                sigma: 1.0,
                sigma_bar: 1.0,
                potential: None,
                cond_sigma: 1.0,
                accepted: true,
            });
        }
        let slope = almost_sure_rate(&trace, 10).unwrap();
        assert_relative_eq!(slope, -c, epsilon = 1e-12);
    }

    #[test]
    fn standard_report_on_sphere() {
        let obj = make_sphere(10);
        let params = StrategyParams::smooth();
        let m0 = DVector::from_element(10, 1.0 / 10.0_f64.sqrt());
        let mut rng = RngStream::new(11, 0);
        let opts = ReportOptions {
            mc_samples: 20_000,
            ..ReportOptions::default()
        };
        let report = standard_report(&obj, &params, &m0, 1.0, 1e-6, &opts, &mut rng).unwrap();
        assert!((report.get("p_target").unwrap().value - 0.2).abs() < 1e-12);
        assert!(report.get("hitting_time_lower_bound").unwrap().value > 0.0);
        assert!(report.get("V0").is_some());
        assert!(report.get("p_star_r").unwrap().std_error.is_some());
    }
}
