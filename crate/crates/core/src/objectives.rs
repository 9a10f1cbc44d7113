//! Benchmark objectives with their exact geometry.
//!
//! Each built-in carries, besides the evaluator, the data the analysis needs:
//! the optimum, the spatial suboptimality function `f_μ` (the d-th root of
//! the volume of the sublevel set, invariant under strictly increasing
//! transformations of `f`), and the inner/outer ball constants of the
//! sublevel sets.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // used by no_std builds for float math
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sampling::RngStream;

type EvalFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// `V_d = π^{1/2} / Γ^{1/d}(d/2 + 1)`, the d-th root of the volume of the
/// d-dimensional unit ball. Computed through `lgamma` so it stays finite for
/// large `d`.
pub fn unit_ball_root(d: usize) -> f64 {
    assert!(d >= 1, "unit_ball_root requires d >= 1");
    let d = d as f64;
    (0.5 * core::f64::consts::PI.ln() - libm::lgamma(d / 2.0 + 1.0) / d).exp()
}

/// Ball and quadratic-bound constants of an objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConstants {
    /// Inner-ball constant: an open ball of radius `c_lower · f_μ(m)` fits
    /// inside the strict sublevel set of `m`.
    pub c_lower: f64,
    /// Outer-ball constant: the sublevel set of `m` fits inside a closed
    /// ball of radius `c_upper · f_μ(m)`.
    pub c_upper: f64,
    /// Quadratic lower bound constant, when the objective is quadratically
    /// bounded around the optimum.
    pub l_lower: Option<f64>,
    /// Quadratic upper bound constant.
    pub l_upper: Option<f64>,
    /// `V_d` for the objective's dimension.
    pub unit_ball_root: f64,
}

impl GeometryConstants {
    fn validate(&self) -> Result<()> {
        if !(self.c_lower > 0.0 && self.c_upper >= self.c_lower) {
            return Err(Error::InvalidParameter {
                name: "geometry",
                reason: "requires 0 < c_lower <= c_upper",
            });
        }
        if let (Some(ll), Some(lu)) = (self.l_lower, self.l_upper) {
            if !(ll > 0.0 && lu >= ll) {
                return Err(Error::InvalidParameter {
                    name: "geometry",
                    reason: "requires 0 < l_lower <= l_upper",
                });
            }
        }
        Ok(())
    }
}

/// A convex quadratic `h(x) = ½ (x - x*)ᵀ H (x - x*)`.
#[derive(Debug, Clone)]
pub struct QuadraticSpec {
    pub hessian: DMatrix<f64>,
    pub optimum: DVector<f64>,
}

impl QuadraticSpec {
    pub fn new(hessian: DMatrix<f64>, optimum: DVector<f64>) -> Result<Self> {
        let d = optimum.len();
        if hessian.nrows() != d || hessian.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: hessian.nrows(),
            });
        }
        let scale = hessian.amax().max(1e-300);
        if (&hessian - hessian.transpose()).amax() > 1e-12 * scale {
            return Err(Error::NotPositiveDefinite {
                reason: "Hessian is not symmetric",
            });
        }
        let eig = hessian.clone().symmetric_eigen().eigenvalues;
        if eig.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::NotPositiveDefinite {
                reason: "Hessian has a non-positive eigenvalue",
            });
        }
        Ok(Self { hessian, optimum })
    }
}

/// How the spatial suboptimality of an objective can be obtained.
#[derive(Clone)]
pub enum SuboptimalityMode {
    /// A closed form is available.
    Analytic(EvalFn),
    /// Only a Monte-Carlo volume estimate is possible; `box_factor` scales
    /// the sampling box half-width relative to `‖x - x*‖`.
    MonteCarlo { box_factor: f64 },
    /// Nothing is known about the sublevel-set volume.
    Unavailable,
}

impl SuboptimalityMode {
    pub fn name(&self) -> &'static str {
        match self {
            SuboptimalityMode::Analytic(_) => "analytic",
            SuboptimalityMode::MonteCarlo { .. } => "monte_carlo",
            SuboptimalityMode::Unavailable => "unavailable",
        }
    }
}

/// A Monte-Carlo estimate of `f_μ(x)` with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuboptimalityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

/// A black-box objective together with whatever exact structure is known.
///
/// Objectives are immutable after construction and cheap to clone; they can
/// be shared freely across concurrent runs.
#[derive(Clone)]
pub struct Objective {
    id: String,
    dim: usize,
    eval: EvalFn,
    optimum: Option<DVector<f64>>,
    subopt: SuboptimalityMode,
    geometry: Option<GeometryConstants>,
}

impl core::fmt::Debug for Objective {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Objective")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("suboptimality", &self.subopt.name())
            .finish()
    }
}

impl Objective {
    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn optimum(&self) -> Option<&DVector<f64>> {
        self.optimum.as_ref()
    }

    pub fn geometry(&self) -> Option<&GeometryConstants> {
        self.geometry.as_ref()
    }

    pub fn suboptimality_mode(&self) -> &SuboptimalityMode {
        &self.subopt
    }

    /// Exact `f_μ(x)`. Errors when only an estimate (or nothing) is
    /// available, never falling back silently.
    pub fn suboptimality(&self, x: &DVector<f64>) -> Result<f64> {
        match &self.subopt {
            SuboptimalityMode::Analytic(f) => Ok(f(x)),
            SuboptimalityMode::MonteCarlo { .. } => Err(Error::NestedEstimation),
            SuboptimalityMode::Unavailable => Err(Error::SuboptimalityUnavailable),
        }
    }

    /// Monte-Carlo estimate of `f_μ(x)`: the sublevel-set volume is estimated
    /// by uniform sampling in a bounding box centered at the optimum, then the
    /// d-th root is taken. Available for any objective with a known optimum.
    pub fn suboptimality_mc(
        &self,
        x: &DVector<f64>,
        n_samples: u64,
        rng: &mut RngStream,
    ) -> Result<SuboptimalityEstimate> {
        let x_star = self
            .optimum
            .as_ref()
            .ok_or(Error::SuboptimalityUnavailable)?;
        let box_factor = match &self.subopt {
            SuboptimalityMode::MonteCarlo { box_factor } => *box_factor,
            _ => 2.0,
        };
        let radius = (x - x_star).norm();
        if radius == 0.0 {
            return Ok(SuboptimalityEstimate {
                value: 0.0,
                std_error: 0.0,
                n_samples,
            });
        }
        let half_width = box_factor * radius;
        let fx = self.evaluate(x);
        let d = self.dim;
        let mut hits: u64 = 0;
        let mut y = DVector::zeros(d);
        for _ in 0..n_samples {
            for i in 0..d {
                y[i] = x_star[i] + (2.0 * rng.uniform() - 1.0) * half_width;
            }
            if self.evaluate(&y) <= fx {
                hits += 1;
            }
        }
        let p = hits as f64 / n_samples as f64;
        let se_p = (p * (1.0 - p) / n_samples as f64).sqrt();
        let side = 2.0 * half_width;
        let value = side * p.powf(1.0 / d as f64);
        // Delta method: d/dp [side · p^{1/d}] = side · p^{1/d - 1} / d.
        let std_error = if p > 0.0 {
            side * p.powf(1.0 / d as f64 - 1.0) / d as f64 * se_p
        } else {
            f64::NAN
        };
        Ok(SuboptimalityEstimate {
            value,
            std_error,
            n_samples,
        })
    }

    /// Same objective with the optimum moved to `x_star` (the evaluator is
    /// translated accordingly). Built-ins are constructed at the origin.
    pub fn with_optimum(&self, x_star: DVector<f64>) -> Result<Objective> {
        if x_star.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x_star.len(),
            });
        }
        let old = self.optimum.clone().ok_or(Error::InvalidParameter {
            name: "objective",
            reason: "cannot move the optimum of an objective without one",
        })?;
        let shift = &x_star - &old;
        let eval = self.eval.clone();
        let s1 = shift.clone();
        let subopt = match &self.subopt {
            SuboptimalityMode::Analytic(f) => {
                let f = f.clone();
                let s2 = shift.clone();
                SuboptimalityMode::Analytic(Arc::new(move |x: &DVector<f64>| f(&(x - &s2))))
            }
            other => other.clone(),
        };
        Ok(Objective {
            id: self.id.clone(),
            dim: self.dim,
            eval: Arc::new(move |x: &DVector<f64>| eval(&(x - &s1))),
            optimum: Some(x_star),
            subopt,
            geometry: self.geometry,
        })
    }
}

/// Sphere `f(x) = ½ ‖x - x*‖²` with `x* = 0`; `f_μ(x) = V_d ‖x - x*‖`.
pub fn make_sphere(d: usize) -> Objective {
    assert!(d >= 1, "make_sphere requires d >= 1");
    let vd = unit_ball_root(d);
    Objective {
        id: String::from("sphere"),
        dim: d,
        eval: Arc::new(move |x: &DVector<f64>| 0.5 * x.norm_squared()),
        optimum: Some(DVector::zeros(d)),
        subopt: SuboptimalityMode::Analytic(Arc::new(move |x: &DVector<f64>| vd * x.norm())),
        geometry: Some(GeometryConstants {
            c_lower: 1.0 / vd,
            c_upper: 1.0 / vd,
            l_lower: Some(1.0),
            l_upper: Some(1.0),
            unit_ball_root: vd,
        }),
    }
}

/// Ellipsoid `f(x) = ½ Σ κ_f^{(i-1)/(d-1)} x_i²` with eigenvalues evenly
/// spread on a log scale between 1 and `κ_f`.
pub fn make_ellipsoid(d: usize, kappa_f: f64) -> Result<Objective> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: d });
    }
    if !(kappa_f >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa_f",
            reason: "must be >= 1",
        });
    }
    let weights: DVector<f64> = DVector::from_fn(d, |i, _| kappa_f.powf(i as f64 / (d - 1) as f64));
    let vd = unit_ball_root(d);
    // det(H) = κ_f^{d/2}, so det(H)^{1/d} = √κ_f.
    let det_root = kappa_f.sqrt();
    let w_eval = weights.clone();
    let w_sub = weights;
    Ok(Objective {
        id: format!("ellipsoid:kappa={kappa_f}"),
        dim: d,
        eval: Arc::new(move |x: &DVector<f64>| {
            0.5 * x
                .iter()
                .zip(w_eval.iter())
                .map(|(xi, wi)| wi * xi * xi)
                .sum::<f64>()
        }),
        optimum: Some(DVector::zeros(d)),
        subopt: SuboptimalityMode::Analytic(Arc::new(move |x: &DVector<f64>| {
            let h = 0.5
                * x.iter()
                    .zip(w_sub.iter())
                    .map(|(xi, wi)| wi * xi * xi)
                    .sum::<f64>();
            vd * (2.0 * h / det_root).sqrt()
        })),
        geometry: Some(GeometryConstants {
            c_lower: (det_root / kappa_f).sqrt() / vd,
            c_upper: det_root.sqrt() / vd,
            l_lower: Some(1.0),
            l_upper: Some(kappa_f),
            unit_ball_root: vd,
        }),
    })
}

/// General convex quadratic `f(x) = ½ (x - x*)ᵀ H (x - x*)`;
/// `f_μ(x) = V_d (2 h(x) / det(H)^{1/d})^{1/2}`.
pub fn make_quadratic(spec: QuadraticSpec) -> Result<Objective> {
    let d = spec.optimum.len();
    if d < 1 {
        return Err(Error::DimensionTooSmall { min: 1, got: 0 });
    }
    let eig = spec.hessian.clone().symmetric_eigen().eigenvalues;
    let lambda_min = eig.min();
    let lambda_max = eig.max();
    let det_root = (eig.iter().map(|l| l.ln()).sum::<f64>() / d as f64).exp();
    let vd = unit_ball_root(d);

    let h_mat = spec.hessian.clone();
    let x0 = spec.optimum.clone();
    let quad = move |x: &DVector<f64>| {
        let delta = x - &x0;
        0.5 * (&h_mat * &delta).dot(&delta)
    };
    let quad_sub = quad.clone();
    Ok(Objective {
        id: String::from("quadratic"),
        dim: d,
        eval: Arc::new(quad),
        optimum: Some(spec.optimum),
        subopt: SuboptimalityMode::Analytic(Arc::new(move |x: &DVector<f64>| {
            vd * (2.0 * quad_sub(x) / det_root).sqrt()
        })),
        geometry: Some(GeometryConstants {
            c_lower: (det_root / lambda_max).sqrt() / vd,
            c_upper: (det_root / lambda_min).sqrt() / vd,
            l_lower: Some(lambda_min),
            l_upper: Some(lambda_max),
            unit_ball_root: vd,
        }),
    })
}

/// `f(x) = ‖x - x*‖_∞`; the sublevel set is a cube, so `f_μ(x) = 2 ‖x - x*‖_∞`.
pub fn make_linf(d: usize) -> Objective {
    assert!(d >= 1, "make_linf requires d >= 1");
    let vd = unit_ball_root(d);
    Objective {
        id: String::from("linf"),
        dim: d,
        eval: Arc::new(|x: &DVector<f64>| x.amax()),
        optimum: Some(DVector::zeros(d)),
        subopt: SuboptimalityMode::Analytic(Arc::new(|x: &DVector<f64>| 2.0 * x.amax())),
        geometry: Some(GeometryConstants {
            // The cube of half-width f_μ/2 circumscribes a ball of the same
            // radius and is inscribed in one of radius √d · f_μ/2.
            c_lower: 0.5,
            c_upper: 0.5 * (d as f64).sqrt(),
            l_lower: None,
            l_upper: None,
            unit_ball_root: vd,
        }),
    }
}

/// Composition with a strictly increasing transform. The suboptimality
/// function and geometry are untouched: comparison-based algorithms cannot
/// distinguish `f` from `g ∘ f`. Monotonicity is the caller's contract.
pub fn compose_monotone(
    obj: &Objective,
    transform: impl Fn(f64) -> f64 + Send + Sync + 'static,
    label: &str,
) -> Objective {
    let inner = obj.eval.clone();
    Objective {
        id: format!("{}|{}", obj.id, label),
        dim: obj.dim,
        eval: Arc::new(move |x: &DVector<f64>| transform(inner(x))),
        optimum: obj.optimum.clone(),
        subopt: obj.subopt.clone(),
        geometry: obj.geometry,
    }
}

/// The objective seen through an orthogonal change of coordinates:
/// `x ↦ f(R x)`, with the optimum moving to `Rᵀ x*`.
pub fn rotate(obj: &Objective, rotation: &DMatrix<f64>) -> Result<Objective> {
    let d = obj.dim;
    if rotation.nrows() != d || rotation.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rotation.nrows(),
        });
    }
    let defect = (rotation.transpose() * rotation - DMatrix::identity(d, d)).amax();
    if defect > 1e-10 {
        return Err(Error::NotOrthogonal { defect });
    }
    let inner = obj.eval.clone();
    let r1 = rotation.clone();
    let subopt = match &obj.subopt {
        SuboptimalityMode::Analytic(f) => {
            let f = f.clone();
            let r2 = rotation.clone();
            SuboptimalityMode::Analytic(Arc::new(move |x: &DVector<f64>| f(&(&r2 * x))))
        }
        other => other.clone(),
    };
    Ok(Objective {
        id: format!("{}|rot", obj.id),
        dim: d,
        eval: Arc::new(move |x: &DVector<f64>| inner(&(&r1 * x))),
        optimum: obj.optimum.as_ref().map(|o| rotation.transpose() * o),
        subopt,
        geometry: obj.geometry,
    })
}

/// Builds an objective around an arbitrary evaluator with no known structure.
pub fn make_black_box(
    id: &str,
    d: usize,
    eval: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
) -> Objective {
    Objective {
        id: String::from(id),
        dim: d,
        eval: Arc::new(eval),
        optimum: None,
        subopt: SuboptimalityMode::Unavailable,
        geometry: None,
    }
}

/// Replaces the analytic suboptimality with Monte-Carlo mode. Used to test
/// the estimator and the nested-estimation guard.
pub fn with_mc_suboptimality(obj: &Objective, kappa_f: f64) -> Objective {
    Objective {
        id: obj.id.clone(),
        dim: obj.dim,
        eval: obj.eval.clone(),
        optimum: obj.optimum.clone(),
        subopt: SuboptimalityMode::MonteCarlo {
            box_factor: 2.0 * kappa_f.sqrt(),
        },
        geometry: obj.geometry,
    }
}

/// Checks that a geometry's constants are internally consistent.
pub fn validate_geometry(g: &GeometryConstants) -> Result<()> {
    g.validate()
}
