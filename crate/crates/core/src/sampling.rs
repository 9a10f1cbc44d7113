//! Seeded random streams, Gaussian sampling, and covariance matrices
//! constrained to unit determinant and bounded condition number.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // used by no_std builds for float math
use num_traits::Float;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Relative tolerance for the unit-determinant invariant.
pub const DET_TOLERANCE: f64 = 1e-9;
/// Relative slack for the condition-number invariant.
pub const COND_TOLERANCE: f64 = 1e-9;

/// A deterministic, splittable random stream.
///
/// Two streams built from the same `(seed, stream_id)` produce identical
/// samples on every platform. Independent substreams for parallel runs are
/// derived from the same seed with distinct stream ids.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            rng,
            seed,
            stream_id,
        }
    }

    /// The master stream of a run: stream id 0.
    pub fn master(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    /// A fresh stream with the same seed and a new id, starting at position 0.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        rand::Rng::random(&mut self.rng)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        rand::Rng::random_range(&mut self.rng, 0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// Vector of `d` i.i.d. standard normal entries.
pub fn standard_normal(rng: &mut RngStream, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.normal())
}

/// Uniform direction on the unit sphere.
pub fn unit_sphere_direction(rng: &mut RngStream, d: usize) -> DVector<f64> {
    loop {
        let z = standard_normal(rng, d);
        let n = z.norm();
        if n > 1e-12 {
            return z / n;
        }
    }
}

/// A symmetric positive-definite matrix with cached Cholesky factor and
/// spectral data. Values are immutable snapshots; [`project_to_sk`] is the
/// entry point that enforces the unit-determinant / bounded-condition
/// invariants.
#[derive(Debug, Clone)]
pub struct Covariance {
    matrix: DMatrix<f64>,
    factor: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl Covariance {
    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
            factor: DMatrix::identity(d, d),
            eigenvalues: DVector::from_element(d, 1.0),
        }
    }

    /// Wraps an explicit matrix, verifying symmetry, positive definiteness
    /// and the unit-determinant invariant. Use [`project_to_sk`] for inputs
    /// that still need normalization.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let (matrix, eigenvalues) = check_spd(matrix)?;
        let logdet: f64 = eigenvalues.iter().map(|l| l.ln()).sum();
        if logdet.abs() > DET_TOLERANCE {
            return Err(Error::NotPositiveDefinite {
                reason: "determinant is not 1",
            });
        }
        let factor = matrix
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite {
                reason: "Cholesky factorization failed",
            })?
            .unpack();
        Ok(Self {
            matrix,
            factor,
            eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular `A` with `A Aᵀ = Σ`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    /// Log density of `N(0, Σ)` at `x`.
    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim() as f64;
        let logdet: f64 = self.eigenvalues.iter().map(|l| l.ln()).sum();
        // Solve A w = x, then xᵀ Σ⁻¹ x = ‖w‖².
        let w = self
            .factor
            .clone()
            .solve_lower_triangular(x)
            .expect("factor is nonsingular");
        -0.5 * (d * core::f64::consts::TAU.ln() + logdet + w.norm_squared())
    }
}

/// λ_max / λ_min of the covariance.
pub fn condition_number(cov: &Covariance) -> f64 {
    let max = cov.eigenvalues.max();
    let min = cov.eigenvalues.min();
    max / min
}

fn check_spd(matrix: DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let d = matrix.nrows();
    if d == 0 || matrix.ncols() != d {
        return Err(Error::NotPositiveDefinite {
            reason: "matrix is empty or not square",
        });
    }
    let scale = matrix.amax().max(1e-300);
    let asym = (&matrix - matrix.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotPositiveDefinite {
            reason: "matrix is not symmetric",
        });
    }
    // Symmetrize before decomposing so round-off in callers cannot leak in.
    let sym = (&matrix + matrix.transpose()) * 0.5;
    let eigenvalues = sym.clone().symmetric_eigen().eigenvalues;
    if eigenvalues.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::NotPositiveDefinite {
            reason: "matrix has a non-positive eigenvalue",
        });
    }
    Ok((sym, eigenvalues))
}

/// Projects a symmetric positive-definite matrix into the constraint set:
/// eigenvalues are clipped into `[λ_max / κ, λ_max]` by raising the floor,
/// then rescaled so their product is exactly one.
pub fn project_to_sk(matrix: &DMatrix<f64>, kappa: f64) -> Result<Covariance> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "must be >= 1",
        });
    }
    let (sym, _) = check_spd(matrix.clone())?;
    let eig = sym.symmetric_eigen();
    let lambda_max = eig.eigenvalues.max();
    let floor = lambda_max / kappa;
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(floor)).collect();
    let log_gm = clipped.iter().map(|l| l.ln()).sum::<f64>() / clipped.len() as f64;
    let scale = log_gm.exp();
    let normalized = DVector::from_iterator(clipped.len(), clipped.iter().map(|l| l / scale));

    let q = eig.eigenvectors;
    let mut rebuilt = &q * DMatrix::from_diagonal(&normalized) * q.transpose();
    rebuilt = (&rebuilt + rebuilt.transpose()) * 0.5;
    let factor = rebuilt
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            reason: "projected matrix lost definiteness",
        })?
        .unpack();
    Ok(Covariance {
        matrix: rebuilt,
        factor,
        eigenvalues: normalized,
    })
}

/// Draws `z ~ N(0, I)` and returns the candidate `x = m + σ A z` together
/// with `z`, so invariance tests can replay the same sample.
pub fn sample_candidate(
    mean: &DVector<f64>,
    sigma: f64,
    cov: &Covariance,
    rng: &mut RngStream,
) -> (DVector<f64>, DVector<f64>) {
    debug_assert!(sigma > 0.0);
    let z = standard_normal(rng, mean.len());
    let x = mean + cov.factor() * &z * sigma;
    (x, z)
}

/// Result of [`gaussian_density_sandwich_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandwichReport {
    pub points: u64,
    pub violations: u64,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `κ^{-d/2} φ(x; 0, κ⁻¹I) ≤ φ(x; 0, Σ) ≤ κ^{d/2} φ(x; 0, κI)` at
/// `n` random points. The covariance must already satisfy the constraint
/// set invariants for the given `kappa`.
pub fn gaussian_density_sandwich_check(
    cov: &Covariance,
    kappa: f64,
    n_points: u64,
    rng: &mut RngStream,
) -> Result<SandwichReport> {
    let cond = condition_number(cov);
    let det_defect = (cov.determinant() - 1.0).abs();
    if cond > kappa * (1.0 + COND_TOLERANCE) || det_defect > DET_TOLERANCE {
        return Err(Error::OutsideConstraintSet {
            kappa,
            cond,
            det_defect,
        });
    }
    let d = cov.dim();
    let half_d_log_kappa = 0.5 * d as f64 * kappa.ln();
    let log_tau = core::f64::consts::TAU.ln();
    let mut violations = 0;
    for _ in 0..n_points {
        // Spread the probes over several scales so both tails are exercised.
        let x = standard_normal(rng, d) * kappa.sqrt();
        let r2 = x.norm_squared();
        let log_mid = cov.log_density(&x);
        // log φ(x; 0, cI) = -d/2 log(2πc) - r²/(2c)
        let log_narrow = -0.5 * (d as f64 * (log_tau - kappa.ln()) + r2 * kappa);
        let log_wide = -0.5 * (d as f64 * (log_tau + kappa.ln()) + r2 / kappa);
        let lower = -half_d_log_kappa + log_narrow;
        let upper = half_d_log_kappa + log_wide;
        if log_mid < lower - 1e-9 || log_mid > upper + 1e-9 {
            violations += 1;
        }
    }
    Ok(SandwichReport {
        points: n_points,
        violations,
    })
}

/// Haar-distributed random rotation: QR of a Gaussian matrix with the sign
/// convention fixed, determinant forced to +1.
pub fn random_rotation(d: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.normal());
    let qr = g.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (j, rjj) in r_diag.iter().enumerate() {
        if *rjj < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..d {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}
