use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, StandardNormal, Uniform};

use super::kernels::matvec;
use super::matrix::{DenseMatrix, DenseVector};
use super::scalar::Scalar;
use crate::error::{Result, SolveError};

/// Sampling law for matrix entries or true coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Uniform on (-1, 1).
    Uniform,
    StandardNormal,
}

/// Recipe for a random linear system `y = x·a_true + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub obs: usize,
    pub vars: usize,
    pub seed: u64,
    pub distribution: Distribution,
    pub coeff_distribution: Distribution,
    /// Standard deviation of additive Gaussian noise on `y`; zero gives a consistent system.
    pub noise_sigma: f64,
}

impl SystemSpec {
    /// Standard-normal entries and coefficients, no noise.
    pub fn new(obs: usize, vars: usize, seed: u64) -> Self {
        SystemSpec {
            obs,
            vars,
            seed,
            distribution: Distribution::StandardNormal,
            coeff_distribution: Distribution::StandardNormal,
            noise_sigma: 0.0,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_distributions(mut self, entries: Distribution, coeffs: Distribution) -> Self {
        self.distribution = entries;
        self.coeff_distribution = coeffs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.obs == 0 || self.vars == 0 {
            return Err(SolveError::Config("obs and vars must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SolveError::Config(format!(
                "noise_sigma must be finite and nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Output of [`generate_system`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSystem<T> {
    pub x: DenseMatrix<T>,
    pub y: DenseVector<T>,
    pub a_true: DenseVector<T>,
}

fn sample(rng: &mut ChaCha8Rng, dist: Distribution) -> f64 {
    match dist {
        // Open interval: the half-open sampler can return -1 exactly.
        Distribution::Uniform => loop {
            let v: f64 = rng.sample(Uniform::new(-1.0, 1.0).expect("valid bounds"));
            if v != -1.0 {
                break v;
            }
        },
        Distribution::StandardNormal => rng.sample(StandardNormal),
    }
}

/// Draws a random system from a seeded ChaCha8 stream.
///
/// Draw order is fixed: matrix entries in column-major order, then the true
/// coefficients, then the noise. Samples are drawn in `f64` and rounded to
/// `T`, so the `f32` and `f64` systems for one seed agree up to rounding.
pub fn generate_system<T: Scalar>(spec: &SystemSpec) -> Result<GeneratedSystem<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let data: Vec<T> = (0..spec.obs * spec.vars)
        .map(|_| T::from_f64_lossy(sample(&mut rng, spec.distribution)))
        .collect();
    let x = DenseMatrix::from_col_major(spec.obs, spec.vars, data)?;

    let a_true: DenseVector<T> = (0..spec.vars)
        .map(|_| T::from_f64_lossy(sample(&mut rng, spec.coeff_distribution)))
        .collect::<Vec<_>>()
        .into();

    let mut y = matvec(&x, &a_true)?;
    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
        for yi in y.iter_mut() {
            *yi = *yi + T::from_f64_lossy(noise.sample(&mut rng));
        }
    }
    Ok(GeneratedSystem { x, y, a_true })
}
