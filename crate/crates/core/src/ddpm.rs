//! Denoising-diffusion kernel: variance schedule, closed-form forward
//! noising, the reverse step and the simplified noise-prediction loss.
//!
//! Steps are 1-based: `t = 1..=T`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::math::sqrt;
use crate::par;
use crate::rng::RngSeed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DdpmError {
    #[error("invalid schedule: {0}")]
    InvalidRange(&'static str),
    #[error("step {t} outside 1..={steps}")]
    InvalidStep { t: usize, steps: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("tensor of shape {shape:?} needs {expected} values, got {got}")]
    BadShape { shape: Vec<usize>, expected: usize, got: usize },
    #[error("tensor holds a non-finite value at {0}")]
    NonFinite(usize),
}

/// Flat values with a shape; `values.len() == product(shape)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    values: Vec<f64>,
    shape: Vec<usize>,
}

impl LatentTensor {
    pub fn new(values: Vec<f64>, shape: Vec<usize>) -> Result<Self, DdpmError> {
        let expected = shape.iter().product::<usize>();
        if expected != values.len() {
            return Err(DdpmError::BadShape { shape, expected, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DdpmError::NonFinite(i));
        }
        Ok(LatentTensor { values, shape })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        LatentTensor { values: alloc::vec![0.0; shape.iter().product()], shape: shape.to_vec() }
    }

    /// Standard-normal entries drawn from `rng` in index order.
    pub fn standard_normal(shape: &[usize], rng: &mut impl Rng) -> Self {
        let n = shape.iter().product();
        LatentTensor { values: (0..n).map(|_| rng.sample(StandardNormal)).collect(), shape: shape.to_vec() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn check_same(&self, o: &LatentTensor) -> Result<(), DdpmError> {
        if self.shape != o.shape {
            return Err(DdpmError::ShapeMismatch { left: self.shape.clone(), right: o.shape.clone() });
        }
        Ok(())
    }

    /// `a * self + b * o`, elementwise.
    fn combine(&self, a: f64, o: &LatentTensor, b: f64) -> Result<LatentTensor, DdpmError> {
        self.check_same(o)?;
        let values = self.values.iter().zip(&o.values).map(|(x, y)| a * x + b * y).collect();
        Ok(LatentTensor { values, shape: self.shape.clone() })
    }
}

/// Variance schedule `0 < beta_1 < ... < beta_T < 1` with `alpha = 1 - beta`
/// and the running products `alpha_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

impl NoiseSchedule {
    pub fn from_betas(betas: Vec<f64>) -> Result<Self, DdpmError> {
        if betas.is_empty() {
            return Err(DdpmError::InvalidRange("at least one step is required"));
        }
        if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(DdpmError::InvalidRange("every beta must lie in (0, 1)"));
        }
        if betas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(DdpmError::InvalidRange("betas must be strictly increasing"));
        }
        let mut prod = 1.0;
        let alpha_bars = betas
            .iter()
            .map(|b| {
                prod *= 1.0 - b;
                prod
            })
            .collect();
        Ok(NoiseSchedule { betas, alpha_bars })
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    fn check(&self, t: usize) -> Result<usize, DdpmError> {
        if t == 0 || t > self.betas.len() {
            return Err(DdpmError::InvalidStep { t, steps: self.betas.len() });
        }
        Ok(t - 1)
    }

    pub fn beta(&self, t: usize) -> Result<f64, DdpmError> {
        Ok(self.betas[self.check(t)?])
    }

    pub fn alpha(&self, t: usize) -> Result<f64, DdpmError> {
        Ok(1.0 - self.beta(t)?)
    }

    pub fn alpha_bar(&self, t: usize) -> Result<f64, DdpmError> {
        Ok(self.alpha_bars[self.check(t)?])
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }
}

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 0.02;

/// Betas linearly spaced from `beta_1` to `beta_t`.
pub fn linear_schedule(steps: usize, beta_1: f64, beta_t: f64) -> Result<NoiseSchedule, DdpmError> {
    if steps == 0 {
        return Err(DdpmError::InvalidRange("at least one step is required"));
    }
    if !(0.0 < beta_1 && beta_1 < beta_t && beta_t < 1.0) {
        return Err(DdpmError::InvalidRange("need 0 < beta_1 < beta_T < 1"));
    }
    let betas = if steps == 1 {
        alloc::vec![beta_1]
    } else {
        let span = (steps - 1) as f64;
        (0..steps).map(|i| beta_1 + (beta_t - beta_1) * i as f64 / span).collect()
    };
    NoiseSchedule::from_betas(betas)
}

/// `x_t = sqrt(alpha_bar_t) x_0 + sqrt(1 - alpha_bar_t) eps`.
pub fn forward_sample(
    x0: &LatentTensor,
    t: usize,
    eps: &LatentTensor,
    s: &NoiseSchedule,
) -> Result<LatentTensor, DdpmError> {
    let ab = s.alpha_bar(t)?;
    x0.combine(sqrt(ab), eps, sqrt(1.0 - ab))
}

/// One step of the forward kernel: `x_t = sqrt(alpha_t) x_{t-1} + sqrt(beta_t) eps`.
pub fn forward_step(
    x_prev: &LatentTensor,
    t: usize,
    eps: &LatentTensor,
    s: &NoiseSchedule,
) -> Result<LatentTensor, DdpmError> {
    let b = s.beta(t)?;
    x_prev.combine(sqrt(1.0 - b), eps, sqrt(b))
}

/// `x_{t-1} = (x_t - beta_t / sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_t) + sigma_t z`.
pub fn reverse_step(
    x_t: &LatentTensor,
    t: usize,
    eps_hat: &LatentTensor,
    z: &LatentTensor,
    sigma_t: f64,
    s: &NoiseSchedule,
) -> Result<LatentTensor, DdpmError> {
    let b = s.beta(t)?;
    let ab = s.alpha_bar(t)?;
    let inv = 1.0 / sqrt(1.0 - b);
    let mean = x_t.combine(inv, eps_hat, -inv * b / sqrt(1.0 - ab))?;
    mean.combine(1.0, z, sigma_t)
}

/// Shape-preserving noise estimate `eps_theta(x_t, t)`.
pub trait NoisePredictor: Sync {
    fn predict(&self, x_t: &LatentTensor, t: usize) -> Result<LatentTensor, DdpmError>;
}

/// `||eps - eps_theta(x_t, t)||^2` with `x_t` from [`forward_sample`].
pub fn simplified_loss(
    x0: &LatentTensor,
    t: usize,
    eps: &LatentTensor,
    predictor: &impl NoisePredictor,
    s: &NoiseSchedule,
) -> Result<f64, DdpmError> {
    let xt = forward_sample(x0, t, eps, s)?;
    let eps_hat = predictor.predict(&xt, t)?;
    eps.check_same(&eps_hat)?;
    Ok(eps.values.iter().zip(&eps_hat.values).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// `eps_theta(x, t) = weight * x + bias`, elementwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPredictor {
    pub weight: f64,
    pub bias: f64,
}

impl NoisePredictor for LinearPredictor {
    fn predict(&self, x_t: &LatentTensor, _t: usize) -> Result<LatentTensor, DdpmError> {
        let values = x_t.values.iter().map(|x| self.weight * x + self.bias).collect();
        Ok(LatentTensor { values, shape: x_t.shape.clone() })
    }
}

impl LinearPredictor {
    /// Analytic gradient of [`simplified_loss`] with respect to
    /// `(weight, bias)`.
    pub fn loss_gradient(
        &self,
        x0: &LatentTensor,
        t: usize,
        eps: &LatentTensor,
        s: &NoiseSchedule,
    ) -> Result<(f64, f64), DdpmError> {
        let xt = forward_sample(x0, t, eps, s)?;
        let (mut gw, mut gb) = (0.0, 0.0);
        for (x, e) in xt.values.iter().zip(&eps.values) {
            let r = e - (self.weight * x + self.bias);
            gw -= 2.0 * r * x;
            gb -= 2.0 * r;
        }
        Ok((gw, gb))
    }
}

/// Noise scale of the reverse steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sigma {
    /// `sigma_t = sqrt(beta_t)`.
    #[default]
    Beta,
    /// Deterministic reverse process.
    Zero,
}

/// Ancestral sampling from `x_T ~ N(0, I)` down to `x_0`; no noise is added
/// at the final step. All randomness comes from stream `stream` of `seed`.
pub fn sample(
    predictor: &impl NoisePredictor,
    s: &NoiseSchedule,
    shape: &[usize],
    seed: RngSeed,
    stream: u64,
    sigma: Sigma,
) -> Result<LatentTensor, DdpmError> {
    let mut rng = seed.stream(stream);
    let mut x = LatentTensor::standard_normal(shape, &mut rng);
    for t in (1..=s.steps()).rev() {
        let eps_hat = predictor.predict(&x, t)?;
        let (z, sig) = match sigma {
            Sigma::Beta if t > 1 => (LatentTensor::standard_normal(shape, &mut rng), sqrt(s.beta(t)?)),
            _ => (LatentTensor::zeros(shape), 0.0),
        };
        x = reverse_step(&x, t, &eps_hat, &z, sig, s)?;
    }
    Ok(x)
}

/// `count` independent samples, sample `i` on stream `i`.
pub fn sample_batch(
    predictor: &impl NoisePredictor,
    s: &NoiseSchedule,
    shape: &[usize],
    count: usize,
    seed: RngSeed,
    sigma: Sigma,
) -> Result<Vec<LatentTensor>, DdpmError> {
    par::map_indexed(count, |i| sample(predictor, s, shape, seed, i as u64, sigma)).into_iter().collect()
}
