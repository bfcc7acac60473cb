//! Seeded synthetic survival data.
//!
//! Uniforms come from xoshiro256** seeded through SplitMix64, mapped to the
//! open interval as `((next_u64 >> 11) + 0.5) · 2⁻⁵³`. Every variate is drawn
//! by inverting its CDF, one observation at a time: lifetime uniform(s) first,
//! then the censoring uniform when censoring is enabled. A reimplementation
//! using the same generator reproduces the stream exactly.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Result, SizerError};
use crate::inference::{normal_cdf, normal_quantile};
use crate::survival::SurvivalSample;

/// Distribution of the latent lifetimes `Tᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LifetimeFamily {
    Exponential {
        rate: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Normal truncated to `(0, ∞)`.
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Minimum of Weibull(shape 0.5, scale 1) and Weibull(shape 3, scale 1),
    /// whose hazard `0.5·x^{−1/2} + 3x²` falls and then rises.
    BathtubMixture,
}

/// Distribution of the latent censoring times `Cᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensoringScheme {
    /// `Cᵢ = ∞`.
    None,
    Exponential {
        rate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub family: LifetimeFamily,
    pub censoring: CensoringScheme,
    pub n: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SizerError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        if self.n < 2 {
            return Err(SizerError::InvalidParameter(format!(
                "sample size must be at least 2, got {}",
                self.n
            )));
        }
        match self.family {
            LifetimeFamily::Exponential { rate } => positive("rate", rate)?,
            LifetimeFamily::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
            }
            LifetimeFamily::Normal { mean, sd } => {
                positive("mean", mean)?;
                positive("sd", sd)?;
            }
            LifetimeFamily::BathtubMixture => {}
        }
        if let CensoringScheme::Exponential { rate } = self.censoring {
            positive("censoring rate", rate)?;
        }
        Ok(())
    }
}

/// Open-interval uniforms from a fixed, portable generator.
pub struct UniformStream(Xoshiro256StarStar);

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_open01(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.0.next_u64() >> 11) as f64 + 0.5) * SCALE
    }
}

fn exponential_inv(rate: f64, u: f64) -> f64 {
    -(-u).ln_1p() / rate
}

fn weibull_inv(shape: f64, scale: f64, u: f64) -> f64 {
    scale * (-(-u).ln_1p()).powf(1.0 / shape)
}

fn truncated_normal_inv(mean: f64, sd: f64, u: f64) -> f64 {
    let lower = normal_cdf(-mean / sd);
    let p = lower + u * (1.0 - lower);
    let z = normal_quantile(p.min(1.0 - f64::EPSILON)).expect("p in (0, 1)");
    (mean + sd * z).max(f64::MIN_POSITIVE)
}

impl LifetimeFamily {
    fn draw(&self, rng: &mut UniformStream) -> f64 {
        match *self {
            LifetimeFamily::Exponential { rate } => exponential_inv(rate, rng.next_open01()),
            LifetimeFamily::Weibull { shape, scale } => {
                weibull_inv(shape, scale, rng.next_open01())
            }
            LifetimeFamily::Normal { mean, sd } => {
                truncated_normal_inv(mean, sd, rng.next_open01())
            }
            LifetimeFamily::BathtubMixture => {
                let early = weibull_inv(0.5, 1.0, rng.next_open01());
                let wear = weibull_inv(3.0, 1.0, rng.next_open01());
                early.min(wear)
            }
        }
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<SurvivalSample> {
    spec.validate()?;
    let mut rng = UniformStream::new(spec.seed);
    let mut times = Vec::with_capacity(spec.n);
    let mut events = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let lifetime = spec.family.draw(&mut rng);
        let censor = match spec.censoring {
            CensoringScheme::None => f64::INFINITY,
            CensoringScheme::Exponential { rate } => exponential_inv(rate, rng.next_open01()),
        };
        times.push(lifetime.min(censor));
        events.push(lifetime <= censor);
    }
    SurvivalSample::new(times, events)
}
