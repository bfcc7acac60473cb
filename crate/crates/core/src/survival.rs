//! Observed survival data, product-limit curves and per-observation weights.
//!
//! Every estimator in this crate has the generic form
//! `n⁻¹ Σ wᵢ K_h(x − Xᵢ)` with `wᵢ = δᵢ / D(Xᵢ)`, where the denominator `D`
//! is selected by the [`EstimatorMode`]:
//!
//! | mode               | `D`                      |
//! |--------------------|--------------------------|
//! | `Density`          | `1`                      |
//! | `Hazard`           | `1 − Fₙ` (empirical)     |
//! | `CensoredDensity`  | `Ḡₙ` (censoring KM)      |
//! | `CensoredHazard`   | `L̄ₙ = F̄ₙ · Ḡₙ`           |

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{Result, SizerError};

/// Right-censored observations `(Xᵢ, δᵢ)` with a cached time-sorted view.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSample {
    times: Vec<f64>,
    events: Vec<bool>,
    /// Indices into `times` sorted by time; events precede censorings at ties.
    order: Vec<usize>,
    n_events: usize,
}

impl SurvivalSample {
    pub fn new(times: Vec<f64>, events: Vec<bool>) -> Result<Self> {
        if times.len() != events.len() {
            return Err(SizerError::InvalidSample(format!(
                "{} times but {} event indicators",
                times.len(),
                events.len()
            )));
        }
        if times.len() < 2 {
            return Err(SizerError::InvalidSample(format!(
                "need at least 2 observations, got {}",
                times.len()
            )));
        }
        if let Some((i, t)) = times
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(SizerError::InvalidSample(format!(
                "observation {} has time {t}; times must be finite and positive",
                i + 1
            )));
        }
        let n_events = events.iter().filter(|&&e| e).count();
        if n_events == 0 {
            return Err(SizerError::InvalidSample(
                "every observation is censored".into(),
            ));
        }

        let mut order: Vec<usize> = (0..times.len()).collect();
        // stable: equal (time, event) keys keep input order
        order.sort_by(|&a, &b| {
            times[a]
                .total_cmp(&times[b])
                .then_with(|| events[b].cmp(&events[a]))
        });

        Ok(Self {
            times,
            events,
            order,
            n_events,
        })
    }

    /// A sample in which every observation is an event.
    pub fn uncensored(times: Vec<f64>) -> Result<Self> {
        let events = vec![true; times.len()];
        Self::new(times, events)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    pub fn n_censored(&self) -> usize {
        self.len() - self.n_events
    }

    pub fn is_uncensored(&self) -> bool {
        self.n_events == self.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    /// Input indices in order-statistic order.
    pub fn sorted_indices(&self) -> &[usize] {
        &self.order
    }

    /// `(X₍₁₎, δ₍₁₎), …, (X₍ₙ₎, δ₍ₙ₎)`.
    pub fn sorted(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.order.iter().map(|&i| (self.times[i], self.events[i]))
    }

    pub fn time_range(&self) -> (f64, f64) {
        let first = self.times[self.order[0]];
        let last = self.times[self.order[self.len() - 1]];
        (first, last)
    }
}

/// Right-continuous, non-increasing step function starting at 1.
///
/// `values[k]` holds on `[jump_times[k], jump_times[k + 1])`. Beyond
/// `support_end` the function takes `tail_value`, which lets the product-limit
/// estimator be forced to 0 after the largest observation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSurvival {
    jump_times: Vec<f64>,
    values: Vec<f64>,
    support_end: f64,
    tail_value: f64,
}

impl StepSurvival {
    pub fn initial_value(&self) -> f64 {
        1.0
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        if x > self.support_end {
            return self.tail_value;
        }
        match self.jump_times.partition_point(|&t| t <= x) {
            0 => self.initial_value(),
            k => self.values[k - 1],
        }
    }

    /// Limit from the left, `lim_{y↑x} S(y)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        if x > self.support_end {
            return self.tail_value;
        }
        match self.jump_times.partition_point(|&t| t < x) {
            0 => self.initial_value(),
            k => self.values[k - 1],
        }
    }
}

/// Which product-limit curve [`km_survival`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalTarget {
    /// `F̄ₙ`: survival of the lifetimes.
    Event,
    /// `Ḡₙ`: survival of the censoring times.
    Censoring,
}

/// Running product of rationals `a/b`, kept as a reduced integer ratio for as
/// long as it fits in 53 bits. Uncensored data telescopes to `(n − i)/n`, so
/// the result is then the correctly rounded quotient.
struct ExactProduct {
    scale: f64,
    num: u64,
    den: u64,
}

impl ExactProduct {
    const LIMIT: u64 = 1 << 53;

    fn new() -> Self {
        Self {
            scale: 1.0,
            num: 1,
            den: 1,
        }
    }

    fn mul(&mut self, a: u64, b: u64) {
        if a == 0 {
            self.num = 0;
            self.den = 1;
            return;
        }
        let g1 = a.gcd(&self.den);
        let g2 = self.num.gcd(&b);
        let (a, b) = (a / g1, b / g2);
        let (num, den) = (self.num / g2, self.den / g1);
        match (num.checked_mul(a), den.checked_mul(b)) {
            (Some(n), Some(d)) if n <= Self::LIMIT && d <= Self::LIMIT => {
                self.num = n;
                self.den = d;
            }
            _ => {
                self.scale *= num as f64 / den as f64;
                self.num = a;
                self.den = b;
            }
        }
    }

    fn value(&self) -> f64 {
        self.scale * (self.num as f64 / self.den as f64)
    }
}

/// Product-limit (Kaplan-Meier) estimate of `F̄ₙ` or `Ḡₙ`.
///
/// Order statistic `i` contributes the factor `((n − i)/(n − i + 1))^e` with
/// `e = δ₍ᵢ₎` for [`SurvivalTarget::Event`] and `e = 1 − δ₍ᵢ₎` for
/// [`SurvivalTarget::Censoring`]. Both curves are 0 beyond `X₍ₙ₎`.
pub fn km_survival(sample: &SurvivalSample, target: SurvivalTarget) -> StepSurvival {
    let n = sample.len() as u64;
    let mut product = ExactProduct::new();
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut last = 1.0;

    let sorted: Vec<(f64, bool)> = sample.sorted().collect();
    let mut rank = 0u64;
    for group in sorted.chunk_by(|a, b| a.0 == b.0) {
        for &(_, event) in group {
            rank += 1;
            let counts = match target {
                SurvivalTarget::Event => event,
                SurvivalTarget::Censoring => !event,
            };
            if counts {
                product.mul(n - rank, n - rank + 1);
            }
        }
        let value = product.value();
        if value != last {
            jump_times.push(group[0].0);
            values.push(value);
            last = value;
        }
    }

    StepSurvival {
        jump_times,
        values,
        support_end: sample.time_range().1,
        tail_value: 0.0,
    }
}

/// `1 − Fₙ(x) = #{Xᵢ > x}/n`, ignoring the event indicators.
pub fn empirical_survival(sample: &SurvivalSample) -> StepSurvival {
    let n = sample.len();
    let sorted: Vec<f64> = sample.sorted().map(|(t, _)| t).collect();
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut seen = 0usize;
    for group in sorted.chunk_by(|a, b| a == b) {
        seen += group.len();
        jump_times.push(group[0]);
        values.push((n - seen) as f64 / n as f64);
    }
    StepSurvival {
        jump_times,
        values,
        support_end: sample.time_range().1,
        tail_value: 0.0,
    }
}

/// The four estimation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorMode {
    Density,
    Hazard,
    CensoredDensity,
    CensoredHazard,
}

impl EstimatorMode {
    pub const ALL: [EstimatorMode; 4] = [
        EstimatorMode::Density,
        EstimatorMode::Hazard,
        EstimatorMode::CensoredDensity,
        EstimatorMode::CensoredHazard,
    ];

    pub fn requires_uncensored(self) -> bool {
        matches!(self, EstimatorMode::Density | EstimatorMode::Hazard)
    }

    pub fn is_hazard(self) -> bool {
        matches!(self, EstimatorMode::Hazard | EstimatorMode::CensoredHazard)
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorMode::Density => "density",
            EstimatorMode::Hazard => "hazard",
            EstimatorMode::CensoredDensity => "censored-density",
            EstimatorMode::CensoredHazard => "censored-hazard",
        }
    }

    /// Rejects samples the mode cannot handle.
    pub fn check(self, sample: &SurvivalSample) -> Result<()> {
        if self.requires_uncensored() && !sample.is_uncensored() {
            return Err(SizerError::CensoredInput {
                mode: self,
                censored: sample.n_censored(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorMode {
    type Err = SizerError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        EstimatorMode::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                SizerError::InvalidParameter(format!(
                    "unknown mode '{s}' (expected density, hazard, censored-density or censored-hazard)"
                ))
            })
    }
}

/// Where the denominator `D` is read at an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightConvention {
    /// `D(Xᵢ⁻)`: finite everywhere; the uncensored hazard weight on `X₍ᵢ₎` is
    /// `n/(n − i + 1)`.
    #[default]
    LeftLimit,
    /// `D(Xᵢ)`: the literal order-statistic form with weight `n/(n − i)`;
    /// observations with `D(Xᵢ) = 0` are dropped.
    PaperExact,
}

impl WeightConvention {
    pub fn name(self) -> &'static str {
        match self {
            WeightConvention::LeftLimit => "left-limit",
            WeightConvention::PaperExact => "paper-exact",
        }
    }
}

impl fmt::Display for WeightConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightConvention {
    type Err = SizerError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "left-limit" => Ok(WeightConvention::LeftLimit),
            "paper-exact" => Ok(WeightConvention::PaperExact),
            _ => Err(SizerError::InvalidParameter(format!(
                "unknown convention '{s}' (expected left-limit or paper-exact)"
            ))),
        }
    }
}

/// `wᵢ = δᵢ / D(Xᵢ)` in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWeights {
    pub weights: Vec<f64>,
    /// Events whose denominator evaluated to zero.
    pub dropped: usize,
}

impl ObservationWeights {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn observation_weights(
    sample: &SurvivalSample,
    mode: EstimatorMode,
    convention: WeightConvention,
) -> Result<ObservationWeights> {
    mode.check(sample)?;

    let read = |s: &StepSurvival, x: f64| match convention {
        WeightConvention::LeftLimit => s.left_limit(x),
        WeightConvention::PaperExact => s.eval(x),
    };
    let denominators: Box<dyn Fn(f64) -> f64> = match mode {
        EstimatorMode::Density => Box::new(|_| 1.0),
        EstimatorMode::Hazard => {
            let survival = empirical_survival(sample);
            Box::new(move |x| read(&survival, x))
        }
        EstimatorMode::CensoredDensity => {
            let censoring = km_survival(sample, SurvivalTarget::Censoring);
            Box::new(move |x| read(&censoring, x))
        }
        EstimatorMode::CensoredHazard => {
            let lifetime = km_survival(sample, SurvivalTarget::Event);
            let censoring = km_survival(sample, SurvivalTarget::Censoring);
            Box::new(move |x| read(&lifetime, x) * read(&censoring, x))
        }
    };

    let mut dropped = 0;
    let weights: Vec<f64> = sample
        .times()
        .iter()
        .zip(sample.events())
        .map(|(&x, &event)| {
            if !event {
                return 0.0;
            }
            let d = denominators(x);
            if d > 0.0 {
                1.0 / d
            } else {
                dropped += 1;
                0.0
            }
        })
        .collect();

    if weights.iter().all(|&w| w == 0.0) {
        return Err(SizerError::ZeroWeights { dropped });
    }
    Ok(ObservationWeights { weights, dropped })
}
