//! Simultaneous quantiles and per-pixel classification of the family into a
//! SiZer map.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SizerError};
use crate::scale_space::ScaleSpaceFamily;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `Φ⁻¹(p)`: Acklam's rational approximation followed by one Halley step
/// against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SizerError::InvalidParameter(format!(
            "normal quantile requires p in (0, 1), got {p}"
        )));
    }

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - P_LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // Halley refinement on Φ(x) − p; above the median this is evaluated as
    // (1 − p) − Q(x) with the upper tail Q to keep precision near p = 1.
    let err = if p > 0.5 {
        (1.0 - p) - 0.5 * libm::erfc(x / SQRT_2)
    } else {
        normal_cdf(x) - p
    };
    let u = err * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlocksRule {
    /// Bonferroni-style adjustment over the number of independent windows.
    #[default]
    IndependentBlocks,
    /// Plain `Φ⁻¹(1 − α/2)` at every pixel.
    Pointwise,
}

impl FromStr for BlocksRule {
    type Err = SizerError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "independent-blocks" | "blocks" => Ok(BlocksRule::IndependentBlocks),
            "pointwise" => Ok(BlocksRule::Pointwise),
            _ => Err(SizerError::InvalidParameter(format!(
                "unknown blocks rule '{s}' (expected independent-blocks or pointwise)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    pub alpha: f64,
    pub ess_threshold: f64,
    pub blocks_rule: BlocksRule,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            ess_threshold: 5.0,
            blocks_rule: BlocksRule::IndependentBlocks,
        }
    }
}

impl InferenceConfig {
    pub fn new(alpha: f64, ess_threshold: f64, blocks_rule: BlocksRule) -> Result<Self> {
        let config = Self {
            alpha,
            ess_threshold,
            blocks_rule,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SizerError::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.ess_threshold > 0.0 && self.ess_threshold.is_finite()) {
            return Err(SizerError::InvalidParameter(format!(
                "ESS threshold must be positive, got {}",
                self.ess_threshold
            )));
        }
        Ok(())
    }
}

/// Classification of one `(h, x_j)` cell.
///
/// The numeric codes are the values written to `sizer.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Pixel {
    /// Too few uncensored observations in the window.
    Sparse = 0,
    /// Confidence interval for the derivative contains zero.
    Flat = 1,
    /// Significantly increasing (blue).
    Increase = 2,
    /// Significantly decreasing (red).
    Decrease = 3,
}

impl Pixel {
    pub const ALL: [Pixel; 4] = [Pixel::Sparse, Pixel::Flat, Pixel::Increase, Pixel::Decrease];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Pixel::ALL.get(code as usize).copied()
    }

    pub fn rgb(self) -> [u8; 3] {
        match self {
            Pixel::Increase => [0, 0, 255],
            Pixel::Decrease => [255, 0, 0],
            Pixel::Flat => [160, 32, 240],
            Pixel::Sparse => [128, 128, 128],
        }
    }

    pub fn from_rgb(rgb: [u8; 3]) -> Option<Self> {
        Pixel::ALL.into_iter().find(|p| p.rgb() == rgb)
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pixel::Sparse => "sparse",
            Pixel::Flat => "flat",
            Pixel::Increase => "increase",
            Pixel::Decrease => "decrease",
        })
    }
}

/// Pixel matrix over `(bandwidth, grid point)`, row 0 = smallest bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SizerMap {
    rows: usize,
    cols: usize,
    pixels: Vec<Pixel>,
    /// Critical value `q(h)` used for each row.
    pub quantile: Vec<f64>,
    pub config: InferenceConfig,
}

impl SizerMap {
    pub fn from_pixels(
        rows: usize,
        cols: usize,
        pixels: Vec<Pixel>,
        quantile: Vec<f64>,
        config: InferenceConfig,
    ) -> Self {
        assert_eq!(pixels.len(), rows * cols);
        assert_eq!(quantile.len(), rows);
        Self {
            rows,
            cols,
            pixels,
            quantile,
            config,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Pixel {
        self.pixels[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Pixel] {
        &self.pixels[r * self.cols..(r + 1) * self.cols]
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn count(&self, kind: Pixel) -> usize {
        self.pixels.iter().filter(|&&p| p == kind).count()
    }
}

/// Critical value for one bandwidth row.
///
/// Under [`BlocksRule::IndependentBlocks`] the row is treated as
/// `m = n_events / mean(ESS)` independent windows, averaging only cells that
/// clear the ESS threshold, and `q = Φ⁻¹((1 + (1 − α)^{1/m}) / 2)`.
pub fn row_quantile(ess_row: &[f64], n_events: usize, config: &InferenceConfig) -> f64 {
    let pointwise = || normal_quantile(1.0 - config.alpha / 2.0).expect("alpha validated");
    match config.blocks_rule {
        BlocksRule::Pointwise => pointwise(),
        BlocksRule::IndependentBlocks => {
            let (sum, count) = ess_row
                .iter()
                .filter(|&&e| e >= config.ess_threshold)
                .fold((0.0, 0usize), |(s, c), &e| (s + e, c + 1));
            if count == 0 {
                return pointwise();
            }
            let m = (n_events as f64 / (sum / count as f64)).max(1.0);
            if m == 1.0 {
                return pointwise();
            }
            let level = (1.0 + (1.0 - config.alpha).powf(1.0 / m)) / 2.0;
            normal_quantile(level).expect("level lies in (1/2, 1)")
        }
    }
}

pub fn classify(derivative: f64, sd: f64, ess: f64, q: f64, config: &InferenceConfig) -> Pixel {
    if ess < config.ess_threshold {
        Pixel::Sparse
    } else if derivative - q * sd > 0.0 {
        Pixel::Increase
    } else if derivative + q * sd < 0.0 {
        Pixel::Decrease
    } else {
        Pixel::Flat
    }
}

pub fn build_map(family: &ScaleSpaceFamily, n_events: usize, config: &InferenceConfig) -> SizerMap {
    let (rows, cols) = (family.derivative.rows(), family.derivative.cols());
    let mut pixels = Vec::with_capacity(rows * cols);
    let mut quantile = Vec::with_capacity(rows);
    for k in 0..rows {
        let ess = family.ess.row(k);
        let q = row_quantile(ess, n_events, config);
        quantile.push(q);
        pixels.extend(
            family
                .derivative
                .row(k)
                .iter()
                .zip(family.sd.row(k))
                .zip(ess)
                .map(|((&d, &s), &e)| classify(d, s, e, q, config)),
        );
    }
    SizerMap {
        rows,
        cols,
        pixels,
        quantile,
        config: *config,
    }
}
