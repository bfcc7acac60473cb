//! The scale-space family: estimate, derivative, standard deviation of the
//! derivative and effective sample size at every `(h, x_j)`.
//!
//! [`build_family`] uses the binned engine. [`DirectEstimator`] evaluates the
//! same quantities as exact sums over the observations and serves as the
//! reference the binned output is checked against.

use rayon::prelude::*;

use crate::binning::{
    build_kernel_row, convolve_table, gaussian_kernel, linear_bin, BinnedCounts, Grid, KernelRow,
    DEFAULT_TAIL_EPS,
};
use crate::error::{Result, SizerError};
use crate::survival::{
    observation_weights, EstimatorMode, ObservationWeights, SurvivalSample, WeightConvention,
};

/// Log-equally spaced, strictly increasing bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid {
    values: Vec<f64>,
}

impl BandwidthGrid {
    pub fn log_spaced(h_min: f64, h_max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(SizerError::InvalidParameter(format!(
                "need at least 2 bandwidths, got {count}"
            )));
        }
        if !(h_min > 0.0 && h_min < h_max && h_max.is_finite()) {
            return Err(SizerError::InvalidParameter(format!(
                "bandwidth range [{h_min}, {h_max}] must satisfy 0 < min < max"
            )));
        }
        let (a, b) = (h_min.ln(), h_max.ln());
        let last = count - 1;
        let values = (0..count)
            .map(|k| match k {
                0 => h_min,
                k if k == last => h_max,
                k => (a + (b - a) * k as f64 / last as f64).exp(),
            })
            .collect();
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `count` bandwidths from twice the bin width up to the grid width.
pub fn default_bandwidths(grid: &Grid, count: usize) -> Result<BandwidthGrid> {
    BandwidthGrid::log_spaced(2.0 * grid.bin_width(), grid.width(), count)
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }
}

/// One bandwidth's worth of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRow {
    pub estimate: Vec<f64>,
    pub derivative: Vec<f64>,
    pub sd: Vec<f64>,
    pub ess: Vec<f64>,
}

/// Smooths for all bandwidths, one matrix row per bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSpaceFamily {
    pub mode: EstimatorMode,
    pub grid: Grid,
    pub bandwidths: BandwidthGrid,
    pub n: usize,
    pub n_events: usize,
    pub estimate: Matrix,
    pub derivative: Matrix,
    pub sd: Matrix,
    pub ess: Matrix,
}

/// Evaluates one bandwidth from binned counts.
///
/// The second-moment sum uses `c_h · (c_h / c̃₀)` so that a bin holding one
/// observation of weight `w` contributes `w²` rather than `w`. Bins with no
/// reweighted mass contribute nothing.
pub fn family_row(counts: &BinnedCounts, row: &KernelRow, n: usize) -> FamilyRow {
    let n_f = n as f64;
    let second: Vec<f64> = counts
        .c_h
        .iter()
        .zip(&counts.c0_events)
        .map(|(&c, &e)| if c > 0.0 && e > 0.0 { c * (c / e) } else { 0.0 })
        .collect();
    let k_prime_sq: Vec<f64> = row.k_prime.iter().map(|v| v * v).collect();

    let estimate: Vec<f64> = convolve_table(&counts.c_h, &row.k, false)
        .into_iter()
        .map(|v| v / n_f)
        .collect();
    let derivative: Vec<f64> = convolve_table(&counts.c_h, &row.k_prime, true)
        .into_iter()
        .map(|v| v / n_f)
        .collect();
    let sd = convolve_table(&second, &k_prime_sq, false)
        .into_iter()
        .zip(&derivative)
        .map(|(m2, d)| ((m2 / n_f - d * d).max(0.0) / n_f).sqrt())
        .collect();
    let peak = row.peak();
    let ess = convolve_table(&counts.c0_events, &row.k, false)
        .into_iter()
        .map(|v| v / peak)
        .collect();

    FamilyRow {
        estimate,
        derivative,
        sd,
        ess,
    }
}

/// Weights once, bins once, then evaluates every bandwidth in parallel.
pub fn build_family(
    sample: &SurvivalSample,
    mode: EstimatorMode,
    grid: &Grid,
    bandwidths: &BandwidthGrid,
    convention: WeightConvention,
) -> Result<ScaleSpaceFamily> {
    let weights = observation_weights(sample, mode, convention)?;
    let counts = linear_bin(sample, &weights, grid)?;
    let rows: Vec<FamilyRow> = bandwidths
        .values()
        .par_iter()
        .map(|&h| {
            let kernel = build_kernel_row(h, grid, DEFAULT_TAIL_EPS);
            family_row(&counts, &kernel, sample.len())
        })
        .collect();

    let (rows_n, cols) = (bandwidths.len(), grid.len());
    let mut family = ScaleSpaceFamily {
        mode,
        grid: *grid,
        bandwidths: bandwidths.clone(),
        n: sample.len(),
        n_events: sample.n_events(),
        estimate: Matrix::zeros(rows_n, cols),
        derivative: Matrix::zeros(rows_n, cols),
        sd: Matrix::zeros(rows_n, cols),
        ess: Matrix::zeros(rows_n, cols),
    };
    for (k, row) in rows.into_iter().enumerate() {
        family.estimate.row_mut(k).copy_from_slice(&row.estimate);
        family
            .derivative
            .row_mut(k)
            .copy_from_slice(&row.derivative);
        family.sd.row_mut(k).copy_from_slice(&row.sd);
        family.ess.row_mut(k).copy_from_slice(&row.ess);
    }
    Ok(family)
}

/// Exact unbinned values at a single `(x, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectEstimate {
    pub estimate: f64,
    pub derivative: f64,
    pub sd: f64,
    pub ess: f64,
}

/// `n⁻¹ Σ (yᵢ − ȳ)²`, computed in two passes.
pub fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Exact sums over the observations for a fixed weighting.
#[derive(Debug, Clone)]
pub struct DirectEstimator<'a> {
    sample: &'a SurvivalSample,
    weights: ObservationWeights,
}

impl<'a> DirectEstimator<'a> {
    pub fn new(
        sample: &'a SurvivalSample,
        mode: EstimatorMode,
        convention: WeightConvention,
    ) -> Result<Self> {
        let weights = observation_weights(sample, mode, convention)?;
        Ok(Self { sample, weights })
    }

    /// Uses caller-supplied weights, e.g. to perturb a single observation.
    pub fn with_weights(sample: &'a SurvivalSample, weights: ObservationWeights) -> Self {
        assert_eq!(weights.weights.len(), sample.len());
        Self { sample, weights }
    }

    pub fn weights(&self) -> &ObservationWeights {
        &self.weights
    }

    /// The `n` terms `wᵢ K′_h(x − Xᵢ)` whose mean is the derivative estimate.
    /// Censored observations contribute a zero term.
    pub fn derivative_terms(&self, x: f64, h: f64) -> Vec<f64> {
        self.sample
            .times()
            .iter()
            .zip(&self.weights.weights)
            .map(|(&xi, &w)| w * gaussian_kernel(h, x - xi).1)
            .collect()
    }

    pub fn eval(&self, x: f64, h: f64) -> DirectEstimate {
        let n = self.sample.len() as f64;
        let peak = gaussian_kernel(h, 0.0).0;
        let mut estimate = 0.0;
        let mut ess = 0.0;
        // beyond 39 bandwidths the kernel underflows to exactly zero
        let reach = 39.0 * h;
        let mut terms = Vec::with_capacity(self.sample.len());
        for ((&xi, &w), &event) in self
            .sample
            .times()
            .iter()
            .zip(&self.weights.weights)
            .zip(self.sample.events())
        {
            if (x - xi).abs() > reach {
                terms.push(0.0);
                continue;
            }
            let (k, k_prime) = gaussian_kernel(h, x - xi);
            estimate += w * k;
            terms.push(w * k_prime);
            if event {
                ess += k;
            }
        }
        let derivative = terms.iter().sum::<f64>() / n;
        let sd = (population_variance(&terms) / n).sqrt();
        DirectEstimate {
            estimate: estimate / n,
            derivative,
            sd,
            ess: ess / peak,
        }
    }
}

pub fn direct_estimate(
    sample: &SurvivalSample,
    mode: EstimatorMode,
    x: f64,
    h: f64,
    convention: WeightConvention,
) -> Result<DirectEstimate> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SizerError::InvalidParameter(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    Ok(DirectEstimator::new(sample, mode, convention)?.eval(x, h))
}
