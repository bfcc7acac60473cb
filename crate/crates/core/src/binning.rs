//! Gaussian kernels, the evaluation grid, linear binning and the truncated
//! discrete convolution that turns binned counts into smooths.

use std::f64::consts::PI;

use crate::error::{Result, SizerError};
use crate::survival::{ObservationWeights, SurvivalSample};

/// Default relative cutoff for kernel lag tables.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Fraction of the data range added on each side by [`make_grid`].
pub const GRID_PADDING: f64 = 0.05;

/// `g` equally spaced points `x_min = x₀ < … < x_{g−1} = x_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    g: usize,
    bin_width: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, g: usize) -> Result<Self> {
        if g < 2 {
            return Err(SizerError::InvalidGrid(format!(
                "need at least 2 points, got {g}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(SizerError::InvalidGrid(format!(
                "bounds [{x_min}, {x_max}] are not an increasing finite interval"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            g,
            bin_width: (x_max - x_min) / (g - 1) as f64,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.g
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Grid point `j` (0-based). The last point is exactly `x_max`.
    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.g {
            self.x_max
        } else {
            self.x_min + j as f64 * self.bin_width
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.g).map(|j| self.x(j)).collect()
    }
}

/// Grid spanning the data range padded by 5% per side, clamped below at
/// `support_floor` when given.
pub fn make_grid(range: (f64, f64), g: usize, support_floor: Option<f64>) -> Result<Grid> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(SizerError::InvalidGrid("data range is not finite".into()));
    }
    if lo >= hi {
        return Err(SizerError::InvalidGrid(format!(
            "degenerate data range [{lo}, {hi}]; all observations identical?"
        )));
    }
    let pad = GRID_PADDING * (hi - lo);
    let mut x_min = lo - pad;
    if let Some(floor) = support_floor {
        if floor > lo {
            return Err(SizerError::InvalidGrid(format!(
                "support floor {floor} is above the smallest observation {lo}"
            )));
        }
        x_min = x_min.max(floor);
    }
    Grid::new(x_min, hi + pad, g)
}

/// `(K_h(u), K′_h(u))` for the Gaussian kernel.
#[inline]
pub fn gaussian_kernel(h: f64, u: f64) -> (f64, f64) {
    let z = u / h;
    let k = (-0.5 * z * z).exp() / (h * (2.0 * PI).sqrt());
    (k, -z / h * k)
}

/// Per-grid-point counts produced by [`linear_bin`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCounts {
    /// Unit mass per observation.
    pub c0: Vec<f64>,
    /// Unit mass per event.
    pub c0_events: Vec<f64>,
    /// Mass `wᵢ = δᵢ / D(Xᵢ)` per observation.
    pub c_h: Vec<f64>,
}

/// Splits each observation between its two neighbouring grid points in
/// proportion to proximity.
pub fn linear_bin(
    sample: &SurvivalSample,
    weights: &ObservationWeights,
    grid: &Grid,
) -> Result<BinnedCounts> {
    assert_eq!(
        weights.weights.len(),
        sample.len(),
        "weights do not belong to this sample"
    );
    let g = grid.len();
    let mut counts = BinnedCounts {
        c0: vec![0.0; g],
        c0_events: vec![0.0; g],
        c_h: vec![0.0; g],
    };

    for ((&x, &event), &w) in sample
        .times()
        .iter()
        .zip(sample.events())
        .zip(&weights.weights)
    {
        if x < grid.x_min() || x > grid.x_max() {
            return Err(SizerError::OutOfRange {
                value: x,
                min: grid.x_min(),
                max: grid.x_max(),
            });
        }
        let pos = (x - grid.x_min()) / grid.bin_width();
        let j = (pos.floor() as usize).min(g - 2);
        let upper = (pos - j as f64).clamp(0.0, 1.0);
        let lower = 1.0 - upper;

        counts.c0[j] += lower;
        counts.c0[j + 1] += upper;
        if event {
            counts.c0_events[j] += lower;
            counts.c0_events[j + 1] += upper;
        }
        if w != 0.0 {
            counts.c_h[j] += lower * w;
            counts.c_h[j + 1] += upper * w;
        }
    }
    Ok(counts)
}

/// Kernel values at grid lags `0, 1, …, half_support` for one bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub h: f64,
    /// `K_h(l · bin_width)`.
    pub k: Vec<f64>,
    /// `K′_h(l · bin_width)`; negative lags follow by oddness.
    pub k_prime: Vec<f64>,
    pub half_support: usize,
}

impl KernelRow {
    /// `κ_l`, zero beyond the truncation.
    pub fn kappa(&self, lag: isize) -> f64 {
        self.k.get(lag.unsigned_abs()).copied().unwrap_or(0.0)
    }

    /// `κ′_l`, zero beyond the truncation.
    pub fn kappa_prime(&self, lag: isize) -> f64 {
        let v = self.k_prime.get(lag.unsigned_abs()).copied().unwrap_or(0.0);
        if lag < 0 {
            -v
        } else {
            v
        }
    }

    /// `K_h(0)`.
    pub fn peak(&self) -> f64 {
        self.k[0]
    }
}

/// Lag tables truncated once `K_h` drops below `tail_eps · K_h(0)`.
pub fn build_kernel_row(h: f64, grid: &Grid, tail_eps: f64) -> KernelRow {
    assert!(
        h > 0.0 && h.is_finite(),
        "bandwidth must be positive, got {h}"
    );
    let cutoff = if tail_eps > 0.0 && tail_eps < 1.0 {
        h * (-2.0 * tail_eps.ln()).sqrt() / grid.bin_width()
    } else if tail_eps >= 1.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let half_support = if cutoff.is_finite() {
        (cutoff.ceil() as usize).min(grid.len() - 1)
    } else {
        grid.len() - 1
    };

    let (k, k_prime) = (0..=half_support)
        .map(|l| gaussian_kernel(h, l as f64 * grid.bin_width()))
        .unzip();
    KernelRow {
        h,
        k,
        k_prime,
        half_support,
    }
}

/// Direct truncated convolution with a symmetric (`odd = false`) or
/// antisymmetric (`odd = true`) lag table. Lags running off either end of the
/// grid are dropped.
pub(crate) fn convolve_table(counts: &[f64], table: &[f64], odd: bool) -> Vec<f64> {
    let g = counts.len();
    let reach = table.len().saturating_sub(1);
    let mut out = vec![0.0; g];
    // scatter from occupied bins; each output still sums in increasing j′
    for (jp, &c) in counts.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let lo = jp.saturating_sub(reach);
        let hi = (jp + reach).min(g - 1);
        for (j, o) in out.iter_mut().enumerate().take(jp).skip(lo) {
            let v = table[jp - j];
            *o += (if odd { -v } else { v }) * c;
        }
        for (j, o) in out.iter_mut().enumerate().take(hi + 1).skip(jp) {
            *o += table[j - jp] * c;
        }
    }
    out
}

/// `out_j = Σ_{j′} κ_{j−j′} counts_{j′}`, or with `κ′` when `use_derivative`.
pub fn convolve(counts: &[f64], row: &KernelRow, use_derivative: bool) -> Vec<f64> {
    if use_derivative {
        convolve_table(counts, &row.k_prime, true)
    } else {
        convolve_table(counts, &row.k, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::{observation_weights, EstimatorMode, WeightConvention};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn grid_examples() {
        let g = make_grid((0.0, 10.0), 11, None).unwrap();
        assert!(close(g.x_min(), -0.5, 1e-15));
        assert!(close(g.x_max(), 10.5, 1e-15));
        assert!(close(g.bin_width(), 1.1, 1e-15));

        let g = make_grid((1.0, 2.0), 2, Some(0.0)).unwrap();
        assert!(close(g.x_min(), 0.95, 1e-15));
        assert!(close(g.x_max(), 2.05, 1e-15));

        let g = make_grid((0.01, 1.0), 401, Some(0.0)).unwrap();
        assert_eq!(g.x_min(), 0.0);
        assert_eq!(g.x(400), g.x_max());
    }

    #[test]
    fn grid_errors() {
        assert!(make_grid((3.0, 3.0), 11, None).is_err());
        assert!(make_grid((0.0, 1.0), 1, None).is_err());
        assert!(make_grid((0.0, f64::INFINITY), 11, None).is_err());
        assert!(Grid::new(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn kernel_values() {
        let (k, kp) = gaussian_kernel(1.0, 0.0);
        assert!(close(k, 0.398_942_280_401_432_7, 1e-15));
        assert_eq!(kp, 0.0);
        let (k, _) = gaussian_kernel(2.0, 0.0);
        assert!(close(k, 0.199_471_140_200_716_35, 1e-15));
        let (k, kp) = gaussian_kernel(1.0, 1.0);
        assert!(close(k, 0.241_970_724_519_143_37, 1e-15));
        assert!(close(kp, -0.241_970_724_519_143_37, 1e-15));
    }

    #[test]
    fn kernel_derivative_scaling() {
        // K′_h(x) = K′(x/h) / h²
        let (h, x) = (0.7, 0.3);
        let (_, kp_h) = gaussian_kernel(h, x);
        let (_, kp_1) = gaussian_kernel(1.0, x / h);
        assert!(close(kp_h, kp_1 / (h * h), 1e-15));
    }

    fn sample_at(times: Vec<f64>) -> (SurvivalSample, ObservationWeights) {
        let s = SurvivalSample::uncensored(times).unwrap();
        let w =
            observation_weights(&s, EstimatorMode::Density, WeightConvention::LeftLimit).unwrap();
        (s, w)
    }

    #[test]
    fn bin_point_on_grid_node() {
        let grid = Grid::new(0.0, 10.0, 11).unwrap();
        let (s, w) = sample_at(vec![3.0, 7.0]);
        let c = linear_bin(&s, &w, &grid).unwrap();
        assert_eq!(c.c0[3], 1.0);
        assert_eq!(c.c0[2], 0.0);
        assert_eq!(c.c0[4], 0.0);
        assert_eq!(c.c0[7], 1.0);
    }

    #[test]
    fn bin_midpoint_splits_evenly() {
        let grid = Grid::new(0.0, 10.0, 11).unwrap();
        let (s, w) = sample_at(vec![3.5, 10.0]);
        let c = linear_bin(&s, &w, &grid).unwrap();
        assert!(close(c.c0[3], 0.5, 1e-15));
        assert!(close(c.c0[4], 0.5, 1e-15));
        assert_eq!(c.c0[10], 1.0);
    }

    #[test]
    fn bin_reweighted_censored_pair() {
        let grid = Grid::new(0.0, 4.0, 5).unwrap();
        let s = SurvivalSample::new(vec![1.0, 3.0], vec![false, true]).unwrap();
        let w = observation_weights(
            &s,
            EstimatorMode::CensoredDensity,
            WeightConvention::LeftLimit,
        )
        .unwrap();
        let c = linear_bin(&s, &w, &grid).unwrap();
        assert_eq!(c.c_h, vec![0.0, 0.0, 0.0, 2.0, 0.0]);
        assert_eq!(c.c0_events, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(c.c0, vec![0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn bin_rejects_out_of_range() {
        let grid = Grid::new(1.0, 2.0, 5).unwrap();
        let (s, w) = sample_at(vec![1.5, 2.5]);
        assert!(matches!(
            linear_bin(&s, &w, &grid),
            Err(SizerError::OutOfRange { .. })
        ));
    }

    #[test]
    fn kernel_row_truncation() {
        let grid = Grid::new(0.0, 100.0, 1001).unwrap();
        let row = build_kernel_row(grid.bin_width(), &grid, 1e-12);
        // e^{−u²/2} = 1e−12 at u = √(24 ln 10) ≈ 7.434
        assert_eq!(row.half_support, 8);
        assert!(close(row.peak(), 1.0 / (row.h * (2.0 * PI).sqrt()), 1e-15));
        assert_eq!(row.k_prime[0], 0.0);
        let past = gaussian_kernel(row.h, 9.0 * grid.bin_width()).0;
        assert!(past < 1e-12 * row.peak());

        // capped at g − 1
        let wide = build_kernel_row(1e3, &grid, 1e-12);
        assert_eq!(wide.half_support, 1000);
    }

    #[test]
    fn convolve_delta() {
        let grid = Grid::new(0.0, 4.0, 41).unwrap();
        let row = build_kernel_row(0.3, &grid, DEFAULT_TAIL_EPS);
        let mut counts = vec![0.0; 41];
        counts[17] = 1.0;
        let out = convolve(&counts, &row, false);
        for (j, v) in out.iter().enumerate() {
            let expected = gaussian_kernel(0.3, grid.x(j) - grid.x(17)).0;
            assert!(close(*v, expected, 1e-14));
        }
        let d = convolve(&counts, &row, true);
        assert_eq!(d[17], 0.0);
        for (j, v) in d.iter().enumerate() {
            let expected = gaussian_kernel(0.3, grid.x(j) - grid.x(17)).1;
            assert!(close(*v, expected, 1e-13));
        }
        assert!(convolve(&vec![0.0; 41], &row, true)
            .iter()
            .all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn binning_preserves_count_and_first_moment(
            times in prop::collection::vec(0.01f64..50.0, 2..60),
            g in 2usize..300,
        ) {
            let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assume!(hi > lo);
            let grid = make_grid((lo, hi), g, None).unwrap();
            let (s, w) = sample_at(times.clone());
            let c = linear_bin(&s, &w, &grid).unwrap();
            let n = times.len() as f64;
            let total: f64 = c.c0.iter().sum();
            prop_assert!((total - n).abs() < 1e-9);
            let moment: f64 = c.c0.iter().enumerate().map(|(j, m)| m * grid.x(j)).sum();
            let direct: f64 = times.iter().sum();
            prop_assert!((moment - direct).abs() < 1e-9 * direct.abs().max(1.0));
            prop_assert!(c.c0.iter().all(|&v| v >= 0.0));
            prop_assert_eq!(&c.c0, &c.c0_events);
        }

        #[test]
        fn convolution_is_linear(
            a in prop::collection::vec(0.0f64..5.0, 64),
            b in prop::collection::vec(0.0f64..5.0, 64),
            h in 0.05f64..2.0,
            deriv in any::<bool>(),
        ) {
            let grid = Grid::new(0.0, 6.3, 64).unwrap();
            let row = build_kernel_row(h, &grid, DEFAULT_TAIL_EPS);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = convolve(&sum, &row, deriv);
            let ra = convolve(&a, &row, deriv);
            let rb = convolve(&b, &row, deriv);
            for j in 0..64 {
                let scale = lhs[j].abs().max(ra[j].abs()).max(1.0 / h);
                prop_assert!((lhs[j] - ra[j] - rb[j]).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn symmetric_counts_give_antisymmetric_derivative(
            half in prop::collection::vec(0.0f64..5.0, 40),
            h in 0.05f64..3.0,
        ) {
            let mut counts = half.clone();
            counts.push(1.0);
            counts.extend(half.iter().rev());
            let g = counts.len();
            let grid = Grid::new(-4.0, 4.0, g).unwrap();
            let row = build_kernel_row(h, &grid, DEFAULT_TAIL_EPS);
            let d = convolve(&counts, &row, true);
            let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for j in 0..g {
                prop_assert!((d[j] + d[g - 1 - j]).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn truncation_error_is_bounded(
            times in prop::collection::vec(0.0f64..10.0, 2..40),
            h in 0.05f64..1.0,
            eps in prop::sample::select(vec![1e-3, 1e-6, 1e-9]),
        ) {
            let grid = Grid::new(-0.5, 10.5, 201).unwrap();
            let s = SurvivalSample::uncensored(times.iter().map(|t| t + 0.1).collect()).unwrap();
            let w = observation_weights(&s, EstimatorMode::Density, WeightConvention::LeftLimit).unwrap();
            let c = linear_bin(&s, &w, &grid).unwrap();
            let full = build_kernel_row(h, &grid, 0.0);
            let cut = build_kernel_row(h, &grid, eps);
            let bound = s.len() as f64 * eps * full.peak();
            let a = convolve(&c.c0, &full, false);
            let b = convolve(&c.c0, &cut, false);
            for j in 0..grid.len() {
                prop_assert!((a[j] - b[j]).abs() <= bound);
            }
        }
    }
}
