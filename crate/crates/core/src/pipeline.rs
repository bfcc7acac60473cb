//! End-to-end driver: sample → grid → family → map → files.

use std::path::{Path, PathBuf};

use crate::binning::{make_grid, Grid};
use crate::error::{Result, SizerError};
use crate::inference::{build_map, BlocksRule, InferenceConfig, SizerMap};
use crate::io::output::write_outputs;
pub use crate::io::output::OutputFormat;
use crate::scale_space::{build_family, default_bandwidths, BandwidthGrid, ScaleSpaceFamily};
use crate::survival::{EstimatorMode, SurvivalSample, WeightConvention};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: EstimatorMode,
    pub grid_points: usize,
    pub bandwidth_count: usize,
    pub alpha: f64,
    pub ess_threshold: f64,
    pub blocks_rule: BlocksRule,
    pub convention: WeightConvention,
    pub formats: Vec<OutputFormat>,
    /// Lower clamp for the grid. Hazard modes default to 0 when unset.
    pub support_floor: Option<f64>,
    /// Only used by the synthetic generator.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: EstimatorMode::Density,
            grid_points: 401,
            bandwidth_count: 51,
            alpha: 0.05,
            ess_threshold: 5.0,
            blocks_rule: BlocksRule::IndependentBlocks,
            convention: WeightConvention::LeftLimit,
            formats: vec![OutputFormat::Csv],
            support_floor: None,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn with_mode(mode: EstimatorMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 || self.bandwidth_count < 2 {
            return Err(SizerError::InvalidParameter(format!(
                "grid points ({}) and bandwidth count ({}) must both be at least 2",
                self.grid_points, self.bandwidth_count
            )));
        }
        self.inference().validate()
    }

    pub fn inference(&self) -> InferenceConfig {
        InferenceConfig {
            alpha: self.alpha,
            ess_threshold: self.ess_threshold,
            blocks_rule: self.blocks_rule,
        }
    }

    pub fn effective_floor(&self) -> Option<f64> {
        self.support_floor
            .or_else(|| self.mode.is_hazard().then_some(0.0))
    }
}

/// Everything computed for one run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub grid: Grid,
    pub bandwidths: BandwidthGrid,
    pub family: ScaleSpaceFamily,
    pub map: SizerMap,
}

impl Analysis {
    pub fn write(
        &self,
        formats: &[OutputFormat],
        out_dir: impl AsRef<Path>,
    ) -> Result<Vec<PathBuf>> {
        write_outputs(
            &self.family,
            &self.map,
            &self.grid,
            &self.bandwidths,
            formats,
            out_dir,
        )
    }
}

pub fn analyze(sample: &SurvivalSample, config: &RunConfig) -> Result<Analysis> {
    config.validate()?;
    config.mode.check(sample)?;
    let grid = make_grid(
        sample.time_range(),
        config.grid_points,
        config.effective_floor(),
    )?;
    let bandwidths = default_bandwidths(&grid, config.bandwidth_count)?;
    let family = build_family(sample, config.mode, &grid, &bandwidths, config.convention)?;
    let map = build_map(&family, sample.n_events(), &config.inference());
    Ok(Analysis {
        grid,
        bandwidths,
        family,
        map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hazard_modes_floor_at_zero() {
        assert_eq!(
            RunConfig::with_mode(EstimatorMode::Hazard).effective_floor(),
            Some(0.0)
        );
        assert_eq!(
            RunConfig::with_mode(EstimatorMode::Density).effective_floor(),
            None
        );
        let explicit = RunConfig {
            support_floor: Some(-1.0),
            ..RunConfig::with_mode(EstimatorMode::CensoredHazard)
        };
        assert_eq!(explicit.effective_floor(), Some(-1.0));
    }

    #[test]
    fn rejects_bad_config() {
        let s = SurvivalSample::uncensored(vec![1.0, 2.0, 3.0]).unwrap();
        for c in [
            RunConfig {
                grid_points: 1,
                ..RunConfig::default()
            },
            RunConfig {
                bandwidth_count: 1,
                ..RunConfig::default()
            },
            RunConfig {
                alpha: 1.0,
                ..RunConfig::default()
            },
            RunConfig {
                ess_threshold: -1.0,
                ..RunConfig::default()
            },
        ] {
            assert!(analyze(&s, &c).is_err());
        }
    }

    #[test]
    fn shapes_follow_config() {
        let s = SurvivalSample::new(
            vec![0.05, 1.0, 1.5, 2.5, 4.0],
            vec![true, true, false, true, true],
        )
        .unwrap();
        let config = RunConfig {
            grid_points: 31,
            bandwidth_count: 7,
            ..RunConfig::with_mode(EstimatorMode::CensoredHazard)
        };
        let a = analyze(&s, &config).unwrap();
        assert_eq!(a.grid.x_min(), 0.0);
        assert_eq!((a.map.rows(), a.map.cols()), (7, 31));
        assert_eq!(a.family.estimate.rows(), 7);
        assert!(analyze(&s, &RunConfig::default()).is_err());
    }
}
