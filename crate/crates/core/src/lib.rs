//! SiZer maps for uncensored and right-censored density and hazard estimation.
//!
//! The crate is organised bottom-up:
//!
//! - [`survival`]: observed `(time, event)` data, product-limit survival
//!   curves and the per-observation reweighting for each [`EstimatorMode`].
//! - [`binning`]: Gaussian kernels, the evaluation grid, linear binning and
//!   truncated discrete convolution.
//! - [`scale_space`]: the family of smooths over a bandwidth grid, plus the
//!   exact unbinned evaluator used to cross-check it.
//! - [`inference`]: simultaneous Gaussian quantiles and per-pixel
//!   classification into a [`SizerMap`].
//! - [`io`] and [`pipeline`]: CSV input, synthetic data, output writers and the
//!   end-to-end driver used by the `sizer` binary.

pub mod binning;
pub mod error;
pub mod inference;
pub mod io;
pub mod pipeline;
pub mod scale_space;
pub mod survival;

pub use binning::{BinnedCounts, Grid, KernelRow};
pub use error::{Result, SizerError};
pub use inference::{BlocksRule, InferenceConfig, Pixel, SizerMap};
pub use pipeline::{analyze, Analysis, OutputFormat, RunConfig};

pub use scale_space::{BandwidthGrid, DirectEstimate, ScaleSpaceFamily};
pub use survival::{
    EstimatorMode, ObservationWeights, StepSurvival, SurvivalSample, SurvivalTarget,
    WeightConvention,
};
