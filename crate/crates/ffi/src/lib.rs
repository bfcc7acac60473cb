//! C ABI over `sizer-core`.
//!
//! Samples and analyses are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`SizerStatus`]; on failure a description is available from
//! [`sizer_last_error_message`] on the same thread.
//!
//! Matrices are copied out row-major with one row per bandwidth, smallest
//! bandwidth first.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sizer_core::inference::normal_quantile;
use sizer_core::scale_space::direct_estimate;
use sizer_core::{
    analyze, Analysis, BlocksRule, EstimatorMode, OutputFormat, RunConfig, SizerError,
    SurvivalSample, WeightConvention,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSample = 3,
    CensoredInput = 4,
    ZeroWeights = 5,
    InvalidGrid = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizerMode {
    Density = 0,
    Hazard = 1,
    CensoredDensity = 2,
    CensoredHazard = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizerConvention {
    LeftLimit = 0,
    PaperExact = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizerRule {
    IndependentBlocks = 0,
    Pointwise = 1,
}

/// Which family matrix to copy out.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizerQuantity {
    Estimate = 0,
    Derivative = 1,
    Sd = 2,
    Ess = 3,
}

pub const SIZER_FORMAT_CSV: u32 = 1;
pub const SIZER_FORMAT_PPM: u32 = 2;
pub const SIZER_FORMAT_SVG: u32 = 4;

/// Run parameters. Obtain defaults from [`sizer_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SizerConfig {
    pub mode: SizerMode,
    pub grid_points: usize,
    pub bandwidth_count: usize,
    pub alpha: f64,
    pub ess_threshold: f64,
    pub rule: SizerRule,
    pub convention: SizerConvention,
    /// Lower clamp for the grid; NaN selects the mode default.
    pub support_floor: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SizerDirectEstimate {
    pub estimate: f64,
    pub derivative: f64,
    pub sd: f64,
    pub ess: f64,
}

/// Opaque survival sample.
pub struct SizerSample(SurvivalSample);

/// Opaque analysis result.
pub struct SizerAnalysis(Analysis);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn fail(status: SizerStatus, message: impl Into<String>) -> SizerStatus {
    set_error(message.into());
    status
}

fn status_of(err: &SizerError) -> SizerStatus {
    match err {
        SizerError::InvalidSample(_) | SizerError::Parse { .. } => SizerStatus::InvalidSample,
        SizerError::CensoredInput { .. } => SizerStatus::CensoredInput,
        SizerError::ZeroWeights { .. } => SizerStatus::ZeroWeights,
        SizerError::InvalidGrid(_) => SizerStatus::InvalidGrid,
        SizerError::OutOfRange { .. } => SizerStatus::OutOfRange,
        SizerError::InvalidParameter(_) => SizerStatus::InvalidArgument,
        SizerError::File { .. } | SizerError::Io(_) | SizerError::Csv(_) => SizerStatus::Io,
    }
}

fn from_error(err: SizerError) -> SizerStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into [`SizerStatus::Panic`].
fn guard(f: impl FnOnce() -> SizerStatus) -> SizerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SizerStatus::Panic, "internal panic"),
    }
}

impl From<SizerMode> for EstimatorMode {
    fn from(m: SizerMode) -> Self {
        match m {
            SizerMode::Density => EstimatorMode::Density,
            SizerMode::Hazard => EstimatorMode::Hazard,
            SizerMode::CensoredDensity => EstimatorMode::CensoredDensity,
            SizerMode::CensoredHazard => EstimatorMode::CensoredHazard,
        }
    }
}

impl From<SizerConvention> for WeightConvention {
    fn from(c: SizerConvention) -> Self {
        match c {
            SizerConvention::LeftLimit => WeightConvention::LeftLimit,
            SizerConvention::PaperExact => WeightConvention::PaperExact,
        }
    }
}

impl From<SizerRule> for BlocksRule {
    fn from(r: SizerRule) -> Self {
        match r {
            SizerRule::IndependentBlocks => BlocksRule::IndependentBlocks,
            SizerRule::Pointwise => BlocksRule::Pointwise,
        }
    }
}

impl From<&SizerConfig> for RunConfig {
    fn from(c: &SizerConfig) -> Self {
        RunConfig {
            mode: c.mode.into(),
            grid_points: c.grid_points,
            bandwidth_count: c.bandwidth_count,
            alpha: c.alpha,
            ess_threshold: c.ess_threshold,
            blocks_rule: c.rule.into(),
            convention: c.convention.into(),
            support_floor: (!c.support_floor.is_nan()).then_some(c.support_floor),
            ..RunConfig::default()
        }
    }
}

/// Copies `src` into a caller buffer of `len` elements.
///
/// # Safety
/// `out` must be valid for `len` writes.
unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> SizerStatus {
    if out.is_null() {
        return fail(SizerStatus::NullPointer, "output buffer is null");
    }
    if len < src.len() {
        return fail(
            SizerStatus::BufferTooSmall,
            format!("buffer holds {len} elements, {} needed", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    SizerStatus::Ok
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sizer_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn sizer_config_default() -> SizerConfig {
    let d = RunConfig::default();
    SizerConfig {
        mode: SizerMode::Density,
        grid_points: d.grid_points,
        bandwidth_count: d.bandwidth_count,
        alpha: d.alpha,
        ess_threshold: d.ess_threshold,
        rule: SizerRule::IndependentBlocks,
        convention: SizerConvention::LeftLimit,
        support_floor: f64::NAN,
    }
}

/// Builds a sample from `n` times and event flags (nonzero = observed death).
///
/// # Safety
/// `times` and `events` must each be valid for `n` reads; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sizer_sample_new(
    times: *const f64,
    events: *const u8,
    n: usize,
    out: *mut *mut SizerSample,
) -> SizerStatus {
    guard(|| {
        if times.is_null() || events.is_null() || out.is_null() {
            return fail(
                SizerStatus::NullPointer,
                "null argument to sizer_sample_new",
            );
        }
        let t = std::slice::from_raw_parts(times, n).to_vec();
        let e = std::slice::from_raw_parts(events, n)
            .iter()
            .map(|&v| v != 0)
            .collect();
        match SurvivalSample::new(t, e) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(SizerSample(s)));
                SizerStatus::Ok
            }
            Err(err) => from_error(err),
        }
    })
}

/// # Safety
/// `sample` must come from [`sizer_sample_new`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn sizer_sample_free(sample: *mut SizerSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sizer_sample_len(sample: *const SizerSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sizer_sample_events(sample: *const SizerSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.n_events())
}

/// Builds the family and the map.
///
/// # Safety
/// `sample` must be a live handle, `config` valid for one read and `out`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sizer_analyze(
    sample: *const SizerSample,
    config: *const SizerConfig,
    out: *mut *mut SizerAnalysis,
) -> SizerStatus {
    guard(|| {
        let (Some(sample), Some(config)) = (sample.as_ref(), config.as_ref()) else {
            return fail(SizerStatus::NullPointer, "null argument to sizer_analyze");
        };
        if out.is_null() {
            return fail(SizerStatus::NullPointer, "null output handle");
        }
        match analyze(&sample.0, &RunConfig::from(config)) {
            Ok(a) => {
                *out = Box::into_raw(Box::new(SizerAnalysis(a)));
                SizerStatus::Ok
            }
            Err(err) => from_error(err),
        }
    })
}

/// # Safety
/// `analysis` must come from [`sizer_analyze`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_free(analysis: *mut SizerAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Number of bandwidths (`rows`) and grid points (`cols`).
///
/// # Safety
/// `analysis` must be a live handle; `rows` and `cols` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_dims(
    analysis: *const SizerAnalysis,
    rows: *mut usize,
    cols: *mut usize,
) -> SizerStatus {
    let Some(a) = analysis.as_ref() else {
        return fail(SizerStatus::NullPointer, "null analysis handle");
    };
    if rows.is_null() || cols.is_null() {
        return fail(SizerStatus::NullPointer, "null output pointer");
    }
    *rows = a.0.bandwidths.len();
    *cols = a.0.grid.len();
    SizerStatus::Ok
}

/// Copies the `cols` grid points.
///
/// # Safety
/// `analysis` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_grid(
    analysis: *const SizerAnalysis,
    out: *mut f64,
    len: usize,
) -> SizerStatus {
    let Some(a) = analysis.as_ref() else {
        return fail(SizerStatus::NullPointer, "null analysis handle");
    };
    copy_out(&a.0.grid.points(), out, len)
}

/// Copies the `rows` bandwidths, increasing.
///
/// # Safety
/// `analysis` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_bandwidths(
    analysis: *const SizerAnalysis,
    out: *mut f64,
    len: usize,
) -> SizerStatus {
    let Some(a) = analysis.as_ref() else {
        return fail(SizerStatus::NullPointer, "null analysis handle");
    };
    copy_out(a.0.bandwidths.values(), out, len)
}

/// Copies one `rows × cols` family matrix.
///
/// # Safety
/// `analysis` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_matrix(
    analysis: *const SizerAnalysis,
    quantity: SizerQuantity,
    out: *mut f64,
    len: usize,
) -> SizerStatus {
    let Some(a) = analysis.as_ref() else {
        return fail(SizerStatus::NullPointer, "null analysis handle");
    };
    let f = &a.0.family;
    let m = match quantity {
        SizerQuantity::Estimate => &f.estimate,
        SizerQuantity::Derivative => &f.derivative,
        SizerQuantity::Sd => &f.sd,
        SizerQuantity::Ess => &f.ess,
    };
    copy_out(m.as_slice(), out, len)
}

/// Copies the `rows × cols` pixel codes (0 sparse, 1 flat, 2 increase, 3 decrease).
///
/// # Safety
/// `analysis` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_pixels(
    analysis: *const SizerAnalysis,
    out: *mut u8,
    len: usize,
) -> SizerStatus {
    let Some(a) = analysis.as_ref() else {
        return fail(SizerStatus::NullPointer, "null analysis handle");
    };
    let codes: Vec<u8> = a.0.map.pixels().iter().map(|p| p.code()).collect();
    copy_out(&codes, out, len)
}

/// Copies the `rows` per-bandwidth critical values.
///
/// # Safety
/// `analysis` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_quantiles(
    analysis: *const SizerAnalysis,
    out: *mut f64,
    len: usize,
) -> SizerStatus {
    let Some(a) = analysis.as_ref() else {
        return fail(SizerStatus::NullPointer, "null analysis handle");
    };
    copy_out(&a.0.map.quantile, out, len)
}

/// Writes output files into `out_dir`. `formats` is a bitwise OR of the
/// `SIZER_FORMAT_*` flags.
///
/// # Safety
/// `analysis` must be a live handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sizer_analysis_write(
    analysis: *const SizerAnalysis,
    out_dir: *const c_char,
    formats: u32,
) -> SizerStatus {
    guard(|| {
        let Some(a) = analysis.as_ref() else {
            return fail(SizerStatus::NullPointer, "null analysis handle");
        };
        if out_dir.is_null() {
            return fail(SizerStatus::NullPointer, "null output directory");
        }
        let Ok(dir) = CStr::from_ptr(out_dir).to_str() else {
            return fail(
                SizerStatus::InvalidArgument,
                "output directory is not UTF-8",
            );
        };
        let list: Vec<OutputFormat> = [
            (SIZER_FORMAT_CSV, OutputFormat::Csv),
            (SIZER_FORMAT_PPM, OutputFormat::Ppm),
            (SIZER_FORMAT_SVG, OutputFormat::Svg),
        ]
        .into_iter()
        .filter(|(bit, _)| formats & bit != 0)
        .map(|(_, f)| f)
        .collect();
        if list.is_empty()
            || formats & !(SIZER_FORMAT_CSV | SIZER_FORMAT_PPM | SIZER_FORMAT_SVG) != 0
        {
            return fail(
                SizerStatus::InvalidArgument,
                format!("bad format mask {formats:#x}"),
            );
        }
        match a.0.write(&list, dir) {
            Ok(_) => SizerStatus::Ok,
            Err(err) => from_error(err),
        }
    })
}

/// Unbinned estimate at a single `(x, h)`.
///
/// # Safety
/// `sample` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sizer_direct_estimate(
    sample: *const SizerSample,
    mode: SizerMode,
    convention: SizerConvention,
    x: f64,
    h: f64,
    out: *mut SizerDirectEstimate,
) -> SizerStatus {
    guard(|| {
        let Some(sample) = sample.as_ref() else {
            return fail(SizerStatus::NullPointer, "null sample handle");
        };
        if out.is_null() {
            return fail(SizerStatus::NullPointer, "null output pointer");
        }
        let mode = EstimatorMode::from(mode);
        if let Err(err) = mode.check(&sample.0) {
            return from_error(err);
        }
        match direct_estimate(&sample.0, mode, x, h, convention.into()) {
            Ok(d) => {
                *out = SizerDirectEstimate {
                    estimate: d.estimate,
                    derivative: d.derivative,
                    sd: d.sd,
                    ess: d.ess,
                };
                SizerStatus::Ok
            }
            Err(err) => from_error(err),
        }
    })
}

/// Standard normal quantile for `p` in (0, 1).
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sizer_normal_quantile(p: f64, out: *mut f64) -> SizerStatus {
    if out.is_null() {
        return fail(SizerStatus::NullPointer, "null output pointer");
    }
    match normal_quantile(p) {
        Ok(q) => {
            *out = q;
            SizerStatus::Ok
        }
        Err(err) => from_error(err),
    }
}
