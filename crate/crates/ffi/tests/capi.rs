use std::ffi::{CStr, CString};
use std::ptr;

use sizer_core::io::{generate, CensoringScheme, LifetimeFamily, SyntheticSpec};
use sizer_core::{analyze, EstimatorMode, RunConfig, WeightConvention};
use sizer_ffi::*;

fn last_error() -> String {
    let p = sizer_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn censored_data() -> (Vec<f64>, Vec<u8>) {
    let s = generate(&SyntheticSpec {
        family: LifetimeFamily::Weibull {
            shape: 2.0,
            scale: 1.0,
        },
        censoring: CensoringScheme::Exponential { rate: 0.3 },
        n: 150,
        seed: 42,
    })
    .unwrap();
    let events = s.events().iter().map(|&e| e as u8).collect();
    (s.times().to_vec(), events)
}

struct Handles {
    sample: *mut SizerSample,
    analysis: *mut SizerAnalysis,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            sizer_analysis_free(self.analysis);
            sizer_sample_free(self.sample);
        }
    }
}

fn run(times: &[f64], events: &[u8], config: &SizerConfig) -> Handles {
    let mut h = Handles {
        sample: ptr::null_mut(),
        analysis: ptr::null_mut(),
    };
    unsafe {
        let st = sizer_sample_new(times.as_ptr(), events.as_ptr(), times.len(), &mut h.sample);
        assert_eq!(st, SizerStatus::Ok);
        let st = sizer_analyze(h.sample, config, &mut h.analysis);
        assert_eq!(st, SizerStatus::Ok, "{}", last_error());
    }
    h
}

#[test]
fn analysis_matches_core() {
    let (times, events) = censored_data();
    let mut config = sizer_config_default();
    config.mode = SizerMode::CensoredHazard;
    config.grid_points = 101;
    config.bandwidth_count = 11;
    let h = run(&times, &events, &config);

    let (mut rows, mut cols) = (0, 0);
    unsafe {
        assert_eq!(sizer_sample_len(h.sample), 150);
        assert_eq!(
            sizer_analysis_dims(h.analysis, &mut rows, &mut cols),
            SizerStatus::Ok
        );
    }
    assert_eq!((rows, cols), (11, 101));

    let sample =
        sizer_core::SurvivalSample::new(times.clone(), events.iter().map(|&e| e == 1).collect())
            .unwrap();
    let expected = analyze(
        &sample,
        &RunConfig {
            grid_points: 101,
            bandwidth_count: 11,
            ..RunConfig::with_mode(EstimatorMode::CensoredHazard)
        },
    )
    .unwrap();

    let mut buf = vec![0.0; rows * cols];
    for (q, m) in [
        (SizerQuantity::Estimate, &expected.family.estimate),
        (SizerQuantity::Derivative, &expected.family.derivative),
        (SizerQuantity::Sd, &expected.family.sd),
        (SizerQuantity::Ess, &expected.family.ess),
    ] {
        let st = unsafe { sizer_analysis_matrix(h.analysis, q, buf.as_mut_ptr(), buf.len()) };
        assert_eq!(st, SizerStatus::Ok);
        assert_eq!(buf.as_slice(), m.as_slice());
    }

    let mut pixels = vec![255u8; rows * cols];
    let mut quantiles = vec![0.0; rows];
    let mut grid = vec![0.0; cols];
    let mut bandwidths = vec![0.0; rows];
    unsafe {
        assert_eq!(
            sizer_analysis_pixels(h.analysis, pixels.as_mut_ptr(), pixels.len()),
            SizerStatus::Ok
        );
        assert_eq!(
            sizer_analysis_quantiles(h.analysis, quantiles.as_mut_ptr(), rows),
            SizerStatus::Ok
        );
        assert_eq!(
            sizer_analysis_grid(h.analysis, grid.as_mut_ptr(), cols),
            SizerStatus::Ok
        );
        assert_eq!(
            sizer_analysis_bandwidths(h.analysis, bandwidths.as_mut_ptr(), rows),
            SizerStatus::Ok
        );
    }
    let codes: Vec<u8> = expected.map.pixels().iter().map(|p| p.code()).collect();
    assert_eq!(pixels, codes);
    assert_eq!(quantiles, expected.map.quantile);
    assert_eq!(grid, expected.grid.points());
    assert_eq!(bandwidths, expected.bandwidths.values());
    // hazard modes clamp the grid at zero by default
    assert!(grid[0] >= 0.0);
}

#[test]
fn small_buffer_is_rejected() {
    let (times, events) = censored_data();
    let mut config = sizer_config_default();
    config.mode = SizerMode::CensoredDensity;
    config.grid_points = 51;
    config.bandwidth_count = 5;
    let h = run(&times, &events, &config);
    let mut buf = vec![0.0; 10];
    let st = unsafe {
        sizer_analysis_matrix(h.analysis, SizerQuantity::Sd, buf.as_mut_ptr(), buf.len())
    };
    assert_eq!(st, SizerStatus::BufferTooSmall);
    assert!(last_error().contains("255"));
    let st = unsafe { sizer_analysis_grid(h.analysis, ptr::null_mut(), 51) };
    assert_eq!(st, SizerStatus::NullPointer);
}

#[test]
fn errors_map_to_codes() {
    let (times, events) = censored_data();
    let mut sample = ptr::null_mut();
    unsafe {
        // a single observation is not a sample
        let st = sizer_sample_new(times.as_ptr(), events.as_ptr(), 1, &mut sample);
        assert_eq!(st, SizerStatus::InvalidSample);
        assert!(sample.is_null());

        let bad = [1.0, f64::NAN, 2.0];
        let st = sizer_sample_new(bad.as_ptr(), [1u8, 1, 1].as_ptr(), 3, &mut sample);
        assert_eq!(st, SizerStatus::InvalidSample);

        let st = sizer_sample_new(ptr::null(), events.as_ptr(), 3, &mut sample);
        assert_eq!(st, SizerStatus::NullPointer);

        let st = sizer_sample_new(times.as_ptr(), events.as_ptr(), times.len(), &mut sample);
        assert_eq!(st, SizerStatus::Ok);

        let mut analysis = ptr::null_mut();
        let config = sizer_config_default();
        let st = sizer_analyze(sample, &config, &mut analysis);
        assert_eq!(st, SizerStatus::CensoredInput);
        assert!(last_error().contains("censored"));
        assert!(analysis.is_null());

        let mut config = sizer_config_default();
        config.mode = SizerMode::CensoredDensity;
        config.alpha = 1.5;
        let st = sizer_analyze(sample, &config, &mut analysis);
        assert_eq!(st, SizerStatus::InvalidArgument);

        let mut est = SizerDirectEstimate::default();
        let st = sizer_direct_estimate(
            sample,
            SizerMode::CensoredHazard,
            SizerConvention::LeftLimit,
            0.5,
            -1.0,
            &mut est,
        );
        assert_eq!(st, SizerStatus::InvalidArgument);
        sizer_sample_free(sample);
    }
}

#[test]
fn direct_estimate_matches_core() {
    let (times, events) = censored_data();
    let sample =
        sizer_core::SurvivalSample::new(times.clone(), events.iter().map(|&e| e == 1).collect())
            .unwrap();
    let mut handle = ptr::null_mut();
    let mut got = SizerDirectEstimate::default();
    unsafe {
        sizer_sample_new(times.as_ptr(), events.as_ptr(), times.len(), &mut handle);
        let st = sizer_direct_estimate(
            handle,
            SizerMode::CensoredDensity,
            SizerConvention::PaperExact,
            0.8,
            0.2,
            &mut got,
        );
        assert_eq!(st, SizerStatus::Ok);
        sizer_sample_free(handle);
    }
    let want = sizer_core::scale_space::direct_estimate(
        &sample,
        EstimatorMode::CensoredDensity,
        0.8,
        0.2,
        WeightConvention::PaperExact,
    )
    .unwrap();
    assert_eq!(
        (got.estimate, got.derivative, got.sd, got.ess),
        (want.estimate, want.derivative, want.sd, want.ess)
    );
}

#[test]
fn normal_quantile_through_abi() {
    let mut q = 0.0;
    unsafe {
        assert_eq!(sizer_normal_quantile(0.975, &mut q), SizerStatus::Ok);
        assert!((q - 1.959_963_98).abs() < 1e-6);
        assert_eq!(
            sizer_normal_quantile(1.0, &mut q),
            SizerStatus::InvalidArgument
        );
        assert_eq!(
            sizer_normal_quantile(0.5, ptr::null_mut()),
            SizerStatus::NullPointer
        );
    }
}

#[test]
fn write_produces_files() {
    let (times, events) = censored_data();
    let mut config = sizer_config_default();
    config.mode = SizerMode::CensoredHazard;
    config.grid_points = 41;
    config.bandwidth_count = 6;
    let h = run(&times, &events, &config);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        let st = sizer_analysis_write(
            h.analysis,
            path.as_ptr(),
            SIZER_FORMAT_CSV | SIZER_FORMAT_PPM,
        );
        assert_eq!(st, SizerStatus::Ok);
        assert_eq!(
            sizer_analysis_write(h.analysis, path.as_ptr(), 0),
            SizerStatus::InvalidArgument
        );
        assert_eq!(
            sizer_analysis_write(h.analysis, path.as_ptr(), 64),
            SizerStatus::InvalidArgument
        );
    }
    for name in [
        "family.csv",
        "derivative.csv",
        "sd.csv",
        "ess.csv",
        "sizer.csv",
        "sizer.ppm",
    ] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    assert!(!dir.path().join("sizer.svg").exists());
}

#[test]
fn header_declares_every_entry_point() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sizer.h")).unwrap();
    for name in [
        "sizer_last_error_message",
        "sizer_config_default",
        "sizer_sample_new",
        "sizer_sample_free",
        "sizer_analyze",
        "sizer_analysis_free",
        "sizer_analysis_dims",
        "sizer_analysis_matrix",
        "sizer_analysis_pixels",
        "sizer_analysis_quantiles",
        "sizer_analysis_write",
        "sizer_direct_estimate",
        "sizer_normal_quantile",
        "typedef struct SizerSample SizerSample",
        "typedef struct SizerAnalysis SizerAnalysis",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
