//! File formats and synthetic data.
//!
//! - [`samples`]: two-column `time,event` CSV in and out.
//! - [`synth`]: seeded generator for `Xᵢ = min(Tᵢ, Cᵢ)`, `δᵢ = 1(Tᵢ ≤ Cᵢ)`.
//! - [`output`]: family matrices as CSV, the map as CSV codes, PPM and SVG.

pub mod output;
pub mod samples;
pub mod synth;

pub use output::{write_outputs, OutputFormat};
pub use samples::{read_csv, write_csv};
pub use synth::{generate, CensoringScheme, LifetimeFamily, SyntheticSpec};

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
