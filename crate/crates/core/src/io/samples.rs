use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, Trim};

use super::fmt_f64;
use crate::error::{Result, SizerError};
use crate::survival::SurvivalSample;

/// Reads `time,event` rows from a file. A first row whose first field is not
/// numeric is treated as a header.
pub fn read_csv(path: impl AsRef<Path>) -> Result<SurvivalSample> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SizerError::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file)
}

pub fn parse_csv<R: Read>(reader: R) -> Result<SurvivalSample> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);

    let mut times = Vec::new();
    let mut events = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        let parse_err = |message: String| SizerError::Parse { line, message };

        if record.len() != 2 {
            return Err(parse_err(format!(
                "expected 2 fields (time,event), found {}",
                record.len()
            )));
        }
        let time = match record[0].parse::<f64>() {
            Ok(t) => t,
            Err(_) if index == 0 => continue,
            Err(_) => return Err(parse_err(format!("time '{}' is not a number", &record[0]))),
        };
        if !(time.is_finite() && time > 0.0) {
            return Err(parse_err(format!(
                "time {time} must be finite and positive"
            )));
        }
        let event = match &record[1] {
            "1" => true,
            "0" => false,
            other => {
                return Err(parse_err(format!(
                    "event indicator '{other}' must be 0 or 1"
                )))
            }
        };
        times.push(time);
        events.push(event);
    }

    if times.is_empty() {
        return Err(SizerError::InvalidSample("no observations in input".into()));
    }
    SurvivalSample::new(times, events)
}

/// Writes the sample in input order with a `time,event` header.
pub fn write_csv<W: Write>(sample: &SurvivalSample, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["time", "event"])?;
    for (&t, &e) in sample.times().iter().zip(sample.events()) {
        wtr.write_record([fmt_f64(t), u8::from(e).to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
