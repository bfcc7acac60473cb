//! Writers for the family matrices and the SiZer map.
//!
//! Matrix CSVs share one layout: a header row `h,x₀,…,x_{g−1}` followed by
//! one row per bandwidth in increasing order, bandwidth in the first column.
//! `sizer.csv` uses the same layout with the integer codes of [`Pixel`].
//! Images put the largest bandwidth on the top row.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use csv::ReaderBuilder;

use super::fmt_f64;
use crate::binning::Grid;
use crate::error::{Result, SizerError};
use crate::inference::{Pixel, SizerMap};
use crate::scale_space::{BandwidthGrid, Matrix, ScaleSpaceFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Ppm,
    Svg,
}

impl OutputFormat {
    /// Parses a comma-separated list such as `csv,ppm`.
    pub fn parse_list(s: &str) -> Result<Vec<OutputFormat>> {
        let mut formats = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let f: OutputFormat = part.parse()?;
            if !formats.contains(&f) {
                formats.push(f);
            }
        }
        if formats.is_empty() {
            return Err(SizerError::InvalidParameter(
                "no output format given".into(),
            ));
        }
        Ok(formats)
    }
}

impl FromStr for OutputFormat {
    type Err = SizerError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "ppm" => Ok(OutputFormat::Ppm),
            "svg" => Ok(OutputFormat::Svg),
            _ => Err(SizerError::InvalidParameter(format!(
                "unknown output format '{s}' (expected csv, ppm or svg)"
            ))),
        }
    }
}

fn header(grid: &Grid) -> Vec<String> {
    std::iter::once("h".to_string())
        .chain(grid.points().into_iter().map(fmt_f64))
        .collect()
}

pub fn write_matrix_csv<W: Write>(
    matrix: &Matrix,
    grid: &Grid,
    bandwidths: &BandwidthGrid,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header(grid))?;
    for (row, &h) in matrix.iter_rows().zip(bandwidths.values()) {
        wtr.write_record(std::iter::once(fmt_f64(h)).chain(row.iter().map(|&v| fmt_f64(v))))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_map_csv<W: Write>(
    map: &SizerMap,
    grid: &Grid,
    bandwidths: &BandwidthGrid,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header(grid))?;
    for (r, &h) in bandwidths.values().iter().enumerate().take(map.rows()) {
        wtr.write_record(
            std::iter::once(fmt_f64(h)).chain(map.row(r).iter().map(|p| p.code().to_string())),
        )?;
    }
    wtr.flush()?;
    Ok(())
}

/// `(x grid, bandwidths, rows)` as read back from a matrix CSV.
pub type MatrixCsv = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Reads a matrix CSV back into `(x grid, bandwidths, rows)`.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<MatrixCsv> {
    let mut rdr = ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut xs = Vec::new();
    let mut hs = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i as u64 + 1;
        let nums = |fields: csv::StringRecordIter<'_>| -> Result<Vec<f64>> {
            fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| SizerError::Parse {
                        line,
                        message: format!("'{f}' is not a number"),
                    })
                })
                .collect()
        };
        let mut fields = record.iter();
        let first = fields.next().unwrap_or_default();
        if i == 0 {
            xs = nums(fields)?;
        } else {
            hs.push(first.parse::<f64>().map_err(|_| SizerError::Parse {
                line,
                message: format!("bandwidth '{first}' is not a number"),
            })?);
            rows.push(nums(fields)?);
        }
    }
    Ok((xs, hs, rows))
}

/// Decodes `sizer.csv` into pixel rows (smallest bandwidth first).
pub fn read_map_csv<R: Read>(reader: R) -> Result<Vec<Vec<Pixel>>> {
    let (_, _, rows) = read_matrix_csv(reader)?;
    rows.into_iter()
        .enumerate()
        .map(|(r, row)| {
            row.into_iter()
                .map(|v| {
                    Pixel::from_code(v as u8)
                        .filter(|_| v.fract() == 0.0 && (0.0..=3.0).contains(&v))
                        .ok_or_else(|| SizerError::Parse {
                            line: r as u64 + 2,
                            message: format!("invalid pixel code {v}"),
                        })
                })
                .collect()
        })
        .collect()
}

/// Binary P6 image, one pixel per cell, largest bandwidth on top.
pub fn write_ppm<W: Write>(map: &SizerMap, mut writer: W) -> Result<()> {
    write!(writer, "P6\n{} {}\n255\n", map.cols(), map.rows())?;
    let mut payload = Vec::with_capacity(3 * map.cols() * map.rows());
    for r in (0..map.rows()).rev() {
        for p in map.row(r) {
            payload.extend_from_slice(&p.rgb());
        }
    }
    writer.write_all(&payload)?;
    writer.flush()?;
    Ok(())
}

/// Decodes a P6 image written by [`write_ppm`] into pixel rows, smallest
/// bandwidth first.
pub fn read_ppm(bytes: &[u8]) -> Result<Vec<Vec<Pixel>>> {
    let bad = |message: &str| SizerError::Parse {
        line: 0,
        message: format!("PPM: {message}"),
    };
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?);
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(bad("expected P6 with maxval 255"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let data = &bytes[pos.min(bytes.len())..];
    if data.len() != 3 * width * height {
        return Err(bad("payload size does not match dimensions"));
    }
    let mut rows: Vec<Vec<Pixel>> = data
        .chunks(3 * width.max(1))
        .map(|line| {
            line.chunks(3)
                .map(|c| Pixel::from_rgb([c[0], c[1], c[2]]).ok_or_else(|| bad("unknown colour")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    rows.reverse();
    Ok(rows)
}

/// One `rect` per pixel, same orientation and colours as the PPM.
pub fn write_svg<W: Write>(map: &SizerMap, mut writer: W) -> Result<()> {
    let (w, h) = (map.cols(), map.rows());
    let mut out = String::with_capacity(64 * w * h + 256);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    for (y, r) in (0..h).rev().enumerate() {
        for (x, p) in map.row(r).iter().enumerate() {
            let [red, green, blue] = p.rgb();
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="1" height="1" fill="rgb({red},{green},{blue})"/>"#
            );
        }
    }
    out.push_str("</svg>\n");
    writer.write_all(out.as_bytes())?;
    writer.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| SizerError::File {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes the requested outputs into `out_dir`, creating it if needed, and
/// returns the paths written.
pub fn write_outputs(
    family: &ScaleSpaceFamily,
    map: &SizerMap,
    grid: &Grid,
    bandwidths: &BandwidthGrid,
    formats: &[OutputFormat],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|source| SizerError::File {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Csv) {
        for (name, matrix) in [
            ("family.csv", &family.estimate),
            ("derivative.csv", &family.derivative),
            ("sd.csv", &family.sd),
            ("ess.csv", &family.ess),
        ] {
            let path = out_dir.join(name);
            write_matrix_csv(matrix, grid, bandwidths, create(&path)?)?;
            written.push(path);
        }
        let path = out_dir.join("sizer.csv");
        write_map_csv(map, grid, bandwidths, create(&path)?)?;
        written.push(path);
    }
    if formats.contains(&OutputFormat::Ppm) {
        let path = out_dir.join("sizer.ppm");
        write_ppm(map, create(&path)?)?;
        written.push(path);
    }
    if formats.contains(&OutputFormat::Svg) {
        let path = out_dir.join("sizer.svg");
        write_svg(map, create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::InferenceConfig;

    fn tiny_map(pixels: Vec<Pixel>, rows: usize, cols: usize) -> SizerMap {
        SizerMap::from_pixels(
            rows,
            cols,
            pixels,
            vec![1.96; rows],
            InferenceConfig::default(),
        )
    }

    #[test]
    fn single_flat_pixel_ppm() {
        let map = tiny_map(vec![Pixel::Flat], 1, 1);
        let mut buf = Vec::new();
        write_ppm(&map, &mut buf).unwrap();
        assert_eq!(buf, b"P6\n1 1\n255\n\xa0\x20\xf0");
    }

    #[test]
    fn ppm_puts_largest_bandwidth_on_top() {
        let map = tiny_map(
            vec![
                Pixel::Increase,
                Pixel::Increase,
                Pixel::Decrease,
                Pixel::Sparse,
            ],
            2,
            2,
        );
        let mut buf = Vec::new();
        write_ppm(&map, &mut buf).unwrap();
        let payload = &buf[buf.len() - 12..];
        assert_eq!(&payload[..3], &[255, 0, 0]);
        assert_eq!(&payload[6..9], &[0, 0, 255]);
        let decoded = read_ppm(&buf).unwrap();
        assert_eq!(decoded[0], map.row(0));
        assert_eq!(decoded[1], map.row(1));
    }

    #[test]
    fn map_csv_round_trip() {
        let pixels: Vec<Pixel> = (0..12).map(|i| Pixel::ALL[(i * 7) % 4]).collect();
        let map = tiny_map(pixels, 3, 4);
        let grid = Grid::new(0.0, 3.0, 4).unwrap();
        let bw = BandwidthGrid::log_spaced(0.1, 1.0, 3).unwrap();
        let mut buf = Vec::new();
        write_map_csv(&map, &grid, &bw, &mut buf).unwrap();
        let rows = read_map_csv(buf.as_slice()).unwrap();
        let flat: Vec<Pixel> = rows.concat();
        assert_eq!(flat, map.pixels());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h,0.0,1.0,2.0,3.0\n0.1,"));
    }

    #[test]
    fn matrix_csv_is_bit_faithful() {
        let grid = Grid::new(-0.5, 0.7, 3).unwrap();
        let bw = BandwidthGrid::log_spaced(0.013, 0.9, 2).unwrap();
        let m = Matrix::from_rows(vec![
            vec![0.1 + 0.2, 1e-300, -3.5e12],
            vec![f64::MIN_POSITIVE, 0.0, 1.0 / 3.0],
        ]);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &grid, &bw, &mut buf).unwrap();
        let (xs, hs, rows) = read_matrix_csv(buf.as_slice()).unwrap();
        assert_eq!(xs, grid.points());
        assert_eq!(hs, bw.values());
        assert_eq!(Matrix::from_rows(rows), m);
    }

    #[test]
    fn svg_has_one_rect_per_pixel() {
        let map = tiny_map(vec![Pixel::Flat; 6], 2, 3);
        let mut buf = Vec::new();
        write_svg(&map, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<rect").count(), 6);
        assert!(text.contains("rgb(160,32,240)"));
    }

    #[test]
    fn format_list_parsing() {
        assert_eq!(
            OutputFormat::parse_list("csv, ppm,csv").unwrap(),
            vec![OutputFormat::Csv, OutputFormat::Ppm]
        );
        assert!(OutputFormat::parse_list("png").is_err());
        assert!(OutputFormat::parse_list("").is_err());
    }
}
