//! File formats: spectrum CSV, the binary dataset container and grayscale
//! m/z images.
//!
//! A container file is
//!
//! ```text
//! FPDS1\n
//! <header byte length>\n
//! <JSON header>
//! <rows * L little-endian f32 values, present spots in row-major order>
//! ```
//!
//! The header records the grid dimensions, the spectrum length, the m/z axis,
//! the occupancy as a string of `0`/`1` per spot, and optional `config` and
//! `meta` JSON values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_axis, DatasetGrid, Spectrum};
use crate::error::{Error, Result};
use crate::stats::nearest_rank;

pub const MAGIC: &str = "FPDS1";

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Parses headerless `mz,intensity` rows.
pub fn parse_spectrum_csv<R: Read>(reader: R) -> Result<Spectrum> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut mz = Vec::new();
    let mut intensity = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = rec[i].parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {:?}", &rec[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("not finite: {}", &rec[i]),
                });
            }
            Ok(v)
        };
        let (m, v) = (num(0)?, num(1)?);
        if mz.last().is_some_and(|&prev| m <= prev) {
            return Err(Error::Parse {
                line,
                message: format!("m/z {m} does not increase"),
            });
        }
        mz.push(m);
        intensity.push(v);
    }
    if mz.is_empty() {
        return Err(Error::EmptyInput("spectrum file has no rows".into()));
    }
    Spectrum::new(mz, intensity)
}

pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_spectrum_csv(BufReader::new(file))
}

pub fn write_spectrum_csv_to<W: Write>(writer: W, spectrum: &Spectrum) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for (m, v) in spectrum.mz().iter().zip(spectrum.intensity()) {
        wtr.write_record([m.to_string(), v.to_string()])
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn write_spectrum_csv(path: &Path, spectrum: &Spectrum) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_spectrum_csv_to(&mut w, spectrum)?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    rows: usize,
    cols: usize,
    length: usize,
    mz: Vec<f64>,
    occupancy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

/// A dataset with the metadata stored next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub grid: DatasetGrid,
    pub config: Option<serde_json::Value>,
    pub meta: Option<serde_json::Value>,
}

impl Container {
    pub fn new(grid: DatasetGrid) -> Self {
        Self {
            grid,
            config: None,
            meta: None,
        }
    }
}

pub fn encode_container<W: Write>(mut w: W, c: &Container) -> std::io::Result<()> {
    let (rows, cols) = c.grid.dims();
    let header = Header {
        rows,
        cols,
        length: c.grid.spectrum_len(),
        mz: c.grid.mz().to_vec(),
        occupancy: c
            .grid
            .occupancy()
            .iter()
            .map(|&p| if p { '1' } else { '0' })
            .collect(),
        config: c.config.clone(),
        meta: c.meta.clone(),
    };
    let json = serde_json::to_vec(&header).map_err(std::io::Error::other)?;
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "{}", json.len())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(c.grid.data().len() * 4);
    for &v in c.grid.data() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()
}

fn read_line<R: Read>(r: &mut R, what: &str) -> Result<String> {
    let mut out = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match r.read(&mut byte) {
            Ok(0) => return Err(Error::Format(format!("file ends inside the {what} line"))),
            Ok(_) if byte[0] == b'\n' => break,
            Ok(_) => out.push(byte[0]),
            Err(e) => return Err(Error::Format(e.to_string())),
        }
        if out.len() > 64 {
            return Err(Error::Format(format!("{what} line too long")));
        }
    }
    String::from_utf8(out).map_err(|_| Error::Format(format!("{what} line is not text")))
}

pub fn decode_container<R: Read>(mut r: R) -> Result<Container> {
    if read_line(&mut r, "magic")? != MAGIC {
        return Err(Error::Format("not a dataset container".into()));
    }
    let len: usize = read_line(&mut r, "header length")?
        .trim()
        .parse()
        .map_err(|_| Error::Format("bad header length".into()))?;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let h: Header =
        serde_json::from_slice(&json).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if h.mz.len() != h.length {
        return Err(Error::Format(format!(
            "header declares length {} but lists {} m/z values",
            h.length,
            h.mz.len()
        )));
    }
    check_axis(&h.mz).map_err(|e| Error::Format(e.to_string()))?;
    if h.occupancy.len() != h.rows * h.cols {
        return Err(Error::Format(format!(
            "occupancy has {} entries for a {}x{} grid",
            h.occupancy.len(),
            h.rows,
            h.cols
        )));
    }
    let occupancy = h
        .occupancy
        .chars()
        .map(|ch| match ch {
            '1' => Ok(true),
            '0' => Ok(false),
            _ => Err(Error::Format(format!("bad occupancy character {ch:?}"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let present = occupancy.iter().filter(|&&p| p).count();
    let expected = present * h.length * 4;
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload)
        .map_err(|e| Error::Format(e.to_string()))?;
    if payload.len() < expected {
        return Err(Error::Format(format!(
            "truncated payload: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::Format(format!(
            "payload of {} bytes does not match the header ({expected} bytes)",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let grid = DatasetGrid::new((h.rows, h.cols), h.mz, occupancy, data)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(Container {
        grid,
        config: h.config,
        meta: h.meta,
    })
}

pub fn write_container(path: &Path, c: &Container) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_container(BufWriter::new(file), c).map_err(|e| Error::io(path, e))
}

pub fn read_container(path: &Path) -> Result<Container> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_container(BufReader::new(file))
}

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// From a file extension; anything but `png` is PGM.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::Pgm,
        }
    }
}

/// Per-spot maximum over `bins`, clipped at the `1 - hotspot_quantile`
/// quantile and scaled linearly to 0..=255. Absent spots are 0, as is every
/// spot when all values are equal.
pub fn render_mz_image(
    grid: &DatasetGrid,
    bins: RangeInclusive<usize>,
    hotspot_quantile: f64,
) -> Result<GrayImage> {
    let (lo, hi) = (*bins.start(), *bins.end());
    if lo > hi || hi >= grid.spectrum_len() {
        return Err(Error::Parameter(format!(
            "bin range {lo}..={hi} is empty or outside 0..{}",
            grid.spectrum_len()
        )));
    }
    if !(0.0..1.0).contains(&hotspot_quantile) {
        return Err(Error::Parameter(format!(
            "hotspot quantile must lie in [0, 1), got {hotspot_quantile}"
        )));
    }
    let values: Vec<f64> = grid
        .rows()
        .map(|row| {
            row[lo..=hi]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (rows, cols) = grid.dims();
    let mut pixels = vec![0u8; rows * cols];
    if let Some(cap) = nearest_rank(&values, 1.0 - hotspot_quantile) {
        let clipped: Vec<f64> = values.iter().map(|v| v.min(cap)).collect();
        let min = clipped.iter().copied().fold(f64::INFINITY, f64::min);
        let max = clipped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for ((r, c), v) in grid.present_spots().into_iter().zip(clipped) {
            pixels[r * cols + c] = if max > min {
                (255.0 * (v - min) / (max - min)).round() as u8
            } else {
                0
            };
        }
    }
    Ok(GrayImage {
        width: cols,
        height: rows,
        pixels,
    })
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc
        .write_header()
        .map_err(|e| Error::Format(e.to_string()))?;
    w.write_image_data(&img.pixels)
        .map_err(|e| Error::Format(e.to_string()))?;
    w.finish().map_err(|e| Error::Format(e.to_string()))?;
    Ok(out)
}

pub fn write_image(path: &Path, img: &GrayImage, format: ImageFormat) -> Result<()> {
    let bytes = match format {
        ImageFormat::Pgm => encode_pgm(img),
        ImageFormat::Png => encode_png(img)?,
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
