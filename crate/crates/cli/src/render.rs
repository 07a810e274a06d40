//! 8-bit grayscale PGM rasters of real maps. Rows are colatitude rings,
//! columns longitudes. Values are min-max scaled to 0..=255 and the range is
//! kept in a `<name>.minmax.txt` sidecar so a raster can be read back.

use std::fs;
use std::path::{Path, PathBuf};

use sphwiener::harmonic::SphereMap;

use crate::error::{CliError, CliResult};

/// Gray level used for a constant map.
pub const CONSTANT_LEVEL: u8 = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub min: f64,
    pub max: f64,
}

impl Raster {
    pub fn is_constant(&self) -> bool {
        self.min == self.max
    }

    /// Pixel values mapped back to the original range.
    pub fn values(&self) -> Vec<f64> {
        if self.is_constant() {
            return vec![self.min; self.pixels.len()];
        }
        let span = self.max - self.min;
        self.pixels.iter().map(|&p| self.min + span * p as f64 / 255.0).collect()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::io(path, sphwiener::Error::Io(e))
}

fn bad(path: &Path, msg: &str) -> CliError {
    CliError::io(path, sphwiener::Error::InvalidInput(msg.to_string()))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("minmax.txt")
}

/// Quantizes the real part of `map`. Fails on an empty or complex-valued map.
pub fn rasterize(map: &SphereMap) -> CliResult<Raster> {
    let values = map.real_parts();
    if values.is_empty() {
        return Err(CliError::Config("cannot render an empty map".into()));
    }
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if map.max_abs_imag() > 1e-8 * scale {
        return Err(CliError::Config(format!(
            "map is not real-valued (imaginary part up to {:.3e})",
            map.max_abs_imag()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numerical(sphwiener::Error::InvalidInput(
            "map has non-finite samples".into(),
        )));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pixels = if min == max {
        vec![CONSTANT_LEVEL; values.len()]
    } else {
        values
            .iter()
            .map(|v| ((v - min) / (max - min) * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    };
    Ok(Raster {
        width: map.grid().n_phi(),
        height: map.grid().n_theta(),
        pixels,
        min,
        max,
    })
}

pub fn write_raster(r: &Raster, path: &Path) -> CliResult<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", r.width, r.height).into_bytes();
    bytes.extend_from_slice(&r.pixels);
    fs::write(path, bytes).map_err(|e| io_err(path, e))?;
    let side = sidecar_path(path);
    let text = format!(
        "min = {:.17e}\nmax = {:.17e}\nconstant = {}\n",
        r.min,
        r.max,
        r.is_constant()
    );
    fs::write(&side, text).map_err(|e| io_err(&side, e))
}

pub fn render_map(map: &SphereMap, path: &Path) -> CliResult<()> {
    write_raster(&rasterize(map)?, path)
}

fn header_fields(bytes: &[u8], count: usize) -> Option<(Vec<String>, usize)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < count {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // one whitespace byte separates the header from the raster
    Some((fields, pos + 1))
}

/// Reads a raster written by [`write_raster`] together with its sidecar.
pub fn read_raster(path: &Path) -> CliResult<Raster> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let (fields, offset) = header_fields(&bytes, 4).ok_or_else(|| bad(path, "truncated header"))?;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad(path, "not an 8-bit binary PGM"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad(path, "bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad(path, "bad height"))?;
    let pixels = bytes.get(offset..).unwrap_or_default().to_vec();
    if pixels.len() != width * height {
        return Err(bad(path, "pixel count does not match header"));
    }

    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| io_err(&side, e))?;
    let mut min = None;
    let mut max = None;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            let v = v.trim();
            match k.trim() {
                "min" => min = v.parse::<f64>().ok(),
                "max" => max = v.parse::<f64>().ok(),
                _ => {}
            }
        }
    }
    let (Some(min), Some(max)) = (min, max) else {
        return Err(bad(&side, "missing min or max"));
    };
    Ok(Raster {
        width,
        height,
        pixels,
        min,
        max,
    })
}
