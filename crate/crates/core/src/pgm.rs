//! PGM import/export of occupancy data.
//!
//! Masks and snapshots use plain (P2) or raw (P5) PGM with gray levels
//! mapped linearly onto occupancy `[0, 1]`. The physical scale is fixed by
//! a required header comment `#extent R`: the image covers the square
//! `[-R, R]^2` with pixel (col i, row j) centered at
//! `x = -R + (i + 1/2) * 2R/W`, `y = R - (j + 1/2) * 2R/H`
//! (row 0 is the top of the image, as PGM prescribes).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::OccupancyField;

/// Grayscale image with physical scale, the in-memory form of a mask file.
#[derive(Debug, Clone)]
pub struct MaskImage {
    width: usize,
    height: usize,
    extent: f64,
    /// Row-major occupancy values in [0, 1]; row 0 is the top row.
    values: Vec<f64>,
}

impl MaskImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn pixel_size(&self) -> (f64, f64) {
        (
            2.0 * self.extent / self.width as f64,
            2.0 * self.extent / self.height as f64,
        )
    }

    /// Total occupancy volume represented by the image.
    pub fn volume(&self) -> f64 {
        let (px, py) = self.pixel_size();
        self.values.iter().sum::<f64>() * px * py
    }

    /// Largest distance from the origin to a corner of any positive pixel.
    pub fn support_radius(&self) -> f64 {
        let (px, py) = self.pixel_size();
        let mut max2 = 0.0f64;
        for j in 0..self.height {
            for i in 0..self.width {
                if self.values[j * self.width + i] > 0.0 {
                    let x = -self.extent + (i as f64 + 0.5) * px;
                    let y = self.extent - (j as f64 + 0.5) * py;
                    let cx = x.abs() + 0.5 * px;
                    let cy = y.abs() + 0.5 * py;
                    max2 = max2.max(cx * cx + cy * cy);
                }
            }
        }
        max2.sqrt()
    }

    /// Bilinear sample at physical coordinates, zero outside the image.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (px, py) = self.pixel_size();
        let sx = (x + self.extent) / px - 0.5;
        let sy = (self.extent - y) / py - 0.5;
        let (i0, fx) = (sx.floor() as isize, sx - sx.floor());
        let (j0, fy) = (sy.floor() as isize, sy - sy.floor());
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= self.width as isize || j >= self.height as isize {
                0.0
            } else {
                self.values[j as usize * self.width + i as usize]
            }
        };
        let a = at(i0, j0) * (1.0 - fx) + at(i0 + 1, j0) * fx;
        let b = at(i0, j0 + 1) * (1.0 - fx) + at(i0 + 1, j0 + 1) * fx;
        a * (1.0 - fy) + b * fy
    }
}

/// Read a P2/P5 PGM mask; the `#extent R` header comment is mandatory.
pub fn read_mask_pgm(path: &Path) -> Result<MaskImage> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

fn parse_pgm(bytes: &[u8]) -> Result<MaskImage> {
    let bad = |msg: &str| Error::BadMaskFile(msg.to_string());

    let mut pos = 0usize;
    let mut extent: Option<f64> = None;

    let mut next_token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos >= bytes.len() {
                return Err(bad("unexpected end of header"));
            }
            if bytes[*pos] == b'#' {
                let start = *pos + 1;
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                let comment = String::from_utf8_lossy(&bytes[start..*pos])
                    .trim()
                    .to_string();
                if let Some(rest) = comment.strip_prefix("extent") {
                    extent = rest.trim().parse::<f64>().ok();
                }
                continue;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
                *pos += 1;
            }
            return Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned());
        }
    };

    let magic = next_token(&mut pos)?;
    if magic != "P2" && magic != "P5" {
        return Err(bad(&format!(
            "unsupported magic '{magic}', expected P2 or P5"
        )));
    }
    let width: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| bad("bad width"))?;
    let height: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| bad("bad height"))?;
    let maxval: u32 = next_token(&mut pos)?
        .parse()
        .map_err(|_| bad("bad maxval"))?;
    if width == 0 || height == 0 {
        return Err(bad("zero image dimensions"));
    }
    if width != height {
        return Err(bad("mask must be square"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad(&format!("maxval {maxval} outside 1..=65535")));
    }

    let count = width * height;
    let mut values = Vec::with_capacity(count);
    let scale = 1.0 / maxval as f64;

    if magic == "P5" {
        // exactly one whitespace byte separates maxval from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(bad("missing separator before raster"));
        }
        pos += 1;
        let per = if maxval > 255 { 2 } else { 1 };
        if bytes.len() < pos + count * per {
            return Err(bad("truncated raster"));
        }
        for k in 0..count {
            let raw = if per == 1 {
                bytes[pos + k] as u32
            } else {
                u32::from(bytes[pos + 2 * k]) << 8 | u32::from(bytes[pos + 2 * k + 1])
            };
            values.push((raw.min(maxval)) as f64 * scale);
        }
    } else {
        for _ in 0..count {
            let raw: u32 = next_token(&mut pos)?
                .parse()
                .map_err(|_| bad("bad sample value"))?;
            if raw > maxval {
                return Err(bad(&format!("sample {raw} exceeds maxval {maxval}")));
            }
            values.push(raw as f64 * scale);
        }
    }

    let extent = extent.ok_or_else(|| bad("missing required '#extent R' header comment"))?;
    if !extent.is_finite() || extent <= 0.0 {
        return Err(bad("extent must be a positive number"));
    }

    Ok(MaskImage {
        width,
        height,
        extent,
        values,
    })
}

/// Write a P5 snapshot of a field: occupancy scaled by 255 and rounded.
///
/// For d=3 the middle slice (cell index N/2 along the last axis) is written.
/// The `#extent` comment makes snapshots re-importable as masks.
pub fn write_snapshot_pgm(field: &OccupancyField, path: &Path) -> Result<()> {
    let g = field.grid();
    let n = g.resolution();
    let mut data = Vec::with_capacity(n * n);
    match g.dim() {
        2 => {
            for j in 0..n {
                let iy = n - 1 - j;
                for ix in 0..n {
                    data.push(level(field.values()[ix * n + iy]));
                }
            }
        }
        3 => {
            let iz = n / 2;
            for j in 0..n {
                let iy = n - 1 - j;
                for ix in 0..n {
                    data.push(level(field.values()[(ix * n + iy) * n + iz]));
                }
            }
        }
        _ => unreachable!(),
    }
    let mut out = format!("P5\n#extent {}\n{} {}\n255\n", g.extent(), n, n).into_bytes();
    out.extend_from_slice(&data);
    fs::write(path, out)?;
    Ok(())
}

fn level(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}
