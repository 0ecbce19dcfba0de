//! Image ↔ coordinate-signal conversion.
//!
//! An image becomes two equal-length signals: the column (`x`) and row (`y`)
//! of every nonzero pixel, read in raster order.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::GrayImage;
use crate::edges::{canny, CannyParams, EdgeError, EdgeImage};
use crate::format::fmt_sig;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("dataset is empty or has no nonzero pixels")]
    EmptyDataset,
    #[error("x has {x} samples but y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("malformed signal CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Edge(#[from] EdgeError),
}

/// The X and Y coordinate signals of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordSignalPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub source_width: usize,
    pub source_height: usize,
}

impl CoordSignalPair {
    pub fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        source_width: usize,
        source_height: usize,
    ) -> Result<Self, SignalError> {
        if x.len() != y.len() {
            return Err(SignalError::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        Ok(Self {
            x,
            y,
            source_width,
            source_height,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with header `index,x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,x,y\n");
        for (i, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            let _ = writeln!(out, "{i},{},{}", fmt_sig(*x), fmt_sig(*y));
        }
        out
    }

    /// Parses the `index,x,y` CSV. Source dimensions are not stored in the
    /// file and must be supplied.
    pub fn from_csv(text: &str, width: usize, height: usize) -> Result<Self, SignalError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "index,x,y" => {}
            _ => {
                return Err(SignalError::Csv {
                    line: 1,
                    reason: "expected header `index,x,y`".into(),
                })
            }
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |reason: &str| SignalError::Csv {
                line: n + 1,
                reason: reason.into(),
            };
            if fields.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            x.push(fields[1].parse().map_err(|_| bad("bad x value"))?);
            y.push(fields[2].parse().map_err(|_| bad("bad y value"))?);
        }
        Self::new(x, y, width, height)
    }
}

/// Anything that can be scanned for "on" pixels in raster order.
pub trait PixelSource {
    fn dimensions(&self) -> (usize, usize);
    fn is_on(&self, row: usize, col: usize) -> bool;
}

impl PixelSource for GrayImage {
    fn dimensions(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn is_on(&self, row: usize, col: usize) -> bool {
        self.get(row, col) > 0
    }
}

impl PixelSource for EdgeImage {
    fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn is_on(&self, row: usize, col: usize) -> bool {
        self.get(row, col)
    }
}

/// Rows outer, columns inner: each nonzero pixel appends its column to `x`
/// and its row to `y`.
pub fn extract_coordinates<I: PixelSource + ?Sized>(img: &I) -> CoordSignalPair {
    let (width, height) = img.dimensions();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for row in 0..height {
        for col in 0..width {
            if img.is_on(row, col) {
                x.push(col as f64);
                y.push(row as f64);
            }
        }
    }
    CoordSignalPair {
        x,
        y,
        source_width: width,
        source_height: height,
    }
}

fn to_pixel(v: f64, extent: usize) -> usize {
    // f64::round is half-away-from-zero
    let r = v.round();
    if r.is_nan() || r <= 0.0 {
        0
    } else {
        (r as usize).min(extent.saturating_sub(1))
    }
}

/// Rasterizes (possibly real-valued) coordinate signals onto a blank canvas.
pub fn signals_to_image(sig: &CoordSignalPair) -> GrayImage {
    let mut img = GrayImage::new(sig.source_width, sig.source_height);
    if img.is_empty() {
        return img;
    }
    for (&x, &y) in sig.x.iter().zip(&sig.y) {
        img.set(
            to_pixel(y, sig.source_height),
            to_pixel(x, sig.source_width),
            255,
        );
    }
    img
}

/// Total raw and edge signal lengths over a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthTotals {
    pub raw: usize,
    pub edge: usize,
}

impl LengthTotals {
    pub fn reduction(&self) -> Result<f64, SignalError> {
        if self.raw == 0 {
            return Err(SignalError::EmptyDataset);
        }
        Ok(1.0 - self.edge as f64 / self.raw as f64)
    }
}

pub fn length_totals<'a, I>(images: I, params: CannyParams) -> Result<LengthTotals, SignalError>
where
    I: IntoParallelIterator<Item = &'a GrayImage>,
{
    let per_image: Vec<(usize, usize)> = images
        .into_par_iter()
        .map(|img| Ok((img.count_nonzero(), canny(img, params)?.count())))
        .collect::<Result<_, EdgeError>>()?;
    Ok(per_image
        .into_iter()
        .fold(LengthTotals { raw: 0, edge: 0 }, |acc, (r, e)| {
            LengthTotals {
                raw: acc.raw + r,
                edge: acc.edge + e,
            }
        }))
}

/// `1 − edge_length / raw_length`, summed over the dataset. The raw length
/// counts pixels with intensity > 0.
pub fn length_reduction(images: &[GrayImage], params: CannyParams) -> Result<f64, SignalError> {
    if images.is_empty() {
        return Err(SignalError::EmptyDataset);
    }
    length_totals(images, params)?.reduction()
}
