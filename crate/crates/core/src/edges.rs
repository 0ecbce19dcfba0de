//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression and hysteresis thresholding.

use std::f64::consts::PI;

use thiserror::Error;

use crate::dataset::GrayImage;

/// Standard deviation of the 5×5 smoothing kernel.
pub const GAUSSIAN_SIGMA: f64 = 1.4;
pub const DEFAULT_LOW: f64 = 100.0;
pub const DEFAULT_HIGH: f64 = 200.0;
/// Gradient magnitudes are clamped to this value before hysteresis.
pub const MAGNITUDE_CLAMP: f64 = 255.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EdgeError {
    #[error("image is empty")]
    EmptyImage,
    #[error("invalid hysteresis thresholds: low {low} must satisfy 0 <= low <= high {high}")]
    InvalidThresholds { low: f64, high: f64 },
}

/// A real-valued image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().iter().map(|&p| f64::from(p)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }
}

/// Sobel response: per-pixel magnitude and direction (radians, `atan2(gy, gx)`).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub direction: Vec<f64>,
}

/// A binary edge map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeImage {
    pub width: usize,
    pub height: usize,
    pub mask: Vec<bool>,
}

impl EdgeImage {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.mask.contains(&true)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.width + col]
    }

    /// Serializes as 0 / 255 grayscale.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |r, c| {
            if self.get(r, c) {
                255
            } else {
                0
            }
        })
    }
}

/// Canny thresholds on the clamped `[0, 255]` magnitude scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            low: DEFAULT_LOW,
            high: DEFAULT_HIGH,
        }
    }
}

/// Normalized 5×5 Gaussian kernel (σ = 1.4), row-major.
pub fn gaussian_kernel() -> [[f64; 5]; 5] {
    let mut k = [[0.0; 5]; 5];
    let mut sum = 0.0;
    for (i, row) in k.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let dy = i as f64 - 2.0;
            let dx = j as f64 - 2.0;
            *v = (-(dx * dx + dy * dy) / (2.0 * GAUSSIAN_SIGMA * GAUSSIAN_SIGMA)).exp();
            sum += *v;
        }
    }
    for v in k.iter_mut().flatten() {
        *v /= sum;
    }
    k
}

fn convolve<const N: usize>(img: &FloatImage, kernel: &[[f64; N]; N]) -> FloatImage {
    let half = (N / 2) as isize;
    let mut out = FloatImage::new(img.width, img.height);
    for row in 0..img.height {
        for col in 0..img.width {
            let mut acc = 0.0;
            for (ki, krow) in kernel.iter().enumerate() {
                for (kj, &w) in krow.iter().enumerate() {
                    acc += w * img.get_clamped(
                        row as isize + ki as isize - half,
                        col as isize + kj as isize - half,
                    );
                }
            }
            out.data[row * img.width + col] = acc;
        }
    }
    out
}

pub fn gaussian_blur(img: &GrayImage) -> Result<FloatImage, EdgeError> {
    if img.width() == 0 || img.height() == 0 {
        return Err(EdgeError::EmptyImage);
    }
    Ok(convolve(&FloatImage::from_gray(img), &gaussian_kernel()))
}

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

pub fn sobel_gradients(img: &FloatImage) -> Result<GradientField, EdgeError> {
    if img.is_empty() {
        return Err(EdgeError::EmptyImage);
    }
    let gx = convolve(img, &SOBEL_X).data;
    let gy = convolve(img, &SOBEL_Y).data;
    let magnitude = gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect();
    let direction = gx.iter().zip(&gy).map(|(x, y)| y.atan2(*x)).collect();
    Ok(GradientField {
        width: img.width,
        height: img.height,
        gx,
        gy,
        magnitude,
        direction,
    })
}

/// Quantizes a gradient direction into the (row, col) offset of one of the two
/// neighbors compared during suppression; the other is the negation.
pub fn direction_offset(theta: f64) -> (isize, isize) {
    let mut deg = theta * 180.0 / PI;
    if deg < 0.0 {
        deg += 180.0;
    }
    if !(22.5..157.5).contains(&deg) {
        (0, 1)
    } else if deg < 67.5 {
        (1, 1)
    } else if deg < 112.5 {
        (1, 0)
    } else {
        (1, -1)
    }
}

/// Keeps a pixel iff its magnitude is ≥ both neighbors along the quantized
/// gradient direction. The one-pixel frame is always suppressed.
pub fn nonmax_suppress(g: &GradientField) -> FloatImage {
    let (w, h) = (g.width, g.height);
    let mut out = FloatImage::new(w, h);
    if w < 3 || h < 3 {
        return out;
    }
    for row in 1..h - 1 {
        for col in 1..w - 1 {
            let i = row * w + col;
            let m = g.magnitude[i];
            if m == 0.0 {
                continue;
            }
            let (dr, dc) = direction_offset(g.direction[i]);
            let a = g.magnitude[(row as isize + dr) as usize * w + (col as isize + dc) as usize];
            let b = g.magnitude[(row as isize - dr) as usize * w + (col as isize - dc) as usize];
            if m >= a && m >= b {
                out.data[i] = m;
            }
        }
    }
    out
}

/// Double thresholding: pixels ≥ `high` seed edges, pixels in `[low, high)`
/// join them through 8-connectivity.
pub fn hysteresis(img: &FloatImage, low: f64, high: f64) -> Result<EdgeImage, EdgeError> {
    if !(0.0..=high).contains(&low) {
        return Err(EdgeError::InvalidThresholds { low, high });
    }
    let (w, h) = (img.width, img.height);
    let mut mask = vec![false; w * h];
    let mut stack = Vec::new();
    for (i, &v) in img.data.iter().enumerate() {
        if v >= high && !mask[i] {
            mask[i] = true;
            stack.push(i);
            while let Some(p) = stack.pop() {
                let (r, c) = ((p / w) as isize, (p % w) as isize);
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        let (nr, nc) = (r + dr, c + dc);
                        if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                            continue;
                        }
                        let q = nr as usize * w + nc as usize;
                        if !mask[q] && img.data[q] >= low {
                            mask[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
    }
    Ok(EdgeImage {
        width: w,
        height: h,
        mask,
    })
}

/// Full Canny pipeline; thresholds apply to the magnitude clamped to 255.
pub fn canny(img: &GrayImage, params: CannyParams) -> Result<EdgeImage, EdgeError> {
    if !(0.0..=params.high).contains(&params.low) {
        return Err(EdgeError::InvalidThresholds {
            low: params.low,
            high: params.high,
        });
    }
    let blurred = gaussian_blur(img)?;
    let grad = sobel_gradients(&blurred)?;
    let mut thin = nonmax_suppress(&grad);
    for v in &mut thin.data {
        *v = v.min(MAGNITUDE_CLAMP);
    }
    hysteresis(&thin, params.low, params.high)
}
