//! MNIST IDX ingestion, binary PGM I/O, and seeded dataset subsetting.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("wrong magic number {found:#010x}, expected {expected:#010x}")]
    WrongMagic { expected: u32, found: u32 },
    #[error("truncated file: need {needed} bytes, have {available}")]
    TruncatedFile { needed: usize, available: usize },
    #[error("label {0} is outside 0..=9")]
    LabelOutOfRange(u8),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("pixel buffer of {len} bytes does not match {width}x{height}")]
    DimensionMismatch {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("images have inconsistent dimensions")]
    MixedDimensions,
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("index {index} out of range for {len} images")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An 8-bit grayscale raster, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, DatasetError> {
        if pixels.len() != width * height {
            return Err(DatasetError::DimensionMismatch {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn count_nonzero(&self) -> usize {
        self.pixels.iter().filter(|&&p| p > 0).count()
    }
}

/// Images plus optional digit labels, as loaded from an IDX pair.
#[derive(Debug, Clone)]
pub struct IdxDataset {
    images: Vec<GrayImage>,
    labels: Option<Vec<u8>>,
}

impl IdxDataset {
    pub fn new(images: Vec<GrayImage>, labels: Option<Vec<u8>>) -> Result<Self, DatasetError> {
        if let Some(first) = images.first() {
            if images
                .iter()
                .any(|i| i.width() != first.width() || i.height() != first.height())
            {
                return Err(DatasetError::MixedDimensions);
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != images.len() {
                return Err(DatasetError::CountMismatch {
                    images: images.len(),
                    labels: labels.len(),
                });
            }
            if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
                return Err(DatasetError::LabelOutOfRange(bad));
            }
        }
        Ok(Self { images, labels })
    }

    /// Loads an image file and, if given, a label file. Either may be gzipped.
    pub fn load(images: &Path, labels: Option<&Path>) -> Result<Self, DatasetError> {
        let images = parse_idx_images(&read_maybe_gzip(images)?)?;
        let labels = match labels {
            Some(p) => Some(parse_idx_labels(&read_maybe_gzip(p)?)?),
            None => None,
        };
        Self::new(images, labels)
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, index: usize) -> Result<&GrayImage, DatasetError> {
        self.images.get(index).ok_or(DatasetError::IndexOutOfRange {
            index,
            len: self.images.len(),
        })
    }

    /// Picks `total` indices with a seeded RNG. With labels the draw is
    /// stratified: each digit gets `total / 10` samples and the remainder goes
    /// to the lowest digits. Without labels it is a plain uniform draw.
    ///
    /// Returned indices are sorted ascending within each digit, digits in
    /// order 0..=9.
    pub fn stratified_sample(&self, total: usize, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(labels) = &self.labels else {
            let mut picked = sample(&mut rng, self.len(), total.min(self.len())).into_vec();
            picked.sort_unstable();
            return picked;
        };
        let mut out = Vec::with_capacity(total);
        for digit in 0..10u8 {
            let want = total / 10 + usize::from((digit as usize) < total % 10);
            let pool: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == digit).collect();
            let mut picked: Vec<usize> = sample(&mut rng, pool.len(), want.min(pool.len()))
                .into_iter()
                .map(|k| pool[k])
                .collect();
            picked.sort_unstable();
            out.extend(picked);
        }
        out
    }

    /// One seeded sample index per digit 0..=9 (absent digits are skipped).
    pub fn one_per_digit(&self, seed: u64) -> Result<Vec<(u8, usize)>, DatasetError> {
        let labels = self.labels.as_ref().ok_or(DatasetError::MissingLabels)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for digit in 0..10u8 {
            let pool: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == digit).collect();
            if pool.is_empty() {
                continue;
            }
            let k = sample(&mut rng, pool.len(), 1).index(0);
            out.push((digit, pool[k]));
        }
        Ok(out)
    }
}

/// Reads a file, inflating it first if it starts with the gzip magic.
pub fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>, DatasetError> {
    let raw = std::fs::read(path)?;
    maybe_gunzip(raw)
}

pub fn maybe_gunzip(raw: Vec<u8>) -> Result<Vec<u8>, DatasetError> {
    if raw.len() >= 2 && raw[..2] == GZIP_MAGIC {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32, DatasetError> {
    let chunk = bytes
        .get(offset..offset + 4)
        .ok_or(DatasetError::TruncatedFile {
            needed: offset + 4,
            available: bytes.len(),
        })?;
    Ok(u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), DatasetError> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(DatasetError::WrongMagic { expected, found });
    }
    Ok(())
}

/// Parses an IDX3 unsigned-byte image file (magic 2051).
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>, DatasetError> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let needed = 16 + n * size;
    if bytes.len() < needed {
        return Err(DatasetError::TruncatedFile {
            needed,
            available: bytes.len(),
        });
    }
    Ok(bytes[16..needed]
        .chunks_exact(size.max(1))
        .take(n)
        .map(|px| GrayImage {
            width: cols,
            height: rows,
            pixels: px[..size].to_vec(),
        })
        .collect())
}

/// Parses an IDX1 unsigned-byte label file (magic 2049); labels must be digits.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DatasetError> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    let needed = 8 + n;
    if bytes.len() < needed {
        return Err(DatasetError::TruncatedFile {
            needed,
            available: bytes.len(),
        });
    }
    let labels = &bytes[8..needed];
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(DatasetError::LabelOutOfRange(bad));
    }
    Ok(labels.to_vec())
}

pub fn write_idx_images(images: &[GrayImage]) -> Vec<u8> {
    let (rows, cols) = images
        .first()
        .map_or((0, 0), |i| (i.height() as u32, i.width() as u32));
    let mut out = Vec::with_capacity(16 + images.iter().map(|i| i.pixels.len()).sum::<usize>());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    for img in images {
        out.extend_from_slice(&img.pixels);
    }
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize, DatasetError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(self.pos) {
                None => Err(DatasetError::TruncatedFile {
                    needed: self.pos + 1,
                    available: self.bytes.len(),
                }),
                Some(_) => Err(DatasetError::UnsupportedFormat(
                    "malformed PGM header".into(),
                )),
            };
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| DatasetError::UnsupportedFormat("PGM header value too large".into()))
    }
}

/// Reads a binary ("P5") PGM with maxval ≤ 255. Header comments are skipped.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, DatasetError> {
    if bytes.len() < 2 {
        return Err(DatasetError::TruncatedFile {
            needed: 2,
            available: bytes.len(),
        });
    }
    if &bytes[..2] != b"P5" {
        return Err(DatasetError::UnsupportedFormat(format!(
            "magic {:?}, only binary P5 is supported",
            String::from_utf8_lossy(&bytes[..2])
        )));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if maxval == 0 || maxval > 255 {
        return Err(DatasetError::UnsupportedFormat(format!(
            "maxval {maxval} (must be 1..=255)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => {
            return Err(DatasetError::UnsupportedFormat(
                "malformed PGM header".into(),
            ))
        }
        None => {
            return Err(DatasetError::TruncatedFile {
                needed: cur.pos + 1,
                available: bytes.len(),
            })
        }
    }
    let needed = cur.pos + width * height;
    if bytes.len() < needed {
        return Err(DatasetError::TruncatedFile {
            needed,
            available: bytes.len(),
        });
    }
    let pixels = bytes[cur.pos..needed]
        .iter()
        .map(|&p| {
            if maxval == 255 {
                p
            } else {
                ((p.min(maxval as u8) as usize * 255 + maxval / 2) / maxval) as u8
            }
        })
        .collect();
    GrayImage::from_pixels(width, height, pixels)
}

pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}
