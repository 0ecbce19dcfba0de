//! Edge-based temporal spike encoding of static grayscale images.
//!
//! The pipeline runs Canny edge detection on an image, reads the edge pixel
//! coordinates in raster order as two signals (X = column, Y = row), and
//! encodes each signal as a ternary spike train with step-forward (SF) or
//! threshold-based (TBR) coding, optionally after adaptive resampling.
//! Decoders reconstruct the signals, and [`metrics`] scores reconstruction
//! precision against spike-train cost. [`sweep`] grid-searches the two
//! thresholds.
//!
//! ```
//! use spikelens::{encode, decode, EncodingConfig, Method};
//!
//! let signal = [3.0, 7.0, 12.0, 4.0];
//! let cfg = EncodingConfig::adaptive(Method::Sf, 0.1, 0.2).unwrap();
//! let train = encode(&signal, &cfg).unwrap();
//! let recon = decode(&train).unwrap();
//! assert_eq!(recon.len(), signal.len());
//! assert!(recon.iter().zip(&signal).all(|(r, s)| (r - s).abs() <= 0.2 + 1e-9));
//! ```

pub mod codec;
pub mod dataset;
pub mod edges;
pub mod format;
pub mod metrics;
pub mod pipeline;
pub mod signal;
pub mod sweep;

pub use codec::{
    adaptive_decode, adaptive_resample, decode, encode, sf_encode, tbr_encode, temporal_decode,
    AdaptiveSample, CodecError, EncodingConfig, Method, SpikeTrain,
};
pub use dataset::{read_pgm, write_pgm, DatasetError, GrayImage, IdxDataset};
pub use edges::{canny, CannyParams, EdgeError, EdgeImage};
pub use metrics::{AggregateReport, FitnessParams, MetricsError, MetricsReport};
pub use signal::{extract_coordinates, signals_to_image, CoordSignalPair, SignalError};
pub use sweep::{default_axes, grid_sweep, SweepError, SweepGrid};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}
