//! Grid search over (sampling threshold, encoding threshold).

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{decode, encode, CodecError, EncodingConfig, Method};
use crate::format::{fmt_sig, fmt_threshold};
use crate::metrics::{evaluate, AggregateReport, FitnessParams, MetricsError, MetricsReport};

pub const CSV_HEADER: &str =
    "sampling_threshold,encoding_threshold,rmse,snr_db,afr,spike_count,fitness";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SweepError {
    #[error("no signals to sweep")]
    EmptyDataset,
    #[error("threshold axis is empty")]
    EmptyAxis,
    #[error("no grid cell has a finite fitness")]
    NoFiniteCell,
    #[error("signal {index}: {source}")]
    Codec {
        index: usize,
        #[source]
        source: CodecError,
    },
    #[error("signal {index}: {source}")]
    Metrics {
        index: usize,
        #[source]
        source: MetricsError,
    },
}

/// Thresholds 0.1, 0.2, …, 2.0 for both axes.
pub fn default_axes() -> (Vec<f64>, Vec<f64>) {
    let axis: Vec<f64> = (1..=20).map(|i| f64::from(i) / 10.0).collect();
    (axis.clone(), axis)
}

/// Encodes, decodes and scores one signal.
pub fn evaluate_signal(
    signal: &[f64],
    config: &EncodingConfig,
    params: FitnessParams,
) -> Result<MetricsReport, SweepError> {
    let wrap_codec = |source| SweepError::Codec { index: 0, source };
    let train = encode(signal, config).map_err(wrap_codec)?;
    let recon = decode(&train).map_err(wrap_codec)?;
    evaluate(signal, &recon, &train, params)
        .map_err(|source| SweepError::Metrics { index: 0, source })
}

/// Per-signal reports for a whole dataset under one configuration, in
/// dataset order.
pub fn evaluate_signals(
    signals: &[Vec<f64>],
    config: &EncodingConfig,
    params: FitnessParams,
) -> Result<Vec<MetricsReport>, SweepError> {
    signals
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            evaluate_signal(s, config, params).map_err(|e| match e {
                SweepError::Codec { source, .. } => SweepError::Codec { index, source },
                SweepError::Metrics { source, .. } => SweepError::Metrics { index, source },
                other => other,
            })
        })
        .collect()
}

/// Dataset-averaged metrics for one configuration.
pub fn evaluate_dataset(
    signals: &[Vec<f64>],
    config: &EncodingConfig,
    params: FitnessParams,
) -> Result<AggregateReport, SweepError> {
    let reports = evaluate_signals(signals, config, params)?;
    AggregateReport::from_reports(&reports, params).ok_or(SweepError::EmptyDataset)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub sampling_threshold: Option<f64>,
    pub encoding_threshold: f64,
    pub outcome: Result<AggregateReport, SweepError>,
}

impl SweepCell {
    pub fn finite_fitness(&self) -> Option<f64> {
        self.outcome
            .as_ref()
            .ok()
            .and_then(AggregateReport::finite_fitness)
    }
}

/// Result of a threshold sweep. Conventional sweeps have an empty sampling
/// axis and a single row of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub method: Method,
    pub sampling_axis: Vec<f64>,
    pub encoding_axis: Vec<f64>,
    pub cells: Vec<Vec<SweepCell>>,
    /// (row, column) of the best cell.
    pub best: (usize, usize),
}

impl SweepGrid {
    pub fn is_adaptive(&self) -> bool {
        !self.sampling_axis.is_empty()
    }

    pub fn best_cell(&self) -> &SweepCell {
        &self.cells[self.best.0][self.best.1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for cell in self.cells.iter().flatten() {
            let sampling = cell
                .sampling_threshold
                .map_or_else(|| "NA".to_string(), fmt_threshold);
            let metrics = match &cell.outcome {
                Ok(agg) => agg.csv_row(),
                Err(_) => "nan,nan,nan,nan,nan".to_string(),
            };
            let _ = writeln!(
                out,
                "{sampling},{},{metrics}",
                fmt_threshold(cell.encoding_threshold)
            );
        }
        out
    }

    pub fn summary(&self, label: &str) -> String {
        let cell = self.best_cell();
        let fitness = cell.finite_fitness().unwrap_or(f64::NAN);
        match cell.sampling_threshold {
            Some(st) => format!(
                "{label}: best sampling_threshold={} encoding_threshold={} fitness={}",
                fmt_threshold(st),
                fmt_threshold(cell.encoding_threshold),
                fmt_sig(fitness)
            ),
            None => format!(
                "{label}: best encoding_threshold={} fitness={}",
                fmt_threshold(cell.encoding_threshold),
                fmt_sig(fitness)
            ),
        }
    }
}

type Key = (f64, f64, f64);

fn better(candidate: Key, incumbent: Key) -> bool {
    // (fitness, encoding, sampling): higher fitness, then smaller encoding,
    // then smaller sampling threshold
    let (fc, ec, sc) = candidate;
    let (fi, ei, si) = incumbent;
    fc > fi || (fc == fi && (ec < ei || (ec == ei && sc < si)))
}

/// Index of the cell maximizing `score`, skipping cells where it is `None`.
fn argmax(
    cells: &[Vec<SweepCell>],
    score: impl Fn(usize, usize) -> Option<f64>,
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), Key)> = None;
    for (i, row) in cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let Some(f) = score(i, j) else { continue };
            let key = (
                f,
                cell.encoding_threshold,
                cell.sampling_threshold.unwrap_or(0.0),
            );
            if best.is_none_or(|(_, b)| better(key, b)) {
                best = Some(((i, j), key));
            }
        }
    }
    best.map(|(idx, _)| idx)
}

pub fn grid_sweep(
    signals: &[Vec<f64>],
    method: Method,
    adaptive: bool,
    sampling_axis: &[f64],
    encoding_axis: &[f64],
    params: FitnessParams,
) -> Result<SweepGrid, SweepError> {
    if signals.is_empty() {
        return Err(SweepError::EmptyDataset);
    }
    if encoding_axis.is_empty() || (adaptive && sampling_axis.is_empty()) {
        return Err(SweepError::EmptyAxis);
    }
    let rows: Vec<Option<f64>> = if adaptive {
        sampling_axis.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let coords: Vec<(Option<f64>, f64)> = rows
        .iter()
        .flat_map(|&s| encoding_axis.iter().map(move |&e| (s, e)))
        .collect();
    let flat: Vec<SweepCell> = coords
        .into_par_iter()
        .map(|(sampling_threshold, encoding_threshold)| {
            let config = match sampling_threshold {
                Some(st) => EncodingConfig::adaptive(method, st, encoding_threshold),
                None => EncodingConfig::conventional(method, encoding_threshold),
            };
            let outcome = config
                .map_err(|source| SweepError::Codec { index: 0, source })
                .and_then(|cfg| evaluate_dataset(signals, &cfg, params));
            SweepCell {
                sampling_threshold,
                encoding_threshold,
                outcome,
            }
        })
        .collect();
    let mut flat = flat.into_iter();
    let cells: Vec<Vec<SweepCell>> = rows
        .iter()
        .map(|_| flat.by_ref().take(encoding_axis.len()).collect())
        .collect();
    let best =
        argmax(&cells, |i, j| cells[i][j].finite_fitness()).ok_or(SweepError::NoFiniteCell)?;
    Ok(SweepGrid {
        method,
        sampling_axis: if adaptive {
            sampling_axis.to_vec()
        } else {
            Vec::new()
        },
        encoding_axis: encoding_axis.to_vec(),
        cells,
        best,
    })
}

/// Best cell for the mean of the X and Y fitness; both grids must share axes.
pub fn combined_best(x: &SweepGrid, y: &SweepGrid) -> Option<((usize, usize), f64)> {
    if x.sampling_axis != y.sampling_axis || x.encoding_axis != y.encoding_axis {
        return None;
    }
    let score = |i: usize, j: usize| {
        Some((x.cells[i][j].finite_fitness()? + y.cells[i][j].finite_fitness()?) / 2.0)
    };
    let idx = argmax(&x.cells, score)?;
    Some((idx, score(idx.0, idx.1)?))
}
