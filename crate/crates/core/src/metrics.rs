//! Reconstruction precision (RMSE, SNR) and spike-train efficiency (AFR,
//! spike count), combined into a fitness score.

use thiserror::Error;

use crate::codec::SpikeTrain;
use crate::format::fmt_sig;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricsError {
    #[error("signal lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("signal is empty")]
    EmptySignal,
    #[error("original signal has zero power")]
    ZeroSignalPower,
    #[error("spike train is empty")]
    EmptyTrain,
    #[error("fitness undefined: snr {snr} over a zero denominator")]
    UndefinedFitness { snr: f64 },
}

pub const CSV_HEADER: &str = "rmse,snr_db,afr,spike_count,fitness";

/// Exponents of the generalized fitness `snr / (rmse^m · count^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessParams {
    pub m: f64,
    pub n: f64,
}

impl Default for FitnessParams {
    fn default() -> Self {
        Self { m: 1.0, n: 1.0 }
    }
}

fn check_pair(s: &[f64], r: &[f64]) -> Result<(), MetricsError> {
    if s.len() != r.len() {
        return Err(MetricsError::LengthMismatch(s.len(), r.len()));
    }
    if s.is_empty() {
        return Err(MetricsError::EmptySignal);
    }
    Ok(())
}

/// Mean of `|v|²`.
pub fn power(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len();
    v.map(|x| x * x).sum::<f64>() / n as f64
}

pub fn rmse(s: &[f64], r: &[f64]) -> Result<f64, MetricsError> {
    check_pair(s, r)?;
    Ok(power(s.iter().zip(r).map(|(a, b)| a - b)).sqrt())
}

/// `20 · log10(P(s) / P(s − r))` in dB; `+inf` for an exact reconstruction.
pub fn snr(s: &[f64], r: &[f64]) -> Result<f64, MetricsError> {
    check_pair(s, r)?;
    let signal = power(s.iter().copied());
    if signal == 0.0 {
        return Err(MetricsError::ZeroSignalPower);
    }
    let noise = power(s.iter().zip(r).map(|(a, b)| a - b));
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (signal / noise).log10())
}

pub fn spike_count(train: &SpikeTrain) -> usize {
    train.spikes().iter().filter(|&&s| s != 0).count()
}

/// Average firing rate: `Σ|sp_t| / N`.
pub fn afr(train: &SpikeTrain) -> Result<f64, MetricsError> {
    if train.is_empty() {
        return Err(MetricsError::EmptyTrain);
    }
    let active: u64 = train
        .spikes()
        .iter()
        .map(|s| u64::from(s.unsigned_abs()))
        .sum();
    Ok(active as f64 / train.len() as f64)
}

/// `snr / (rmse^m · count^n)`. A zero denominator yields `+inf` for a
/// positive finite SNR and is undefined otherwise.
pub fn fitness(
    snr_db: f64,
    rmse: f64,
    spike_count: f64,
    params: FitnessParams,
) -> Result<f64, MetricsError> {
    let denom = rmse.powf(params.m) * spike_count.powf(params.n);
    if snr_db.is_nan() {
        return Err(MetricsError::UndefinedFitness { snr: snr_db });
    }
    if denom == 0.0 {
        return if snr_db > 0.0 && snr_db.is_finite() {
            Ok(f64::INFINITY)
        } else {
            Err(MetricsError::UndefinedFitness { snr: snr_db })
        };
    }
    Ok(snr_db / denom)
}

/// All metrics for one original/reconstructed pair and its spike train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub rmse: f64,
    pub snr_db: f64,
    pub afr: f64,
    pub spike_count: usize,
    /// `None` when the fitness is undefined (e.g. perfect reconstruction).
    pub fitness: Option<f64>,
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_sig(self.rmse),
            fmt_sig(self.snr_db),
            fmt_sig(self.afr),
            self.spike_count,
            fmt_sig(self.fitness.unwrap_or(f64::NAN))
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }
}

/// Metrics on the original-length pair `(s, r)`; spike metrics on the full
/// (possibly densified) train.
pub fn evaluate(
    s: &[f64],
    r: &[f64],
    train: &SpikeTrain,
    params: FitnessParams,
) -> Result<MetricsReport, MetricsError> {
    let rmse = rmse(s, r)?;
    let snr_db = snr(s, r)?;
    let afr = afr(train)?;
    let spike_count = spike_count(train);
    Ok(MetricsReport {
        rmse,
        snr_db,
        afr,
        spike_count,
        fitness: fitness(snr_db, rmse, spike_count as f64, params).ok(),
    })
}

/// Sum with a fixed pairwise reduction tree, independent of scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Metrics averaged over a set of signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateReport {
    pub samples: usize,
    pub rmse: f64,
    pub snr_db: f64,
    pub afr: f64,
    pub spike_count: f64,
    /// Mean of per-signal fitness; `None` if any signal's fitness is undefined.
    pub fitness: Option<f64>,
    /// Fitness recomputed from the averaged metrics.
    pub fitness_of_means: Option<f64>,
}

impl AggregateReport {
    pub fn from_reports(reports: &[MetricsReport], params: FitnessParams) -> Option<Self> {
        if reports.is_empty() {
            return None;
        }
        let col = |f: fn(&MetricsReport) -> f64| -> Vec<f64> { reports.iter().map(f).collect() };
        let rmse = mean(&col(|r| r.rmse));
        let snr_db = mean(&col(|r| r.snr_db));
        let afr = mean(&col(|r| r.afr));
        let spike_count = mean(&col(|r| r.spike_count as f64));
        let per_signal = reports
            .iter()
            .map(|r| r.fitness)
            .collect::<Option<Vec<f64>>>()
            .map(|v| mean(&v));
        Some(Self {
            samples: reports.len(),
            rmse,
            snr_db,
            afr,
            spike_count,
            fitness: per_signal,
            fitness_of_means: fitness(snr_db, rmse, spike_count, params).ok(),
        })
    }

    /// Fitness usable for argmax: defined and finite.
    pub fn finite_fitness(&self) -> Option<f64> {
        self.fitness.filter(|f| f.is_finite())
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_sig(self.rmse),
            fmt_sig(self.snr_db),
            fmt_sig(self.afr),
            fmt_sig(self.spike_count),
            fmt_sig(self.fitness.unwrap_or(f64::NAN))
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{EncodingConfig, Method};

    fn train(spikes: &[i8]) -> SpikeTrain {
        SpikeTrain::new(
            spikes.to_vec(),
            0.0,
            EncodingConfig::conventional(Method::Sf, 1.0).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[3.0, 0.0, 0.0, 0.0], &[0.0; 4]).unwrap(), 1.5);
        assert_eq!(rmse(&[1.0], &[]), Err(MetricsError::LengthMismatch(1, 0)));
        assert_eq!(rmse(&[], &[]), Err(MetricsError::EmptySignal));
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(snr(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), f64::INFINITY);
        let v = snr(&[2.0, 2.0], &[1.0, 1.0]).unwrap();
        assert!((v - 12.041199826559248).abs() < 1e-6);
        assert_eq!(
            snr(&[0.0, 0.0], &[1.0, 0.0]),
            Err(MetricsError::ZeroSignalPower)
        );
    }

    #[test]
    fn afr_and_count() {
        assert_eq!(afr(&train(&[0, 0, 0])).unwrap(), 0.0);
        assert_eq!(afr(&train(&[1, -1, 1, -1])).unwrap(), 1.0);
        assert_eq!(afr(&train(&[1, 0, 0, 0])).unwrap(), 0.25);
        assert_eq!(afr(&train(&[])), Err(MetricsError::EmptyTrain));
        assert_eq!(spike_count(&train(&[0, 0])), 0);
        assert_eq!(spike_count(&train(&[1, -1, 0, 1])), 3);
    }

    #[test]
    fn fitness_examples() {
        let p = FitnessParams::default();
        assert_eq!(fitness(50.0, 0.5, 100.0, p).unwrap(), 1.0);
        let f = fitness(84.33, 0.12, 1538.7, p).unwrap();
        assert!((0.45..=0.47).contains(&f));
        let flat = FitnessParams { m: 0.0, n: 0.0 };
        assert_eq!(fitness(31.5, 0.2, 7.0, flat).unwrap(), 31.5);
        assert_eq!(fitness(10.0, 0.0, 5.0, p).unwrap(), f64::INFINITY);
        assert_eq!(fitness(10.0, 1.0, 0.0, p).unwrap(), f64::INFINITY);
        assert!(matches!(
            fitness(f64::INFINITY, 0.0, 3.0, p),
            Err(MetricsError::UndefinedFitness { .. })
        ));
        assert!(matches!(
            fitness(-3.0, 1.0, 0.0, p),
            Err(MetricsError::UndefinedFitness { .. })
        ));
    }

    #[test]
    fn perfect_silent_reconstruction() {
        let s = [4.0, 4.0, 4.0];
        let rep = evaluate(&s, &s, &train(&[0, 0, 0]), FitnessParams::default()).unwrap();
        assert_eq!(rep.rmse, 0.0);
        assert_eq!(rep.afr, 0.0);
        assert_eq!(rep.snr_db, f64::INFINITY);
        assert_eq!(rep.fitness, None);
        assert_eq!(rep.csv_row(), "0,inf,0,0,nan");
    }

    #[test]
    fn aggregate_means() {
        let a = MetricsReport {
            rmse: 1.0,
            snr_db: 10.0,
            afr: 0.5,
            spike_count: 4,
            fitness: Some(2.5),
        };
        let b = MetricsReport {
            rmse: 3.0,
            snr_db: 20.0,
            afr: 0.25,
            spike_count: 2,
            fitness: Some(20.0 / 6.0),
        };
        let agg = AggregateReport::from_reports(&[a, b], FitnessParams::default()).unwrap();
        assert_eq!(agg.rmse, 2.0);
        assert_eq!(agg.spike_count, 3.0);
        assert!((agg.fitness.unwrap() - (2.5 + 20.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!((agg.fitness_of_means.unwrap() - 15.0 / 6.0).abs() < 1e-12);

        let c = MetricsReport { fitness: None, ..a };
        let agg = AggregateReport::from_reports(&[a, c], FitnessParams::default()).unwrap();
        assert_eq!(agg.fitness, None);
        assert!(AggregateReport::from_reports(&[], FitnessParams::default()).is_none());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=101).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5151.0);
    }
}
