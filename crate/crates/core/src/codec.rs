//! Temporal spike codecs.
//!
//! Two encoders turn a real-valued signal into a ternary spike train:
//!
//! * **step-forward (SF)** tracks a running baseline and emits `±1` whenever
//!   the signal leaves the band `baseline ± threshold`, moving the baseline
//!   by one threshold;
//! * **threshold-based representation (TBR)** emits `±1` wherever the
//!   one-step forward difference exceeds `±threshold`.
//!
//! Both decode with the same integrator: start at the stored start point
//! and add `threshold · spike` per step.
//!
//! Optional adaptive sampling densifies the signal before encoding. Every
//! interval `[s[i], s[i+1]]` is split into `ceil(|Δ| / sampling_threshold)`
//! linear steps, so fast changes get more samples. The per-interval counts
//! travel with the spike train so the decoder can pick the reconstructed
//! samples that line up with the original time grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CodecError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("signal has {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },
    #[error("threshold must be positive and finite, got {0}")]
    NonPositiveThreshold(f64),
    #[error("sum(counts) + 1 = {expected} does not match {found} spikes")]
    CountMismatch { expected: usize, found: usize },
    #[error("spike value {0} is not one of -1, 0, 1")]
    InvalidSpike(i64),
    #[error("adaptive flag does not match presence of counts")]
    AdaptiveCountsMismatch,
    #[error("adaptive config requires a sampling threshold")]
    MissingSamplingThreshold,
    #[error("invalid spike document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sf,
    Tbr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sf => "sf",
            Method::Tbr => "tbr",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sf" => Ok(Method::Sf),
            "tbr" => Ok(Method::Tbr),
            other => Err(format!("unknown method `{other}` (expected sf or tbr)")),
        }
    }
}

fn check_threshold(t: f64) -> Result<f64, CodecError> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(CodecError::NonPositiveThreshold(t))
    }
}

/// Codec selection. `sampling_threshold` is `Some` exactly when adaptive
/// sampling is enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingConfig {
    pub method: Method,
    pub sampling_threshold: Option<f64>,
    pub encoding_threshold: f64,
}

impl EncodingConfig {
    pub fn conventional(method: Method, encoding_threshold: f64) -> Result<Self, CodecError> {
        Ok(Self {
            method,
            sampling_threshold: None,
            encoding_threshold: check_threshold(encoding_threshold)?,
        })
    }

    pub fn adaptive(
        method: Method,
        sampling_threshold: f64,
        encoding_threshold: f64,
    ) -> Result<Self, CodecError> {
        Ok(Self {
            method,
            sampling_threshold: Some(check_threshold(sampling_threshold)?),
            encoding_threshold: check_threshold(encoding_threshold)?,
        })
    }

    pub fn is_adaptive(&self) -> bool {
        self.sampling_threshold.is_some()
    }

    fn validate(&self) -> Result<(), CodecError> {
        check_threshold(self.encoding_threshold)?;
        if let Some(t) = self.sampling_threshold {
            check_threshold(t)?;
        }
        Ok(())
    }
}

/// A linearly densified signal plus the number of samples emitted per
/// original interval.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveSample {
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
    pub original_length: usize,
}

pub fn adaptive_resample(s: &[f64], sampling_threshold: f64) -> Result<AdaptiveSample, CodecError> {
    if s.len() < 2 {
        return Err(CodecError::SignalTooShort {
            len: s.len(),
            min: 2,
        });
    }
    let thr = check_threshold(sampling_threshold)?;
    let counts: Vec<usize> = s
        .windows(2)
        .map(|w| ((w[1] - w[0]) / thr).abs().ceil() as usize)
        .collect();
    let mut values = Vec::with_capacity(counts.iter().sum::<usize>() + 1);
    for (w, &count) in s.windows(2).zip(&counts) {
        let step = w[1] - w[0];
        for j in 0..count {
            values.push(w[0] + j as f64 / count as f64 * step);
        }
    }
    values.push(s[s.len() - 1]);
    Ok(AdaptiveSample {
        values,
        counts,
        original_length: s.len(),
    })
}

/// An immutable ternary spike train together with everything needed to
/// decode it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpikeDocument", into = "SpikeDocument")]
pub struct SpikeTrain {
    spikes: Vec<i8>,
    startpoint: f64,
    config: EncodingConfig,
    counts: Option<Vec<usize>>,
}

impl SpikeTrain {
    pub fn new(
        spikes: Vec<i8>,
        startpoint: f64,
        config: EncodingConfig,
        counts: Option<Vec<usize>>,
    ) -> Result<Self, CodecError> {
        config.validate()?;
        if let Some(&bad) = spikes.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(CodecError::InvalidSpike(bad.into()));
        }
        if config.is_adaptive() != counts.is_some() {
            return Err(CodecError::AdaptiveCountsMismatch);
        }
        Ok(Self {
            spikes,
            startpoint,
            config,
            counts,
        })
    }

    pub fn spikes(&self) -> &[i8] {
        &self.spikes
    }

    pub fn startpoint(&self) -> f64 {
        self.startpoint
    }

    pub fn config(&self) -> &EncodingConfig {
        &self.config
    }

    pub fn counts(&self) -> Option<&[usize]> {
        self.counts.as_deref()
    }

    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Compact JSON document, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("spike train serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        let doc: SpikeDocument =
            serde_json::from_str(text).map_err(|e| CodecError::Document(e.to_string()))?;
        doc.try_into()
    }
}

/// On-disk form of a [`SpikeTrain`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpikeDocument {
    method: Method,
    adaptive: bool,
    sampling_threshold: Option<f64>,
    encoding_threshold: f64,
    startpoint: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<usize>>,
    spikes: Vec<i64>,
}

impl TryFrom<SpikeDocument> for SpikeTrain {
    type Error = CodecError;

    fn try_from(doc: SpikeDocument) -> Result<Self, Self::Error> {
        let sampling_threshold = match (doc.adaptive, doc.sampling_threshold) {
            (true, None) => return Err(CodecError::MissingSamplingThreshold),
            (true, Some(t)) => Some(t),
            (false, _) => None,
        };
        let spikes = doc
            .spikes
            .into_iter()
            .map(|s| match s {
                -1..=1 => Ok(s as i8),
                _ => Err(CodecError::InvalidSpike(s)),
            })
            .collect::<Result<_, _>>()?;
        let config = EncodingConfig {
            method: doc.method,
            sampling_threshold,
            encoding_threshold: doc.encoding_threshold,
        };
        SpikeTrain::new(spikes, doc.startpoint, config, doc.counts)
    }
}

impl From<SpikeTrain> for SpikeDocument {
    fn from(t: SpikeTrain) -> Self {
        Self {
            method: t.config.method,
            adaptive: t.config.is_adaptive(),
            sampling_threshold: t.config.sampling_threshold,
            encoding_threshold: t.config.encoding_threshold,
            startpoint: t.startpoint,
            counts: t.counts,
            spikes: t.spikes.into_iter().map(i64::from).collect(),
        }
    }
}

fn sf_spikes(s: &[f64], thr: f64) -> Vec<i8> {
    let mut out = vec![0i8; s.len()];
    let mut base = s[0];
    for t in 1..s.len() {
        if s[t] > base + thr {
            out[t] = 1;
            base += thr;
        } else if s[t] < base - thr {
            out[t] = -1;
            base -= thr;
        }
    }
    out
}

// A single-sample input has no difference to threshold and yields one
// silent step.
fn tbr_spikes(s: &[f64], thr: f64) -> Vec<i8> {
    let n = s.len();
    if n < 2 {
        return vec![0; n];
    }
    let mut diff: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    diff.push(diff[n - 2]);
    diff.iter()
        .map(|&d| {
            if d > thr {
                1
            } else if d < -thr {
                -1
            } else {
                0
            }
        })
        .collect()
}

pub fn sf_encode(s: &[f64], encoding_threshold: f64) -> Result<SpikeTrain, CodecError> {
    let config = EncodingConfig::conventional(Method::Sf, encoding_threshold)?;
    if s.is_empty() {
        return Err(CodecError::EmptySignal);
    }
    SpikeTrain::new(sf_spikes(s, encoding_threshold), s[0], config, None)
}

pub fn tbr_encode(s: &[f64], encoding_threshold: f64) -> Result<SpikeTrain, CodecError> {
    let config = EncodingConfig::conventional(Method::Tbr, encoding_threshold)?;
    if s.len() < 2 {
        return Err(CodecError::SignalTooShort {
            len: s.len(),
            min: 2,
        });
    }
    SpikeTrain::new(tbr_spikes(s, encoding_threshold), s[0], config, None)
}

/// Integrates spikes from `startpoint` in steps of `threshold`. `spikes[0]`
/// is never read.
pub fn integrate_spikes(spikes: &[i8], threshold: f64, startpoint: f64) -> Vec<f64> {
    let mut recon = Vec::with_capacity(spikes.len());
    if spikes.is_empty() {
        return recon;
    }
    let mut level = startpoint;
    recon.push(level);
    for &sp in &spikes[1..] {
        match sp {
            1 => level += threshold,
            -1 => level -= threshold,
            _ => {}
        }
        recon.push(level);
    }
    recon
}

pub fn temporal_decode(train: &SpikeTrain) -> Vec<f64> {
    integrate_spikes(
        &train.spikes,
        train.config.encoding_threshold,
        train.startpoint,
    )
}

/// Picks the densified reconstruction back onto the original time grid: the
/// sample at the start of every interval, then the final sample.
pub fn collapse_adaptive(recon_a: &[f64], counts: &[usize]) -> Result<Vec<f64>, CodecError> {
    let expected = counts.iter().sum::<usize>() + 1;
    if expected != recon_a.len() {
        return Err(CodecError::CountMismatch {
            expected,
            found: recon_a.len(),
        });
    }
    let mut out = Vec::with_capacity(counts.len() + 1);
    let mut m = 0;
    for &c in counts {
        out.push(recon_a[m]);
        m += c;
    }
    out.push(recon_a[recon_a.len() - 1]);
    Ok(out)
}

pub fn adaptive_decode(train: &SpikeTrain) -> Result<Vec<f64>, CodecError> {
    let counts = train.counts().ok_or(CodecError::AdaptiveCountsMismatch)?;
    collapse_adaptive(&temporal_decode(train), counts)
}

/// Resamples (when adaptive) and encodes with the configured method.
pub fn encode(s: &[f64], config: &EncodingConfig) -> Result<SpikeTrain, CodecError> {
    config.validate()?;
    if s.len() < 2 {
        return Err(CodecError::SignalTooShort {
            len: s.len(),
            min: 2,
        });
    }
    let thr = config.encoding_threshold;
    let (values, counts) = match config.sampling_threshold {
        Some(st) => {
            let a = adaptive_resample(s, st)?;
            (a.values, Some(a.counts))
        }
        None => (s.to_vec(), None),
    };
    let spikes = match config.method {
        Method::Sf => sf_spikes(&values, thr),
        Method::Tbr => tbr_spikes(&values, thr),
    };
    SpikeTrain::new(spikes, values[0], *config, counts)
}

/// Inverse of [`encode`]; output has the original signal length.
pub fn decode(train: &SpikeTrain) -> Result<Vec<f64>, CodecError> {
    match train.counts() {
        Some(_) => adaptive_decode(train),
        None => Ok(temporal_decode(train)),
    }
}
