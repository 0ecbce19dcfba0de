//! End-to-end compositions: image → signals → spikes → reconstruction.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::codec::{decode, encode, EncodingConfig, SpikeTrain};
use crate::dataset::{write_pgm, GrayImage, IdxDataset};
use crate::edges::{canny, CannyParams};
use crate::format::fmt_sig;
use crate::metrics::{evaluate, FitnessParams, MetricsReport, CSV_HEADER};
use crate::signal::{extract_coordinates, signals_to_image, CoordSignalPair};
use crate::Error;

/// Which pixels feed coordinate extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalSource {
    /// Canny edge pixels.
    Edges(CannyParams),
    /// Every nonzero pixel of the original image.
    Raw,
}

pub fn image_signals(img: &GrayImage, source: SignalSource) -> Result<CoordSignalPair, Error> {
    Ok(match source {
        SignalSource::Edges(params) => extract_coordinates(&canny(img, params)?),
        SignalSource::Raw => extract_coordinates(img),
    })
}

/// X and Y signals for a set of dataset images. Images whose signals have
/// fewer than two samples cannot be encoded and are listed in `skipped`.
#[derive(Debug, Clone, Default)]
pub struct Cohort {
    pub indices: Vec<usize>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub skipped: Vec<usize>,
}

pub fn build_cohort(
    dataset: &IdxDataset,
    indices: &[usize],
    source: SignalSource,
) -> Result<Cohort, Error> {
    let signals: Vec<(usize, CoordSignalPair)> = indices
        .par_iter()
        .map(|&i| Ok((i, image_signals(dataset.image(i)?, source)?)))
        .collect::<Result<_, Error>>()?;
    let mut cohort = Cohort::default();
    for (i, sig) in signals {
        if sig.len() < 2 {
            cohort.skipped.push(i);
            continue;
        }
        cohort.indices.push(i);
        cohort.x.push(sig.x);
        cohort.y.push(sig.y);
    }
    Ok(cohort)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPair {
    pub x: SpikeTrain,
    pub y: SpikeTrain,
}

pub fn encode_pair(sig: &CoordSignalPair, config: &EncodingConfig) -> Result<EncodedPair, Error> {
    Ok(EncodedPair {
        x: encode(&sig.x, config)?,
        y: encode(&sig.y, config)?,
    })
}

pub fn decode_pair(
    pair: &EncodedPair,
    width: usize,
    height: usize,
) -> Result<CoordSignalPair, Error> {
    Ok(CoordSignalPair::new(
        decode(&pair.x)?,
        decode(&pair.y)?,
        width,
        height,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairReport {
    pub x: MetricsReport,
    pub y: MetricsReport,
}

pub fn evaluate_pair(
    original: &CoordSignalPair,
    recon: &CoordSignalPair,
    pair: &EncodedPair,
    params: FitnessParams,
) -> Result<PairReport, Error> {
    Ok(PairReport {
        x: evaluate(&original.x, &recon.x, &pair.x, params)?,
        y: evaluate(&original.y, &recon.y, &pair.y, params)?,
    })
}

/// CSV of original and reconstructed signals side by side.
pub fn reconstruction_csv(original: &CoordSignalPair, recon: &CoordSignalPair) -> String {
    let mut out = String::from("index,x,y,x_recon,y_recon\n");
    for i in 0..original.len() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            fmt_sig(original.x[i]),
            fmt_sig(original.y[i]),
            fmt_sig(recon.x[i]),
            fmt_sig(recon.y[i])
        );
    }
    out
}

/// A named codec configuration used in demo bundles, e.g. `("sf", cfg)`.
#[derive(Debug, Clone)]
pub struct NamedConfig {
    pub label: String,
    pub config: EncodingConfig,
}

/// Every file of one digit's report, as (relative name, contents).
#[derive(Debug, Clone, Default)]
pub struct ReportBundle {
    pub files: Vec<(String, Vec<u8>)>,
    pub metrics: Vec<(String, PairReport)>,
}

impl ReportBundle {
    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }
}

/// Original and edge images, the signals, and for every configuration its
/// spike documents, reconstructed signals and image, and metrics.
pub fn report_bundle(
    img: &GrayImage,
    canny_params: CannyParams,
    configs: &[NamedConfig],
    fitness: FitnessParams,
) -> Result<ReportBundle, Error> {
    let edges = canny(img, canny_params)?;
    let signals = extract_coordinates(&edges);
    let mut bundle = ReportBundle::default();
    bundle.files.push(("original.pgm".into(), write_pgm(img)));
    bundle
        .files
        .push(("edges.pgm".into(), write_pgm(&edges.to_gray())));
    bundle
        .files
        .push(("signals.csv".into(), signals.to_csv().into_bytes()));

    let mut metrics_csv = format!("method,axis,{CSV_HEADER}\n");
    for NamedConfig { label, config } in configs {
        let pair = encode_pair(&signals, config)?;
        let recon = decode_pair(&pair, img.width(), img.height())?;
        let report = evaluate_pair(&signals, &recon, &pair, fitness)?;
        bundle
            .files
            .push((format!("{label}_x.json"), pair.x.to_json().into_bytes()));
        bundle
            .files
            .push((format!("{label}_y.json"), pair.y.to_json().into_bytes()));
        bundle.files.push((
            format!("{label}_recon.csv"),
            reconstruction_csv(&signals, &recon).into_bytes(),
        ));
        bundle.files.push((
            format!("{label}_recon.pgm"),
            write_pgm(&signals_to_image(&recon)),
        ));
        let _ = writeln!(metrics_csv, "{label},x,{}", report.x.csv_row());
        let _ = writeln!(metrics_csv, "{label},y,{}", report.y.csv_row());
        bundle.metrics.push((label.clone(), report));
    }
    bundle
        .files
        .push(("metrics.csv".into(), metrics_csv.into_bytes()));
    Ok(bundle)
}
