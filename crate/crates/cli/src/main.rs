//! `spikelens` command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use spikelens::dataset::{read_maybe_gzip, DatasetError};
use spikelens::pipeline::{
    build_cohort, decode_pair, encode_pair, evaluate_pair, image_signals, report_bundle,
    EncodedPair, NamedConfig, PairReport, SignalSource,
};
use spikelens::signal::{length_totals, SignalError};
use spikelens::sweep::{combined_best, default_axes, grid_sweep};
use spikelens::{
    canny, read_pgm, signals_to_image, write_pgm, CannyParams, CodecError, CoordSignalPair,
    EncodingConfig, FitnessParams, GrayImage, IdxDataset, Method, SpikeTrain,
};

const THREADS_ENV: &str = "SPIKELENS_THREADS";
const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "spikelens",
    version,
    about = "Edge-based temporal spike encoding of images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Canny edge detection and write the edge image as PGM.
    Edges(EdgesArgs),
    /// Extract X/Y coordinate signals as `index,x,y` CSV.
    Signals(SignalsArgs),
    /// Encode X/Y signals into spike-train documents.
    Encode(EncodeArgs),
    /// Decode spike-train documents back to signals.
    Decode(DecodeArgs),
    /// Score a reconstruction against the original signals.
    Metrics(MetricsArgs),
    /// Grid-search sampling and encoding thresholds over a dataset.
    Sweep(SweepArgs),
    /// Write per-digit encode/reconstruct reports for digits 0-9.
    Demo(DemoArgs),
    /// Edge-vs-raw signal length reduction over a dataset sample.
    ReduceStat(ReduceStatArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Binary PGM input image.
    #[arg(long, conflicts_with = "mnist")]
    image: Option<PathBuf>,
    /// IDX image file (optionally gzipped).
    #[arg(long)]
    mnist: Option<PathBuf>,
    /// Image index within the IDX file.
    #[arg(long, default_value_t = 0, requires = "mnist")]
    index: usize,
}

impl InputArgs {
    fn load(&self) -> Result<GrayImage> {
        match (&self.image, &self.mnist) {
            (Some(path), _) => {
                let bytes =
                    fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(read_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))?)
            }
            (None, Some(path)) => {
                let ds = load_dataset(path, None)?;
                Ok(ds.image(self.index)?.clone())
            }
            (None, None) => bail!(UsageError("one of --image or --mnist is required".into())),
        }
    }

    fn stem(&self) -> String {
        match &self.image {
            Some(p) => p
                .file_stem()
                .map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned()),
            None => format!("mnist_{}", self.index),
        }
    }
}

#[derive(Args, Clone, Copy)]
struct CannyArgs {
    /// Hysteresis low threshold (clamped 0-255 magnitude scale).
    #[arg(long, default_value_t = spikelens::edges::DEFAULT_LOW)]
    low: f64,
    /// Hysteresis high threshold.
    #[arg(long, default_value_t = spikelens::edges::DEFAULT_HIGH)]
    high: f64,
}

impl CannyArgs {
    fn params(self) -> CannyParams {
        CannyParams {
            low: self.low,
            high: self.high,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct SourceArgs {
    #[command(flatten)]
    canny: CannyArgs,
    /// Use all nonzero pixels instead of edge pixels.
    #[arg(long)]
    raw: bool,
}

impl SourceArgs {
    fn source(self) -> SignalSource {
        if self.raw {
            SignalSource::Raw
        } else {
            SignalSource::Edges(self.canny.params())
        }
    }
}

#[derive(Args, Clone, Copy)]
struct FitnessArgs {
    /// Exponent on RMSE in the fitness denominator.
    #[arg(long = "fitness-m", default_value_t = 1.0, value_parser = non_negative)]
    m: f64,
    /// Exponent on spike count in the fitness denominator.
    #[arg(long = "fitness-n", default_value_t = 1.0, value_parser = non_negative)]
    n: f64,
}

impl FitnessArgs {
    fn params(self) -> FitnessParams {
        FitnessParams {
            m: self.m,
            n: self.n,
        }
    }
}

#[derive(Args)]
struct EdgesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    canny: CannyArgs,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SignalsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    source: SourceArgs,
    /// Output CSV file (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct CodecArgs {
    /// Encoding method: sf or tbr.
    #[arg(long, default_value = "sf")]
    method: Method,
    /// Enable adaptive sampling before encoding.
    #[arg(long)]
    adaptive: bool,
    /// Adaptive sampling threshold [default: 0.1 for sf, 1.0 for tbr].
    #[arg(long, value_parser = positive)]
    sampling_threshold: Option<f64>,
    /// Encoding threshold [default: 0.2 for sf, 0.9 for tbr].
    #[arg(long, value_parser = positive)]
    encoding_threshold: Option<f64>,
}

impl CodecArgs {
    fn config(self) -> Result<EncodingConfig> {
        let (ds, de) = optimal_thresholds(self.method);
        let encoding = self.encoding_threshold.unwrap_or(de);
        Ok(if self.adaptive {
            EncodingConfig::adaptive(self.method, self.sampling_threshold.unwrap_or(ds), encoding)?
        } else {
            EncodingConfig::conventional(self.method, encoding)?
        })
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Encode an existing `index,x,y` signal CSV instead of an image.
    #[arg(long, conflicts_with_all = ["image", "mnist"])]
    signals: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    codec: CodecArgs,
    /// Output directory; receives signals.csv, x.json and y.json.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    /// X spike-train document.
    #[arg(long)]
    x: PathBuf,
    /// Y spike-train document.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 28)]
    width: usize,
    #[arg(long, default_value_t = 28)]
    height: usize,
    /// Output CSV file (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also rasterize the reconstruction to this PGM.
    #[arg(long)]
    image: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Original `index,x,y` signal CSV.
    #[arg(long)]
    signals: PathBuf,
    /// X spike-train document.
    #[arg(long)]
    x: PathBuf,
    /// Y spike-train document.
    #[arg(long)]
    y: PathBuf,
    #[command(flatten)]
    fitness: FitnessArgs,
    /// Output CSV file (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    /// IDX image file (optionally gzipped).
    #[arg(long)]
    mnist: PathBuf,
    /// IDX label file; enables per-digit stratified sampling.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Seed for dataset sampling.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Number of images to sample (split evenly across digits when labeled).
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value = "sf")]
    method: Method,
    /// Sweep the sampling threshold too (otherwise a 1×K conventional sweep).
    #[arg(long)]
    adaptive: bool,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    fitness: FitnessArgs,
    /// Output directory for the grid CSVs.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    canny: CannyArgs,
    #[command(flatten)]
    fitness: FitnessArgs,
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    sf_sampling: f64,
    #[arg(long, default_value_t = 0.2, value_parser = positive)]
    sf_encoding: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    tbr_sampling: f64,
    #[arg(long, default_value_t = 0.9, value_parser = positive)]
    tbr_encoding: f64,
    /// Output directory; one `digit_<d>` subdirectory per digit.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReduceStatArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[command(flatten)]
    canny: CannyArgs,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {v}"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a non-negative number, got {v}"))
    }
}

/// Thresholds that maximize fitness on MNIST edge signals.
fn optimal_thresholds(method: Method) -> (f64, f64) {
    match method {
        Method::Sf => (0.1, 0.2),
        Method::Tbr => (1.0, 0.9),
    }
}

fn load_dataset(images: &Path, labels: Option<&Path>) -> Result<IdxDataset> {
    let imgs = read_maybe_gzip(images).with_context(|| format!("reading {}", images.display()))?;
    let imgs = spikelens::dataset::parse_idx_images(&imgs)
        .with_context(|| format!("parsing {}", images.display()))?;
    let labels = match labels {
        Some(p) => {
            let raw = read_maybe_gzip(p).with_context(|| format!("reading {}", p.display()))?;
            Some(
                spikelens::dataset::parse_idx_labels(&raw)
                    .with_context(|| format!("parsing {}", p.display()))?,
            )
        }
        None => None,
    };
    Ok(IdxDataset::new(imgs, labels)?)
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_train(path: &Path) -> Result<SpikeTrain> {
    SpikeTrain::from_json(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_edges(args: EdgesArgs) -> Result<()> {
    let img = args.input.load()?;
    let edges = canny(&img, args.canny.params())?;
    if edges.is_blank() {
        eprintln!("warning: empty edge image");
    }
    let path = args.output.join(format!("{}_edges.pgm", args.input.stem()));
    write_file(&path, write_pgm(&edges.to_gray()))?;
    eprintln!("wrote {} ({} edge pixels)", path.display(), edges.count());
    Ok(())
}

fn cmd_signals(args: SignalsArgs) -> Result<()> {
    let img = args.input.load()?;
    let sig = image_signals(&img, args.source.source())?;
    emit(args.output.as_deref(), &sig.to_csv())
}

fn cmd_encode(args: EncodeArgs) -> Result<()> {
    let config = args.codec.config()?;
    let sig = match &args.signals {
        Some(path) => CoordSignalPair::from_csv(&read_text(path)?, 28, 28)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => image_signals(&args.input.load()?, args.source.source())?,
    };
    let pair = encode_pair(&sig, &config).context("encoding signals")?;
    write_file(&args.output.join("signals.csv"), sig.to_csv())?;
    write_file(&args.output.join("x.json"), pair.x.to_json())?;
    write_file(&args.output.join("y.json"), pair.y.to_json())?;
    eprintln!(
        "encoded {} samples: {} x spikes, {} y spikes",
        sig.len(),
        spikelens::metrics::spike_count(&pair.x),
        spikelens::metrics::spike_count(&pair.y)
    );
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<()> {
    let pair = EncodedPair {
        x: read_train(&args.x)?,
        y: read_train(&args.y)?,
    };
    let recon = decode_pair(&pair, args.width, args.height)?;
    if let Some(path) = &args.image {
        write_file(path, write_pgm(&signals_to_image(&recon)))?;
    }
    emit(args.output.as_deref(), &recon.to_csv())
}

/// CSV with an `axis` column ahead of the metric columns.
fn metrics_table(report: &PairReport) -> String {
    format!(
        "axis,{}\nx,{}\ny,{}\n",
        spikelens::metrics::CSV_HEADER,
        report.x.csv_row(),
        report.y.csv_row()
    )
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let pair = EncodedPair {
        x: read_train(&args.x)?,
        y: read_train(&args.y)?,
    };
    let original = CoordSignalPair::from_csv(&read_text(&args.signals)?, 28, 28)
        .with_context(|| format!("parsing {}", args.signals.display()))?;
    let recon = decode_pair(&pair, 28, 28)?;
    let report = evaluate_pair(&original, &recon, &pair, args.fitness.params())?;
    emit(args.output.as_deref(), &metrics_table(&report))
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let ds = load_dataset(&args.dataset.mnist, args.dataset.labels.as_deref())?;
    let indices = ds.stratified_sample(args.samples as usize, args.dataset.seed);
    let cohort = build_cohort(&ds, &indices, args.source.source())?;
    if !cohort.skipped.is_empty() {
        eprintln!(
            "warning: skipped {} images with fewer than 2 signal samples",
            cohort.skipped.len()
        );
    }
    let (sampling, encoding) = default_axes();
    let params = args.fitness.params();
    let mode = if args.adaptive {
        "adaptive"
    } else {
        "conventional"
    };
    let gx = grid_sweep(
        &cohort.x,
        args.method,
        args.adaptive,
        &sampling,
        &encoding,
        params,
    )
    .context("sweeping x signals")?;
    let gy = grid_sweep(
        &cohort.y,
        args.method,
        args.adaptive,
        &sampling,
        &encoding,
        params,
    )
    .context("sweeping y signals")?;
    let stem = format!("{}_{mode}", args.method);
    write_file(&args.output.join(format!("{stem}_x.csv")), gx.to_csv())?;
    write_file(&args.output.join(format!("{stem}_y.csv")), gy.to_csv())?;
    println!("{}", gx.summary(&format!("{stem} x")));
    println!("{}", gy.summary(&format!("{stem} y")));
    if let Some(((i, j), f)) = combined_best(&gx, &gy) {
        let cell = &gx.cells[i][j];
        let sampling = cell
            .sampling_threshold
            .map(|s| {
                format!(
                    "sampling_threshold={} ",
                    spikelens::format::fmt_threshold(s)
                )
            })
            .unwrap_or_default();
        println!(
            "{stem} combined: best {sampling}encoding_threshold={} fitness={}",
            spikelens::format::fmt_threshold(cell.encoding_threshold),
            spikelens::format::fmt_sig(f)
        );
    }
    Ok(())
}

fn cmd_demo(args: DemoArgs) -> Result<()> {
    let ds = load_dataset(&args.dataset.mnist, args.dataset.labels.as_deref())?;
    let picks = ds.one_per_digit(args.dataset.seed)?;
    let configs = [
        NamedConfig {
            label: "sf".into(),
            config: EncodingConfig::adaptive(Method::Sf, args.sf_sampling, args.sf_encoding)?,
        },
        NamedConfig {
            label: "tbr".into(),
            config: EncodingConfig::adaptive(Method::Tbr, args.tbr_sampling, args.tbr_encoding)?,
        },
    ];
    let mut summary = format!(
        "digit,index,method,axis,{}\n",
        spikelens::metrics::CSV_HEADER
    );
    for (digit, index) in picks {
        let bundle = report_bundle(
            ds.image(index)?,
            args.canny.params(),
            &configs,
            args.fitness.params(),
        )
        .with_context(|| format!("digit {digit} (image {index})"))?;
        let dir = args.output.join(format!("digit_{digit}"));
        for (name, bytes) in &bundle.files {
            write_file(&dir.join(name), bytes)?;
        }
        for (label, report) in &bundle.metrics {
            for (axis, r) in [("x", &report.x), ("y", &report.y)] {
                summary.push_str(&format!("{digit},{index},{label},{axis},{}\n", r.csv_row()));
            }
        }
    }
    write_file(&args.output.join("summary.csv"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_reduce_stat(args: ReduceStatArgs) -> Result<()> {
    let ds = load_dataset(&args.dataset.mnist, args.dataset.labels.as_deref())?;
    let indices = ds.stratified_sample(args.samples as usize, args.dataset.seed);
    let images: Vec<&GrayImage> = indices
        .iter()
        .map(|&i| ds.image(i))
        .collect::<Result<_, _>>()?;
    let totals = length_totals(images, args.canny.params())?;
    let reduction = totals.reduction()?;
    println!("samples,raw_length,edge_length,reduction");
    println!(
        "{},{},{},{}",
        indices.len(),
        totals.raw,
        totals.edge,
        spikelens::format::fmt_sig(reduction)
    );
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| UsageError(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Edges(a) => cmd_edges(a),
        Command::Signals(a) => cmd_signals(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Demo(a) => cmd_demo(a),
        Command::ReduceStat(a) => cmd_reduce_stat(a),
    }
}

/// Input problems (missing or malformed files, bad flags) exit with 2,
/// everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    let input_error = err.chain().any(|e| {
        e.is::<std::io::Error>()
            || e.is::<UsageError>()
            || e.is::<DatasetError>()
            || e.is::<SignalError>()
            || matches!(
                e.downcast_ref::<CodecError>(),
                Some(CodecError::Document(_) | CodecError::InvalidSpike(_))
            )
    });
    if input_error {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
