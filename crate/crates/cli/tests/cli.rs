use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spikelens::metrics::FitnessParams;
use spikelens::pipeline::{decode_pair, encode_pair, evaluate_pair, image_signals, SignalSource};
use spikelens::{write_pgm, CannyParams, EncodingConfig, GrayImage, Method, SpikeTrain};

fn spikelens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikelens"))
        .args(args)
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mnist() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist/images-idx3-ubyte.gz")
}

fn square() -> GrayImage {
    GrayImage::from_fn(28, 28, |r, c| {
        if (6..22).contains(&r) && (9..19).contains(&c) {
            200
        } else {
            0
        }
    })
}

#[test]
fn missing_input_exits_with_2() {
    let out = spikelens(&["edges", "--image", "/no/such/file.pgm", "-o", "/tmp"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/no/such/file.pgm"), "{err}");
}

#[test]
fn zero_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = spikelens(&[
        "encode",
        "--mnist",
        arg(&mnist()),
        "--encoding-threshold",
        "0",
        "-o",
        arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("encoding-threshold"));
}

#[test]
fn blank_image_warns_but_writes() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("blank.pgm");
    std::fs::write(&img, write_pgm(&GrayImage::new(28, 28))).unwrap();
    let out = spikelens(&["edges", "--image", arg(&img), "-o", arg(dir.path())]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty edge image"));
    let written = std::fs::read(dir.path().join("blank_edges.pgm")).unwrap();
    assert_eq!(written, write_pgm(&GrayImage::new(28, 28)));
}

#[test]
fn signals_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("sq.pgm");
    std::fs::write(&img, write_pgm(&square())).unwrap();
    let out = spikelens(&["signals", "--image", arg(&img)]);
    assert!(out.status.success());
    let expected = image_signals(&square(), SignalSource::Edges(CannyParams::default())).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected.to_csv());
    let raw = spikelens(&["signals", "--image", arg(&img), "--raw"]);
    assert_eq!(
        String::from_utf8(raw.stdout).unwrap().lines().count(),
        square().count_nonzero() + 1
    );
}

#[test]
fn encode_decode_metrics_agree_with_library() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("sq.pgm");
    std::fs::write(&img, write_pgm(&square())).unwrap();
    let enc = dir.path().join("enc");
    let out = spikelens(&[
        "encode",
        "--image",
        arg(&img),
        "--method",
        "tbr",
        "--adaptive",
        "--sampling-threshold",
        "0.5",
        "--encoding-threshold",
        "0.3",
        "-o",
        arg(&enc),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let sig = image_signals(&square(), SignalSource::Edges(CannyParams::default())).unwrap();
    let cfg = EncodingConfig::adaptive(Method::Tbr, 0.5, 0.3).unwrap();
    let pair = encode_pair(&sig, &cfg).unwrap();
    let x = std::fs::read_to_string(enc.join("x.json")).unwrap();
    assert_eq!(SpikeTrain::from_json(&x).unwrap(), pair.x);

    let recon = decode_pair(&pair, 28, 28).unwrap();
    let out = spikelens(&[
        "decode",
        "--x",
        arg(&enc.join("x.json")),
        "--y",
        arg(&enc.join("y.json")),
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), recon.to_csv());

    let out = spikelens(&[
        "metrics",
        "--signals",
        arg(&enc.join("signals.csv")),
        "--x",
        arg(&enc.join("x.json")),
        "--y",
        arg(&enc.join("y.json")),
    ]);
    let report = evaluate_pair(&sig, &recon, &pair, FitnessParams::default()).unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], format!("x,{}", report.x.csv_row()));
    assert_eq!(lines[2], format!("y,{}", report.y.csv_row()));
}

#[test]
fn corrupt_spike_document_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"method":"sf","adaptive":false,"encoding_threshold":1.0,"startpoint":0,"spikes":[0,3]}"#).unwrap();
    let out = spikelens(&["decode", "--x", arg(&bad), "--y", arg(&bad)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_requires_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = spikelens(&["demo", "--mnist", arg(&mnist()), "-o", arg(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("labels"));
}

#[test]
fn conventional_sweep_has_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = spikelens(&[
        "sweep",
        "--mnist",
        arg(&mnist()),
        "--samples",
        "5",
        "--method",
        "tbr",
        "-o",
        arg(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("tbr_conventional_y.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("NA,")));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}
