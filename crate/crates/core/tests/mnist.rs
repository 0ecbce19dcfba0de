use std::path::PathBuf;

use spikelens::dataset::{maybe_gunzip, read_maybe_gzip};
use spikelens::pipeline::{build_cohort, SignalSource};
use spikelens::{
    canny, extract_coordinates, grid_sweep, CannyParams, FitnessParams, IdxDataset, Method,
};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/mnist")
        .join(name)
}

fn dataset() -> IdxDataset {
    IdxDataset::load(
        &data("images-idx3-ubyte.gz"),
        Some(&data("labels-idx1-ubyte.gz")),
    )
    .unwrap()
}

#[test]
fn fixture_sizes() {
    let images = read_maybe_gzip(&data("images-idx3-ubyte.gz")).unwrap();
    assert_eq!(images.len(), 16 + 10_000 * 28 * 28);
    let labels = maybe_gunzip(std::fs::read(data("labels-idx1-ubyte.gz")).unwrap()).unwrap();
    assert_eq!(labels.len(), 8 + 10_000);
    let ds = dataset();
    assert_eq!(ds.len(), 10_000);
    let labels = ds.labels().unwrap();
    for d in 0..10u8 {
        assert!(labels.iter().filter(|&&l| l == d).count() > 800);
    }
}

#[test]
fn edges_are_thin() {
    let ds = dataset();
    for i in (0..ds.len()).step_by(97) {
        let e = canny(ds.image(i).unwrap(), CannyParams::default()).unwrap();
        assert!(!e.is_blank(), "image {i} has no edges");
        for r in 0..27 {
            for c in 0..27 {
                let full = (0..3).all(|dr| (0..3).all(|dc| e.get(r + dr, c + dc)));
                assert!(!full, "image {i}: 3x3 block at ({r},{c})");
            }
        }
        let sig = extract_coordinates(&e);
        assert_eq!(sig.len(), e.count());
        assert!(sig.len() < ds.image(i).unwrap().count_nonzero());
    }
}

#[test]
fn stratified_sample_is_balanced_and_seeded() {
    let ds = dataset();
    let a = ds.stratified_sample(1000, 7);
    assert_eq!(a, ds.stratified_sample(1000, 7));
    assert_ne!(a, ds.stratified_sample(1000, 8));
    let labels = ds.labels().unwrap();
    for d in 0..10u8 {
        assert_eq!(a.iter().filter(|&&i| labels[i] == d).count(), 100);
    }
}

#[test]
fn sweep_is_reproducible_across_pools() {
    let ds = dataset();
    let idx = ds.stratified_sample(40, 3);
    let cohort = build_cohort(&ds, &idx, SignalSource::Edges(CannyParams::default())).unwrap();
    let axis: Vec<f64> = (1..=8).map(|i| i as f64 / 4.0).collect();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                grid_sweep(
                    &cohort.x,
                    Method::Sf,
                    true,
                    &axis,
                    &axis,
                    FitnessParams::default(),
                )
                .unwrap()
                .to_csv()
            })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(4));
}
