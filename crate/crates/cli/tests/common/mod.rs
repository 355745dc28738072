#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustscan_core::io::{write_kitti_scan, write_semkitti_labels};
use robustscan_core::{DatasetName, DatasetProfile, LabelArray, PointCloud};
use robustscan_cli::RunConfig;

pub const GROUND: u16 = 40;
pub const CAR: u16 = 10;
pub const BUILDING: u16 = 50;

/// `beams × per_beam` points on distinct elevation bands, beam 0 highest.
/// The lowest eighth of the beams is labelled ground, every fifth point car,
/// the rest building.
pub fn banded_frame(beams: u32, per_beam: usize, seed: u64) -> (PointCloud, LabelArray) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    let mut intensity = Vec::new();
    let mut labels = Vec::new();
    for b in 0..beams {
        let elev = (2.0 - 26.8 * f64::from(b) / f64::from(beams - 1)).to_radians();
        for j in 0..per_beam {
            let az: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.random_range(5.0..60.0);
            let e = elev + rng.random_range(-0.01f64..0.01).to_radians();
            pts.push([
                (r * e.cos() * az.cos()) as f32,
                (r * e.cos() * az.sin()) as f32,
                (r * e.sin()) as f32,
            ]);
            intensity.push(rng.random_range(0.0f32..1.0));
            labels.push(if b >= beams - beams / 8 {
                GROUND
            } else if j % 5 == 0 {
                CAR
            } else {
                BUILDING
            });
        }
    }
    (
        PointCloud::new(pts, intensity).unwrap(),
        LabelArray::from_semantic(labels),
    )
}

/// Random points with `vehicles` car labels among `n`, the rest building.
pub fn labelled_frame(n: usize, vehicles: usize, seed: u64) -> (PointCloud, LabelArray) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| {
            [
                rng.random_range(-40.0f32..40.0),
                rng.random_range(-40.0f32..40.0),
                rng.random_range(-2.0f32..3.0),
            ]
        })
        .collect();
    let intensity = (0..n).map(|_| rng.random_range(0.0f32..1.0)).collect();
    let labels = (0..n).map(|i| if i < vehicles { CAR } else { BUILDING }).collect();
    (
        PointCloud::new(pts, intensity).unwrap(),
        LabelArray::from_semantic(labels),
    )
}

/// Writes one frame in the `velodyne/ + labels/` layout.
pub fn write_semkitti_frame(root: &Path, stem: &str, cloud: &PointCloud, labels: &LabelArray) {
    fs::create_dir_all(root.join("velodyne")).unwrap();
    fs::create_dir_all(root.join("labels")).unwrap();
    fs::write(root.join("velodyne").join(format!("{stem}.bin")), write_kitti_scan(cloud)).unwrap();
    fs::write(root.join("labels").join(format!("{stem}.label")), write_semkitti_labels(labels)).unwrap();
}

pub fn run_config(input: &Path, output: &Path, workers: usize) -> RunConfig {
    RunConfig {
        profile: DatasetProfile::builtin(DatasetName::SemanticKitti),
        input: input.to_path_buf(),
        output: output.to_path_buf(),
        corruptions: robustscan_core::CorruptionKind::ALL.to_vec(),
        severities: robustscan_core::Severity::ALL.to_vec(),
        seed: 7,
        workers,
    }
}

pub fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

pub type FileTree = Vec<(PathBuf, Vec<u8>)>;

/// Every file under `root`, relative path → bytes, sorted.
pub fn tree_bytes(root: &Path) -> FileTree {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
