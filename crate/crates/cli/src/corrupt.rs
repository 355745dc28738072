use std::collections::BTreeMap;
use std::fs;
use std::path::{Component, Path};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use robustscan_core::corruption::{apply, resolved_parameters, CorruptionSpec, Frame};
use robustscan_core::io::{iterate_dataset, write_kitti_scan, write_nuscenes_scan, write_semkitti_labels, DatasetFrame};
use robustscan_core::rng::derive_seed;
use robustscan_core::{CorruptionKind, DatasetName, DatasetProfile, Severity};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output root, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub frame_id: String,
    pub corruption: CorruptionKind,
    pub severity: Severity,
    /// Seed the operator actually ran with.
    pub frame_seed: u64,
    pub points_in: usize,
    pub points_out: usize,
    pub parameters: BTreeMap<String, f64>,
    pub files: Vec<FileRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub frame_id: String,
    pub corruption: Option<CorruptionKind>,
    pub severity: Option<Severity>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: DatasetName,
    pub seed: u64,
    pub corruptions: Vec<CorruptionKind>,
    pub severities: Vec<Severity>,
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<Failure>,
}

impl Manifest {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            crate::EXIT_OK
        } else {
            crate::EXIT_FAILURE
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn slash_path(p: &Path) -> String {
    p.components()
        .filter_map(|c| match c {
            Component::Normal(s) => s.to_str(),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("/")
}

fn write_file(root: &Path, rel: &Path, bytes: &[u8]) -> Result<FileRecord, CliError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(FileRecord {
        path: slash_path(rel),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

/// Writes every selected corruption of every input frame under
/// `<out>/<kind>/<severity>/`, mirroring the input layout, followed by the
/// manifest. Frames are processed in parallel; the manifest lists them in
/// frame-id order regardless of worker count.
///
/// A frame that cannot be read or corrupted is recorded in
/// [`Manifest::failures`] and the batch continues.
pub fn cmd_corrupt(cfg: &RunConfig) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let frames = iterate_dataset(&cfg.input, &cfg.profile)?;
    let ids = frames.remaining().to_vec();
    fs::create_dir_all(&cfg.output).map_err(|e| CliError::io(&cfg.output, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let per_frame: Vec<(Vec<ManifestEntry>, Vec<Failure>)> = pool.install(|| {
        ids.par_iter()
            .map(|id| match frames.load(id) {
                Ok(frame) => process_frame(cfg, frame),
                Err(e) => (
                    Vec::new(),
                    vec![Failure {
                        frame_id: id.clone(),
                        corruption: None,
                        severity: None,
                        error: e.to_string(),
                    }],
                ),
            })
            .collect()
    });

    let mut manifest = Manifest {
        dataset: cfg.profile.name,
        seed: cfg.seed,
        corruptions: cfg.corruptions.clone(),
        severities: cfg.severities.clone(),
        entries: Vec::new(),
        failures: Vec::new(),
    };
    for (entries, failures) in per_frame {
        manifest.entries.extend(entries);
        manifest.failures.extend(failures);
    }
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    let path = cfg.output.join(MANIFEST_NAME);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

fn process_frame(cfg: &RunConfig, source: DatasetFrame) -> (Vec<ManifestEntry>, Vec<Failure>) {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let box_bytes = match &source.box_path {
        Some(rel) => match fs::read(cfg.input.join(rel)) {
            Ok(b) => Some((rel.clone(), b)),
            Err(e) => {
                failures.push(Failure {
                    frame_id: source.frame_id.clone(),
                    corruption: None,
                    severity: None,
                    error: CliError::io(cfg.input.join(rel), e).to_string(),
                });
                return (entries, failures);
            }
        },
        None => None,
    };
    let mut frame = Frame::new(source.cloud);
    frame.labels = source.labels;
    frame.boxes = source.boxes;

    for &kind in &cfg.corruptions {
        for &severity in &cfg.severities {
            let spec = CorruptionSpec::new(kind, severity, cfg.seed);
            let result = apply(&spec, &frame, &cfg.profile).map_err(CliError::from).and_then(|out| {
                let set = Path::new(kind.as_str()).join(severity.as_str());
                let set_root = cfg.output.join(&set);
                let mut cloud = out.cloud;
                denormalize(&mut cloud.intensity, &cfg.profile);
                let scan = if cfg.profile.ring_channel {
                    write_nuscenes_scan(&cloud)
                } else {
                    write_kitti_scan(&cloud)
                };
                let mut files = vec![write_file(&set_root, &source.scan_path, &scan)?];
                if let Some(labels) = &out.labels {
                    files.push(write_file(&set_root, &source.label_path, &write_semkitti_labels(labels))?);
                }
                if let Some((rel, bytes)) = &box_bytes {
                    files.push(write_file(&set_root, rel, bytes)?);
                }
                for f in &mut files {
                    f.path = format!("{}/{}", slash_path(&set), f.path);
                }
                Ok(ManifestEntry {
                    frame_id: frame.cloud.frame_id.clone(),
                    corruption: kind,
                    severity,
                    frame_seed: derive_seed(cfg.seed, &frame.cloud.frame_id, kind, severity),
                    points_in: frame.cloud.len(),
                    points_out: cloud.len(),
                    parameters: resolved_parameters(&spec, &frame.cloud.frame_id, &cfg.profile)
                        .into_iter()
                        .map(|(k, v)| (k.to_string(), v))
                        .collect(),
                    files,
                })
            });
            match result {
                Ok(entry) => entries.push(entry),
                Err(e) => failures.push(Failure {
                    frame_id: frame.cloud.frame_id.clone(),
                    corruption: Some(kind),
                    severity: Some(severity),
                    error: e.to_string(),
                }),
            }
        }
    }
    (entries, failures)
}

/// Undoes the read-time intensity normalization so outputs use the input's units.
fn denormalize(intensity: &mut [f32], profile: &DatasetProfile) {
    if profile.normalize_intensity && profile.intensity_scale != 1.0 {
        for v in intensity {
            *v *= profile.intensity_scale;
        }
    }
}
