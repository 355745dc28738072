use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use robustscan_core::io::{iterate_dataset, read_semkitti_labels};
use robustscan_core::metrics::{miou_excluding, AccuracyRecord, ConfusionMatrix, MetricKind};
use robustscan_core::{CorruptionKind, DatasetProfile, Error, Severity};

use crate::error::CliError;

pub const CLEAN_SET: &str = "clean";

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub profile: DatasetProfile,
    /// Holds `clean/` and `<kind>/<severity>/` sets laid out like the dataset.
    pub gt_root: PathBuf,
    /// Same set directories holding `<frame>.label` predictions.
    pub pred_root: PathBuf,
    pub model: String,
    /// Label range; taken from the largest label seen when absent.
    pub num_classes: Option<usize>,
}

/// Scores predictions against every set present under the ground-truth root.
///
/// Points whose ground truth is the ignore label or one of the profile's
/// injected classes (fog, snow, crosstalk) are left out, and the ignore
/// class does not enter the mean.
pub fn cmd_evaluate(cfg: &EvalConfig) -> Result<AccuracyRecord, CliError> {
    let clean_gt = cfg.gt_root.join(CLEAN_SET);
    if !clean_gt.is_dir() {
        return Err(CliError::Config(format!("missing clean set {}", clean_gt.display())));
    }
    let clean = set_miou(cfg, Path::new(CLEAN_SET))?;
    let mut corruptions = BTreeMap::new();
    for kind in CorruptionKind::ALL {
        let mut values = Vec::new();
        for severity in Severity::ALL {
            let set = Path::new(kind.as_str()).join(severity.as_str());
            if cfg.gt_root.join(&set).is_dir() {
                values.push(set_miou(cfg, &set)?);
            }
        }
        if !values.is_empty() {
            corruptions.insert(kind, values);
        }
    }
    Ok(AccuracyRecord {
        model: cfg.model.clone(),
        metric: MetricKind::MIoU,
        clean,
        corruptions,
    })
}

fn set_miou(cfg: &EvalConfig, set: &Path) -> Result<f64, CliError> {
    let mut profile = cfg.profile.clone();
    profile.requires_labels = true;
    let gt_dir = cfg.gt_root.join(set);
    let pred_dir = cfg.pred_root.join(set);
    let ignore = u32::from(profile.ignore_label);

    let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for frame in iterate_dataset(&gt_dir, &profile)? {
        let frame = frame?;
        let gt = frame.labels.expect("labels required");
        let pred_path = [
            pred_dir.join(format!("{}.label", frame.frame_id)),
            pred_dir.join(&frame.label_path),
        ]
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| {
            CliError::Core(Error::Pairing {
                frame_id: frame.frame_id.clone(),
                path: pred_dir.join(format!("{}.label", frame.frame_id)),
            })
        })?;
        let bytes = fs::read(&pred_path).map_err(|e| CliError::io(&pred_path, e))?;
        let pred = read_semkitti_labels(&bytes).map_err(|source| CliError::Frame {
            frame_id: frame.frame_id.clone(),
            source,
        })?;
        if pred.len() != gt.len() {
            return Err(CliError::Frame {
                frame_id: frame.frame_id,
                source: Error::LengthMismatch {
                    expected: gt.len(),
                    actual: pred.len(),
                },
            });
        }
        for (&g, &p) in gt.semantic.iter().zip(&pred.semantic) {
            if u32::from(g) == ignore || profile.is_injected_class(g) {
                continue;
            }
            *counts.entry((u32::from(g), u32::from(p))).or_default() += 1;
        }
    }

    let seen = counts.keys().map(|&(g, p)| g.max(p) as usize + 1).max().unwrap_or(0);
    let num_classes = cfg.num_classes.unwrap_or(seen.max(ignore as usize + 1));
    let mut cm = ConfusionMatrix::new(num_classes);
    for (&(g, p), &n) in &counts {
        cm.add(g, p, n)?;
    }
    miou_excluding(&cm, Some(ignore as usize)).map_err(|e| CliError::Config(format!("{}: {e}", set.display())))
}
