//! Segmentation scoring (confusion matrix, mIoU) and the robustness
//! arithmetic built on top of it: corruption error (CE) against a baseline
//! model, resilience rate (RR) against clean accuracy, and their means
//! across corruption types.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::CorruptionKind;

/// Square count matrix indexed `[gt][pred]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix {
            num_classes,
            counts: vec![0; num_classes * num_classes],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds `count` observations of ground truth `gt` predicted as `pred`.
    pub fn add(&mut self, gt: u32, pred: u32, count: u64) -> Result<()> {
        for label in [gt, pred] {
            if label as usize >= self.num_classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    num_classes: self.num_classes,
                });
            }
        }
        self.counts[gt as usize * self.num_classes + pred as usize] += count;
        Ok(())
    }

    /// Adds another frame's counts.
    pub fn accumulate(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.num_classes != self.num_classes {
            return Err(Error::LengthMismatch {
                expected: self.num_classes,
                actual: other.num_classes,
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// IoU per class; `None` where the class is absent from both gt and prediction.
    pub fn class_iou(&self) -> Vec<Option<f64>> {
        (0..self.num_classes)
            .map(|c| {
                let tp = self.get(c, c);
                let fn_: u64 = (0..self.num_classes).map(|p| self.get(c, p)).sum::<u64>() - tp;
                let fp: u64 = (0..self.num_classes).map(|g| self.get(g, c)).sum::<u64>() - tp;
                let union = tp + fp + fn_;
                (union > 0).then(|| tp as f64 / union as f64)
            })
            .collect()
    }
}

/// Counts `(gt, pred)` pairs, skipping points whose ground truth is `ignore_label`.
pub fn confusion_matrix(
    pred: &[u32],
    gt: &[u32],
    num_classes: usize,
    ignore_label: Option<u32>,
) -> Result<ConfusionMatrix> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            actual: pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(num_classes);
    for (&p, &g) in pred.iter().zip(gt) {
        if Some(g) == ignore_label {
            continue;
        }
        for label in [p, g] {
            if label as usize >= num_classes {
                return Err(Error::LabelOutOfRange { label, num_classes });
            }
        }
        cm.counts[g as usize * num_classes + p as usize] += 1;
    }
    Ok(cm)
}

/// Mean IoU over classes present in ground truth or prediction.
pub fn miou(cm: &ConfusionMatrix) -> Result<f64> {
    miou_excluding(cm, None)
}

/// [`miou`] with one class (normally the ignore label) left out of the mean.
pub fn miou_excluding(cm: &ConfusionMatrix, excluded: Option<usize>) -> Result<f64> {
    let ious: Vec<f64> = cm
        .class_iou()
        .into_iter()
        .enumerate()
        .filter(|(c, _)| Some(*c) != excluded)
        .filter_map(|(_, iou)| iou)
        .collect();
    if ious.is_empty() {
        return Err(Error::Undefined("mIoU with no class present".into()));
    }
    Ok(ious.iter().sum::<f64>() / ious.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "mIoU")]
    MIoU,
    AP,
    NDS,
    APH,
}

/// Accuracies of one model: clean, plus per corruption either three
/// per-severity values or a single severity mean. Fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub model: String,
    pub metric: MetricKind,
    pub clean: f64,
    pub corruptions: BTreeMap<CorruptionKind, Vec<f64>>,
}

impl AccuracyRecord {
    pub fn validate(&self) -> Result<()> {
        let incomplete = |reason: String| Error::IncompleteRecord {
            model: self.model.clone(),
            reason,
        };
        if !(0.0..=1.0).contains(&self.clean) {
            return Err(incomplete(format!("clean accuracy {} outside [0, 1]", self.clean)));
        }
        for kind in CorruptionKind::ALL {
            let acc = self
                .corruptions
                .get(&kind)
                .ok_or_else(|| incomplete(format!("missing corruption {kind}")))?;
            if acc.len() != 1 && acc.len() != 3 {
                return Err(incomplete(format!(
                    "{kind}: expected 3 severities or 1 mean, got {} values",
                    acc.len()
                )));
            }
            if let Some(v) = acc.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(incomplete(format!("{kind}: accuracy {v} outside [0, 1]")));
            }
        }
        if self.corruptions.len() != CorruptionKind::ALL.len() {
            return Err(incomplete("unexpected extra corruption entries".into()));
        }
        Ok(())
    }

    pub fn accuracies(&self, kind: CorruptionKind) -> &[f64] {
        self.corruptions.get(&kind).map_or(&[], Vec::as_slice)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `100 · Σ(1 − acc) / Σ(1 − baseline)`.
///
/// When the two sides carry different numbers of severity values (three
/// values against one mean) both are reduced to their means first; the
/// result is the same because CE is linear in the per-level terms.
pub fn corruption_error(acc: &[f64], baseline_acc: &[f64]) -> Result<f64> {
    if acc.is_empty() || baseline_acc.is_empty() {
        return Err(Error::Undefined("corruption error of an empty accuracy list".into()));
    }
    let (num, den) = if acc.len() == baseline_acc.len() {
        (
            acc.iter().map(|a| 1.0 - a).sum::<f64>(),
            baseline_acc.iter().map(|a| 1.0 - a).sum::<f64>(),
        )
    } else {
        (1.0 - mean(acc), 1.0 - mean(baseline_acc))
    };
    if den <= 0.0 {
        return Err(Error::Undefined("baseline has zero error".into()));
    }
    Ok(100.0 * (num / den))
}

/// `100 · Σ acc / (L · clean)` over the `L` supplied severity values. May exceed 100.
pub fn resilience_rate(acc: &[f64], clean_acc: f64) -> Result<f64> {
    if acc.is_empty() {
        return Err(Error::Undefined("resilience rate of an empty accuracy list".into()));
    }
    if clean_acc <= 0.0 {
        return Err(Error::Undefined("clean accuracy is zero".into()));
    }
    Ok(100.0 * acc.iter().sum::<f64>() / (acc.len() as f64 * clean_acc))
}

/// Robustness summary of one model, percentages in report column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub model: String,
    pub baseline_model: String,
    pub clean: f64,
    pub ce: [f64; 8],
    pub rr: [f64; 8],
    pub mce: f64,
    pub mrr: f64,
}

pub fn aggregate(records: &[AccuracyRecord], baseline: &AccuracyRecord) -> Result<Vec<RobustnessReport>> {
    baseline.validate()?;
    records
        .iter()
        .map(|record| {
            record.validate()?;
            let mut ce = [0.0; 8];
            let mut rr = [0.0; 8];
            for kind in CorruptionKind::ALL {
                let acc = record.accuracies(kind);
                ce[kind.index()] = corruption_error(acc, baseline.accuracies(kind))?;
                rr[kind.index()] = resilience_rate(acc, record.clean)?;
            }
            Ok(RobustnessReport {
                model: record.model.clone(),
                baseline_model: baseline.model.clone(),
                clean: record.clean,
                mce: mean(&ce),
                mrr: mean(&rr),
                ce,
                rr,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Column headers: model, mCE, mRR, then CE and RR per corruption.
pub fn report_columns() -> Vec<String> {
    let mut cols = vec!["model".to_string(), "mCE".to_string(), "mRR".to_string()];
    cols.extend(CorruptionKind::ALL.iter().map(|k| format!("CE_{}", k.short_name())));
    cols.extend(CorruptionKind::ALL.iter().map(|k| format!("RR_{}", k.short_name())));
    cols
}

fn row_values(r: &RobustnessReport) -> Vec<String> {
    let mut v = vec![format!("{:.2}", r.mce), format!("{:.2}", r.mrr)];
    v.extend(r.ce.iter().map(|x| format!("{x:.2}")));
    v.extend(r.rr.iter().map(|x| format!("{x:.2}")));
    v
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_report(reports: &[RobustnessReport], format: ReportFormat) -> Vec<u8> {
    let columns = report_columns();
    match format {
        ReportFormat::Csv => {
            let mut out = columns.join(",");
            out.push('\n');
            for r in reports {
                let mut row = vec![csv_field(&r.model)];
                row.extend(row_values(r));
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out.into_bytes()
        }
        ReportFormat::Markdown => {
            let mut out = format!("| {} |\n", columns.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(columns.len()));
            for r in reports {
                let mut row = vec![r.model.replace('|', "\\|")];
                row.extend(row_values(r));
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
            out.into_bytes()
        }
        ReportFormat::Json => {
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("model".into(), r.model.clone().into());
                    obj.insert("baseline".into(), r.baseline_model.clone().into());
                    for (col, val) in columns[1..].iter().zip(row_values(r)) {
                        let num: serde_json::Number = val.parse().expect("formatted float");
                        obj.insert(col.clone(), serde_json::Value::Number(num));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&rows).expect("json serializes");
            out.push(b'\n');
            out
        }
    }
}
