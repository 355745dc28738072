//! The eight corruption operators and the dispatcher that resolves their
//! parameters from a [`DatasetProfile`].
//!
//! Every operator is a pure function of its input frame, its parameters and a
//! 64-bit seed. Labels are kept index-aligned with the cloud, boxes are never
//! touched, and each output point carries a [`Provenance`] tag.

mod beam;
mod crosstalk;
mod echo;
mod fog;
mod motion;
mod snow;
mod wet;

pub use beam::{apply_beam_missing, apply_cross_sensor, cross_sensor_beams, equal_interval_positions};
pub use crosstalk::{apply_crosstalk, CrosstalkConfig};
pub use echo::{apply_incomplete_echo, vehicle_points};
pub use fog::{apply_fog, apply_fog_with, FogConfig, LinearDecayResponse, SoftTargetResponse};
pub use motion::apply_motion_blur;
pub use snow::{apply_snow, apply_snow_with, ParticleField, SampledParticles, SnowConfig, SnowParticle};
pub use wet::{apply_wet_ground, WetGroundConfig};

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fit_ground_ransac, ground_from_labels, partition_beams, GroundModel};
use crate::io::{BoxSet, LabelArray, PointCloud};
use crate::profile::{CorruptionKind, DatasetProfile, Severity};
use crate::rng::{derive_seed, CounterRng};

// Stream ids; one per independent decision inside an operator.
pub(crate) const STREAM_SELECT: u64 = 1;
pub(crate) const STREAM_POINT: u64 = 2;
pub(crate) const STREAM_FRAME: u64 = 3;
pub(crate) const STREAM_GROUND: u64 = 4;

/// The reproducibility key for one corrupted frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub severity: Severity,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, severity: Severity, seed: u64) -> Self {
        CorruptionSpec { kind, severity, seed }
    }
}

/// Where an output point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    InjectedFog,
    InjectedSnow,
    JitteredCrosstalk,
}

/// A clean frame as handed to the operators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frame {
    pub cloud: PointCloud,
    pub labels: Option<LabelArray>,
    pub boxes: Option<BoxSet>,
}

impl Frame {
    pub fn new(cloud: PointCloud) -> Self {
        Frame {
            cloud,
            labels: None,
            boxes: None,
        }
    }

    pub fn with_labels(mut self, labels: LabelArray) -> Result<Self> {
        if labels.len() != self.cloud.len() {
            return Err(Error::LengthMismatch {
                expected: self.cloud.len(),
                actual: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_boxes(mut self, boxes: BoxSet) -> Self {
        self.boxes = Some(boxes);
        self
    }

    pub(crate) fn check_aligned(&self) -> Result<()> {
        match &self.labels {
            Some(l) if l.len() != self.cloud.len() => Err(Error::LengthMismatch {
                expected: self.cloud.len(),
                actual: l.len(),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptedFrame {
    pub cloud: PointCloud,
    pub labels: Option<LabelArray>,
    pub boxes: Option<BoxSet>,
    pub provenance: Vec<Provenance>,
}

impl CorruptedFrame {
    /// The frame unchanged, every point tagged original.
    pub fn unchanged(frame: &Frame) -> Self {
        CorruptedFrame {
            cloud: frame.cloud.clone(),
            labels: frame.labels.clone(),
            boxes: frame.boxes.clone(),
            provenance: vec![Provenance::Original; frame.cloud.len()],
        }
    }

    /// Keeps the points at strictly increasing `indices`, with their labels.
    pub(crate) fn retained(frame: &Frame, indices: &[usize]) -> Self {
        CorruptedFrame {
            cloud: frame.cloud.select(indices),
            labels: frame.labels.as_ref().map(|l| l.select(indices)),
            boxes: frame.boxes.clone(),
            provenance: vec![Provenance::Original; indices.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub(crate) fn relabel(&mut self, index: usize, class: Option<u16>) {
        if let (Some(labels), Some(class)) = (self.labels.as_mut(), class) {
            labels.semantic[index] = class;
            labels.instance[index] = 0;
        }
    }
}

/// Round half to even of `fraction · n`.
pub fn fractional_count(fraction: f64, n: usize) -> usize {
    let c = (fraction * n as f64).round_ties_even();
    (c.max(0.0) as usize).min(n)
}

/// Sorted uniform sample of `amount` distinct indices from `0..n`.
pub(crate) fn sample_sorted(rng: &mut impl Rng, n: usize, amount: usize) -> Vec<usize> {
    let mut picked = rand::seq::index::sample(rng, n, amount).into_vec();
    picked.sort_unstable();
    picked
}

/// Applies one corruption at one severity using the profile's tables.
///
/// All randomness derives from `derive_seed(spec.seed, frame_id, kind,
/// severity)`, so equal inputs give bitwise-equal outputs.
pub fn apply(spec: &CorruptionSpec, frame: &Frame, profile: &DatasetProfile) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    let seed = derive_seed(spec.seed, &frame.cloud.frame_id, spec.kind, spec.severity);
    let level = spec.severity.index();
    let injected = profile.injected;
    match spec.kind {
        CorruptionKind::Fog => {
            let cfg = FogConfig {
                alpha: fog_alpha(seed, profile),
                beta_bs: profile.fog.beta_bs[level],
                beta_0: profile.fog.beta_0,
                scatter_fraction: profile.fog.scatter_fraction,
                response: LinearDecayResponse {
                    gain: profile.fog.response_gain,
                    distance: profile.fog.response_distance,
                },
                fog_class: injected.map(|i| i.fog),
            };
            apply_fog(frame, &cfg, seed)
        }
        CorruptionKind::WetGround => {
            let ground = ground_model(frame, profile, seed)?;
            let cfg = WetGroundConfig {
                water_height_mm: profile.wet_ground.water_height_mm[level],
                noise_floor: profile.wet_ground.noise_floor,
                kappa_per_mm: profile.wet_ground.kappa_per_mm,
            };
            apply_wet_ground(frame, &ground, &cfg)
        }
        CorruptionKind::Snow => {
            let cfg = SnowConfig::from_profile(&profile.snow, level, injected.map(|i| i.snow));
            apply_snow(frame, &cfg, seed)
        }
        CorruptionKind::MotionBlur => apply_motion_blur(frame, profile.motion_blur.sigma_t[level], seed),
        CorruptionKind::BeamMissing => {
            let partition = partition_beams(&frame.cloud, profile)?;
            apply_beam_missing(frame, &partition, profile.beam_missing.drop_beams[level], seed)
        }
        CorruptionKind::Crosstalk => {
            let cfg = CrosstalkConfig {
                k_t: profile.crosstalk.k_t[level],
                sigma_c: profile.crosstalk.sigma_c,
                crosstalk_class: injected.map(|i| i.crosstalk),
            };
            apply_crosstalk(frame, &cfg, seed)
        }
        CorruptionKind::IncompleteEcho => {
            apply_incomplete_echo(frame, profile, profile.incomplete_echo.k_e[level], seed)
        }
        CorruptionKind::CrossSensor => {
            let partition = partition_beams(&frame.cloud, profile)?;
            apply_cross_sensor(
                frame,
                &partition,
                profile.cross_sensor.keep_beams[level],
                profile.cross_sensor.subsample_keep,
            )
        }
    }
}

/// The attenuation coefficient drawn for one frame from the profile's α axis.
fn fog_alpha(frame_seed: u64, profile: &DatasetProfile) -> f64 {
    let axis = &profile.fog.alpha_axis;
    axis[CounterRng::new(frame_seed).stream(STREAM_FRAME).random_range(0..axis.len())]
}

/// The scalar parameters [`apply`] uses for this frame, keyed by name.
pub fn resolved_parameters(spec: &CorruptionSpec, frame_id: &str, profile: &DatasetProfile) -> BTreeMap<&'static str, f64> {
    let seed = derive_seed(spec.seed, frame_id, spec.kind, spec.severity);
    let level = spec.severity.index();
    let mut out = BTreeMap::new();
    match spec.kind {
        CorruptionKind::Fog => {
            out.insert("alpha", fog_alpha(seed, profile));
            out.insert("beta_bs", profile.fog.beta_bs[level]);
        }
        CorruptionKind::WetGround => {
            out.insert("water_height_mm", profile.wet_ground.water_height_mm[level]);
            out.insert("noise_floor", profile.wet_ground.noise_floor);
        }
        CorruptionKind::Snow => {
            out.insert("rate_mm_per_h", profile.snow.rate_mm_per_h[level]);
        }
        CorruptionKind::MotionBlur => {
            out.insert("sigma_t", profile.motion_blur.sigma_t[level]);
        }
        CorruptionKind::BeamMissing => {
            out.insert("drop_beams", f64::from(profile.beam_missing.drop_beams[level]));
        }
        CorruptionKind::Crosstalk => {
            out.insert("k_t", profile.crosstalk.k_t[level]);
            out.insert("sigma_c", profile.crosstalk.sigma_c);
        }
        CorruptionKind::IncompleteEcho => {
            out.insert("k_e", profile.incomplete_echo.k_e[level]);
        }
        CorruptionKind::CrossSensor => {
            out.insert("keep_beams", f64::from(profile.cross_sensor.keep_beams[level]));
            out.insert("subsample_keep", profile.cross_sensor.subsample_keep);
        }
    }
    out
}

/// Ground from semantic labels when the profile names ground classes and the
/// frame has labels, otherwise RANSAC with the profile's parameters.
pub fn ground_model(frame: &Frame, profile: &DatasetProfile, seed: u64) -> Result<GroundModel> {
    match &frame.labels {
        Some(labels) if !profile.ground_classes.is_empty() => {
            ground_from_labels(&frame.cloud, labels, profile)
        }
        _ => {
            let ransac_seed = CounterRng::new(seed).stream(STREAM_GROUND).random();
            match fit_ground_ransac(
                &frame.cloud,
                profile.ransac.iterations,
                profile.ransac.inlier_threshold,
                ransac_seed,
            ) {
                Ok(g) => Ok(g),
                // Too few points for a plane: nothing counts as ground.
                Err(Error::NoPlane(_)) => Ok(GroundModel {
                    plane: crate::geometry::Plane::horizontal(0.0),
                    inlier_mask: vec![false; frame.cloud.len()],
                    source: crate::geometry::GroundSource::Ransac,
                }),
                Err(e) => Err(e),
            }
        }
    }
}
