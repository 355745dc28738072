//! Per-dataset constants: beam counts, class-id sets and the severity tables
//! every corruption resolves its parameters from.
//!
//! Profiles are plain TOML. The four built-in ones are compiled into the
//! library; [`DatasetProfile::from_toml_str`] loads edited copies.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Profile file format version understood by this build.
pub const PROFILE_VERSION: u32 = 1;

const BUILTIN_SEMANTICKITTI: &str = include_str!("../profiles/semantickitti.toml");
const BUILTIN_KITTI: &str = include_str!("../profiles/kitti.toml");
const BUILTIN_NUSCENES: &str = include_str!("../profiles/nuscenes.toml");
const BUILTIN_WOD: &str = include_str!("../profiles/wod.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    SemanticKitti,
    Kitti,
    NuScenes,
    Wod,
}

impl DatasetName {
    pub const ALL: [DatasetName; 4] = [
        DatasetName::SemanticKitti,
        DatasetName::Kitti,
        DatasetName::NuScenes,
        DatasetName::Wod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::SemanticKitti => "semantickitti",
            DatasetName::Kitti => "kitti",
            DatasetName::NuScenes => "nuscenes",
            DatasetName::Wod => "wod",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetName::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Profile(format!("unknown dataset {s:?}")))
    }
}

/// Directory convention used by [`crate::io::iterate_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `velodyne/<stem>.bin` with `labels/<stem>.label`.
    SemanticKitti,
    /// `<stem>.bin` with optional `<stem>.label` / `<stem>.txt` side by side.
    Flat,
}

/// The corruption taxonomy, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    Fog,
    #[serde(alias = "wet")]
    WetGround,
    Snow,
    #[serde(alias = "motion")]
    MotionBlur,
    #[serde(alias = "beam")]
    BeamMissing,
    Crosstalk,
    #[serde(alias = "echo")]
    IncompleteEcho,
    #[serde(alias = "sensor")]
    CrossSensor,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 8] = [
        CorruptionKind::Fog,
        CorruptionKind::WetGround,
        CorruptionKind::Snow,
        CorruptionKind::MotionBlur,
        CorruptionKind::BeamMissing,
        CorruptionKind::Crosstalk,
        CorruptionKind::IncompleteEcho,
        CorruptionKind::CrossSensor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionKind::Fog => "fog",
            CorruptionKind::WetGround => "wet_ground",
            CorruptionKind::Snow => "snow",
            CorruptionKind::MotionBlur => "motion_blur",
            CorruptionKind::BeamMissing => "beam_missing",
            CorruptionKind::Crosstalk => "crosstalk",
            CorruptionKind::IncompleteEcho => "incomplete_echo",
            CorruptionKind::CrossSensor => "cross_sensor",
        }
    }

    /// Short column header used in rendered reports.
    pub fn short_name(self) -> &'static str {
        match self {
            CorruptionKind::Fog => "fog",
            CorruptionKind::WetGround => "wet",
            CorruptionKind::Snow => "snow",
            CorruptionKind::MotionBlur => "motion",
            CorruptionKind::BeamMissing => "beam",
            CorruptionKind::Crosstalk => "crosstalk",
            CorruptionKind::IncompleteEcho => "echo",
            CorruptionKind::CrossSensor => "sensor",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let needle = s.to_ascii_lowercase().replace('-', "_");
        CorruptionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == needle || k.short_name() == needle)
            .ok_or_else(|| Error::Profile(format!("unknown corruption {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Light,
    Moderate,
    Heavy,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::Light, Severity::Moderate, Severity::Heavy];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Light => "light",
            Severity::Moderate => "moderate",
            Severity::Heavy => "heavy",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Severity::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Profile(format!("unknown severity {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedClasses {
    pub fog: u16,
    pub snow: u16,
    pub crosstalk: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FogParams {
    /// Attenuation coefficients one of which is drawn per frame.
    pub alpha_axis: Vec<f64>,
    /// Back-scattering coefficient per severity.
    pub beta_bs: [f64; 3],
    /// Differential reflectivity of the target.
    pub beta_0: f64,
    /// Scale of the soft-target response curve.
    pub response_gain: f64,
    /// Range (m) at which the soft-target response reaches zero.
    pub response_distance: f64,
    /// Bounds of the fraction of range at which a scattered return is placed.
    pub scatter_fraction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WetGroundParams {
    pub water_height_mm: [f64; 3],
    /// Minimum detectable (normalized) intensity.
    pub noise_floor: f64,
    /// Attenuation per mm of water along the incidence path.
    pub kappa_per_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowParams {
    pub rate_mm_per_h: [f64; 3],
    /// Expected particles hit per metre of ray per mm/h of snowfall.
    pub particles_per_meter: f64,
    pub particle_radius_mm: [f64; 2],
    /// Extinction `c * r_s^e` (1/m).
    pub extinction_coeff: f64,
    pub extinction_exponent: f64,
    pub particle_reflectivity: f64,
    pub beam_divergence_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionBlurParams {
    pub sigma_t: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamMissingParams {
    pub drop_beams: [u32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkParams {
    pub k_t: [f64; 3],
    pub sigma_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteEchoParams {
    pub k_e: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSensorParams {
    pub keep_beams: [u32; 3],
    pub subsample_keep: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    pub iterations: u32,
    pub inlier_threshold: f64,
}

/// Everything dataset-specific that the corruption engine and evaluation need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub version: u32,
    pub name: DatasetName,
    pub beam_count: u32,
    /// Scans carry a per-point ring channel on disk.
    pub ring_channel: bool,
    pub layout: Layout,
    pub requires_labels: bool,
    /// Raw intensity units per normalized unit (255 for 8-bit sensors).
    pub intensity_scale: f32,
    /// Divide intensities by `intensity_scale` before corrupting.
    pub normalize_intensity: bool,
    pub ignore_label: u16,
    pub ground_classes: BTreeSet<u16>,
    pub vehicle_classes: BTreeSet<u16>,
    pub vehicle_box_classes: BTreeSet<u16>,
    #[serde(default)]
    pub injected: Option<InjectedClasses>,
    pub fog: FogParams,
    pub wet_ground: WetGroundParams,
    pub snow: SnowParams,
    pub motion_blur: MotionBlurParams,
    pub beam_missing: BeamMissingParams,
    pub crosstalk: CrosstalkParams,
    pub incomplete_echo: IncompleteEchoParams,
    pub cross_sensor: CrossSensorParams,
    pub ransac: RansacParams,
}

impl DatasetProfile {
    pub fn builtin(name: DatasetName) -> DatasetProfile {
        let text = Self::builtin_source(name);
        Self::from_toml_str(text).expect("built-in profile is valid")
    }

    /// TOML source of a built-in profile, e.g. to seed an editable copy.
    pub fn builtin_source(name: DatasetName) -> &'static str {
        match name {
            DatasetName::SemanticKitti => BUILTIN_SEMANTICKITTI,
            DatasetName::Kitti => BUILTIN_KITTI,
            DatasetName::NuScenes => BUILTIN_NUSCENES,
            DatasetName::Wod => BUILTIN_WOD,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<DatasetProfile> {
        let profile: DatasetProfile =
            toml::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    /// Replaces one parameter addressed by a dotted key, e.g.
    /// `crosstalk.sigma_c` or `ransac.iterations`.
    ///
    /// The value is parsed as a TOML value (`3.0`, `[1, 2, 3]`, `"flat"`).
    pub fn set_override(&mut self, key: &str, value: &str) -> Result<()> {
        let mut doc = toml::Value::try_from(&*self).map_err(|e| Error::Profile(e.to_string()))?;
        let parsed: toml::Value = {
            let wrapped = format!("v = {value}");
            match toml::from_str::<toml::Table>(&wrapped) {
                Ok(mut t) => t.remove("v").expect("key present"),
                // Bare words are treated as strings.
                Err(_) => toml::Value::String(value.to_string()),
            }
        };
        let mut slot = &mut doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = slot
                .as_table_mut()
                .ok_or_else(|| Error::Profile(format!("{key}: {part} is not a table")))?;
            if i + 1 == parts.len() {
                let old = table
                    .get_mut(*part)
                    .ok_or_else(|| Error::Profile(format!("unknown parameter {key:?}")))?;
                *old = coerce_like(old, parsed.clone());
                break;
            }
            slot = table
                .get_mut(*part)
                .ok_or_else(|| Error::Profile(format!("unknown parameter {key:?}")))?;
        }
        let updated: DatasetProfile = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::Profile(format!("{key}: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Profile(format!("{}: {msg}", self.name)));
        if self.version != PROFILE_VERSION {
            return fail(format!(
                "unsupported profile version {} (expected {PROFILE_VERSION})",
                self.version
            ));
        }
        if self.beam_count == 0 {
            return fail("beam_count must be positive".into());
        }
        if !(self.intensity_scale > 0.0 && self.intensity_scale.is_finite()) {
            return fail("intensity_scale must be positive".into());
        }
        if let Some(inj) = self.injected {
            let ids = [inj.fog, inj.snow, inj.crosstalk];
            for id in ids {
                if self.ground_classes.contains(&id) || self.vehicle_classes.contains(&id) {
                    return fail(format!("injected class {id} collides with a class set"));
                }
                if id == self.ignore_label {
                    return fail(format!("injected class {id} equals the ignore label"));
                }
            }
            if inj.fog == inj.snow || inj.fog == inj.crosstalk || inj.snow == inj.crosstalk {
                return fail("injected class ids must be distinct".into());
            }
        }
        if self.fog.alpha_axis.is_empty() || self.fog.alpha_axis.iter().any(|a| *a < 0.0) {
            return fail("fog.alpha_axis must be non-empty and non-negative".into());
        }
        if !(self.fog.beta_0 > 0.0) {
            return fail("fog.beta_0 must be positive".into());
        }
        let [f0, f1] = self.fog.scatter_fraction;
        if !(0.0 < f0 && f0 <= f1 && f1 < 1.0) {
            return fail("fog.scatter_fraction must satisfy 0 < lo <= hi < 1".into());
        }
        let non_negative = |name: &str, v: &[f64]| -> Result<()> {
            if v.iter().all(|x| x.is_finite() && *x >= 0.0) {
                Ok(())
            } else {
                fail(format!("{name} must be finite and non-negative"))
            }
        };
        let fraction = |name: &str, v: &[f64]| -> Result<()> {
            if v.iter().all(|x| (0.0..=1.0).contains(x)) {
                Ok(())
            } else {
                fail(format!("{name} must lie in [0, 1]"))
            }
        };
        non_negative("fog.beta_bs", &self.fog.beta_bs)?;
        non_negative("wet_ground.water_height_mm", &self.wet_ground.water_height_mm)?;
        non_negative("snow.rate_mm_per_h", &self.snow.rate_mm_per_h)?;
        non_negative("motion_blur.sigma_t", &self.motion_blur.sigma_t)?;
        non_negative("crosstalk.sigma_c", &[self.crosstalk.sigma_c])?;
        fraction("crosstalk.k_t", &self.crosstalk.k_t)?;
        fraction("incomplete_echo.k_e", &self.incomplete_echo.k_e)?;
        if self.beam_missing.drop_beams.iter().any(|&m| m > self.beam_count) {
            return fail("beam_missing.drop_beams exceeds beam_count".into());
        }
        if self
            .cross_sensor
            .keep_beams
            .iter()
            .any(|&k| k == 0 || k > self.beam_count)
        {
            return fail("cross_sensor.keep_beams must lie in [1, beam_count]".into());
        }
        if !(self.cross_sensor.subsample_keep > 0.0 && self.cross_sensor.subsample_keep <= 1.0) {
            return fail("cross_sensor.subsample_keep must lie in (0, 1]".into());
        }
        Ok(())
    }

    pub fn is_ground_class(&self, semantic: u16) -> bool {
        self.ground_classes.contains(&semantic)
    }

    pub fn is_vehicle_class(&self, semantic: u16) -> bool {
        self.vehicle_classes.contains(&semantic)
    }

    /// True for the fog/snow/crosstalk ids written by the corruption engine.
    pub fn is_injected_class(&self, semantic: u16) -> bool {
        self.injected
            .is_some_and(|i| semantic == i.fog || semantic == i.snow || semantic == i.crosstalk)
    }
}

// Integers written where the profile expects a float (`--set crosstalk.sigma_c=3`).
fn coerce_like(old: &toml::Value, new: toml::Value) -> toml::Value {
    match (old, new) {
        (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (toml::Value::Array(old_items), toml::Value::Array(new_items)) => {
            let template = old_items.first();
            toml::Value::Array(
                new_items
                    .into_iter()
                    .map(|v| match template {
                        Some(t) => coerce_like(t, v),
                        None => v,
                    })
                    .collect(),
            )
        }
        (_, new) => new,
    }
}
