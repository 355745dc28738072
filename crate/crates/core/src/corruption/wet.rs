use super::{CorruptedFrame, Frame};
use crate::error::{Error, Result};
use crate::geometry::{range, GroundModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WetGroundConfig {
    pub water_height_mm: f64,
    /// Returns dimmer than this (normalized) are lost.
    pub noise_floor: f64,
    pub kappa_per_mm: f64,
}

// Grazing rays are clamped so the path length through the film stays finite.
const MIN_COS_INCIDENCE: f64 = 1e-3;

/// Attenuates ground returns through a water film of height `d_w`:
/// `p̂^i = p^i · exp(−κ·d_w / cos θ)`, θ the angle between the ray and the
/// ground normal. Ground points whose attenuated intensity drops below the
/// noise floor are removed with their labels; everything else keeps its
/// coordinates. A dry surface (`d_w = 0`) leaves the frame untouched.
pub fn apply_wet_ground(frame: &Frame, ground: &GroundModel, cfg: &WetGroundConfig) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    if ground.inlier_mask.len() != frame.cloud.len() {
        return Err(Error::LengthMismatch {
            expected: frame.cloud.len(),
            actual: ground.inlier_mask.len(),
        });
    }
    if !(cfg.water_height_mm >= 0.0) {
        return Err(Error::Precondition(format!(
            "water height must be non-negative, got {}",
            cfg.water_height_mm
        )));
    }
    if cfg.water_height_mm == 0.0 || !ground.inlier_mask.iter().any(|&g| g) {
        return Ok(CorruptedFrame::unchanged(frame));
    }

    let n = ground.plane.normal;
    let mut keep = Vec::with_capacity(frame.cloud.len());
    let mut intensity = frame.cloud.intensity.clone();
    for (i, (&p, &is_ground)) in frame.cloud.xyz.iter().zip(&ground.inlier_mask).enumerate() {
        if !is_ground {
            keep.push(i);
            continue;
        }
        let r = range(p);
        let cos = if r > 0.0 {
            let [x, y, z] = p.map(f64::from);
            ((n[0] * x + n[1] * y + n[2] * z) / r).abs()
        } else {
            1.0
        }
        .max(MIN_COS_INCIDENCE);
        let attenuated =
            f64::from(frame.cloud.intensity[i]) * (-cfg.kappa_per_mm * cfg.water_height_mm / cos).exp();
        if attenuated < cfg.noise_floor {
            continue;
        }
        intensity[i] = attenuated as f32;
        keep.push(i);
    }
    let mut out = CorruptedFrame::retained(frame, &keep);
    for (slot, &i) in out.cloud.intensity.iter_mut().zip(&keep) {
        *slot = intensity[i];
    }
    Ok(out)
}
