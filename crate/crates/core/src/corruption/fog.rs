use rand::Rng;

use super::{CorruptedFrame, Frame, Provenance, STREAM_POINT};
use crate::error::{Error, Result};
use crate::geometry::range;
use crate::rng::CounterRng;

/// Received response of the soft (fog) target as a function of range.
pub trait SoftTargetResponse {
    fn response(&self, range: f64, beta_0: f64) -> f64;
}

/// `gain · β₀ · max(0, 1 − r/distance) / r²`.
///
/// With this curve the soft return reduces to
/// `p^i · β_bs · gain · max(0, 1 − r/distance)`: strongest close to the
/// sensor and vanishing at `distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDecayResponse {
    pub gain: f64,
    pub distance: f64,
}

impl SoftTargetResponse for LinearDecayResponse {
    fn response(&self, range: f64, beta_0: f64) -> f64 {
        if range <= 0.0 || self.distance <= 0.0 {
            return 0.0;
        }
        self.gain * beta_0 * (1.0 - range / self.distance).max(0.0) / (range * range)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FogConfig {
    /// Attenuation coefficient (1/m).
    pub alpha: f64,
    /// Back-scattering coefficient.
    pub beta_bs: f64,
    /// Differential reflectivity of the target.
    pub beta_0: f64,
    /// Bounds of the fraction of range at which a scattered return lands.
    pub scatter_fraction: [f64; 2],
    pub response: LinearDecayResponse,
    pub fog_class: Option<u16>,
}

const INTENSITY_SLACK: f32 = 1e-6;

pub fn apply_fog(frame: &Frame, cfg: &FogConfig, seed: u64) -> Result<CorruptedFrame> {
    apply_fog_with(frame, cfg, &cfg.response, seed)
}

/// Fog with a caller-supplied soft-target response.
///
/// Each point gets its attenuated hard return `p^i·exp(−2α·r)` and the soft
/// return `p^i · r²/β₀ · β_bs · p_tmp(r)`. Where the soft return wins the
/// point is moved along its ray to `f·r`, `f ~ U(scatter_fraction)`, takes the
/// soft intensity and the fog class. Otherwise it keeps its position with the
/// hard intensity.
pub fn apply_fog_with(
    frame: &Frame,
    cfg: &FogConfig,
    response: &dyn SoftTargetResponse,
    seed: u64,
) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    if !(cfg.alpha >= 0.0 && cfg.beta_bs >= 0.0) {
        return Err(Error::Precondition(format!(
            "fog parameters must be non-negative (alpha {}, beta_bs {})",
            cfg.alpha, cfg.beta_bs
        )));
    }
    if let Some(i) = frame
        .cloud
        .intensity
        .iter()
        .position(|&v| !(0.0..=1.0 + INTENSITY_SLACK).contains(&v))
    {
        return Err(Error::Precondition(format!(
            "fog expects intensities normalized to [0, 1]; point {i} has {}",
            frame.cloud.intensity[i]
        )));
    }
    let mut out = CorruptedFrame::unchanged(frame);
    if cfg.alpha == 0.0 && cfg.beta_bs == 0.0 {
        return Ok(out);
    }
    let rng = CounterRng::new(seed);
    let [f_lo, f_hi] = cfg.scatter_fraction;
    for i in 0..frame.cloud.len() {
        let p = frame.cloud.xyz[i];
        let r = range(p);
        let pi = f64::from(frame.cloud.intensity[i]);
        let hard = pi * (-2.0 * cfg.alpha * r).exp();
        let soft = if cfg.beta_bs > 0.0 && r > 0.0 {
            pi * (r * r / cfg.beta_0) * cfg.beta_bs * response.response(r, cfg.beta_0)
        } else {
            0.0
        };
        if soft > hard {
            let f = if f_hi > f_lo {
                rng.point(STREAM_POINT, i).random_range(f_lo..f_hi)
            } else {
                f_lo
            };
            out.cloud.xyz[i] = p.map(|c| (f64::from(c) * f) as f32);
            out.cloud.intensity[i] = soft.min(1.0) as f32;
            out.provenance[i] = Provenance::InjectedFog;
            out.relabel(i, cfg.fog_class);
        } else {
            out.cloud.intensity[i] = hard as f32;
        }
    }
    Ok(out)
}
