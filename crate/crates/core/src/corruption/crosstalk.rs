use rand_distr::{Distribution, StandardNormal};

use super::{fractional_count, sample_sorted, CorruptedFrame, Frame, Provenance, STREAM_POINT, STREAM_SELECT};
use crate::error::{Error, Result};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosstalkConfig {
    /// Fraction of points hit by interference.
    pub k_t: f64,
    /// Standard deviation of the jitter on all four channels (m / intensity units).
    pub sigma_c: f64,
    pub crosstalk_class: Option<u16>,
}

/// Jitters exactly `round(k_t·N)` uniformly chosen points by
/// `ξ ~ N(0, σ_c²)⁴` on x, y, z and intensity, relabelling them with the
/// crosstalk class. Intensity is clamped back to [0, 1].
pub fn apply_crosstalk(frame: &Frame, cfg: &CrosstalkConfig, seed: u64) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    if !(0.0..=1.0).contains(&cfg.k_t) || !(cfg.sigma_c >= 0.0) {
        return Err(Error::Precondition(format!(
            "crosstalk needs k_t in [0, 1] and sigma_c >= 0 (got {}, {})",
            cfg.k_t, cfg.sigma_c
        )));
    }
    let mut out = CorruptedFrame::unchanged(frame);
    let n = frame.cloud.len();
    let amount = fractional_count(cfg.k_t, n);
    if amount == 0 {
        return Ok(out);
    }
    let rng = CounterRng::new(seed);
    for i in sample_sorted(&mut rng.stream(STREAM_SELECT), n, amount) {
        let mut point_rng = rng.point(STREAM_POINT, i);
        let mut xi = [0f64; 4];
        for v in &mut xi {
            let o: f64 = StandardNormal.sample(&mut point_rng);
            *v = cfg.sigma_c * o;
        }
        let p = &mut out.cloud.xyz[i];
        for (c, o) in p.iter_mut().zip(&xi) {
            *c = (f64::from(*c) + o) as f32;
        }
        let v = f64::from(out.cloud.intensity[i]) + xi[3];
        out.cloud.intensity[i] = v.clamp(0.0, 1.0) as f32;
        out.provenance[i] = Provenance::JitteredCrosstalk;
        out.relabel(i, cfg.crosstalk_class);
    }
    Ok(out)
}
