use rand_distr::{Distribution, StandardNormal};

use super::{CorruptedFrame, Frame, STREAM_POINT};
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Adds independent `N(0, σ_t²)` offsets to x, y and z of every point.
/// Intensities, labels and the point count are unchanged.
pub fn apply_motion_blur(frame: &Frame, sigma_t: f64, seed: u64) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    if !(sigma_t >= 0.0) {
        return Err(Error::Precondition(format!("sigma_t must be non-negative, got {sigma_t}")));
    }
    let mut out = CorruptedFrame::unchanged(frame);
    if sigma_t == 0.0 {
        return Ok(out);
    }
    let rng = CounterRng::new(seed);
    for (i, p) in out.cloud.xyz.iter_mut().enumerate() {
        let mut point_rng = rng.point(STREAM_POINT, i);
        for c in p.iter_mut() {
            let o: f64 = StandardNormal.sample(&mut point_rng);
            *c = (f64::from(*c) + sigma_t * o) as f32;
        }
    }
    Ok(out)
}
