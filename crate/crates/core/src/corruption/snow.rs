use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{CorruptedFrame, Frame, Provenance, STREAM_POINT};
use crate::error::{Error, Result};
use crate::geometry::range;
use crate::profile::SnowParams;
use crate::rng::CounterRng;

/// A snow flake on a ray, `distance` metres from the sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnowParticle {
    pub distance: f64,
    pub radius_m: f64,
}

/// Source of the nearest flake intersecting the ray of point `index`.
pub trait ParticleField {
    fn nearest_hit(&self, index: usize, ray_length: f64) -> Option<SnowParticle>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnowConfig {
    /// Snowfall rate (mm/h).
    pub rate: f64,
    /// Expected flakes per metre of ray per mm/h.
    pub particles_per_meter: f64,
    pub particle_radius_mm: [f64; 2],
    pub extinction_coeff: f64,
    pub extinction_exponent: f64,
    pub particle_reflectivity: f64,
    pub beam_divergence_rad: f64,
    pub snow_class: Option<u16>,
}

impl SnowConfig {
    pub fn from_profile(p: &SnowParams, level: usize, snow_class: Option<u16>) -> Self {
        SnowConfig {
            rate: p.rate_mm_per_h[level],
            particles_per_meter: p.particles_per_meter,
            particle_radius_mm: p.particle_radius_mm,
            extinction_coeff: p.extinction_coeff,
            extinction_exponent: p.extinction_exponent,
            particle_reflectivity: p.particle_reflectivity,
            beam_divergence_rad: p.beam_divergence_rad,
            snow_class,
        }
    }

    /// Extinction coefficient `c · r_s^e` (1/m).
    pub fn extinction(&self) -> f64 {
        if self.rate <= 0.0 {
            0.0
        } else {
            self.extinction_coeff * self.rate.powf(self.extinction_exponent)
        }
    }
}

/// Flakes drawn independently per ray: a Poisson number with mean
/// `particles_per_meter · rate · length`, each at a uniform distance with a
/// uniform radius.
#[derive(Debug, Clone)]
pub struct SampledParticles {
    rng: CounterRng,
    density: f64,
    radius_mm: [f64; 2],
}

impl SampledParticles {
    pub fn new(cfg: &SnowConfig, seed: u64) -> Self {
        SampledParticles {
            rng: CounterRng::new(seed),
            density: cfg.particles_per_meter * cfg.rate,
            radius_mm: cfg.particle_radius_mm,
        }
    }
}

impl ParticleField for SampledParticles {
    fn nearest_hit(&self, index: usize, ray_length: f64) -> Option<SnowParticle> {
        let mean = self.density * ray_length;
        if !(mean > 0.0) {
            return None;
        }
        let mut rng = self.rng.point(STREAM_POINT, index);
        let count = Poisson::new(mean).ok()?.sample(&mut rng) as u64;
        let [r_lo, r_hi] = self.radius_mm;
        (0..count)
            .map(|_| {
                let distance = rng.random_range(0.0..ray_length);
                let radius = if r_hi > r_lo { rng.random_range(r_lo..r_hi) } else { r_lo };
                SnowParticle {
                    distance,
                    radius_m: radius * 1e-3,
                }
            })
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
    }
}

pub fn apply_snow(frame: &Frame, cfg: &SnowConfig, seed: u64) -> Result<CorruptedFrame> {
    apply_snow_with(frame, cfg, &SampledParticles::new(cfg, seed))
}

/// Snowfall over an explicit particle field.
///
/// A ray whose nearest flake lies before its return is cut short there: the
/// point moves to the flake, takes the flake's echo (reflectivity scaled by
/// the share of the beam footprint it covers, then two-way extinction) and
/// the snow class. Every other point keeps its position and is attenuated by
/// `exp(−2·k·r)`.
pub fn apply_snow_with(frame: &Frame, cfg: &SnowConfig, field: &dyn ParticleField) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    if !(cfg.rate >= 0.0) {
        return Err(Error::Precondition(format!("snowfall rate must be non-negative, got {}", cfg.rate)));
    }
    let mut out = CorruptedFrame::unchanged(frame);
    if cfg.rate == 0.0 {
        return Ok(out);
    }
    let k = cfg.extinction();
    for i in 0..frame.cloud.len() {
        let p = frame.cloud.xyz[i];
        let r = range(p);
        match field.nearest_hit(i, r) {
            Some(flake) if flake.distance < r && flake.distance >= 0.0 => {
                let d = flake.distance;
                let footprint = (cfg.beam_divergence_rad * d / 2.0).max(1e-6);
                let coverage = (flake.radius_m / footprint).powi(2).min(1.0);
                let echo = cfg.particle_reflectivity * coverage * (-2.0 * k * d).exp();
                let scale = d / r;
                out.cloud.xyz[i] = p.map(|c| (f64::from(c) * scale) as f32);
                out.cloud.intensity[i] = echo.clamp(0.0, 1.0) as f32;
                out.provenance[i] = Provenance::InjectedSnow;
                out.relabel(i, cfg.snow_class);
            }
            _ => {
                let v = f64::from(frame.cloud.intensity[i]) * (-2.0 * k * r).exp();
                out.cloud.intensity[i] = v as f32;
            }
        }
    }
    Ok(out)
}
