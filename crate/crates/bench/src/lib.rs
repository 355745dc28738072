//! Synthetic scans for the throughput benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustscan_core::corruption::Frame;
use robustscan_core::{LabelArray, PointCloud};

/// A 64-beam scan of `beams × per_beam` points with ground, car and building labels.
pub fn scan(per_beam: usize, seed: u64) -> Frame {
    let beams = 64u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = beams as usize * per_beam;
    let mut xyz = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for b in 0..beams {
        let elev = (2.0 - 26.8 * f64::from(b) / f64::from(beams - 1)).to_radians();
        for j in 0..per_beam {
            let az = std::f64::consts::TAU * j as f64 / per_beam as f64;
            let r: f64 = rng.random_range(4.0..70.0);
            xyz.push([
                (r * elev.cos() * az.cos()) as f32,
                (r * elev.cos() * az.sin()) as f32,
                (r * elev.sin()) as f32,
            ]);
            labels.push(if b > 52 { 40 } else if j % 7 == 0 { 10 } else { 50 });
        }
    }
    let intensity = (0..n).map(|_| rng.random_range(0.0f32..1.0)).collect();
    let cloud = PointCloud::new(xyz, intensity).unwrap().with_frame_id(format!("{seed:06}"));
    Frame::new(cloud).with_labels(LabelArray::from_semantic(labels)).unwrap()
}
