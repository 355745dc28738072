//! Geometric building blocks shared by the corruptions: ranges, ground
//! planes, beam partitions and voxel coordinates.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::io::{LabelArray, PointCloud};
use crate::profile::DatasetProfile;
use crate::rng::CounterRng;

/// Euclidean distance of a point from the sensor origin.
pub fn range(p: [f32; 3]) -> f64 {
    let [x, y, z] = p.map(f64::from);
    (x * x + y * y + z * z).sqrt()
}

/// Elevation angle in radians; zero at the origin.
pub fn elevation(p: [f32; 3]) -> f64 {
    let [x, y, z] = p.map(f64::from);
    z.atan2(x.hypot(y))
}

/// `a·x + b·y + c·z + d = 0` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl Plane {
    /// Horizontal plane `z = height`.
    pub fn horizontal(height: f64) -> Plane {
        Plane {
            normal: [0.0, 0.0, 1.0],
            offset: -height,
        }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        let [a, b, c] = self.normal;
        [a, b, c, self.offset]
    }

    pub fn signed_distance(&self, p: [f32; 3]) -> f64 {
        let [x, y, z] = p.map(f64::from);
        self.normal[0] * x + self.normal[1] * y + self.normal[2] * z + self.offset
    }

    fn from_points(a: [f32; 3], b: [f32; 3], c: [f32; 3]) -> Option<Plane> {
        let to_v = |p: [f32; 3]| Vector3::new(f64::from(p[0]), f64::from(p[1]), f64::from(p[2]));
        let (a, b, c) = (to_v(a), to_v(b), to_v(c));
        let n = (b - a).cross(&(c - a));
        let scale = (b - a).norm() * (c - a).norm();
        if scale == 0.0 || n.norm() <= 1e-12 * scale {
            return None;
        }
        Some(Plane::oriented(n.normalize(), a))
    }

    fn oriented(normal: Vector3<f64>, through: Vector3<f64>) -> Plane {
        let normal = if normal.z < 0.0 { -normal } else { normal };
        Plane {
            normal: [normal.x, normal.y, normal.z],
            offset: -normal.dot(&through),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundSource {
    SemanticLabels,
    Ransac,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundModel {
    pub plane: Plane,
    pub inlier_mask: Vec<bool>,
    pub source: GroundSource,
}

impl GroundModel {
    pub fn inlier_count(&self) -> usize {
        self.inlier_mask.iter().filter(|&&m| m).count()
    }
}

/// RANSAC ground plane over sampled point triples, followed by a
/// least-squares refit on the winning inlier set.
///
/// The refit is kept only if it does not lose inliers. Normals point up
/// (`c >= 0`).
pub fn fit_ground_ransac(
    pc: &PointCloud,
    iterations: u32,
    inlier_threshold: f64,
    seed: u64,
) -> Result<GroundModel> {
    let n = pc.len();
    if n < 3 {
        return Err(Error::NoPlane(format!("{n} points, need at least 3")));
    }
    let mut rng = CounterRng::new(seed).stream(0);
    let count_inliers = |plane: &Plane| {
        pc.xyz
            .iter()
            .filter(|p| plane.signed_distance(**p).abs() <= inlier_threshold)
            .count()
    };

    let mut best: Option<(Plane, usize)> = None;
    for _ in 0..iterations.max(1) {
        let s = index::sample(&mut rng, n, 3);
        let Some(plane) = Plane::from_points(pc.xyz[s.index(0)], pc.xyz[s.index(1)], pc.xyz[s.index(2)])
        else {
            continue;
        };
        let count = count_inliers(&plane);
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((plane, count));
        }
    }
    let (mut plane, mut count) =
        best.ok_or_else(|| Error::NoPlane("every sampled triple was degenerate".into()))?;

    let inliers: Vec<[f32; 3]> = pc
        .xyz
        .iter()
        .copied()
        .filter(|p| plane.signed_distance(*p).abs() <= inlier_threshold)
        .collect();
    if let Some(refit) = fit_plane_least_squares(&inliers) {
        let refit_count = count_inliers(&refit);
        if refit_count >= count {
            plane = refit;
            count = refit_count;
        }
    }
    let inlier_mask: Vec<bool> = pc
        .xyz
        .iter()
        .map(|p| plane.signed_distance(*p).abs() <= inlier_threshold)
        .collect();
    debug_assert_eq!(inlier_mask.iter().filter(|&&m| m).count(), count);
    Ok(GroundModel {
        plane,
        inlier_mask,
        source: GroundSource::Ransac,
    })
}

/// Total-least-squares plane (smallest principal axis of the covariance).
pub fn fit_plane_least_squares(points: &[[f32; 3]]) -> Option<Plane> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| {
        acc + Vector3::new(f64::from(p[0]), f64::from(p[1]), f64::from(p[2]))
    }) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])) - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // Collinear (or coincident) points leave two near-zero eigenvalues.
    let spread = eig.eigenvalues[order[2]].max(0.0);
    if spread == 0.0 || eig.eigenvalues[order[1]] <= 1e-12 * spread {
        return None;
    }
    let normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    Some(Plane::oriented(normal, centroid))
}

/// True exactly where the semantic label is one of the profile's ground classes.
pub fn ground_mask_from_labels(labels: &LabelArray, profile: &DatasetProfile) -> Vec<bool> {
    labels
        .semantic
        .iter()
        .map(|&s| profile.is_ground_class(s))
        .collect()
}

/// Ground model whose mask comes from semantic labels and whose plane is
/// the least-squares fit to the masked points. Falls back to the
/// horizontal plane through the masked points' mean height (or `z = 0`)
/// when fewer than three non-collinear ground points exist.
pub fn ground_from_labels(
    pc: &PointCloud,
    labels: &LabelArray,
    profile: &DatasetProfile,
) -> Result<GroundModel> {
    if labels.len() != pc.len() {
        return Err(Error::LengthMismatch {
            expected: pc.len(),
            actual: labels.len(),
        });
    }
    let mask = ground_mask_from_labels(labels, profile);
    let points: Vec<[f32; 3]> = pc
        .xyz
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| *p)
        .collect();
    let plane = fit_plane_least_squares(&points).unwrap_or_else(|| {
        let mean_z = if points.is_empty() {
            0.0
        } else {
            points.iter().map(|p| f64::from(p[2])).sum::<f64>() / points.len() as f64
        };
        Plane::horizontal(mean_z)
    });
    Ok(GroundModel {
        plane,
        inlier_mask: mask,
        source: GroundSource::SemanticLabels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamMethod {
    RingChannel,
    ElevationQuantization,
}

/// Assignment of every point to one laser beam.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamPartition {
    pub beam_of: Vec<u16>,
    pub beam_count: u32,
    pub method: BeamMethod,
}

impl BeamPartition {
    /// Point indices grouped by beam, each group in original point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.beam_count as usize];
        for (i, &b) in self.beam_of.iter().enumerate() {
            groups[b as usize].push(i);
        }
        groups
    }
}

pub fn partition_beams(pc: &PointCloud, profile: &DatasetProfile) -> Result<BeamPartition> {
    partition_beams_with_count(pc, Some(profile.beam_count))
}

/// Uses the ring channel verbatim when present. Otherwise sorts points by
/// descending elevation and cuts the order into `beam_count` equal-count
/// quantile bins, so beam 0 is the highest.
pub fn partition_beams_with_count(pc: &PointCloud, beam_count: Option<u32>) -> Result<BeamPartition> {
    if let Some(ring) = &pc.ring {
        let observed = ring.iter().map(|&r| u32::from(r) + 1).max().unwrap_or(0);
        let beam_count = beam_count.unwrap_or(observed).max(observed);
        return Ok(BeamPartition {
            beam_of: ring.clone(),
            beam_count,
            method: BeamMethod::RingChannel,
        });
    }
    let beam_count = match beam_count {
        Some(b) if b > 0 => b,
        _ => return Err(Error::CannotPartition),
    };
    let n = pc.len();
    let elev: Vec<f64> = pc.xyz.iter().map(|p| elevation(*p)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| elev[b].total_cmp(&elev[a]).then(a.cmp(&b)));
    let mut beam_of = vec![0u16; n];
    for (rank, &i) in order.iter().enumerate() {
        beam_of[i] = (rank as u64 * u64::from(beam_count) / n as u64) as u16;
    }
    Ok(BeamPartition {
        beam_of,
        beam_count,
        method: BeamMethod::ElevationQuantization,
    })
}

/// Voxel edge lengths and the half-width of their per-frame jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelConfig {
    pub size: [f64; 3],
    pub gamma: f64,
}

impl VoxelConfig {
    pub fn new(size: [f64; 3], gamma: f64) -> Result<Self> {
        if !size.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::InvalidVoxelConfig(format!("sizes must be positive: {size:?}")));
        }
        let min = size.iter().copied().fold(f64::INFINITY, f64::min);
        if !(gamma >= 0.0 && gamma < min / 2.0) {
            return Err(Error::InvalidVoxelConfig(format!(
                "gamma {gamma} must lie in [0, {})",
                min / 2.0
            )));
        }
        Ok(VoxelConfig { size, gamma })
    }

    pub fn cubic(size: f64, gamma: f64) -> Result<Self> {
        Self::new([size; 3], gamma)
    }
}

pub fn voxelize_fixed(pc: &PointCloud, cfg: &VoxelConfig) -> Vec<[i32; 3]> {
    voxelize_with_sizes(pc, cfg.size)
}

/// Voxelizes with sizes `l + dv`, one `dv ~ U(−γ, γ)³` drawn per call.
/// Returns the coordinates and the sizes used.
pub fn voxelize_flexible(pc: &PointCloud, cfg: &VoxelConfig, seed: u64) -> (Vec<[i32; 3]>, [f64; 3]) {
    let sizes = sample_flexible_sizes(cfg, seed);
    (voxelize_with_sizes(pc, sizes), sizes)
}

pub fn sample_flexible_sizes(cfg: &VoxelConfig, seed: u64) -> [f64; 3] {
    let mut rng = CounterRng::new(seed).stream(0);
    cfg.size.map(|l| {
        let u: f64 = rng.random();
        l + cfg.gamma * (2.0 * u - 1.0)
    })
}

pub fn voxelize_with_sizes(pc: &PointCloud, sizes: [f64; 3]) -> Vec<[i32; 3]> {
    pc.xyz
        .iter()
        .map(|p| {
            [
                (f64::from(p[0]) / sizes[0]).floor() as i32,
                (f64::from(p[1]) / sizes[1]).floor() as i32,
                (f64::from(p[2]) / sizes[2]).floor() as i32,
            ]
        })
        .collect()
}
