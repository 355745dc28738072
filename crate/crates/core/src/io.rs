//! Scan and label codecs for the on-disk formats used by the benchmark
//! datasets, plus directory-level frame iteration.
//!
//! ```text
//! KITTI scan       [x y z intensity]       × N   f32 LE, 16 B/point
//! nuScenes scan    [x y z intensity ring]  × N   f32 LE, 20 B/point
//! SemanticKITTI    [semantic | instance<<16] × N u32 LE,  4 B/point
//! ```

use std::f32::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::profile::{DatasetProfile, Layout};

/// Ring count of the nuScenes sensor.
pub const NUSCENES_BEAMS: u32 = 32;

const KITTI_STRIDE: usize = 16;
const NUSCENES_STRIDE: usize = 20;

/// A single LiDAR sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub xyz: Vec<[f32; 3]>,
    pub intensity: Vec<f32>,
    pub ring: Option<Vec<u16>>,
    pub frame_id: String,
}

impl PointCloud {
    pub fn new(xyz: Vec<[f32; 3]>, intensity: Vec<f32>) -> Result<Self> {
        if xyz.len() != intensity.len() {
            return Err(Error::LengthMismatch {
                expected: xyz.len(),
                actual: intensity.len(),
            });
        }
        Ok(PointCloud {
            xyz,
            intensity,
            ring: None,
            frame_id: String::new(),
        })
    }

    pub fn with_ring(mut self, ring: Vec<u16>) -> Result<Self> {
        if ring.len() != self.xyz.len() {
            return Err(Error::LengthMismatch {
                expected: self.xyz.len(),
                actual: ring.len(),
            });
        }
        self.ring = Some(ring);
        Ok(self)
    }

    pub fn with_frame_id(mut self, frame_id: impl Into<String>) -> Self {
        self.frame_id = frame_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.xyz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xyz.is_empty()
    }

    /// Keeps the points at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            xyz: indices.iter().map(|&i| self.xyz[i]).collect(),
            intensity: indices.iter().map(|&i| self.intensity[i]).collect(),
            ring: self
                .ring
                .as_ref()
                .map(|r| indices.iter().map(|&i| r[i]).collect()),
            frame_id: self.frame_id.clone(),
        }
    }

    /// Checks the finiteness and alignment invariants.
    pub fn validate(&self) -> Result<()> {
        if self.intensity.len() != self.xyz.len() {
            return Err(Error::LengthMismatch {
                expected: self.xyz.len(),
                actual: self.intensity.len(),
            });
        }
        if let Some(ring) = &self.ring {
            if ring.len() != self.xyz.len() {
                return Err(Error::LengthMismatch {
                    expected: self.xyz.len(),
                    actual: ring.len(),
                });
            }
        }
        for (index, (p, i)) in self.xyz.iter().zip(&self.intensity).enumerate() {
            if !(p.iter().all(|v| v.is_finite()) && i.is_finite()) {
                return Err(Error::CorruptScan { index });
            }
        }
        Ok(())
    }

    pub fn scale_intensity(&mut self, factor: f32) {
        if factor != 1.0 {
            self.intensity.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

/// Per-point semantic and instance labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelArray {
    pub semantic: Vec<u16>,
    pub instance: Vec<u16>,
}

impl LabelArray {
    pub fn new(semantic: Vec<u16>, instance: Vec<u16>) -> Result<Self> {
        if semantic.len() != instance.len() {
            return Err(Error::LengthMismatch {
                expected: semantic.len(),
                actual: instance.len(),
            });
        }
        Ok(LabelArray { semantic, instance })
    }

    pub fn from_semantic(semantic: Vec<u16>) -> Self {
        let instance = vec![0; semantic.len()];
        LabelArray { semantic, instance }
    }

    pub fn len(&self) -> usize {
        self.semantic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantic.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> LabelArray {
        LabelArray {
            semantic: indices.iter().map(|&i| self.semantic[i]).collect(),
            instance: indices.iter().map(|&i| self.instance[i]).collect(),
        }
    }

    pub fn packed(&self, i: usize) -> u32 {
        u32::from(self.semantic[i]) | (u32::from(self.instance[i]) << 16)
    }
}

/// An oriented 3D box in the LiDAR frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub center: [f32; 3],
    /// Length (along heading), width, height.
    pub dims: [f32; 3],
    /// Heading about +z, in (−π, π].
    pub yaw: f32,
    pub class_id: u16,
}

impl BoundingBox {
    pub fn contains(&self, p: [f32; 3]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let dz = p[2] - self.center[2];
        let (s, c) = self.yaw.sin_cos();
        let local_x = c * dx + s * dy;
        let local_y = -s * dx + c * dy;
        local_x.abs() <= self.dims[0] / 2.0
            && local_y.abs() <= self.dims[1] / 2.0
            && dz.abs() <= self.dims[2] / 2.0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoxSet {
    pub boxes: Vec<BoundingBox>,
}

/// KITTI object classes, in class-id order.
pub const KITTI_CLASSES: [&str; 8] = [
    "Car",
    "Van",
    "Truck",
    "Pedestrian",
    "Person_sitting",
    "Cyclist",
    "Tram",
    "Misc",
];

pub fn read_kitti_scan(bytes: &[u8]) -> Result<PointCloud> {
    if !bytes.len().is_multiple_of(KITTI_STRIDE) {
        return Err(Error::MalformedScan {
            len: bytes.len(),
            stride: KITTI_STRIDE,
        });
    }
    let n = bytes.len() / KITTI_STRIDE;
    let mut xyz = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    for (index, chunk) in bytes.chunks_exact(KITTI_STRIDE).enumerate() {
        let v = decode_f32s::<4>(chunk);
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::CorruptScan { index });
        }
        xyz.push([v[0], v[1], v[2]]);
        intensity.push(v[3]);
    }
    Ok(PointCloud {
        xyz,
        intensity,
        ring: None,
        frame_id: String::new(),
    })
}

pub fn write_kitti_scan(pc: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(pc.len() * KITTI_STRIDE);
    for (p, i) in pc.xyz.iter().zip(&pc.intensity) {
        for v in [p[0], p[1], p[2], *i] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_nuscenes_scan(bytes: &[u8]) -> Result<PointCloud> {
    read_ring_scan(bytes, NUSCENES_BEAMS)
}

/// Reads `[x y z intensity ring]` records, validating `ring < beam_count`.
pub fn read_ring_scan(bytes: &[u8], beam_count: u32) -> Result<PointCloud> {
    if !bytes.len().is_multiple_of(NUSCENES_STRIDE) {
        return Err(Error::MalformedScan {
            len: bytes.len(),
            stride: NUSCENES_STRIDE,
        });
    }
    let n = bytes.len() / NUSCENES_STRIDE;
    let mut xyz = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    let mut ring = Vec::with_capacity(n);
    for (index, chunk) in bytes.chunks_exact(NUSCENES_STRIDE).enumerate() {
        let v = decode_f32s::<5>(chunk);
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::CorruptScan { index });
        }
        let r = v[4].round();
        if !(r >= 0.0 && r < beam_count as f32) {
            return Err(Error::RingOutOfRange {
                index,
                value: v[4],
                beam_count,
            });
        }
        xyz.push([v[0], v[1], v[2]]);
        intensity.push(v[3]);
        ring.push(r as u16);
    }
    Ok(PointCloud {
        xyz,
        intensity,
        ring: Some(ring),
        frame_id: String::new(),
    })
}

/// Writes `[x y z intensity ring]` records; a missing ring channel is written as 0.
pub fn write_nuscenes_scan(pc: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(pc.len() * NUSCENES_STRIDE);
    for (idx, (p, i)) in pc.xyz.iter().zip(&pc.intensity).enumerate() {
        let ring = pc.ring.as_ref().map_or(0.0, |r| f32::from(r[idx]));
        for v in [p[0], p[1], p[2], *i, ring] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_semkitti_labels(bytes: &[u8]) -> Result<LabelArray> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::MalformedLabels { len: bytes.len() });
    }
    let (semantic, instance) = bytes
        .chunks_exact(4)
        .map(|c| {
            let word = u32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            ((word & 0xFFFF) as u16, (word >> 16) as u16)
        })
        .unzip();
    Ok(LabelArray { semantic, instance })
}

pub fn write_semkitti_labels(labels: &LabelArray) -> Vec<u8> {
    let mut out = Vec::with_capacity(labels.len() * 4);
    for i in 0..labels.len() {
        out.extend_from_slice(&labels.packed(i).to_le_bytes());
    }
    out
}

/// Parses KITTI object labels (`label_2/*.txt`) into LiDAR-frame boxes.
///
/// Only type, dimensions, location and `rotation_y` are used. Camera
/// coordinates are mapped to the LiDAR frame by the nominal axis permutation
/// (x_l = z_c, y_l = −x_c, z_l = −y_c) without per-sequence calibration.
/// `DontCare` rows are skipped.
pub fn parse_kitti_boxes(text: &str) -> Result<BoxSet> {
    let mut boxes = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0] == "DontCare" {
            continue;
        }
        if fields.len() < 15 {
            return Err(Error::MalformedBoxes {
                line: line_no,
                reason: format!("expected at least 15 fields, got {}", fields.len()),
            });
        }
        let class_id = KITTI_CLASSES
            .iter()
            .position(|c| *c == fields[0])
            .ok_or_else(|| Error::MalformedBoxes {
                line: line_no,
                reason: format!("unknown class {:?}", fields[0]),
            })? as u16;
        let num = |i: usize| -> Result<f32> {
            fields[i]
                .parse::<f32>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::MalformedBoxes {
                    line: line_no,
                    reason: format!("field {i} is not a finite number: {:?}", fields[i]),
                })
        };
        let (h, w, l) = (num(8)?, num(9)?, num(10)?);
        let (cx, cy, cz) = (num(11)?, num(12)?, num(13)?);
        let ry = num(14)?;
        if !(h > 0.0 && w > 0.0 && l > 0.0) {
            return Err(Error::MalformedBoxes {
                line: line_no,
                reason: "box dimensions must be positive".into(),
            });
        }
        // Camera-frame location is the bottom face centre.
        boxes.push(BoundingBox {
            center: [cz, -cx, -cy + h / 2.0],
            dims: [l, w, h],
            yaw: wrap_angle(-ry - PI / 2.0),
            class_id,
        });
    }
    Ok(BoxSet { boxes })
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f32) -> f32 {
    let two_pi = 2.0 * PI;
    let mut w = a % two_pi;
    if w <= -PI {
        w += two_pi;
    } else if w > PI {
        w -= two_pi;
    }
    w
}

fn decode_f32s<const K: usize>(chunk: &[u8]) -> [f32; K] {
    let mut v = [0f32; K];
    for (slot, b) in v.iter_mut().zip(chunk.chunks_exact(4)) {
        *slot = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
    }
    v
}

/// One frame read from a dataset directory.
#[derive(Debug, Clone)]
pub struct DatasetFrame {
    pub frame_id: String,
    /// Relative path of the scan under the dataset root, e.g. `velodyne/000000.bin`.
    pub scan_path: PathBuf,
    /// Relative path where this frame's labels live (or would live).
    pub label_path: PathBuf,
    /// Relative path of the box file, when one was read.
    pub box_path: Option<PathBuf>,
    pub cloud: PointCloud,
    pub labels: Option<LabelArray>,
    pub boxes: Option<BoxSet>,
}

/// Lazily reads every frame under `root`, in lexicographic frame-id order.
///
/// Intensities are divided by `profile.intensity_scale` when
/// `profile.normalize_intensity` is set.
pub fn iterate_dataset(root: &Path, profile: &DatasetProfile) -> Result<DatasetIter> {
    let scan_dir = match profile.layout {
        Layout::SemanticKitti => root.join("velodyne"),
        Layout::Flat => root.to_path_buf(),
    };
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root is not a directory"),
        ));
    }
    let mut stems = Vec::new();
    if scan_dir.is_dir() {
        for entry in fs::read_dir(&scan_dir).map_err(|e| Error::io(&scan_dir, e))? {
            let entry = entry.map_err(|e| Error::io(&scan_dir, e))?;
            let path = entry.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "bin") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    stems.push(stem.to_string());
                }
            }
        }
    }
    stems.sort();
    Ok(DatasetIter {
        root: root.to_path_buf(),
        profile: profile.clone(),
        stems: stems.into_iter(),
    })
}

pub struct DatasetIter {
    root: PathBuf,
    profile: DatasetProfile,
    stems: std::vec::IntoIter<String>,
}

impl DatasetIter {
    /// Frame ids not yet yielded, in order.
    pub fn remaining(&self) -> &[String] {
        self.stems.as_slice()
    }

    /// Reads one frame by id, independent of iteration state.
    pub fn load(&self, stem: &str) -> Result<DatasetFrame> {
        let (scan_rel, label_rel) = match self.profile.layout {
            Layout::SemanticKitti => (
                Path::new("velodyne").join(format!("{stem}.bin")),
                Path::new("labels").join(format!("{stem}.label")),
            ),
            Layout::Flat => (
                PathBuf::from(format!("{stem}.bin")),
                PathBuf::from(format!("{stem}.label")),
            ),
        };
        let scan_path = self.root.join(&scan_rel);
        let bytes = fs::read(&scan_path).map_err(|e| Error::io(&scan_path, e))?;
        let mut cloud = if self.profile.ring_channel {
            read_ring_scan(&bytes, self.profile.beam_count)?
        } else {
            read_kitti_scan(&bytes)?
        };
        cloud.frame_id = stem.to_string();
        if self.profile.normalize_intensity {
            cloud.scale_intensity(1.0 / self.profile.intensity_scale);
        }

        let label_path = self.root.join(&label_rel);
        let labels = if label_path.is_file() {
            let bytes = fs::read(&label_path).map_err(|e| Error::io(&label_path, e))?;
            let labels = read_semkitti_labels(&bytes)?;
            if labels.len() != cloud.len() {
                return Err(Error::LengthMismatch {
                    expected: cloud.len(),
                    actual: labels.len(),
                });
            }
            Some(labels)
        } else if self.profile.requires_labels {
            return Err(Error::Pairing {
                frame_id: stem.to_string(),
                path: label_path,
            });
        } else {
            None
        };

        let box_rel = scan_rel.with_extension("txt");
        let box_path = self.root.join(&box_rel);
        let boxes = if box_path.is_file() {
            let text = fs::read_to_string(&box_path).map_err(|e| Error::io(&box_path, e))?;
            Some(parse_kitti_boxes(&text)?)
        } else {
            None
        };

        Ok(DatasetFrame {
            frame_id: stem.to_string(),
            scan_path: scan_rel,
            label_path: label_rel,
            box_path: boxes.is_some().then_some(box_rel),
            cloud,
            labels,
            boxes,
        })
    }
}

impl Iterator for DatasetIter {
    type Item = Result<DatasetFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        let stem = self.stems.next()?;
        Some(self.load(&stem))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.stems.size_hint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::DatasetName;
    use proptest::prelude::*;

    fn encode(values: &[f32]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn kitti_zero_point() {
        let pc = read_kitti_scan(&[0u8; 16]).unwrap();
        assert_eq!(pc.len(), 1);
        assert_eq!(pc.xyz[0], [0.0, 0.0, 0.0]);
        assert_eq!(pc.intensity[0], 0.0);
        assert!(pc.ring.is_none());
    }

    #[test]
    fn kitti_empty() {
        let pc = read_kitti_scan(&[]).unwrap();
        assert!(pc.is_empty());
        assert!(write_kitti_scan(&pc).is_empty());
    }

    #[test]
    fn kitti_known_point_round_trips() {
        let bytes = encode(&[1.0, 2.0, 3.0, 0.5]);
        let pc = read_kitti_scan(&bytes).unwrap();
        assert_eq!(pc.xyz[0], [1.0, 2.0, 3.0]);
        assert_eq!(pc.intensity[0], 0.5);
        assert_eq!(write_kitti_scan(&pc), bytes);
        assert_eq!(write_kitti_scan(&pc).len(), 16);
    }

    #[test]
    fn kitti_malformed_and_corrupt() {
        assert!(matches!(
            read_kitti_scan(&[0u8; 17]),
            Err(Error::MalformedScan { len: 17, stride: 16 })
        ));
        let bytes = encode(&[0.0, 0.0, 0.0, 0.0, 1.0, f32::NAN, 0.0, 0.0]);
        assert!(matches!(read_kitti_scan(&bytes), Err(Error::CorruptScan { index: 1 })));
        let bytes = encode(&[f32::INFINITY, 0.0, 0.0, 0.0]);
        assert!(matches!(read_kitti_scan(&bytes), Err(Error::CorruptScan { index: 0 })));
    }

    #[test]
    fn nuscenes_ring_bounds() {
        let pc = read_nuscenes_scan(&[0u8; 20]).unwrap();
        assert_eq!(pc.ring.as_deref(), Some(&[0u16][..]));

        let pc = read_nuscenes_scan(&encode(&[1.0, 2.0, 3.0, 4.0, 31.0])).unwrap();
        assert_eq!(pc.ring.as_deref(), Some(&[31u16][..]));

        let err = read_nuscenes_scan(&encode(&[1.0, 2.0, 3.0, 4.0, 32.0])).unwrap_err();
        assert!(matches!(err, Error::RingOutOfRange { index: 0, .. }));
        assert!(read_nuscenes_scan(&encode(&[0.0, 0.0, 0.0, 0.0, -1.0])).is_err());
        assert!(matches!(
            read_nuscenes_scan(&[0u8; 16]),
            Err(Error::MalformedScan { stride: 20, .. })
        ));
    }

    #[test]
    fn nuscenes_ring_rounds_to_nearest() {
        let pc = read_nuscenes_scan(&encode(&[0.0, 0.0, 0.0, 0.0, 6.6])).unwrap();
        assert_eq!(pc.ring.unwrap()[0], 7);
    }

    #[test]
    fn label_bit_layout() {
        let l = read_semkitti_labels(&0u32.to_le_bytes()).unwrap();
        assert_eq!((l.semantic[0], l.instance[0]), (0, 0));
        let l = read_semkitti_labels(&0x0002_0001u32.to_le_bytes()).unwrap();
        assert_eq!((l.semantic[0], l.instance[0]), (1, 2));
        let l = read_semkitti_labels(&0xFFFF_0028u32.to_le_bytes()).unwrap();
        assert_eq!((l.semantic[0], l.instance[0]), (40, 0xFFFF));
        assert!(matches!(
            read_semkitti_labels(&[0u8; 6]),
            Err(Error::MalformedLabels { len: 6 })
        ));
    }

    #[test]
    fn label_writer_mirrors_reader() {
        let labels = LabelArray::new(vec![0, 1, 40], vec![0, 2, 7]).unwrap();
        let bytes = write_semkitti_labels(&labels);
        assert_eq!(&bytes[4..8], &0x0002_0001u32.to_le_bytes());
        assert_eq!(read_semkitti_labels(&bytes).unwrap(), labels);
        assert!(write_semkitti_labels(&LabelArray::default()).is_empty());
    }

    #[test]
    fn kitti_box_parsing() {
        let text = "Car 0.00 0 -1.58 587.0 173.3 614.1 200.1 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59\n\
                    DontCare -1 -1 -10 0 0 0 0 -1 -1 -1 -1000 -1000 -1000 -10\n";
        let set = parse_kitti_boxes(text).unwrap();
        assert_eq!(set.boxes.len(), 1);
        let b = set.boxes[0];
        assert_eq!(b.class_id, 0);
        assert_eq!(b.dims, [3.64, 1.67, 1.65]);
        assert!((b.center[0] - 46.70).abs() < 1e-5);
        assert!((b.center[1] - 0.65).abs() < 1e-5);
        assert!((b.center[2] - (-1.71 + 0.825)).abs() < 1e-5);
        assert!(b.yaw > -PI && b.yaw <= PI);
        assert!(b.contains(b.center));

        assert!(parse_kitti_boxes("Car 1 2 3").is_err());
        assert!(parse_kitti_boxes("Boat 0 0 0 0 0 0 0 1 1 1 0 0 0 0").is_err());
        assert!(parse_kitti_boxes("Car 0 0 0 0 0 0 0 0 1 1 0 0 0 0").is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-6);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-5);
        assert_eq!(wrap_angle(0.5), 0.5);
    }

    #[test]
    fn box_contains_respects_yaw() {
        let b = BoundingBox {
            center: [0.0, 0.0, 0.0],
            dims: [4.0, 1.0, 2.0],
            yaw: std::f32::consts::FRAC_PI_2,
            class_id: 0,
        };
        assert!(b.contains([0.0, 1.9, 0.0]));
        assert!(!b.contains([1.9, 0.0, 0.0]));
    }

    #[test]
    fn empty_dataset_directory() {
        let dir = tempfile::tempdir().unwrap();
        let profile = DatasetProfile::builtin(DatasetName::Kitti);
        assert_eq!(iterate_dataset(dir.path(), &profile).unwrap().count(), 0);
        let profile = DatasetProfile::builtin(DatasetName::SemanticKitti);
        assert_eq!(iterate_dataset(dir.path(), &profile).unwrap().count(), 0);
    }

    #[test]
    fn dataset_order_and_pairing() {
        let dir = tempfile::tempdir().unwrap();
        let vel = dir.path().join("velodyne");
        let lab = dir.path().join("labels");
        fs::create_dir_all(&vel).unwrap();
        fs::create_dir_all(&lab).unwrap();
        fs::write(vel.join("000001.bin"), encode(&[1.0, 0.0, 0.0, 0.5])).unwrap();
        fs::write(vel.join("000000.bin"), encode(&[2.0, 0.0, 0.0, 0.5])).unwrap();
        fs::write(lab.join("000000.label"), 40u32.to_le_bytes()).unwrap();
        fs::write(lab.join("000001.label"), 10u32.to_le_bytes()).unwrap();

        let profile = DatasetProfile::builtin(DatasetName::SemanticKitti);
        let frames: Vec<_> = iterate_dataset(dir.path(), &profile)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        let ids: Vec<_> = frames.iter().map(|f| f.frame_id.as_str()).collect();
        assert_eq!(ids, ["000000", "000001"]);
        assert_eq!(frames[0].cloud.xyz[0][0], 2.0);
        assert_eq!(frames[0].labels.as_ref().unwrap().semantic, vec![40]);
        for f in &frames {
            assert_eq!(f.labels.as_ref().unwrap().len(), f.cloud.len());
        }

        fs::remove_file(lab.join("000001.label")).unwrap();
        let results: Vec<_> = iterate_dataset(dir.path(), &profile).unwrap().collect();
        assert!(results[0].is_ok());
        match &results[1] {
            Err(Error::Pairing { frame_id, .. }) => assert_eq!(frame_id, "000001"),
            other => panic!("expected pairing error, got {other:?}"),
        }
    }

    #[test]
    fn nuscenes_intensity_is_normalized_on_read() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.bin"), encode(&[1.0, 0.0, 0.0, 255.0, 3.0])).unwrap();
        let profile = DatasetProfile::builtin(DatasetName::NuScenes);
        let frame = iterate_dataset(dir.path(), &profile).unwrap().next().unwrap().unwrap();
        assert_eq!(frame.cloud.intensity, vec![1.0]);
        assert_eq!(frame.cloud.ring, Some(vec![3]));
        assert!(frame.labels.is_none());
    }

    proptest! {
        #[test]
        fn kitti_bytes_round_trip(words in proptest::collection::vec(-1.0e6f32..1.0e6, 0..64)) {
            let n = words.len() / 4 * 4;
            let bytes = encode(&words[..n]);
            let pc = read_kitti_scan(&bytes).unwrap();
            prop_assert_eq!(write_kitti_scan(&pc), bytes);
        }

        #[test]
        fn label_words_round_trip(words in proptest::collection::vec(any::<u32>(), 0..64)) {
            let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
            let labels = read_semkitti_labels(&bytes).unwrap();
            prop_assert_eq!(write_semkitti_labels(&labels), bytes);
        }
    }
}
