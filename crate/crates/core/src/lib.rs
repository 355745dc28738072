//! LiDAR corruption generation, robustness metrics and density-consistency
//! kernels.
//!
//! The crate is organised around the objects a robustness study moves
//! through: scans and labels ([`io`]), dataset constants ([`profile`]),
//! geometric helpers ([`geometry`]), the corruption operators
//! ([`corruption`]), accuracy arithmetic ([`metrics`]) and the loss kernels
//! used for density-insensitive training ([`consistency`]).

// `!(x >= 0.0)` style checks are used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consistency;
pub mod corruption;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod profile;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::{BeamPartition, GroundModel, Plane, VoxelConfig};
pub use io::{BoundingBox, BoxSet, LabelArray, PointCloud};
pub use metrics::{AccuracyRecord, ConfusionMatrix, ReportFormat, RobustnessReport};
pub use consistency::{MaskSelection, PredictionField};
pub use corruption::{apply, resolved_parameters, CorruptedFrame, CorruptionSpec, Frame, Provenance};
pub use profile::{CorruptionKind, DatasetName, DatasetProfile, Severity};
