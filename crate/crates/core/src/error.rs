use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed scan: {len} bytes is not a multiple of {stride}")]
    MalformedScan { len: usize, stride: usize },

    #[error("corrupt scan: non-finite value at point {index}")]
    CorruptScan { index: usize },

    #[error("ring value {value} at point {index} outside [0, {beam_count})")]
    RingOutOfRange {
        index: usize,
        value: f32,
        beam_count: u32,
    },

    #[error("malformed label file: {len} bytes is not a multiple of 4")]
    MalformedLabels { len: usize },

    #[error("malformed box label on line {line}: {reason}")]
    MalformedBoxes { line: usize, reason: String },

    #[error("frame {frame_id}: missing paired label file {path}")]
    Pairing { frame_id: String, path: PathBuf },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("no plane could be fitted: {0}")]
    NoPlane(String),

    #[error("cannot partition beams: no ring channel and no beam count")]
    CannotPartition,

    #[error("invalid voxel configuration: {0}")]
    InvalidVoxelConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: u32, num_classes: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("incomplete accuracy record for model {model}: {reason}")]
    IncompleteRecord { model: String, reason: String },

    #[error("unknown format {0:?}")]
    UnknownFormat(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
