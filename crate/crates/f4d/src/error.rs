//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, F4dError>;

#[derive(Debug, Error)]
pub enum F4dError {
    #[error("grid resolution too small: need nu >= 4 and nv >= 4, got {nu}x{nv}")]
    ResolutionTooSmall { nu: usize, nv: usize },

    #[error("operands live on different grids ({aipu}x{aipv} vs {bipu}x{bipv})")]
    GridMismatch {
        aipu: usize,
        aipv: usize,
        bipu: usize,
        bipv: usize,
    },

    #[error("degenerate surface: total area {area:.3e} below threshold")]
    DegenerateSurface { area: f64 },

    #[error("time warp is not strictly increasing at sample {index}")]
    NonMonotoneWarp { index: usize },

    #[error("trajectory needs at least two frames, got {frames}")]
    DegenerateTimeGrid { frames: usize },

    #[error("gradient step underflow (step {step:.3e}); returning best iterate")]
    StepUnderflow { step: f64 },

    #[error("mode index {index} out of range (model keeps {k} components)")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("not enough data: {needed} items required, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("perturbation magnitude {magnitude} too large: no valid diffeomorphism in {attempts} draws")]
    MagnitudeTooLarge { magnitude: f64, attempts: usize },

    #[error("{path}: bad magic bytes (expected {expected:?})")]
    BadMagic { path: PathBuf, expected: [u8; 4] },

    #[error("{path}: unsupported schema version {found} (expected {expected})")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated or oversized file ({detail})")]
    TruncatedFile { path: PathBuf, detail: String },

    #[error("{path}: corrupt header (checksum mismatch)")]
    HeaderChecksum { path: PathBuf },

    #[error("sequence frames disagree on grid size: {path}")]
    GridMismatchAcrossFrames { path: PathBuf },

    #[error("diffeomorphism has non-positive Jacobian determinant (min {min_jac:.3e})")]
    InvalidDiffeo { min_jac: f64 },

    #[error("{path}: not a grid mesh ({detail})")]
    NotAGridMesh { path: PathBuf, detail: String },

    #[error("{path}: malformed manifest: {detail}")]
    BadManifest { path: PathBuf, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
