use thiserror::Error;

use crate::geometry::Point2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate position {position}: within {tolerance} m of {anchor}")]
    DegeneratePosition {
        position: Point2,
        anchor: &'static str,
        tolerance: f64,
    },
    #[error("position {position} is on or behind the wall at y = {wall_offset} m")]
    BeyondWall { position: Point2, wall_offset: f64 },
    #[error("scene has no reflecting surface")]
    MissingReflector,
    #[error("scene has no scatter point")]
    MissingScatterer,
    #[error("phase profile has {got} entries, RIS has {expected} elements")]
    ProfileLength { expected: usize, got: usize },
    #[error("RIS index {index} out of range (scene has {count} RIS)")]
    RisIndex { index: usize, count: usize },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("exhaustive selection over {count} RIS exceeds the budget of {max}")]
    SelectionBudget { count: usize, max: usize },
    #[error("empty sample set for robust selection")]
    EmptySamples,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
