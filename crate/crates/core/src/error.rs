use thiserror::Error;

use crate::system::ModelId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite state encountered at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("time step {dt} does not divide the interval [{t0}, {t1}]")]
    StepMismatch { t0: f64, t1: f64, dt: f64 },
    #[error("time {time} is not a grid point (t0 = {t0}, dt = {dt}, len = {len})")]
    OffGrid { time: f64, t0: f64, dt: f64, len: usize },
    #[error("empty window [{a}, {b}]")]
    EmptyWindow { a: f64, b: f64 },
    #[error("empty set: {0}")]
    EmptySet(&'static str),
    #[error("model mismatch: {left} vs {right}")]
    ModelMismatch { left: ModelId, right: ModelId },
    #[error("horizon too short: need {needed}, have {available}")]
    HorizonTooShort { needed: f64, available: f64 },
    #[error("grid too coarse: dt = {dt} but the energy-inequality window is delta = {delta}")]
    GridTooCoarse { dt: f64, delta: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("empty library of complete trajectories")]
    EmptyLibrary,
    #[error("no tracking match below eps = {eps} (best error {best} at the last sampled time)")]
    NoMatch { eps: f64, best: f64 },
    #[error("hypothesis not established: {0}")]
    HypothesisFail(String),
    #[error("time {time} is a boundary point of the trajectory")]
    BoundaryPoint { time: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
