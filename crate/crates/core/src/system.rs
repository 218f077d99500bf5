//! Sampled evolutionary systems.
//!
//! A [`Trajectory`] is a uniformly gridded, finite stand-in for an element of
//! the trajectory family on an interval. Families are closed under time
//! translation ([`translate`]) and restriction ([`restrict`]); an
//! [`Ensemble`] of trajectories sharing a grid carries the set map
//! `R(t)A = {u(t) : u(0) ∈ A}` through [`r_map`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when snapping a time onto a grid.
const GRID_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GalerkinNse2d,
    GalerkinNse3d,
    Dyadic,
    ToyContraction,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::GalerkinNse2d => "galerkin_nse2d",
            ModelKind::GalerkinNse3d => "galerkin_nse3d",
            ModelKind::Dyadic => "dyadic",
            ModelKind::ToyContraction => "toy_contraction",
        }
    }

    pub fn is_nse(self) -> bool {
        matches!(self, ModelKind::GalerkinNse2d | ModelKind::GalerkinNse3d)
    }
}

/// Identifies the coordinate layout of a state: model kind plus truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelId {
    pub kind: ModelKind,
    pub truncation: u32,
}

impl ModelId {
    pub fn new(kind: ModelKind, truncation: u32) -> Self {
        Self { kind, truncation }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/N{}", self.kind.name(), self.truncation)
    }
}

/// A point of the phase space: finitely many real coordinates.
///
/// For the Galerkin models the coordinates are the real and imaginary parts
/// of solenoidal Fourier amplitudes in an L²-orthonormal basis, so the
/// Euclidean norm of `coords` is the L² norm of the represented field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub model: ModelId,
    pub coords: Vec<f64>,
}

impl State {
    pub fn new(model: ModelId, coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { time: f64::NAN });
        }
        Ok(Self { model, coords })
    }

    pub fn zeros(model: ModelId, dim: usize) -> Self {
        Self {
            model,
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Strong norm `|u|`.
    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn ensure_same_model(&self, other: &State) -> Result<()> {
        if self.model != other.model || self.dim() != other.dim() {
            return Err(Error::ModelMismatch {
                left: self.model,
                right: other.model,
            });
        }
        Ok(())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The closed ball `X = {u : |u| <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpace {
    pub model: ModelId,
    pub radius: f64,
}

impl PhaseSpace {
    pub fn new(model: ModelId, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phase-space radius must be positive, got {radius}"
            )));
        }
        Ok(Self { model, radius })
    }

    pub fn contains(&self, x: &State) -> bool {
        x.model == self.model && x.norm() <= self.radius
    }

    pub fn contains_trajectory(&self, traj: &Trajectory) -> bool {
        traj.model == self.model && traj.iter_coords().all(|c| norm(c) <= self.radius)
    }
}

/// A uniformly sampled trajectory: `state(k) ≈ u(t0 + k·dt)`.
///
/// Coordinates are stored flattened, one row of `dim` values per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: ModelId,
    pub t0: f64,
    pub dt: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(t0: f64, dt: f64, states: &[State]) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptySet("trajectory states"))?;
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid grid t0 = {t0}, dt = {dt}")));
        }
        let dim = first.dim();
        let mut data = Vec::with_capacity(dim * states.len());
        for (k, s) in states.iter().enumerate() {
            first.ensure_same_model(s)?;
            if !s.is_finite() {
                return Err(Error::NonFiniteState {
                    time: t0 + k as f64 * dt,
                });
            }
            data.extend_from_slice(&s.coords);
        }
        Ok(Self {
            model: first.model,
            t0,
            dt,
            dim,
            data,
        })
    }

    /// Builds a trajectory from flattened rows; used by the integrator.
    pub(crate) fn from_raw(model: ModelId, t0: f64, dt: f64, dim: usize, data: Vec<f64>) -> Self {
        debug_assert!(dim > 0 && data.len().is_multiple_of(dim) && !data.is_empty());
        Self {
            model,
            t0,
            dt,
            dim,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn coords(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn state(&self, k: usize) -> State {
        State {
            model: self.model,
            coords: self.coords(k).to_vec(),
        }
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.len()).map(|k| self.state(k))
    }

    pub fn iter_coords(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn first(&self) -> State {
        self.state(0)
    }

    pub fn last(&self) -> State {
        self.state(self.len() - 1)
    }

    /// Grid index of time `t`, or `OffGrid`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let off_grid = || Error::OffGrid {
            time: t,
            t0: self.t0,
            dt: self.dt,
            len: self.len(),
        };
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if (x - k).abs() > GRID_SLACK * x.abs().max(1.0) || k < 0.0 || k as usize >= self.len() {
            return Err(off_grid());
        }
        Ok(k as usize)
    }

    pub fn state_at(&self, t: f64) -> Result<State> {
        Ok(self.state(self.index_of(t)?))
    }

    pub fn coords_at(&self, t: f64) -> Result<&[f64]> {
        Ok(self.coords(self.index_of(t)?))
    }

    /// True when `other` lives on the same time grid (same `t0`, `dt`, length).
    pub fn same_grid(&self, other: &Trajectory) -> bool {
        self.len() == other.len() && same_time(self.t0, other.t0, self.dt) && same_step(self.dt, other.dt)
    }

    /// True when the grids differ only by an integer number of steps.
    pub fn aligned_with(&self, other: &Trajectory) -> bool {
        if !same_step(self.dt, other.dt) {
            return false;
        }
        let x = (other.t0 - self.t0) / self.dt;
        (x - x.round()).abs() <= GRID_SLACK * x.abs().max(1.0)
    }

    pub(crate) fn sub(&self, start: usize, end_inclusive: usize) -> Trajectory {
        Trajectory {
            model: self.model,
            t0: self.time(start),
            dt: self.dt,
            dim: self.dim,
            data: self.data[start * self.dim..(end_inclusive + 1) * self.dim].to_vec(),
        }
    }

    /// Maximum strong norm along the trajectory.
    pub fn max_norm(&self) -> f64 {
        self.iter_coords().map(norm).fold(0.0, f64::max)
    }

    /// Returns a copy with `f` applied to every state; used to build
    /// data-level constructions such as perturbed or discontinuous samples.
    pub fn map_states<F>(&self, mut f: F) -> Result<Trajectory>
    where
        F: FnMut(usize, f64, &mut [f64]),
    {
        let mut out = self.clone();
        for k in 0..out.len() {
            let t = out.time(k);
            f(k, t, &mut out.data[k * out.dim..(k + 1) * out.dim]);
        }
        if out.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { time: f64::NAN });
        }
        Ok(out)
    }
}

pub(crate) fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn same_time(a: f64, b: f64, dt: f64) -> bool {
    (a - b).abs() <= GRID_SLACK * dt.max(1e-300)
}

/// Relabels time: `t0' = t0 + s`, states unchanged.
pub fn translate(traj: &Trajectory, s: f64) -> Trajectory {
    let mut out = traj.clone();
    out.t0 = traj.t0 + s;
    out
}

/// Sub-trajectory on `[a, b]`; both endpoints must be grid points.
pub fn restrict(traj: &Trajectory, a: f64, b: f64) -> Result<Trajectory> {
    if a > b {
        return Err(Error::EmptyWindow { a, b });
    }
    let i = traj.index_of(a)?;
    let j = traj.index_of(b)?;
    Ok(traj.sub(i, j))
}

/// A finite family of trajectories on one shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub label: String,
    trajectories: Vec<Trajectory>,
}

impl Ensemble {
    pub fn new(label: impl Into<String>, trajectories: Vec<Trajectory>) -> Result<Self> {
        let first = trajectories.first().ok_or(Error::EmptySet("ensemble"))?;
        for t in &trajectories[1..] {
            if t.model != first.model {
                return Err(Error::ModelMismatch {
                    left: first.model,
                    right: t.model,
                });
            }
            if !first.same_grid(t) {
                return Err(Error::GridMismatch(format!(
                    "member grid (t0 = {}, dt = {}, len = {}) differs from (t0 = {}, dt = {}, len = {})",
                    t.t0,
                    t.dt,
                    t.len(),
                    first.t0,
                    first.dt,
                    first.len()
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            trajectories,
        })
    }

    pub fn members(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn into_members(self) -> Vec<Trajectory> {
        self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn model(&self) -> ModelId {
        self.trajectories[0].model
    }

    /// Reference member describing the shared grid.
    pub fn grid(&self) -> &Trajectory {
        &self.trajectories[0]
    }

    pub fn t0(&self) -> f64 {
        self.grid().t0
    }

    pub fn dt(&self) -> f64 {
        self.grid().dt
    }

    pub fn end_time(&self) -> f64 {
        self.grid().end_time()
    }

    pub fn initial_states(&self) -> Vec<State> {
        self.trajectories.iter().map(Trajectory::first).collect()
    }

    /// Coordinates of every member at grid index `k`.
    pub(crate) fn slice_coords(&self, k: usize) -> impl Iterator<Item = &[f64]> {
        self.trajectories.iter().map(move |t| t.coords(k))
    }

    /// Restricts every member to `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Ensemble> {
        let members = self
            .trajectories
            .iter()
            .map(|t| restrict(t, a, b))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(self.label.clone(), members)
    }

    pub fn translate(&self, s: f64) -> Ensemble {
        Ensemble {
            label: self.label.clone(),
            trajectories: self.trajectories.iter().map(|t| translate(t, s)).collect(),
        }
    }
}

/// `R(t)A` with `A` the set of all initial states of the ensemble.
pub fn r_map(ensemble: &Ensemble, t: f64) -> Result<Vec<State>> {
    r_map_where(ensemble, t, |_| true)
}

/// `R(t)A` where `A` is given by a membership predicate on initial states.
///
/// Fails with `EmptySet` when no member starts in `A`.
pub fn r_map_where<P>(ensemble: &Ensemble, t: f64, mut in_a: P) -> Result<Vec<State>>
where
    P: FnMut(&State) -> bool,
{
    let k = ensemble.grid().index_of(t)?;
    let out: Vec<State> = ensemble
        .members()
        .iter()
        .filter(|m| in_a(&m.first()))
        .map(|m| m.state(k))
        .collect();
    if out.is_empty() {
        return Err(Error::EmptySet("R(t)A: no trajectory starts in A"));
    }
    Ok(out)
}
