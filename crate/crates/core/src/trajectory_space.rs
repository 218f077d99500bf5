//! The trajectory space `K⁺`, the translation semigroup `T(s)` and the
//! trajectory attractor built from complete surrogates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::step_count;
use crate::limits::entry_index;
use crate::metrics::{pointwise, tail_from_pointwise, tail_samples, MetricKind, PointMetric, TrajMetricParams};
use crate::system::{restrict, same_step, Ensemble, ModelId, State, Trajectory};
use crate::verification::is_strongly_continuous;

/// A finite family of forward trajectories on a shared grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    members: Ensemble,
    pub metric_params: TrajMetricParams,
}

impl TrajectorySet {
    pub fn new(members: Vec<Trajectory>, metric_params: TrajMetricParams) -> Result<Self> {
        let members = Ensemble::new("trajectory-set", members)?;
        if members.t0() != 0.0 {
            return Err(Error::GridMismatch(format!(
                "trajectory sets start at 0, got t0 = {}",
                members.t0()
            )));
        }
        Ok(Self { members, metric_params })
    }

    /// `K⁺` surrogate: the forward part `[0, end]` of every ensemble member.
    pub fn from_ensemble(ensemble: &Ensemble, metric_params: TrajMetricParams) -> Result<Self> {
        let forward = if ensemble.t0() == 0.0 {
            ensemble.clone()
        } else {
            ensemble.restrict(0.0, ensemble.end_time())?
        };
        Self::new(forward.into_members(), metric_params)
    }

    pub fn members(&self) -> &[Trajectory] {
        self.members.members()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn model(&self) -> ModelId {
        self.members.model()
    }

    pub fn dt(&self) -> f64 {
        self.members.dt()
    }

    pub fn end_time(&self) -> f64 {
        self.members.end_time()
    }

    pub fn as_ensemble(&self) -> &Ensemble {
        &self.members
    }
}

/// `(T(s)u)(t) = u(t + s)` on `[0, end − s]`.
pub fn translate_semigroup(p: &TrajectorySet, s: f64) -> Result<TrajectorySet> {
    if s == 0.0 {
        return Ok(p.clone());
    }
    if !(s > 0.0) || s >= p.end_time() {
        return Err(Error::HorizonTooShort {
            needed: s,
            available: p.end_time(),
        });
    }
    let members = p
        .members()
        .iter()
        .map(|u| {
            let mut v = restrict(u, s, u.end_time())?;
            // grid index arithmetic leaves O(ulp) residue in t0
            v.t0 = 0.0;
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(members, p.metric_params)
}

/// `P(t) = {u(t) : u ∈ P}`.
pub fn slice(p: &TrajectorySet, t: f64) -> Result<Vec<State>> {
    p.members().iter().map(|u| u.state_at(t)).collect()
}

fn tail_dist(pm: &PointMetric, u: &Trajectory, iu: usize, v: &Trajectory, p: TrajMetricParams) -> f64 {
    tail_from_pointwise(pointwise(pm, u, iu, v, 0, tail_samples(u.dt, p)), u.dt, p)
}

fn ensure_tail(p: &TrajectorySet, params: TrajMetricParams) -> Result<()> {
    let needed = params.t_max_windows as f64;
    if p.end_time() < needed - 1e-7 * p.dt() {
        return Err(Error::HorizonTooShort {
            needed,
            available: p.end_time(),
        });
    }
    Ok(())
}

/// `sup_{a ∈ A} inf_{b ∈ B} d(T(sa)a, b)` in the weak tail metric from 0,
/// with `A` shifted by `sa` grid samples.
fn tail_semidist(a: &TrajectorySet, sa: usize, b: &TrajectorySet, params: TrajMetricParams) -> f64 {
    let pm = PointMetric::new(MetricKind::Weak, a.model());
    a.members()
        .iter()
        .map(|u| {
            b.members()
                .iter()
                .map(|v| tail_dist(&pm, u, sa, v, params))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryAttractor {
    pub set: TrajectorySet,
    pub cluster_tol: f64,
    /// `max_t` of the both-ways tail semi-distance between `T(t)𝔄` and `𝔄`
    /// over the sampled integer shifts.
    pub invariance_defect: f64,
    pub sampled_shifts: Vec<f64>,
}

/// `𝔄 = Π₊K` surrogate: forward restrictions of the complete surrogates in
/// `library`, clustered in the weak tail metric at `cluster_tol`.
pub fn trajectory_attractor(
    k: &TrajectorySet,
    library: &Ensemble,
    params: TrajMetricParams,
    cluster_tol: f64,
) -> Result<TrajectoryAttractor> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if library.model() != k.model() {
        return Err(Error::ModelMismatch {
            left: k.model(),
            right: library.model(),
        });
    }
    if !same_step(library.dt(), k.dt()) {
        return Err(Error::GridMismatch("library and K⁺ use different steps".into()));
    }
    let forward = TrajectorySet::from_ensemble(library, params)?;
    ensure_tail(&forward, params)?;
    let pm = PointMetric::new(MetricKind::Weak, forward.model());
    let mut kept: Vec<Trajectory> = Vec::new();
    for u in forward.members() {
        if kept.iter().all(|v| tail_dist(&pm, u, 0, v, params) > cluster_tol) {
            kept.push(u.clone());
        }
    }
    let set = TrajectorySet::new(kept, params)?;

    // T(t)𝔄 against 𝔄 for integer t while the shifted tail still fits
    let spare = set.end_time() - params.t_max_windows as f64;
    let mut sampled_shifts = Vec::new();
    let mut invariance_defect: f64 = 0.0;
    let mut t = 1.0;
    while t <= spare + 1e-9 {
        let s = step_count(0.0, t, set.dt())?;
        let shifted = tail_semidist(&set, s, &set, params);
        let back = {
            let moved = translate_semigroup(&set, t)?;
            tail_semidist(&set, 0, &moved, params)
        };
        invariance_defect = invariance_defect.max(shifted).max(back);
        sampled_shifts.push(t);
        t += 1.0;
    }
    Ok(TrajectoryAttractor {
        set,
        cluster_tol,
        invariance_defect,
        sampled_shifts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajAttractionReport {
    pub eps: f64,
    /// Weak tail-metric entry time.
    pub t_entry: Option<f64>,
    /// All attractor members passed the strong-continuity grid check.
    pub strong_mode: bool,
    /// Entry time for the windowed strong sup; only computed in strong mode.
    pub t_entry_strong: Option<f64>,
    /// `(t, weak error, strong error)`; strong is NaN outside strong mode.
    pub profile: Vec<(f64, f64, f64)>,
}

/// Uniform attraction of `K⁺` by `attractor`: for each sampled `t`,
/// `max_{u ∈ K} min_{a ∈ 𝔄} d(T(t)u, a)` in the weak tail metric, and in
/// strong mode the sup of the strong distance over `[0, t_max_windows]`.
pub fn trajectory_attraction_report(
    k: &TrajectorySet,
    attractor: &TrajectorySet,
    eps: f64,
    t_stride: usize,
) -> Result<TrajAttractionReport> {
    if k.model() != attractor.model() {
        return Err(Error::ModelMismatch {
            left: k.model(),
            right: attractor.model(),
        });
    }
    if !same_step(k.dt(), attractor.dt()) {
        return Err(Error::GridMismatch("K⁺ and attractor use different steps".into()));
    }
    let params = attractor.metric_params;
    ensure_tail(attractor, params)?;
    ensure_tail(k, params)?;
    let count = tail_samples(k.dt(), params);
    let strong_mode = attractor.members().iter().all(is_strongly_continuous);
    let weak = PointMetric::new(MetricKind::Weak, k.model());
    let strong = PointMetric::new(MetricKind::Strong, k.model());
    let last = k.members()[0].len() - count;
    let mut profile = Vec::new();
    for i in (0..=last).step_by(t_stride.max(1)) {
        let mut we: f64 = 0.0;
        let mut se: f64 = 0.0;
        for u in k.members() {
            let w = attractor
                .members()
                .iter()
                .map(|a| tail_dist(&weak, u, i, a, params))
                .fold(f64::INFINITY, f64::min);
            we = we.max(w);
            if strong_mode {
                let s = attractor
                    .members()
                    .iter()
                    .map(|a| pointwise(&strong, u, i, a, 0, count).fold(0.0, f64::max))
                    .fold(f64::INFINITY, f64::min);
                se = se.max(s);
            }
        }
        let t = i as f64 * k.dt();
        profile.push((t, we, if strong_mode { se } else { f64::NAN }));
    }
    let weak_profile: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let strong_profile: Vec<f64> = profile.iter().map(|p| p.2).collect();
    Ok(TrajAttractionReport {
        eps,
        t_entry: entry_index(&weak_profile, eps).map(|i| profile[i].0),
        strong_mode,
        t_entry_strong: if strong_mode {
            entry_index(&strong_profile, eps).map(|i| profile[i].0)
        } else {
            None
        },
        profile,
    })
}
