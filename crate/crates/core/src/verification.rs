//! Runnable checks for invariance, tracking and strong convergence.
//!
//! Checks distinguish two negative outcomes: `Ok(report)` with a failed
//! verdict means the property was tested and does not hold, while
//! `Err(Error::HypothesisFail)` means the premises could not be established
//! numerically and nothing is claimed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{entry_index, SetEstimate};
use crate::metrics::{
    euclid, pointwise, set_semidist, tail_from_pointwise, tail_samples, MetricKind, PointMetric, TrajMetricParams,
};
use crate::system::{r_map, same_step, Ensemble, Trajectory};

/// The fixed ε ladder reported by every quantified check.
pub const EPS_LADDER: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// A step is a jump when it exceeds this multiple of its neighbours.
pub const CONTINUITY_FACTOR: f64 = 10.0;

/// Steps below this are integrator noise and never count as jumps.
pub const CONTINUITY_FLOOR: f64 = 1e-10;

// relative slack for "nonincreasing" on floating-point sequences
const MONOTONE_SLACK: f64 = 1e-9;

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK) + 1e-14)
}

/// Adjacent-step strong distances `|u(t_{k+1}) − u(t_k)|`.
pub fn grid_modulus(traj: &Trajectory) -> Vec<f64> {
    (1..traj.len())
        .map(|k| euclid(traj.coords(k), traj.coords(k - 1)))
        .collect()
}

fn step_is_continuous(steps: &[f64], k: usize) -> bool {
    let left = if k > 0 { steps[k - 1] } else { 0.0 };
    let right = steps.get(k + 1).copied().unwrap_or(0.0);
    let scale = left.max(right).max(CONTINUITY_FLOOR);
    steps[k] <= CONTINUITY_FACTOR * scale
}

/// Grid witness of strong continuity: no adjacent step exceeds
/// `CONTINUITY_FACTOR` times the larger neighbouring step.
pub fn is_strongly_continuous(traj: &Trajectory) -> bool {
    let steps = grid_modulus(traj);
    (0..steps.len()).all(|k| step_is_continuous(&steps, k))
}

/// Strong continuity of `traj` at the grid point `t`.
pub fn is_strongly_continuous_at(traj: &Trajectory, t: f64) -> Result<bool> {
    let k = traj.index_of(t)?;
    let steps = grid_modulus(traj);
    let touching = [k.checked_sub(1), (k < steps.len()).then_some(k)];
    Ok(touching.iter().flatten().all(|&j| step_is_continuous(&steps, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub eps: f64,
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiInvarianceReport {
    pub eps: f64,
    pub t_win: f64,
    pub covered_fraction: f64,
    pub uncovered: Vec<usize>,
}

impl QuasiInvarianceReport {
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty()
    }
}

fn ensure_library(library: &Ensemble, est: &SetEstimate) -> Result<()> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if library.model() != est.model {
        return Err(Error::ModelMismatch {
            left: est.model,
            right: library.model(),
        });
    }
    Ok(())
}

/// Each point `a` of `est` must sit on a library surrogate `v` at some grid
/// time `s ≥ t_win` (`|v(s) − a| < eps`) whose states on `[s − t_win,
/// s + t_win]` stay within `eps` of `est`. Times before 0 in the library are
/// treated as settling and never searched.
pub fn check_quasi_invariance(
    est: &SetEstimate,
    library: &Ensemble,
    eps: f64,
    t_win: f64,
) -> Result<QuasiInvarianceReport> {
    ensure_library(library, est)?;
    let grid = library.grid();
    let start = grid.index_of(0.0)?;
    let w = (t_win / grid.dt).round() as usize;
    let last = grid.len() - 1;
    if start + 2 * w > last {
        return Err(Error::HorizonTooShort {
            needed: 2.0 * t_win,
            available: grid.end_time(),
        });
    }
    let within: Vec<Vec<bool>> = library
        .members()
        .par_iter()
        .map(|v| {
            let pm = PointMetric::new(est.metric, est.model);
            v.iter_coords().map(|c| pm.point_set(c, &est.points) < eps).collect()
        })
        .collect();
    let covered = |a: &[f64]| {
        library.members().iter().zip(&within).any(|(v, inside)| {
            (start + w..=last - w).any(|s| euclid(v.coords(s), a) < eps && inside[s - w..=s + w].iter().all(|&b| b))
        })
    };
    let uncovered: Vec<usize> = est
        .points
        .iter()
        .enumerate()
        .filter(|(_, a)| !covered(&a.coords))
        .map(|(i, _)| i)
        .collect();
    Ok(QuasiInvarianceReport {
        eps,
        t_win,
        covered_fraction: 1.0 - uncovered.len() as f64 / est.len() as f64,
        uncovered,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalInvariantReport {
    pub eps: f64,
    pub i_subset_a: bool,
    pub a_subset_i: bool,
    pub dist_i_to_a: f64,
    pub dist_a_to_i: f64,
}

impl MaximalInvariantReport {
    pub fn passed(&self) -> bool {
        self.i_subset_a && self.a_subset_i
    }
}

/// Both-ways `eps`-inclusion between the attractor estimate and the time-0
/// slice of the complete surrogates.
pub fn check_maximal_invariant(
    attractor_est: &SetEstimate,
    library: &Ensemble,
    eps: f64,
) -> Result<MaximalInvariantReport> {
    ensure_library(library, attractor_est)?;
    let i_side = r_map(library, 0.0)?;
    let m = attractor_est.metric;
    let dist_i_to_a = set_semidist(&i_side, &attractor_est.points, m)?;
    let dist_a_to_i = set_semidist(&attractor_est.points, &i_side, m)?;
    Ok(MaximalInvariantReport {
        eps,
        i_subset_a: dist_i_to_a < eps,
        a_subset_i: dist_a_to_i < eps,
        dist_i_to_a,
        dist_a_to_i,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingParams {
    /// Length of the strong sup window `[t*, t* + window_t]`.
    pub window_t: f64,
    /// Largest library time shift searched, in both directions.
    pub shift_max: f64,
    pub shift_stride: usize,
    pub t_star_stride: usize,
    pub tail: TrajMetricParams,
}

impl Default for TrackingParams {
    fn default() -> Self {
        Self {
            window_t: 1.0,
            shift_max: 0.0,
            shift_stride: 1,
            t_star_stride: 1,
            tail: TrajMetricParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    /// The tracking time `t₀` for `eps`.
    pub t_star: f64,
    pub window_t: f64,
    pub metric: MetricKind,
    pub eps: f64,
    /// Largest best-match error over members at `t_star`.
    pub worst_error: f64,
    /// `(ensemble member, library member)` at `t_star`.
    pub matched_pairs: Vec<(usize, usize)>,
    pub shifts: Vec<f64>,
    /// `(t*, worst best-match error)` for every sampled `t*`.
    pub profile: Vec<(f64, f64)>,
    pub ladder: Vec<LadderRung>,
}

impl TrackingReport {
    pub fn errors(&self) -> Vec<f64> {
        self.profile.iter().map(|p| p.1).collect()
    }
}

#[derive(Clone, Copy)]
struct Match {
    err: f64,
    member: usize,
    shift: isize,
}

/// Uniform tracking of `ensemble` by complete surrogates in `library`:
/// weak form in the tail trajectory metric, strong form as the sup of the
/// strong distance over `[t*, t* + window_t]`.
pub fn check_tracking(
    ensemble: &Ensemble,
    library: &Ensemble,
    m: MetricKind,
    eps: f64,
    params: &TrackingParams,
) -> Result<TrackingReport> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if ensemble.model() != library.model() {
        return Err(Error::ModelMismatch {
            left: ensemble.model(),
            right: library.model(),
        });
    }
    let (ug, vg) = (ensemble.grid(), library.grid());
    if !ug.aligned_with(vg) {
        return Err(Error::GridMismatch("ensemble and library grids are not aligned".into()));
    }
    if params.t_star_stride == 0 || params.shift_stride == 0 {
        return Err(Error::InvalidParameter("strides must be positive".into()));
    }
    let dt = ug.dt;
    let count = match m {
        MetricKind::Strong => (params.window_t / dt).round() as usize + 1,
        MetricKind::Weak => tail_samples(dt, params.tail),
    };
    if count > ug.len() {
        return Err(Error::HorizonTooShort {
            needed: ug.t0 + (count - 1) as f64 * dt,
            available: ug.end_time(),
        });
    }
    let offset = ((ug.t0 - vg.t0) / dt).round() as isize;
    let smax = (params.shift_max / dt).round() as isize;
    let stride = params.shift_stride as isize;
    let mut shifts = vec![0isize];
    let mut s = stride;
    while s <= smax {
        shifts.push(s);
        shifts.push(-s);
        s += stride;
    }
    let pm = PointMetric::new(m, ensemble.model());
    let error = |u: &Trajectory, k: usize, v: &Trajectory, j: usize| -> f64 {
        let d = pointwise(&pm, u, k, v, j, count);
        match m {
            MetricKind::Strong => d.fold(0.0, f64::max),
            MetricKind::Weak => tail_from_pointwise(d, dt, params.tail),
        }
    };
    let stars: Vec<usize> = (0..=ug.len() - count).step_by(params.t_star_stride).collect();

    let best: Vec<Vec<Match>> = stars
        .par_iter()
        .map(|&k| {
            ensemble
                .members()
                .iter()
                .map(|u| {
                    let mut best = Match {
                        err: f64::INFINITY,
                        member: 0,
                        shift: 0,
                    };
                    'search: for (jv, v) in library.members().iter().enumerate() {
                        for &sh in &shifts {
                            let j = k as isize + offset + sh;
                            if j < 0 || j as usize + count > v.len() {
                                continue;
                            }
                            let e = error(u, k, v, j as usize);
                            if e < best.err {
                                best = Match {
                                    err: e,
                                    member: jv,
                                    shift: sh,
                                };
                                if e == 0.0 {
                                    break 'search;
                                }
                            }
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();

    let worst: Vec<f64> = best
        .iter()
        .map(|row| row.iter().map(|b| b.err).fold(0.0, f64::max))
        .collect();
    let profile: Vec<(f64, f64)> = stars.iter().map(|&k| ug.time(k)).zip(worst.iter().copied()).collect();
    let rung = |e: f64| LadderRung {
        eps: e,
        t0: entry_index(&worst, e).map(|i| profile[i].0),
    };
    let ladder = EPS_LADDER.iter().map(|&e| rung(e)).collect();
    let i0 = entry_index(&worst, eps).ok_or(Error::NoMatch {
        eps,
        best: *worst.last().unwrap_or(&f64::INFINITY),
    })?;
    Ok(TrackingReport {
        t_star: profile[i0].0,
        window_t: params.window_t,
        metric: m,
        eps,
        worst_error: worst[i0],
        matched_pairs: best[i0].iter().enumerate().map(|(i, b)| (i, b.member)).collect(),
        shifts: best[i0].iter().map(|b| b.shift as f64 * dt).collect(),
        profile,
        ladder,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Weak sup distance of each sequence member to the limit.
    pub weak_distances: Vec<f64>,
    /// Strong distance at `t_star` (or the windowed sup).
    pub strong_distances: Vec<f64>,
    /// For each `eps`, the first index after which every strong distance
    /// stays below it.
    pub ladder: Vec<(f64, Option<usize>)>,
}

fn weak_window_distances(seq: &[Trajectory], limit: &Trajectory, a: f64, b: f64) -> Result<Vec<f64>> {
    seq.iter()
        .map(|u| crate::metrics::traj_dist_window(u, limit, a, b, MetricKind::Weak))
        .collect()
}

fn weak_hypothesis(weak: &[f64], eps_min: f64) -> Result<()> {
    if weak.is_empty() {
        return Err(Error::EmptySet("sequence"));
    }
    let last = *weak.last().unwrap();
    if !nonincreasing(weak) || !(last < eps_min) {
        return Err(Error::HypothesisFail(format!(
            "weak convergence not established: last weak distance {last:e}, needed below {eps_min:e} and nonincreasing"
        )));
    }
    Ok(())
}

fn ladder_of(xs: &[f64], eps_grid: &[f64]) -> Vec<(f64, Option<usize>)> {
    eps_grid.iter().map(|&e| (e, entry_index(xs, e))).collect()
}

/// Pointwise strong convergence `u_n(t*) → u(t*)` given weak convergence on
/// the whole common window and strong continuity of the limit at `t*`.
pub fn check_strong_convergence_at_point(
    seq: &[Trajectory],
    limit: &Trajectory,
    t_star: f64,
    eps_grid: &[f64],
) -> Result<ConvergenceReport> {
    let eps_min = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if !eps_min.is_finite() {
        return Err(Error::InvalidParameter("empty eps grid".into()));
    }
    let weak = weak_window_distances(seq, limit, limit.t0, limit.end_time())?;
    weak_hypothesis(&weak, eps_min)?;
    if !is_strongly_continuous_at(limit, t_star)? {
        return Err(Error::HypothesisFail(format!(
            "limit is not strongly continuous at t = {t_star}"
        )));
    }
    let target = limit.coords_at(t_star)?;
    let strong = seq
        .iter()
        .map(|u| Ok(euclid(u.coords_at(t_star)?, target)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        converged: nonincreasing(&strong) && *strong.last().unwrap() < eps_min,
        ladder: ladder_of(&strong, eps_grid),
        weak_distances: weak,
        strong_distances: strong,
    })
}

/// Uniform strong convergence on `[a, b]` given weak convergence there and a
/// strongly continuous limit.
pub fn check_uniform_strong_convergence(
    seq: &[Trajectory],
    limit: &Trajectory,
    window: (f64, f64),
    tol: f64,
) -> Result<ConvergenceReport> {
    let (a, b) = window;
    let weak = weak_window_distances(seq, limit, a, b)?;
    weak_hypothesis(&weak, tol)?;
    if !is_strongly_continuous(&crate::system::restrict(limit, a, b)?) {
        return Err(Error::HypothesisFail(format!(
            "limit is not strongly continuous on [{a}, {b}]"
        )));
    }
    let strong = seq
        .iter()
        .map(|u| crate::metrics::traj_dist_window(u, limit, a, b, MetricKind::Strong))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        converged: nonincreasing(&strong) && *strong.last().unwrap() < tol,
        ladder: ladder_of(&strong, &[tol]),
        weak_distances: weak,
        strong_distances: strong,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub continuous: bool,
    pub left_defect: f64,
    pub right_defect: f64,
    pub left_norm_defect: f64,
    pub right_norm_defect: f64,
}

/// Compares the one-step moduli of the state and of `|u|` on both sides of
/// the interior grid point `t_star`. The verdict holds when the right
/// defects do not exceed the left ones by more than `tol`.
pub fn continuity_report(traj: &Trajectory, t_star: f64, tol: f64) -> Result<ContinuityReport> {
    let k = traj.index_of(t_star)?;
    if k == 0 || k + 1 >= traj.len() {
        return Err(Error::BoundaryPoint { time: t_star });
    }
    let (l, c, r) = (traj.coords(k - 1), traj.coords(k), traj.coords(k + 1));
    let norm = crate::system::norm;
    let left_defect = euclid(c, l);
    let right_defect = euclid(r, c);
    let left_norm_defect = (norm(c) - norm(l)).abs();
    let right_norm_defect = (norm(r) - norm(c)).abs();
    Ok(ContinuityReport {
        continuous: right_defect <= left_defect + tol && right_norm_defect <= left_norm_defect + tol,
        left_defect,
        right_defect,
        left_norm_defect,
        right_norm_defect,
    })
}

pub fn check_left_continuity_implies_continuity(traj: &Trajectory, t_star: f64, tol: f64) -> Result<bool> {
    Ok(continuity_report(traj, t_star, tol)?.continuous)
}

/// Checks that every pair of trajectories shares the step `dt`; used by
/// callers assembling sequences from separate runs.
pub fn same_grid_step(seq: &[Trajectory]) -> bool {
    seq.windows(2).all(|w| same_step(w[0].dt, w[1].dt))
}
