//! Finite-horizon estimators for ω-limits, attracting sets and global
//! attractors, plus a covering-radius proxy for asymptotic compactness.
//!
//! The intersection over `T` in `ω(A) = ∩_T cl ∪_{t ≥ T} R(t)A` is replaced by
//! "discard a transient, then cluster": states of every member at grid times
//! in `[t_transient, t_max]` are visited in time-major, member-minor order
//! and a state joins the estimate only if it is farther than `cluster_tol`
//! from every accepted point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{euclid, set_semidist, MetricKind, PointMetric};
use crate::system::{Ensemble, ModelId, State};

/// A finite point cloud approximating a subset of the phase space,
/// annotated with the metric, tolerance and horizon that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetEstimate {
    pub model: ModelId,
    pub points: Vec<State>,
    pub metric: MetricKind,
    pub tol: f64,
    pub horizon: f64,
}

impl SetEstimate {
    pub fn new(points: Vec<State>, metric: MetricKind, tol: f64, horizon: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet("set estimate"))?;
        for p in &points[1..] {
            first.ensure_same_model(p)?;
        }
        Ok(Self {
            model: first.model,
            points,
            metric,
            tol,
            horizon,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `x` to the cloud in the estimate's own metric.
    pub fn dist_to(&self, x: &State) -> f64 {
        PointMetric::new(self.metric, self.model).point_set(&x.coords, &self.points)
    }

    /// The same cloud measured in another metric.
    pub fn with_metric(&self, metric: MetricKind) -> SetEstimate {
        SetEstimate { metric, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaParams {
    pub t_transient: f64,
    pub t_max: f64,
    pub sample_stride: usize,
    pub cluster_tol: f64,
    /// Radius used for the attraction verdict of [`global_attractor`].
    pub attract_eps: f64,
}

impl OmegaParams {
    pub fn new(t_transient: f64, t_max: f64, sample_stride: usize, cluster_tol: f64) -> Self {
        Self {
            t_transient,
            t_max,
            sample_stride,
            cluster_tol,
            attract_eps: 2.0 * cluster_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.t_transient && self.t_transient < self.t_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= t_transient < t_max, got {} and {}",
                self.t_transient, self.t_max
            )));
        }
        if self.sample_stride == 0 || !(self.cluster_tol > 0.0) || !(self.attract_eps > 0.0) {
            return Err(Error::InvalidParameter(
                "sample_stride, cluster_tol and attract_eps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Greedy first-seen clustering of `points` at resolution `tol`.
pub fn greedy_cluster<'a, I>(points: I, pm: &PointMetric, tol: f64) -> Vec<&'a [f64]>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut accepted: Vec<&[f64]> = Vec::new();
    for p in points {
        if accepted.iter().all(|a| pm.dist(a, p) > tol) {
            accepted.push(p);
        }
    }
    accepted
}

/// ω-limit estimate of the initial slice of `ensemble`.
pub fn omega_limit(ensemble: &Ensemble, m: MetricKind, p: &OmegaParams) -> Result<SetEstimate> {
    p.validate()?;
    let grid = ensemble.grid();
    if ensemble.end_time() < p.t_max - 1e-9 * grid.dt {
        return Err(Error::HorizonTooShort {
            needed: p.t_max,
            available: ensemble.end_time(),
        });
    }
    let first = grid.index_of(p.t_transient)?;
    let last = grid.index_of(p.t_max)?;
    let pm = PointMetric::new(m, ensemble.model());
    let samples = (first..=last)
        .step_by(p.sample_stride)
        .flat_map(|k| ensemble.slice_coords(k));
    let model = ensemble.model();
    let points = greedy_cluster(samples, &pm, p.cluster_tol)
        .into_iter()
        .map(|c| State {
            model,
            coords: c.to_vec(),
        })
        .collect();
    SetEstimate::new(points, m, p.cluster_tol, p.t_max)
}

/// Hausdorff distance between the estimates at `t_max` and `2·t_max`
/// (same transient); small values indicate a sufficient horizon.
pub fn horizon_cauchy_defect(ensemble: &Ensemble, m: MetricKind, p: &OmegaParams) -> Result<f64> {
    let short = omega_limit(ensemble, m, p)?;
    let long = omega_limit(
        ensemble,
        m,
        &OmegaParams {
            t_max: 2.0 * p.t_max,
            ..*p
        },
    )?;
    Ok(set_semidist(&short.points, &long.points, m)?.max(set_semidist(&long.points, &short.points, m)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionReport {
    pub metric: MetricKind,
    pub eps: f64,
    /// Earliest grid time after which `R(t)B ⊂ B(A, eps)` at every sampled time.
    pub t_entry: Option<f64>,
    /// `sup_{b} d(b(t_end), A)` at the last grid time.
    pub final_distance: f64,
}

/// `max_{u ∈ ensemble} d(u(t_k), candidate)` for every grid index `k`.
pub fn attraction_profile(candidate: &SetEstimate, ensemble: &Ensemble) -> Vec<f64> {
    let pm = PointMetric::new(candidate.metric, candidate.model);
    (0..ensemble.grid().len())
        .map(|k| {
            ensemble
                .slice_coords(k)
                .map(|c| pm.point_set(c, &candidate.points))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Earliest index after which every entry of `profile` is below `eps`.
pub(crate) fn entry_index(profile: &[f64], eps: f64) -> Option<usize> {
    match profile.iter().rposition(|&d| !(d < eps)) {
        None => Some(0),
        Some(k) if k + 1 < profile.len() => Some(k + 1),
        Some(_) => None,
    }
}

/// Does `candidate` uniformly attract the ensemble within `eps`?
pub fn is_attracting(candidate: &SetEstimate, ensemble: &Ensemble, eps: f64) -> AttractionReport {
    let profile = if candidate.model == ensemble.model() {
        attraction_profile(candidate, ensemble)
    } else {
        vec![f64::INFINITY]
    };
    let grid = ensemble.grid();
    AttractionReport {
        metric: candidate.metric,
        eps,
        t_entry: entry_index(&profile, eps).map(|k| grid.time(k)),
        final_distance: *profile.last().unwrap_or(&f64::INFINITY),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorEstimate {
    pub set: SetEstimate,
    pub attraction: AttractionReport,
    /// The ω-limit of `X` attracts, hence it is the global attractor.
    pub exists: bool,
}

/// Global attractor estimate: `ω(X)` of an ensemble sampling `X`, together
/// with the attraction verdict that decides existence.
pub fn global_attractor(ensemble_of_x: &Ensemble, m: MetricKind, p: &OmegaParams) -> Result<AttractorEstimate> {
    let set = omega_limit(ensemble_of_x, m, p)?;
    let attraction = is_attracting(&set, ensemble_of_x, p.attract_eps);
    Ok(AttractorEstimate {
        exists: attraction.t_entry.is_some(),
        set,
        attraction,
    })
}

/// Covering radii of the greedy (farthest-point) k-centre sequence:
/// `radii[k-1]` is the largest strong distance from a sample to its nearest
/// of the first `k` centres. Nonincreasing in `k`.
pub fn k_center_radii(samples: &[&[f64]], k_max: usize) -> Vec<f64> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mut nearest: Vec<f64> = samples.iter().map(|s| euclid(s, samples[0])).collect();
    let mut radii = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        let (far, r) =
            nearest.iter().copied().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, d)| if d > acc.1 { (i, d) } else { acc },
            );
        radii.push(r.max(0.0));
        let c = samples[far];
        for (n, s) in nearest.iter_mut().zip(samples) {
            *n = n.min(euclid(s, c));
        }
    }
    radii
}

/// Asymptotic-compactness defect: the k-centre covering radius of the
/// samples `R(t_n)X`, `t_n ∈ times`. Zero means the samples are resolved by
/// `k` centres.
pub fn asymptotic_compactness_defect(ensemble: &Ensemble, times: &[f64], k: usize) -> Result<f64> {
    let grid = ensemble.grid();
    let idx = times.iter().map(|&t| grid.index_of(t)).collect::<Result<Vec<_>>>()?;
    let samples: Vec<&[f64]> = idx.iter().flat_map(|&i| ensemble.slice_coords(i)).collect();
    if k == 0 || samples.len() < k {
        return Err(Error::InsufficientSamples {
            needed: k.max(1),
            available: samples.len(),
        });
    }
    Ok(*k_center_radii(&samples, k).last().expect("k >= 1"))
}
