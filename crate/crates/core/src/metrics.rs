//! Strong and weak phase-space metrics, their trajectory-space lifts, and
//! point/set distances.
//!
//! The strong metric is the Euclidean distance of coordinates, i.e. the L²
//! distance of the represented fields. The weak metric is
//!
//! ```text
//! d_w(u, v) = Σ_κ 2^{-|κ|} · δ_κ / (1 + δ_κ),   δ_κ = |u_κ − v_κ|
//! ```
//!
//! summed over the stored modes, where `|κ|` is the ℓ¹ norm of the wave
//! vector and `δ_κ` is the L² norm of the difference restricted to the
//! coordinate block of `κ` (both polarizations, conjugate pair folded in).
//! Shell and toy models use the 1-based coordinate index as `|κ|`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::nse;
use crate::system::{ModelId, State, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Strong,
    Weak,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Strong => "strong",
            MetricKind::Weak => "weak",
        }
    }
}

/// Truncation of the `Σ_{T ≥ 1} 2^{-T}` series defining the metric on
/// `C([a, ∞); X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajMetricParams {
    pub t_max_windows: u32,
}

impl Default for TrajMetricParams {
    fn default() -> Self {
        Self { t_max_windows: 8 }
    }
}

/// One coordinate block of the weak metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakBlock {
    pub start: usize,
    pub len: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakLayout {
    pub dim: usize,
    pub blocks: Vec<WeakBlock>,
}

impl WeakLayout {
    fn build(id: ModelId) -> Self {
        if id.kind.is_nse() {
            let (space_dim, pols) = nse::geometry(id.kind);
            let modes = nse::half_modes(space_dim, id.truncation);
            let len = 2 * pols;
            let blocks = modes
                .iter()
                .enumerate()
                .map(|(i, k)| WeakBlock {
                    start: i * len,
                    len,
                    weight: 0.5f64.powi(k.iter().map(|c| c.abs()).sum()),
                })
                .collect();
            Self {
                dim: modes.len() * len,
                blocks,
            }
        } else {
            let dim = id.truncation as usize;
            let blocks = (0..dim)
                .map(|i| WeakBlock {
                    start: i,
                    len: 1,
                    weight: 0.5f64.powi(i as i32 + 1),
                })
                .collect();
            Self { dim, blocks }
        }
    }

    /// `W = Σ 2^{-|κ|}` over the stored modes; `d_w ≤ W·d_s`.
    pub fn total_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).sum()
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|blk| {
                let d = a[blk.start..blk.start + blk.len]
                    .iter()
                    .zip(&b[blk.start..blk.start + blk.len])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                blk.weight * d / (1.0 + d)
            })
            .sum()
    }
}

/// Shared weak-metric layout for a model id.
pub fn weak_layout(id: ModelId) -> Arc<WeakLayout> {
    static CACHE: OnceLock<RwLock<HashMap<ModelId, Arc<WeakLayout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(l) = cache.read().expect("layout cache poisoned").get(&id) {
        return l.clone();
    }
    let layout = Arc::new(WeakLayout::build(id));
    cache
        .write()
        .expect("layout cache poisoned")
        .entry(id)
        .or_insert(layout)
        .clone()
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A resolved pointwise metric for one model, usable on raw coordinates.
#[derive(Debug, Clone)]
pub struct PointMetric {
    pub kind: MetricKind,
    layout: Option<Arc<WeakLayout>>,
}

impl PointMetric {
    pub fn new(kind: MetricKind, model: ModelId) -> Self {
        let layout = match kind {
            MetricKind::Strong => None,
            MetricKind::Weak => Some(weak_layout(model)),
        };
        Self { kind, layout }
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.layout {
            None => euclid(a, b),
            Some(l) => l.dist(a, b),
        }
    }

    /// `inf_{y ∈ set} d(x, y)`; `+∞` for an empty set.
    pub fn point_set(&self, x: &[f64], set: &[State]) -> f64 {
        set.iter()
            .map(|y| self.dist(x, &y.coords))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_layout(x: &State) -> Result<()> {
    let dim = weak_layout(x.model).dim;
    if x.dim() != dim {
        return Err(Error::ModelMismatch {
            left: x.model,
            right: x.model,
        });
    }
    Ok(())
}

/// `d_s(x, y) = |x − y|`.
pub fn strong_dist(x: &State, y: &State) -> Result<f64> {
    x.ensure_same_model(y)?;
    Ok(euclid(&x.coords, &y.coords))
}

/// Weighted Fourier-mode metric `d_w`.
pub fn weak_dist(x: &State, y: &State) -> Result<f64> {
    x.ensure_same_model(y)?;
    check_layout(x)?;
    Ok(weak_layout(x.model).dist(&x.coords, &y.coords))
}

pub fn dist(x: &State, y: &State, m: MetricKind) -> Result<f64> {
    match m {
        MetricKind::Strong => strong_dist(x, y),
        MetricKind::Weak => weak_dist(x, y),
    }
}

fn ensure_traj_pair(u: &Trajectory, v: &Trajectory) -> Result<()> {
    if u.model != v.model || u.dim() != v.dim() {
        return Err(Error::ModelMismatch {
            left: u.model,
            right: v.model,
        });
    }
    if !u.aligned_with(v) {
        return Err(Error::GridMismatch(format!(
            "grids (t0 = {}, dt = {}) and (t0 = {}, dt = {}) are not aligned",
            u.t0, u.dt, v.t0, v.dt
        )));
    }
    Ok(())
}

/// `sup_{t ∈ [a, b]} d(u(t), v(t))` over grid points.
pub fn traj_dist_window(u: &Trajectory, v: &Trajectory, a: f64, b: f64, m: MetricKind) -> Result<f64> {
    ensure_traj_pair(u, v)?;
    if a > b {
        return Err(Error::EmptyWindow { a, b });
    }
    let (ia, ib) = (u.index_of(a)?, u.index_of(b)?);
    let ja = v.index_of(a)?;
    v.index_of(b)?;
    let pm = PointMetric::new(m, u.model);
    Ok((0..=ib - ia)
        .map(|k| pm.dist(u.coords(ia + k), v.coords(ja + k)))
        .fold(0.0, f64::max))
}

/// Pointwise distances `d(u(t_u + kΔ), v(t_v + kΔ))`, `k = 0..count`.
pub(crate) fn pointwise<'a>(
    pm: &'a PointMetric,
    u: &'a Trajectory,
    iu: usize,
    v: &'a Trajectory,
    iv: usize,
    count: usize,
) -> impl Iterator<Item = f64> + 'a {
    (0..count).map(move |k| pm.dist(u.coords(iu + k), v.coords(iv + k)))
}

/// Folds pointwise distances sampled from `a` onward into the truncated
/// tail metric `Σ_{T=1}^{Tmax} 2^{-T} s_T/(1+s_T)`, where `s_T` is the sup
/// over grid points in `[a, a+T]`.
pub(crate) fn tail_from_pointwise<I>(dists: I, dt: f64, p: TrajMetricParams) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut total = 0.0;
    let mut sup: f64 = 0.0;
    let mut window = 1u32;
    for (k, d) in dists.into_iter().enumerate() {
        let t = k as f64 * dt;
        while window <= p.t_max_windows && t > window as f64 + 1e-9 * dt {
            total += 0.5f64.powi(window as i32) * sup / (1.0 + sup);
            window += 1;
        }
        if window > p.t_max_windows {
            break;
        }
        sup = sup.max(d);
    }
    while window <= p.t_max_windows {
        total += 0.5f64.powi(window as i32) * sup / (1.0 + sup);
        window += 1;
    }
    total
}

/// Number of grid samples needed to cover `[a, a + t_max_windows]`.
pub(crate) fn tail_samples(dt: f64, p: TrajMetricParams) -> usize {
    (p.t_max_windows as f64 / dt - 1e-7).ceil() as usize + 1
}

/// Truncated metric on `C([a, ∞); X)`; the result is below 1.
pub fn traj_dist_tail(u: &Trajectory, v: &Trajectory, a: f64, m: MetricKind, p: TrajMetricParams) -> Result<f64> {
    ensure_traj_pair(u, v)?;
    if p.t_max_windows < 1 {
        return Err(Error::InvalidParameter("t_max_windows must be at least 1".into()));
    }
    let needed = a + p.t_max_windows as f64;
    let available = u.end_time().min(v.end_time());
    if available < needed - 1e-7 * u.dt {
        return Err(Error::HorizonTooShort { needed, available });
    }
    let iu = u.index_of(a)?;
    let iv = v.index_of(a)?;
    let count = tail_samples(u.dt, p);
    let pm = PointMetric::new(m, u.model);
    Ok(tail_from_pointwise(pointwise(&pm, u, iu, v, iv, count), u.dt, p))
}

/// `d(x, A) = inf_{y ∈ A} d(x, y)`.
pub fn point_set_dist(x: &State, set: &[State], m: MetricKind) -> Result<f64> {
    let first = set.first().ok_or(Error::EmptySet("point_set_dist"))?;
    x.ensure_same_model(first)?;
    Ok(PointMetric::new(m, x.model).point_set(&x.coords, set))
}

/// One-sided Hausdorff semi-distance `sup_{a ∈ A} d(a, B)`.
pub fn set_semidist(a: &[State], b: &[State], m: MetricKind) -> Result<f64> {
    let fa = a.first().ok_or(Error::EmptySet("set_semidist: first set"))?;
    let fb = b.first().ok_or(Error::EmptySet("set_semidist: second set"))?;
    fa.ensure_same_model(fb)?;
    let pm = PointMetric::new(m, fa.model);
    Ok(a.iter().map(|x| pm.point_set(&x.coords, b)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::ModelKind;

    fn toy(c: &[f64]) -> State {
        State::new(ModelId::new(ModelKind::ToyContraction, c.len() as u32), c.to_vec()).unwrap()
    }

    fn line(values: &[f64], dt: f64) -> Trajectory {
        let states: Vec<State> = values.iter().map(|v| toy(&[*v])).collect();
        Trajectory::from_states(0.0, dt, &states).unwrap()
    }

    #[test]
    fn strong_examples() {
        assert_eq!(strong_dist(&toy(&[1.0, 2.0]), &toy(&[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(strong_dist(&toy(&[0.0, 3.0]), &toy(&[0.0, 0.0])).unwrap(), 3.0);
        let other = State::new(ModelId::new(ModelKind::Dyadic, 2), vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            strong_dist(&toy(&[0.0, 0.0]), &other),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn weak_single_mode_difference() {
        let id = ModelId::new(ModelKind::GalerkinNse2d, 3);
        let layout = weak_layout(id);
        let modes = nse::half_modes(2, 3);
        for (i, k) in modes.iter().enumerate() {
            let mut a = vec![0.0; layout.dim];
            a[2 * i] = 0.6;
            a[2 * i + 1] = 0.8;
            let x = State::new(id, a).unwrap();
            let z = State::zeros(id, layout.dim);
            let l1 = k[0].abs() + k[1].abs();
            let expected = 0.5f64.powi(l1) * 0.5;
            assert!((weak_dist(&x, &z).unwrap() - expected).abs() < 1e-15);
        }
        // Shell models: weight 2^{-n} with n the 1-based shell.
        let d = weak_dist(&toy(&[0.0, 1.0]), &toy(&[0.0, 0.0])).unwrap();
        assert!((d - 0.25 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn weak_is_bounded_by_total_weight() {
        let id = ModelId::new(ModelKind::GalerkinNse2d, 2);
        let layout = weak_layout(id);
        let far = State::new(id, vec![1e9; layout.dim]).unwrap();
        let z = State::zeros(id, layout.dim);
        assert!(weak_dist(&far, &z).unwrap() < layout.total_weight());
    }

    #[test]
    fn window_metric_examples() {
        let u = line(&[0.0, 1.0, 2.0, 3.0, 4.0], 0.5);
        let v = u.map_states(|_, _, c| c[0] += 0.25).unwrap();
        assert_eq!(traj_dist_window(&u, &u, 0.0, 2.0, MetricKind::Strong).unwrap(), 0.0);
        let d = traj_dist_window(&u, &v, 0.0, 2.0, MetricKind::Strong).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        let w = u.map_states(|k, _, c| c[0] += 0.1 * k as f64).unwrap();
        let small = traj_dist_window(&u, &w, 0.0, 1.0, MetricKind::Strong).unwrap();
        let large = traj_dist_window(&u, &w, 0.0, 2.0, MetricKind::Strong).unwrap();
        assert!(small <= large);
        assert!(matches!(
            traj_dist_window(&u, &v, 0.25, 1.0, MetricKind::Strong),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn tail_metric_constant_offset_is_geometric() {
        let n = 101;
        let vals: Vec<f64> = (0..n).map(|k| (k as f64 * 0.1).sin()).collect();
        let u = line(&vals, 0.1);
        let dist = 0.7;
        let v = u.map_states(|_, _, c| c[0] += dist).unwrap();
        for tmax in 1..=10u32 {
            let p = TrajMetricParams { t_max_windows: tmax };
            let got = traj_dist_tail(&u, &v, 0.0, MetricKind::Strong, p).unwrap();
            let expected = dist / (1.0 + dist) * (1.0 - 0.5f64.powi(tmax as i32));
            assert!((got - expected).abs() < 1e-14, "{tmax}: {got} vs {expected}");
            assert!(got < 1.0);
        }
        assert_eq!(
            traj_dist_tail(&u, &u, 0.0, MetricKind::Weak, TrajMetricParams::default()).unwrap(),
            0.0
        );
        assert!(matches!(
            traj_dist_tail(&u, &v, 5.0, MetricKind::Strong, TrajMetricParams { t_max_windows: 8 }),
            Err(Error::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn set_distance_examples() {
        let a = vec![toy(&[0.0]), toy(&[1.0])];
        let b = vec![toy(&[0.0])];
        assert_eq!(point_set_dist(&toy(&[1.0]), &a, MetricKind::Strong).unwrap(), 0.0);
        assert_eq!(point_set_dist(&toy(&[2.5]), &b, MetricKind::Strong).unwrap(), 2.5);
        assert_eq!(set_semidist(&b, &a, MetricKind::Strong).unwrap(), 0.0);
        assert_eq!(set_semidist(&[toy(&[1.0])], &b, MetricKind::Strong).unwrap(), 1.0);
        assert_eq!(set_semidist(&a, &b, MetricKind::Strong).unwrap(), 1.0);
        assert!(matches!(
            point_set_dist(&toy(&[1.0]), &[], MetricKind::Strong),
            Err(Error::EmptySet(_))
        ));
        assert!(matches!(
            set_semidist(&[], &a, MetricKind::Weak),
            Err(Error::EmptySet(_))
        ));
    }
}
