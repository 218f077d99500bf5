//! Numerical evolutionary systems: sampled trajectory families over
//! Galerkin Navier–Stokes, dyadic and toy models, with estimators for
//! ω-limits, global and trajectory attractors and checks of their
//! invariance and tracking properties.
//!
//! ```
//! use evosys::{integrate_ensemble, global_attractor, sample_ball, Model, ModelSpec, MetricKind, OmegaParams};
//!
//! let model = Model::build(&ModelSpec::toy(2)).unwrap();
//! let x = sample_ball(model.id(), model.dim(), 1.0, 8, 7);
//! let ens = integrate_ensemble(&model, &x, 0.0, 20.0, 0.01, 10, "X").unwrap();
//! let a = global_attractor(&ens, MetricKind::Strong, &OmegaParams::new(10.0, 20.0, 1, 1e-3)).unwrap();
//! assert!(a.exists && a.set.len() == 1);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod integrate;
pub mod limits;
pub mod metrics;
pub mod models;
pub mod sampling;
pub mod system;
pub mod trajectory_space;
pub mod verification;

pub use error::{Error, Result};
pub use integrate::{
    calibrate_dt, complete_surrogates, integrate, integrate_ensemble, integrate_sampled, semigroup_defect,
};
pub use limits::{
    asymptotic_compactness_defect, global_attractor, horizon_cauchy_defect, is_attracting, omega_limit,
    AttractionReport, AttractorEstimate, OmegaParams, SetEstimate,
};
pub use metrics::{
    dist, point_set_dist, set_semidist, strong_dist, traj_dist_tail, traj_dist_window, weak_dist, MetricKind,
    TrajMetricParams,
};
pub use models::{absorbing_radius, ForcingTerm, Model, ModelSpec};
pub use sampling::{sample_ball, sample_sphere};
pub use system::{
    r_map, r_map_where, restrict, translate, Ensemble, ModelId, ModelKind, PhaseSpace, State, Trajectory,
};
pub use trajectory_space::{
    slice, trajectory_attraction_report, trajectory_attractor, translate_semigroup, TrajAttractionReport,
    TrajectoryAttractor, TrajectorySet,
};
pub use verification::{
    check_left_continuity_implies_continuity, check_maximal_invariant, check_quasi_invariance,
    check_strong_convergence_at_point, check_tracking, check_uniform_strong_convergence, TrackingParams,
    TrackingReport, EPS_LADDER,
};
