//! Fixed-step integrating-factor Runge–Kutta (RK4) time stepping.
//!
//! For `du/dt = -Λu + N(u)` with diagonal `Λ ≥ 0` the stiff linear part is
//! absorbed exactly by the factor `e^{-Λh}`; only `N` is sampled by the
//! classical four-stage tableau.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{set_semidist, MetricKind};
use crate::models::Model;
use crate::system::{Ensemble, State, Trajectory};

/// Number of steps of size `dt` in `[t0, t1]`, or `StepMismatch`.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    let mismatch = || Error::StepMismatch { t0, t1, dt };
    if !(t1 > t0) || !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() || !t1.is_finite() {
        return Err(mismatch());
    }
    let x = (t1 - t0) / dt;
    let n = x.round();
    if n < 1.0 || (x - n).abs() > 1e-7 * x.max(1.0) {
        return Err(mismatch());
    }
    Ok(n as usize)
}

struct Stepper<'a> {
    model: &'a Model,
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a Model, dt: f64) -> Self {
        let rates = model.linear_rates();
        let n = rates.len();
        Self {
            model,
            dt,
            full: rates.iter().map(|r| (-r * dt).exp()).collect(),
            half: rates.iter().map(|r| (-r * dt * 0.5).exp()).collect(),
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn step(&mut self, u: &mut [f64]) {
        let h = self.dt;
        let m = self.model;
        m.nonlinear_into(u, &mut self.k1);
        for i in 0..u.len() {
            self.tmp[i] = self.half[i] * (u[i] + 0.5 * h * self.k1[i]);
        }
        m.nonlinear_into(&self.tmp, &mut self.k2);
        for i in 0..u.len() {
            self.tmp[i] = self.half[i] * u[i] + 0.5 * h * self.k2[i];
        }
        m.nonlinear_into(&self.tmp, &mut self.k3);
        for i in 0..u.len() {
            self.tmp[i] = self.full[i] * u[i] + h * self.half[i] * self.k3[i];
        }
        m.nonlinear_into(&self.tmp, &mut self.k4);
        for i in 0..u.len() {
            u[i] = self.full[i] * u[i]
                + h / 6.0 * (self.full[i] * self.k1[i] + 2.0 * self.half[i] * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// Integrates on `[t0, t1]` with step `dt`, keeping every step.
pub fn integrate(model: &Model, initial: &State, t0: f64, t1: f64, dt: f64) -> Result<Trajectory> {
    integrate_sampled(model, initial, t0, t1, dt, 1)
}

/// Integrates with step `dt`, storing every `save_every`-th state; the
/// returned trajectory has grid spacing `dt·save_every`.
pub fn integrate_sampled(
    model: &Model,
    initial: &State,
    t0: f64,
    t1: f64,
    dt: f64,
    save_every: usize,
) -> Result<Trajectory> {
    model.check_state(initial)?;
    if save_every == 0 {
        return Err(Error::InvalidParameter("save_every must be positive".into()));
    }
    let steps = step_count(t0, t1, dt)?;
    if steps % save_every != 0 {
        return Err(Error::StepMismatch {
            t0,
            t1,
            dt: dt * save_every as f64,
        });
    }
    let dim = model.dim();
    let mut data = Vec::with_capacity(dim * (steps / save_every + 1));
    let mut u = initial.coords.clone();
    data.extend_from_slice(&u);
    let mut stepper = Stepper::new(model, dt);
    for k in 1..=steps {
        stepper.step(&mut u);
        if k % save_every == 0 {
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteState {
                    time: t0 + k as f64 * dt,
                });
            }
            data.extend_from_slice(&u);
        }
    }
    Ok(Trajectory::from_raw(model.id(), t0, dt * save_every as f64, dim, data))
}

/// Integrates one member per initial state. Members are independent and
/// evaluated in parallel; the result is ordered like `initials`.
pub fn integrate_ensemble(
    model: &Model,
    initials: &[State],
    t0: f64,
    t1: f64,
    dt: f64,
    save_every: usize,
    label: &str,
) -> Result<Ensemble> {
    let members = initials
        .par_iter()
        .map(|x| integrate_sampled(model, x, t0, t1, dt, save_every))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(label, members)
}

/// Complete-trajectory surrogates: members started at `-t_back`, so that
/// their restriction to `[0, horizon]` has shed its transient.
pub fn complete_surrogates(
    model: &Model,
    initials: &[State],
    t_back: f64,
    horizon: f64,
    dt: f64,
    save_every: usize,
) -> Result<Ensemble> {
    integrate_ensemble(model, initials, -t_back, horizon, dt, save_every, "complete-surrogates")
}

/// Semigroup sub-composition defect at grid times `s, t ≥ 0`: the
/// semi-distance from `R(t+s)A` to `R(t)R(s)A`, where the outer map
/// re-integrates the time-`s` slice with step `dt` (`dt` must divide the
/// ensemble grid step).
pub fn semigroup_defect(
    model: &Model,
    ensemble: &Ensemble,
    s: f64,
    t: f64,
    dt: f64,
    metric: MetricKind,
) -> Result<f64> {
    let direct = crate::system::r_map(ensemble, s + t)?;
    if t == 0.0 {
        return set_semidist(&direct, &crate::system::r_map(ensemble, s)?, metric);
    }
    let composed = crate::system::r_map(ensemble, s)?
        .par_iter()
        .map(|x| Ok(integrate(model, x, s, s + t, dt)?.last()))
        .collect::<Result<Vec<_>>>()?;
    set_semidist(&direct, &composed, metric)
}

/// Halves `dt` until doubling it changes the terminal strong norm by less
/// than `tol`. Returns the accepted step.
pub fn calibrate_dt(
    model: &Model,
    initial: &State,
    horizon: f64,
    dt0: f64,
    tol: f64,
    max_halvings: usize,
) -> Result<f64> {
    let terminal = |dt: f64| -> Result<f64> { Ok(integrate(model, initial, 0.0, horizon, dt)?.last().norm()) };
    let mut dt = dt0;
    let mut coarse = terminal(dt)?;
    for _ in 0..max_halvings {
        let fine = terminal(dt / 2.0)?;
        if (fine - coarse).abs() < tol {
            return Ok(dt / 2.0);
        }
        dt /= 2.0;
        coarse = fine;
    }
    Err(Error::InvalidParameter(format!(
        "time step did not converge to {tol} after {max_halvings} halvings"
    )))
}
