use anyhow::{bail, Context as _};
use evosys::limits::{asymptotic_compactness_defect, horizon_cauchy_defect, AttractorEstimate};
use evosys::models::{check_absorbing, check_energy_inequality, default_radius, energy_ledger, EnergyLedger};
use evosys::trajectory_space::TrajectorySet;
use evosys::verification::{check_left_continuity_implies_continuity, TrackingParams};
use evosys::{
    check_maximal_invariant, check_quasi_invariance, check_strong_convergence_at_point, check_tracking,
    check_uniform_strong_convergence, complete_surrogates, global_attractor, integrate_ensemble, integrate_sampled,
    omega_limit, sample_ball, sample_sphere, set_semidist, slice, trajectory_attraction_report, trajectory_attractor,
    Ensemble, Error, MetricKind, Model, SetEstimate, State, TrajMetricParams, Trajectory,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CheckSection, ExperimentConfig};

/// Relative tolerance on the integrated energy balance.
pub const EI_RELATIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisFail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub check: String,
    pub status: Status,
    pub detail: Value,
}

impl Record {
    fn new(check: &str, pass: bool, detail: Value) -> Self {
        Self {
            check: check.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedSet {
    pub name: String,
    pub model: String,
    pub metric: MetricKind,
    pub tol: f64,
    pub horizon: f64,
    pub points: Vec<Vec<f64>>,
}

impl NamedSet {
    fn from_estimate(name: &str, est: &SetEstimate) -> Self {
        Self {
            name: name.to_string(),
            model: est.model.to_string(),
            metric: est.metric,
            tol: est.tol,
            horizon: est.horizon,
            points: est.points.iter().map(|p| p.coords.clone()).collect(),
        }
    }
}

#[derive(Default)]
pub struct Outputs {
    pub trajectories: Option<Ensemble>,
    pub ledgers: Vec<EnergyLedger>,
    pub sets: Vec<NamedSet>,
    pub reports: Vec<Record>,
    /// Set when a numeric error aborted the run.
    pub aborted: Option<String>,
}

impl Outputs {
    pub fn exit_code(&self) -> i32 {
        if self.aborted.is_some() {
            1
        } else if self.reports.iter().any(|r| r.status == Status::Fail) {
            2
        } else if self.reports.iter().any(|r| r.status == Status::HypothesisFail) {
            3
        } else {
            0
        }
    }
}

/// Lazily built shared inputs of one run.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub model: Model,
    pub radius: f64,
    ensemble: Option<Ensemble>,
    library: Option<Ensemble>,
    attractor: Option<AttractorEstimate>,
}

impl Context {
    pub fn new(cfg: ExperimentConfig) -> anyhow::Result<Self> {
        let model = Model::build(&cfg.model.spec()).context("model")?;
        let radius = cfg.model.radius.unwrap_or_else(|| default_radius(&model));
        Ok(Self {
            cfg,
            model,
            radius,
            ensemble: None,
            library: None,
            attractor: None,
        })
    }

    fn integrate_from(&self, x: &[State], t0: f64, label: &str) -> evosys::Result<Ensemble> {
        integrate_ensemble(
            &self.model,
            x,
            t0,
            self.cfg.horizon,
            self.cfg.dt,
            self.cfg.output_stride,
            label,
        )
    }

    /// Ensemble started from seeded samples of the ball `X`.
    pub fn ensemble(&mut self) -> evosys::Result<&Ensemble> {
        if self.ensemble.is_none() {
            let x = sample_ball(
                self.model.id(),
                self.model.dim(),
                self.radius,
                self.cfg.ensemble_size,
                self.cfg.seed,
            );
            self.ensemble = Some(self.integrate_from(&x, 0.0, "X")?);
        }
        Ok(self.ensemble.as_ref().expect("built"))
    }

    /// Complete-trajectory surrogates started at `-t_back`.
    pub fn library(&mut self) -> evosys::Result<&Ensemble> {
        if self.library.is_none() {
            let lib = &self.cfg.library;
            let x = sample_ball(
                self.model.id(),
                self.model.dim(),
                self.radius,
                lib.size,
                self.cfg.seed.wrapping_add(1),
            );
            self.library = Some(complete_surrogates(
                &self.model,
                &x,
                lib.t_back,
                self.cfg.horizon,
                self.cfg.dt,
                self.cfg.output_stride,
            )?);
        }
        Ok(self.library.as_ref().expect("built"))
    }

    pub fn attractor(&mut self) -> anyhow::Result<&AttractorEstimate> {
        if self.attractor.is_none() {
            let p = self.cfg.omega()?;
            let a = global_attractor(self.ensemble()?, MetricKind::Strong, &p)?;
            self.attractor = Some(a);
        }
        Ok(self.attractor.as_ref().expect("built"))
    }
}

fn ledgers(model: &Model, e: &Ensemble) -> evosys::Result<Vec<EnergyLedger>> {
    e.members().iter().map(|t| energy_ledger(model, t)).collect()
}

pub fn simulate(ctx: &mut Context) -> anyhow::Result<Outputs> {
    let e = ctx.ensemble()?.clone();
    Ok(Outputs {
        ledgers: ledgers(&ctx.model, &e)?,
        trajectories: Some(e),
        ..Outputs::default()
    })
}

pub fn omega(ctx: &mut Context) -> anyhow::Result<Outputs> {
    let p = ctx.cfg.omega()?;
    let mut out = simulate(ctx)?;
    let e = ctx.ensemble()?;
    let strong = omega_limit(e, MetricKind::Strong, &p)?;
    let weak = omega_limit(e, MetricKind::Weak, &p)?;
    let inclusion = set_semidist(&strong.points, &weak.points, MetricKind::Strong)?;
    out.reports.push(Record::new(
        "omega_inclusion",
        inclusion <= p.cluster_tol,
        json!({ "semidist_strong_to_weak": inclusion, "tol": p.cluster_tol }),
    ));
    if e.end_time() >= 2.0 * p.t_max - 1e-9 {
        let d = horizon_cauchy_defect(e, MetricKind::Strong, &p)?;
        out.reports.push(Record::new(
            "horizon_cauchy",
            d <= 2.0 * p.cluster_tol,
            json!({ "hausdorff": d, "tol": 2.0 * p.cluster_tol }),
        ));
    }
    out.sets.push(NamedSet::from_estimate("omega_strong", &strong));
    out.sets.push(NamedSet::from_estimate("omega_weak", &weak));
    Ok(out)
}

pub fn attractor(ctx: &mut Context) -> anyhow::Result<Outputs> {
    let p = ctx.cfg.omega()?;
    let mut out = simulate(ctx)?;
    let strong = ctx.attractor()?.clone();
    let weak = global_attractor(ctx.ensemble()?, MetricKind::Weak, &p)?;
    for (name, a) in [("attractor_strong", &strong), ("attractor_weak", &weak)] {
        out.sets.push(NamedSet::from_estimate(name, &a.set));
        out.reports.push(Record::new(
            name,
            a.exists,
            json!({ "attraction": a.attraction, "points": a.set.len() }),
        ));
    }
    let agree = set_semidist(&strong.set.points, &weak.set.points, MetricKind::Strong)?.max(set_semidist(
        &weak.set.points,
        &strong.set.points,
        MetricKind::Strong,
    )?);
    out.reports.push(Record::new(
        "strong_weak_agreement",
        agree <= 2.0 * p.cluster_tol,
        json!({ "hausdorff": agree, "tol": 2.0 * p.cluster_tol }),
    ));
    Ok(out)
}

fn trajectory_sets(ctx: &mut Context) -> anyhow::Result<(TrajectorySet, evosys::TrajectoryAttractor)> {
    let params = TrajMetricParams::default();
    let tol = ctx.cfg.omega.as_ref().map_or(1e-3, |o| o.cluster_tol);
    let k = TrajectorySet::from_ensemble(ctx.ensemble()?, params)?;
    let att = trajectory_attractor(&k, ctx.library()?, params, tol)?;
    Ok((k, att))
}

pub fn trajectory_attractor_cmd(ctx: &mut Context) -> anyhow::Result<Outputs> {
    let mut out = simulate(ctx)?;
    let (k, att) = trajectory_sets(ctx)?;
    out.reports.push(Record::new(
        "translation_invariance",
        att.invariance_defect <= att.cluster_tol,
        json!({ "defect": att.invariance_defect, "tol": att.cluster_tol, "shifts": att.sampled_shifts }),
    ));
    let eps = ctx.cfg.omega.as_ref().map_or(1e-3, |o| o.cluster_tol);
    let report = trajectory_attraction_report(&k, &att.set, eps, 1)?;
    out.reports.push(Record::new(
        "trajectory_attraction",
        report.t_entry.is_some(),
        serde_json::to_value(&report)?,
    ));
    let end = att.set.end_time();
    for i in 0..5 {
        let t = snap(end * i as f64 / 5.0, att.set.dt());
        let points = slice(&att.set, t)?;
        out.sets.push(NamedSet {
            name: format!("trajectory_attractor_slice_t{t}"),
            model: ctx.model.id().to_string(),
            metric: MetricKind::Weak,
            tol: att.cluster_tol,
            horizon: end,
            points: points.into_iter().map(|p| p.coords).collect(),
        });
    }
    Ok(out)
}

fn snap(t: f64, dt: f64) -> f64 {
    (t / dt).floor() * dt
}

pub fn verify(ctx: &mut Context, selected: &[String]) -> anyhow::Result<Outputs> {
    let checks: Vec<CheckSection> = if selected.is_empty() {
        ctx.cfg.checks.clone()
    } else {
        selected
            .iter()
            .map(|name| {
                ctx.cfg
                    .checks
                    .iter()
                    .find(|c| &c.name == name)
                    .cloned()
                    .unwrap_or_else(|| CheckSection::named(name))
            })
            .collect()
    };
    if checks.is_empty() {
        bail!("checks: nothing to verify; add [[checks]] entries or pass --check");
    }
    let mut probe = ctx.cfg.clone();
    probe.checks = checks.clone();
    probe.validate()?;

    let mut out = simulate(ctx)?;
    for c in &checks {
        match run_check(ctx, c) {
            Ok(r) => out.reports.push(r),
            Err(e) => {
                let message = format!("{e:#}");
                out.reports.push(Record {
                    check: c.name.clone(),
                    status: Status::Error,
                    detail: json!({ "error": message }),
                });
                out.aborted = Some(message);
                break;
            }
        }
    }
    Ok(out)
}

fn min_eps(c: &CheckSection) -> f64 {
    c.eps.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Family `x₀ + 2^{-n} e₀`, `n = 1..=12`, integrated like the ensemble.
fn perturbed_family(ctx: &mut Context) -> anyhow::Result<(Vec<Trajectory>, Trajectory)> {
    let limit = ctx.ensemble()?.members()[0].clone();
    let x0 = limit.first();
    let seq = (1..=12)
        .map(|n| {
            let mut c = x0.coords.clone();
            c[0] += 0.5f64.powi(n);
            let x = State::new(x0.model, c)?;
            integrate_sampled(&ctx.model, &x, 0.0, ctx.cfg.horizon, ctx.cfg.dt, ctx.cfg.output_stride)
        })
        .collect::<evosys::Result<Vec<_>>>()?;
    Ok((seq, limit))
}

fn hypothesis(check: &str, msg: String) -> Record {
    Record {
        check: check.to_string(),
        status: Status::HypothesisFail,
        detail: json!({ "hypothesis": msg }),
    }
}

fn run_check(ctx: &mut Context, c: &CheckSection) -> anyhow::Result<Record> {
    let name = c.name.as_str();
    match name {
        "energy" => {
            let e = ctx.ensemble()?.clone();
            let mut pass = true;
            let mut rungs = Vec::new();
            for &eps in &c.eps {
                let mut worst_delta = f64::NEG_INFINITY;
                let mut worst_gap: f64 = 0.0;
                for t in e.members() {
                    let ledger = energy_ledger(&ctx.model, t)?;
                    let r = check_energy_inequality(t, &ledger, eps, ctx.radius)?;
                    let rel = r.cumulative_gap / r.initial_energy.max(f64::MIN_POSITIVE);
                    pass &= r.holds && rel <= EI_RELATIVE_TOL;
                    worst_delta = worst_delta.max(r.worst_delta);
                    worst_gap = worst_gap.max(rel);
                }
                rungs.push(json!({ "eps": eps, "worst_delta": worst_delta, "relative_gap": worst_gap }));
            }
            Ok(Record::new(
                name,
                pass,
                json!({ "radius": ctx.radius, "ladder": rungs }),
            ))
        }
        "absorbing" => {
            let x = sample_sphere(
                ctx.model.id(),
                ctx.model.dim(),
                2.0 * ctx.radius,
                ctx.cfg.ensemble_size,
                ctx.cfg.seed.wrapping_add(2),
            );
            let e = ctx.integrate_from(&x, 0.0, "2R-sphere")?;
            let r = check_absorbing(e.members(), ctx.radius);
            Ok(Record::new(name, r.all_absorbed, serde_json::to_value(&r)?))
        }
        "quasi_invariance" => {
            let est = ctx.attractor()?.set.clone();
            let t_win = (ctx.cfg.horizon / 4.0).min(1.0);
            let t_win = snap(t_win, ctx.cfg.grid_dt());
            let mut pass = true;
            let mut rungs = Vec::new();
            for &eps in &c.eps {
                let r = check_quasi_invariance(&est, ctx.library()?, eps, t_win)?;
                pass &= r.passed();
                rungs.push(r);
            }
            Ok(Record::new(name, pass, json!({ "ladder": rungs })))
        }
        "maximal_invariant" => {
            let est = ctx.attractor()?.set.clone();
            let mut pass = true;
            let mut rungs = Vec::new();
            for &eps in &c.eps {
                let r = check_maximal_invariant(&est, ctx.library()?, eps)?;
                pass &= r.passed();
                rungs.push(r);
            }
            Ok(Record::new(name, pass, json!({ "ladder": rungs })))
        }
        "tracking" => {
            let m = c.metric.unwrap_or(MetricKind::Strong);
            let e = ctx.ensemble()?.clone();
            let params = TrackingParams::default();
            let mut pass = true;
            let mut rungs = Vec::new();
            for &eps in &c.eps {
                match check_tracking(&e, ctx.library()?, m, eps, &params) {
                    Ok(r) => {
                        let errors = r.errors();
                        let monotone = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
                        rungs.push(json!({ "eps": eps, "monotone": monotone, "report": r }));
                    }
                    Err(Error::NoMatch { eps, best }) => {
                        pass = false;
                        rungs.push(json!({ "eps": eps, "no_match": best }));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(Record::new(name, pass, json!({ "metric": m, "ladder": rungs })))
        }
        "strong_convergence" => {
            let (seq, limit) = perturbed_family(ctx)?;
            let t_star = snap(ctx.cfg.horizon / 2.0, limit.dt);
            match check_strong_convergence_at_point(&seq, &limit, t_star, &c.eps) {
                Ok(r) => Ok(Record::new(name, r.converged, json!({ "t_star": t_star, "report": r }))),
                Err(Error::HypothesisFail(msg)) => Ok(hypothesis(name, msg)),
                Err(e) => Err(e.into()),
            }
        }
        "uniform_strong_convergence" => {
            let (seq, limit) = perturbed_family(ctx)?;
            let window = (limit.t0, limit.end_time());
            match check_uniform_strong_convergence(&seq, &limit, window, min_eps(c)) {
                Ok(r) => Ok(Record::new(name, r.converged, json!({ "window": window, "report": r }))),
                Err(Error::HypothesisFail(msg)) => Ok(hypothesis(name, msg)),
                Err(e) => Err(e.into()),
            }
        }
        "left_continuity" => {
            let tol = min_eps(c);
            let e = ctx.ensemble()?;
            let mut failures = Vec::new();
            for (i, t) in e.members().iter().enumerate() {
                for k in 1..t.len() - 1 {
                    if !check_left_continuity_implies_continuity(t, t.time(k), tol)? {
                        failures.push(json!({ "member": i, "time": t.time(k) }));
                    }
                }
            }
            Ok(Record::new(
                name,
                failures.is_empty(),
                json!({ "tol": tol, "failures": failures }),
            ))
        }
        "compactness" => {
            let p = ctx.cfg.omega()?;
            let dt = ctx.cfg.grid_dt() * p.sample_stride as f64;
            let n = ((p.t_max - p.t_transient) / dt).floor() as usize;
            let times: Vec<f64> = (0..=n).map(|i| p.t_transient + i as f64 * dt).collect();
            let k = c.k.unwrap_or(1);
            let defect = asymptotic_compactness_defect(ctx.ensemble()?, &times, k)?;
            Ok(Record::new(
                name,
                defect < min_eps(c),
                json!({ "k": k, "defect": defect, "samples": times.len() * ctx.cfg.ensemble_size }),
            ))
        }
        "trajectory_attraction" => {
            let (k, att) = trajectory_sets(ctx)?;
            let mut pass = true;
            let mut rungs = Vec::new();
            for &eps in &c.eps {
                let r = trajectory_attraction_report(&k, &att.set, eps, 1)?;
                pass &= r.t_entry.is_some() && (!r.strong_mode || r.t_entry_strong.is_some());
                rungs.push(json!({
                    "eps": eps,
                    "t_entry": r.t_entry,
                    "strong_mode": r.strong_mode,
                    "t_entry_strong": r.t_entry_strong,
                }));
            }
            Ok(Record::new(
                name,
                pass,
                json!({ "invariance_defect": att.invariance_defect, "members": att.set.len(), "ladder": rungs }),
            ))
        }
        other => bail!("checks.name: unknown check {other:?}"),
    }
}
