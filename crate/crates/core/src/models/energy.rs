//! Energy bookkeeping along trajectories and the checks built on it: the
//! pointwise energy inequality, its integrated form, the absorbing ball and
//! strong convergence almost everywhere.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::euclid;
use crate::models::Model;
use crate::system::{norm, Trajectory};

/// Samples of `|u|²`, `‖u‖²` and `(g, u)` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub enstrophy: Vec<f64>,
    pub work: Vec<f64>,
    /// Coefficient in front of the enstrophy (ν, or 1 for the toy flow).
    pub nu: f64,
    pub forcing_norm: f64,
}

pub fn energy_ledger(model: &Model, traj: &Trajectory) -> Result<EnergyLedger> {
    if traj.model != model.id() {
        return Err(Error::ModelMismatch {
            left: model.id(),
            right: traj.model,
        });
    }
    let nu = model.dissipation_coefficient();
    let g = &model.forcing().coords;
    let mut ledger = EnergyLedger {
        times: Vec::with_capacity(traj.len()),
        energy: Vec::with_capacity(traj.len()),
        enstrophy: Vec::with_capacity(traj.len()),
        work: Vec::with_capacity(traj.len()),
        nu,
        forcing_norm: model.forcing().norm(),
    };
    for (k, u) in traj.iter_coords().enumerate() {
        ledger.times.push(traj.time(k));
        ledger.energy.push(u.iter().map(|x| x * x).sum());
        ledger.enstrophy.push(model.dissipation(u) / nu);
        ledger.work.push(u.iter().zip(g).map(|(a, b)| a * b).sum());
    }
    Ok(ledger)
}

/// Window length `δ = ε / (2|g|R)`; infinite without forcing.
pub fn a2_delta(eps: f64, forcing_norm: f64, radius: f64) -> f64 {
    let denom = 2.0 * forcing_norm * radius;
    if denom > 0.0 {
        eps / denom
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Pointwise inequality holds at every grid time.
    pub holds: bool,
    /// `max (|u(t)| − |u(t₀)| − ε)` over grid `t₀ ∈ (t − δ, t)`.
    pub worst_delta: f64,
    pub delta_used: f64,
    /// `max_t |G(t)|` where `G(t) = |u(t)|² + 2ν∫‖u‖² − |u(0)|² − 2∫(g,u)`.
    pub cumulative_gap: f64,
    /// `max_{t₀ ≤ t} (G(t) − G(t₀))`; the integrated inequality asks ≤ 0.
    pub cumulative_violation: f64,
    pub initial_energy: f64,
}

/// Cumulative integral on a uniform grid: Simpson on even nodes, a
/// three-point closing panel on odd nodes.
fn cumulative_integral(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    out[1] = h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
    for k in 2..n {
        if k % 2 == 0 {
            out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        } else {
            out[k] = out[k - 1] + h * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]) / 12.0;
        }
    }
    out
}

/// Checks the energy inequality along `traj` in both the pointwise form
/// (`|u(t)| ≤ |u(t₀)| + ε` for grid `t₀ ∈ (t − δ, t)`, `δ = ε/(2|g|R)`) and
/// the integrated form.
pub fn check_energy_inequality(
    traj: &Trajectory,
    ledger: &EnergyLedger,
    eps: f64,
    radius: f64,
) -> Result<EnergyReport> {
    if ledger.times.len() != traj.len() {
        return Err(Error::GridMismatch(format!(
            "ledger has {} samples, trajectory has {}",
            ledger.times.len(),
            traj.len()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let delta = a2_delta(eps, ledger.forcing_norm, radius);
    if traj.len() > 1 && traj.dt >= delta {
        return Err(Error::GridTooCoarse { dt: traj.dt, delta });
    }
    let norms: Vec<f64> = traj.iter_coords().map(norm).collect();
    // Number of earlier grid points strictly inside (t − δ, t).
    let reach = if delta.is_finite() {
        ((delta / traj.dt) - 1e-12).ceil() as usize - 1
    } else {
        usize::MAX
    };
    let mut worst = f64::NEG_INFINITY;
    let mut window: VecDeque<usize> = VecDeque::new();
    for k in 1..norms.len() {
        let j = k - 1;
        while window.back().is_some_and(|&b| norms[b] >= norms[j]) {
            window.pop_back();
        }
        window.push_back(j);
        while window.front().is_some_and(|&f| k - f > reach) {
            window.pop_front();
        }
        if let Some(&m) = window.front() {
            worst = worst.max(norms[k] - norms[m] - eps);
        }
    }
    if norms.len() < 2 {
        worst = -eps;
    }

    let h = traj.dt;
    let diss = cumulative_integral(&ledger.enstrophy, h);
    let work = cumulative_integral(&ledger.work, h);
    let e0 = ledger.energy[0];
    let mut gap: f64 = 0.0;
    let mut violation = f64::NEG_INFINITY;
    let mut running_min = f64::INFINITY;
    for k in 0..ledger.energy.len() {
        let g = ledger.energy[k] + 2.0 * ledger.nu * diss[k] - e0 - 2.0 * work[k];
        gap = gap.max(g.abs());
        running_min = running_min.min(g);
        violation = violation.max(g - running_min);
    }
    Ok(EnergyReport {
        holds: worst <= 0.0,
        worst_delta: worst,
        delta_used: delta,
        cumulative_gap: gap,
        cumulative_violation: violation,
        initial_energy: e0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingReport {
    pub radius: f64,
    /// First grid time after which `|u| ≤ radius` for good, per member.
    pub entry_times: Vec<Option<f64>>,
    /// Every member entered and never left afterwards.
    pub all_absorbed: bool,
    pub latest_entry: Option<f64>,
}

/// Absorbing-ball check over a family of trajectories.
pub fn check_absorbing(members: &[Trajectory], radius: f64) -> AbsorbingReport {
    let entry_times: Vec<Option<f64>> = members
        .iter()
        .map(|traj| {
            let first_in = traj.iter_coords().position(|c| norm(c) <= radius)?;
            let stays = traj.iter_coords().skip(first_in).all(|c| norm(c) <= radius);
            stays.then(|| traj.time(first_in))
        })
        .collect();
    let all_absorbed = !entry_times.is_empty() && entry_times.iter().all(Option::is_some);
    let latest_entry = if all_absorbed {
        entry_times.iter().flatten().copied().reduce(f64::max)
    } else {
        None
    };
    AbsorbingReport {
        radius,
        entry_times,
        all_absorbed,
        latest_entry,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A3Report {
    /// Fraction of grid points of `[t0, t0 + T]` where the last member is
    /// within `tol` of the limit in the strong metric.
    pub fraction_strong: f64,
    /// `(∫ |u_n − u|²)^{1/2}` per member.
    pub l2_distances: Vec<f64>,
    /// The L²-in-time distances are nonincreasing along the sequence.
    pub decreasing: bool,
}

/// Strong convergence almost everywhere for a weakly convergent sequence.
pub fn check_a3(seq: &[Trajectory], limit: &Trajectory, horizon: f64, tol: f64) -> Result<A3Report> {
    let last = seq.last().ok_or(Error::EmptySet("check_a3: sequence"))?;
    let start = limit.t0;
    let end_idx = limit
        .index_of(start + horizon)
        .map_err(|_| Error::GridMismatch(format!("limit does not cover [{start}, {}]", start + horizon)))?;
    for u in seq {
        if u.model != limit.model
            || !u.aligned_with(limit)
            || u.index_of(start).is_err()
            || u.index_of(start + horizon).is_err()
        {
            return Err(Error::GridMismatch(
                "sequence member does not share the limit grid".into(),
            ));
        }
    }
    let profile = |u: &Trajectory| -> Vec<f64> {
        let i0 = u.index_of(start).expect("checked");
        (0..=end_idx)
            .map(|k| euclid(u.coords(i0 + k), limit.coords(k)))
            .collect()
    };
    let last_profile = profile(last);
    let inside = last_profile.iter().filter(|&&d| d < tol).count();
    let fraction_strong = inside as f64 / last_profile.len() as f64;
    let l2_distances: Vec<f64> = seq
        .iter()
        .map(|u| {
            let sq: Vec<f64> = profile(u).iter().map(|d| d * d).collect();
            let h = limit.dt;
            let integral = if sq.len() < 2 {
                0.0
            } else {
                h * (sq.iter().sum::<f64>() - 0.5 * (sq[0] + sq[sq.len() - 1]))
            };
            integral.max(0.0).sqrt()
        })
        .collect();
    let decreasing = l2_distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    Ok(A3Report {
        fraction_strong,
        l2_distances,
        decreasing,
    })
}
