//! Hand-built trajectory families used as negative controls.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::system::{Ensemble, ModelId, ModelKind, State, Trajectory};

/// Unit energy drifting up a ladder of shells: during `[n−1, n]` the mass
/// rotates from shell `n` into shell `n+1`. Nothing dissipates, so samples
/// at integer times are mutually orthogonal unit vectors and no finite set
/// of centres covers them.
///
/// Member `i` carries amplitude `1 + i·0.01`.
pub fn energy_escape(shells: u32, horizon: f64, dt: f64, members: usize) -> Result<Ensemble> {
    if horizon + 1.0 > shells as f64 {
        return Err(Error::InvalidParameter(format!(
            "{shells} shells cannot hold an escape over horizon {horizon}"
        )));
    }
    let id = ModelId::new(ModelKind::Dyadic, shells);
    let steps = crate::integrate::step_count(0.0, horizon, dt)?;
    let trajs = (0..members)
        .map(|i| {
            let amp = 1.0 + i as f64 * 0.01;
            let states: Vec<State> = (0..=steps)
                .map(|k| {
                    let t = k as f64 * dt;
                    let n = (t.floor() as usize).min(shells as usize - 2);
                    let s = (t - n as f64).clamp(0.0, 1.0) * FRAC_PI_2;
                    let mut c = vec![0.0; shells as usize];
                    c[n] = amp * s.cos();
                    c[n + 1] = amp * s.sin();
                    State { model: id, coords: c }
                })
                .collect();
            Trajectory::from_states(0.0, dt, &states)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new("energy-escape", trajs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_is_conserved_and_moves_up() {
        let e = energy_escape(12, 10.0, 0.1, 2).unwrap();
        let u = &e.members()[0];
        for c in u.iter_coords() {
            let n2: f64 = c.iter().map(|x| x * x).sum();
            assert!((n2 - 1.0).abs() < 1e-12);
        }
        let at = |t: f64| u.state_at(t).unwrap().coords;
        assert!((at(3.0)[3] - 1.0).abs() < 1e-12);
        assert!((at(7.0)[7] - 1.0).abs() < 1e-12);
    }
}
