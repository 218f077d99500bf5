//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use evosys::{Model, State};
use nalgebra::{DMatrix, DVector};

/// Steady state of `du/dt = -Λu + N(u)` by Newton's method with an exact
/// Jacobian: `N` is quadratic plus constant, so the central difference
/// `(N(u + e) − N(u − e)) / 2` is its derivative along `e` for any step.
/// Starts from the Stokes solution `Λ⁻¹g`.
pub fn newton_steady_state(model: &Model) -> State {
    let n = model.dim();
    let rates = model.linear_rates().to_vec();
    let g = model.forcing().coords.clone();
    let mut u: Vec<f64> = g.iter().zip(&rates).map(|(g, r)| g / r).collect();
    let mut f = vec![0.0; n];
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let residual = |u: &[f64], out: &mut Vec<f64>| {
        model.nonlinear_into(u, out);
        for i in 0..n {
            out[i] -= rates[i] * u[i];
        }
    };
    for _ in 0..30 {
        residual(&u, &mut f);
        let norm: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-14 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut probe = u.clone();
        for j in 0..n {
            probe[j] = u[j] + 1.0;
            model.nonlinear_into(&probe, &mut plus);
            probe[j] = u[j] - 1.0;
            model.nonlinear_into(&probe, &mut minus);
            probe[j] = u[j];
            for i in 0..n {
                jac[(i, j)] = 0.5 * (plus[i] - minus[i]);
            }
            jac[(j, j)] -= rates[j];
        }
        let step = jac
            .lu()
            .solve(&DVector::from_vec(f.clone()))
            .expect("nonsingular Jacobian at the steady state");
        for i in 0..n {
            u[i] -= step[i];
        }
    }
    residual(&u, &mut f);
    let norm: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm < 1e-12, "Newton did not converge: residual {norm:e}");
    State::new(model.id(), u).unwrap()
}
