//! Viscous dyadic shell model
//!
//! `da_n/dt = λ^n a_{n-1}² − λ^{n+1} a_n a_{n+1} − ν λ^{2n} a_n + g_n`
//! for shells `n = 1..N`, with `a_0 = a_{N+1} = 0`.

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::system::State;

#[derive(Debug, Clone)]
pub struct DyadicModel {
    spec: ModelSpec,
    /// `λ^n` for `n = 1..=N+1` (index `n - 1`).
    powers: Vec<f64>,
    rates: Vec<f64>,
    forcing: State,
}

impl DyadicModel {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let shells = spec.truncation as usize;
        let powers: Vec<f64> = (1..=shells + 1).map(|n| spec.lambda.powi(n as i32)).collect();
        let rates = powers[..shells].iter().map(|p| spec.nu * p * p).collect();
        let mut g = vec![0.0; shells];
        for term in &spec.forcing {
            let n = match term.mode.as_slice() {
                [n] if *n >= 1 && (*n as usize) <= shells => *n as usize,
                other => {
                    return Err(Error::InvalidModel(format!(
                        "dyadic forcing needs a shell index in 1..={shells}, got {other:?}"
                    )))
                }
            };
            g[n - 1] += term.re;
        }
        Ok(Self {
            spec: spec.clone(),
            powers,
            rates,
            forcing: State {
                model: spec.id(),
                coords: g,
            },
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn forcing(&self) -> &State {
        &self.forcing
    }

    pub fn shells(&self) -> usize {
        self.rates.len()
    }

    /// Nonlinear cascade term alone (no forcing, no dissipation).
    pub fn cascade_into(&self, a: &[f64], out: &mut [f64]) {
        let n = a.len();
        for i in 0..n {
            let prev = if i == 0 { 0.0 } else { a[i - 1] };
            let next = if i + 1 == n { 0.0 } else { a[i + 1] };
            out[i] = self.powers[i] * prev * prev - self.powers[i + 1] * a[i] * next;
        }
    }

    pub fn nonlinear_into(&self, a: &[f64], out: &mut [f64]) {
        self.cascade_into(a, out);
        for (o, g) in out.iter_mut().zip(&self.forcing.coords) {
            *o += g;
        }
    }
}
