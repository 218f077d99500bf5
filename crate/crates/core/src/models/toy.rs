use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::system::State;

/// The linear contraction semiflow `S(t)x = e^{-t}x`.
#[derive(Debug, Clone)]
pub struct ToyContraction {
    spec: ModelSpec,
    rates: Vec<f64>,
    forcing: State,
}

impl ToyContraction {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        if !spec.forcing.is_empty() {
            return Err(Error::InvalidModel("the toy contraction takes no forcing".into()));
        }
        let dim = spec.truncation as usize;
        Ok(Self {
            spec: spec.clone(),
            rates: vec![1.0; dim],
            forcing: State::zeros(spec.id(), dim),
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

    /// Closed-form flow.
    pub fn exact_flow(x: &State, t: f64) -> State {
        State {
            model: x.model,
            coords: x.coords.iter().map(|c| c * (-t).exp()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{toy_rhs, Model};

    #[test]
    fn rhs_is_minus_identity() {
        let m = Model::build(&ModelSpec::toy(3)).unwrap();
        assert_eq!(toy_rhs(&m, &m.zero_state()).unwrap(), m.zero_state());
        let x = State::new(m.id(), vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(toy_rhs(&m, &x).unwrap().coords, vec![-1.0, 2.0, -0.5]);
    }

    #[test]
    fn closed_form_semigroup() {
        let m = Model::build(&ModelSpec::toy(2)).unwrap();
        let x = State::new(m.id(), vec![1.0, -3.0]).unwrap();
        assert_eq!(ToyContraction::exact_flow(&x, 0.0), x);
        let (t, s) = (0.7, 1.9);
        let lhs = ToyContraction::exact_flow(&x, t + s);
        let rhs = ToyContraction::exact_flow(&ToyContraction::exact_flow(&x, s), t);
        for (a, b) in lhs.coords.iter().zip(&rhs.coords) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn forcing_is_rejected() {
        let mut spec = ModelSpec::toy(1);
        spec.forcing.push(crate::models::ForcingTerm::new(vec![1], 1.0));
        assert!(Model::build(&spec).is_err());
    }
}
