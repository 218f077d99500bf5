//! Concrete dissipative evolutionary systems.
//!
//! Every model is written as `du/dt = -Λu + N(u)` with a diagonal,
//! nonnegative linear part `Λ` (viscous dissipation) and a nonlinear part
//! `N` that includes the time-independent forcing. The integrator treats
//! `Λ` exactly through an integrating factor.

mod dyadic;
mod energy;
pub(crate) mod nse;
pub mod synthetic;
mod toy;

pub use dyadic::DyadicModel;
pub use energy::{
    a2_delta, check_a3, check_absorbing, check_energy_inequality, energy_ledger, A3Report, AbsorbingReport,
    EnergyLedger, EnergyReport,
};
pub use nse::GalerkinNse;
pub use toy::ToyContraction;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{ModelId, ModelKind, State};

/// Default relative margin applied on top of the absorbing-ball threshold.
pub const DEFAULT_RADIUS_MARGIN: f64 = 0.1;

/// One forcing entry.
///
/// For the Galerkin models `mode` is the integer wave vector (2 or 3
/// components) and `re`/`im` are the orthonormal-basis coordinates of the
/// selected polarization. For the dyadic model `mode = [n]` names the shell
/// (1-based) and only `re` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTerm {
    pub mode: Vec<i32>,
    #[serde(default)]
    pub polarization: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ForcingTerm {
    pub fn new(mode: Vec<i32>, re: f64) -> Self {
        Self {
            mode,
            polarization: 0,
            re,
            im: 0.0,
        }
    }
}

fn default_period() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_lambda() -> f64 {
    2.0
}

/// Physical and numerical parameters of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Kinematic viscosity ν.
    pub nu: f64,
    /// Period L of the box.
    #[serde(default = "default_period")]
    pub period: f64,
    /// Max `|κ|∞` for the Galerkin models, number of shells for the dyadic
    /// model, dimension for the toy model.
    pub truncation: u32,
    /// Intermode ratio of the dyadic model.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub forcing: Vec<ForcingTerm>,
}

impl ModelSpec {
    pub fn nse_2d(nu: f64, truncation: u32, forcing: Vec<ForcingTerm>) -> Self {
        Self {
            kind: ModelKind::GalerkinNse2d,
            nu,
            period: default_period(),
            truncation,
            lambda: default_lambda(),
            forcing,
        }
    }

    pub fn nse_3d(nu: f64, truncation: u32, forcing: Vec<ForcingTerm>) -> Self {
        Self {
            kind: ModelKind::GalerkinNse3d,
            ..Self::nse_2d(nu, truncation, forcing)
        }
    }

    pub fn dyadic(nu: f64, shells: u32, lambda: f64, forcing: Vec<ForcingTerm>) -> Self {
        Self {
            kind: ModelKind::Dyadic,
            nu,
            period: default_period(),
            truncation: shells,
            lambda,
            forcing,
        }
    }

    pub fn toy(dimension: u32) -> Self {
        Self {
            kind: ModelKind::ToyContraction,
            nu: 1.0,
            period: default_period(),
            truncation: dimension,
            lambda: default_lambda(),
            forcing: Vec::new(),
        }
    }

    pub fn id(&self) -> ModelId {
        ModelId::new(self.kind, self.truncation)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if self.truncation < 1 {
            return bad("truncation must be at least 1".into());
        }
        if self.kind == ModelKind::Dyadic && !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return bad(format!("dyadic lambda must exceed 1, got {}", self.lambda));
        }
        for f in &self.forcing {
            if !f.re.is_finite() || !f.im.is_finite() {
                return bad("forcing must be finite".into());
            }
        }
        Ok(())
    }

    /// Strong norm |g| of the forcing.
    pub fn forcing_norm(&self) -> f64 {
        self.forcing
            .iter()
            .map(|f| f.re * f.re + if self.kind.is_nse() { f.im * f.im } else { 0.0 })
            .sum::<f64>()
            .sqrt()
    }
}

/// A model ready for evaluation (precomputed coefficient tables).
#[derive(Debug, Clone)]
pub enum Model {
    Nse(GalerkinNse),
    Dyadic(DyadicModel),
    Toy(ToyContraction),
}

impl Model {
    pub fn build(spec: &ModelSpec) -> Result<Model> {
        spec.validate()?;
        Ok(match spec.kind {
            ModelKind::GalerkinNse2d | ModelKind::GalerkinNse3d => Model::Nse(GalerkinNse::new(spec)?),
            ModelKind::Dyadic => Model::Dyadic(DyadicModel::new(spec)?),
            ModelKind::ToyContraction => Model::Toy(ToyContraction::new(spec)?),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        match self {
            Model::Nse(m) => m.spec(),
            Model::Dyadic(m) => m.spec(),
            Model::Toy(m) => m.spec(),
        }
    }

    pub fn id(&self) -> ModelId {
        self.spec().id()
    }

    pub fn dim(&self) -> usize {
        self.linear_rates().len()
    }

    /// Diagonal of the dissipative linear part `Λ`.
    pub fn linear_rates(&self) -> &[f64] {
        match self {
            Model::Nse(m) => m.rates(),
            Model::Dyadic(m) => m.rates(),
            Model::Toy(m) => m.rates(),
        }
    }

    /// Writes `N(u)` (nonlinear part plus forcing) into `out`.
    pub fn nonlinear_into(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Model::Nse(m) => m.nonlinear_into(u, out),
            Model::Dyadic(m) => m.nonlinear_into(u, out),
            Model::Toy(_) => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }

    pub fn forcing(&self) -> &State {
        match self {
            Model::Nse(m) => m.forcing(),
            Model::Dyadic(m) => m.forcing(),
            Model::Toy(m) => m.forcing(),
        }
    }

    /// Coefficient ν in front of the enstrophy in the energy balance.
    /// The toy semiflow has unit dissipation.
    pub fn dissipation_coefficient(&self) -> f64 {
        match self {
            Model::Toy(_) => 1.0,
            _ => self.spec().nu,
        }
    }

    pub fn zero_state(&self) -> State {
        State::zeros(self.id(), self.dim())
    }

    /// Full right-hand side `-Λu + N(u)`.
    pub fn rhs(&self, u: &State) -> Result<State> {
        self.check_state(u)?;
        let mut out = vec![0.0; self.dim()];
        self.nonlinear_into(&u.coords, &mut out);
        for ((o, r), x) in out.iter_mut().zip(self.linear_rates()).zip(&u.coords) {
            *o -= r * x;
        }
        finite_state(self.id(), out)
    }

    pub(crate) fn check_state(&self, u: &State) -> Result<()> {
        if u.model != self.id() || u.dim() != self.dim() {
            return Err(Error::ModelMismatch {
                left: self.id(),
                right: u.model,
            });
        }
        if !u.is_finite() {
            return Err(Error::NonFiniteState { time: f64::NAN });
        }
        Ok(())
    }

    /// `(Λu, u)`: ν‖u‖² for the Galerkin models.
    pub fn dissipation(&self, u: &[f64]) -> f64 {
        self.linear_rates().iter().zip(u).map(|(r, x)| r * x * x).sum()
    }
}

pub(crate) fn finite_state(id: ModelId, coords: Vec<f64>) -> Result<State> {
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteState { time: f64::NAN });
    }
    Ok(State { model: id, coords })
}

/// `g - νAu - B(u,u)` for the Galerkin models.
pub fn nse_rhs(model: &Model, u: &State) -> Result<State> {
    match model {
        Model::Nse(_) => model.rhs(u),
        _ => Err(Error::InvalidModel(format!(
            "nse_rhs needs a Galerkin model, got {}",
            model.id()
        ))),
    }
}

/// Truncated Leray-projected transport term `B(u,v) = P(u·∇v)`.
pub fn bilinear_b(model: &Model, u: &State, v: &State) -> Result<State> {
    match model {
        Model::Nse(m) => {
            model.check_state(u)?;
            model.check_state(v)?;
            let mut out = vec![0.0; m.dim()];
            m.bilinear_into(&u.coords, &v.coords, &mut out);
            finite_state(model.id(), out)
        }
        _ => Err(Error::InvalidModel(format!(
            "bilinear_b needs a Galerkin model, got {}",
            model.id()
        ))),
    }
}

/// Right-hand side of the viscous dyadic cascade.
pub fn dyadic_rhs(model: &Model, a: &State) -> Result<State> {
    match model {
        Model::Dyadic(_) => model.rhs(a),
        _ => Err(Error::InvalidModel(format!(
            "dyadic_rhs needs the dyadic model, got {}",
            model.id()
        ))),
    }
}

/// Right-hand side `-x` of the contraction semiflow.
pub fn toy_rhs(model: &Model, x: &State) -> Result<State> {
    match model {
        Model::Toy(_) => model.rhs(x),
        _ => Err(Error::InvalidModel(format!(
            "toy_rhs needs the toy model, got {}",
            model.id()
        ))),
    }
}

/// Absorbing-ball radius `(1 + margin)·|g|·L/(2πν)` for the Galerkin models.
///
/// Returns 0 for zero forcing; a zero radius is a degenerate phase space and
/// is rejected by [`crate::system::PhaseSpace::new`].
pub fn absorbing_radius(spec: &ModelSpec) -> Result<f64> {
    absorbing_radius_with_margin(spec, DEFAULT_RADIUS_MARGIN)
}

pub fn absorbing_radius_with_margin(spec: &ModelSpec, margin: f64) -> Result<f64> {
    if !spec.kind.is_nse() {
        return Err(Error::InvalidModel(format!(
            "absorbing_radius is defined for the Galerkin models, got {}",
            spec.id()
        )));
    }
    let threshold = spec.forcing_norm() / spec.nu * spec.period / (2.0 * std::f64::consts::PI);
    Ok((1.0 + margin) * threshold)
}

/// Radius of a ball that absorbs every trajectory of `model`:
/// `(1 + margin)·|g| / min Λ` (Poincaré bound), which coincides with
/// [`absorbing_radius`] for the Galerkin models on a box of period 2π.
pub fn dissipative_radius(model: &Model, margin: f64) -> f64 {
    let min_rate = model.linear_rates().iter().copied().fold(f64::INFINITY, f64::min);
    (1.0 + margin) * model.forcing().norm() / min_rate
}

/// Radius of the phase-space ball `X` for `model`: the absorbing radius
/// with the default margin, or 1 when the forcing vanishes.
pub fn default_radius(model: &Model) -> f64 {
    let r = match model.spec().kind {
        k if k.is_nse() => absorbing_radius(model.spec()).unwrap_or(0.0),
        _ => dissipative_radius(model, DEFAULT_RADIUS_MARGIN),
    };
    if r > 0.0 {
        r
    } else {
        1.0
    }
}
