//! Time steppers on `G × 𝔤*`.
//!
//! Every variational stepper here is an instance of the VPRK scheme. The
//! stored velocity `ξ_{k+1} = Σ b_j Ξ_j` is the one used by the step that
//! produced the state, so the next step reads `dτ⁻¹_{−hξ_k}` from it.

mod ep;
mod rk4;
mod rkmk;
mod sv;
pub mod tableau;
mod ve;
mod vprk;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

pub use ep::ep_update;
pub use rk4::rk4_baseline_step;
pub use rkmk::{rkmk_hp_step, rkmk_step};
pub use sv::{sv_step, sv_step_separable};
pub use tableau::ButcherTableau;
pub use ve::{ve_backward_step, ve_forward_step};
pub use vprk::{vprk_step, vprk_step_detailed};

use crate::config::NumericsConfig;
use crate::error::{Error, Result};
use crate::lie::{self, AlgebraElement, Group, GroupElement, Momentum};
use crate::models::Model;
use crate::retraction::{Retraction, RetractionKind};
use crate::solver::{solve_implicit, SolveReport};

/// A point `(g, ξ, μ)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPState {
    pub g: GroupElement,
    pub xi: AlgebraElement,
    pub mu: Momentum,
    pub t: f64,
}

impl HPState {
    /// Starts inside the admissible set: `μ = ∂ℓ/∂ξ(g, ξ)`.
    pub fn from_velocity(model: &dyn Model, g: GroupElement, xi: AlgebraElement, t: f64) -> Result<Self> {
        if g.group() != model.group() || xi.group() != model.group() {
            return Err(Error::GroupMismatch {
                left: model.group(),
                right: if g.group() != model.group() { g.group() } else { xi.group() },
            });
        }
        let mu = model.dell_dxi(&g, &xi);
        Ok(Self { g, xi, mu, t })
    }

    pub fn group(&self) -> Group {
        self.g.group()
    }

    /// `‖μ − ∂ℓ/∂ξ(g, ξ)‖∞`.
    pub fn legendre_residual(&self, model: &dyn Model) -> f64 {
        (self.mu.coords() - model.dell_dxi(&self.g, &self.xi).coords()).amax()
    }

    pub fn energy(&self, model: &dyn Model) -> f64 {
        model.energy(&self.g, &self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub newton_iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl StepReport {
    pub(crate) fn explicit() -> Self {
        Self {
            newton_iterations: 0,
            residual: 0.0,
            converged: true,
        }
    }
}

impl From<SolveReport> for StepReport {
    fn from(r: SolveReport) -> Self {
        Self {
            newton_iterations: r.iterations,
            residual: r.residual,
            converged: true,
        }
    }
}

/// Internal stage quantities of one VPRK step.
#[derive(Debug, Clone, PartialEq)]
pub struct StageData {
    pub theta: Vec<AlgebraElement>,
    pub xi: Vec<AlgebraElement>,
    pub m: Vec<Momentum>,
    /// Internal multipliers `μ^i = −h b_i (dτ_{−hΘ_i})* f_i`.
    pub mu: Vec<Momentum>,
}

/// Shared evaluation helpers bound to one model and retraction.
pub(crate) struct Kit<'a> {
    pub model: &'a dyn Model,
    pub r: &'a Retraction,
    pub group: Group,
}

impl<'a> Kit<'a> {
    pub fn new(model: &'a dyn Model, r: &'a Retraction) -> Self {
        Self {
            model,
            r,
            group: model.group(),
        }
    }

    pub fn alg(&self, x: DVector<f64>) -> AlgebraElement {
        AlgebraElement::from_coords(self.group, x)
    }

    pub fn mom(&self, x: DVector<f64>) -> Momentum {
        Momentum::from_coords(self.group, x)
    }

    /// `dτ⁻¹_x` as a matrix.
    pub fn dti(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.r.dtau_inv_matrix(&self.alg(x.clone()))
    }

    /// `dτ_x` as a matrix.
    pub fn dt(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.r.dtau_matrix(&self.alg(x.clone()))
    }

    /// `g·τ(x)`.
    pub fn retract(&self, g: &GroupElement, x: &DVector<f64>) -> Result<GroupElement> {
        let step = self.r.tau(&self.alg(x.clone()))?;
        Ok(GroupElement::from_matrix_unchecked(self.group, g.matrix() * step.matrix()))
    }

    pub fn dell(&self, g: &GroupElement, xi: &DVector<f64>) -> DVector<f64> {
        self.model.dell_dxi(g, &self.alg(xi.clone())).into_coords()
    }

    pub fn force(&self, g: &GroupElement, xi: &DVector<f64>) -> DVector<f64> {
        if self.model.is_left_invariant() {
            DVector::zeros(self.group.algebra_dim())
        } else {
            self.model.body_force(g, &self.alg(xi.clone())).into_coords()
        }
    }

    pub fn guard(&self, x: &DVector<f64>) -> Result<()> {
        self.r.check_domain(&self.alg(x.clone()))
    }

    /// `(dτ⁻¹_{−hξ})* μ`, the momentum paired with `g⁻¹δg` at the start of
    /// the next step.
    pub fn phase(&self, h: f64, xi: &DVector<f64>, mu: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.dti(&(xi * -h))?.tr_mul(mu))
    }
}

pub(crate) fn check_step(model: &dyn Model, r: &Retraction, h: f64, state: &HPState) -> Result<()> {
    if state.group() != model.group() {
        return Err(Error::GroupMismatch {
            left: model.group(),
            right: state.group(),
        });
    }
    if !(h.is_finite() && h != 0.0) {
        return Err(Error::Model(format!("step size must be finite and nonzero, got {h}")));
    }
    r.check_domain(&state.xi.scaled(h))
}

pub(crate) fn solve(
    f: impl FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    x0: DVector<f64>,
    numerics: &NumericsConfig,
) -> Result<(DVector<f64>, StepReport)> {
    let (x, report) = solve_implicit(f, x0, numerics)?;
    Ok((x, report.into()))
}

/// Method identifiers accepted by the driver.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    VeForward,
    VeBackward,
    Sv,
    Vprk(ButcherTableau),
    Ep,
    Rkmk(ButcherTableau),
    Rk4,
}

impl Method {
    pub fn id(&self) -> String {
        match self {
            Method::VeForward => "ve_forward".into(),
            Method::VeBackward => "ve_backward".into(),
            Method::Sv => "sv".into(),
            Method::Vprk(t) => format!("vprk:{}", t.name()),
            Method::Ep => "ep".into(),
            Method::Rkmk(t) => format!("rkmk:{}", t.name()),
            Method::Rk4 => "rk4".into(),
        }
    }

    /// Replaces the tableau of `vprk` and `rkmk`; other methods are returned
    /// unchanged.
    pub fn with_tableau(self, tableau: ButcherTableau) -> Self {
        match self {
            Method::Vprk(_) => Method::Vprk(tableau),
            Method::Rkmk(_) => Method::Rkmk(tableau),
            other => other,
        }
    }

    pub fn uses_tableau(&self) -> bool {
        matches!(self, Method::Vprk(_) | Method::Rkmk(_))
    }

    /// Whether the method is derived from the discrete variational principle.
    pub fn is_variational(&self) -> bool {
        !matches!(self, Method::Rkmk(_) | Method::Rk4)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// A method bound to a retraction and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrator {
    pub method: Method,
    pub retraction: Retraction,
    pub numerics: NumericsConfig,
}

impl Integrator {
    /// RKMK with the exponential retraction evaluates `dexp⁻¹` by its
    /// Bernoulli series truncated at `numerics.series_q`.
    pub fn new(method: Method, kind: RetractionKind, numerics: NumericsConfig) -> Self {
        let mut retraction = Retraction::new(kind, &numerics);
        if matches!(method, Method::Rkmk(_)) && kind == RetractionKind::Exp {
            retraction = retraction.with_series(numerics.series_index());
        }
        Self {
            method,
            retraction,
            numerics,
        }
    }

    /// Parses `ve_forward`, `ve_backward`, `sv`, `vprk:<tableau>`,
    /// `ep:<retraction>`, `rkmk:<tableau>` or `rk4`. `ep:<retraction>`
    /// overrides `kind`.
    pub fn parse(spec: &str, kind: RetractionKind, numerics: NumericsConfig) -> Result<Self> {
        let bad = |msg: String| Error::InvalidConfig(vec![msg]);
        let tableau = |name: &str| {
            ButcherTableau::by_name(name).ok_or_else(|| {
                bad(format!(
                    "unknown tableau '{name}' (known: {})",
                    ButcherTableau::NAMES.join(", ")
                ))
            })
        };
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        let mut kind = kind;
        let method = match (head, arg) {
            ("ve_forward", None) => Method::VeForward,
            ("ve_backward", None) => Method::VeBackward,
            ("sv", None) => Method::Sv,
            ("rk4", None) => Method::Rk4,
            ("vprk", Some(t)) => Method::Vprk(tableau(t)?),
            ("rkmk", Some(t)) => Method::Rkmk(tableau(t)?),
            ("ep", arg) => {
                if let Some(a) = arg {
                    kind = RetractionKind::from_str(a).map_err(bad)?;
                }
                Method::Ep
            }
            _ => {
                return Err(bad(format!(
                    "unknown method '{spec}' (expected ve_forward, ve_backward, sv, vprk:<tableau>, ep:<retraction>, rkmk:<tableau> or rk4)"
                )))
            }
        };
        Ok(Self::new(method, kind, numerics))
    }

    pub fn id(&self) -> String {
        match self.method {
            Method::Ep => format!("ep:{}", self.retraction.kind),
            _ => self.method.id(),
        }
    }

    pub fn step(&self, model: &dyn Model, h: f64, state: &HPState) -> Result<(HPState, StepReport)> {
        let r = &self.retraction;
        let n = &self.numerics;
        match &self.method {
            Method::VeForward => ve_forward_step(model, r, h, state, n),
            Method::VeBackward => ve_backward_step(model, r, h, state, n),
            Method::Sv => sv_step(model, r, h, state, n),
            Method::Vprk(t) => vprk_step(model, t, r, h, state, n),
            Method::Ep => {
                if !model.is_left_invariant() {
                    return Err(Error::Model(format!(
                        "ep requires a left-invariant model, {} is not",
                        model.id()
                    )));
                }
                let (xi, mu, report) = ep_update(model, r, h, &state.xi, &state.mu, n)?;
                let g = lie::compose(&state.g, &r.tau(&xi.scaled(h))?)?;
                Ok((
                    HPState {
                        g,
                        xi,
                        mu,
                        t: state.t + h,
                    },
                    report,
                ))
            }
            Method::Rkmk(t) => rkmk_hp_step(model, t, r, h, state, n),
            Method::Rk4 => Ok((rk4_baseline_step(model, h, state), StepReport::explicit())),
        }
    }

    /// The momentum the next step actually consumes: `(dτ⁻¹_{−hξ})* μ` for
    /// variational methods, `μ` otherwise.
    pub fn phase_momentum(&self, model: &dyn Model, h: f64, state: &HPState) -> Result<DVector<f64>> {
        if self.method.is_variational() {
            Kit::new(model, &self.retraction).phase(h, state.xi.coords(), state.mu.coords())
        } else {
            Ok(state.mu.coords().clone())
        }
    }

    /// Builds a state whose phase momentum is `p`.
    ///
    /// For variational methods this solves `(dτ⁻¹_{−hξ})* ∂ℓ/∂ξ(g, ξ) = p`
    /// for `ξ`; the resulting state lies in the admissible set.
    pub fn state_from_phase(&self, model: &dyn Model, h: f64, g: GroupElement, p: &Momentum, t: f64) -> Result<HPState> {
        let guess = model.legendre_inv(&g, p);
        if !self.method.is_variational() {
            let mu = p.clone();
            return Ok(HPState { g, xi: guess, mu, t });
        }
        let kit = Kit::new(model, &self.retraction);
        let target = p.coords().clone();
        let (xi, _) = solve(
            |x| Ok(kit.phase(h, x, &kit.dell(&g, x))? - &target),
            guess.into_coords(),
            &self.numerics,
        )?;
        let xi = kit.alg(xi);
        HPState::from_velocity(model, g, xi, t)
    }
}

/// Runs `steps` steps and returns every state, including the initial one.
pub fn integrate(
    integrator: &Integrator,
    model: &dyn Model,
    h: f64,
    steps: usize,
    initial: HPState,
) -> Result<Vec<(HPState, StepReport)>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = initial;
    out.push((state.clone(), StepReport::explicit()));
    for _ in 0..steps {
        let (next, report) = integrator.step(model, h, &state)?;
        out.push((next.clone(), report));
        state = next;
    }
    Ok(out)
}

/// Final state only.
pub fn integrate_final(integrator: &Integrator, model: &dyn Model, h: f64, steps: usize, initial: HPState) -> Result<HPState> {
    let mut state = initial;
    for _ in 0..steps {
        state = integrator.step(model, h, &state)?.0;
    }
    Ok(state)
}
