//! Conservation, symplecticity, convergence and Poincaré-section analysis.

mod convergence;
mod section;
mod stats;
mod symplectic;

pub use convergence::{convergence_order, error_distance, reference_solution, ConvergenceStudy, REFERENCE_TOLERANCE};
pub use section::{cloud_extent, extent_difference, observable_names, observable_vector, poincare_section, poincare_section_series, SectionPoint, SectionSpec};
pub use stats::{fit_slope, peak_to_peak};
pub use symplectic::{map_symplecticity_defect, symplecticity_defect, ChartPoint};

use crate::error::{Error, Result};
use crate::integrators::{HPState, StepReport};
use crate::lie::{self, Momentum};
use crate::models::Model;
use crate::retraction::Retraction;

/// A uniformly spaced sequence of states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<HPState>,
    pub reports: Vec<StepReport>,
    pub h: f64,
    pub method_id: String,
    pub model_id: String,
}

impl Trajectory {
    pub fn new(steps: Vec<(HPState, StepReport)>, h: f64, method_id: impl Into<String>, model_id: impl Into<String>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Model("trajectory is empty".into()));
        }
        let t0 = steps[0].0.t;
        for (k, (s, _)) in steps.iter().enumerate() {
            let expected = t0 + k as f64 * h;
            if (s.t - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(Error::Model(format!("trajectory sample {k} at t = {} is off the uniform grid", s.t)));
            }
        }
        let (states, reports) = steps.into_iter().unzip();
        Ok(Self {
            states,
            reports,
            h,
            method_id: method_id.into(),
            model_id: model_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Quantities tracked along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Energy,
    GroupResidual,
    /// Component of the spatial momentum `Ad*_{g⁻¹} μ`.
    MomentumComponent(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope per unit time.
    pub slope: f64,
    pub slope_stderr: f64,
    pub peak_to_peak: f64,
    /// `max |v − v₀|`.
    pub max_deviation: f64,
}

impl DriftSeries {
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Self {
        let (slope, slope_stderr) = fit_slope(&times, &values);
        let v0 = values.first().copied().unwrap_or(0.0);
        let max_deviation = values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max);
        Self {
            peak_to_peak: peak_to_peak(&values),
            max_deviation,
            times,
            values,
            slope,
            slope_stderr,
        }
    }
}

pub fn observe(model: &dyn Model, state: &HPState, observable: Observable) -> f64 {
    match observable {
        Observable::Energy => state.energy(model),
        Observable::GroupResidual => state.g.residual(),
        Observable::MomentumComponent(i) => continuous_spatial_momentum(state).coords()[i],
    }
}

pub fn drift_series(traj: &Trajectory, model: &dyn Model, observable: Observable) -> DriftSeries {
    let values = traj.states.iter().map(|s| observe(model, s, observable)).collect();
    DriftSeries::from_values(traj.times(), values)
}

/// The two spatial momentum candidates of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMomentum {
    /// `Ad*_{g⁻¹} μ`
    pub continuous: Momentum,
    /// `Ad*_{g⁻¹} (dτ⁻¹_{−hξ})* μ`
    pub discrete: Momentum,
}

fn continuous_spatial_momentum(state: &HPState) -> Momentum {
    let ginv = lie::inverse(&state.g);
    Momentum::from_slice(state.group(), lie::adjoint_matrix(&ginv).tr_mul(state.mu.coords()).as_slice()).unwrap()
}

pub fn spatial_momentum(state: &HPState, r: &Retraction, h: f64) -> Result<SpatialMomentum> {
    let ginv = lie::inverse(&state.g);
    let ad = lie::adjoint_matrix(&ginv);
    let p = r.dtau_inv_matrix(&state.xi.scaled(-h))?.tr_mul(state.mu.coords());
    Ok(SpatialMomentum {
        continuous: Momentum::new(state.group(), ad.tr_mul(state.mu.coords()))?,
        discrete: Momentum::new(state.group(), ad.tr_mul(&p))?,
    })
}

/// Residual of `(dτ⁻¹_{hξ_{k+1}})* μ_{k+1} = (dτ⁻¹_{−hξ_k})* μ_k` between
/// consecutive states.
pub fn dlp_residual(r: &Retraction, h: f64, prev: &HPState, next: &HPState) -> Result<f64> {
    let lhs = r.dtau_inv_matrix(&next.xi.scaled(h))?.tr_mul(next.mu.coords());
    let rhs = r.dtau_inv_matrix(&prev.xi.scaled(-h))?.tr_mul(prev.mu.coords());
    Ok((lhs - rhs).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{AlgebraElement, Group, GroupElement};
    use crate::models::RigidBody;
    use nalgebra::Vector3;

    #[test]
    fn spatial_momentum_at_identity() {
        let rb = RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let xi = AlgebraElement::from_slice(Group::SO3, &[0.3, 0.2, -0.1]).unwrap();
        let s = HPState::from_velocity(&rb, GroupElement::identity(Group::SO3), xi.clone(), 0.0).unwrap();
        let r = Retraction::cayley();
        let sm = spatial_momentum(&s, &r, 0.1).unwrap();
        assert_eq!(sm.continuous.coords(), s.mu.coords());
        let p = r.dtau_inv_matrix(&xi.scaled(-0.1)).unwrap().tr_mul(s.mu.coords());
        assert!((sm.discrete.coords() - p).amax() < 1e-16);
    }

    #[test]
    fn trajectory_rejects_irregular_grid() {
        let rb = RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let s0 = HPState::from_velocity(&rb, GroupElement::identity(Group::SO3), AlgebraElement::zero(Group::SO3), 0.0).unwrap();
        let mut s1 = s0.clone();
        s1.t = 0.3;
        let r = StepReport {
            newton_iterations: 0,
            residual: 0.0,
            converged: true,
        };
        assert!(Trajectory::new(vec![(s0.clone(), r), (s1, r)], 0.1, "x", "y").is_err());
        assert!(Trajectory::new(vec![], 0.1, "x", "y").is_err());
    }
}
