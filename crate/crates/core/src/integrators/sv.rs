use nalgebra::DVector;

use super::{check_step, solve, HPState, Kit, StepReport};
use crate::config::NumericsConfig;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::retraction::Retraction;

/// Lie group Störmer-Verlet (implicit trapezoidal tableau).
///
/// Unknowns are the two stage velocities. With `ξ_{k+1} = (Ξ₁ + Ξ₂)/2`,
/// `M = ∂ℓ/∂ξ(g_k, Ξ₁)` and `g_{k+1}` eliminated through
/// `g_{k+1} = g_k τ(hξ_{k+1})`, the system is
/// `∂ℓ/∂ξ(g_{k+1}, Ξ₂) = M` and
/// `(dτ⁻¹_{hξ_{k+1}})* M = (dτ⁻¹_{−hξ_k})* μ_k + (h/2) f(g_k, Ξ₁)`.
/// Afterwards `μ_{k+1} = M + (h/2)(dτ_{−hξ_{k+1}})* f(g_{k+1}, Ξ₂)`.
pub fn sv_step(
    model: &dyn Model,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport)> {
    check_step(model, r, h, state)?;
    let kit = Kit::new(model, r);
    let d = kit.group.algebra_dim();
    let g = &state.g;
    let lhs_k = kit.phase(h, state.xi.coords(), state.mu.coords())?;
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let x1 = x.rows(0, d).into_owned();
        let x2 = x.rows(d, d).into_owned();
        let step = (&x1 + &x2) * (0.5 * h);
        let g_next = kit.retract(g, &step)?;
        let m = kit.dell(g, &x1);
        let mut out = DVector::zeros(2 * d);
        out.rows_mut(0, d).copy_from(&(kit.dell(&g_next, &x2) - &m));
        let r3 = kit.dti(&step)?.tr_mul(&m) - &lhs_k - kit.force(g, &x1) * (0.5 * h);
        out.rows_mut(d, d).copy_from(&r3);
        Ok(out)
    };
    let guess = DVector::from_fn(2 * d, |k, _| state.xi.coords()[k % d]);
    let (x, report) = solve(residual, guess, numerics)?;
    let x1 = x.rows(0, d).into_owned();
    let x2 = x.rows(d, d).into_owned();
    let xi_next = (&x1 + &x2) * 0.5;
    finish(&kit, h, state, &x1, &x2, xi_next, report)
}

/// Störmer-Verlet for separable Lagrangians, whose `∂ℓ/∂ξ` does not depend
/// on `g`. Then `∂ℓ/∂ξ(g_{k+1}, Ξ₂) = ∂ℓ/∂ξ(g_k, Ξ₁)` gives `Ξ₂ = Ξ₁`
/// without reference to `g_{k+1}`, leaving a single velocity unknown.
pub fn sv_step_separable(
    model: &dyn Model,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport)> {
    if !model.is_separable() {
        return Err(Error::Model(format!("{} is not separable", model.id())));
    }
    check_step(model, r, h, state)?;
    let kit = Kit::new(model, r);
    let g = &state.g;
    let lhs_k = kit.phase(h, state.xi.coords(), state.mu.coords())?;
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(kit.dti(&(x * h))?.tr_mul(&kit.dell(g, x)) - &lhs_k - kit.force(g, x) * (0.5 * h))
    };
    let (x1, report) = solve(residual, state.xi.coords().clone(), numerics)?;
    let x2 = model.legendre_inv(g, &kit.mom(kit.dell(g, &x1))).into_coords();
    let xi_next = (&x1 + &x2) * 0.5;
    finish(&kit, h, state, &x1, &x2, xi_next, report)
}

fn finish(
    kit: &Kit,
    h: f64,
    state: &HPState,
    x1: &DVector<f64>,
    x2: &DVector<f64>,
    xi_next: DVector<f64>,
    report: StepReport,
) -> Result<(HPState, StepReport)> {
    let step = &xi_next * h;
    kit.guard(&step)?;
    let g_next = kit.retract(&state.g, &step)?;
    let mut mu = kit.dell(&state.g, x1);
    if !kit.model.is_left_invariant() {
        mu += kit.dt(&-&step)?.tr_mul(&kit.force(&g_next, x2)) * (0.5 * h);
    }
    let next = HPState {
        g: g_next,
        xi: kit.alg(xi_next),
        mu: kit.mom(mu),
        t: state.t + h,
    };
    Ok((next, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{vprk_step, ButcherTableau, Integrator, Method};
    use crate::retraction::RetractionKind;
    use crate::lie::{self, AlgebraElement, Group, GroupElement, Momentum};
    use crate::models::{HeavyTop, RigidBody};
    use nalgebra::{DMatrix, Vector3};

    fn alg(c: &[f64]) -> AlgebraElement {
        AlgebraElement::from_slice(Group::SO3, c).unwrap()
    }

    #[test]
    fn spherical_body_spins_uniformly() {
        let rb = RigidBody::new(Vector3::new(1.0, 1.0, 1.0)).unwrap();
        let s0 = HPState::from_velocity(&rb, GroupElement::identity(Group::SO3), alg(&[0.0, 0.0, 1.0]), 0.0).unwrap();
        let n = NumericsConfig::default();
        let mut s = s0.clone();
        for _ in 0..50 {
            s = sv_step(&rb, &Retraction::exp(), 0.1, &s, &n).unwrap().0;
        }
        assert!((s.xi.coords() - s0.xi.coords()).amax() < 1e-13);
        let expected = Retraction::exp().tau(&alg(&[0.0, 0.0, 5.0])).unwrap();
        assert!((s.g.matrix() - expected.matrix()).amax() < 1e-12);
        assert!((s.energy(&rb) - s0.energy(&rb)).abs() < 1e-13);
    }

    #[test]
    fn step_satisfies_its_own_equations() {
        let rb = RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let xi0 = alg(&[1.0, 0.5, 1.0 / 3.0]); // μ₀ = (1, 1, 1)
        let s0 = HPState::from_velocity(&rb, GroupElement::identity(Group::SO3), xi0, 0.0).unwrap();
        let h = 0.1;
        let r = Retraction::exp();
        let (s1, _) = sv_step(&rb, &r, h, &s0, &NumericsConfig::default()).unwrap();
        // For the free rigid body both stage velocities equal ξ_{k+1}.
        let m = rb.dell_dxi(&s0.g, &s1.xi);
        let lhs = r.dtau_inv_matrix(&s1.xi.scaled(h)).unwrap().tr_mul(m.coords());
        let rhs = r.dtau_inv_matrix(&s0.xi.scaled(-h)).unwrap().tr_mul(s0.mu.coords());
        assert!((lhs - rhs).amax() < 1e-10);
        let g1 = lie::compose(&s0.g, &r.tau(&s1.xi.scaled(h)).unwrap()).unwrap();
        assert!((g1.matrix() - s1.g.matrix()).amax() < 1e-15);
        assert!((s1.mu.coords() - m.coords()).amax() < 1e-15);
        // Energy is close to that of a fine reference integration.
        let mut ref_state = s0.clone();
        for _ in 0..1000 {
            ref_state = crate::integrators::rk4_baseline_step(&rb, h / 1000.0, &ref_state);
        }
        assert!((ref_state.g.matrix() - s1.g.matrix()).amax() < 1e-2);
    }

    #[test]
    fn separable_path_agrees() {
        let top = HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 3.0, Vector3::new(0.0, 0.6, 0.8)).unwrap();
        let g = Retraction::exp().tau(&alg(&[0.9, 0.1, -0.2])).unwrap();
        let s0 = HPState::from_velocity(&top, g, alg(&[0.4, -1.0, 0.3]), 0.0).unwrap();
        let n = NumericsConfig::default();
        for r in [Retraction::exp(), Retraction::cayley()] {
            let (a, _) = sv_step(&top, &r, 0.05, &s0, &n).unwrap();
            let (b, _) = sv_step_separable(&top, &r, 0.05, &s0, &n).unwrap();
            let (c, _) = vprk_step(&top, &ButcherTableau::implicit_trapezoidal(), &r, 0.05, &s0, &n).unwrap();
            for other in [&b, &c] {
                assert!((a.g.matrix() - other.g.matrix()).amax() < 1e-12);
                assert!((a.xi.coords() - other.xi.coords()).amax() < 1e-12);
                assert!((a.mu.coords() - other.mu.coords()).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn time_symmetric() {
        let top = HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 1.0, Vector3::z()).unwrap();
        let g = Retraction::exp().tau(&alg(&[0.3, 0.2, 0.1])).unwrap();
        let s0 = HPState::from_velocity(&top, g, alg(&[0.5, 0.4, -0.6]), 0.0).unwrap();
        let n = NumericsConfig::default();
        let r = Retraction::cayley();
        let h = 0.05;
        let fwd = Integrator::new(Method::Sv, RetractionKind::Cayley, n);
        let (s1, _) = sv_step(&top, &r, h, &s0, &n).unwrap();
        // The step is a map on (g, (dτ⁻¹_{−hξ})* μ); reverse it from there.
        let p1 = fwd.phase_momentum(&top, h, &s1).unwrap();
        let rev_start = fwd
            .state_from_phase(&top, -h, s1.g.clone(), &Momentum::new(Group::SO3, p1).unwrap(), s1.t)
            .unwrap();
        let (back, _) = sv_step(&top, &r, -h, &rev_start, &n).unwrap();
        let d: DMatrix<f64> = back.g.matrix() - s0.g.matrix();
        assert!(d.amax() < 10.0 * n.newton_tol, "{}", d.amax());
        let p0 = fwd.phase_momentum(&top, h, &s0).unwrap();
        let pb = fwd.phase_momentum(&top, -h, &back).unwrap();
        assert!((p0 - pb).amax() < 10.0 * n.newton_tol);
    }
}
