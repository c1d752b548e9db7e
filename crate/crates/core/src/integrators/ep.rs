use nalgebra::DVector;

use super::{solve, Kit, StepReport};
use crate::config::NumericsConfig;
use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, GroupElement, Momentum};
use crate::models::Model;
use crate::retraction::Retraction;

/// Euler-Poincaré momentum update for a left-invariant model:
/// solves `(dτ⁻¹_{hξ_{k+1}})* μ_{k+1} = (dτ⁻¹_{−hξ_k})* μ_k` with
/// `μ_{k+1} = ∂ℓ/∂ξ(ξ_{k+1})`.
pub fn ep_update(
    model: &dyn Model,
    r: &Retraction,
    h: f64,
    xi: &AlgebraElement,
    mu: &Momentum,
    numerics: &NumericsConfig,
) -> Result<(AlgebraElement, Momentum, StepReport)> {
    if !model.is_left_invariant() {
        return Err(Error::Model(format!("{} is not left-invariant", model.id())));
    }
    r.check_domain(&xi.scaled(h))?;
    let kit = Kit::new(model, r);
    let e = GroupElement::identity(kit.group);
    let lhs_k = kit.phase(h, xi.coords(), mu.coords())?;
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(kit.dti(&(x * h))?.tr_mul(&kit.dell(&e, x)) - &lhs_k) };
    let (x, report) = solve(residual, xi.coords().clone(), numerics)?;
    kit.guard(&(&x * h))?;
    let mu_next = kit.dell(&e, &x);
    Ok((kit.alg(x), kit.mom(mu_next), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{sv_step, ve_forward_step, HPState};
    use crate::lie::{self, Group};
    use crate::models::RigidBody;
    use crate::retraction::symmetric_sqrt;
    use nalgebra::{DMatrix, Matrix3, Vector3};

    fn rb() -> RigidBody {
        RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap()
    }

    fn alg(c: &[f64]) -> AlgebraElement {
        AlgebraElement::from_slice(Group::SO3, c).unwrap()
    }

    fn hat(v: &DVector<f64>) -> DMatrix<f64> {
        lie::hat(&AlgebraElement::new(Group::SO3, v.clone()).unwrap())
    }

    fn vee(m: &DMatrix<f64>) -> DVector<f64> {
        lie::vee(Group::SO3, m).unwrap().into_coords()
    }

    fn ad_star(x: &DVector<f64>, m: &DVector<f64>) -> DVector<f64> {
        // μ × ξ
        let a = Vector3::new(m[0], m[1], m[2]).cross(&Vector3::new(x[0], x[1], x[2]));
        DVector::from_column_slice(a.as_slice())
    }

    #[test]
    fn principal_axis_is_relative_equilibrium() {
        let model = rb();
        let xi = alg(&[0.0, 1.3, 0.0]);
        let mu = model.dell_dxi(&GroupElement::identity(Group::SO3), &xi);
        for r in [Retraction::exp(), Retraction::cayley(), Retraction::skew_sqrt()] {
            let (x1, m1, _) = ep_update(&model, &r, 0.1, &xi, &mu, &NumericsConfig::default()).unwrap();
            assert_eq!(m1.coords(), mu.coords());
            assert_eq!(x1.coords(), xi.coords());
        }
    }

    #[test]
    fn cayley_update_satisfies_expanded_form() {
        let model = rb();
        let h = 0.1;
        let xi0 = alg(&[0.8, -0.6, 1.1]);
        let mu0 = model.dell_dxi(&GroupElement::identity(Group::SO3), &xi0);
        let (xi1, mu1, _) = ep_update(&model, &Retraction::cayley(), h, &xi0, &mu0, &NumericsConfig::default()).unwrap();
        // ξ* μ ξ* term: the transpose of y ↦ vee(ξ̂ ŷ ξ̂) applied to μ
        let sandwich = |x: &DVector<f64>, m: &DVector<f64>| {
            DVector::from_fn(3, |j, _| {
                let mut e = DVector::zeros(3);
                e[j] = 1.0;
                vee(&(hat(x) * hat(&e) * hat(x))).dot(m)
            })
        };
        let (x0, m0, x1, m1) = (xi0.coords(), mu0.coords(), xi1.coords(), mu1.coords());
        let rhs = m0 + ad_star(x1, m1) * (h / 2.0) + ad_star(x0, m0) * (h / 2.0)
            + (sandwich(x1, m1) - sandwich(x0, m0)) * (h * h / 4.0);
        assert!((m1 - rhs).amax() < 1e-11);
    }

    #[test]
    fn skew_update_satisfies_projector_form() {
        let model = rb();
        let h = 0.1;
        let xi0 = alg(&[0.8, -0.6, 1.1]);
        let mu0 = model.dell_dxi(&GroupElement::identity(Group::SO3), &xi0);
        let (xi1, mu1, _) = ep_update(&model, &Retraction::skew_sqrt(), h, &xi0, &mu0, &NumericsConfig::default()).unwrap();
        let sym = |x: &DVector<f64>, m: &DVector<f64>| {
            let xh = hat(x) * h;
            let xh3 = Matrix3::from_fn(|i, j| xh[(i, j)]);
            let s = symmetric_sqrt(&(xh3 * xh3 + Matrix3::identity())).unwrap();
            let s = DMatrix::from_fn(3, 3, |i, j| s[(i, j)]);
            vee(&((hat(m) * &s + &s * hat(m)) * 0.5))
        };
        let (x0, m0, x1, m1) = (xi0.coords(), mu0.coords(), xi1.coords(), mu1.coords());
        let lhs = sym(x1, m1);
        let rhs = sym(x0, m0) + ad_star(x1, m1) * (h / 2.0) + ad_star(x0, m0) * (h / 2.0);
        assert!((lhs - rhs).amax() < 1e-11);
    }

    #[test]
    fn matches_variational_steppers_and_keeps_transported_norm() {
        let model = rb();
        let h = 0.05;
        let n = NumericsConfig::default();
        let r = Retraction::exp();
        let mut s = HPState::from_velocity(&model, GroupElement::identity(Group::SO3), alg(&[1.0, 0.5, -0.2]), 0.0).unwrap();
        let transported = |s: &HPState| r.dtau_inv_matrix(&s.xi.scaled(-h)).unwrap().tr_mul(s.mu.coords()).norm();
        for _ in 0..100 {
            let (xi1, mu1, _) = ep_update(&model, &r, h, &s.xi, &s.mu, &n).unwrap();
            let (a, _) = ve_forward_step(&model, &r, h, &s, &n).unwrap();
            let (b, _) = sv_step(&model, &r, h, &s, &n).unwrap();
            assert!((a.mu.coords() - mu1.coords()).amax() < 1e-12);
            assert!((b.mu.coords() - mu1.coords()).amax() < 1e-12);
            assert!((a.xi.coords() - xi1.coords()).amax() < 1e-12);
            assert!((transported(&a) - transported(&s)).abs() < 1e-12);
            s = a;
        }
    }

    #[test]
    fn forced_models_rejected() {
        let top = crate::models::HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 1.0, Vector3::z()).unwrap();
        let xi = alg(&[0.1, 0.2, 0.3]);
        let mu = top.dell_dxi(&GroupElement::identity(Group::SO3), &xi);
        assert!(ep_update(&top, &Retraction::exp(), 0.1, &xi, &mu, &NumericsConfig::default()).is_err());
    }
}
