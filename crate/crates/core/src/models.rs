//! Left-trivialized Lagrangians `ℓ(g, ξ) = L(g, gξ)`.

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, Group, GroupElement, Momentum};

/// Behavior contract of a mechanical model on a matrix Lie group.
pub trait Model: Debug + Send + Sync {
    fn id(&self) -> &'static str;

    fn group(&self) -> Group;

    fn ell(&self, g: &GroupElement, xi: &AlgebraElement) -> f64;

    /// `∂ℓ/∂ξ(g, ξ)`.
    fn dell_dxi(&self, g: &GroupElement, xi: &AlgebraElement) -> Momentum;

    /// The covector `f` with `⟨f, η⟩ = d/dε ℓ(g·τ(εη), ξ)` at `ε = 0`.
    fn body_force(&self, g: &GroupElement, xi: &AlgebraElement) -> Momentum;

    /// Solves `∂ℓ/∂ξ(g, ξ) = μ` for `ξ`.
    fn legendre_inv(&self, g: &GroupElement, mu: &Momentum) -> AlgebraElement;

    fn is_left_invariant(&self) -> bool;

    /// Whether `∂ℓ/∂ξ` is independent of `g` (kinetic energy plus a
    /// configuration potential).
    fn is_separable(&self) -> bool {
        false
    }

    /// `⟨∂ℓ/∂ξ, ξ⟩ − ℓ`.
    fn energy(&self, g: &GroupElement, xi: &AlgebraElement) -> f64 {
        self.dell_dxi(g, xi).coords().dot(xi.coords()) - self.ell(g, xi)
    }

    /// Model parameters as flat `key = value` pairs.
    fn parameters(&self) -> Vec<(String, String)>;
}

fn positive_inertia(inertia: &Vector3<f64>) -> Result<()> {
    if inertia.iter().all(|&v| v > 0.0 && v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Model(format!("inertia must be positive, got {inertia:?}")))
    }
}

fn gravity_in_body(g: &GroupElement) -> Vector3<f64> {
    g.rotation().transpose() * Vector3::z()
}

fn v3(c: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(c[0], c[1], c[2])
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

/// Free rigid body, `ℓ = ½⟨Iξ, ξ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBody {
    pub inertia: Vector3<f64>,
}

impl RigidBody {
    pub fn new(inertia: Vector3<f64>) -> Result<Self> {
        positive_inertia(&inertia)?;
        Ok(Self { inertia })
    }
}

impl Model for RigidBody {
    fn id(&self) -> &'static str {
        "rigid_body"
    }

    fn group(&self) -> Group {
        Group::SO3
    }

    fn ell(&self, _g: &GroupElement, xi: &AlgebraElement) -> f64 {
        let w = v3(xi.coords());
        0.5 * w.dot(&self.inertia.component_mul(&w))
    }

    fn dell_dxi(&self, _g: &GroupElement, xi: &AlgebraElement) -> Momentum {
        let m = self.inertia.component_mul(&v3(xi.coords()));
        Momentum::from_coords(Group::SO3, DVector::from_column_slice(m.as_slice()))
    }

    fn body_force(&self, _g: &GroupElement, _xi: &AlgebraElement) -> Momentum {
        Momentum::zero(Group::SO3)
    }

    fn legendre_inv(&self, _g: &GroupElement, mu: &Momentum) -> AlgebraElement {
        let w = v3(mu.coords()).component_div(&self.inertia);
        AlgebraElement::from_coords(Group::SO3, DVector::from_column_slice(w.as_slice()))
    }

    fn is_left_invariant(&self) -> bool {
        true
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn parameters(&self) -> Vec<(String, String)> {
        vec![("inertia".into(), fmt_vec(self.inertia.as_slice()))]
    }
}

/// Rigid body in a uniform gravity field along spatial `e₃`:
/// `ℓ = ½⟨IΩ, Ω⟩ − mgl⟨Γ, χ⟩` with `Γ = Rᵀe₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTop {
    pub body: RigidBody,
    pub mgl: f64,
    pub chi: Vector3<f64>,
}

impl HeavyTop {
    pub fn new(inertia: Vector3<f64>, mgl: f64, chi: Vector3<f64>) -> Result<Self> {
        if !mgl.is_finite() {
            return Err(Error::Model(format!("mgl must be finite, got {mgl}")));
        }
        if (chi.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("chi must be a unit vector, got norm {}", chi.norm())));
        }
        Ok(Self {
            body: RigidBody::new(inertia)?,
            mgl,
            chi,
        })
    }
}

impl Model for HeavyTop {
    fn id(&self) -> &'static str {
        "heavy_top"
    }

    fn group(&self) -> Group {
        Group::SO3
    }

    fn ell(&self, g: &GroupElement, xi: &AlgebraElement) -> f64 {
        self.body.ell(g, xi) - self.mgl * gravity_in_body(g).dot(&self.chi)
    }

    fn dell_dxi(&self, g: &GroupElement, xi: &AlgebraElement) -> Momentum {
        self.body.dell_dxi(g, xi)
    }

    fn body_force(&self, g: &GroupElement, _xi: &AlgebraElement) -> Momentum {
        let f = gravity_in_body(g).cross(&self.chi) * self.mgl;
        Momentum::from_coords(Group::SO3, DVector::from_column_slice(f.as_slice()))
    }

    fn legendre_inv(&self, g: &GroupElement, mu: &Momentum) -> AlgebraElement {
        self.body.legendre_inv(g, mu)
    }

    fn is_left_invariant(&self) -> bool {
        self.mgl == 0.0
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn parameters(&self) -> Vec<(String, String)> {
        vec![
            ("inertia".into(), fmt_vec(self.body.inertia.as_slice())),
            ("mgl".into(), format!("{:?}", self.mgl)),
            ("chi".into(), fmt_vec(self.chi.as_slice())),
        ]
    }
}

/// Submerged rigid body on SE(3) with coupled added inertia and a
/// buoyancy-gravity restoring moment:
/// `ℓ = ½[Ω;V]ᵀ[[J, D],[Dᵀ, M]][Ω;V] + buoyancy⟨r_b, Γ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnderwaterVehicle {
    pub j: Matrix3<f64>,
    pub m: Matrix3<f64>,
    pub d: Matrix3<f64>,
    pub buoyancy: f64,
    pub r_b: Vector3<f64>,
    mass_matrix: Matrix6<f64>,
    mass_inverse: Matrix6<f64>,
}

impl UnderwaterVehicle {
    pub fn new(j: Matrix3<f64>, m: Matrix3<f64>, d: Matrix3<f64>, buoyancy: f64, r_b: Vector3<f64>) -> Result<Self> {
        for (name, block) in [("J", &j), ("M", &m)] {
            if (block - block.transpose()).amax() > 1e-14 {
                return Err(Error::Model(format!("{name} must be symmetric")));
            }
            if block.cholesky().is_none() {
                return Err(Error::Model(format!("{name} must be positive definite")));
            }
        }
        let mut k = Matrix6::zeros();
        k.fixed_view_mut::<3, 3>(0, 0).copy_from(&j);
        k.fixed_view_mut::<3, 3>(0, 3).copy_from(&d);
        k.fixed_view_mut::<3, 3>(3, 0).copy_from(&d.transpose());
        k.fixed_view_mut::<3, 3>(3, 3).copy_from(&m);
        let chol = k
            .cholesky()
            .ok_or_else(|| Error::Model("the block inertia [[J, D], [D^T, M]] must be positive definite".into()))?;
        if !buoyancy.is_finite() || r_b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("buoyancy parameters must be finite".into()));
        }
        Ok(Self {
            j,
            m,
            d,
            buoyancy,
            r_b,
            mass_matrix: k,
            mass_inverse: chol.inverse(),
        })
    }

    pub fn mass_matrix(&self) -> &Matrix6<f64> {
        &self.mass_matrix
    }
}

impl Default for UnderwaterVehicle {
    fn default() -> Self {
        Self::new(
            Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            Matrix3::from_diagonal(&Vector3::new(3.0, 2.0, 1.0)),
            Matrix3::zeros(),
            0.1,
            Vector3::new(0.0, 0.0, 0.05),
        )
        .unwrap()
    }
}

impl Model for UnderwaterVehicle {
    fn id(&self) -> &'static str {
        "underwater_vehicle"
    }

    fn group(&self) -> Group {
        Group::SE3
    }

    fn ell(&self, g: &GroupElement, xi: &AlgebraElement) -> f64 {
        let x = xi.coords();
        let kx = DMatrix::from_column_slice(6, 6, self.mass_matrix.as_slice()) * x;
        0.5 * x.dot(&kx) + self.buoyancy * self.r_b.dot(&gravity_in_body(g))
    }

    fn dell_dxi(&self, _g: &GroupElement, xi: &AlgebraElement) -> Momentum {
        let x = nalgebra::Vector6::from_column_slice(xi.coords().as_slice());
        let p = self.mass_matrix * x;
        Momentum::from_coords(Group::SE3, DVector::from_column_slice(p.as_slice()))
    }

    fn body_force(&self, g: &GroupElement, _xi: &AlgebraElement) -> Momentum {
        let t = self.r_b.cross(&gravity_in_body(g)) * self.buoyancy;
        Momentum::from_coords(Group::SE3, DVector::from_column_slice(&[t[0], t[1], t[2], 0.0, 0.0, 0.0]))
    }

    fn legendre_inv(&self, _g: &GroupElement, mu: &Momentum) -> AlgebraElement {
        let p = nalgebra::Vector6::from_column_slice(mu.coords().as_slice());
        let x = self.mass_inverse * p;
        AlgebraElement::from_coords(Group::SE3, DVector::from_column_slice(x.as_slice()))
    }

    fn is_left_invariant(&self) -> bool {
        self.buoyancy == 0.0 || self.r_b == Vector3::zeros()
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn parameters(&self) -> Vec<(String, String)> {
        let rows = |m: &Matrix3<f64>| {
            let v: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| m[(i, j)])).collect();
            fmt_vec(&v)
        };
        vec![
            ("J".into(), rows(&self.j)),
            ("M".into(), rows(&self.m)),
            ("D".into(), rows(&self.d)),
            ("buoyancy".into(), format!("{:?}", self.buoyancy)),
            ("r_b".into(), fmt_vec(self.r_b.as_slice())),
        ]
    }
}

/// Largest relative discrepancy between the analytic derivatives of `model`
/// and central finite differences of `ell` with step `fd_step`.
///
/// Returns `(dell_dxi error, body_force error)`; each component error is
/// divided by `max(1, |analytic|)`. Configuration directions are generated
/// by the exponential retraction.
pub fn gradient_errors(model: &dyn Model, g: &GroupElement, xi: &AlgebraElement, fd_step: f64) -> (f64, f64) {
    let group = model.group();
    let d = group.algebra_dim();
    let exp = crate::retraction::Retraction::exp();
    let p = model.dell_dxi(g, xi);
    let f = model.body_force(g, xi);
    let mut err_p: f64 = 0.0;
    let mut err_f: f64 = 0.0;
    for j in 0..d {
        let mut e = DVector::zeros(d);
        e[j] = fd_step;
        let plus = AlgebraElement::from_coords(group, xi.coords() + &e);
        let minus = AlgebraElement::from_coords(group, xi.coords() - &e);
        let fd = (model.ell(g, &plus) - model.ell(g, &minus)) / (2.0 * fd_step);
        err_p = err_p.max((fd - p.coords()[j]).abs() / p.coords()[j].abs().max(1.0));

        let gp = crate::lie::compose(g, &exp.tau(&AlgebraElement::from_coords(group, e.clone())).unwrap()).unwrap();
        let gm = crate::lie::compose(g, &exp.tau(&AlgebraElement::from_coords(group, -e)).unwrap()).unwrap();
        let fd = (model.ell(&gp, xi) - model.ell(&gm, xi)) / (2.0 * fd_step);
        err_f = err_f.max((fd - f.coords()[j]).abs() / f.coords()[j].abs().max(1.0));
    }
    (err_p, err_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retraction::Retraction;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn alg(group: Group, c: &[f64]) -> AlgebraElement {
        AlgebraElement::from_slice(group, c).unwrap()
    }

    fn rx(a: f64) -> GroupElement {
        Retraction::exp().tau(&alg(Group::SO3, &[a, 0.0, 0.0])).unwrap()
    }

    #[test]
    fn rigid_body_values() {
        let rb = RigidBody::new(Vector3::new(2.0, 3.0, 4.0)).unwrap();
        let e = GroupElement::identity(Group::SO3);
        assert_eq!(rb.ell(&e, &alg(Group::SO3, &[1.0, 0.0, 0.0])), 1.0);
        assert_eq!(rb.energy(&e, &alg(Group::SO3, &[1.0, 0.0, 0.0])), 1.0);
        assert_eq!(rb.dell_dxi(&e, &alg(Group::SO3, &[1.0, 1.0, 1.0])).coords().as_slice(), &[2.0, 3.0, 4.0]);
        assert!(RigidBody::new(Vector3::new(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn heavy_top_values() {
        let top = HeavyTop::new(Vector3::new(2.0, 3.0, 4.0), 1.0, Vector3::z()).unwrap();
        let e = GroupElement::identity(Group::SO3);
        let zero = AlgebraElement::zero(Group::SO3);
        assert_eq!(top.ell(&e, &zero), -1.0);
        assert_eq!(top.energy(&e, &zero), 1.0);
        assert_eq!(top.body_force(&e, &zero).norm(), 0.0);
        let f = top.body_force(&rx(std::f64::consts::FRAC_PI_2), &zero);
        assert!(f.norm() > 0.5);
        assert!(!top.is_left_invariant());
        assert!(HeavyTop::new(Vector3::new(1.0, 1.0, 1.0), 1.0, Vector3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn vehicle_values() {
        let v = UnderwaterVehicle::new(
            Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            Matrix3::from_diagonal(&Vector3::new(4.0, 5.0, 6.0)),
            Matrix3::zeros(),
            0.0,
            Vector3::zeros(),
        )
        .unwrap();
        let e = GroupElement::identity(Group::SE3);
        assert_eq!(v.ell(&e, &alg(Group::SE3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])), 3.0);
        assert!(v.is_left_invariant());
        assert!(!UnderwaterVehicle::default().is_left_invariant());
    }

    #[test]
    fn vehicle_rejects_indefinite_inertia() {
        let bad = UnderwaterVehicle::new(
            Matrix3::identity(),
            Matrix3::identity(),
            Matrix3::identity() * 2.0,
            0.0,
            Vector3::zeros(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn zero_weight_top_behaves_as_rigid_body() {
        let inertia = Vector3::new(1.0, 2.0, 3.0);
        let rb = RigidBody::new(inertia).unwrap();
        let top = HeavyTop::new(inertia, 0.0, Vector3::z()).unwrap();
        let g = rx(0.4);
        let xi = alg(Group::SO3, &[0.3, -0.1, 0.7]);
        assert_eq!(top.ell(&g, &xi), rb.ell(&g, &xi));
        assert_eq!(top.dell_dxi(&g, &xi), rb.dell_dxi(&g, &xi));
        assert_eq!(top.body_force(&g, &xi).norm(), 0.0);
        assert!(top.is_left_invariant());
    }

    fn random_state(rng: &mut StdRng, group: Group) -> (GroupElement, AlgebraElement) {
        let d = group.algebra_dim();
        let theta = DVector::from_fn(d, |_, _| rng.random_range(-1.5..1.5));
        let g = Retraction::exp().tau(&AlgebraElement::new(group, theta).unwrap()).unwrap();
        let xi = AlgebraElement::new(group, DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0))).unwrap();
        (g, xi)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(4);
        let coupled = UnderwaterVehicle::new(
            Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            Matrix3::from_diagonal(&Vector3::new(3.0, 2.0, 1.0)),
            Matrix3::new(0.2, 0.1, 0.0, -0.1, 0.3, 0.05, 0.0, 0.1, -0.2),
            0.4,
            Vector3::new(0.1, -0.2, 0.3),
        )
        .unwrap();
        let models: Vec<Box<dyn Model>> = vec![
            Box::new(RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap()),
            Box::new(HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 2.5, Vector3::new(0.6, 0.0, 0.8)).unwrap()),
            Box::new(UnderwaterVehicle::default()),
            Box::new(coupled),
        ];
        for model in &models {
            for _ in 0..100 {
                let (g, xi) = random_state(&mut rng, model.group());
                let (ep, ef) = gradient_errors(model.as_ref(), &g, &xi, 1e-6);
                assert!(ep < 1e-7 && ef < 1e-7, "{}: {ep:e} {ef:e}", model.id());
            }
        }
    }

    #[test]
    fn heavy_top_torque_matches_directional_derivative_at_quarter_turn() {
        let top = HeavyTop::new(Vector3::new(2.0, 3.0, 4.0), 1.0, Vector3::z()).unwrap();
        let g = rx(std::f64::consts::FRAC_PI_2);
        let (_, ef) = gradient_errors(&top, &g, &AlgebraElement::zero(Group::SO3), 1e-6);
        assert!(ef < 1e-7);
    }

    #[test]
    fn legendre_round_trip() {
        let mut rng = StdRng::seed_from_u64(3);
        let d = Matrix3::new(0.1, 0.0, 0.05, 0.0, -0.1, 0.0, 0.02, 0.0, 0.1);
        let vehicle = UnderwaterVehicle::new(
            Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            Matrix3::from_diagonal(&Vector3::new(3.0, 2.0, 1.0)),
            d,
            0.1,
            Vector3::new(0.0, 0.0, 0.05),
        )
        .unwrap();
        let models: Vec<Box<dyn Model>> = vec![
            Box::new(RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap()),
            Box::new(HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 0.7, Vector3::x()).unwrap()),
            Box::new(vehicle),
        ];
        for model in &models {
            let group = model.group();
            for _ in 0..100 {
                let mu = Momentum::new(group, DVector::from_fn(group.algebra_dim(), |_, _| rng.random_range(-2.0..2.0))).unwrap();
                let g = GroupElement::identity(group);
                let xi = model.legendre_inv(&g, &mu);
                assert!((model.dell_dxi(&g, &xi).coords() - mu.coords()).amax() < 1e-11);
            }
        }
    }
}
