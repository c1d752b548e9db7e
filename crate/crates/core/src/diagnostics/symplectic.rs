use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::integrators::{HPState, Integrator};
use crate::lie::{self, AlgebraElement, GroupElement, Momentum};
use crate::models::Model;
use crate::retraction::Retraction;

/// Local coordinates `g = ḡ τ(θ)` around a base point, paired with the
/// phase momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub theta: AlgebraElement,
    pub mu: Momentum,
}

impl ChartPoint {
    pub fn to_vector(&self) -> DVector<f64> {
        let d = self.theta.coords().len();
        DVector::from_fn(2 * d, |i, _| if i < d { self.theta.coords()[i] } else { self.mu.coords()[i - d] })
    }

    pub fn from_vector(group: lie::Group, z: &DVector<f64>) -> Self {
        let d = group.algebra_dim();
        Self {
            theta: AlgebraElement::from_coords(group, z.rows(0, d).into_owned()),
            mu: Momentum::from_coords(group, z.rows(d, d).into_owned()),
        }
    }
}

/// Canonical one-form `Λ(θ, μ) = (dτ_{−θ})* μ` in chart coordinates; the
/// momentum components are zero.
fn one_form(r: &Retraction, z: &DVector<f64>, d: usize, group: lie::Group) -> Result<DVector<f64>> {
    let theta = AlgebraElement::from_coords(group, z.rows(0, d).into_owned());
    let lam = r.dtau_matrix(&theta.scaled(-1.0))?.tr_mul(&z.rows(d, d).into_owned());
    let mut out = DVector::zeros(2 * d);
    out.rows_mut(0, d).copy_from(&lam);
    Ok(out)
}

fn central_jacobian(f: impl Fn(&DVector<f64>) -> Result<DVector<f64>>, z: &DVector<f64>, eps: f64) -> Result<DMatrix<f64>> {
    let n = z.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[i] += eps;
        zm[i] -= eps;
        cols.push((f(&zp)? - f(&zm)?) / (2.0 * eps));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// `ω = −dΛ` by central differences.
fn two_form(r: &Retraction, z: &DVector<f64>, d: usize, group: lie::Group, eps: f64) -> Result<DMatrix<f64>> {
    let k = central_jacobian(|z| one_form(r, z, d, group), z, eps)?;
    Ok(k.clone() - k.transpose())
}

/// Symplecticity defect `‖Jᵀ ω(z₁) J − ω(z₀)‖_F` of a map on `(g, μ)`
/// expressed in `τ`-charts centred at the input and output points.
pub fn map_symplecticity_defect(
    map: impl Fn(&GroupElement, &Momentum) -> Result<(GroupElement, Momentum)>,
    r: &Retraction,
    g: &GroupElement,
    mu: &Momentum,
    fd_step: f64,
) -> Result<f64> {
    let group = g.group();
    let d = group.algebra_dim();
    let (g1, mu1) = map(g, mu)?;
    let g1_inv = lie::inverse(&g1);
    let z0 = ChartPoint {
        theta: AlgebraElement::zero(group),
        mu: mu.clone(),
    }
    .to_vector();
    let chart_map = |z: &DVector<f64>| -> Result<DVector<f64>> {
        let p = ChartPoint::from_vector(group, z);
        r.check_domain(&p.theta)?;
        let gz = lie::compose(g, &r.tau(&p.theta)?)?;
        let (ga, ma) = map(&gz, &p.mu)?;
        let rel = GroupElement::from_matrix_unchecked(group, g1_inv.matrix() * ga.matrix());
        let theta = r.tau_inv(&rel)?;
        Ok(ChartPoint { theta, mu: ma }.to_vector())
    };
    let eps = fd_step * (1.0 + z0.norm());
    let jac = central_jacobian(chart_map, &z0, eps)?;
    let z1 = ChartPoint {
        theta: AlgebraElement::zero(group),
        mu: mu1,
    }
    .to_vector();
    let w0 = two_form(r, &z0, d, group, eps)?;
    let w1 = two_form(r, &z1, d, group, fd_step * (1.0 + z1.norm()))?;
    Ok((jac.transpose() * w1 * jac - w0).norm())
}

/// Newton tolerance used while differentiating the step map. Solver
/// stopping error is divided by the chart step in the Jacobian, so the
/// implicit equations are solved close to roundoff.
pub const MAP_NEWTON_TOL: f64 = 1e-14;

/// Symplecticity defect of one step of `integrator` at `state`.
///
/// The map acts on `(g, p)` with `p` the phase momentum of the method, so
/// for variational methods `p = (dτ⁻¹_{−hξ})* μ`. Charts use the
/// integrator's retraction evaluated in closed form. Implicit solves use
/// a tolerance of at most `MAP_NEWTON_TOL · (1 + ‖p‖)`.
pub fn symplecticity_defect(integrator: &Integrator, model: &dyn Model, h: f64, state: &HPState) -> Result<f64> {
    let mut chart = integrator.retraction;
    chart.use_series = false;
    let group = state.group();
    let p0 = Momentum::from_coords(group, integrator.phase_momentum(model, h, state)?);
    let mut integrator = integrator.clone();
    integrator.numerics.newton_tol = integrator.numerics.newton_tol.min(MAP_NEWTON_TOL * (1.0 + p0.norm()));
    let integrator = &integrator;
    let map = |g: &GroupElement, p: &Momentum| -> Result<(GroupElement, Momentum)> {
        let s = integrator.state_from_phase(model, h, g.clone(), p, state.t)?;
        let (s1, _) = integrator.step(model, h, &s)?;
        let p1 = Momentum::from_coords(group, integrator.phase_momentum(model, h, &s1)?);
        Ok((s1.g, p1))
    };
    map_symplecticity_defect(map, &chart, &state.g, &p0, integrator.numerics.chart_fd_step)
}
