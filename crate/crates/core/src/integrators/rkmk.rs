use nalgebra::DVector;

use super::{check_step, solve, ButcherTableau, HPState, Kit, StepReport};
use crate::config::NumericsConfig;
use crate::error::Result;
use crate::lie::{self, AlgebraElement, Group, GroupElement};
use crate::models::Model;
use crate::retraction::Retraction;

/// Stage increments: algebra part `dτ⁻¹_{−hΘ_j} ξ_j` and vector part `ẏ_j`.
type Field<'f> = dyn Fn(f64, &GroupElement, &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> + 'f;

/// RKMK on the product `G × ℝᵐ`, where the vector factor uses the additive
/// group (its retraction is the identity).
#[allow(clippy::too_many_arguments)]
fn rkmk_product(
    field: &Field,
    group: Group,
    tableau: &ButcherTableau,
    r: &Retraction,
    h: f64,
    t: f64,
    g: &GroupElement,
    y: &DVector<f64>,
    numerics: &NumericsConfig,
) -> Result<(GroupElement, DVector<f64>, StepReport)> {
    let s = tableau.stages();
    let d = group.algebra_dim();
    let m = y.len();
    let w = d + m;
    let a = tableau.a();
    let c = tableau.c();
    let alg = |x: DVector<f64>| AlgebraElement::from_coords(group, x);

    // Maps stacked increments K to the fixed-point image Φ(K).
    let image = |k: &DVector<f64>, only: Option<usize>| -> Result<DVector<f64>> {
        let mut out = k.clone();
        for i in 0..s {
            if only.is_some_and(|o| o != i) {
                continue;
            }
            let mut theta = DVector::zeros(d);
            let mut yi = y.clone();
            for j in 0..s {
                if a[(i, j)] != 0.0 {
                    theta.axpy(a[(i, j)], &k.rows(j * w, d), 1.0);
                    yi.axpy(h * a[(i, j)], &k.rows(j * w + d, m), 1.0);
                }
            }
            let ht = theta * h;
            let gi = lie::compose(g, &r.tau(&alg(ht.clone()))?)?;
            let (xi, ydot) = field(t + c[i] * h, &gi, &yi)?;
            let ki = r.dtau_inv_matrix(&alg(-ht))? * xi;
            out.rows_mut(i * w, d).copy_from(&ki);
            out.rows_mut(i * w + d, m).copy_from(&ydot);
        }
        Ok(out)
    };

    let (k, report) = if tableau.is_explicit() {
        let mut k = DVector::zeros(s * w);
        for i in 0..s {
            k = image(&k, Some(i))?;
        }
        (k, StepReport::explicit())
    } else {
        let (g0, y0) = field(t, g, y)?;
        let mut guess = DVector::zeros(s * w);
        for i in 0..s {
            guess.rows_mut(i * w, d).copy_from(&g0);
            guess.rows_mut(i * w + d, m).copy_from(&y0);
        }
        solve(|k| Ok(k - image(k, None)?), guess, numerics)?
    };

    let mut inc = DVector::zeros(d);
    let mut y_next = y.clone();
    for j in 0..s {
        let b = tableau.b()[j];
        inc.axpy(b, &k.rows(j * w, d), 1.0);
        y_next.axpy(h * b, &k.rows(j * w + d, m), 1.0);
    }
    for i in 0..s {
        let mut theta = DVector::zeros(d);
        for j in 0..s {
            theta.axpy(a[(i, j)], &k.rows(j * w, d), 1.0);
        }
        r.check_domain(&alg(theta * h))?;
    }
    let step = alg(inc * h);
    r.check_domain(&step)?;
    let g_next = lie::compose(g, &r.tau(&step)?)?;
    Ok((g_next, y_next, report))
}

/// One RKMK step for `ġ = g·f(t, g)`.
pub fn rkmk_step(
    f: impl Fn(f64, &GroupElement) -> Result<AlgebraElement>,
    tableau: &ButcherTableau,
    r: &Retraction,
    h: f64,
    t: f64,
    g: &GroupElement,
    numerics: &NumericsConfig,
) -> Result<(GroupElement, StepReport)> {
    let field = |t: f64, g: &GroupElement, _: &DVector<f64>| Ok((f(t, g)?.into_coords(), DVector::zeros(0)));
    let (g_next, _, report) = rkmk_product(&field, g.group(), tableau, r, h, t, g, &DVector::zeros(0), numerics)?;
    Ok((g_next, report))
}

/// RKMK applied to the left-trivialized Hamilton-Pontryagin equations
/// `ġ = g ξ`, `μ̇ = ad*_ξ μ + f(g, ξ)` with `ξ = (∂ℓ/∂ξ)⁻¹(μ)`, treated on
/// the product group `G × (𝔤*, +)`.
pub fn rkmk_hp_step(
    model: &dyn Model,
    tableau: &ButcherTableau,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport)> {
    check_step(model, r, h, state)?;
    let kit = Kit::new(model, r);
    let field = |_: f64, g: &GroupElement, mu: &DVector<f64>| {
        let xi = model.legendre_inv(g, &kit.mom(mu.clone()));
        let mut mudot = lie::ad_matrix(&xi).tr_mul(mu);
        mudot += kit.force(g, xi.coords());
        Ok((xi.into_coords(), mudot))
    };
    let (g, mu, report) = rkmk_product(
        &field,
        kit.group,
        tableau,
        r,
        h,
        state.t,
        &state.g,
        state.mu.coords(),
        numerics,
    )?;
    let mu = kit.mom(mu);
    let xi = model.legendre_inv(&g, &mu);
    Ok((HPState { g, xi, mu, t: state.t + h }, report))
}
