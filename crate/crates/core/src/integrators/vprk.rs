use nalgebra::DVector;

use super::{check_step, solve, ButcherTableau, HPState, Kit, StageData, StepReport};
use crate::config::NumericsConfig;
use crate::error::Result;
use crate::lie::GroupElement;
use crate::models::Model;
use crate::retraction::Retraction;

/// Stage quantities derived from the stacked stage velocities.
struct Stages {
    theta: Vec<DVector<f64>>,
    xi: Vec<DVector<f64>>,
    g: Vec<GroupElement>,
    m: Vec<DVector<f64>>,
    /// `(dτ_{−hΘ_j})* f_j`
    q: Vec<DVector<f64>>,
    /// `(dτ⁻¹_{hΘ_j})* (dτ_{−hΘ_j})* f_j`
    p: Vec<DVector<f64>>,
    xi_next: DVector<f64>,
}

fn evaluate(kit: &Kit, t: &ButcherTableau, h: f64, g: &GroupElement, stacked: &DVector<f64>) -> Result<Stages> {
    let s = t.stages();
    let d = kit.group.algebra_dim();
    let xi: Vec<DVector<f64>> = (0..s).map(|i| stacked.rows(i * d, d).into_owned()).collect();
    let combine = |w: &dyn Fn(usize) -> f64| {
        let mut acc = DVector::zeros(d);
        for (j, x) in xi.iter().enumerate() {
            let c = w(j);
            if c != 0.0 {
                acc.axpy(c, x, 1.0);
            }
        }
        acc
    };
    let theta: Vec<DVector<f64>> = (0..s).map(|i| combine(&|j| t.a()[(i, j)])).collect();
    let xi_next = combine(&|j| t.b()[j]);
    let mut stages = Stages {
        g: Vec::with_capacity(s),
        m: Vec::with_capacity(s),
        q: Vec::with_capacity(s),
        p: Vec::with_capacity(s),
        theta,
        xi,
        xi_next,
    };
    let forced = !kit.model.is_left_invariant();
    for i in 0..s {
        let ht = &stages.theta[i] * h;
        let gi = kit.retract(g, &ht)?;
        stages.m.push(kit.dell(&gi, &stages.xi[i]));
        if forced {
            let f = kit.force(&gi, &stages.xi[i]);
            let q = kit.dt(&-&ht)?.tr_mul(&f);
            let p = kit.dti(&ht)?.tr_mul(&q);
            stages.q.push(q);
            stages.p.push(p);
        } else {
            stages.q.push(DVector::zeros(d));
            stages.p.push(DVector::zeros(d));
        }
        stages.g.push(gi);
    }
    Ok(stages)
}

/// One step of the s-stage VPRK scheme.
///
/// Solves for the stage velocities `Ξ_i` from the internal momentum
/// relations, with `Θ_i = Σ a_ij Ξ_j`, `G_i = g_k τ(hΘ_i)`,
/// `M_i = ∂ℓ/∂ξ(G_i, Ξ_i)`; then reconstructs `g_{k+1} = g_k τ(hξ_{k+1})`
/// and obtains `μ_{k+1}` from the external momentum update.
pub fn vprk_step(
    model: &dyn Model,
    tableau: &ButcherTableau,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport)> {
    let (next, report, _) = vprk_step_detailed(model, tableau, r, h, state, numerics)?;
    Ok((next, report))
}

/// As [`vprk_step`], also returning the stage data.
pub fn vprk_step_detailed(
    model: &dyn Model,
    tableau: &ButcherTableau,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport, StageData)> {
    check_step(model, r, h, state)?;
    let kit = Kit::new(model, r);
    let s = tableau.stages();
    let d = kit.group.algebra_dim();
    let g = &state.g;
    let lhs_k = kit.phase(h, state.xi.coords(), state.mu.coords())?;
    let b = tableau.b();
    let a = tableau.a();

    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let st = evaluate(&kit, tableau, h, g, x)?;
        let dp = kit.dti(&(&st.xi_next * h))?;
        let mut out = DVector::zeros(s * d);
        for i in 0..s {
            let mut ri = dp.tr_mul(&st.m[i]) - &lhs_k;
            for j in 0..s {
                ri.axpy(-h * b[j], &st.p[j], 1.0);
                let w = b[j] * a[(j, i)] / b[i];
                if w != 0.0 {
                    ri.axpy(h * w, &dp.tr_mul(&st.q[j]), 1.0);
                }
            }
            out.rows_mut(i * d, d).copy_from(&ri);
        }
        Ok(out)
    };
    let guess = DVector::from_fn(s * d, |k, _| state.xi.coords()[k % d]);
    let (x, report) = solve(residual, guess, numerics)?;

    let st = evaluate(&kit, tableau, h, g, &x)?;
    let step = &st.xi_next * h;
    kit.guard(&step)?;
    for th in &st.theta {
        kit.guard(&(th * h))?;
    }
    let dp = kit.dti(&step)?;
    let mut rhs = lhs_k;
    for j in 0..s {
        rhs.axpy(h * b[j], &st.p[j], 1.0);
    }
    let mu_next = dp
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or(crate::error::Error::Singular("external momentum update"))?;
    let g_next = kit.retract(g, &step)?;

    let stages = StageData {
        theta: st.theta.iter().map(|v| kit.alg(v.clone())).collect(),
        xi: st.xi.iter().map(|v| kit.alg(v.clone())).collect(),
        m: st.m.iter().map(|v| kit.mom(v.clone())).collect(),
        mu: (0..s).map(|i| kit.mom(&st.q[i] * (-h * b[i]))).collect(),
    };
    let next = HPState {
        g: g_next,
        xi: kit.alg(st.xi_next),
        mu: kit.mom(mu_next),
        t: state.t + h,
    };
    Ok((next, report, stages))
}
