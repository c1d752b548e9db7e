//! Invariant suite behind the `selftest` command.

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::config::NumericsConfig;
use crate::diagnostics::{dlp_residual, symplecticity_defect};
use crate::error::Error;
use crate::integrators::{sv_step, ve_backward_step, ve_forward_step, vprk_step, ButcherTableau, HPState, Integrator, Method};
use crate::lie::{self, AlgebraElement, Group, GroupElement};
use crate::models::{gradient_errors, HeavyTop, Model, RigidBody, UnderwaterVehicle};
use crate::retraction::{dexp_inv_series, BernoulliTable, Retraction, RetractionKind, BERNOULLI};
use crate::sampling;

/// Outcome of one check group.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn free_rigid_body() -> RigidBody {
    RigidBody::new(Vector3::new(1.0, 2.0, 3.0)).unwrap()
}

/// `(kind, group)` pairs on which each retraction is defined.
pub fn retraction_cases() -> Vec<(RetractionKind, Group)> {
    let mut cases = Vec::new();
    for kind in RetractionKind::ALL {
        for group in [Group::SO3, Group::SE3] {
            if kind.supports(group) {
                cases.push((kind, group));
            }
        }
    }
    cases
}

/// Worst residuals of the retraction identities over random `‖ξ‖ ≤ 0.8`:
/// `[τ(ξ)τ(−ξ) − e, τ⁻¹τ(ξ) − ξ, dτ_ξ − Ad_τ dτ_{−ξ}, dτ⁻¹_ξ − dτ⁻¹_{−ξ} Ad_{τ⁻¹}, dτ dτ⁻¹ − I]`.
pub fn retraction_identity_residuals(kind: RetractionKind, group: Group, samples: usize, seed: u64) -> [f64; 5] {
    let r = Retraction::new(kind, &NumericsConfig::default());
    let mut rng = StdRng::seed_from_u64(seed);
    let n = group.matrix_dim();
    let d = group.algebra_dim();
    let mut worst = [0.0f64; 5];
    for _ in 0..samples {
        let xi = sampling::algebra_in_ball(&mut rng, group, 0.8);
        let neg = xi.scaled(-1.0);
        let t = r.tau(&xi).unwrap();
        let tn = r.tau(&neg).unwrap();
        let res = [
            (lie::compose(&t, &tn).unwrap().matrix() - DMatrix::<f64>::identity(n, n)).amax(),
            (r.tau_inv(&t).unwrap().coords() - xi.coords()).amax(),
            (r.dtau_matrix(&xi).unwrap() - lie::adjoint_matrix(&t) * r.dtau_matrix(&neg).unwrap()).amax(),
            (r.dtau_inv_matrix(&xi).unwrap() - r.dtau_inv_matrix(&neg).unwrap() * lie::adjoint_matrix(&tn)).amax(),
            (r.dtau_matrix(&xi).unwrap() * r.dtau_inv_matrix(&xi).unwrap() - DMatrix::<f64>::identity(d, d)).amax(),
        ];
        for (w, v) in worst.iter_mut().zip(res) {
            *w = w.max(v);
        }
    }
    worst
}

pub const RETRACTION_LIMITS: [f64; 5] = [1e-12, 1e-10, 1e-11, 1e-11, 1e-11];

pub fn check_retraction_identities(samples: usize, seed: u64) -> Check {
    let mut passed = true;
    let mut parts = Vec::new();
    for (kind, group) in retraction_cases() {
        let w = retraction_identity_residuals(kind, group, samples, seed);
        passed &= w.iter().zip(RETRACTION_LIMITS).all(|(v, l)| *v < l);
        parts.push(format!("{kind}/{} max {:.1e}", group.name(), w.iter().copied().fold(0.0, f64::max)));
    }
    Check::new("retraction identities", passed, parts.join(", "))
}

/// Largest deviation of the `q = 12` Bernoulli series from the closed-form
/// so(3) `dexp⁻¹` over random `‖ξ‖ ≤ 0.8`.
pub fn dexp_inv_series_error(table: &BernoulliTable, samples: usize, seed: u64) -> f64 {
    let exp = Retraction::exp();
    let mut rng = StdRng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let xi = sampling::algebra_in_ball(&mut rng, Group::SO3, 0.8);
            (dexp_inv_series(table, &xi, 12) - exp.dtau_inv_matrix(&xi).unwrap()).amax()
        })
        .fold(0.0, f64::max)
}

pub fn check_dexp_inv_series(table: &BernoulliTable, samples: usize, seed: u64) -> Check {
    let e = dexp_inv_series_error(table, samples, seed);
    Check::new("dexp^-1 series", e < 1e-12, format!("q=12 vs closed form max {e:.1e} (limit 1e-12)"))
}

/// Table with `B₂` replaced by a wrong value, used to show the suite
/// detects a broken series.
pub fn corrupted_bernoulli() -> BernoulliTable {
    let mut t = BERNOULLI;
    t.values[2] = 1.0 / 5.0;
    t
}

/// `[skew(τ) − hat(ξ), S − Sᵀ, S² − hat(ξ)² − I]` worst over random
/// `‖ξ‖ < 0.99`.
pub fn skew_sqrt_residuals(samples: usize, seed: u64) -> [f64; 3] {
    let r = Retraction::skew_sqrt();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..samples {
        let xi = sampling::algebra_in_ball(&mut rng, Group::SO3, 0.98);
        let t = r.tau(&xi).unwrap().rotation();
        let x = Matrix3::from_fn(|i, j| lie::hat(&xi)[(i, j)]);
        let s = t - x;
        let res = [
            ((t - t.transpose()) * 0.5 - x).amax(),
            (s - s.transpose()).amax(),
            (s * s - x * x - Matrix3::identity()).amax(),
        ];
        for (w, v) in worst.iter_mut().zip(res) {
            *w = w.max(v);
        }
    }
    worst
}

/// Whether every `‖ξ‖ ≥ 0.99` is rejected with `OutOfDomain` by the
/// retraction guard and by a stepper, and `τ` itself rejects `‖ξ‖ ≥ 1`.
pub fn skew_sqrt_domain_enforced() -> bool {
    let r = Retraction::skew_sqrt();
    let at = |n: f64| AlgebraElement::from_slice(Group::SO3, &[0.0, 0.0, n]).unwrap();
    let ood = |e: Result<(), Error>| matches!(e, Err(Error::OutOfDomain { .. }));
    let guard = [0.99, 0.995, 1.0, 1.5].iter().all(|&n| ood(r.check_domain(&at(n)))) && ood(r.check_domain(&at(-0.99)));
    let inside = r.check_domain(&at(0.98)).is_ok();
    let tau = [1.0, 1.2].iter().all(|&n| ood(r.tau(&at(n)).map(|_| ())));
    let rb = free_rigid_body();
    let h = 0.1;
    let s = HPState::from_velocity(&rb, GroupElement::identity(Group::SO3), at(0.995 / h), 0.0).unwrap();
    let n = NumericsConfig::default();
    let steppers = [
        ve_forward_step(&rb, &r, h, &s, &n).map(|_| ()),
        ve_backward_step(&rb, &r, h, &s, &n).map(|_| ()),
        sv_step(&rb, &r, h, &s, &n).map(|_| ()),
    ]
    .into_iter()
    .all(ood);
    guard && inside && tau && steppers
}

pub fn check_skew_sqrt(samples: usize, seed: u64) -> Check {
    let w = skew_sqrt_residuals(samples, seed);
    let domain = skew_sqrt_domain_enforced();
    let passed = w[0] <= 1e-15 && w[1] < 1e-12 && w[2] < 1e-12 && domain;
    Check::new(
        "skew_sqrt properties",
        passed,
        format!(
            "skew part {:.1e}, S asymmetry {:.1e}, S^2 residual {:.1e}, domain guard {}",
            w[0],
            w[1],
            w[2],
            if domain { "enforced" } else { "NOT enforced" }
        ),
    )
}

/// Largest component difference between each specialized stepper and VPRK
/// with its tableau, over random rigid-body states and all retractions.
pub fn oracle_equivalence_error(states: usize, h: f64, seed: u64) -> f64 {
    let rb = free_rigid_body();
    let n = NumericsConfig::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let s = sampling::state(&mut rng, &rb);
        for kind in RetractionKind::ALL {
            let r = Retraction::new(kind, &n);
            let pairs = [
                (ve_forward_step(&rb, &r, h, &s, &n), ButcherTableau::forward_euler()),
                (ve_backward_step(&rb, &r, h, &s, &n), ButcherTableau::backward_euler()),
                (sv_step(&rb, &r, h, &s, &n), ButcherTableau::implicit_trapezoidal()),
            ];
            for (special, tableau) in pairs {
                let (a, _) = special.unwrap();
                let (b, _) = vprk_step(&rb, &tableau, &r, h, &s, &n).unwrap();
                worst = worst
                    .max((a.g.matrix() - b.g.matrix()).amax())
                    .max((a.xi.coords() - b.xi.coords()).amax())
                    .max((a.mu.coords() - b.mu.coords()).amax());
            }
        }
    }
    worst
}

pub fn check_oracle_equivalence(states: usize, seed: u64) -> Check {
    let e = oracle_equivalence_error(states, 0.05, seed);
    Check::new("oracle equivalence", e < 1e-12, format!("{states} states, max component difference {e:.1e} (limit 1e-12)"))
}

/// Largest per-step discrete Lie-Poisson residual of ve_forward,
/// ve_backward and sv on the free rigid body for every retraction.
pub fn dlp_residual_max(steps: usize, h: f64, seed: u64) -> Vec<(String, f64)> {
    let rb = free_rigid_body();
    let n = NumericsConfig::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let start = sampling::state(&mut rng, &rb);
    let mut out = Vec::new();
    for kind in RetractionKind::ALL {
        for method in [Method::VeForward, Method::VeBackward, Method::Sv] {
            let it = Integrator::new(method, kind, n);
            let mut s = start.clone();
            let mut worst: f64 = 0.0;
            for _ in 0..steps {
                let next = it.step(&rb, h, &s).unwrap().0;
                worst = worst.max(dlp_residual(&it.retraction, h, &s, &next).unwrap());
                s = next;
            }
            out.push((it.id() + "/" + kind.name(), worst));
        }
    }
    out
}

pub fn check_dlp_residual(steps: usize, seed: u64) -> Check {
    let res = dlp_residual_max(steps, 0.01, seed);
    let worst = res.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Check::new(
        "discrete Lie-Poisson residual",
        worst < 1e-10,
        format!("{} runs x {steps} steps, max {worst:.1e} (limit 1e-10)", res.len()),
    )
}

/// Symplecticity defects `(variational per method, rk4)` at each state.
pub fn symplecticity_defects(states: &[HPState], h: f64) -> (Vec<(String, Vec<f64>)>, Vec<f64>) {
    let rb = free_rigid_body();
    let n = NumericsConfig::default();
    let variational: Vec<(String, Vec<f64>)> = [Method::Sv, Method::VeForward, Method::VeBackward]
        .into_iter()
        .map(|m| {
            let it = Integrator::new(m, RetractionKind::Cayley, n);
            (it.id(), states.iter().map(|s| symplecticity_defect(&it, &rb, h, s).unwrap()).collect())
        })
        .collect();
    let rk4 = Integrator::new(Method::Rk4, RetractionKind::Exp, n);
    let rk4_defects = states.iter().map(|s| symplecticity_defect(&rk4, &rb, h, s).unwrap()).collect();
    (variational, rk4_defects)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Variational defects below `1e-6` and the mean rk4 defect at least `100×`
/// the largest variational mean.
pub fn check_symplecticity(states: &[HPState], h: f64) -> Check {
    let (var, rk4) = symplecticity_defects(states, h);
    let var_max = var.iter().flat_map(|(_, d)| d.iter().copied()).fold(0.0, f64::max);
    let var_mean = var.iter().map(|(_, d)| mean(d)).fold(0.0, f64::max);
    let ratio = mean(&rk4) / var_mean;
    let worst_state_ratio = (0..states.len())
        .map(|i| rk4[i] / var.iter().map(|(_, d)| d[i]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    Check::new(
        "symplecticity",
        var_max < 1e-6 && ratio >= 100.0,
        format!(
            "{} states, variational max {var_max:.1e}, rk4 mean {:.1e}, mean ratio {ratio:.0} (need >= 100), worst single-state ratio {worst_state_ratio:.0}",
            states.len(),
            mean(&rk4)
        ),
    )
}

/// Reference state used by the single-state symplecticity check.
pub fn reference_state() -> HPState {
    let rb = free_rigid_body();
    let g = Retraction::exp().tau(&AlgebraElement::from_slice(Group::SO3, &[0.3, -0.4, 0.2]).unwrap()).unwrap();
    let xi = AlgebraElement::from_slice(Group::SO3, &[1.0, 0.5, -0.2]).unwrap();
    HPState::from_velocity(&rb, g, xi, 0.0).unwrap()
}

pub fn gradient_check_models() -> Vec<Box<dyn Model>> {
    let coupling = Matrix3::new(0.1, 0.0, 0.05, 0.0, -0.1, 0.0, 0.02, 0.0, 0.1);
    vec![
        Box::new(free_rigid_body()),
        Box::new(HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 1.5, Vector3::new(0.3, -0.2, 0.9).normalize()).unwrap()),
        Box::new(UnderwaterVehicle::default()),
        Box::new(
            UnderwaterVehicle::new(
                Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
                Matrix3::from_diagonal(&Vector3::new(3.0, 2.0, 1.0)),
                coupling,
                0.7,
                Vector3::new(0.1, -0.2, 0.3),
            )
            .unwrap(),
        ),
    ]
}

/// Largest relative finite-difference error over random states per model.
pub fn gradient_check_errors(samples: usize, seed: u64) -> Vec<(&'static str, f64)> {
    let fd = NumericsConfig::default().fd_step;
    let mut rng = StdRng::seed_from_u64(seed);
    gradient_check_models()
        .iter()
        .map(|m| {
            let worst = (0..samples)
                .map(|_| {
                    let s = sampling::state(&mut rng, m.as_ref());
                    let (a, b) = gradient_errors(m.as_ref(), &s.g, &s.xi, fd);
                    a.max(b)
                })
                .fold(0.0, f64::max);
            (m.id(), worst)
        })
        .collect()
}

pub fn check_gradients(samples: usize, seed: u64) -> Check {
    let errs = gradient_check_errors(samples, seed);
    let worst = errs.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let parts: Vec<String> = errs.iter().map(|(m, e)| format!("{m} {e:.1e}")).collect();
    Check::new("model gradients", worst < 1e-7, format!("{} (limit 1e-7)", parts.join(", ")))
}

/// Runs every check group, printing one line per group as it finishes.
pub fn run(table: &BernoulliTable, mut report: impl FnMut(&Check)) -> Vec<Check> {
    let seed = 20240601;
    let groups: Vec<Box<dyn Fn() -> Check + '_>> = vec![
        Box::new(|| check_retraction_identities(1000, seed)),
        Box::new(|| check_dexp_inv_series(table, 1000, seed)),
        Box::new(|| check_skew_sqrt(1000, seed)),
        Box::new(|| check_oracle_equivalence(100, seed)),
        Box::new(|| check_dlp_residual(10_000, seed)),
        Box::new(|| check_symplecticity(&[reference_state()], 0.05)),
        Box::new(|| check_gradients(100, seed)),
    ];
    groups
        .iter()
        .map(|f| {
            let start = Instant::now();
            let mut c = f();
            c.detail.push_str(&format!(" [{:.2} s]", start.elapsed().as_secs_f64()));
            report(&c);
            c
        })
        .collect()
}
