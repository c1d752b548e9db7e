use nalgebra::{Matrix3, Vector3};
use rand::rngs::StdRng;
use rand::SeedableRng;

use lievprk::config::NumericsConfig;
use lievprk::diagnostics::{convergence_order, dlp_residual, spatial_momentum, symplecticity_defect};
use lievprk::integrators::{integrate, HPState, Integrator};
use lievprk::lie::{AlgebraElement, Group, GroupElement};
use lievprk::models::{HeavyTop, Model, UnderwaterVehicle};
use lievprk::retraction::RetractionKind;
use lievprk::sampling;

fn heavy_top() -> HeavyTop {
    HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 1.0, Vector3::new(0.6, 0.0, 0.8)).unwrap()
}

fn top_state(top: &HeavyTop) -> HPState {
    let xi = AlgebraElement::from_slice(Group::SO3, &[0.3, 1.2, -0.4]).unwrap();
    HPState::from_velocity(top, GroupElement::identity(Group::SO3), xi, 0.0).unwrap()
}

fn free_vehicle() -> UnderwaterVehicle {
    let diag = |a, b, c| Matrix3::from_diagonal(&Vector3::new(a, b, c));
    UnderwaterVehicle::new(diag(1.0, 2.0, 3.0), diag(3.0, 2.0, 1.0), Matrix3::zeros(), 0.0, Vector3::zeros()).unwrap()
}

#[test]
fn heavy_top_conserves_vertical_momentum() {
    let top = heavy_top();
    let h = 0.02;
    for method in ["ve_forward", "ve_backward", "sv", "vprk:gauss2"] {
        for kind in [RetractionKind::Exp, RetractionKind::Cayley] {
            let it = Integrator::parse(method, kind, NumericsConfig::default()).unwrap();
            let states = integrate(&it, &top, h, 2000, top_state(&top)).unwrap();
            let vertical = |s: &HPState| spatial_momentum(s, &it.retraction, h).unwrap().discrete.coords()[2];
            let first = vertical(&states[0].0);
            let drift = states.iter().map(|(s, _)| (vertical(s) - first).abs()).fold(0.0, f64::max);
            assert!(drift < 1e-10, "{method}/{kind}: {drift:e}");
        }
    }
}

#[test]
fn heavy_top_energy_is_bounded_for_sv() {
    let top = heavy_top();
    let it = Integrator::parse("sv", RetractionKind::Cayley, NumericsConfig::default()).unwrap();
    let states = integrate(&it, &top, 0.02, 20_000, top_state(&top)).unwrap();
    let energy: Vec<f64> = states.iter().map(|(s, _)| s.energy(&top)).collect();
    let early = energy[..5000].iter().fold(0.0f64, |m, e| m.max((e - energy[0]).abs()));
    let late = energy[15_000..].iter().fold(0.0f64, |m, e| m.max((e - energy[0]).abs()));
    assert!(late < 2.0 * early, "early {early:e}, late {late:e}");
}

#[test]
fn heavy_top_convergence_orders() {
    let top = heavy_top();
    let g0 = GroupElement::identity(Group::SO3);
    let mu0 = top.dell_dxi(&g0, &AlgebraElement::from_slice(Group::SO3, &[0.3, 1.2, -0.4]).unwrap());
    let h_list = [0.04, 0.02, 0.01, 0.005];
    for (method, lo, hi) in [("sv", 1.8, 2.2), ("rkmk:rk4", 3.8, 4.2), ("ve_backward", 0.8, 2.2)] {
        let it = Integrator::parse(method, RetractionKind::Exp, NumericsConfig::default()).unwrap();
        let slope = convergence_order(&it, &top, &h_list, 1.0, &g0, &mu0).unwrap().slope;
        assert!(slope > lo && slope < hi, "{method}: {slope}");
    }
}

#[test]
fn free_vehicle_satisfies_lie_poisson_on_se3() {
    let vehicle = free_vehicle();
    assert!(vehicle.is_left_invariant());
    let start = sampling::state(&mut StdRng::seed_from_u64(11), &vehicle);
    let h = 0.02;
    for method in ["ve_forward", "ve_backward", "sv"] {
        for kind in [RetractionKind::Exp, RetractionKind::Cayley] {
            let it = Integrator::parse(method, kind, NumericsConfig::default()).unwrap();
            let mut s = start.clone();
            for _ in 0..500 {
                let next = it.step(&vehicle, h, &s).unwrap().0;
                let r = dlp_residual(&it.retraction, h, &s, &next).unwrap();
                assert!(r < 1e-10, "{method}/{kind}: {r:e}");
                s = next;
            }
            assert!(s.g.residual() < 1e-10);
        }
    }
}

#[test]
fn vehicle_step_is_symplectic() {
    let vehicle = UnderwaterVehicle::default();
    let s = sampling::state(&mut StdRng::seed_from_u64(4), &vehicle);
    let sv = Integrator::parse("sv", RetractionKind::Cayley, NumericsConfig::default()).unwrap();
    let rk4 = Integrator::parse("rk4", RetractionKind::Exp, NumericsConfig::default()).unwrap();
    let d_sv = symplecticity_defect(&sv, &vehicle, 0.05, &s).unwrap();
    let d_rk4 = symplecticity_defect(&rk4, &vehicle, 0.05, &s).unwrap();
    assert!(d_sv < 1e-8, "{d_sv:e}");
    assert!(d_rk4 > 10.0 * d_sv, "sv {d_sv:e}, rk4 {d_rk4:e}");
}

#[test]
fn ep_matches_ve_on_left_invariant_models() {
    let vehicle = free_vehicle();
    let start = sampling::state(&mut StdRng::seed_from_u64(2), &vehicle);
    let ep = Integrator::parse("ep:cayley", RetractionKind::Exp, NumericsConfig::default()).unwrap();
    let ve = Integrator::parse("ve_backward", RetractionKind::Cayley, NumericsConfig::default()).unwrap();
    let a = integrate(&ep, &vehicle, 0.05, 100, start.clone()).unwrap();
    let b = integrate(&ve, &vehicle, 0.05, 100, start).unwrap();
    let (a, b) = (&a.last().unwrap().0, &b.last().unwrap().0);
    assert!((a.g.matrix() - b.g.matrix()).amax() < 1e-9);
    assert!((a.mu.coords() - b.mu.coords()).amax() < 1e-9);
}
