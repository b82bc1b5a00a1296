mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DVector;
use wavedim::model::NonlinearModel;
use wavedim::semiflow::{
    alpha_for_epsilon, energy, energy_rate_residuals, integrate, rescale, sample_invariant_set,
    IntegratorConfig, RescaleDirection,
};
use wavedim::{Error, State};

#[test]
fn damped_mode_matches_closed_form() {
    let op = interval_op(64, PI);
    let model = NonlinearModel::zero();
    let alpha = 1.0;
    let phi = op.grid().sample(|x| x[0].sin());
    // the sine is an exact eigenvector of the discrete operator
    let lambda = op.a_form(&phi, &phi) / op.l2_inner(&phi, &phi);
    let u0 = State::new(phi.clone(), DVector::zeros(64)).unwrap();
    let traj = integrate(&u0, &op, &model, &IntegratorConfig::new(1e-3, 5.0, alpha)).unwrap();
    let w = (lambda - alpha * alpha / 4.0).sqrt();
    let mut worst = 0.0_f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let amp = (-alpha * t / 2.0).exp() * ((w * t).cos() + alpha / (2.0 * w) * (w * t).sin());
        worst = worst.max((&s.u - &phi * amp).amax());
    }
    assert!(worst <= 1e-4, "max modal error {worst:e}");
}

#[test]
fn zero_state_is_an_equilibrium() {
    let (op, model) = cubic_fixture(32);
    let traj = integrate(
        &State::zeros(32),
        &op,
        &model,
        &IntegratorConfig::new(1e-2, 3.0, 1.0),
    )
    .unwrap();
    assert!(traj.states.iter().all(|s| s.max_abs() == 0.0));
    assert_eq!(energy(&State::zeros(32), &op, &model), 0.0);
}

#[test]
fn second_order_self_convergence() {
    let (op, model) = cubic_fixture(48);
    let mut rng = rng(11);
    let u0 = State::new(
        random_smooth(&op, &mut rng, 5),
        random_smooth(&op, &mut rng, 5),
    )
    .unwrap();
    let run = |dt: f64| {
        integrate(&u0, &op, &model, &IntegratorConfig::new(dt, 1.0, 1.0))
            .unwrap()
            .last()
            .clone()
    };
    let (a, b, c) = (run(4e-3), run(2e-3), run(1e-3));
    let e1 = op.energy_norm(&a.sub(&b));
    let e2 = op.energy_norm(&b.sub(&c));
    let order = (e1 / e2).log2();
    assert!(order >= 1.9, "observed order {order}");
}

#[test]
fn linear_energy_strictly_decreasing() {
    let op = interval_op(64, PI);
    let model = NonlinearModel::zero();
    let mut rng = rng(12);
    for _ in 0..5 {
        let u0 = random_state(64, &mut rng);
        let traj = integrate(&u0, &op, &model, &IntegratorConfig::new(1e-2, 5.0, 0.7)).unwrap();
        let e: Vec<f64> = traj.states.iter().map(|s| energy(s, &op, &model)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn energy_rate_matches_damping() {
    let (op, model) = cubic_fixture(64);
    let traj = integrate(
        &cubic_initial(&op),
        &op,
        &model,
        &IntegratorConfig::new(1e-3, 3.0, 1.0),
    )
    .unwrap();
    let worst = energy_rate_residuals(&traj, &op, &model)
        .into_iter()
        .fold(0.0_f64, f64::max);
    assert!(worst <= 1e-3, "worst relative residual {worst:e}");
}

#[test]
fn restart_matches_single_run() {
    let (op, model) = cubic_fixture(32);
    let u0 = cubic_initial(&op);
    let full = integrate(&u0, &op, &model, &IntegratorConfig::new(1e-2, 3.0, 1.0)).unwrap();
    let first = integrate(&u0, &op, &model, &IntegratorConfig::new(1e-2, 1.0, 1.0)).unwrap();
    let second = integrate(
        first.last(),
        &op,
        &model,
        &IntegratorConfig::new(1e-2, 2.0, 1.0),
    )
    .unwrap();
    assert!(full.last().sub(second.last()).max_abs() < 1e-12);
}

#[test]
fn blow_up_is_flagged() {
    let op = interval_op(16, PI);
    let model = NonlinearModel::cubic(0.0, -1.0, 4.0).unwrap();
    let u0 = State::new(DVector::from_element(16, 5.0), DVector::zeros(16)).unwrap();
    let traj = integrate(&u0, &op, &model, &IntegratorConfig::new(1e-3, 10.0, 1.0)).unwrap();
    assert!(traj.escaped);
    assert!(*traj.times.last().unwrap() < 10.0);
}

#[test]
fn non_coercive_operator_rejected() {
    let grid = wavedim::discretization::SpatialGrid::interval(0.0, PI, 16).unwrap();
    let beta = wavedim::discretization::PotentialField::constant(&grid, -2.0, 2.0).unwrap();
    let op = wavedim::discretization::EllipticOperator::assemble(&grid, &beta).unwrap();
    let err = integrate(
        &State::zeros(16),
        &op,
        &NonlinearModel::zero(),
        &IntegratorConfig::new(1e-2, 1.0, 1.0),
    )
    .unwrap_err();
    assert!(err.is_hypothesis_violation());
}

#[test]
fn rescale_properties() {
    let mut rng = rng(13);
    let s = random_state(20, &mut rng);
    assert_eq!(rescale(RescaleDirection::Forward, &s, 1.0).unwrap(), s);
    let f = rescale(RescaleDirection::Forward, &s, 0.3).unwrap();
    assert_eq!(f.u, s.u);
    let back = rescale(RescaleDirection::Inverse, &f, 0.3).unwrap();
    assert!(back.sub(&s).max_abs() < 1e-15);
    assert!(rescale(RescaleDirection::Forward, &s, 0.0).is_err());
    assert!(matches!(
        alpha_for_epsilon(1.5),
        Err(Error::InvalidInput(_))
    ));
    assert!((alpha_for_epsilon(0.04).unwrap() - 5.0).abs() < 1e-15);
}

#[test]
fn linear_attractor_is_origin() {
    let op = interval_op(32, PI);
    let model = NonlinearModel::zero();
    let mut rng = rng(14);
    let cfg = IntegratorConfig::new(1e-2, 1.0, 1.0);
    let s = sample_invariant_set(&random_state(32, &mut rng), &op, &model, &cfg, None, 20).unwrap();
    assert_eq!(s.states.len(), 20);
    assert!(s.sup.u_linf < 1e-8 && s.sup.u_h10 < 1e-8 && s.sup.v_l2 < 1e-8);
}

#[test]
fn cubic_sup_norms_stabilize() {
    let (op, model) = cubic_fixture(64);
    let cfg = IntegratorConfig::new(1e-2, 1.0, 1.0);
    let u0 = cubic_initial(&op);
    let a = sample_invariant_set(&u0, &op, &model, &cfg, Some(50.0), 100).unwrap();
    let b = sample_invariant_set(&u0, &op, &model, &cfg, Some(100.0), 100).unwrap();
    let c = sample_invariant_set(&u0, &op, &model, &cfg, Some(50.0), 200).unwrap();
    for (x, y) in [
        (a.sup.u_linf, b.sup.u_linf),
        (a.sup.u_h10, b.sup.u_h10),
        (a.sup.u_linf, c.sup.u_linf),
    ] {
        assert!((x - y).abs() < 0.01 * x);
    }
}
