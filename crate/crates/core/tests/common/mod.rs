#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavedim::discretization::{EllipticOperator, PotentialField, SpatialGrid};
use wavedim::model::NonlinearModel;
use wavedim::State;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `-Δ` on `(0, len)` with `n` interior points.
pub fn interval_op(n: usize, len: f64) -> EllipticOperator {
    let grid = SpatialGrid::interval(0.0, len, n).unwrap();
    EllipticOperator::assemble(&grid, &PotentialField::zero(&grid)).unwrap()
}

/// The 1D cubic fixture: `u_tt + α u_t - u_xx = u - u³` on `(0, 2π)`.
pub fn cubic_fixture(n: usize) -> (EllipticOperator, NonlinearModel) {
    (
        interval_op(n, 2.0 * PI),
        NonlinearModel::cubic(1.0, 1.0, 4.0).unwrap(),
    )
}

pub fn cubic_initial(op: &EllipticOperator) -> State {
    let grid = op.grid();
    State::new(
        grid.sample(|x| {
            0.8 * (0.5 * x[0]).sin() + 0.3 * (1.5 * x[0]).sin() - 0.2 * (2.5 * x[0]).sin()
        }),
        grid.sample(|x| 0.4 * x[0].sin() - 0.1 * (3.0 * x[0]).sin()),
    )
    .unwrap()
}

/// Random smooth field: a random combination of the first `modes` sine modes.
pub fn random_smooth(op: &EllipticOperator, rng: &mut ChaCha8Rng, modes: usize) -> DVector<f64> {
    let grid = op.grid();
    let len = grid.upper()[0] - grid.lower()[0];
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..1.0)).collect();
    grid.sample(|x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 * PI * (x[0] - grid.lower()[0]) / len).sin())
            .sum()
    })
}

pub fn random_field(len: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(lo..hi))
}

pub fn random_state(len: usize, rng: &mut ChaCha8Rng) -> State {
    State::new(
        random_field(len, rng, -1.0, 1.0),
        random_field(len, rng, -1.0, 1.0),
    )
    .unwrap()
}

/// Prints one acceptance line and fails the test when `ok` is false.
pub fn report(criterion: u32, name: &str, ok: bool, detail: String) {
    println!(
        "[{}] criterion {criterion}: {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} ({name}) failed: {detail}");
}
