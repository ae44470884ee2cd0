mod common;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinoc_core::basis::{enumerate_sector, parity_adapt, ChainParams, Parity};
use spinoc_core::dynamics::{
    forward_trajectory, norm, propagate_backward, propagate_forward, ControlField,
    PropagationCache, State,
};
use spinoc_core::operators::{build_control, build_h01, ControlOperatorKind, OperatorMatrix};

fn smooth_field(dt: f64, total: f64) -> ControlField {
    let n = (total / dt).round() as usize;
    let s = (0..n)
        .map(|j| {
            let t = (j as f64 + 0.5) * dt;
            0.8 * (1.3 * t).sin() + 0.3 * (2.9 * t).cos()
        })
        .collect();
    ControlField::new(dt, s).unwrap()
}

fn exact_product(h01: &OperatorMatrix, hc: &OperatorMatrix, field: &ControlField, psi0: &State) -> State {
    let a = to_complex(h01.data());
    let b = to_complex(hc.data());
    let mut psi = psi0.clone();
    for &eps in field.samples() {
        psi = unitary(&(&a + &b * c(eps)), field.dt()) * psi;
    }
    psi
}

fn random_state(dim: usize, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = State::from_fn(dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let n = norm(&v);
    v / c(n)
}

fn setup(l: usize, k: usize, kind: ControlOperatorKind) -> (OperatorMatrix, OperatorMatrix) {
    let p = ChainParams::new(l, 1.0, 0.6, 0.5).unwrap();
    let sector = enumerate_sector(l, k).unwrap();
    (
        build_h01(&p, &sector).unwrap(),
        build_control(kind, &p, &sector).unwrap(),
    )
}

fn splitting_error(h01: &OperatorMatrix, hc: &OperatorMatrix, dt: f64) -> f64 {
    let field = smooth_field(dt, 2.0);
    let psi0 = random_state(h01.dim(), 3);
    let cache = PropagationCache::new(h01, hc, dt).unwrap();
    let ours = propagate_forward(&psi0, &field, &cache).unwrap();
    let oracle = exact_product(h01, hc, &field, &psi0);
    norm(&(ours - oracle))
}

#[test]
fn strang_splitting_is_second_order() {
    for kind in [ControlOperatorKind::LocalEdge, ControlOperatorKind::LongRange] {
        let (h01, hc) = setup(4, 2, kind);
        let coarse = splitting_error(&h01, &hc, 0.02);
        let fine = splitting_error(&h01, &hc, 0.01);
        let order = (coarse / fine).log2();
        assert!((1.8..=2.2).contains(&order), "{kind:?}: order {order}");
    }
}

#[test]
fn small_step_matches_exact_evolution() {
    for l in 2..=5 {
        for k in 1..l {
            let (h01, hc) = setup(l, k, ControlOperatorKind::LocalEdge);
            let dt = 1e-3;
            let mut rng = ChaCha8Rng::seed_from_u64(l as u64 * 10 + k as u64);
            let s = (0..1000).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let field = ControlField::new(dt, s).unwrap();
            let psi0 = random_state(h01.dim(), 11);
            let cache = PropagationCache::new(&h01, &hc, dt).unwrap();
            let ours = propagate_forward(&psi0, &field, &cache).unwrap();
            let oracle = exact_product(&h01, &hc, &field, &psi0);
            let overlap = oracle.dotc(&ours).norm_sqr();
            assert!(overlap > 1.0 - 1e-8, "L={l} K={k}: {overlap}");
        }
    }
}

#[test]
fn norm_drift_over_long_runs() {
    let p = ChainParams::new(9, 1.0, 0.5, 0.5).unwrap();
    let basis = parity_adapt(&enumerate_sector(9, 2).unwrap(), Parity::Even);
    let h01 = build_h01(&p, &basis).unwrap();
    for kind in [ControlOperatorKind::LocalEdge, ControlOperatorKind::LongRange] {
        let hc = build_control(kind, &p, &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = (0..100_000).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let field = ControlField::new(0.01, s).unwrap();
        let cache = PropagationCache::new(&h01, &hc, 0.01).unwrap();
        let psi = propagate_forward(&random_state(basis.dim(), 1), &field, &cache).unwrap();
        assert!((norm(&psi) - 1.0).abs() < 1e-9, "{kind:?}");
    }
}

#[test]
fn backward_run_inverts_forward_run() {
    let (h01, hc) = setup(6, 3, ControlOperatorKind::LongRange);
    let field = smooth_field(0.01, 3.0);
    let cache = PropagationCache::new(&h01, &hc, 0.01).unwrap();
    let psi0 = random_state(h01.dim(), 9);
    let end = propagate_forward(&psi0, &field, &cache).unwrap();
    let back = propagate_backward(&end, &field, &cache).unwrap();
    assert!(norm(&(back - &psi0)) < 1e-10);
    let traj = forward_trajectory(&psi0, &field, &cache).unwrap();
    assert_eq!(traj.states.len(), field.len() + 1);
    assert!(norm(&(traj.last() - end)) < 1e-12);
}
