//! Fixtures shared by the benchmarks.

use spinoc_core::basis::{enumerate_sector, parity_adapt, ChainParams, Parity, ParityBasis};
use spinoc_core::operators::{build_control, build_h01};
use spinoc_core::protocols::build_process_a;
use spinoc_core::{ControlField, ControlOperatorKind, OperatorMatrix, State};

pub struct Fixture {
    pub basis: ParityBasis,
    pub h01: OperatorMatrix,
    pub hc: OperatorMatrix,
    pub psi0: State,
    pub psi_f: State,
}

/// Process A in the even sector of an `l`-site chain with `k` excitations.
pub fn fixture(l: usize, k: usize, gamma: f64, control: ControlOperatorKind) -> Fixture {
    let params = ChainParams::new(l, 1.0, gamma, 0.5).expect("valid chain");
    let basis = parity_adapt(&enumerate_sector(l, k).expect("valid sector"), Parity::Even);
    let h01 = build_h01(&params, &basis).expect("H01");
    let hc = build_control(control, &params, &basis).expect("Hc");
    let (psi0, psi_f) = build_process_a(&basis).expect("process A");
    Fixture {
        basis,
        h01,
        hc,
        psi0,
        psi_f,
    }
}

/// Deterministic multi-tone test field.
pub fn test_field(dt: f64, steps: usize) -> ControlField {
    let samples = (0..steps)
        .map(|j| {
            let t = j as f64 * dt;
            0.3 * (1.7 * t).sin() + 0.1 * (5.3 * t).cos() + 0.05
        })
        .collect();
    ControlField::new(dt, samples).expect("positive step")
}
