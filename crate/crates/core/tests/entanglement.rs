//! From scattered packets to the entanglement of the emitted pair.

use lambda1d_core::analysis::{crossing_delta, Spacing, SweepMode};
use lambda1d_core::{
    build_epr_state, concurrence, make_exponential_wavepacket, monochromatic_transfer_check,
    noise_degradation, overlap, sweep_delta, NoiseParams, PhysicalParams, SpatialGrid,
    TwoPhotonPolarizationState,
};
use num_complex::Complex64 as C64;

#[test]
fn long_packet_pair_is_maximally_entangled() {
    let params = PhysicalParams::new(0.001).unwrap();
    let grid = SpatialGrid::for_packet(&params, 0.02, 0.02).unwrap();
    let long = make_exponential_wavepacket(&params, &grid).unwrap();
    let short = make_exponential_wavepacket(&params.with_delta(1.0), &grid).unwrap();
    let s = overlap(&short, &long).unwrap();

    let report = monochromatic_transfer_check(&params).unwrap();
    let phase = -report.transfer_overlap / report.transfer_overlap.norm();
    let state = build_epr_state(phase, s).unwrap();
    assert!(concurrence(&state).unwrap() >= 0.99);

    let ideal = build_epr_state(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
    assert!((concurrence(&ideal).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn werner_oracle() {
    let state = TwoPhotonPolarizationState::werner(0.5).unwrap();
    assert!((concurrence(&state).unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn quoted_noise_factors() {
    let factor =
        |beta, gamma_star| noise_degradation(&NoiseParams::new(beta, gamma_star).unwrap()).unwrap();
    assert!((factor(1.0, 0.1) - 0.90).abs() < 1e-9);
    assert!((factor(0.98, 0.1) - 0.882).abs() < 1e-9);
    assert!((factor(0.98, 0.1) * 5.0 / 6.0 - 0.735).abs() < 1e-9);
}

#[test]
fn sweeps_are_reproducible_and_ordered() {
    let template = PhysicalParams::default();
    let mode = SweepMode::Numeric { dr: None };
    let a = sweep_delta(&template, (0.01, 12.0), 6, mode, Spacing::Linear).unwrap();
    let b = sweep_delta(&template, (0.01, 12.0), 6, mode, Spacing::Linear).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert!(a
        .windows(2)
        .all(|w| w[0].delta_over_gamma < w[1].delta_over_gamma));
    assert!(a.iter().all(|r| r.numeric_gap.unwrap() < 5e-3));

    let root = crossing_delta(&template).unwrap();
    let rows = sweep_delta(
        &template,
        (root, root),
        1,
        SweepMode::ClosedForm,
        Spacing::Linear,
    )
    .unwrap();
    assert!((rows[0].p_aa - 0.5).abs() < 1e-9);
}
