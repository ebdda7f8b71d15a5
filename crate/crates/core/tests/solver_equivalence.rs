//! The characteristic stepper, the closed-form quadrature and the compressed
//! history evaluation must describe the same excited-state population.

use lambda1d_core::{
    excited_population, make_exponential_wavepacket, solve_analytic, PhysicalParams,
    SingleExcitationState, SpatialGrid, TwoPhotonState,
};
use num_complex::Complex64 as C64;

const T_MAX: f64 = 3.0;
const SAMPLES: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// Largest |stepper − quadrature| over the sample times, plus the compressed
/// values at the same times.
fn compare(delta: f64, dr: f64) -> (f64, Vec<(f64, f64)>) {
    let params = PhysicalParams::new(delta).unwrap();
    let grid = SpatialGrid::for_packet(&params, dr, T_MAX + dr).unwrap();
    let packet = make_exponential_wavepacket(&params, &grid).unwrap();
    let mut state = SingleExcitationState::new(&params, &packet).unwrap();
    let mut worst: f64 = 0.0;
    let mut pairs = Vec::new();
    for t in SAMPLES {
        state.advance_to(t).unwrap();
        let stepped = excited_population(&state);
        let exact = excited_population(&solve_analytic(&params, &packet, t).unwrap());
        worst = worst.max((stepped - exact).abs());
        pairs.push((t, exact));
    }
    (worst, pairs)
}

#[test]
fn stepper_matches_quadrature() {
    for delta in [0.5, 1.0, 2.0, 5.0] {
        let (worst, _) = compare(delta, 1e-3);
        assert!(worst < 1e-3, "Δ = {delta}: max |Δρ_ee| = {worst:.3e}");
    }
}

#[test]
fn stepper_converges_at_least_linearly() {
    for delta in [0.5, 2.0] {
        let (coarse, _) = compare(delta, 4e-3);
        let (fine, _) = compare(delta, 2e-3);
        assert!(
            fine < coarse,
            "Δ = {delta}: refinement made it worse ({coarse:.3e} → {fine:.3e})"
        );
        assert!(
            coarse / fine > 1.8,
            "Δ = {delta}: ratio {:.3} below first order",
            coarse / fine
        );
    }
}

#[test]
fn compressed_population_matches_quadrature() {
    for delta in [0.5, 1.0, 2.0, 5.0] {
        let dr = 1e-3;
        let params = PhysicalParams::new(delta).unwrap();
        let grid = SpatialGrid::for_packet(&params, dr, dr).unwrap();
        let packet = make_exponential_wavepacket(&params, &grid).unwrap();
        let tp = TwoPhotonState::from_packet(
            &params,
            &packet,
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            T_MAX,
        )
        .unwrap();
        let (_, exact) = compare(delta, dr);
        for (t, rho) in exact {
            let compressed = tp.snapshot(t).unwrap().rho_ee;
            assert!(
                (compressed - rho).abs() < 1e-3,
                "Δ = {delta}, t = {t}: {compressed} vs {rho}"
            );
        }
    }
}
