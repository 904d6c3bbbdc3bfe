//! Cross-checks of the simulation against hand-expanded amplitudes and the
//! second (pulse-by-pulse) route.

use gravchan_core::channel::{make_channel, ChannelSpec};
use gravchan_core::interferometer::{
    apply_composite, ground_probability, run_pulse_sequence, InterferometerParams, LaserPhases,
};
use gravchan_core::protocol::{direct_measurement, fringe_scan, run_transfer};
use gravchan_core::{BasisVector, Complex64, MomentumIndex, PureState, SpinLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use SpinLabel::{E, G};

fn ket(spins: &[SpinLabel], n: i32) -> BasisVector {
    BasisVector::new(spins.to_vec(), MomentumIndex(n))
}

fn bell() -> PureState {
    make_channel(&ChannelSpec::Bell).unwrap().as_pure().unwrap().clone()
}

fn params(phases: LaserPhases) -> InterferometerParams {
    InterferometerParams { phases, ..InterferometerParams::default() }
}

/// Post-interferometer Bell state at zero laser phases, expanded by hand:
/// (b1|gg,−1⟩ + b2|ge,0⟩ + a1|eg,0⟩ + a2|ee,+1⟩)/√2 with
/// a1 = −(1+e^{−iΔ})/2, a2 = i(1−e^{−iΔ})/2, b1 = i(1−e^{iΔ})/2, b2 = −(1+e^{iΔ})/2.
fn hand_expanded_bell(delta: f64) -> Vec<(BasisVector, Complex64)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (c, s) = (delta.cos(), delta.sin());
    // e^{−iΔ} = c − i s, e^{iΔ} = c + i s
    let a1 = Complex64::new(-(1.0 + c) / 2.0, s / 2.0);
    let a2 = Complex64::new(-s / 2.0, (1.0 - c) / 2.0);
    let b1 = Complex64::new(s / 2.0, (1.0 - c) / 2.0);
    let b2 = Complex64::new(-(1.0 + c) / 2.0, -s / 2.0);
    vec![
        (ket(&[G, G], -1), b1 * h),
        (ket(&[G, E], 0), b2 * h),
        (ket(&[E, G], 0), a1 * h),
        (ket(&[E, E], 1), a2 * h),
    ]
}

#[test]
fn bell_state_after_interferometer_matches_hand_expansion() {
    let p = params(LaserPhases::default());
    for j in 0..50 {
        let delta = -7.0 + 0.29 * j as f64;
        let out = apply_composite(&bell(), &p, Some(delta)).unwrap();
        let expected = hand_expanded_bell(delta);
        let mut mass = 0.0;
        for (k, amp) in &expected {
            assert!((out.amplitude(k) - amp).norm() < 1e-14, "{k} at Δφ={delta}");
            mass += amp.norm_sqr();
        }
        assert!((out.norm_sqr() - mass).abs() < 1e-14);

        let proj = out.project(|k| k.momentum() == MomentumIndex(0));
        assert!((proj.probability - (1.0 + delta.cos()) / 2.0).abs() < 1e-14);

        let via_pulses = run_pulse_sequence(&bell(), &p, Some(delta)).unwrap();
        for (k, amp) in &expected {
            assert!((via_pulses.amplitude(k) - amp).norm() < 1e-14);
        }
    }
}

#[test]
fn pulse_route_matches_composite_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let inputs = [
        PureState::basis(ket(&[G], 0)),
        PureState::basis(ket(&[E], 0)),
        bell(),
        make_channel(&ChannelSpec::Cat { atoms: 4 }).unwrap().as_pure().unwrap().clone(),
    ];
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let phases = LaserPhases::new(
            rng.random_range(-TAU..TAU),
            rng.random_range(-TAU..TAU),
            rng.random_range(-TAU..TAU),
        );
        let delta = rng.random_range(-20.0..20.0);
        let p = params(phases);
        for s in &inputs {
            let a = run_pulse_sequence(s, &p, Some(delta)).unwrap();
            let b = apply_composite(s, &p, Some(delta)).unwrap();
            worst = worst.max(a.distance_up_to_global_phase(&b).unwrap());
        }
    }
    assert!(worst < 1e-12, "max deviation {worst}");
}

#[test]
fn support_stays_on_three_momentum_classes() {
    let p = params(LaserPhases::new(0.4, 1.1, -0.3));
    let out = run_pulse_sequence(&bell(), &p, Some(1.234)).unwrap();
    for (k, _) in out.iter() {
        let n = k.momentum().0;
        assert!((-1..=1).contains(&n));
        match n {
            -1 => assert_eq!(k.spins(), &[G, G]),
            1 => assert_eq!(k.spins(), &[E, E]),
            _ => assert_ne!(k.spin(0), k.spin(1)),
        }
    }
}

#[test]
fn simulated_fringe_equals_closed_form() {
    let p = params(LaserPhases::default());
    let g0 = PureState::basis(ket(&[G], 0));
    for j in 0..256 {
        let d = TAU * j as f64 / 256.0;
        let out = run_pulse_sequence(&g0, &p, Some(d)).unwrap();
        let pg = out.probability(|k| k.spin(0) == G);
        assert!((pg - ground_probability(d)).abs() < 1e-12);
        assert!((direct_measurement(&p, Some(d)).unwrap() - pg).abs() < 1e-15);
    }
}

#[test]
fn direct_measurement_tracks_pulse_sequence_population() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = params(LaserPhases::default());
    for _ in 0..100 {
        let d = rng.random_range(-10.0..10.0);
        let pop = run_pulse_sequence(&PureState::basis(ket(&[G], 0)), &p, Some(d))
            .unwrap()
            .probability(|k| k.spin(0) == G);
        assert!((direct_measurement(&p, Some(d)).unwrap() - pop).abs() < 1e-15);
    }
}

#[test]
fn default_params_use_gravity_phase() {
    let p = InterferometerParams::default();
    let out = run_transfer(&ChannelSpec::Bell, &p, 0, None).unwrap();
    assert_eq!(out.delta_phi_used, p.delta_phi());
    assert!((out.p_joint_g - out.p_closed_form).abs() < 1e-12);
}

/// Full state-vector readout of each remote atom of a cat channel, compared
/// with ½·(1 + cos Δφ)/2 evaluated by hand.
#[test]
fn cat_channel_any_remote_atom() {
    let p = params(LaserPhases::new(0.2, -0.5, 0.9));
    let grid = [0.0, FRAC_PI_2, PI];
    let expected = [0.5, 0.25, 0.0];
    for atoms in [3usize, 4] {
        let spec = ChannelSpec::Cat { atoms };
        let scans: Vec<_> = (0..atoms - 1).map(|r| fringe_scan(&spec, &p, r, &grid).unwrap()).collect();
        for scan in &scans {
            for (pt, want) in scan.iter().zip(expected) {
                assert!((pt.outcome.p_joint_g - want).abs() < 1e-12);
            }
        }
        for scan in &scans[1..] {
            for (a, b) in scan.iter().zip(&scans[0]) {
                assert!((a.outcome.p_joint_g - b.outcome.p_joint_g).abs() < 1e-12);
                assert!((a.outcome.p_joint_e - b.outcome.p_joint_e).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn channel_fringe_is_half_the_direct_fringe() {
    let p = params(LaserPhases::default());
    let grid: Vec<f64> = (0..64).map(|j| TAU * j as f64 / 64.0).collect();
    let scan = fringe_scan(&ChannelSpec::Bell, &p, 0, &grid).unwrap();
    let mix = fringe_scan(&ChannelSpec::ClassicalMixture, &p, 0, &grid).unwrap();
    let mut best = (f64::MIN, 0.0);
    let mut best_direct = (f64::MIN, 0.0);
    for ((pt, m), &d) in scan.iter().zip(&mix).zip(&grid) {
        let direct = direct_measurement(&p, Some(d)).unwrap();
        assert!((pt.outcome.p_joint_g - direct / 2.0).abs() < 1e-12);
        assert!((m.outcome.p_joint_g - pt.outcome.p_joint_g).abs() < 1e-12);
        if pt.outcome.p_joint_g > best.0 {
            best = (pt.outcome.p_joint_g, d);
        }
        if direct > best_direct.0 {
            best_direct = (direct, d);
        }
    }
    assert_eq!(best.1, best_direct.1);
}

#[test]
fn prepared_channel_equals_constructed_channel() {
    let prepared = gravchan_core::prepare_bell().unwrap();
    assert!((prepared.fidelity(&bell()).unwrap() - 1.0).abs() < 1e-12);
}
