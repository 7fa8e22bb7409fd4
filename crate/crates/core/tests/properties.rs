mod common;

use corral::analysis::{average_fidelity, BlochGrid};
use corral::experiments::{compile, corral_preset};
use corral::{
    corral_schedule, evolve, gaussian_state, BlochSpin, GaussianSpec, Lattice, Sampling, Walker,
};

#[test]
fn norm_survives_two_thousand_random_steps() {
    let drift = common::norm_drift(2000, 1);
    assert!(drift < 1e-10, "norm drift {drift:e}");
}

#[test]
fn random_coins_are_unitary() {
    let worst = common::worst_coin_error(1000, 5);
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn corral_walls_confine() {
    for (l, r) in [(-30, 30), (-101, 101)] {
        for spin in [BlochSpin::UP, BlochSpin::PLUS_I, BlochSpin::new(1.2, 4.0).unwrap()] {
            let excess = common::confinement_excess(l, r, 10.0, spin, 2000);
            assert!(excess <= 0.0, "walls {l}, {r}: bound exceeded by {excess:e}");
        }
    }
}

#[test]
fn seeded_sweeps_replay_bit_for_bit() {
    assert!(common::sweep_replays_exactly());
}

#[test]
fn transport_does_not_depend_on_the_spin() {
    let protocol = compile(&corral_preset()).unwrap();
    let r = average_fidelity(
        &protocol.schedule,
        protocol.gaussian,
        &BlochGrid::new(4).unwrap(),
        protocol.t_m,
        0,
    )
    .unwrap();
    assert!(r.spread() < 0.02, "{r:?}");
}

#[test]
fn schedule_replay_is_bit_identical() {
    let protocol = compile(&corral_preset()).unwrap();
    let psi0 = gaussian_state(protocol.gaussian, BlochSpin::new(0.3, 5.0).unwrap(), protocol.lattice()).unwrap();
    let a = evolve(psi0.clone(), protocol.schedule.cursor(), 300, &Sampling::none()).unwrap().state;
    let b = evolve(psi0, protocol.schedule.cursor(), 300, &Sampling::none()).unwrap().state;
    assert_eq!(a, b);
}

#[test]
fn one_step_moves_support_by_one_site() {
    let lattice = Lattice::symmetric(200).unwrap();
    let schedule = corral_schedule(-40, 40, lattice, 100).unwrap();
    let psi0 = gaussian_state(GaussianSpec::new(3.0, 0).unwrap(), BlochSpin::PLUS_I, &lattice).unwrap();
    let mut w = Walker::new(psi0, schedule.cursor()).unwrap();
    let support = |s: &corral::SpinorField| -> Vec<i64> {
        s.lattice()
            .sites()
            .filter(|&j| {
                let (u, d) = s.at(j);
                u.norm_sqr() + d.norm_sqr() > 0.0
            })
            .collect()
    };
    for _ in 0..60 {
        let before = support(w.state());
        w.advance().unwrap();
        for j in support(w.state()) {
            assert!(before.iter().any(|&b| (b - j).abs() <= 1), "site {j} appeared from nowhere");
        }
    }
}
