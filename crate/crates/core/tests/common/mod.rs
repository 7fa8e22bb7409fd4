//! Checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use corral::coin::make_coin;
use corral::disorder::{disorder_sweep, DisorderKind, DisorderVariant, SweepConfig};
use corral::experiments;
use corral::{
    corral_schedule, gaussian_state, probability_distribution, BlochSpin, CoinMatrix, CoinParams, CoinSource,
    GaussianSpec, Lattice, Result, SpinorField, Walker,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A fresh random coin on every site at every step.
pub struct RandomCoins {
    pub lattice: Lattice,
    pub rng: ChaCha8Rng,
}

impl CoinSource for RandomCoins {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn coins_for_step(&mut self, _t: usize, coins: &mut [CoinMatrix]) -> Result<()> {
        for c in coins.iter_mut() {
            *c = make_coin(random_params(&mut self.rng))?;
        }
        Ok(())
    }
}

pub fn random_params(rng: &mut ChaCha8Rng) -> CoinParams {
    CoinParams {
        q: rng.random_range(0.0..=1.0),
        theta: rng.random_range(-PI..=PI),
        phi: rng.random_range(-PI..=PI),
    }
}

/// Largest deviation of the norm from 1 over `steps` steps of random coins.
pub fn norm_drift(steps: usize, seed: u64) -> f64 {
    let lattice = Lattice::symmetric(steps as i64 + 100).unwrap();
    let psi0 = gaussian_state(GaussianSpec::new(5.0, 0).unwrap(), BlochSpin::new(0.6, 2.2).unwrap(), &lattice).unwrap();
    let source = RandomCoins {
        lattice,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let mut w = Walker::new(psi0, source).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        w.advance().unwrap();
        worst = worst.max((w.state().norm_sqr() - 1.0).abs());
    }
    worst
}

/// Largest unitarity error over `n` random coins.
pub fn worst_coin_error(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| make_coin(random_params(&mut rng)).unwrap().unitarity_error())
        .fold(0.0, f64::max)
}

fn mass_outside(p: &[f64], lattice: &Lattice, l: i64, r: i64) -> f64 {
    lattice
        .sites()
        .zip(p)
        .filter(|(j, _)| *j < l || *j > r)
        .map(|(_, v)| v)
        .sum()
}

/// Largest excess of the probability outside `[l, r]` over its allowance:
/// the mass outside at `t = 0` plus the mass on the two wall sites at
/// `t = 0` plus `1e-6`. Positive means the bound was violated.
pub fn confinement_excess(l: i64, r: i64, s: f64, spin: BlochSpin, steps: usize) -> f64 {
    let lattice = Lattice::auto(l, r, s, steps).unwrap();
    let schedule = corral_schedule(l, r, lattice, steps).unwrap();
    let psi0 = gaussian_state(GaussianSpec::new(s, (l + r) / 2).unwrap(), spin, &lattice).unwrap();
    let p0 = probability_distribution(&psi0);
    let walls = p0[lattice.index(l).unwrap()] + p0[lattice.index(r).unwrap()];
    let allowance = mass_outside(&p0, &lattice, l, r) + walls + 1e-6;
    let mut w = Walker::new(psi0, schedule.cursor()).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        w.advance().unwrap();
        let out = mass_outside(&probability_distribution(w.state()), &lattice, l, r);
        worst = worst.max(out - allowance);
    }
    worst
}

/// Runs a small seeded sweep twice and compares every fidelity bit for bit,
/// also against realizations rerun one at a time.
pub fn sweep_replays_exactly() -> bool {
    let protocol = experiments::compile(&experiments::corral_preset().with_lattice(Lattice::symmetric(700).unwrap()))
        .unwrap();
    let config = SweepConfig {
        p_values: vec![0.002],
        kinds: vec![DisorderKind::Fluctuating, DisorderKind::Dynamic],
        variants: vec![DisorderVariant::All],
        realizations: 6,
        master_seed: 77,
        tau: None,
    };
    let a = disorder_sweep(&protocol, &config).unwrap();
    let b = disorder_sweep(&protocol, &config).unwrap();
    let bits = |r: &corral::SweepReport| -> Vec<u64> {
        r.points.iter().flat_map(|p| p.fidelities.iter().map(|f| f.to_bits())).collect()
    };
    let single = corral::disorder::disordered_fidelity(
        &protocol.schedule,
        protocol.gaussian,
        corral::disorder::SWEEP_SPIN,
        corral::DisorderSpec::new(DisorderKind::Fluctuating, 0.002, a.tau, DisorderVariant::All, 77).unwrap(),
        4,
        protocol.t_m,
        protocol.x,
    )
    .unwrap()
    .0;
    bits(&a) == bits(&b) && single.to_bits() == a.points[0].fidelities[4].to_bits()
}

/// State with a Gaussian packet of width 10 on a wide lattice.
pub fn wide_packet(spin: BlochSpin) -> SpinorField {
    let lattice = Lattice::symmetric(600).unwrap();
    gaussian_state(GaussianSpec::new(10.0, 0).unwrap(), spin, &lattice).unwrap()
}
