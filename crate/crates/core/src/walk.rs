//! The walk step `U(t) = S · C(t)` and time-ordered evolution.
//!
//! One step first applies the site-local coin, then shifts the up
//! component one site to the right and the down component one site to the
//! left. Amplitude that would leave the lattice is dropped, but the engine
//! refuses to continue once the probability inside the outermost
//! [`EDGE_BAND`] sites on either side exceeds [`EDGE_TOLERANCE`].

use num_complex::Complex64;

use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::spinor::SpinorField;

pub const EDGE_BAND: usize = 2;
pub const EDGE_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Supplies the coin field for each step.
pub trait CoinSource {
    fn lattice(&self) -> &Lattice;

    /// Brings `coins` (one matrix per site) up to date for step `t`, `t >= 1`.
    /// Steps are requested in increasing order.
    fn coins_for_step(&mut self, t: usize, coins: &mut [CoinMatrix]) -> Result<()>;
}

/// The same coin on every site at every step.
#[derive(Debug, Clone)]
pub struct Homogeneous {
    lattice: Lattice,
    coin: CoinMatrix,
    filled: bool,
}

impl Homogeneous {
    pub fn new(lattice: Lattice, coin: CoinMatrix) -> Self {
        Homogeneous {
            lattice,
            coin,
            filled: false,
        }
    }

    pub fn hadamard(lattice: Lattice) -> Self {
        Homogeneous::new(lattice, CoinMatrix::hadamard())
    }
}

impl CoinSource for Homogeneous {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn coins_for_step(&mut self, _t: usize, coins: &mut [CoinMatrix]) -> Result<()> {
        if !self.filled {
            coins.fill(self.coin);
            self.filled = true;
        }
        Ok(())
    }
}

/// Applies one step with an explicit per-site coin field.
pub fn step(state: &SpinorField, coins: &[CoinMatrix]) -> Result<SpinorField> {
    if coins.len() != state.lattice().size() {
        return Err(Error::Shape(format!(
            "coin field has {} sites, state has {}",
            coins.len(),
            state.lattice().size()
        )));
    }
    let mut out = SpinorField::zeros(*state.lattice());
    let lost = step_into(state, coins, &mut out);
    if lost > EDGE_TOLERANCE {
        return Err(Error::EdgeOverflow {
            step: 1,
            probability: lost,
        });
    }
    Ok(out)
}

/// Coin then shift from `src` into `dst`. Returns the probability pushed off the lattice.
pub(crate) fn step_into(src: &SpinorField, coins: &[CoinMatrix], dst: &mut SpinorField) -> f64 {
    let n = coins.len();
    let (su, sd) = (src.up(), src.down());
    let (du, dd) = dst.components_mut();
    debug_assert!(su.len() == n && du.len() == n);

    let mut lost = 0.0;
    du[0] = ZERO;
    dd[n - 1] = ZERO;
    {
        let (a, b) = coins[0].apply(su[0], sd[0]);
        du[1] = a;
        lost += b.norm_sqr();
    }
    for i in 1..n - 1 {
        let (a, b) = coins[i].apply(su[i], sd[i]);
        du[i + 1] = a;
        dd[i - 1] = b;
    }
    {
        let (a, b) = coins[n - 1].apply(su[n - 1], sd[n - 1]);
        dd[n - 2] = b;
        lost += a.norm_sqr();
    }
    lost
}

/// Probability within [`EDGE_BAND`] sites of either end.
pub fn edge_probability(state: &SpinorField) -> f64 {
    let n = state.lattice().size();
    let band = EDGE_BAND.min(n / 2);
    let (u, d) = (state.up(), state.down());
    (0..band)
        .chain(n - band..n)
        .map(|i| u[i].norm_sqr() + d[i].norm_sqr())
        .sum()
}

/// Stepwise evolution of one state under a [`CoinSource`].
pub struct Walker<S> {
    state: SpinorField,
    scratch: SpinorField,
    coins: Vec<CoinMatrix>,
    source: S,
    t: usize,
}

impl<S: CoinSource> Walker<S> {
    pub fn new(state0: SpinorField, source: S) -> Result<Self> {
        if state0.lattice() != source.lattice() {
            return Err(Error::Shape(format!(
                "state lattice {:?} differs from coin lattice {:?}",
                state0.lattice(),
                source.lattice()
            )));
        }
        let n = state0.lattice().size();
        Ok(Walker {
            scratch: SpinorField::zeros(*state0.lattice()),
            state: state0,
            coins: vec![CoinMatrix::hadamard(); n],
            source,
            t: 0,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn state(&self) -> &SpinorField {
        &self.state
    }

    pub fn into_state(self) -> SpinorField {
        self.state
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn advance(&mut self) -> Result<()> {
        let t = self.t + 1;
        self.source.coins_for_step(t, &mut self.coins)?;
        let lost = step_into(&self.state, &self.coins, &mut self.scratch);
        std::mem::swap(&mut self.state, &mut self.scratch);
        self.t = t;
        let edge = lost + edge_probability(&self.state);
        if edge > EDGE_TOLERANCE {
            return Err(Error::EdgeOverflow {
                step: t,
                probability: edge,
            });
        }
        Ok(())
    }

    pub fn run_until(&mut self, t: usize) -> Result<()> {
        while self.t < t {
            self.advance()?;
        }
        Ok(())
    }
}

/// What [`evolve`] keeps along the way. Times are inclusive of `t = 0`.
#[derive(Debug, Clone, Default)]
pub struct Sampling {
    /// Record `P(j, t)` whenever `t` is a multiple of this stride.
    pub probability_stride: Option<usize>,
    /// Keep full states for every `t` in this inclusive window.
    pub state_window: Option<(usize, usize)>,
}

impl Sampling {
    pub fn none() -> Self {
        Sampling::default()
    }

    pub fn probabilities(stride: usize) -> Self {
        Sampling {
            probability_stride: Some(stride.max(1)),
            state_window: None,
        }
    }

    pub fn states(from: usize, to: usize) -> Self {
        Sampling {
            probability_stride: None,
            state_window: Some((from, to)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub probabilities: Vec<(usize, Vec<f64>)>,
    pub states: Vec<(usize, SpinorField)>,
}

impl Trajectory {
    pub fn state_at(&self, t: usize) -> Option<&SpinorField> {
        self.states.iter().find(|(ts, _)| *ts == t).map(|(_, s)| s)
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: SpinorField,
    pub trajectory: Trajectory,
}

/// Applies `n_steps` steps drawing coins from `source`.
pub fn evolve<S: CoinSource>(
    state0: SpinorField,
    source: S,
    n_steps: usize,
    sampling: &Sampling,
) -> Result<Evolution> {
    let mut trajectory = Trajectory::default();
    let mut walker = Walker::new(state0, source)?;
    let record = |t: usize, s: &SpinorField, traj: &mut Trajectory| {
        if let Some(stride) = sampling.probability_stride {
            if t % stride == 0 {
                traj.probabilities.push((t, crate::analysis::probability_distribution(s)));
            }
        }
        if let Some((a, b)) = sampling.state_window {
            if (a..=b).contains(&t) {
                traj.states.push((t, s.clone()));
            }
        }
    };
    record(0, walker.state(), &mut trajectory);
    while walker.t() < n_steps {
        walker.advance()?;
        record(walker.t(), walker.state(), &mut trajectory);
    }
    Ok(Evolution {
        state: walker.into_state(),
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{make_coin, CoinParams};
    use crate::spinor::{gaussian_state, BlochSpin, GaussianSpec};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hadamard_step_from_spin_up() {
        let l = Lattice::symmetric(5).unwrap();
        let s0 = SpinorField::localized(l, 0, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let s1 = step(&s0, &vec![CoinMatrix::hadamard(); l.size()]).unwrap();
        assert!((s1.at(1).0 - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s1.at(-1).1 - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s1.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(s1.at(1).1, c(0.0, 0.0));
        assert_eq!(s1.at(-1).0, c(0.0, 0.0));
    }

    #[test]
    fn sigma_x_reflects() {
        let l = Lattice::symmetric(5).unwrap();
        let s0 = SpinorField::localized(l, 2, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let mut coins = vec![CoinMatrix::hadamard(); l.size()];
        coins[l.index(2).unwrap()] = CoinMatrix::sigma_x();
        let s1 = step(&s0, &coins).unwrap();
        assert_eq!(s1.at(1).1, c(1.0, 0.0));
        assert!((s1.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn edge_overflow_is_reported() {
        let l = Lattice::symmetric(3).unwrap();
        let s0 = SpinorField::localized(l, 3, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = step(&s0, &vec![CoinMatrix::hadamard(); l.size()]);
        assert!(matches!(r, Err(Error::EdgeOverflow { .. })));

        let s0 = SpinorField::localized(l, 0, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = evolve(s0, Homogeneous::hadamard(l), 10, &Sampling::none());
        assert!(matches!(r, Err(Error::EdgeOverflow { step: 2, .. })));
    }

    #[test]
    fn step_preserves_norm_of_random_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let l = Lattice::symmetric(40).unwrap();
        let mut s = SpinorField::zeros(l);
        {
            let (u, d) = s.components_mut();
            for i in 3..u.len() - 3 {
                u[i] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                d[i] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        s.normalize().unwrap();
        let coins: Vec<_> = (0..l.size())
            .map(|_| {
                make_coin(CoinParams {
                    q: rng.random_range(0.0..=1.0),
                    theta: rng.random_range(-PI..=PI),
                    phi: rng.random_range(-PI..=PI),
                })
                .unwrap()
            })
            .collect();
        let s1 = step(&s, &coins).unwrap();
        assert!((s1.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_steps_is_identity() {
        let l = Lattice::symmetric(80).unwrap();
        let g = gaussian_state(GaussianSpec::new(10.0, 0).unwrap(), BlochSpin::PLUS_I, &l).unwrap();
        let e = evolve(g.clone(), Homogeneous::hadamard(l), 0, &Sampling::probabilities(1)).unwrap();
        assert_eq!(e.state, g);
        assert_eq!(e.trajectory.probabilities.len(), 1);
    }

    #[test]
    fn parity_alternates() {
        let l = Lattice::symmetric(30).unwrap();
        let s0 = SpinorField::localized(l, 0, BlochSpin::new(0.4, 1.3).unwrap().amplitudes()).unwrap();
        let e = evolve(s0, Homogeneous::hadamard(l), 20, &Sampling::states(0, 20)).unwrap();
        for (t, s) in &e.trajectory.states {
            for j in l.sites() {
                let (u, d) = s.at(j);
                if (j + *t as i64).rem_euclid(2) == 1 {
                    assert_eq!(u.norm_sqr() + d.norm_sqr(), 0.0, "t={t} j={j}");
                }
            }
        }
    }
}
