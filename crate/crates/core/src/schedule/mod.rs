//! Time-dependent coin field built from gate events.
//!
//! Every site carries the Hadamard coin unless its most recent event at or
//! before step `t` is a `Close`, in which case it carries σ_x. An event at
//! time `T` takes effect for steps `t >= T`; events at `T = 0` apply from
//! the first step on.

mod plan;

pub use plan::{
    multistation_plan, single_shot_plan, CompiledProtocol, CorralPlan, InitialSpin, Segment,
    Station, TimingPolicy,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{fidelity, phase_flip_correction};
use crate::coin::{CoinMatrix, CoinParams};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::spinor::SpinorField;
use crate::walk::{CoinSource, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateAction {
    /// Hadamard → σ_x.
    Close,
    /// σ_x → Hadamard.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateEvent {
    pub time: usize,
    pub site: i64,
    pub action: GateAction,
}

impl GateEvent {
    pub fn close(time: usize, site: i64) -> Self {
        GateEvent {
            time,
            site,
            action: GateAction::Close,
        }
    }

    pub fn open(time: usize, site: i64) -> Self {
        GateEvent {
            time,
            site,
            action: GateAction::Open,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    lattice: Lattice,
    events: Vec<GateEvent>,
    horizon: usize,
}

impl Schedule {
    /// Validates and time-orders `events`.
    ///
    /// Closing an already closed site is a no-op. Opening a site that has
    /// never been closed, or issuing both actions for one site at one time,
    /// is a plan error.
    pub fn new(lattice: Lattice, mut events: Vec<GateEvent>, horizon: usize) -> Result<Self> {
        events.sort_by_key(|e| e.time);
        let mut ever_closed = BTreeSet::new();
        for (i, e) in events.iter().enumerate() {
            if !lattice.contains(e.site) {
                return Err(Error::Plan(format!(
                    "gate at site {} lies outside lattice [{}, {}]",
                    e.site,
                    lattice.j_min(),
                    lattice.j_max()
                )));
            }
            let conflict = events[..i]
                .iter()
                .rev()
                .take_while(|p| p.time == e.time)
                .any(|p| p.site == e.site && p.action != e.action);
            if conflict {
                return Err(Error::Plan(format!(
                    "site {} is both opened and closed at t = {}",
                    e.site, e.time
                )));
            }
            match e.action {
                GateAction::Close => {
                    ever_closed.insert(e.site);
                }
                GateAction::Open if !ever_closed.contains(&e.site) => {
                    return Err(Error::Plan(format!(
                        "site {} is opened at t = {} but was never closed",
                        e.site, e.time
                    )));
                }
                GateAction::Open => {}
            }
        }
        Ok(Schedule {
            lattice,
            events,
            horizon,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn events(&self) -> &[GateEvent] {
        &self.events
    }

    /// Last step the schedule covers.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    /// Same events on a different lattice.
    pub fn with_lattice(&self, lattice: Lattice) -> Result<Self> {
        Schedule::new(lattice, self.events.clone(), self.horizon)
    }

    pub fn default_coin(&self) -> CoinParams {
        CoinParams::HADAMARD
    }

    /// Sites carrying σ_x during step `t`.
    pub fn closed_sites(&self, t: usize) -> BTreeSet<i64> {
        let mut closed = BTreeSet::new();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            match e.action {
                GateAction::Close => closed.insert(e.site),
                GateAction::Open => closed.remove(&e.site),
            };
        }
        closed
    }

    pub fn coin_field(&self, j: i64, t: usize) -> CoinParams {
        if self.closed_sites(t).contains(&j) {
            CoinParams::SIGMA_X
        } else {
            CoinParams::HADAMARD
        }
    }

    /// Distinct event times, ascending.
    pub fn switch_times(&self) -> Vec<usize> {
        let mut times: Vec<usize> = self.events.iter().map(|e| e.time).collect();
        times.dedup();
        times
    }

    /// Moves every group of simultaneous events at `t > 0` to `shift(t, t_prev)`,
    /// where `t_prev` is the previous switch time.
    pub fn retimed(&self, mut shift: impl FnMut(usize, usize) -> usize) -> Result<Self> {
        let times = self.switch_times();
        let mut mapped = std::collections::BTreeMap::new();
        let mut prev = 0;
        for &t in &times {
            mapped.insert(t, if t == 0 { 0 } else { shift(t, prev) });
            prev = t;
        }
        let events = self
            .events
            .iter()
            .map(|e| GateEvent {
                time: mapped[&e.time],
                ..*e
            })
            .collect();
        Schedule::new(self.lattice, events, self.horizon)
    }

    pub fn cursor(&self) -> ScheduleCursor<'_> {
        ScheduleCursor {
            schedule: self,
            next: 0,
            closed: vec![false; self.lattice.size()],
            started: false,
        }
    }
}

/// Replays a [`Schedule`] step by step; implements [`CoinSource`].
#[derive(Debug, Clone)]
pub struct ScheduleCursor<'a> {
    schedule: &'a Schedule,
    next: usize,
    closed: Vec<bool>,
    started: bool,
}

impl ScheduleCursor<'_> {
    /// Applies events up to step `t`; returns the indices of sites that changed.
    pub(crate) fn advance_to(&mut self, t: usize) -> Result<Vec<usize>> {
        if t > self.schedule.horizon {
            return Err(Error::Plan(format!(
                "step {t} is past the schedule horizon {}",
                self.schedule.horizon
            )));
        }
        let mut changed = Vec::new();
        while let Some(e) = self.schedule.events.get(self.next) {
            if e.time > t {
                break;
            }
            let i = self.schedule.lattice.index(e.site).expect("validated");
            let closed = e.action == GateAction::Close;
            if self.closed[i] != closed {
                self.closed[i] = closed;
                changed.push(i);
            }
            self.next += 1;
        }
        Ok(changed)
    }

    /// Nominal σ_x mask for the current step.
    pub(crate) fn closed_mask(&self) -> &[bool] {
        &self.closed
    }

    pub(crate) fn lattice(&self) -> &Lattice {
        &self.schedule.lattice
    }
}

impl CoinSource for ScheduleCursor<'_> {
    fn lattice(&self) -> &Lattice {
        &self.schedule.lattice
    }

    fn coins_for_step(&mut self, t: usize, coins: &mut [CoinMatrix]) -> Result<()> {
        let changed = self.advance_to(t)?;
        let coin_of = |closed: bool| {
            if closed {
                CoinMatrix::sigma_x()
            } else {
                CoinMatrix::hadamard()
            }
        };
        if !self.started {
            for (c, &closed) in coins.iter_mut().zip(&self.closed) {
                *c = coin_of(closed);
            }
            self.started = true;
        } else {
            for i in changed {
                coins[i] = coin_of(self.closed[i]);
            }
        }
        Ok(())
    }
}

/// σ_x walls at `l` and `r` for all time, Hadamard elsewhere.
pub fn corral_schedule(l: i64, r: i64, lattice: Lattice, horizon: usize) -> Result<Schedule> {
    if l >= r {
        return Err(Error::Plan(format!("left wall {l} must lie left of right wall {r}")));
    }
    Schedule::new(
        lattice,
        vec![GateEvent::close(0, l), GateEvent::close(0, r)],
        horizon,
    )
}

/// Kinematic revival time of a packet centered in the corral `[l, r]`.
///
/// Both halves travel at group speed `1/√2`, each covers `2(r - l)` sites
/// before they overlap again at the center with matching phase. Returns the
/// nearest even integer.
pub fn estimate_revival_time(l: i64, r: i64, center: i64) -> usize {
    let path = 2.0 * ((r - center) + (center - l)) as f64;
    nearest_even(path * std::f64::consts::SQRT_2)
}

pub(crate) fn nearest_even(x: f64) -> usize {
    (2.0 * (x / 2.0).round()).max(0.0) as usize
}

/// Which times [`refine_measurement_time`] may propose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementParity {
    /// Only even times.
    #[default]
    EvenOnly,
    /// Odd times too, after undoing the relative π phase between the
    /// left- and right-moving halves.
    WithPhaseFlip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub t_m: usize,
    pub fidelity: f64,
    /// Fidelity at every scanned time.
    pub curve: Vec<(usize, f64)>,
}

/// Picks the time in `[t_est - window, t_est + window]` with the largest
/// fidelity against `reference` displaced by `x`.
pub fn refine_measurement_time(
    trajectory: &Trajectory,
    reference: &SpinorField,
    x: i64,
    t_est: usize,
    window: usize,
    parity: MeasurementParity,
) -> Result<Refinement> {
    let lo = t_est.saturating_sub(window);
    let hi = t_est + window;
    let mut curve = Vec::new();
    for (t, state) in &trajectory.states {
        if !(lo..=hi).contains(t) {
            continue;
        }
        let f = if t % 2 == 0 {
            fidelity(reference, state, x)?
        } else if parity == MeasurementParity::WithPhaseFlip {
            fidelity(reference, &phase_flip_correction(state), x)?
        } else {
            continue;
        };
        curve.push((*t, f));
    }
    curve.sort_by_key(|(t, _)| *t);
    let &(t_m, best) = curve
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .ok_or_else(|| {
            Error::Parameter(format!("no recorded candidate times in [{lo}, {hi}]"))
        })?;
    Ok(Refinement {
        t_m,
        fidelity: best,
        curve,
    })
}
