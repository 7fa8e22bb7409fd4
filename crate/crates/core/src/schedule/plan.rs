//! Compiling station lists into gate timelines.
//!
//! A hop from station `k` to station `k + 1` starts when the packet is
//! whole again at the center of station `k`. The right wall opens and the
//! far wall of the next corral closes. The right-moving half reflects off
//! the far wall, the left-moving half off the old left wall, and for
//! corrals of equal width both meet at the center of the new corral after
//! `(r_{k+1} - l_k)·√2` steps. The new left wall closes at that meeting.
//! The halves meet there in the orthogonal phase, so the packet is whole
//! again half a revival later, which is when the next hop (or the
//! measurement) happens.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{
    corral_schedule, estimate_revival_time, nearest_even, refine_measurement_time,
    MeasurementParity, Schedule,
};
use crate::analysis::moments_within;
use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::spinor::{gaussian_state, BlochSpin, GaussianSpec, SpinorField};
use crate::walk::{evolve, CoinSource, Sampling, Trajectory};

use super::GateEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Station {
    pub left: i64,
    pub right: i64,
    /// Extra whole revival periods spent in this corral before moving on.
    #[serde(default)]
    pub hold: usize,
}

impl Station {
    pub fn new(left: i64, right: i64) -> Self {
        Station { left, right, hold: 0 }
    }

    pub fn with_hold(mut self, hold: usize) -> Self {
        self.hold = hold;
        self
    }

    pub fn center(&self) -> i64 {
        (self.left + self.right) / 2
    }

    pub fn width(&self) -> i64 {
        self.right - self.left
    }

    pub fn revival_estimate(&self) -> usize {
        estimate_revival_time(self.left, self.right, self.center())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialSpin {
    Single(BlochSpin),
    /// The Bloch-sphere grid with step `π / step_divisor`.
    Grid { step_divisor: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingPolicy {
    /// Event times straight from group-speed kinematics.
    AnalyticEstimate,
    /// Kinematic estimates refined on a simulated reference run.
    #[default]
    NumericRefine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorralPlan {
    pub gaussian: GaussianSpec,
    pub spin: InitialSpin,
    pub stations: Vec<Station>,
    pub timing: TimingPolicy,
    /// Auto-sized from the stations and the protocol length when absent.
    pub lattice: Option<Lattice>,
}

impl CorralPlan {
    pub fn new(gaussian: GaussianSpec, stations: Vec<Station>) -> Self {
        CorralPlan {
            gaussian,
            spin: InitialSpin::Grid { step_divisor: 20 },
            stations,
            timing: TimingPolicy::NumericRefine,
            lattice: None,
        }
    }

    pub fn with_spin(mut self, spin: InitialSpin) -> Self {
        self.spin = spin;
        self
    }

    pub fn with_timing(mut self, timing: TimingPolicy) -> Self {
        self.timing = timing;
        self
    }

    pub fn with_lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = Some(lattice);
        self
    }

    /// Checks the placement rules shared by every protocol.
    pub fn validate(&self) -> Result<()> {
        let s = self.gaussian.s;
        let first = self
            .stations
            .first()
            .ok_or_else(|| Error::Plan("plan has no stations".into()))?;
        for (k, st) in self.stations.iter().enumerate() {
            if st.left >= st.right {
                return Err(Error::Plan(format!(
                    "station {k}: left wall {} must lie left of right wall {}",
                    st.left, st.right
                )));
            }
            if (st.left + st.right) % 2 != 0 {
                return Err(Error::Plan(format!(
                    "station {k}: walls {} and {} have no integer center",
                    st.left, st.right
                )));
            }
            let half = (st.width() / 2) as f64;
            if half < 3.0 * s {
                return Err(Error::Plan(format!(
                    "station {k}: walls are {half} sites from the center, need at least 3s = {}",
                    3.0 * s
                )));
            }
        }
        if first.center() != self.gaussian.center {
            return Err(Error::Plan(format!(
                "first station is centered at {}, the packet at {}",
                first.center(),
                self.gaussian.center
            )));
        }
        for (k, pair) in self.stations.windows(2).enumerate() {
            if pair[0].left == pair[1].left && pair[0].right == pair[1].right {
                continue;
            }
            if pair[1].width() != pair[0].width() {
                return Err(Error::Plan(format!(
                    "stations {k} and {} differ in width ({} vs {}); the halves only meet at the \
                     new center for equal widths",
                    k + 1,
                    pair[0].width(),
                    pair[1].width()
                )));
            }
            if pair[1].left < pair[0].right {
                return Err(Error::Plan(format!(
                    "station {} starts at {}, left of the previous right wall {}",
                    k + 1,
                    pair[1].left,
                    pair[0].right
                )));
            }
        }
        Ok(())
    }

    fn check_shared_walls(&self) -> Result<()> {
        for (k, pair) in self.stations.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::Plan(format!(
                    "stations {k} and {} must share a wall, got {} and {}",
                    k + 1,
                    pair[0].right,
                    pair[1].left
                )));
            }
        }
        Ok(())
    }

    /// Distinct consecutive stations; a repeated station just adds its hold.
    fn merged_stations(&self) -> Vec<Station> {
        let mut out: Vec<Station> = Vec::new();
        for st in &self.stations {
            match out.last_mut() {
                Some(last) if last.left == st.left && last.right == st.right => {
                    last.hold += st.hold + 1;
                }
                _ => out.push(*st),
            }
        }
        out
    }
}

/// One hop between consecutive stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub from: usize,
    pub to: usize,
    /// Step at which the old right wall opens and the far wall closes.
    pub depart: usize,
    /// Step at which the new left wall closes.
    pub arrive: usize,
    pub depart_estimate: usize,
    pub arrive_estimate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledProtocol {
    pub schedule: Schedule,
    pub gaussian: GaussianSpec,
    pub stations: Vec<Station>,
    pub segments: Vec<Segment>,
    /// Measurement time.
    pub t_m: usize,
    pub t_m_estimate: usize,
    /// Center of the final station.
    pub target_center: i64,
    /// Displacement from the initial center to the target.
    pub x: i64,
    /// Fidelity of the compilation reference spin at `t_m`.
    pub reference_fidelity: Option<f64>,
    pub timing: TimingPolicy,
}

impl CompiledProtocol {
    pub fn lattice(&self) -> &Lattice {
        self.schedule.lattice()
    }
}

/// Spin used to time events: it splits into two halves of equal weight, so
/// both meetings and revivals show up sharply.
pub const REFERENCE_SPIN: BlochSpin = BlochSpin::PLUS_I;

/// Refinement window half-width around `t_est` for a corral with revival `period`.
fn window(t_est: usize, period: usize) -> usize {
    ((t_est as f64 * 0.05).round() as usize).min(period / 4).max(2)
}

fn ceil_even(x: f64) -> usize {
    let c = x.ceil().max(0.0) as usize;
    c + c % 2
}

/// Coins held fixed while the compiler explores ahead.
struct FrozenCoins {
    lattice: Lattice,
    coins: Vec<CoinMatrix>,
    done: bool,
}

impl CoinSource for FrozenCoins {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn coins_for_step(&mut self, _t: usize, coins: &mut [CoinMatrix]) -> Result<()> {
        if !self.done {
            coins.copy_from_slice(&self.coins);
            self.done = true;
        }
        Ok(())
    }
}

/// Reference run that can be rewound to an event time.
struct Explorer {
    lattice: Lattice,
    closed: Vec<bool>,
    state: SpinorField,
    t: usize,
}

impl Explorer {
    fn coins(&self) -> Vec<CoinMatrix> {
        self.closed
            .iter()
            .map(|&c| if c { CoinMatrix::sigma_x() } else { CoinMatrix::hadamard() })
            .collect()
    }

    fn set(&mut self, site: i64, closed: bool) {
        let i = self.lattice.index(site).expect("validated");
        self.closed[i] = closed;
    }

    /// States at absolute times `t + 1 ..= until` under the current gates,
    /// stored in a trajectory keyed by absolute time.
    fn look_ahead(&self, until: usize) -> Result<Trajectory> {
        let source = FrozenCoins {
            lattice: self.lattice,
            coins: self.coins(),
            done: false,
        };
        let n = until.saturating_sub(self.t);
        let ev = evolve(self.state.clone(), source, n, &Sampling::states(0, n))?;
        let states = ev
            .trajectory
            .states
            .into_iter()
            .map(|(k, s)| (k + self.t, s))
            .collect();
        Ok(Trajectory {
            probabilities: Vec::new(),
            states,
        })
    }

    /// Moves to the state just before events at `t_event` apply.
    fn rewind_to(&mut self, traj: &Trajectory, t_event: usize) {
        let target = t_event - 1;
        if target > self.t {
            self.state = traj.state_at(target).expect("recorded").clone();
            self.t = target;
        }
    }
}

/// Compiles `plan` using the hop rules above, with walls that need not be shared.
pub fn single_shot_plan(plan: &CorralPlan) -> Result<CompiledProtocol> {
    plan.validate()?;
    let merged = plan.merged_stations();
    if merged.len() > 2 {
        return Err(Error::Plan(format!(
            "single-shot herding takes one old and one new corral, got {} stations",
            merged.len()
        )));
    }
    compile(plan, &merged, false)
}

/// Compiles a chain of corrals where each station shares its right wall
/// with the next station's left wall.
///
/// On arrival the shared wall closes again and the wall behind the packet
/// opens, so exactly two sites carry σ_x at any time.
pub fn multistation_plan(plan: &CorralPlan) -> Result<CompiledProtocol> {
    plan.validate()?;
    plan.check_shared_walls()?;
    let merged = plan.merged_stations();
    compile(plan, &merged, true)
}

/// Kinematic timeline: `(departures, arrivals, measurement)`.
fn analytic_times(stations: &[Station]) -> (Vec<usize>, Vec<usize>, usize) {
    let first = stations[0];
    let mut next = first.revival_estimate() * (1 + first.hold);
    let (mut departs, mut arrives) = (Vec::new(), Vec::new());
    for pair in stations.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        departs.push(next);
        let arrive = ceil_even(next as f64 + (b.right - a.left) as f64 * SQRT_2);
        arrives.push(arrive);
        let half = b.width() as f64 * SQRT_2 * (1 + 2 * b.hold) as f64;
        next = nearest_even(arrive as f64 + half);
    }
    (departs, arrives, next)
}

fn auto_lattice(plan: &CorralPlan, stations: &[Station], horizon: usize) -> Result<Lattice> {
    match plan.lattice {
        Some(l) => Ok(l),
        None => {
            let lo = stations.iter().map(|s| s.left).min().expect("non-empty");
            let hi = stations.iter().map(|s| s.right).max().expect("non-empty");
            Lattice::auto(lo, hi, plan.gaussian.s, horizon)
        }
    }
}

fn compile(plan: &CorralPlan, stations: &[Station], reopen_behind: bool) -> Result<CompiledProtocol> {
    let (est_depart, est_arrive, est_m) = analytic_times(stations);
    // Room for scanning measurement times up to 20% past t_M.
    let horizon = est_m + est_m / 4 + 16;
    let lattice = auto_lattice(plan, stations, horizon)?;
    let first = stations[0];
    let last = *stations.last().expect("non-empty");
    let x = last.center() - first.center();

    if stations.len() == 1 {
        let schedule = corral_schedule(first.left, first.right, lattice, horizon)?;
        return finish_single(plan, schedule, first, est_m, x);
    }

    let mut events = vec![GateEvent::close(0, first.left), GateEvent::close(0, first.right)];
    let mut segments = Vec::new();

    if plan.timing == TimingPolicy::AnalyticEstimate {
        for (k, pair) in stations.windows(2).enumerate() {
            push_hop(&mut events, pair[0], pair[1], est_depart[k], est_arrive[k], reopen_behind);
            segments.push(Segment {
                from: k,
                to: k + 1,
                depart: est_depart[k],
                arrive: est_arrive[k],
                depart_estimate: est_depart[k],
                arrive_estimate: est_arrive[k],
            });
        }
        let schedule = Schedule::new(lattice, events, horizon)?;
        return Ok(CompiledProtocol {
            schedule,
            gaussian: plan.gaussian,
            stations: stations.to_vec(),
            segments,
            t_m: est_m,
            t_m_estimate: est_m,
            target_center: last.center(),
            x,
            reference_fidelity: None,
            timing: plan.timing,
        });
    }

    let reference = gaussian_state(plan.gaussian, REFERENCE_SPIN, &lattice)?;
    let mut ex = Explorer {
        lattice,
        closed: vec![false; lattice.size()],
        state: reference.clone(),
        t: 0,
    };
    ex.set(first.left, true);
    ex.set(first.right, true);

    // First departure: the packet is whole again after the first revival(s).
    let period0 = first.revival_estimate();
    let mut t_est = period0 * (1 + first.hold);
    let mut w = window(t_est, period0);
    let mut offset = 0i64;

    for (k, pair) in stations.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let traj = ex.look_ahead(t_est + w)?;
        let depart = refine_measurement_time(
            &traj,
            &reference,
            offset,
            t_est,
            w,
            MeasurementParity::EvenOnly,
        )?
        .t_m;
        ex.rewind_to(&traj, depart);
        ex.set(a.right, false);
        ex.set(b.right, true);

        // Arrival: the halves meet at the new center, where the spread of
        // the packet between the outer walls is smallest.
        let travel = (b.right - a.left) as f64 * SQRT_2;
        let arrive_est = depart as f64 + travel;
        let aw = (travel * 0.05).ceil() as usize;
        let lo = (arrive_est.floor() as usize).saturating_sub(aw);
        let hi = arrive_est.ceil() as usize + aw;
        let traj = ex.look_ahead(hi)?;
        let (t_meet, _) = traj
            .states
            .iter()
            .filter(|(t, _)| (lo..=hi).contains(t))
            .map(|(t, s)| (*t, moments_within(s, a.left, b.right).1))
            .min_by(|p, q| p.1.total_cmp(&q.1).then(p.0.cmp(&q.0)))
            .ok_or_else(|| Error::Plan(format!("no states recorded in [{lo}, {hi}]")))?;
        let arrive = t_meet + t_meet % 2;
        ex.rewind_to(&traj, arrive);
        ex.set(b.left, true);
        if reopen_behind {
            ex.set(a.left, false);
        }

        push_hop(&mut events, a, b, depart, arrive, reopen_behind);
        segments.push(Segment {
            from: k,
            to: k + 1,
            depart,
            arrive,
            depart_estimate: est_depart[k],
            arrive_estimate: est_arrive[k],
        });

        let period = b.revival_estimate();
        let half = b.width() as f64 * SQRT_2 * (1 + 2 * b.hold) as f64;
        t_est = nearest_even(arrive as f64 + half);
        w = window(t_est, period);
        offset = b.center() - first.center();
    }

    let traj = ex.look_ahead(t_est + w)?;
    let refined = refine_measurement_time(&traj, &reference, x, t_est, w, MeasurementParity::EvenOnly)?;
    let schedule = Schedule::new(lattice, events, horizon.max(refined.t_m + refined.t_m / 5 + 16))?;
    Ok(CompiledProtocol {
        schedule,
        gaussian: plan.gaussian,
        stations: stations.to_vec(),
        segments,
        t_m: refined.t_m,
        t_m_estimate: est_m,
        target_center: last.center(),
        x,
        reference_fidelity: Some(refined.fidelity),
        timing: plan.timing,
    })
}

fn push_hop(
    events: &mut Vec<GateEvent>,
    a: Station,
    b: Station,
    depart: usize,
    arrive: usize,
    reopen_behind: bool,
) {
    events.push(GateEvent::open(depart, a.right));
    events.push(GateEvent::close(depart, b.right));
    events.push(GateEvent::close(arrive, b.left));
    // In single-shot mode the original left wall stays up.
    if reopen_behind {
        events.push(GateEvent::open(arrive, a.left));
    }
}

fn finish_single(
    plan: &CorralPlan,
    schedule: Schedule,
    station: Station,
    est: usize,
    x: i64,
) -> Result<CompiledProtocol> {
    let (t_m, reference_fidelity) = match plan.timing {
        TimingPolicy::AnalyticEstimate => (est, None),
        TimingPolicy::NumericRefine => {
            let reference = gaussian_state(plan.gaussian, REFERENCE_SPIN, schedule.lattice())?;
            let w = window(est, station.revival_estimate());
            let traj = evolve(
                reference.clone(),
                schedule.cursor(),
                est + w,
                &Sampling::states(est.saturating_sub(w), est + w),
            )?
            .trajectory;
            let r = refine_measurement_time(&traj, &reference, x, est, w, MeasurementParity::EvenOnly)?;
            (r.t_m, Some(r.fidelity))
        }
    };
    Ok(CompiledProtocol {
        schedule,
        gaussian: plan.gaussian,
        stations: vec![station],
        segments: Vec::new(),
        t_m,
        t_m_estimate: est,
        target_center: station.center(),
        x,
        reference_fidelity,
        timing: plan.timing,
    })
}
