//! Reference protocols and the scans run on top of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{average_fidelity, fidelity, single_fidelity, BlochGrid, FidelityReport};
use crate::error::{Error, Result};
use crate::schedule::{multistation_plan, single_shot_plan, CompiledProtocol, CorralPlan, InitialSpin, Station};
use crate::spinor::{gaussian_state, BlochSpin, GaussianSpec};
use crate::walk::{evolve, Sampling};

/// Standard deviation used by the reference protocols.
pub const REFERENCE_S: f64 = 10.0;

/// A packet of width 10 held between walls at ±101.
pub fn corral_preset() -> CorralPlan {
    CorralPlan::new(
        GaussianSpec { s: REFERENCE_S, center: 0 },
        vec![Station::new(-101, 101)],
    )
}

/// One hop from the corral [-50, 50] to [250, 350].
pub fn herd_preset() -> CorralPlan {
    CorralPlan::new(
        GaussianSpec { s: REFERENCE_S, center: 0 },
        vec![Station::new(-50, 50), Station::new(250, 350)],
    )
}

/// Three hops through adjacent corrals of width 100, ending at [250, 350].
pub fn multistation_preset() -> CorralPlan {
    CorralPlan::new(
        GaussianSpec { s: REFERENCE_S, center: 0 },
        vec![
            Station::new(-50, 50),
            Station::new(50, 150),
            Station::new(150, 250),
            Station::new(250, 350),
        ],
    )
}

/// Compiles with the multistation rules when consecutive stations share
/// walls, and with the single-shot rules otherwise.
pub fn compile(plan: &CorralPlan) -> Result<CompiledProtocol> {
    let shared = plan.stations.windows(2).all(|w| w[0].right == w[1].left);
    if shared {
        multistation_plan(plan)
    } else {
        single_shot_plan(plan)
    }
}

/// Fidelity at `protocol.t_m` for the plan's initial spin (or grid).
pub fn evaluate(protocol: &CompiledProtocol, spin: &InitialSpin) -> Result<FidelityReport> {
    match *spin {
        InitialSpin::Single(spin) => {
            let f = single_fidelity(&protocol.schedule, protocol.gaussian, spin, protocol.t_m, protocol.x)?;
            Ok(FidelityReport::from_values(protocol.t_m, protocol.x, vec![f]))
        }
        InitialSpin::Grid { step_divisor } => average_fidelity(
            &protocol.schedule,
            protocol.gaussian,
            &BlochGrid::new(step_divisor)?,
            protocol.t_m,
            protocol.x,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPoint {
    pub s: f64,
    pub fidelity: f64,
}

/// Reruns `protocol` unchanged (same gates, same `t_m`) for packets of each width in `s_values`.
pub fn sigma_sweep(protocol: &CompiledProtocol, s_values: &[f64], spin: BlochSpin) -> Result<Vec<SigmaPoint>> {
    s_values
        .par_iter()
        .map(|&s| {
            let g = GaussianSpec::new(s, protocol.gaussian.center)?;
            let f = single_fidelity(&protocol.schedule, g, spin, protocol.t_m, protocol.x)?;
            Ok(SigmaPoint { s, fidelity: f })
        })
        .collect()
}

/// Fidelity at every even time within `fraction · t_m` of `t_m`.
pub fn measurement_window_scan(
    protocol: &CompiledProtocol,
    spin: BlochSpin,
    fraction: f64,
) -> Result<Vec<(usize, f64)>> {
    let w = (protocol.t_m as f64 * fraction).floor() as usize;
    let lo = protocol.t_m.saturating_sub(w);
    let hi = protocol.t_m + w;
    if hi > protocol.schedule.horizon() {
        return Err(Error::Parameter(format!(
            "scan up to t = {hi} exceeds the schedule horizon {}",
            protocol.schedule.horizon()
        )));
    }
    let psi0 = gaussian_state(protocol.gaussian, spin, protocol.schedule.lattice())?;
    let ev = evolve(psi0.clone(), protocol.schedule.cursor(), hi, &Sampling::states(lo, hi))?;
    ev.trajectory
        .states
        .iter()
        .filter(|(t, _)| t % 2 == 0)
        .map(|(t, s)| Ok((*t, fidelity(&psi0, s, protocol.x)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterCase {
    /// Relative shift applied to each switch group after `t = 0`.
    pub shifts: Vec<f64>,
    pub switch_times: Vec<usize>,
    pub fidelity: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterReport {
    pub clean: f64,
    pub cases: Vec<JitterCase>,
    pub max_delta: f64,
}

/// Moves each group of simultaneous gate events by up to `fraction` of the
/// interval since the previous group and measures at the clean `t_m`.
///
/// Runs the two uniform extremes (every group `+fraction`, every group
/// `-fraction`) and `trials` random draws.
pub fn jitter_scan(
    protocol: &CompiledProtocol,
    spin: BlochSpin,
    fraction: f64,
    trials: usize,
    seed: u64,
) -> Result<JitterReport> {
    let clean = single_fidelity(&protocol.schedule, protocol.gaussian, spin, protocol.t_m, protocol.x)?;
    let groups = protocol.schedule.switch_times().iter().filter(|&&t| t > 0).count();
    let mut draws = vec![vec![fraction; groups], vec![-fraction; groups]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        draws.push((0..groups).map(|_| rng.random_range(-fraction..=fraction)).collect());
    }
    let cases = draws
        .into_par_iter()
        .map(|shifts| {
            let mut k = 0;
            let sched = protocol.schedule.retimed(|t, prev| {
                let d = shifts[k];
                k += 1;
                (t as f64 + d * (t - prev) as f64).round() as usize
            })?;
            let f = single_fidelity(&sched, protocol.gaussian, spin, protocol.t_m, protocol.x)?;
            Ok(JitterCase {
                switch_times: sched.switch_times(),
                shifts,
                fidelity: f,
                delta: (f - clean).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_delta = cases.iter().map(|c| c.delta).fold(0.0, f64::max);
    Ok(JitterReport {
        clean,
        cases,
        max_delta,
    })
}
