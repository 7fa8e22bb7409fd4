//! Random perturbations of the coin parameters and ensemble sweeps.
//!
//! Every site keeps two parameter tracks, one for its Hadamard coin and one
//! for its σ_x coin; the gate schedule picks which track is in force. Both
//! tracks of a site receive the same random deviation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::fidelity;
use crate::coin::{coin_unchecked, wrap_angle, CoinMatrix, CoinParams};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::schedule::{CompiledProtocol, Schedule, ScheduleCursor};
use crate::spinor::{gaussian_state, BlochSpin, GaussianSpec};
use crate::walk::{CoinSource, Walker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderKind {
    /// Perturbed once before the first step, independently per site.
    Static,
    /// Re-perturbed every `tau` steps with one deviation shared by all sites.
    Dynamic,
    /// Re-perturbed every `tau` steps, independently per site.
    Fluctuating,
}

impl DisorderKind {
    pub const ALL: [DisorderKind; 3] = [DisorderKind::Static, DisorderKind::Dynamic, DisorderKind::Fluctuating];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderVariant {
    #[default]
    All,
    QOnly,
    PhaseOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// Largest deviation, as a fraction (0.001 is 0.1%).
    pub p: f64,
    pub tau: usize,
    #[serde(default)]
    pub variant: DisorderVariant,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn new(kind: DisorderKind, p: f64, tau: usize, variant: DisorderVariant, master_seed: u64) -> Result<Self> {
        let spec = DisorderSpec {
            kind,
            p,
            tau,
            variant,
            master_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(Error::Parameter(format!("disorder strength p = {} must be >= 0", self.p)));
        }
        if self.tau == 0 && self.kind != DisorderKind::Static {
            return Err(Error::Parameter("disorder period tau must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether parameters are redrawn before step `t`.
    pub fn updates_at(&self, t: usize) -> bool {
        match self.kind {
            DisorderKind::Static => t == 1,
            DisorderKind::Dynamic | DisorderKind::Fluctuating => t > 0 && t % self.tau == 0,
        }
    }

    /// Update index for step `t`: 0 for the static draw, `n` at `t = nτ`.
    fn epoch(&self, t: usize) -> u64 {
        match self.kind {
            DisorderKind::Static => 0,
            _ => (t / self.tau) as u64,
        }
    }
}

/// Counter-based random numbers keyed by (seed, realization, epoch, slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    pub master_seed: u64,
    pub realization: u64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, realization: u64) -> Self {
        NoiseStream {
            master_seed,
            realization,
        }
    }

    /// Three uniform draws in `[0, 1)` for `(epoch, slot)`.
    pub fn uniforms(&self, epoch: u64, slot: u64) -> [f64; 3] {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.realization.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(epoch);
        rng.set_word_pos(slot as u128 * 8);
        [rng.random(), rng.random(), rng.random()]
    }

    /// `(δq, δθ, δφ)`, each uniform on `[-p, p]`, with the variant mask applied.
    pub fn deltas(&self, spec: &DisorderSpec, epoch: u64, slot: u64) -> [f64; 3] {
        let u = self.uniforms(epoch, slot);
        let mut d = u.map(|u| spec.p * (2.0 * u - 1.0));
        match spec.variant {
            DisorderVariant::All => {}
            DisorderVariant::QOnly => {
                d[1] = 0.0;
                d[2] = 0.0;
            }
            DisorderVariant::PhaseOnly => d[0] = 0.0,
        }
        d
    }
}

/// `q ← min(|q + δq|, 1)`, `θ ← θ + πδθ`, `φ ← φ + πδφ` with angles wrapped
/// to `[-π, π]`. Returns the new parameters and whether `q` was clamped.
pub fn perturb(params: CoinParams, d: [f64; 3]) -> (CoinParams, bool) {
    let raw = (params.q + d[0]).abs();
    let q = raw.min(1.0);
    (
        CoinParams {
            q,
            theta: wrap_angle(params.theta + PI * d[1]),
            phi: wrap_angle(params.phi + PI * d[2]),
        },
        raw > 1.0,
    )
}

/// Applies one disorder update for step `t` to every site.
///
/// Static and fluctuating disorder draw per site (slot = site index);
/// dynamic disorder draws one triple (slot 0) for all sites.
/// Returns the number of `q` clamps.
pub fn perturb_coins(
    params: &mut [CoinParams],
    spec: &DisorderSpec,
    stream: &NoiseStream,
    t: usize,
) -> usize {
    let epoch = spec.epoch(t);
    let shared = (spec.kind == DisorderKind::Dynamic).then(|| stream.deltas(spec, epoch, 0));
    let mut clamps = 0;
    for (i, p) in params.iter_mut().enumerate() {
        let d = shared.unwrap_or_else(|| stream.deltas(spec, epoch, i as u64));
        let (np, clamped) = perturb(*p, d);
        *p = np;
        clamps += clamped as usize;
    }
    clamps
}

/// A gate schedule with disordered coin parameters.
pub struct DisorderedSchedule<'a> {
    cursor: ScheduleCursor<'a>,
    spec: DisorderSpec,
    stream: NoiseStream,
    hadamard: Vec<CoinParams>,
    sigma_x: Vec<CoinParams>,
    clamps: usize,
    started: bool,
}

impl<'a> DisorderedSchedule<'a> {
    pub fn new(schedule: &'a Schedule, spec: DisorderSpec, realization: u64) -> Result<Self> {
        spec.validate()?;
        let n = schedule.lattice().size();
        Ok(DisorderedSchedule {
            cursor: schedule.cursor(),
            spec,
            stream: NoiseStream::new(spec.master_seed, realization),
            hadamard: vec![CoinParams::HADAMARD; n],
            sigma_x: vec![CoinParams::SIGMA_X; n],
            clamps: 0,
            started: false,
        })
    }

    /// How often `q` has been clamped at 1 so far.
    pub fn clamps(&self) -> usize {
        self.clamps
    }

    /// Parameters in force at site index `i` for the latest step.
    pub fn params_at(&self, i: usize) -> CoinParams {
        if self.cursor.closed_mask()[i] {
            self.sigma_x[i]
        } else {
            self.hadamard[i]
        }
    }

    fn update(&mut self, t: usize) {
        let epoch = self.spec.epoch(t);
        let shared = (self.spec.kind == DisorderKind::Dynamic).then(|| self.stream.deltas(&self.spec, epoch, 0));
        for i in 0..self.hadamard.len() {
            let d = shared.unwrap_or_else(|| self.stream.deltas(&self.spec, epoch, i as u64));
            let (h, ch) = perturb(self.hadamard[i], d);
            let (x, cx) = perturb(self.sigma_x[i], d);
            self.hadamard[i] = h;
            self.sigma_x[i] = x;
            self.clamps += ch as usize + cx as usize;
        }
    }
}

impl CoinSource for DisorderedSchedule<'_> {
    fn lattice(&self) -> &Lattice {
        self.cursor.lattice()
    }

    fn coins_for_step(&mut self, t: usize, coins: &mut [CoinMatrix]) -> Result<()> {
        let changed = self.cursor.advance_to(t)?;
        let redraw = self.spec.updates_at(t);
        if redraw {
            self.update(t);
        }
        if redraw || !self.started {
            for (i, c) in coins.iter_mut().enumerate() {
                *c = coin_unchecked(self.params_at(i));
            }
            self.started = true;
        } else {
            for i in changed {
                coins[i] = coin_unchecked(self.params_at(i));
            }
        }
        Ok(())
    }
}

/// Fidelity at `t_m` of one disordered run of `schedule`.
pub fn disordered_fidelity(
    schedule: &Schedule,
    gaussian: GaussianSpec,
    spin: BlochSpin,
    spec: DisorderSpec,
    realization: u64,
    t_m: usize,
    x: i64,
) -> Result<(f64, usize)> {
    let psi0 = gaussian_state(gaussian, spin, schedule.lattice())?;
    let source = DisorderedSchedule::new(schedule, spec, realization)?;
    let mut walker = Walker::new(psi0.clone(), source)?;
    walker.run_until(t_m)?;
    let f = fidelity(&psi0, walker.state(), x)?;
    Ok((f, walker.source().clamps()))
}

/// Spin used for every disordered run: it splits into two equal halves.
pub const SWEEP_SPIN: BlochSpin = BlochSpin::PLUS_I;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    pub kind: DisorderKind,
    pub variant: DisorderVariant,
    pub tau: usize,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
    pub clamps: usize,
    /// One value per realization, in realization order.
    pub fidelities: Vec<f64>,
}

impl SweepPoint {
    fn from_runs(p: f64, kind: DisorderKind, variant: DisorderVariant, tau: usize, runs: Vec<(f64, usize)>) -> Self {
        let fidelities: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let clamps = runs.iter().map(|r| r.1).sum();
        let mut sorted = fidelities.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = if sorted.len() > 1 {
            sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SweepPoint {
            p,
            kind,
            variant,
            tau,
            mean,
            std: var.sqrt(),
            stderr: (var / n).sqrt(),
            min: sorted.first().copied().unwrap_or(f64::NAN),
            max: sorted.last().copied().unwrap_or(f64::NAN),
            clamps,
            fidelities,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub t_m: usize,
    pub x: i64,
    pub tau: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn point(&self, p: f64, kind: DisorderKind, variant: DisorderVariant) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|pt| pt.kind == kind && pt.variant == variant && (pt.p - p).abs() < 1e-15)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub p_values: Vec<f64>,
    pub kinds: Vec<DisorderKind>,
    pub variants: Vec<DisorderVariant>,
    pub realizations: usize,
    pub master_seed: u64,
    /// Defaults to 10% of the clean measurement time.
    pub tau: Option<usize>,
}

impl SweepConfig {
    /// `0, step, 2·step, …` up to `p_max` inclusive.
    pub fn p_grid(p_max: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !(p_max >= 0.0) {
            return Err(Error::Parameter(format!("bad p grid: max {p_max}, step {step}")));
        }
        let n = (p_max / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| i as f64 * step).collect())
    }
}

/// Runs every `(p, kind, variant)` combination of `config` on `protocol`,
/// measuring at its clean `t_m` against the final station center.
pub fn disorder_sweep(protocol: &CompiledProtocol, config: &SweepConfig) -> Result<SweepReport> {
    if config.realizations == 0 {
        return Err(Error::Parameter("need at least one realization".into()));
    }
    let tau = config
        .tau
        .unwrap_or_else(|| ((protocol.t_m as f64 * 0.1).round() as usize).max(1));
    let mut points = Vec::new();
    for &variant in &config.variants {
        for &kind in &config.kinds {
            for &p in &config.p_values {
                let spec = DisorderSpec::new(kind, p, tau, variant, config.master_seed)?;
                let runs = (0..config.realizations as u64)
                    .into_par_iter()
                    .map(|r| {
                        disordered_fidelity(
                            &protocol.schedule,
                            protocol.gaussian,
                            SWEEP_SPIN,
                            spec,
                            r,
                            protocol.t_m,
                            protocol.x,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                points.push(SweepPoint::from_runs(p, kind, variant, tau, runs));
            }
        }
    }
    Ok(SweepReport {
        t_m: protocol.t_m,
        x: protocol.x,
        tau,
        realizations: config.realizations,
        master_seed: config.master_seed,
        points,
    })
}
