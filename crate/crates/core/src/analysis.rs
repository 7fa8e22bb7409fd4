//! Fidelity, position distributions and packet tracking.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::kspace::{L_SPIN, R_SPIN};
use crate::schedule::Schedule;
use crate::spinor::{gaussian_state, BlochSpin, GaussianSpec, SpinorField};
use crate::walk::{Walker, Sampling, evolve};

/// Probability that is allowed to fall off the lattice under [`displacement`].
pub const DISPLACEMENT_TOLERANCE: f64 = 1e-12;

/// `P(j) = |ψ↑(j)|² + |ψ↓(j)|²`.
pub fn probability_distribution(state: &SpinorField) -> Vec<f64> {
    state
        .up()
        .iter()
        .zip(state.down())
        .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
        .collect()
}

/// `D_x`: moves both components `x` sites to the right.
pub fn displacement(state: &SpinorField, x: i64) -> Result<SpinorField> {
    let lattice = *state.lattice();
    let mut out = SpinorField::zeros(lattice);
    let mut lost = 0.0;
    {
        let (ou, od) = out.components_mut();
        for (i, (u, d)) in state.up().iter().zip(state.down()).enumerate() {
            match lattice.index(lattice.site(i) + x) {
                Some(k) => {
                    ou[k] = *u;
                    od[k] = *d;
                }
                None => lost += u.norm_sqr() + d.norm_sqr(),
            }
        }
    }
    if lost > DISPLACEMENT_TOLERANCE {
        return Err(Error::Sizing(format!(
            "displacing by {x} pushes probability {lost:.3e} off the lattice"
        )));
    }
    Ok(out)
}

/// `F = |⟨ψ0| D_x† |ψt⟩|²`.
pub fn fidelity(psi0: &SpinorField, psit: &SpinorField, x: i64) -> Result<f64> {
    psi0.check_same_lattice(psit)?;
    let l = psi0.lattice();
    let n = l.size() as i64;
    // Site j of psit pairs with site j - x of psi0.
    let lo = x.max(0);
    let hi = (n + x).min(n);
    let mut acc = Complex64::new(0.0, 0.0);
    if lo < hi {
        let (a_up, a_dn) = (psi0.up(), psi0.down());
        let (b_up, b_dn) = (psit.up(), psit.down());
        for k in lo..hi {
            let k = k as usize;
            let i = (k as i64 - x) as usize;
            acc += a_up[i].conj() * b_up[k] + a_dn[i].conj() * b_dn[k];
        }
    }
    Ok(acc.norm_sqr())
}

/// First moment `Σ j P(j)`.
pub fn packet_center(state: &SpinorField) -> f64 {
    let l = state.lattice();
    probability_distribution(state)
        .iter()
        .enumerate()
        .map(|(i, p)| l.site(i) as f64 * p)
        .sum()
}

/// Mean and standard deviation of `P` restricted to sites in `[lo, hi]`.
pub fn moments_within(state: &SpinorField, lo: i64, hi: i64) -> (f64, f64) {
    let l = state.lattice();
    let p = probability_distribution(state);
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for j in lo.max(l.j_min())..=hi.min(l.j_max()) {
        let w = p[l.index(j).expect("clamped")];
        let x = j as f64;
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    if m0 <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).max(0.0).sqrt())
}

/// Centers of the (at most two) dominant sub-packets, ascending.
///
/// `P` is smoothed over three sites; the two highest local maxima at least
/// `min_separation` sites apart are kept, preferring the outermost peak on
/// ties. Each center is the first moment of `P` within `min_separation`
/// sites of its peak, clipped at the midpoint between the peaks.
pub fn sub_packet_centers(state: &SpinorField, min_separation: f64) -> Vec<f64> {
    let l = state.lattice();
    let p = probability_distribution(state);
    let n = p.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let a = if i > 0 { p[i - 1] } else { 0.0 };
            let c = if i + 1 < n { p[i + 1] } else { 0.0 };
            (a + p[i] + c) / 3.0
        })
        .collect();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i > 0 { smooth[i - 1] } else { 0.0 };
            let right = if i + 1 < n { smooth[i + 1] } else { 0.0 };
            smooth[i] > 0.0 && smooth[i] > left && smooth[i] >= right
        })
        .collect();
    if peaks.is_empty() {
        return Vec::new();
    }
    let mid = (n as f64 - 1.0) / 2.0;
    peaks.sort_by(|&a, &b| {
        smooth[b]
            .total_cmp(&smooth[a])
            .then(((b as f64 - mid).abs()).total_cmp(&(a as f64 - mid).abs()))
    });
    let first = peaks[0];
    let second = peaks[1..]
        .iter()
        .copied()
        .filter(|&i| (i as f64 - first as f64).abs() >= min_separation)
        .max_by(|&a, &b| {
            smooth[a]
                .total_cmp(&smooth[b])
                .then(((a as f64 - first as f64).abs()).total_cmp(&(b as f64 - first as f64).abs()))
        });
    let reach = min_separation.max(1.0);
    let moment = |peak: usize, lo: f64, hi: f64| {
        let lo = lo.max(peak as f64 - reach).ceil().max(0.0) as usize;
        let hi = hi.min(peak as f64 + reach).floor().min(n as f64 - 1.0) as usize;
        let (mut m0, mut m1) = (0.0, 0.0);
        for (i, &w) in p.iter().enumerate().take(hi + 1).skip(lo) {
            m0 += w;
            m1 += w * l.site(i) as f64;
        }
        m1 / m0
    };
    match second {
        None => vec![moment(first, f64::NEG_INFINITY, f64::INFINITY)],
        Some(second) => {
            let (a, b) = (first.min(second), first.max(second));
            let cut = (a + b) as f64 / 2.0;
            vec![
                moment(a, f64::NEG_INFINITY, cut - 0.5),
                moment(b, cut + 0.5, f64::INFINITY),
            ]
        }
    }
}

/// Applies the Hadamard coin to the spin at every site without moving it.
///
/// In the basis of the two Hadamard eigenvectors (the right- and
/// left-moving spin states) this is `diag(1, -1)`, i.e. it removes the
/// relative π phase an odd number of steps puts between the two halves.
pub fn phase_flip_correction(state: &SpinorField) -> SpinorField {
    let h = CoinMatrix::hadamard();
    let (up, down): (Vec<_>, Vec<_>) = state
        .up()
        .iter()
        .zip(state.down())
        .map(|(u, d)| h.apply(*u, *d))
        .unzip();
    SpinorField::new(*state.lattice(), up, down).expect("same shape")
}

/// Re-expresses the spin at every site in the `{R, L}` basis.
pub fn to_rl_basis(state: &SpinorField) -> SpinorField {
    let (up, down): (Vec<_>, Vec<_>) = state
        .up()
        .iter()
        .zip(state.down())
        .map(|(u, d)| {
            (
                R_SPIN[0] * u + R_SPIN[1] * d,
                L_SPIN[0] * u + L_SPIN[1] * d,
            )
        })
        .unzip();
    SpinorField::new(*state.lattice(), up, down).expect("same shape")
}

/// `α ∈ [0, π/2]`, `β ∈ [0, 2π]`, both endpoints included, in steps of `π / divisions`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochGrid {
    divisions: u32,
    states: Vec<BlochSpin>,
}

impl BlochGrid {
    pub fn new(divisions: u32) -> Result<Self> {
        if divisions == 0 || divisions % 2 != 0 {
            return Err(Error::Parameter(format!(
                "grid step pi/{divisions} must divide pi/2 (use an even divisor)"
            )));
        }
        let step = PI / divisions as f64;
        let n_alpha = divisions / 2 + 1;
        let n_beta = 2 * divisions + 1;
        let mut states = Vec::with_capacity((n_alpha * n_beta) as usize);
        for a in 0..n_alpha {
            for b in 0..n_beta {
                let alpha = (a as f64 * step).min(FRAC_PI_2);
                let beta = (b as f64 * step).min(2.0 * PI);
                states.push(BlochSpin { alpha, beta });
            }
        }
        Ok(BlochGrid { divisions, states })
    }

    /// The 451-state grid with step π/20.
    pub fn standard() -> Self {
        BlochGrid::new(20).expect("valid")
    }

    pub fn divisions(&self) -> u32 {
        self.divisions
    }

    pub fn step(&self) -> f64 {
        PI / self.divisions as f64
    }

    pub fn states(&self) -> &[BlochSpin] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub t: usize,
    pub x: i64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// One value per initial spin, in grid order.
    pub values: Vec<f64>,
}

impl FidelityReport {
    pub fn from_values(t: usize, x: i64, values: Vec<f64>) -> Self {
        let n = values.len().max(1) as f64;
        // Order-independent reduction.
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        FidelityReport {
            t,
            x,
            mean,
            std: var.sqrt(),
            min: sorted.first().copied().unwrap_or(f64::NAN),
            max: sorted.last().copied().unwrap_or(f64::NAN),
            values,
        }
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Fidelity at `t_m` against the initial state displaced by `x`, for one spin.
pub fn single_fidelity(
    schedule: &Schedule,
    gaussian: GaussianSpec,
    spin: BlochSpin,
    t_m: usize,
    x: i64,
) -> Result<f64> {
    let psi0 = gaussian_state(gaussian, spin, schedule.lattice())?;
    let mut walker = Walker::new(psi0.clone(), schedule.cursor())?;
    walker.run_until(t_m)?;
    fidelity(&psi0, walker.state(), x)
}

/// Runs every spin of `grid` through `schedule` and aggregates the fidelity at `t_m`.
pub fn average_fidelity(
    schedule: &Schedule,
    gaussian: GaussianSpec,
    grid: &BlochGrid,
    t_m: usize,
    x: i64,
) -> Result<FidelityReport> {
    let values = grid
        .states()
        .par_iter()
        .map(|&spin| single_fidelity(schedule, gaussian, spin, t_m, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityReport::from_values(t_m, x, values))
}

/// `⟨P(j, t)⟩` over the grid, sampled every `stride` steps from 0 to `n_steps`.
pub fn average_probability(
    schedule: &Schedule,
    gaussian: GaussianSpec,
    grid: &BlochGrid,
    n_steps: usize,
    stride: usize,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let sampling = Sampling::probabilities(stride);
    let runs = grid
        .states()
        .par_iter()
        .map(|&spin| {
            let psi0 = gaussian_state(gaussian, spin, schedule.lattice())?;
            Ok(evolve(psi0, schedule.cursor(), n_steps, &sampling)?.trajectory.probabilities)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = 1.0 / grid.len() as f64;
    let mut avg = runs[0].clone();
    for frame in avg.iter_mut() {
        frame.1.iter_mut().for_each(|p| *p = 0.0);
    }
    for run in &runs {
        for (acc, (_, p)) in avg.iter_mut().zip(run) {
            for (a, v) in acc.1.iter_mut().zip(p) {
                *a += v * k;
            }
        }
    }
    Ok(avg)
}
