//! Fixtures shared by the benchmarks.

use corral::{corral_schedule, gaussian_state, BlochSpin, GaussianSpec, Lattice, Schedule, SpinorField};

/// Gaussian packet of width 10 on a lattice of `2 * half + 1` sites.
pub fn packet(half: i64) -> SpinorField {
    let lattice = Lattice::symmetric(half).expect("valid lattice");
    gaussian_state(GaussianSpec { s: 10.0, center: 0 }, BlochSpin::PLUS_I, &lattice).expect("fits")
}

/// Walls at ±101 on a lattice of `2 * half + 1` sites.
pub fn corral(half: i64, horizon: usize) -> Schedule {
    let lattice = Lattice::symmetric(half).expect("valid lattice");
    corral_schedule(-101, 101, lattice, horizon).expect("valid walls")
}
