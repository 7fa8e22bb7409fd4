//! One-dimensional discrete-time quantum walk with site- and time-dependent
//! coins, used to trap, move and release Gaussian wave packets with walls
//! of σ_x coins in a Hadamard background.
//!
//! ```
//! use corral::{corral_schedule, gaussian_state, fidelity, BlochSpin, GaussianSpec, Lattice, Walker};
//!
//! let lattice = Lattice::auto(-40, 40, 8.0, 300).unwrap();
//! let schedule = corral_schedule(-40, 40, lattice, 300).unwrap();
//! let psi0 = gaussian_state(GaussianSpec::new(8.0, 0).unwrap(), BlochSpin::UP, &lattice).unwrap();
//! let mut walker = Walker::new(psi0.clone(), schedule.cursor()).unwrap();
//! walker.run_until(226).unwrap();
//! assert!(fidelity(&psi0, walker.state(), 0).unwrap() > 0.9);
//! ```

pub mod analysis;
pub mod coin;
pub mod disorder;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kspace;
pub mod lattice;
pub mod schedule;
pub mod spinor;
pub mod walk;

pub use analysis::{
    average_fidelity, displacement, fidelity, packet_center, phase_flip_correction,
    probability_distribution, sub_packet_centers, BlochGrid, FidelityReport,
};
pub use coin::{make_coin, CoinMatrix, CoinParams};
pub use disorder::{
    disorder_sweep, DisorderKind, DisorderSpec, DisorderVariant, DisorderedSchedule, SweepConfig,
    SweepReport,
};
pub use error::{Error, Result};
pub use kspace::{analytic_split_state, fft_evolve, mk_eigensystem, KMode, SplitState};
pub use lattice::Lattice;
pub use schedule::{
    corral_schedule, estimate_revival_time, multistation_plan, refine_measurement_time,
    single_shot_plan, CompiledProtocol, CorralPlan, GateAction, GateEvent, InitialSpin,
    MeasurementParity, Schedule, Station, TimingPolicy,
};
pub use spinor::{gaussian_state, BlochSpin, GaussianSpec, SpinorField};
pub use walk::{evolve, step, CoinSource, Homogeneous, Sampling, Trajectory, Walker};
