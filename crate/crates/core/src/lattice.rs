//! Finite window `[j_min, j_max]` of the integer line the walker lives on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest lattice the walk accepts.
pub const MIN_SITES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct Lattice {
    j_min: i64,
    j_max: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    j_min: i64,
    j_max: i64,
}

impl TryFrom<RawLattice> for Lattice {
    type Error = Error;
    fn try_from(raw: RawLattice) -> Result<Self> {
        Lattice::new(raw.j_min, raw.j_max)
    }
}

impl From<Lattice> for RawLattice {
    fn from(l: Lattice) -> Self {
        RawLattice {
            j_min: l.j_min,
            j_max: l.j_max,
        }
    }
}

impl Lattice {
    pub fn new(j_min: i64, j_max: i64) -> Result<Self> {
        if j_max < j_min || ((j_max - j_min + 1) as usize) < MIN_SITES {
            return Err(Error::Sizing(format!(
                "lattice [{j_min}, {j_max}] must hold at least {MIN_SITES} sites"
            )));
        }
        Ok(Lattice { j_min, j_max })
    }

    /// Symmetric lattice `[-half_width, half_width]`.
    pub fn symmetric(half_width: i64) -> Result<Self> {
        Lattice::new(-half_width, half_width)
    }

    /// Lattice that holds gates in `[gate_min, gate_max]` for `horizon` steps
    /// of a Gaussian of width `s`.
    ///
    /// The buffer beyond the outermost gates is `5s + 8` plus the ballistic
    /// reach of the Hadamard walk (`horizon / sqrt(2)`) and a further `4s`
    /// margin, so Gaussian tails that start outside the walls never reach the
    /// edge band within the horizon.
    pub fn auto(gate_min: i64, gate_max: i64, s: f64, horizon: usize) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Parameter(format!("standard deviation must be positive, got {s}")));
        }
        if gate_max < gate_min {
            return Err(Error::Sizing(format!("gate span [{gate_min}, {gate_max}] is empty")));
        }
        let ballistic = (horizon as f64 / std::f64::consts::SQRT_2).ceil();
        let buffer = (9.0 * s).ceil() as i64 + 8 + ballistic as i64;
        Lattice::new(gate_min - buffer, gate_max + buffer)
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn size(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn contains(&self, j: i64) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// Array index of site `j`, if it lies on the lattice.
    pub fn index(&self, j: i64) -> Option<usize> {
        self.contains(j).then(|| (j - self.j_min) as usize)
    }

    pub fn site(&self, index: usize) -> i64 {
        self.j_min + index as i64
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.j_min..=self.j_max
    }
}
