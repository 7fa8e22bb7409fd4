//! Walker state: a two-component complex amplitude on every lattice site.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    lattice: Lattice,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
}

impl SpinorField {
    pub fn new(lattice: Lattice, up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self> {
        if up.len() != lattice.size() || down.len() != lattice.size() {
            return Err(Error::Shape(format!(
                "spinor components have {} and {} entries, lattice has {} sites",
                up.len(),
                down.len(),
                lattice.size()
            )));
        }
        Ok(SpinorField { lattice, up, down })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        SpinorField {
            lattice,
            up: vec![ZERO; lattice.size()],
            down: vec![ZERO; lattice.size()],
        }
    }

    /// Walker fully localized at site `j` with spin `spin`.
    pub fn localized(lattice: Lattice, j: i64, spin: [Complex64; 2]) -> Result<Self> {
        let i = lattice
            .index(j)
            .ok_or_else(|| Error::Sizing(format!("site {j} is not on the lattice")))?;
        let mut s = SpinorField::zeros(lattice);
        s.up[i] = spin[0];
        s.down[i] = spin[1];
        Ok(s)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn down(&self) -> &[Complex64] {
        &self.down
    }

    pub(crate) fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.up, &mut self.down)
    }

    /// Amplitudes `(up, down)` at site `j`, zero off the lattice.
    pub fn at(&self, j: i64) -> (Complex64, Complex64) {
        match self.lattice.index(j) {
            Some(i) => (self.up[i], self.down[i]),
            None => (ZERO, ZERO),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Parameter("cannot normalize a zero state".into()));
        }
        let k = 1.0 / n.sqrt();
        self.up.iter_mut().chain(self.down.iter_mut()).for_each(|a| *a *= k);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinorField) -> Result<Complex64> {
        self.check_same_lattice(other)?;
        Ok(self
            .up
            .iter()
            .zip(&other.up)
            .chain(self.down.iter().zip(&other.down))
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: Complex64) -> SpinorField {
        SpinorField {
            lattice: self.lattice,
            up: self.up.iter().map(|a| a * factor).collect(),
            down: self.down.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest amplitude difference over both components.
    pub fn max_abs_diff(&self, other: &SpinorField) -> Result<f64> {
        self.check_same_lattice(other)?;
        Ok(self
            .up
            .iter()
            .zip(&other.up)
            .chain(self.down.iter().zip(&other.down))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same_lattice(&self, other: &SpinorField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::Shape(format!(
                "lattices differ: {:?} vs {:?}",
                self.lattice, other.lattice
            )));
        }
        Ok(())
    }
}

/// Spin state `cos α |↑⟩ + e^{iβ} sin α |↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochSpin {
    pub alpha: f64,
    pub beta: f64,
}

impl BlochSpin {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        // Grid points are generated as k·π/20 and can land a few ulps outside.
        let eps = 1e-12;
        if !(-eps..=FRAC_PI_2 + eps).contains(&alpha) {
            return Err(Error::Parameter(format!("alpha = {alpha} outside [0, pi/2]")));
        }
        if !(-eps..=2.0 * PI + eps).contains(&beta) {
            return Err(Error::Parameter(format!("beta = {beta} outside [0, 2pi]")));
        }
        Ok(BlochSpin { alpha, beta })
    }

    pub const UP: BlochSpin = BlochSpin {
        alpha: 0.0,
        beta: 0.0,
    };

    /// `(|↑⟩ + i|↓⟩)/√2`, which splits into two packets of equal weight.
    pub const PLUS_I: BlochSpin = BlochSpin {
        alpha: std::f64::consts::FRAC_PI_4,
        beta: FRAC_PI_2,
    };

    /// `(|↑⟩ - i|↓⟩)/√2`.
    pub const MINUS_I: BlochSpin = BlochSpin {
        alpha: std::f64::consts::FRAC_PI_4,
        beta: 3.0 * FRAC_PI_2,
    };

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.alpha.cos(), 0.0),
            Complex64::from_polar(self.alpha.sin(), self.beta),
        ]
    }
}

/// Discrete Gaussian envelope `f(j) = A exp(-(j - center)² / 4s²) / (2π s²)^{1/4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub s: f64,
    pub center: i64,
}

impl GaussianSpec {
    pub fn new(s: f64, center: i64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Parameter(format!("standard deviation must be positive, got {s}")));
        }
        Ok(GaussianSpec { s, center })
    }

    /// Unnormalized continuum envelope at (possibly fractional) offset `x` from the center.
    pub fn profile(&self, x: f64) -> f64 {
        (-(x * x) / (4.0 * self.s * self.s)).exp() / (2.0 * PI * self.s * self.s).powf(0.25)
    }

    /// `A` such that the truncated sum of `|f(j)|²` over `lattice` is one.
    pub fn norm_constant(&self, lattice: &Lattice) -> f64 {
        let sum: f64 = lattice
            .sites()
            .map(|j| self.profile((j - self.center) as f64).powi(2))
            .sum();
        1.0 / sum.sqrt()
    }

    /// Normalized envelope values on every site of `lattice`.
    pub fn envelope(&self, lattice: &Lattice) -> Vec<f64> {
        let a = self.norm_constant(lattice);
        lattice
            .sites()
            .map(|j| a * self.profile((j - self.center) as f64))
            .collect()
    }
}

/// Product state of a Gaussian envelope and a spin.
///
/// The lattice must contain `center ± 5s`.
pub fn gaussian_state(spec: GaussianSpec, spin: BlochSpin, lattice: &Lattice) -> Result<SpinorField> {
    let reach = (5.0 * spec.s).ceil() as i64;
    if !lattice.contains(spec.center - reach) || !lattice.contains(spec.center + reach) {
        return Err(Error::Sizing(format!(
            "lattice [{}, {}] cannot hold center {} +/- 5s = {}",
            lattice.j_min(),
            lattice.j_max(),
            spec.center,
            reach
        )));
    }
    let [cu, cd] = spin.amplitudes();
    let f = spec.envelope(lattice);
    let up = f.iter().map(|&v| cu * v).collect();
    let down = f.iter().map(|&v| cd * v).collect();
    SpinorField::new(*lattice, up, down)
}
