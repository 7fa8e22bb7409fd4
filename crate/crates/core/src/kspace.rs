//! Exact Hadamard-walk evolution in momentum space and the split-Gaussian
//! approximation derived from it.
//!
//! With `ψ̃(k) = Σ_j ψ(j) e^{ikj}` one step of the homogeneous walk is
//! `ψ̃(k, t+1) = M_k ψ̃(k, t)` where
//!
//! ```text
//! M_k = 1/√2 [[ e^{ik},  e^{ik} ],
//!             [ e^{-ik}, -e^{-ik} ]]
//! ```
//!
//! has eigenvalues `λ± = ±e^{±iω}` with `sin ω = sin k / √2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::spinor::{BlochSpin, GaussianSpec, SpinorField};

/// Right-moving eigenvector of the Hadamard coin (eigenvalue +1),
/// `[1 + √2, 1] / √(2(2 + √2)) = [cos π/8, sin π/8]`.
pub const R_SPIN: [Complex64; 2] = [
    Complex64::new(0.923_879_532_511_286_7, 0.0),
    Complex64::new(0.382_683_432_365_089_8, 0.0),
];

/// Left-moving eigenvector of the Hadamard coin (eigenvalue -1),
/// `[1 - √2, 1] / √(2(2 - √2)) = [-sin π/8, cos π/8]`.
pub const L_SPIN: [Complex64; 2] = [
    Complex64::new(-0.382_683_432_365_089_8, 0.0),
    Complex64::new(0.923_879_532_511_286_7, 0.0),
];

/// Probability below which a site counts as empty for the domain check.
const SUPPORT_THRESHOLD: f64 = 1e-24;

/// Eigen-decomposition of `M_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMode {
    pub k: f64,
    pub omega: f64,
    /// `[λ+, λ-]`.
    pub lambda: [Complex64; 2],
    /// `[u+, u-]`, unit norm.
    pub u: [[Complex64; 2]; 2],
}

impl KMode {
    /// `λ+^t u+ u+† + λ-^t u- u-†`.
    pub fn power(&self, t: usize) -> CoinMatrix {
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for s in 0..2 {
            let l = Complex64::from_polar(1.0, self.lambda[s].arg() * t as f64);
            let v = self.u[s];
            for (i, row) in m.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell += l * v[i] * v[j].conj();
                }
            }
        }
        CoinMatrix(m)
    }
}

/// The one-step propagator of mode `k`.
pub fn mk_matrix(k: f64) -> CoinMatrix {
    let e = Complex64::from_polar(FRAC_1_SQRT_2, k);
    let ec = e.conj();
    CoinMatrix([[e, e], [ec, -ec]])
}

pub fn mk_eigensystem(k: f64) -> KMode {
    let omega = (k.sin() / SQRT_2).asin();
    let lambda = [
        Complex64::from_polar(1.0, omega),
        -Complex64::from_polar(1.0, -omega),
    ];
    let c = k.cos();
    let root = (1.0 + c * c).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let vec = |sign: f64| {
        let top = one + sign * SQRT_2 * Complex64::from_polar(1.0, k + sign * omega);
        let norm = (2.0 * (1.0 + c * c + sign * c * root)).sqrt();
        [top / norm, one / norm]
    };
    KMode {
        k,
        omega,
        lambda,
        u: [vec(1.0), vec(-1.0)],
    }
}

/// Sites from either edge to the outermost site with non-negligible probability.
fn edge_clearance(state: &SpinorField) -> usize {
    let n = state.lattice().size();
    let occupied = |i: usize| state.up()[i].norm_sqr() + state.down()[i].norm_sqr() > SUPPORT_THRESHOLD;
    let first = (0..n).find(|&i| occupied(i));
    let last = (0..n).rev().find(|&i| occupied(i));
    match (first, last) {
        (Some(a), Some(b)) => a.min(n - 1 - b),
        _ => n,
    }
}

/// `t` steps of the homogeneous Hadamard walk, computed mode by mode.
///
/// The transform treats the lattice as periodic, so the result matches
/// the open-lattice engine only while nothing wraps around. States whose
/// support comes within `t + 5` sites of an edge are rejected.
pub fn fft_evolve(state0: &SpinorField, t: usize) -> Result<SpinorField> {
    let clearance = edge_clearance(state0);
    if clearance < t + 5 {
        return Err(Error::OracleDomain(format!(
            "support is {clearance} sites from the lattice edge, {t} steps need at least {}",
            t + 5
        )));
    }
    let lattice = *state0.lattice();
    let n = lattice.size();
    let mut planner = FftPlanner::<f64>::new();
    // rustfft's inverse transform carries e^{+i...}, matching ψ̃(k) = Σ ψ(j) e^{ikj}.
    let to_k = planner.plan_fft_inverse(n);
    let to_j = planner.plan_fft_forward(n);

    let mut up = state0.up().to_vec();
    let mut down = state0.down().to_vec();
    to_k.process(&mut up);
    to_k.process(&mut down);
    // The e^{ik j_min} offset between lattice index and site cancels on the way back.
    for m in 0..n {
        let k = 2.0 * PI * m as f64 / n as f64;
        let p = mk_eigensystem(k).power(t);
        let (a, b) = p.apply(up[m], down[m]);
        up[m] = a;
        down[m] = b;
    }
    to_j.process(&mut up);
    to_j.process(&mut down);
    let scale = 1.0 / n as f64;
    up.iter_mut().chain(down.iter_mut()).for_each(|a| *a *= scale);
    SpinorField::new(lattice, up, down)
}

/// Weights of a Gaussian spinor on the right- and left-moving spin states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitState {
    pub gaussian: GaussianSpec,
    pub h_plus: Complex64,
    pub h_minus: Complex64,
}

impl SplitState {
    pub fn new(gaussian: GaussianSpec, spin: BlochSpin) -> Self {
        let [a, b] = spin.amplitudes();
        SplitState {
            gaussian,
            h_plus: R_SPIN[0].conj() * a + R_SPIN[1].conj() * b,
            h_minus: L_SPIN[0].conj() * a + L_SPIN[1].conj() * b,
        }
    }

    /// `h+ R f(j - c - d) + sign h- L f(j - c + d)`, normalized on `lattice`,
    /// with sign `(-1)^parity`.
    pub fn field(&self, lattice: &Lattice, d: f64, parity: usize) -> Result<SpinorField> {
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        let g = &self.gaussian;
        let (mut up, mut down) = (Vec::with_capacity(lattice.size()), Vec::with_capacity(lattice.size()));
        for j in lattice.sites() {
            let x = (j - g.center) as f64;
            let r = self.h_plus * g.profile(x - d);
            let l = self.h_minus * (sign * g.profile(x + d));
            up.push(R_SPIN[0] * r + L_SPIN[0] * l);
            down.push(R_SPIN[1] * r + L_SPIN[1] * l);
        }
        let mut f = SpinorField::new(*lattice, up, down)?;
        f.normalize()?;
        Ok(f)
    }
}

/// Split-packet approximation to `t` free Hadamard steps: the right- and
/// left-moving spin components ride rigidly at `±t/√2`, ignoring dispersion.
pub fn analytic_split_state(
    gaussian: GaussianSpec,
    spin: BlochSpin,
    t: usize,
    lattice: &Lattice,
) -> Result<SpinorField> {
    SplitState::new(gaussian, spin).field(lattice, t as f64 / SQRT_2, t)
}
