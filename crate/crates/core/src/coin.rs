//! Coin operators acting on the walker's spin.
//!
//! Every coin used here is drawn from the three-parameter family
//!
//! ```text
//! C(q, θ, φ) = [[ √q,            √(1-q) e^{iθ}     ],
//!               [ √(1-q) e^{iφ}, -√q e^{i(θ+φ)}    ]]
//! ```
//!
//! with `q ∈ [0, 1]` and `θ, φ ∈ [-π, π]`. The Hadamard coin is
//! `(1/2, 0, 0)` and the NOT coin σ_x is `(0, 0, 0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinParams {
    pub q: f64,
    pub theta: f64,
    pub phi: f64,
}

impl CoinParams {
    pub const HADAMARD: CoinParams = CoinParams {
        q: 0.5,
        theta: 0.0,
        phi: 0.0,
    };

    pub const SIGMA_X: CoinParams = CoinParams {
        q: 0.0,
        theta: 0.0,
        phi: 0.0,
    };

    pub fn new(q: f64, theta: f64, phi: f64) -> Result<Self> {
        let p = CoinParams { q, theta, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Parameter(format!("coin bias q = {} outside [0, 1]", self.q)));
        }
        for (name, v) in [("theta", self.theta), ("phi", self.phi)] {
            if !(-PI..=PI).contains(&v) {
                return Err(Error::Parameter(format!("coin phase {name} = {v} outside [-pi, pi]")));
            }
        }
        Ok(())
    }
}

/// Wraps an angle into `[-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if (-PI..=PI).contains(&a) {
        a
    } else {
        let w = (a + PI).rem_euclid(2.0 * PI) - PI;
        if w < -PI {
            w + 2.0 * PI
        } else {
            w
        }
    }
}

/// 2×2 matrix acting on `(up, down)`, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinMatrix(pub [[Complex64; 2]; 2]);

impl CoinMatrix {
    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        CoinMatrix([[h, h], [h, -h]])
    }

    pub fn sigma_x() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        CoinMatrix([[zero, one], [one, zero]])
    }

    #[inline(always)]
    pub fn apply(&self, up: Complex64, down: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[0][0] * up + m[0][1] * down, m[1][0] * up + m[1][1] * down)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        CoinMatrix([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn mul(&self, other: &CoinMatrix) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        CoinMatrix(out)
    }

    /// Largest entry-wise deviation of `M†M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.0[i][j] - target).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &CoinMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }
}

/// Realizes the coin for `params`.
pub fn make_coin(params: CoinParams) -> Result<CoinMatrix> {
    params.validate()?;
    Ok(coin_unchecked(params))
}

/// Same as [`make_coin`] for parameters already known to be in range.
pub(crate) fn coin_unchecked(p: CoinParams) -> CoinMatrix {
    let a = p.q.sqrt();
    let b = (1.0 - p.q).max(0.0).sqrt();
    let et = Complex64::from_polar(1.0, p.theta);
    let ep = Complex64::from_polar(1.0, p.phi);
    CoinMatrix([
        [Complex64::new(a, 0.0), et * b],
        [ep * b, -(et * ep) * a],
    ])
}
