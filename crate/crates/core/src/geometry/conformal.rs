use num_complex::Complex64;

use super::{MatN, VecN};
use crate::error::{Error, Result};

/// Orthogonality tolerance for constructed inputs.
pub const ORTH_TOL: f64 = 1e-12;

/// The map `x -> λ O x` with `λ > 0` and `O` orthogonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalLinear {
    scale: f64,
    orth: MatN,
}

impl ConformalLinear {
    pub fn new(scale: f64, orth: MatN) -> Result<Self> {
        Self::with_tolerance(scale, orth, ORTH_TOL)
    }

    pub fn with_tolerance(scale: f64, orth: MatN, tol: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NonPositiveScale(scale));
        }
        let defect = orth.orthogonality_defect();
        if !(defect <= tol) {
            return Err(Error::NotOrthogonal(defect));
        }
        Ok(ConformalLinear { scale, orth })
    }

    pub fn identity(dim: usize) -> Self {
        ConformalLinear {
            scale: 1.0,
            orth: MatN::identity(dim),
        }
    }

    pub fn scaling(dim: usize, lambda: f64) -> Self {
        Self::new(lambda, MatN::identity(dim)).expect("positive scale")
    }

    /// Multiplication by a nonzero complex number, as a planar map.
    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        Self::new(r, MatN::from_complex(z / r)).expect("nonzero complex multiplier")
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn orth(&self) -> MatN {
        self.orth
    }

    pub fn dim(&self) -> usize {
        self.orth.dim()
    }

    pub fn matrix(&self) -> MatN {
        self.orth.scale(self.scale)
    }

    pub fn apply(&self, x: VecN) -> VecN {
        self.orth.apply(x).scale(self.scale)
    }

    pub fn inverse(&self) -> Self {
        ConformalLinear {
            scale: 1.0 / self.scale,
            orth: self.orth.transpose(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        ConformalLinear {
            scale: self.scale * other.scale,
            orth: self.orth * other.orth,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        ConformalLinear {
            scale: self.scale.powi(k as i32),
            orth: self.orth.pow(k),
        }
    }

    /// Applies `M^{-k}` without forming the power.
    pub fn apply_inverse_pow(&self, x: VecN, k: u32) -> VecN {
        let ot = self.orth.transpose();
        let mut y = x;
        for _ in 0..k {
            y = ot.apply(y);
        }
        y.scale(self.scale.powi(-(k as i32)))
    }
}
