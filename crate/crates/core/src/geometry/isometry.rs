use super::{MatN, VecN, ORTH_TOL};
use crate::error::{Error, Result};

/// `x -> R x + v` with `R` orthogonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    rot: MatN,
    shift: VecN,
}

impl Isometry {
    pub fn new(rot: MatN, shift: VecN) -> Result<Self> {
        if rot.dim() != shift.dim() {
            return Err(Error::DimensionMismatch(rot.dim(), shift.dim()));
        }
        let defect = rot.orthogonality_defect();
        if !(defect <= ORTH_TOL) {
            return Err(Error::NotOrthogonal(defect));
        }
        Ok(Isometry { rot, shift })
    }

    pub fn identity(dim: usize) -> Self {
        Isometry {
            rot: MatN::identity(dim),
            shift: VecN::zeros(dim),
        }
    }

    pub fn translation(v: VecN) -> Self {
        Isometry {
            rot: MatN::identity(v.dim()),
            shift: v,
        }
    }

    pub fn linear(rot: MatN) -> Result<Self> {
        Self::new(rot, VecN::zeros(rot.dim()))
    }

    pub fn rot(&self) -> MatN {
        self.rot
    }

    pub fn shift(&self) -> VecN {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.rot.dim()
    }

    pub fn apply(&self, x: VecN) -> VecN {
        self.rot.apply(x) + self.shift
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Isometry {
            rot: rt,
            shift: -rt.apply(self.shift),
        }
    }

    pub fn is_translation(&self, tol: f64) -> bool {
        (self.rot - MatN::identity(self.dim())).max_abs() <= tol
    }

    /// `L g L^{-1}` for an invertible linear map `L`.
    ///
    /// The rotation part is only orthogonal when `L` is conformal; callers
    /// test that before relying on it.
    pub fn conjugate_by(&self, l: &MatN, l_inv: &MatN) -> Isometry {
        Isometry {
            rot: *l * self.rot * *l_inv,
            shift: l.apply(self.shift),
        }
    }
}

/// `(g1 ∘ g2)(x) = g1(g2(x))`.
pub fn compose(g1: &Isometry, g2: &Isometry) -> Result<Isometry> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch(g1.dim(), g2.dim()));
    }
    Ok(Isometry {
        rot: g1.rot * g2.rot,
        shift: g1.rot.apply(g2.shift) + g1.shift,
    })
}
