use num_complex::Complex64;

use crate::geometry::VecN;

/// A point of the one-point compactification of R^n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedPoint {
    Finite(VecN),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(&self) -> Option<VecN> {
        match self {
            ExtendedPoint::Finite(v) => Some(*v),
            ExtendedPoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.is_finite() {
            ExtendedPoint::Finite(VecN::from_complex(z))
        } else {
            ExtendedPoint::Infinity
        }
    }

    /// Non-finite coordinates collapse to `∞`.
    pub fn from_vec(v: VecN) -> Self {
        if v.is_finite() {
            ExtendedPoint::Finite(v)
        } else {
            ExtendedPoint::Infinity
        }
    }
}

impl From<VecN> for ExtendedPoint {
    fn from(v: VecN) -> Self {
        ExtendedPoint::from_vec(v)
    }
}

/// Chordal distance, `2|x-y| / sqrt((1+|x|²)(1+|y|²))`, with `∞` at distance
/// `2 / sqrt(1+|x|²)` from `x`.
pub fn chordal(a: &ExtendedPoint, b: &ExtendedPoint) -> f64 {
    match (a, b) {
        (ExtendedPoint::Infinity, ExtendedPoint::Infinity) => 0.0,
        (ExtendedPoint::Finite(x), ExtendedPoint::Infinity)
        | (ExtendedPoint::Infinity, ExtendedPoint::Finite(x)) => 2.0 / (1.0 + x.norm_sq()).sqrt(),
        (ExtendedPoint::Finite(x), ExtendedPoint::Finite(y)) => {
            2.0 * x.dist(y) / ((1.0 + x.norm_sq()) * (1.0 + y.norm_sq())).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_is_bounded_and_symmetric() {
        let a = ExtendedPoint::Finite(VecN::new2(1e8, 0.0));
        let b = ExtendedPoint::Infinity;
        let c = ExtendedPoint::Finite(VecN::new2(0.0, 0.0));
        assert!(chordal(&a, &b) < 3e-8);
        assert!((chordal(&c, &b) - 2.0).abs() < 1e-15);
        assert_eq!(chordal(&a, &c), chordal(&c, &a));
        assert!(chordal(&a, &c) <= 2.0);
    }

    #[test]
    fn nan_becomes_infinity() {
        assert!(ExtendedPoint::from_complex(Complex64::new(f64::INFINITY, 0.0)).is_infinite());
    }
}
