use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// A point or vector in R^2 or R^3.
///
/// Stored inline so that grids of points never allocate per element.
#[derive(Clone, Copy, PartialEq)]
pub struct VecN {
    dim: usize,
    c: [f64; 3],
}

impl VecN {
    pub fn new2(x: f64, y: f64) -> Self {
        VecN {
            dim: 2,
            c: [x, y, 0.0],
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        VecN {
            dim: 3,
            c: [x, y, z],
        }
    }

    /// Panics unless `s.len()` is 2 or 3.
    pub fn from_slice(s: &[f64]) -> Self {
        match s.len() {
            2 => Self::new2(s[0], s[1]),
            3 => Self::new3(s[0], s[1], s[2]),
            n => panic!("VecN supports dimension 2 or 3, got {n}"),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "VecN supports dimension 2 or 3");
        VecN { dim, c: [0.0; 3] }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.c[i] = 1.0;
        v
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new2(z.re, z.im)
    }

    /// Interprets the first two coordinates as a complex number.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.c[0], self.c[1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn dot(&self, o: &VecN) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        (0..self.dim).map(|i| self.c[i] * o.c[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn dist(&self, o: &VecN) -> f64 {
        (*self - *o).norm()
    }

    pub fn scale(&self, s: f64) -> VecN {
        let mut r = *self;
        for i in 0..self.dim {
            r.c[i] *= s;
        }
        r
    }

    /// Unit vector in the same direction; the zero vector is returned unchanged.
    pub fn normalized(&self) -> VecN {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            self.scale(1.0 / n)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn cross(&self, o: &VecN) -> VecN {
        assert!(self.dim == 3 && o.dim == 3);
        let a = &self.c;
        let b = &o.c;
        VecN::new3(
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )
    }
}

impl fmt::Debug for VecN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

impl Index<usize> for VecN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.dim);
        &self.c[i]
    }
}

impl IndexMut<usize> for VecN {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.dim);
        &mut self.c[i]
    }
}

impl Add for VecN {
    type Output = VecN;
    fn add(self, o: VecN) -> VecN {
        debug_assert_eq!(self.dim, o.dim);
        let mut r = self;
        for i in 0..3 {
            r.c[i] += o.c[i];
        }
        r
    }
}

impl AddAssign for VecN {
    fn add_assign(&mut self, o: VecN) {
        *self = *self + o;
    }
}

impl Sub for VecN {
    type Output = VecN;
    fn sub(self, o: VecN) -> VecN {
        debug_assert_eq!(self.dim, o.dim);
        let mut r = self;
        for i in 0..3 {
            r.c[i] -= o.c[i];
        }
        r
    }
}

impl SubAssign for VecN {
    fn sub_assign(&mut self, o: VecN) {
        *self = *self - o;
    }
}

impl Neg for VecN {
    type Output = VecN;
    fn neg(self) -> VecN {
        self.scale(-1.0)
    }
}

impl Mul<VecN> for f64 {
    type Output = VecN;
    fn mul(self, v: VecN) -> VecN {
        v.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        let z = Complex64::new(0.25, -3.0);
        assert_eq!(VecN::from_complex(z).to_complex(), z);
    }

    #[test]
    fn cross_is_orthogonal() {
        let a = VecN::new3(1.0, 2.0, 3.0);
        let b = VecN::new3(-0.5, 0.1, 4.0);
        let c = a.cross(&b);
        assert!(c.dot(&a).abs() < 1e-12 && c.dot(&b).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_keeps_dimension() {
        let a = VecN::new2(1.0, 2.0);
        let b = a + a.scale(2.0) - VecN::new2(3.0, 6.0);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.norm(), 0.0);
    }
}
