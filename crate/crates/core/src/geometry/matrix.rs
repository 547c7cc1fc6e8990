use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::VecN;

/// Square 2x2 or 3x3 real matrix stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct MatN {
    dim: usize,
    m: [[f64; 3]; 3],
}

impl MatN {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "MatN supports dimension 2 or 3");
        MatN {
            dim,
            m: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut r = Self::zeros(dim);
        for i in 0..dim {
            r.m[i][i] = 1.0;
        }
        r
    }

    pub fn scalar(dim: usize, s: f64) -> Self {
        Self::identity(dim).scale(s)
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut r = Self::zeros(d.len());
        for (i, x) in d.iter().enumerate() {
            r.m[i][i] = *x;
        }
        r
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut r = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            r.m[i][..n].copy_from_slice(row);
        }
        r
    }

    pub fn from_cols(cols: &[VecN]) -> Self {
        let n = cols.len();
        let mut r = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim(), n);
            for i in 0..n {
                r.m[i][j] = c[i];
            }
        }
        r
    }

    /// Real 2x2 representation of multiplication by `z`.
    pub fn from_complex(z: Complex64) -> Self {
        Self::from_rows(&[&[z.re, -z.im], &[z.im, z.re]])
    }

    pub fn rotation2(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_rows(&[&[c, -s], &[s, c]])
    }

    /// Rotation by `theta` about the unit vector `axis` (Rodrigues).
    pub fn rotation3(axis: VecN, theta: f64) -> Self {
        let k = axis.normalized();
        let (s, c) = theta.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (k[0], k[1], k[2]);
        Self::from_rows(&[
            &[t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            &[t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            &[t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.m[i][j] = v;
    }

    pub fn col(&self, j: usize) -> VecN {
        let mut v = VecN::zeros(self.dim);
        for i in 0..self.dim {
            v[i] = self.m[i][j];
        }
        v
    }

    pub fn apply(&self, v: VecN) -> VecN {
        assert_eq!(v.dim(), self.dim, "dimension mismatch");
        let mut r = VecN::zeros(self.dim);
        for i in 0..self.dim {
            r[i] = (0..self.dim).map(|j| self.m[i][j] * v[j]).sum();
        }
        r
    }

    pub fn transpose(&self) -> Self {
        let mut r = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                r.m[i][j] = self.m[j][i];
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = *self;
        for row in r.m.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        r
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        match self.dim {
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    /// Inverse via LU; `None` if numerically singular.
    pub fn inverse(&self) -> Option<Self> {
        let inv = self.to_dmatrix().try_inverse()?;
        let r = Self::from_dmatrix(&inv);
        r.is_finite().then_some(r)
    }

    /// Solves `self * x = b`.
    pub fn solve(&self, b: VecN) -> Option<VecN> {
        let lu = self.to_dmatrix().lu();
        let rhs = nalgebra::DVector::from_column_slice(b.as_slice());
        let x = lu.solve(&rhs)?;
        let v = VecN::from_slice(x.as_slice());
        v.is_finite().then_some(v)
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .to_dmatrix()
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn op_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// Entrywise max norm.
    pub fn max_abs(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                r = r.max(self.m[i][j].abs());
            }
        }
        r
    }

    /// `max |(MᵀM − I)_ij|`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.transpose() * *self - Self::identity(self.dim)).max_abs()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::identity(self.dim);
        let mut b = *self;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b;
            }
            b = b * b;
            e >>= 1;
        }
        r
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.m[i][j].is_finite()))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.m[i][j])
    }

    pub fn from_dmatrix(d: &DMatrix<f64>) -> Self {
        assert_eq!(d.nrows(), d.ncols());
        let mut r = Self::zeros(d.nrows());
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                r.m[i][j] = d[(i, j)];
            }
        }
        r
    }
}

impl fmt::Debug for MatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| &self.m[i][..self.dim]).collect();
        write!(f, "{rows:?}")
    }
}

impl Mul for MatN {
    type Output = MatN;
    fn mul(self, o: MatN) -> MatN {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let mut r = MatN::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                r.m[i][j] = (0..self.dim).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        r
    }
}

impl Mul<VecN> for MatN {
    type Output = VecN;
    fn mul(self, v: VecN) -> VecN {
        self.apply(v)
    }
}

impl Add for MatN {
    type Output = MatN;
    fn add(self, o: MatN) -> MatN {
        assert_eq!(self.dim, o.dim);
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }
}

impl Sub for MatN {
    type Output = MatN;
    fn sub(self, o: MatN) -> MatN {
        self + o.scale(-1.0)
    }
}
