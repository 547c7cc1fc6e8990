use super::{MatN, VecN};
use crate::error::{Error, Result};

/// A discrete translation lattice of rank `n` or `n-1` embedded in R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<VecN>,
    gram_inv: Vec<Vec<f64>>,
    /// Unit normal to the span when the rank is `n-1`.
    complement: Option<VecN>,
}

impl Lattice {
    pub fn new(basis: Vec<VecN>, dim: usize) -> Result<Self> {
        let k = basis.len();
        if !(dim == 2 || dim == 3) || !(k == dim || k + 1 == dim) {
            return Err(Error::DegenerateLattice);
        }
        if basis.iter().any(|w| w.dim() != dim || !w.is_finite()) {
            return Err(Error::DegenerateLattice);
        }
        let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| basis[i].dot(&basis[j]));
        let scale = basis.iter().map(|w| w.norm_sq()).fold(0.0, f64::max);
        if gram.determinant().abs() <= 1e-12 * scale.powi(k as i32) {
            return Err(Error::DegenerateLattice);
        }
        let gi = gram.try_inverse().ok_or(Error::DegenerateLattice)?;
        let gram_inv = (0..k)
            .map(|i| (0..k).map(|j| gi[(i, j)]).collect())
            .collect();
        let complement = if k + 1 == dim {
            Some(match dim {
                2 => VecN::new2(-basis[0][1], basis[0][0]).normalized(),
                _ => basis[0].cross(&basis[1]).normalized(),
            })
        } else {
            None
        };
        Ok(Lattice {
            dim,
            basis,
            gram_inv,
            complement,
        })
    }

    /// `Z[i]` as a planar lattice.
    pub fn gaussian() -> Self {
        Self::new(vec![VecN::new2(1.0, 0.0), VecN::new2(0.0, 1.0)], 2).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VecN] {
        &self.basis
    }

    pub fn complement(&self) -> Option<VecN> {
        self.complement
    }

    /// Real coefficients of the orthogonal projection of `x` onto the span.
    pub fn coords(&self, x: VecN) -> Vec<f64> {
        let k = self.rank();
        let b: Vec<f64> = self.basis.iter().map(|w| w.dot(&x)).collect();
        (0..k)
            .map(|i| (0..k).map(|j| self.gram_inv[i][j] * b[j]).sum())
            .collect()
    }

    pub fn combine(&self, c: &[f64]) -> VecN {
        let mut v = VecN::zeros(self.dim);
        for (w, ci) in self.basis.iter().zip(c) {
            v += w.scale(*ci);
        }
        v
    }

    /// Component of `x` orthogonal to the span (zero for full rank).
    pub fn off_span(&self, x: VecN) -> VecN {
        match self.complement {
            Some(nrm) => nrm.scale(nrm.dot(&x)),
            None => VecN::zeros(self.dim),
        }
    }

    /// Lattice vector closest to `x`.
    pub fn nearest(&self, x: VecN) -> VecN {
        let c: Vec<f64> = self.coords(x).iter().map(|c| c.round()).collect();
        let k = self.rank();
        let mut best = self.combine(&c);
        let mut best_d = (x - best).norm_sq();
        let offsets = 3usize.pow(k as u32);
        for code in 0..offsets {
            let mut cc = c.clone();
            let mut t = code;
            for ci in cc.iter_mut() {
                *ci += (t % 3) as f64 - 1.0;
                t /= 3;
            }
            let p = self.combine(&cc);
            let d = (x - p).norm_sq();
            if d < best_d {
                best_d = d;
                best = p;
            }
        }
        best
    }

    /// Whether `x` lies within `tol` of a lattice vector.
    pub fn contains(&self, x: VecN, tol: f64) -> bool {
        x.dist(&self.nearest(x)) <= tol
    }

    /// Representative of `x` modulo the lattice closest to the origin
    /// (within the span; the off-span component is kept).
    pub fn reduce(&self, x: VecN) -> VecN {
        x - self.nearest(x)
    }

    /// Sum of basis lengths: diameter bound of the fundamental parallelotope.
    pub fn cell_diameter(&self) -> f64 {
        self.basis.iter().map(|w| w.norm()).sum()
    }

    pub fn min_basis_norm(&self) -> f64 {
        self.basis
            .iter()
            .map(|w| w.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Area or volume of the fundamental parallelotope within the span.
    pub fn covolume(&self) -> f64 {
        let k = self.rank();
        let g = nalgebra::DMatrix::from_fn(k, k, |i, j| self.basis[i].dot(&self.basis[j]));
        g.determinant().sqrt()
    }

    /// Whether the orthogonal map `r` maps the lattice onto itself.
    pub fn preserved_by(&self, r: &MatN, tol: f64) -> bool {
        self.basis.iter().all(|w| {
            let rw = r.apply(*w);
            self.off_span(rw).norm() <= tol && self.contains(rw, tol)
        })
    }

    /// Per-coefficient bound `|c_i| <= rho * sqrt((G^-1)_ii)` for lattice
    /// vectors of norm at most `rho`.
    pub fn index_bound(&self, rho: f64) -> Vec<i64> {
        (0..self.rank())
            .map(|i| (rho * self.gram_inv[i][i].sqrt()).floor() as i64)
            .collect()
    }

    /// All lattice vectors of norm at most `rho`, sorted by norm then
    /// lexicographically by coefficients.
    pub fn points_within(&self, rho: f64) -> Vec<VecN> {
        if !(rho >= 0.0) {
            return Vec::new();
        }
        let k = self.rank();
        let bound = self.index_bound(rho);
        let mut out: Vec<(f64, Vec<i64>, VecN)> = Vec::new();
        let mut idx: Vec<i64> = bound.iter().map(|b| -b).collect();
        loop {
            let c: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
            let p = self.combine(&c);
            let r = p.norm();
            if r <= rho * (1.0 + 1e-12) {
                out.push((r, idx.clone(), p));
            }
            let mut j = 0;
            loop {
                if j == k {
                    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
                    return out.into_iter().map(|t| t.2).collect();
                }
                if idx[j] < bound[j] {
                    idx[j] += 1;
                    break;
                }
                idx[j] = -bound[j];
                j += 1;
            }
        }
    }
}
