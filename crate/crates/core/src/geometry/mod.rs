//! Points, conformal-linear maps, isometries, lattices and discrete
//! isometry groups.

mod conformal;
mod group;
mod isometry;
mod lattice;
mod matrix;
mod vector;

pub use conformal::{ConformalLinear, ORTH_TOL};
pub use group::{
    check_group_invariance, check_linear_invariance, extract_linear_part, orthogonal_order,
    point_group_order, words, DiscreteGroup, MEMBERSHIP_TOL,
};
pub use isometry::{compose, Isometry};
pub use lattice::Lattice;
pub use matrix::MatN;
pub use vector::VecN;

/// `lcm(a, b)` for positive integers.
pub fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: VecN,
    pub hi: VecN,
}

impl Domain {
    pub fn new(lo: VecN, hi: VecN) -> Self {
        assert_eq!(lo.dim(), hi.dim());
        Domain { lo, hi }
    }

    /// The cube `[-a, a]^n`.
    pub fn cube(dim: usize, a: f64) -> Self {
        let mut lo = VecN::zeros(dim);
        let mut hi = VecN::zeros(dim);
        for i in 0..dim {
            lo[i] = -a;
            hi[i] = a;
        }
        Domain { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    /// Regular grid with about `samples` points, endpoints included.
    pub fn grid(&self, samples: usize) -> Vec<VecN> {
        let n = self.dim();
        let per = ((samples.max(2) as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
        let total = per.pow(n as u32);
        (0..total)
            .map(|code| {
                let mut p = VecN::zeros(n);
                let mut t = code;
                for i in 0..n {
                    let k = t % per;
                    t /= per;
                    let s = k as f64 / (per - 1) as f64;
                    p[i] = self.lo[i] + s * (self.hi[i] - self.lo[i]);
                }
                p
            })
            .collect()
    }
}
