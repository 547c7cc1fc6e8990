use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{Lattice, VecN};

/// Distance below which a point is treated as a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Truncated lattice sum with an a-priori bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WpValue {
    /// `None` at a pole.
    pub value: Option<Complex64>,
    pub tail_bound: f64,
}

/// Weierstrass ℘ for a planar lattice, summed over `|w| <= radius`.
///
/// Lattice points are paired `w, -w` so each term decays like `|w|^-4`.
#[derive(Clone, Debug)]
pub struct WeierstrassP {
    lattice: Lattice,
    radius: f64,
    half: Arc<Vec<Complex64>>,
}

const CHUNK: usize = 4096;

impl WeierstrassP {
    pub fn new(lattice: Lattice, radius: f64) -> Self {
        assert!(
            lattice.dim() == 2 && lattice.rank() == 2,
            "℘ needs a rank-2 planar lattice"
        );
        let half = Arc::new(half_lattice(&lattice, radius));
        WeierstrassP {
            lattice,
            radius,
            half,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Bound on the discarded part `Σ_{|w|>N}` at `z`.
    pub fn tail_bound(&self, z: Complex64) -> f64 {
        tail_bound(&self.lattice, self.radius, z)
    }

    /// Unreduced truncated sum at `z`.
    pub fn sum(&self, z: Complex64) -> WpValue {
        if self.lattice.contains(VecN::from_complex(z), POLE_TOL) {
            return WpValue {
                value: None,
                tail_bound: 0.0,
            };
        }
        let z2 = z * z;
        let chunks: Vec<Complex64> = self
            .half
            .par_chunks(CHUNK)
            .map(|c| {
                c.iter()
                    .map(|w| {
                        let w2 = w * w;
                        let d = w2 - z2;
                        (6.0 * w2 * z2 - 2.0 * z2 * z2) / (w2 * d * d)
                    })
                    .sum::<Complex64>()
            })
            .collect();
        let s: Complex64 = chunks.iter().sum();
        WpValue {
            value: Some(1.0 / z2 + s),
            tail_bound: self.tail_bound(z),
        }
    }

    /// ℘ at `z` after reduction modulo the lattice.
    pub fn eval(&self, z: Complex64) -> WpValue {
        self.sum(self.reduce(z))
    }

    pub fn reduce(&self, z: Complex64) -> Complex64 {
        self.lattice.reduce(VecN::from_complex(z)).to_complex()
    }

    /// ℘'(z) = -2 Σ (z-w)^-3, paired and reduced. `None` at a pole.
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let z = self.reduce(z);
        if z.norm() <= POLE_TOL {
            return None;
        }
        let z2 = z * z;
        let chunks: Vec<Complex64> = self
            .half
            .par_chunks(CHUNK)
            .map(|c| {
                c.iter()
                    .map(|w| {
                        let d = z2 - w * w;
                        (2.0 * z2 * z + 6.0 * z * w * w) / (d * d * d)
                    })
                    .sum::<Complex64>()
            })
            .collect();
        let s: Complex64 = chunks.iter().sum();
        Some(-2.0 * (1.0 / (z2 * z) + s))
    }
}

/// One representative of each pair `±w` of nonzero lattice points with
/// `|w| <= radius`, in a fixed order.
fn half_lattice(lattice: &Lattice, radius: f64) -> Vec<Complex64> {
    let w1 = lattice.basis()[0];
    let w2 = lattice.basis()[1];
    let bound = lattice.index_bound(radius);
    let (ba, bb) = (bound[0], bound[1]);
    let mut out = Vec::new();
    for b in 0..=bb {
        for a in -ba..=ba {
            if b == 0 && a <= 0 {
                continue;
            }
            let p = w1.scale(a as f64) + w2.scale(b as f64);
            if p.norm() <= radius {
                out.push(p.to_complex());
            }
        }
    }
    out
}

fn tail_bound(lattice: &Lattice, radius: f64, z: Complex64) -> f64 {
    let area = lattice.covolume();
    let r0 = radius - lattice.cell_diameter();
    let az = z.norm();
    if r0 <= az {
        return f64::INFINITY;
    }
    let q = az / r0;
    3.0 * std::f64::consts::PI * az * az / (area * r0 * r0) * (1.0 + q * q)
        / ((1.0 - q * q) * (1.0 - q * q))
}

/// Truncated ℘ sum `1/z² + Σ_{0<|w|<=n} [(z-w)^-2 - w^-2]` without reduction,
/// with its tail bound.
pub fn weierstrass_p(z: Complex64, lattice: &Lattice, n: f64) -> WpValue {
    assert!(n >= 5.0, "truncation radius must be at least 5");
    WeierstrassP::new(lattice.clone(), n).sum(z)
}
