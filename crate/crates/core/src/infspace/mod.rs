//! Mean radii, homogeneity, generalized derivatives and the chain-rule,
//! inverse and asymptotic-representation checks.

mod derivative;
mod measure;
mod sphere;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use derivative::{
    asymptotic_rep_check, chain_rule_check, decay_table_csv, fit_homogeneity,
    generalized_derivative, generalized_derivative_with, inverse_formula_check,
    mean_radius_profile, ChainRuleReport, DecayRow, GeneralizedDerivative, HomogeneityFit,
    InverseReport, MeanRadiusProfile, POOR_FIT, SIMPLE_TOL,
};
pub use measure::{
    homogeneous_image_volume, image_ball_measure, image_ball_measure_seeded, jacobian_integral,
    local_degree, mean_radius, mean_radius_checked, monte_carlo_image_volume, unit_ball_volume,
    ImageMeasure, MeanRadiusMethod, METHOD_DISAGREEMENT,
};
pub use sphere::{solid_angle_degree, winding_2d, winding_3d, SphereGrid};

use crate::error::{Error, Result};
use crate::geometry::{Domain, VecN};
use crate::numeric::jacobian;

/// A map of R^n usable from parallel code.
pub type Map<'a> = dyn Fn(VecN) -> VecN + Sync + 'a;

/// Values of a map on a sphere grid, extended to R^n by
/// `g(ρu) = ρ^d g(u)`.
#[derive(Clone, Debug)]
pub struct SampledSphereMap {
    pub grid: SphereGrid,
    pub values: Vec<VecN>,
    pub d: f64,
    /// Scale `t` at which the values were sampled.
    pub scale_tag: f64,
}

impl SampledSphereMap {
    /// Samples `g` on `grid`.
    pub fn sample(g: &Map, grid: &SphereGrid, d: f64) -> Self {
        SampledSphereMap {
            grid: grid.clone(),
            values: grid.nodes().iter().map(|u| g(*u)).collect(),
            d,
            scale_tag: 0.0,
        }
    }

    /// `ρ^d g(u_i)`.
    pub fn extend(&self, i: usize, rho: f64) -> VecN {
        self.values[i].scale(rho.powf(self.d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilatationReport {
    /// `max(k_outer, k_inner)`.
    pub k: f64,
    /// `max ‖J‖^n / det J`.
    pub k_outer: f64,
    /// `max det J / l(J)^n`.
    pub k_inner: f64,
    pub used: usize,
    /// Samples with `det J <= 1e-14`.
    pub skipped: usize,
}

/// Distortion estimate from finite-difference Jacobians at random points of
/// `region`.
pub fn dilatation_estimate(
    f: &Map,
    region: &Domain,
    samples: usize,
    seed: u64,
) -> Result<DilatationReport> {
    let n = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k_outer: f64 = 1.0;
    let mut k_inner: f64 = 1.0;
    let mut used = 0;
    let mut skipped = 0;
    let mut worst_det = f64::INFINITY;
    for _ in 0..samples {
        let mut x = VecN::zeros(n);
        for k in 0..n {
            x[k] = rng.gen_range(region.lo[k]..=region.hi[k]);
        }
        let j = jacobian(f, x);
        let det = j.det();
        if !(det > 1e-14) {
            skipped += 1;
            worst_det = worst_det.min(det);
            continue;
        }
        let sv = j.singular_values();
        k_outer = k_outer.max(sv[0].powi(n as i32) / det);
        k_inner = k_inner.max(det / sv[n - 1].powi(n as i32));
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateJacobian(worst_det));
    }
    Ok(DilatationReport {
        k: k_outer.max(k_inner),
        k_outer,
        k_inner,
        used,
        skipped,
    })
}
