use num_complex::Complex64;

use super::periodic::PeriodicPointRecord;
use crate::automorphic::{chordal, evaluate_h, AutomorphicMap, ExtendedPoint};
use crate::error::{Error, Result};
use crate::geometry::{
    lcm, orthogonal_order, point_group_order, ConformalLinear, Domain, MatN, VecN,
};
use crate::numeric::{jacobian, par_max};
use crate::schroder::{complex_derivative, uqr_eval, uqr_iterate, UqrMap};

const MAX_ORDER: u32 = 720;

/// `L(x) = h(x + u)` with `L(0) = x'` and `f^{rm} ∘ L = L ∘ M^{rm}`.
#[derive(Clone, Debug)]
pub struct LinearizerSpec {
    pub h: AutomorphicMap,
    pub u: VecN,
    pub m: u32,
    /// Order of the point group.
    pub q: u32,
    /// Order of the orthogonal part of `M`.
    pub p: u32,
    pub r: u32,
    pub lambda: f64,
}

impl LinearizerSpec {
    pub fn eval(&self, x: VecN) -> ExtendedPoint {
        evaluate_h(&self.h, x + self.u)
    }

    /// `r m`, the iterate linearized by `λ^{rm} Id`.
    pub fn iterate(&self) -> u32 {
        self.r * self.m
    }
}

pub fn build_linearizer(
    rec: &PeriodicPointRecord,
    h: &AutomorphicMap,
    m: &ConformalLinear,
) -> Result<LinearizerSpec> {
    if rec.branch_flag {
        return Err(Error::BranchPoint);
    }
    let q = point_group_order(h.group()) as u32;
    let p = orthogonal_order(&m.orth(), MAX_ORDER)?;
    Ok(LinearizerSpec {
        h: h.clone(),
        u: rec.u,
        m: rec.m,
        q,
        p,
        r: lcm(p, q),
        lambda: m.scale(),
    })
}

/// `sup chordal(f^{rm}(L(x)), L(λ^{rm} x))` over a regular grid.
pub fn linearizer_residual(
    spec: &LinearizerSpec,
    f: &UqrMap,
    domain: &Domain,
    samples: usize,
) -> f64 {
    let k = spec.iterate();
    let scale = spec.lambda.powi(k as i32);
    par_max(&domain.grid(samples), |x| {
        let rhs = spec.eval(x.scale(scale));
        match uqr_iterate(f, &spec.eval(*x), k, Some(*x + spec.u)) {
            Ok(lhs) => chordal(&lhs, &rhs),
            Err(_) => 2.0,
        }
    })
}

/// Inversion `y / |y|²`, the chart at ∞.
fn invert(y: VecN) -> VecN {
    y.scale(1.0 / y.norm_sq())
}

fn finite_or_nan(p: ExtendedPoint, n: usize) -> VecN {
    p.finite()
        .unwrap_or_else(|| VecN::from_slice(&vec![f64::NAN; n]))
}

/// Finite-difference Jacobian of `f^iterations` at the periodic point `x'`.
pub fn multiplier(f: &UqrMap, x: &ExtendedPoint, iterations: u32) -> Result<MatN> {
    multiplier_with_hint(f, x, iterations, None)
}

/// As [`multiplier`]; for implicit maps `hint` selects the branch of
/// `h^{-1}` near `x'`.
pub fn multiplier_with_hint(
    f: &UqrMap,
    x: &ExtendedPoint,
    iterations: u32,
    hint: Option<VecN>,
) -> Result<MatN> {
    let n = f.dim();
    let j = match x {
        ExtendedPoint::Finite(x0) => {
            let g = |y: VecN| {
                finite_or_nan(
                    uqr_iterate(f, &ExtendedPoint::Finite(y), iterations, hint)
                        .unwrap_or(ExtendedPoint::Infinity),
                    n,
                )
            };
            jacobian(&g, *x0)
        }
        ExtendedPoint::Infinity => {
            let g =
                |w: VecN| match uqr_iterate(f, &ExtendedPoint::Finite(invert(w)), iterations, hint)
                {
                    Ok(ExtendedPoint::Finite(y)) => invert(y),
                    Ok(ExtendedPoint::Infinity) => VecN::zeros(n),
                    Err(_) => VecN::from_slice(&vec![f64::NAN; n]),
                };
            jacobian(&g, VecN::zeros(n))
        }
    };
    if !j.is_finite() {
        return Err(Error::NoConvergence(
            "iterate not evaluable near the point".into(),
        ));
    }
    let det = j.det();
    if det.abs() <= 1e-14 {
        return Err(Error::DegenerateJacobian(det));
    }
    Ok(j)
}

/// Chain-rule product `Π f'(f^j(z))` for closed-form planar maps.
pub fn exact_multiplier(f: &UqrMap, z: Complex64, iterations: u32) -> Option<Complex64> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..iterations {
        d *= complex_derivative(f, w)?;
        w = uqr_eval(f, &ExtendedPoint::from_complex(w), None)
            .ok()?
            .finite()?
            .to_complex();
    }
    Some(d)
}
