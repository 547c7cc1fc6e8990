use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rational::RationalMap;
use crate::automorphic::{chordal, evaluate_h, AutomorphicMap, ExtendedPoint, Family};
use crate::error::{Error, Result};
use crate::geometry::{check_group_invariance, ConformalLinear, VecN};

/// Condition number above which the fit is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// A rational map recovered from `℘(M z) = f(℘(z))`.
#[derive(Clone, Debug)]
pub struct LattesFit {
    /// Monic numerator of degree `degree`, denominator of degree below it.
    pub map: RationalMap,
    /// Root-mean-square of the scaled least-squares residual.
    pub residual: f64,
    /// `max chordal(f(℘(z)), ℘(M z))` on samples not used in the fit.
    pub holdout_residual: f64,
    /// Condition number of the column-scaled system.
    pub condition: f64,
    pub samples: usize,
}

/// `|det M|` rounded, the degree of the induced map.
pub fn lattes_degree(m: &ConformalLinear) -> usize {
    m.scale().powi(m.dim() as i32).round() as usize
}

pub fn fit_lattes_rational(
    h: &AutomorphicMap,
    m: &ConformalLinear,
    degree: usize,
) -> Result<LattesFit> {
    fit_lattes_rational_with(h, m, degree, 12 * degree.max(1) + 8, 0x1a77e5)
}

/// Least-squares fit of `P(X) - W Q(X) = 0` with `X = ℘(z)`, `W = ℘(M z)`
/// over `samples` points of the fundamental cell.
pub fn fit_lattes_rational_with(
    h: &AutomorphicMap,
    m: &ConformalLinear,
    degree: usize,
    samples: usize,
    seed: u64,
) -> Result<LattesFit> {
    let Family::Weierstrass(wp) = h.family() else {
        return Err(Error::InvalidArgument(
            "Lattès fit needs a Weierstrass map".into(),
        ));
    };
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch(2, m.dim()));
    }
    if degree == 0 || degree != lattes_degree(m) {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} differs from |det M| = {}",
            lattes_degree(m)
        )));
    }
    if samples < 10 * degree {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples",
            10 * degree
        )));
    }
    if !check_group_invariance(m, h.group(), 3) {
        return Err(Error::InvalidGroup(
            "M does not normalize the lattice group".into(),
        ));
    }
    let lattice = wp.lattice().clone();
    let margin = 0.05 * lattice.min_basis_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |count: usize| -> Vec<(Complex64, Complex64)> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let z = lattice.combine(&[rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]);
            let mz = m.apply(z);
            if lattice.reduce(z).norm() < margin || lattice.reduce(mz).norm() < margin {
                continue;
            }
            let (Some(x), Some(w)) = (evaluate_h(h, z).finite(), evaluate_h(h, mz).finite()) else {
                continue;
            };
            out.push((x.to_complex(), w.to_complex()));
        }
        out
    };
    let fit_pts = draw(samples);
    let held = draw(30);

    let d = degree;
    let rows = fit_pts.len();
    let mut a = DMatrix::<Complex64>::zeros(rows, 2 * d);
    let mut b = DVector::<Complex64>::zeros(rows);
    for (i, (x, w)) in fit_pts.iter().enumerate() {
        let mut xk = Complex64::new(1.0, 0.0);
        for k in 0..d {
            a[(i, k)] = w * xk;
            a[(i, d + k)] = -xk;
            xk *= x;
        }
        b[i] = xk;
        let s = a
            .row(i)
            .iter()
            .map(|c| c.norm())
            .fold(b[i].norm(), f64::max);
        for j in 0..2 * d {
            a[(i, j)] /= s;
        }
        b[i] /= s;
    }
    let col_scale: Vec<f64> = (0..2 * d)
        .map(|j| a.column(j).norm().max(f64::MIN_POSITIVE))
        .collect();
    for (j, s) in col_scale.iter().enumerate() {
        let mut c = a.column_mut(j);
        c /= Complex64::new(*s, 0.0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let condition = smax / smin;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::NoConvergence(e.to_string()))?;
    let residual = (&a * &sol - &b).norm() / (rows as f64).sqrt();
    let coef: Vec<Complex64> = sol.iter().zip(&col_scale).map(|(c, s)| c / s).collect();
    let den = coef[..d].to_vec();
    let mut num = coef[d..].to_vec();
    num.push(Complex64::new(1.0, 0.0));
    let map = RationalMap::new(num, den);
    let holdout_residual = held
        .iter()
        .map(|(x, w)| {
            let fx = map.eval_ext(&ExtendedPoint::Finite(VecN::from_complex(*x)));
            chordal(&fx, &ExtendedPoint::from_complex(*w))
        })
        .fold(0.0, f64::max);
    Ok(LattesFit {
        map,
        residual,
        holdout_residual,
        condition,
        samples: rows,
    })
}
