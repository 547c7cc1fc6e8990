use crate::automorphic::{chordal, ExtendedPoint};
use crate::error::{Error, Result};
use crate::geometry::VecN;
use crate::infspace::{local_degree, SphereGrid};
use crate::schroder::{uqr_eval_tracked, UqrMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointClass {
    Repelling,
    Attracting,
    Neutral,
    Superattracting,
}

const MAX_STEPS: usize = 400;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Fate {
    Escaped,
    Converged,
    Stayed,
}

/// `f` in the chart `y / |y|²` when `x'` is ∞; `x'` becomes 0.
fn chart(
    f: &UqrMap,
    at_infinity: bool,
    y: VecN,
    hint: Option<VecN>,
) -> Option<(VecN, Option<VecN>)> {
    let n = y.dim();
    if !at_infinity {
        let (v, h) = uqr_eval_tracked(f, &ExtendedPoint::Finite(y), hint).ok()?;
        return Some((
            v.finite()
                .unwrap_or_else(|| VecN::from_slice(&vec![f64::INFINITY; n])),
            h,
        ));
    }
    let w = if y.norm() == 0.0 {
        ExtendedPoint::Infinity
    } else {
        ExtendedPoint::Finite(y.scale(1.0 / y.norm_sq()))
    };
    let (v, h) = uqr_eval_tracked(f, &w, hint).ok()?;
    Some((
        match v {
            ExtendedPoint::Infinity => VecN::zeros(n),
            ExtendedPoint::Finite(v) => v.scale(1.0 / v.norm_sq()),
        },
        h,
    ))
}

/// Classifies a fixed point by following orbits of `x' + εu` for grid
/// directions `u`.
pub fn classify_fixed_point(f: &UqrMap, x: &ExtendedPoint) -> Result<FixedPointClass> {
    let fx = uqr_eval_tracked(f, x, None)?.0;
    if chordal(&fx, x) > 1e-8 {
        return Err(Error::InvalidArgument("not a fixed point".into()));
    }
    let n = f.dim();
    let at_inf = x.is_infinite();
    let x0 = x.finite().unwrap_or(VecN::zeros(n));
    let scale = x0.norm().max(1.0);
    let eps = 1e-4 * scale;
    let nbhd = 1e-2 * scale;
    let grid = SphereGrid::new(n, 64);
    let fates: Vec<Fate> = grid
        .nodes()
        .iter()
        .map(|u| {
            let mut y = x0 + u.scale(eps);
            let mut hint = None;
            for _ in 0..MAX_STEPS {
                let Some((next, h)) = chart(f, at_inf, y, hint) else {
                    return Fate::Stayed;
                };
                hint = h;
                y = next;
                let d = y.dist(&x0);
                if !(d <= nbhd) {
                    return Fate::Escaped;
                }
                if d <= 1e-3 * eps {
                    return Fate::Converged;
                }
            }
            Fate::Stayed
        })
        .collect();
    let all = |f: Fate| fates.iter().all(|g| *g == f);
    if all(Fate::Escaped) {
        Ok(FixedPointClass::Repelling)
    } else if all(Fate::Converged) {
        let g = |y: VecN| {
            chart(f, at_inf, y, None).map_or(VecN::from_slice(&vec![f64::NAN; n]), |p| p.0)
        };
        if local_degree(&g, x0, eps).abs() > 1 {
            Ok(FixedPointClass::Superattracting)
        } else {
            Ok(FixedPointClass::Attracting)
        }
    } else if all(Fate::Stayed) {
        Ok(FixedPointClass::Neutral)
    } else {
        let count = |f: Fate| fates.iter().filter(|g| **g == f).count();
        Err(Error::Inconclusive(format!(
            "{} escaped, {} converged, {} stayed",
            count(Fate::Escaped),
            count(Fate::Converged),
            count(Fate::Stayed)
        )))
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::schroder::RationalMap;

    fn at(re: f64, im: f64) -> ExtendedPoint {
        ExtendedPoint::from_complex(Complex64::new(re, im))
    }

    #[test]
    fn square_fixed_points() {
        let f = UqrMap::Power(2);
        assert_eq!(
            classify_fixed_point(&f, &at(1.0, 0.0)).unwrap(),
            FixedPointClass::Repelling
        );
        assert_eq!(
            classify_fixed_point(&f, &at(0.0, 0.0)).unwrap(),
            FixedPointClass::Superattracting
        );
        assert_eq!(
            classify_fixed_point(&f, &ExtendedPoint::Infinity).unwrap(),
            FixedPointClass::Superattracting
        );
    }

    #[test]
    fn attracting_and_neutral() {
        let c = |re, im| Complex64::new(re, im);
        let half = UqrMap::Rational(RationalMap::new(
            vec![c(0.0, 0.0), c(0.5, 0.0)],
            vec![c(1.0, 0.0)],
        ));
        assert_eq!(
            classify_fixed_point(&half, &at(0.0, 0.0)).unwrap(),
            FixedPointClass::Attracting
        );
        let rot = UqrMap::Rational(RationalMap::new(
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(1.0, 0.0)],
        ));
        assert_eq!(
            classify_fixed_point(&rot, &at(0.0, 0.0)).unwrap(),
            FixedPointClass::Neutral
        );
        // Parabolic z + z²: orbits move like 1/k, too slowly to leave or settle.
        let para = UqrMap::Rational(RationalMap::new(
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
        ));
        assert_eq!(
            classify_fixed_point(&para, &at(0.0, 0.0)).unwrap(),
            FixedPointClass::Neutral
        );
        assert!(matches!(
            classify_fixed_point(&UqrMap::Power(2), &at(0.5, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }
}
