use num_complex::Complex64;

use super::rational::RationalMap;
use crate::automorphic::{
    chordal, evaluate_h, local_inverse_h, preimage, AutomorphicMap, ExtendedPoint, Family,
};
use crate::error::{Error, Result};
use crate::geometry::{check_group_invariance, ConformalLinear, Domain, VecN};
use crate::numeric::par_max;

/// Word length used when validating `M G M^{-1} ⊆ G`.
pub const INVARIANCE_WORD_LEN: usize = 3;

/// A uniformly quasiregular map, either in closed form or defined by the
/// Schröder equation `f ∘ h = h ∘ M`.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum UqrMap {
    /// `z^d`.
    Power(u32),
    /// `T_d(z) = cos(d arccos z)`.
    Chebyshev(u32),
    Rational(RationalMap),
    Implicit {
        h: AutomorphicMap,
        m: ConformalLinear,
    },
}

impl UqrMap {
    /// The map solving `f ∘ h = h ∘ M`; fails unless `M G M^{-1} ⊆ G`.
    pub fn implicit(h: AutomorphicMap, m: ConformalLinear) -> Result<Self> {
        if m.dim() != h.dim() {
            return Err(Error::DimensionMismatch(h.dim(), m.dim()));
        }
        if !check_group_invariance(&m, h.group(), INVARIANCE_WORD_LEN) {
            return Err(Error::InvalidGroup(
                "M does not normalize the group of h".into(),
            ));
        }
        Ok(UqrMap::Implicit { h, m })
    }

    pub fn dim(&self) -> usize {
        match self {
            UqrMap::Implicit { h, .. } => h.dim(),
            _ => 2,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, UqrMap::Implicit { .. })
    }
}

fn chebyshev(d: u32, z: Complex64) -> Complex64 {
    let (mut t0, mut t1) = (Complex64::new(1.0, 0.0), z);
    if d == 0 {
        return t0;
    }
    for _ in 1..d {
        let t2 = 2.0 * z * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

/// `T_d' = d U_{d-1}`.
fn chebyshev_deriv(d: u32, z: Complex64) -> Complex64 {
    if d == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let (mut u0, mut u1) = (Complex64::new(1.0, 0.0), 2.0 * z);
    if d == 1 {
        return u0;
    }
    for _ in 2..d {
        let u2 = 2.0 * z * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    u1 * d as f64
}

/// `f(y)`. For implicit maps a preimage `x` of `y` is chosen near `hint`
/// (any branch image is then accepted); without a hint `y` must avoid the
/// branch images.
pub fn uqr_eval(f: &UqrMap, y: &ExtendedPoint, hint: Option<VecN>) -> Result<ExtendedPoint> {
    uqr_eval_tracked(f, y, hint).map(|(v, _)| v)
}

/// As [`uqr_eval`], also returning `M x` for the preimage `x` used, which is
/// a preimage of the result and serves as the next continuation hint.
pub fn uqr_eval_tracked(
    f: &UqrMap,
    y: &ExtendedPoint,
    hint: Option<VecN>,
) -> Result<(ExtendedPoint, Option<VecN>)> {
    let closed = |g: &dyn Fn(Complex64) -> Complex64| match y {
        ExtendedPoint::Infinity => ExtendedPoint::Infinity,
        ExtendedPoint::Finite(v) => ExtendedPoint::from_complex(g(v.to_complex())),
    };
    match f {
        UqrMap::Power(d) => Ok((closed(&|z| z.powu(*d)), None)),
        UqrMap::Chebyshev(d) => Ok((closed(&|z| chebyshev(*d, z)), None)),
        UqrMap::Rational(r) => Ok((r.eval_ext(y), None)),
        UqrMap::Implicit { h, m } => {
            if let ExtendedPoint::Infinity = y {
                return Ok(match h.family() {
                    Family::Weierstrass(_) => (ExtendedPoint::Infinity, Some(VecN::zeros(2))),
                    _ => (ExtendedPoint::Infinity, None),
                });
            }
            if let (Some(o), ExtendedPoint::Finite(v)) = (h.omitted_value(), y) {
                if *v == o {
                    return Ok((*y, None));
                }
            }
            let x = match hint {
                None => local_inverse_h(h, y, VecN::zeros(h.dim()))?,
                Some(hint) => preimage(h, y, hint)?
                    .ok_or_else(|| Error::NoConvergence("value is omitted by h".into()))?,
            };
            let mx = m.apply(x);
            Ok((evaluate_h(h, mx), Some(mx)))
        }
    }
}

/// `f^k(y)`, passing each preimage on as the next hint.
pub fn uqr_iterate(
    f: &UqrMap,
    y: &ExtendedPoint,
    k: u32,
    hint: Option<VecN>,
) -> Result<ExtendedPoint> {
    let mut cur = *y;
    let mut hint = hint;
    for _ in 0..k {
        let (v, next) = uqr_eval_tracked(f, &cur, hint)?;
        cur = v;
        hint = next;
    }
    Ok(cur)
}

/// Complex derivative of a closed-form map; `None` for implicit maps or at a
/// pole.
pub fn complex_derivative(f: &UqrMap, z: Complex64) -> Option<Complex64> {
    match f {
        UqrMap::Power(0) => Some(Complex64::new(0.0, 0.0)),
        UqrMap::Power(d) => Some(z.powu(d - 1) * *d as f64),
        UqrMap::Chebyshev(d) => Some(chebyshev_deriv(*d, z)),
        UqrMap::Rational(r) => r.derivative(z),
        UqrMap::Implicit { .. } => None,
    }
}

/// `sup chordal(f(h(x)), h(M x))` over a regular grid of `domain`. Points
/// where `f` cannot be evaluated count as the maximal chordal distance 2.
pub fn schroder_residual(
    f: &UqrMap,
    h: &AutomorphicMap,
    m: &ConformalLinear,
    domain: &Domain,
    samples: usize,
) -> f64 {
    let grid = domain.grid(samples);
    par_max(&grid, |x| {
        let rhs = evaluate_h(h, m.apply(*x));
        match uqr_eval(f, &evaluate_h(h, *x), Some(*x)) {
            Ok(lhs) => chordal(&lhs, &rhs),
            Err(_) => 2.0,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MatN;

    fn fin(x: f64, y: f64) -> ExtendedPoint {
        ExtendedPoint::Finite(VecN::new2(x, y))
    }

    #[test]
    fn implicit_exp_squares() {
        let f = UqrMap::implicit(AutomorphicMap::exp(), ConformalLinear::scaling(2, 2.0)).unwrap();
        let y = Complex64::new(0.7, -1.3);
        let v = uqr_eval(&f, &ExtendedPoint::from_complex(y), None)
            .unwrap()
            .finite()
            .unwrap();
        assert!((v.to_complex() - y * y).norm() < 1e-13);
        assert_eq!(uqr_eval(&f, &fin(0.0, 0.0), None).unwrap(), fin(0.0, 0.0));
        assert!(uqr_eval(&f, &ExtendedPoint::Infinity, None)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn implicit_cos_is_chebyshev() {
        let f = UqrMap::implicit(AutomorphicMap::cos(), ConformalLinear::scaling(2, 2.0)).unwrap();
        for y in [
            Complex64::new(0.3, 0.0),
            Complex64::new(-2.0, 0.7),
            Complex64::new(0.1, -3.0),
        ] {
            let v = uqr_eval(&f, &ExtendedPoint::from_complex(y), None)
                .unwrap()
                .finite()
                .unwrap();
            assert!((v.to_complex() - (2.0 * y * y - 1.0)).norm() < 1e-12 * (1.0 + y.norm_sqr()));
        }
        assert!(matches!(
            uqr_eval(&f, &fin(1.0, 0.0), None),
            Err(Error::BranchImage)
        ));
        let v = uqr_eval(&f, &fin(1.0, 0.0), Some(VecN::new2(0.0, 0.0))).unwrap();
        assert!(chordal(&v, &fin(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn non_normalizing_multiplier_rejected() {
        let rot = ConformalLinear::new(2.0, MatN::rotation2(0.3)).unwrap();
        assert!(matches!(
            UqrMap::implicit(AutomorphicMap::exp(), rot),
            Err(Error::InvalidGroup(_))
        ));
    }

    #[test]
    fn chebyshev_matches_cosine_form() {
        let z = Complex64::new(0.4, 0.2);
        for d in 1..6 {
            let expect = (z.acos() * d as f64).cos();
            assert!((chebyshev(d, z) - expect).norm() < 1e-13);
            let h = 1e-6;
            let fd = (chebyshev(d, z + h) - chebyshev(d, z - h)) / (2.0 * h);
            assert!((chebyshev_deriv(d, z) - fd).norm() < 1e-7);
        }
    }

    #[test]
    fn closed_form_residuals() {
        let d = Domain::new(VecN::new2(-1.0, -3.0), VecN::new2(1.0, 3.0));
        let r = schroder_residual(
            &UqrMap::Power(2),
            &AutomorphicMap::exp(),
            &ConformalLinear::scaling(2, 2.0),
            &d,
            400,
        );
        assert!(r <= 1e-12, "{r}");
        let r = schroder_residual(
            &UqrMap::Chebyshev(2),
            &AutomorphicMap::cos(),
            &ConformalLinear::scaling(2, 2.0),
            &d,
            400,
        );
        assert!(r <= 1e-12, "{r}");
        let r = schroder_residual(
            &UqrMap::Power(3),
            &AutomorphicMap::exp(),
            &ConformalLinear::scaling(2, 2.0),
            &d,
            400,
        );
        assert!(r > 0.1);
    }
}
