use std::f64::consts::FRAC_PI_2;

use crate::geometry::VecN;

/// Folds `t` into `[-1, 1]` by reflecting across the odd integers; returns
/// the folded value and whether an odd number of reflections was used.
fn fold(t: f64) -> (f64, bool) {
    let m = (t + 1.0).rem_euclid(4.0) - 1.0;
    if m > 1.0 {
        (2.0 - m, true)
    } else {
        (m, false)
    }
}

/// Square `[-1,1]^2` to the closed upper unit hemisphere: the max-norm
/// radial rescale takes the square onto the unit disk, and a disk point at
/// radius `ρ` goes to polar angle `πρ/2`.
pub fn square_to_hemisphere(a: f64, b: f64) -> VecN {
    let e = a.hypot(b);
    if e == 0.0 {
        return VecN::new3(0.0, 0.0, 1.0);
    }
    let rho = a.abs().max(b.abs());
    let (s, c) = (FRAC_PI_2 * rho).sin_cos();
    VecN::new3(s * a / e, s * b / e, c)
}

/// Inverse of [`square_to_hemisphere`] on the closed upper hemisphere.
pub fn hemisphere_to_square(p: VecN) -> (f64, f64) {
    let q = p.normalized();
    let planar = q[0].hypot(q[1]);
    if planar == 0.0 {
        return (0.0, 0.0);
    }
    let theta = planar.atan2(q[2].abs());
    let rho = (theta / FRAC_PI_2).min(1.0);
    let (dx, dy) = (q[0] / planar, q[1] / planar);
    let e = rho / dx.abs().max(dy.abs());
    (dx * e, dy * e)
}

/// The Zorich map `h(x, y, s) = e^s F(x, y)` on the beam `[-1,1]^2 × R`,
/// extended by reflection across the beam faces combined with reflection
/// across the equatorial plane.
pub fn zorich_eval(x: VecN) -> VecN {
    assert_eq!(x.dim(), 3);
    let (a, fa) = fold(x[0]);
    let (b, fb) = fold(x[1]);
    let mut p = square_to_hemisphere(a, b);
    if fa != fb {
        p[2] = -p[2];
    }
    p.scale(x[2].exp())
}

/// A preimage of `y ≠ 0` in `[-1,3] × [-1,1] × R`.
pub fn zorich_base_preimage(y: VecN) -> Option<VecN> {
    let r = y.norm();
    if !(r > 0.0) || !r.is_finite() {
        return None;
    }
    let (a, b) = hemisphere_to_square(y);
    let a = if y[2] < 0.0 { 2.0 - a } else { a };
    Some(VecN::new3(a, b, r.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centre_goes_to_pole() {
        assert!(zorich_eval(VecN::zeros(3)).dist(&VecN::new3(0.0, 0.0, 1.0)) < 1e-15);
        let v = zorich_eval(VecN::new3(0.0, 0.0, 1.7));
        assert!(v.dist(&VecN::new3(0.0, 0.0, 1.7f64.exp())) < 1e-13);
    }

    #[test]
    fn modulus_is_exp_s() {
        for &(x, y, s) in &[(0.3, -0.8, 0.2), (5.1, 2.2, -1.0), (-7.9, 0.99, 2.0)] {
            let v = zorich_eval(VecN::new3(x, y, s));
            assert!((v.norm() - f64::exp(s)).abs() < 1e-13 * f64::exp(s));
        }
    }

    #[test]
    fn continuous_across_faces() {
        for y in [-0.9, -0.2, 0.4, 0.95] {
            let a = zorich_eval(VecN::new3(1.0 - 1e-12, y, 0.0));
            let b = zorich_eval(VecN::new3(1.0 + 1e-12, y, 0.0));
            assert!(a.dist(&b) < 1e-10);
        }
    }

    #[test]
    fn base_preimage_round_trip() {
        for &(x, y, s) in &[
            (0.3, 0.2, 0.1),
            (2.5, -0.4, -0.3),
            (0.0, 0.0, 0.0),
            (-0.7, 0.9, 1.2),
        ] {
            let v = zorich_eval(VecN::new3(x, y, s));
            let p = zorich_base_preimage(v).unwrap();
            assert!(zorich_eval(p).dist(&v) < 1e-12 * v.norm());
        }
        assert!(zorich_base_preimage(VecN::zeros(3)).is_none());
    }
}
