//! Strongly automorphic maps: exp, cos, Weierstrass ℘ and the Zorich map.

mod extended;
mod weierstrass;
mod zorich;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use extended::{chordal, ExtendedPoint};
pub use weierstrass::{weierstrass_p, WeierstrassP, WpValue, POLE_TOL};
pub use zorich::{hemisphere_to_square, square_to_hemisphere, zorich_base_preimage, zorich_eval};

use crate::error::{Error, Result};
use crate::geometry::{DiscreteGroup, Isometry, Lattice, MatN, VecN};

/// Tolerance for deciding that a value is a branch image.
pub const BRANCH_TOL: f64 = 1e-8;

/// Default ℘ truncation radius in units of the shortest basis vector.
pub const DEFAULT_WP_RADIUS: f64 = 800.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Exp,
    Cos,
    Weierstrass,
    Zorich,
}

#[derive(Clone, Debug)]
pub enum Family {
    /// `e^z`, automorphic under `z + 2πi`.
    Exp,
    /// `cos z`, automorphic under `z + 2π` and `-z`.
    Cos,
    /// `℘_Λ`, automorphic under `Λ` and `-z`.
    Weierstrass(WeierstrassP),
    /// The Zorich map on the beam `[-1,1]^2 × R`.
    Zorich,
}

#[derive(Clone, Debug)]
pub struct AutomorphicMap {
    family: Family,
    group: DiscreteGroup,
    /// Images of the branch set (℘ only: `e1, e2, e3`).
    critical_values: Vec<Complex64>,
}

impl AutomorphicMap {
    pub fn exp() -> Self {
        let g = DiscreteGroup::new(
            vec![Isometry::translation(VecN::new2(0.0, 2.0 * PI))],
            vec![],
        )
        .unwrap();
        AutomorphicMap {
            family: Family::Exp,
            group: g,
            critical_values: vec![],
        }
    }

    pub fn cos() -> Self {
        let g = DiscreteGroup::new(
            vec![Isometry::translation(VecN::new2(2.0 * PI, 0.0))],
            vec![Isometry::linear(MatN::scalar(2, -1.0)).unwrap()],
        )
        .unwrap();
        AutomorphicMap {
            family: Family::Cos,
            group: g,
            critical_values: vec![],
        }
    }

    pub fn weierstrass(lattice: Lattice) -> Self {
        let r = DEFAULT_WP_RADIUS * lattice.min_basis_norm();
        Self::weierstrass_with_radius(lattice, r)
    }

    pub fn weierstrass_with_radius(lattice: Lattice, radius: f64) -> Self {
        let translations = lattice
            .basis()
            .iter()
            .map(|w| Isometry::translation(*w))
            .collect();
        let g = DiscreteGroup::new(
            translations,
            vec![Isometry::linear(MatN::scalar(2, -1.0)).unwrap()],
        )
        .expect("lattice with -z is a valid group");
        let wp = WeierstrassP::new(lattice.clone(), radius);
        let w = lattice.basis();
        let critical_values = [w[0].scale(0.5), w[1].scale(0.5), (w[0] + w[1]).scale(0.5)]
            .iter()
            .map(|p| {
                wp.eval(p.to_complex())
                    .value
                    .expect("half period is not a pole")
            })
            .collect();
        AutomorphicMap {
            family: Family::Weierstrass(wp),
            group: g,
            critical_values,
        }
    }

    pub fn zorich() -> Self {
        let g = DiscreteGroup::new(
            vec![
                Isometry::translation(VecN::new3(4.0, 0.0, 0.0)),
                Isometry::translation(VecN::new3(0.0, 4.0, 0.0)),
            ],
            vec![Isometry::new(MatN::diag(&[-1.0, -1.0, 1.0]), VecN::new3(2.0, 2.0, 0.0)).unwrap()],
        )
        .unwrap();
        AutomorphicMap {
            family: Family::Zorich,
            group: g,
            critical_values: vec![],
        }
    }

    /// Replaces the group without any consistency check; used to probe the
    /// automorphy test with wrong groups.
    pub fn with_group(mut self, group: DiscreteGroup) -> Self {
        self.group = group;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Exp => FamilyKind::Exp,
            Family::Cos => FamilyKind::Cos,
            Family::Weierstrass(_) => FamilyKind::Weierstrass,
            Family::Zorich => FamilyKind::Zorich,
        }
    }

    pub fn group(&self) -> &DiscreteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// Finite values never attained (`0` for exp and Zorich).
    pub fn omitted_value(&self) -> Option<VecN> {
        match self.family {
            Family::Exp | Family::Zorich => Some(VecN::zeros(self.dim())),
            _ => None,
        }
    }

    /// Box used for sampling in property checks: a few fundamental cells
    /// around the origin.
    pub fn sample_box(&self) -> (VecN, VecN) {
        match self.family {
            Family::Exp => (VecN::new2(-2.0, -7.0), VecN::new2(2.0, 7.0)),
            Family::Cos => (VecN::new2(-7.0, -1.5), VecN::new2(7.0, 1.5)),
            Family::Weierstrass(ref wp) => {
                let d = wp.lattice().cell_diameter();
                (VecN::new2(-d, -d), VecN::new2(d, d))
            }
            Family::Zorich => (VecN::new3(-5.0, -5.0, -1.0), VecN::new3(5.0, 5.0, 1.0)),
        }
    }
}

/// `h(x)`.
pub fn evaluate_h(h: &AutomorphicMap, x: VecN) -> ExtendedPoint {
    evaluate_h_bounded(h, x).0
}

/// `h(x)` with an error bound (nonzero only for the truncated ℘ sum).
pub fn evaluate_h_bounded(h: &AutomorphicMap, x: VecN) -> (ExtendedPoint, f64) {
    assert_eq!(x.dim(), h.dim(), "dimension mismatch");
    match &h.family {
        Family::Exp => (ExtendedPoint::from_complex(x.to_complex().exp()), 0.0),
        Family::Cos => (ExtendedPoint::from_complex(x.to_complex().cos()), 0.0),
        Family::Weierstrass(wp) => {
            let v = wp.eval(x.to_complex());
            match v.value {
                Some(z) => (ExtendedPoint::from_complex(z), v.tail_bound),
                None => (ExtendedPoint::Infinity, 0.0),
            }
        }
        Family::Zorich => (ExtendedPoint::from_vec(zorich_eval(x)), 0.0),
    }
}

/// Some preimage of `y`, moved to the orbit point closest to `hint`.
///
/// Unlike [`local_inverse_h`] this accepts branch images; `Ok(None)` means
/// `y` is an omitted value.
pub fn preimage(h: &AutomorphicMap, y: &ExtendedPoint, hint: VecN) -> Result<Option<VecN>> {
    let x0 = match (&h.family, y) {
        (Family::Weierstrass(_), ExtendedPoint::Infinity) => Some(VecN::zeros(2)),
        (_, ExtendedPoint::Infinity) => None,
        (Family::Exp, ExtendedPoint::Finite(v)) => {
            let z = v.to_complex();
            (z.norm() > 0.0).then(|| VecN::from_complex(z.ln()))
        }
        (Family::Cos, ExtendedPoint::Finite(v)) => Some(VecN::from_complex(v.to_complex().acos())),
        (Family::Weierstrass(wp), ExtendedPoint::Finite(v)) => {
            Some(wp_newton(wp, v.to_complex(), hint)?)
        }
        (Family::Zorich, ExtendedPoint::Finite(v)) => zorich_base_preimage(*v),
    };
    Ok(x0.map(|x| h.group.orbit_nearest(x, hint)))
}

fn wp_newton(wp: &WeierstrassP, y: Complex64, hint: VecN) -> Result<VecN> {
    let target = y;
    let solve = |z0: Complex64| -> Option<Complex64> {
        let mut z = z0;
        for _ in 0..60 {
            let f = wp.eval(z).value? - target;
            if f.norm() <= 1e-13 * (1.0 + target.norm()) {
                return Some(z);
            }
            let d = wp.derivative(z)?;
            if d.norm() == 0.0 {
                return None;
            }
            let mut step = f / d;
            let cap = 0.25 * wp.lattice().min_basis_norm();
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
        }
        let f = wp.eval(z).value? - target;
        (f.norm() <= 1e-10 * (1.0 + target.norm())).then_some(z)
    };
    let h = hint.to_complex();
    if let Some(z) = solve(h) {
        return Ok(VecN::from_complex(z));
    }
    // Fall back to a grid of starts over the cell around the hint.
    let w = wp.lattice().basis();
    for i in 0..6 {
        for j in 0..6 {
            let s =
                w[0].scale((i as f64 + 0.5) / 6.0 - 0.5) + w[1].scale((j as f64 + 0.5) / 6.0 - 0.5);
            if let Some(z) = solve(h + s.to_complex()) {
                return Ok(VecN::from_complex(z));
            }
        }
    }
    Err(Error::NoConvergence(format!("Newton for ℘(z) = {y}")))
}

/// A preimage of `y` in the fundamental set around `branch_hint`.
pub fn local_inverse_h(h: &AutomorphicMap, y: &ExtendedPoint, branch_hint: VecN) -> Result<VecN> {
    if is_branch_image(h, y) {
        return Err(Error::BranchImage);
    }
    let x = preimage(h, y, branch_hint)?
        .ok_or_else(|| Error::NoConvergence("value is omitted by h".into()))?;
    let back = evaluate_h(h, x);
    if chordal(&back, y) > 1e-10 {
        return Err(Error::NoConvergence(format!(
            "inverse residual {:e}",
            chordal(&back, y)
        )));
    }
    Ok(x)
}

/// Distance from `x` to the fixed-point set of rotations in the group.
pub fn branch_set_distance(h: &AutomorphicMap, x: VecN) -> f64 {
    h.group.branch_distance(x)
}

/// Whether `y` lies within [`BRANCH_TOL`] (chordally) of `h(branch set)`.
pub fn is_branch_image(h: &AutomorphicMap, y: &ExtendedPoint) -> bool {
    match (&h.family, y) {
        (Family::Exp, _) => false,
        (Family::Cos, ExtendedPoint::Infinity) => false,
        (Family::Cos, ExtendedPoint::Finite(_)) => [1.0, -1.0]
            .iter()
            .any(|c| chordal(y, &ExtendedPoint::Finite(VecN::new2(*c, 0.0))) <= BRANCH_TOL),
        (Family::Weierstrass(_), ExtendedPoint::Infinity) => true,
        (Family::Weierstrass(_), ExtendedPoint::Finite(_)) => h
            .critical_values
            .iter()
            .any(|e| chordal(y, &ExtendedPoint::from_complex(*e)) <= BRANCH_TOL),
        (Family::Zorich, ExtendedPoint::Infinity) => false,
        (Family::Zorich, ExtendedPoint::Finite(v)) => {
            let r = v.norm();
            if r == 0.0 {
                return false;
            }
            let d = (v[0].abs() + v[1].abs()) / 2.0;
            let nearest = VecN::new3(d * v[0].signum(), d * v[1].signum(), 0.0);
            let nearest = nearest.normalized().scale(r);
            chordal(y, &ExtendedPoint::Finite(nearest)) <= BRANCH_TOL
        }
    }
}

/// Outcome of [`strong_automorphy_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AutomorphyReport {
    /// `sup chordal(h(g x), h(x))` over samples and generators.
    pub max_residual: f64,
    pub transitivity_checked: usize,
    pub transitivity_failures: usize,
}

/// Samples `h(g(x))` against `h(x)` for all generators and their inverses,
/// and spot-checks that preimages found from distant hints are related by a
/// group element.
pub fn strong_automorphy_check(h: &AutomorphicMap, samples: usize, seed: u64) -> AutomorphyReport {
    assert!(samples >= 100, "at least 100 samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = h.sample_box();
    let n = h.dim();
    let mut gens = Vec::new();
    for g in h.group.generators() {
        gens.push(g);
        gens.push(g.inverse());
    }
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut failures = 0;
    for i in 0..samples {
        let mut x = VecN::zeros(n);
        for k in 0..n {
            x[k] = rng.gen_range(lo[k]..hi[k]);
        }
        let hx = evaluate_h(h, x);
        for g in &gens {
            let d = chordal(&evaluate_h(h, g.apply(x)), &hx);
            max_residual = max_residual.max(d);
        }
        if i % 10 == 0 && branch_set_distance(h, x) > 1e-3 && !hx.is_infinite() {
            let mut hint = VecN::zeros(n);
            for k in 0..n {
                hint[k] = rng.gen_range(lo[k]..hi[k]);
            }
            checked += 1;
            let ok = match local_inverse_h(h, &hx, hint) {
                Ok(xt) => h.group.point_group().iter().any(|r| {
                    h.group
                        .lattice()
                        .contains(xt - r.apply(x), 1e-6 * (1.0 + x.norm()))
                }),
                Err(_) => false,
            };
            if !ok {
                failures += 1;
            }
        }
    }
    AutomorphyReport {
        max_residual,
        transitivity_checked: checked,
        transitivity_failures: failures,
    }
}
