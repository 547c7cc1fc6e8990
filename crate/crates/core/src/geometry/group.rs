use super::{compose, ConformalLinear, Isometry, Lattice, MatN, VecN};
use crate::error::{Error, Result};

/// Tolerance for matching rotation parts and lattice membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const MAX_POINT_GROUP: usize = 10_000;

/// A discrete isometry group `G` described by generators, with its maximal
/// translation lattice and an enumerated point group.
///
/// Every element of `G` has the normal form `x -> R x + t_R + w` where `R`
/// runs over the point group, `t_R` is a fixed representative shift and `w`
/// lies in the lattice.
#[derive(Clone, Debug)]
pub struct DiscreteGroup {
    translation_gens: Vec<Isometry>,
    point_gens: Vec<Isometry>,
    lattice: Lattice,
    reps: Vec<Isometry>,
}

impl DiscreteGroup {
    pub fn new(translation_gens: Vec<Isometry>, point_gens: Vec<Isometry>) -> Result<Self> {
        let dim = translation_gens
            .first()
            .or(point_gens.first())
            .map(|g| g.dim())
            .ok_or_else(|| Error::InvalidGroup("no generators".into()))?;
        for g in translation_gens.iter().chain(&point_gens) {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch(dim, g.dim()));
            }
        }
        if let Some(g) = translation_gens
            .iter()
            .find(|g| !g.is_translation(MEMBERSHIP_TOL))
        {
            return Err(Error::InvalidGroup(format!(
                "translation generator has rotation part {:?}",
                g.rot()
            )));
        }
        let lattice = Lattice::new(translation_gens.iter().map(|g| g.shift()).collect(), dim)?;

        // Closure over rotation parts. Every product `gen * rep` whose rotation
        // is already known yields a Schreier generator of the translation
        // subgroup; all of them must lie in the lattice.
        let gens: Vec<Isometry> = point_gens
            .iter()
            .chain(&translation_gens)
            .copied()
            .collect();
        let mut reps = vec![Isometry::identity(dim)];
        let mut i = 0;
        while i < reps.len() {
            let e = reps[i];
            for g in &gens {
                let p = compose(g, &e)?;
                match reps
                    .iter()
                    .find(|r| (r.rot() - p.rot()).max_abs() <= MEMBERSHIP_TOL)
                {
                    Some(r) => {
                        let diff = p.shift() - r.shift();
                        if !lattice.contains(diff, MEMBERSHIP_TOL * (1.0 + diff.norm())) {
                            return Err(Error::InvalidGroup(format!(
                                "translation {diff:?} generated by the group is not in the lattice"
                            )));
                        }
                    }
                    None => {
                        if !lattice.preserved_by(&p.rot(), MEMBERSHIP_TOL) {
                            return Err(Error::InvalidGroup(format!(
                                "rotation part {:?} does not preserve the lattice",
                                p.rot()
                            )));
                        }
                        let shift = lattice.reduce(p.shift());
                        reps.push(Isometry::new(p.rot(), shift)?);
                        if reps.len() > MAX_POINT_GROUP {
                            return Err(Error::Diverged(MAX_POINT_GROUP));
                        }
                    }
                }
            }
            i += 1;
        }
        Ok(DiscreteGroup {
            translation_gens,
            point_gens,
            lattice,
            reps,
        })
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn translation_gens(&self) -> &[Isometry] {
        &self.translation_gens
    }

    pub fn point_gens(&self) -> &[Isometry] {
        &self.point_gens
    }

    pub fn generators(&self) -> Vec<Isometry> {
        self.translation_gens
            .iter()
            .chain(&self.point_gens)
            .copied()
            .collect()
    }

    /// Coset representatives `(R, t_R)`, identity first.
    pub fn point_group(&self) -> &[Isometry] {
        &self.reps
    }

    /// Index of the representative whose rotation part matches `rot`.
    pub fn rep_index(&self, rot: &MatN, tol: f64) -> Option<usize> {
        self.reps
            .iter()
            .position(|r| (r.rot() - *rot).max_abs() <= tol)
    }

    /// Normal-form membership test.
    pub fn contains(&self, g: &Isometry, tol: f64) -> bool {
        if g.dim() != self.dim() {
            return false;
        }
        match self.rep_index(&g.rot(), tol) {
            Some(i) => {
                let diff = g.shift() - self.reps[i].shift();
                self.lattice.contains(diff, tol * (1.0 + diff.norm()))
            }
            None => false,
        }
    }

    /// Orbit points `g(x)` within `radius` of `center`, with the element used.
    pub fn orbit_near(&self, x: VecN, center: VecN, radius: f64) -> Vec<(Isometry, VecN)> {
        let mut out = Vec::new();
        let k = self.lattice.rank();
        for rep in &self.reps {
            let p = rep.apply(x);
            let base = self.lattice.nearest(center - p);
            let c0 = self.lattice.coords(base);
            let reach = (radius / self.lattice.min_basis_norm()).ceil() as i64 + 1;
            let span = (2 * reach + 1) as usize;
            for code in 0..span.pow(k as u32) {
                let mut t = code;
                let mut c = c0.clone();
                for ci in c.iter_mut() {
                    *ci += (t % span) as f64 - reach as f64;
                    t /= span;
                }
                let w = self.lattice.combine(&c);
                let q = p + w;
                if q.dist(&center) <= radius {
                    let g = Isometry::new(rep.rot(), rep.shift() + w).expect("orthogonal rep");
                    out.push((g, q));
                }
            }
        }
        out
    }

    /// The orbit point of `x` closest to `target`.
    pub fn orbit_nearest(&self, x: VecN, target: VecN) -> VecN {
        let mut best = x;
        let mut best_d = f64::INFINITY;
        for rep in &self.reps {
            let p = rep.apply(x);
            let q = p + self.lattice.nearest(target - p);
            let d = q.dist(&target);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Distance from `x` to the union of fixed-point sets of the non-trivial
    /// rotations in the group; `+∞` if the group has none.
    pub fn branch_distance(&self, x: VecN) -> f64 {
        let n = self.dim();
        let id = MatN::identity(n);
        let mut best = f64::INFINITY;
        for rep in self.reps.iter().skip(1) {
            let a = id - rep.rot();
            let pinv = match pseudo_inverse(&a) {
                Some(p) => p,
                None => continue,
            };
            // Fixed set of x -> Rx + t is {x : (I-R)x = t}; only shifts t in
            // the range of I-R give fixed points.
            let base = rep.shift();
            let reach = 2.0 * self.lattice.cell_diameter() + 1.0;
            let local = self.lattice.nearest(a.apply(x) - base);
            for w in self.lattice.points_within(reach) {
                let t = base + local + w;
                let y = pinv.apply(t);
                if a.apply(y).dist(&t) > 1e-9 * (1.0 + t.norm()) {
                    continue;
                }
                // Nearest point of the affine fixed set y + ker(I-R).
                let r = x - y;
                let proj = r - pinv.apply(a.apply(r));
                best = best.min(r.dist(&proj));
            }
        }
        best
    }
}

fn pseudo_inverse(a: &MatN) -> Option<MatN> {
    let svd = a.to_dmatrix().svd(true, true);
    let p = svd.pseudo_inverse(1e-10).ok()?;
    Some(MatN::from_dmatrix(&p))
}

/// Every group element given by a word of length `1..=len` in the generators
/// and their inverses.
pub fn words(g: &DiscreteGroup, len: usize) -> Vec<Isometry> {
    let mut alphabet = Vec::new();
    for s in g.generators() {
        alphabet.push(s);
        alphabet.push(s.inverse());
    }
    let mut out = Vec::new();
    let mut layer = vec![Isometry::identity(g.dim())];
    for _ in 0..len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for a in &alphabet {
                next.push(compose(a, w).expect("same dimension"));
            }
        }
        out.extend_from_slice(&next);
        layer = next;
    }
    out
}

/// Whether `M g M^{-1}` lies in `G` for every word of length at most
/// `word_len`.
pub fn check_group_invariance(m: &ConformalLinear, g: &DiscreteGroup, word_len: usize) -> bool {
    check_linear_invariance(&m.matrix(), g, word_len)
}

/// Same test for an arbitrary invertible matrix.
pub fn check_linear_invariance(m: &MatN, g: &DiscreteGroup, word_len: usize) -> bool {
    if m.dim() != g.dim() {
        return false;
    }
    let Some(m_inv) = m.inverse() else {
        return false;
    };
    words(g, word_len)
        .iter()
        .all(|w| g.contains(&w.conjugate_by(m, &m_inv), MEMBERSHIP_TOL))
}

/// `|P|`, the order of the point group.
pub fn point_group_order(g: &DiscreteGroup) -> usize {
    g.point_group().len()
}

/// Least `p <= kmax` with `‖O^p − I‖ ≤ 1e-10`.
pub fn orthogonal_order(o: &MatN, kmax: u32) -> Result<u32> {
    let id = MatN::identity(o.dim());
    let mut p = *o;
    for k in 1..=kmax {
        if (p - id).max_abs() <= 1e-10 {
            return Ok(k);
        }
        p = p * *o;
    }
    Err(Error::NoFiniteOrder(kmax))
}

/// Recovers the conformal linear map that agrees with `a` on the lattice.
///
/// For rank `n-1` lattices the unique orientation-preserving conformal
/// extension is returned.
pub fn extract_linear_part(a: impl Fn(VecN) -> VecN, lattice: &Lattice) -> Result<ConformalLinear> {
    let n = lattice.dim();
    let a0 = a(VecN::zeros(n));
    let scale = lattice.basis().iter().map(|w| w.norm()).fold(1.0, f64::max);
    if a0.norm() > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!("A(0) = {a0:?} is not 0")));
    }
    let mut domain: Vec<VecN> = lattice.basis().to_vec();
    let mut images: Vec<VecN> = domain.iter().map(|w| a(*w)).collect();
    if let Some(nu) = lattice.complement() {
        // Conformal on the span: all restricted singular values agree.
        let k = domain.len();
        let wmat = nalgebra::DMatrix::from_fn(n, k, |i, j| domain[j][i]);
        let amat = nalgebra::DMatrix::from_fn(n, k, |i, j| images[j][i]);
        let gram = wmat.transpose() * &wmat;
        let coef = gram.try_inverse().ok_or(Error::DegenerateLattice)?;
        // Restriction expressed in an orthonormal basis of the span.
        let q = wmat.clone().qr().q();
        let restricted = &amat * coef * wmat.transpose() * &q;
        let sv = restricted.singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = smax / smin;
        if !(ratio <= 1.0 + 1e-6) {
            return Err(Error::NonConformal(ratio));
        }
        let lambda = sv.iter().sum::<f64>() / k as f64;
        let normal = match n {
            2 => VecN::new2(-images[0][1], images[0][0]).normalized(),
            _ => images[0].cross(&images[1]).normalized(),
        };
        domain.push(nu);
        images.push(normal.scale(lambda));
    }
    let w = MatN::from_cols(&domain);
    let im = MatN::from_cols(&images);
    let m = im * w.inverse().ok_or(Error::DegenerateLattice)?;
    let sv = m.singular_values();
    let ratio = sv[0] / sv[n - 1];
    if !(ratio <= 1.0 + 1e-6) {
        return Err(Error::NonConformal(ratio));
    }
    let lambda = m.det().abs().powf(1.0 / n as f64);
    ConformalLinear::with_tolerance(lambda, m.scale(1.0 / lambda), 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn exp_group() -> DiscreteGroup {
        DiscreteGroup::new(
            vec![Isometry::translation(VecN::new2(0.0, 2.0 * PI))],
            vec![],
        )
        .unwrap()
    }

    fn cos_group() -> DiscreteGroup {
        DiscreteGroup::new(
            vec![Isometry::translation(VecN::new2(2.0 * PI, 0.0))],
            vec![Isometry::linear(MatN::scalar(2, -1.0)).unwrap()],
        )
        .unwrap()
    }

    fn gaussian_translations() -> DiscreteGroup {
        DiscreteGroup::new(
            vec![
                Isometry::translation(VecN::new2(1.0, 0.0)),
                Isometry::translation(VecN::new2(0.0, 1.0)),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn invariance_examples() {
        assert!(check_group_invariance(
            &ConformalLinear::scaling(2, 2.0),
            &exp_group(),
            3
        ));
        let m = ConformalLinear::from_complex(Complex64::new(1.0, -1.0));
        assert!(check_group_invariance(&m, &gaussian_translations(), 3));
        let cos_t = DiscreteGroup::new(
            vec![Isometry::translation(VecN::new2(2.0 * PI, 0.0))],
            vec![],
        )
        .unwrap();
        assert!(!check_group_invariance(
            &ConformalLinear::scaling(2, 1.5),
            &cos_t,
            3
        ));
    }

    #[test]
    fn point_group_orders() {
        assert_eq!(point_group_order(&exp_group()), 1);
        assert_eq!(point_group_order(&cos_group()), 2);
    }

    #[test]
    fn orders_of_rotations() {
        assert_eq!(orthogonal_order(&MatN::identity(2), 64), Ok(1));
        assert_eq!(orthogonal_order(&MatN::rotation2(PI), 64), Ok(2));
        let o = ConformalLinear::from_complex(Complex64::new(1.0, -1.0)).orth();
        assert_eq!(orthogonal_order(&o, 64), Ok(8));
        assert_eq!(
            orthogonal_order(&MatN::rotation2(1.0), 64),
            Err(Error::NoFiniteOrder(64))
        );
    }

    #[test]
    fn extraction_examples() {
        let l = Lattice::new(vec![VecN::new2(4.0, 0.0), VecN::new2(0.0, 4.0)], 2).unwrap();
        let m = extract_linear_part(|x| x.scale(2.0), &l).unwrap();
        assert!((m.scale() - 2.0).abs() < 1e-12);
        assert!((m.orth() - MatN::identity(2)).max_abs() < 1e-12);
        let d = MatN::diag(&[2.0, 3.0]);
        let r = extract_linear_part(|x| d.apply(x), &Lattice::gaussian());
        assert!(matches!(r, Err(Error::NonConformal(_))));
    }

    #[test]
    fn extraction_rank_deficient_extends_conformally() {
        let l = Lattice::new(
            vec![VecN::new3(4.0, 0.0, 0.0), VecN::new3(0.0, 4.0, 0.0)],
            3,
        )
        .unwrap();
        let m = extract_linear_part(|x| x.scale(3.0), &l).unwrap();
        assert!((m.matrix() - MatN::scalar(3, 3.0)).max_abs() < 1e-12);
        let e = Lattice::new(vec![VecN::new2(0.0, 2.0 * PI)], 2).unwrap();
        let m = extract_linear_part(|x| x.scale(2.0), &e).unwrap();
        assert!((m.matrix() - MatN::scalar(2, 2.0)).max_abs() < 1e-12);
    }

    #[test]
    fn larger_translation_subgroup_is_rejected() {
        // Half-turns about 0 and about (1,0) generate the translation by 2.
        let half = MatN::diag(&[-1.0, -1.0, 1.0]);
        let r = DiscreteGroup::new(
            vec![
                Isometry::translation(VecN::new3(4.0, 0.0, 0.0)),
                Isometry::translation(VecN::new3(0.0, 4.0, 0.0)),
            ],
            vec![
                Isometry::linear(half).unwrap(),
                Isometry::new(half, VecN::new3(2.0, 0.0, 0.0)).unwrap(),
            ],
        );
        assert!(matches!(r, Err(Error::InvalidGroup(_))));
    }

    #[test]
    fn branch_distance_of_cos_group() {
        let g = cos_group();
        assert!((g.branch_distance(VecN::new2(0.3, 0.0)) - 0.3).abs() < 1e-12);
        assert!(
            (g.branch_distance(VecN::new2(3.0, 0.4)) - ((PI - 3.0).powi(2) + 0.16).sqrt()).abs()
                < 1e-12
        );
        assert_eq!(
            exp_group().branch_distance(VecN::new2(1.0, 1.0)),
            f64::INFINITY
        );
    }

    #[test]
    fn membership_normal_form() {
        let g = cos_group();
        let e = Isometry::new(MatN::scalar(2, -1.0), VecN::new2(4.0 * PI, 0.0)).unwrap();
        assert!(g.contains(&e, MEMBERSHIP_TOL));
        let bad = Isometry::new(MatN::scalar(2, -1.0), VecN::new2(PI, 0.0)).unwrap();
        assert!(!g.contains(&bad, MEMBERSHIP_TOL));
    }

    #[test]
    fn orbit_nearest_finds_reflected_point() {
        let g = cos_group();
        let p = g.orbit_nearest(VecN::new2(1.0, 0.5), VecN::new2(-7.0, 0.0));
        assert!(p.dist(&VecN::new2(-1.0 - 2.0 * PI, -0.5)) < 1e-12);
    }
}
