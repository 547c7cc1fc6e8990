use num_complex::Complex64;

use crate::automorphic::ExtendedPoint;
use crate::geometry::VecN;

/// `P(z) / Q(z)` with coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

fn trim(mut c: Vec<Complex64>) -> Vec<Complex64> {
    while c.len() > 1 && c.last().map(|z| z.norm() == 0.0).unwrap_or(false) {
        c.pop();
    }
    c
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn horner_deriv(c: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..c.len()).rev() {
        acc = acc * z + c[k] * k as f64;
    }
    acc
}

impl RationalMap {
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Self {
        let num = trim(num);
        let den = trim(den);
        assert!(den.iter().any(|c| c.norm() > 0.0), "zero denominator");
        RationalMap { num, den }
    }

    pub fn identity() -> Self {
        Self::new(vec![0.0.into(), 1.0.into()], vec![1.0.into()])
    }

    /// `(z + 1/z) / (2i) = (z² + 1) / (2i z)`.
    pub fn lattes_gaussian() -> Self {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Self::new(
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 2.0)],
        )
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn deg_num(&self) -> usize {
        self.num.len() - 1
    }

    pub fn deg_den(&self) -> usize {
        self.den.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.deg_num().max(self.deg_den())
    }

    /// Value at `z`; `None` means `∞`.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        if z.norm() > 1.0 {
            // Evaluate in w = 1/z to avoid overflow for large |z|.
            let w = 1.0 / z;
            let p = self
                .num
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, a| acc * w + a);
            let q = self
                .den
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, a| acc * w + a);
            let shift = self.deg_num() as i32 - self.deg_den() as i32;
            if q.norm() == 0.0 {
                return None;
            }
            let v = p / q * z.powi(shift);
            return v.is_finite().then_some(v);
        }
        let q = horner(&self.den, z);
        if q.norm() == 0.0 {
            return None;
        }
        let v = horner(&self.num, z) / q;
        v.is_finite().then_some(v)
    }

    pub fn eval_ext(&self, y: &ExtendedPoint) -> ExtendedPoint {
        match y {
            ExtendedPoint::Infinity => {
                let (dp, dq) = (self.deg_num(), self.deg_den());
                if dp > dq {
                    ExtendedPoint::Infinity
                } else if dp == dq {
                    ExtendedPoint::from_complex(self.num[dp] / self.den[dq])
                } else {
                    ExtendedPoint::Finite(VecN::new2(0.0, 0.0))
                }
            }
            ExtendedPoint::Finite(v) => match self.eval(v.to_complex()) {
                Some(z) => ExtendedPoint::from_complex(z),
                None => ExtendedPoint::Infinity,
            },
        }
    }

    /// `f'(z)` by the quotient rule; `None` at a pole.
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let q = horner(&self.den, z);
        if q.norm() == 0.0 {
            return None;
        }
        let p = horner(&self.num, z);
        let v = (horner_deriv(&self.num, z) * q - p * horner_deriv(&self.den, z)) / (q * q);
        v.is_finite().then_some(v)
    }

    /// Coefficients of `P(z) - z Q(z)`, whose roots are the finite fixed points.
    pub fn fixed_point_polynomial(&self) -> Vec<Complex64> {
        let n = self.num.len().max(self.den.len() + 1);
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (k, a) in self.num.iter().enumerate() {
            c[k] += a;
        }
        for (k, b) in self.den.iter().enumerate() {
            c[k + 1] -= b;
        }
        trim(c)
    }

    /// Fixed points in the extended plane (`None` for `∞`).
    pub fn fixed_points(&self) -> Vec<Option<Complex64>> {
        let mut out: Vec<Option<Complex64>> = polynomial_roots(&self.fixed_point_polynomial())
            .into_iter()
            .map(Some)
            .collect();
        if self.deg_num() > self.deg_den() {
            out.push(None);
        }
        out
    }

    /// Multipliers at all fixed points; at `∞` it is computed in the chart
    /// `w = 1/z`. The multiset is invariant under Möbius conjugacy.
    pub fn fixed_point_multipliers(&self) -> Vec<Complex64> {
        self.fixed_points()
            .into_iter()
            .map(|p| match p {
                Some(z) => self
                    .derivative(z)
                    .unwrap_or(Complex64::new(f64::INFINITY, 0.0)),
                None if self.deg_num() == self.deg_den() + 1 => {
                    self.den[self.deg_den()] / self.num[self.deg_num()]
                }
                None => Complex64::new(0.0, 0.0),
            })
            .collect()
    }
}

/// Whether two multisets of complex numbers agree up to `tol` under some
/// pairing (greedy matching).
pub fn multisets_match(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match best {
            Some(j) if (b[j] - x).norm() <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

/// All roots of a complex polynomial (ascending coefficients) by the
/// Durand-Kerner iteration followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let c = trim(coeffs.to_vec());
    let n = c.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|a| a / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| seed.powi(k as i32) * (0.5 * bound))
        .collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = horner(&monic, roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let d = horner_deriv(&monic, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(&monic, *r) / d;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattes_values() {
        let f = RationalMap::lattes_gaussian();
        let z = Complex64::new(0.3, -0.8);
        let expect = (z + 1.0 / z) / Complex64::new(0.0, 2.0);
        assert!((f.eval(z).unwrap() - expect).norm() < 1e-15);
        let big = Complex64::new(1e200, 3e199);
        assert!(f.eval(big).unwrap().is_finite());
        assert!(f.eval_ext(&ExtendedPoint::Infinity).is_infinite());
        assert!(f.eval(Complex64::new(0.0, 0.0)).is_none());
    }

    #[test]
    fn derivative_matches_closed_form() {
        let f = RationalMap::lattes_gaussian();
        let z = Complex64::new(0.6, 0.4);
        let expect = (1.0 - 1.0 / (z * z)) / Complex64::new(0.0, 2.0);
        assert!((f.derivative(z).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn roots_of_cubic() {
        let c = |re: f64| Complex64::new(re, 0.0);
        // (z-1)(z-2)(z+3) = z^3 - 7z + 6
        let roots = polynomial_roots(&[c(6.0), c(-7.0), c(0.0), c(1.0)]);
        for r0 in [1.0, 2.0, -3.0] {
            assert!(roots.iter().any(|r| (r - r0).norm() < 1e-12));
        }
    }

    #[test]
    fn lattes_fixed_points() {
        let f = RationalMap::lattes_gaussian();
        let roots = polynomial_roots(&f.fixed_point_polynomial());
        assert_eq!(roots.len(), 2);
        let z0 = Complex64::new(-1.0, 2.0).powf(-0.5);
        assert!(roots.iter().any(|r| (r - z0).norm() < 1e-12));
        assert!(roots.iter().any(|r| (r + z0).norm() < 1e-12));
    }

    #[test]
    fn lattes_multipliers() {
        let mult = RationalMap::lattes_gaussian().fixed_point_multipliers();
        let c = Complex64::new;
        assert!(
            multisets_match(&mult, &[c(-1.0, -1.0), c(-1.0, -1.0), c(0.0, 2.0)], 1e-12),
            "{mult:?}"
        );
    }
}
