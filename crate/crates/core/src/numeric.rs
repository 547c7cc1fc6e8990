//! Small numerical helpers shared across modules.

use rayon::prelude::*;

use crate::geometry::{MatN, VecN};

/// Central-difference step `1e-6 * max(1, |x|)`.
pub fn fd_step(x: VecN) -> f64 {
    1e-6 * x.norm().max(1.0)
}

/// Central-difference Jacobian of `f` at `x` with step `h`.
pub fn jacobian_with_step(f: &dyn Fn(VecN) -> VecN, x: VecN, h: f64) -> MatN {
    let n = x.dim();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e = VecN::basis(n, j).scale(h);
        cols.push((f(x + e) - f(x - e)).scale(0.5 / h));
    }
    MatN::from_cols(&cols)
}

pub fn jacobian(f: &dyn Fn(VecN) -> VecN, x: VecN) -> MatN {
    jacobian_with_step(f, x, fd_step(x))
}

/// Sum that does not depend on the thread count: fixed chunks are summed in
/// parallel and combined in order.
pub fn det_sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    const CHUNK: usize = 2048;
    let partial: Vec<f64> = items
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Parallel maximum; exact and therefore order independent. NaN propagates.
pub fn par_max<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    items.par_iter().map(&f).reduce(
        || f64::NEG_INFINITY,
        |a, b| {
            if a.is_nan() || b.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        },
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Solves `f(x) = y` by damped Newton iteration with finite-difference
/// Jacobians, starting from `x0`.
pub fn newton_solve(
    f: &dyn Fn(VecN) -> VecN,
    y: VecN,
    x0: VecN,
    tol: f64,
    max_iter: usize,
) -> Option<VecN> {
    let mut x = x0;
    let scale = y.norm().max(1e-300);
    let mut r = f(x) - y;
    for _ in 0..max_iter {
        if r.norm() <= tol * scale {
            return Some(x);
        }
        let j = jacobian_with_step(f, x, 1e-7 * x.norm().max(1e-3 * scale.min(1.0)));
        let dx = j.solve(r)?;
        let mut step = 1.0;
        loop {
            let xn = x - dx.scale(step);
            let rn = f(xn) - y;
            if rn.norm() < r.norm() || step < 1e-4 {
                x = xn;
                r = rn;
                break;
            }
            step *= 0.5;
        }
    }
    (r.norm() <= tol * scale * 10.0).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fd_jacobian_of_quadratic() {
        let f = |v: VecN| VecN::new2(v[0] * v[0] - v[1] * v[1], 2.0 * v[0] * v[1]);
        let j = jacobian(&f, VecN::new2(0.7, -0.2));
        let exact = MatN::from_rows(&[&[1.4, 0.4], &[-0.4, 1.4]]);
        assert!((j - exact).max_abs() < 1e-9);
    }

    #[test]
    fn det_sum_is_thread_independent() {
        let v: Vec<f64> = (0..100_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = det_sum(&v, |x| *x);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| det_sum(&v, |x| *x));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn newton_inverts_cubic() {
        let f = |v: VecN| VecN::from_complex(v.to_complex().powi(3));
        let y = VecN::new2(0.5, 0.25);
        let x = newton_solve(&f, y, VecN::new2(0.8, 0.1), 1e-14, 60).unwrap();
        assert!(f(x).dist(&y) < 1e-13);
    }
}
