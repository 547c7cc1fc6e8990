use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sphere::{
    enclosed_signed_volume, image_winding, solid_angle_degree, winding_2d, SphereGrid,
};
use super::{Map, SampledSphereMap};
use crate::error::{Error, Result};
use crate::geometry::VecN;
use crate::numeric::{det_sum, fd_step, gauss_legendre, jacobian_with_step};

/// Volume of the unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("dimension must be 2 or 3"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanRadiusMethod {
    /// `∫ |J_f|` over the ball by quadrature, divided by the local degree.
    Jacobian,
    /// Counts jittered grid cells whose centre the image of the sphere winds
    /// around.
    MonteCarlo,
    /// Enclosed volume of `f(∂B)` from a surface integral, divided by the
    /// local degree. Needs only boundary values.
    Boundary,
}

/// Relative disagreement above which [`mean_radius_checked`] fails.
pub const METHOD_DISAGREEMENT: f64 = 0.05;

const MC_SEED: u64 = 0x5eed;

fn boundary_image(f: &Map, x0: VecN, t: f64, grid: &SphereGrid) -> Vec<VecN> {
    grid.nodes()
        .par_iter()
        .map(|u| f(x0 + u.scale(t)))
        .collect()
}

fn boundary_grid(n: usize) -> SphereGrid {
    match n {
        2 => SphereGrid::new(2, 2048),
        _ => SphereGrid::new(3, 1200),
    }
}

/// Local degree of `f` on `B(x0, t)`: winding of `f(∂B)` around `f(x0)`.
pub fn local_degree(f: &Map, x0: VecN, t: f64) -> i32 {
    let grid = boundary_grid(x0.dim());
    let img = boundary_image(f, x0, t, &grid);
    match x0.dim() {
        2 => winding_2d(&img, f(x0)),
        _ => solid_angle_degree(&img, grid.faces(), f(x0)),
    }
}

fn jac_det(f: &Map, x: VecN, h: f64) -> f64 {
    jacobian_with_step(f, x, h).det().abs()
}

/// `∫_{B(x0,t)} |J_f|` with tensor Gauss-Legendre/trapezoid rules in polar
/// coordinates, doubling the node counts until two levels agree.
pub fn jacobian_integral(f: &Map, x0: VecN, t: f64) -> f64 {
    let n = x0.dim();
    let h = fd_step(x0).min(1e-2 * t);
    let integrate = |nr: usize, na: usize| -> f64 {
        let (xr, wr) = gauss_legendre(nr);
        let mut pts: Vec<(VecN, f64)> = Vec::new();
        for (xi, wi) in xr.iter().zip(&wr) {
            let rho = 0.5 * t * (xi + 1.0);
            let wrho = 0.5 * t * wi * rho.powi(n as i32 - 1);
            match n {
                2 => {
                    for k in 0..na {
                        let th = 2.0 * PI * k as f64 / na as f64;
                        let u = VecN::new2(th.cos(), th.sin());
                        pts.push((x0 + u.scale(rho), wrho * 2.0 * PI / na as f64));
                    }
                }
                _ => {
                    let (xc, wc) = gauss_legendre(na);
                    let nphi = 2 * na;
                    for (c, wcj) in xc.iter().zip(&wc) {
                        let s = (1.0 - c * c).sqrt();
                        for k in 0..nphi {
                            let ph = 2.0 * PI * k as f64 / nphi as f64;
                            let u = VecN::new3(s * ph.cos(), s * ph.sin(), *c);
                            pts.push((x0 + u.scale(rho), wrho * wcj * 2.0 * PI / nphi as f64));
                        }
                    }
                }
            }
        }
        det_sum(&pts, |(x, w)| w * jac_det(f, *x, h))
    };
    let (mut nr, mut na) = match n {
        2 => (8, 32),
        _ => (6, 8),
    };
    let mut prev = integrate(nr, na);
    let max_level = if n == 2 { 6 } else { 3 };
    for _ in 0..max_level {
        nr *= 2;
        na *= 2;
        let cur = integrate(nr, na);
        if (cur - prev).abs() <= 1e-9 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Volume of `f(B(x0, t))` and its standard error by stratified sampling of
/// the bounding box of `f(∂B)`.
pub fn monte_carlo_image_volume(
    verts: &[VecN],
    grid: &SphereGrid,
    per_axis: usize,
    seed: u64,
) -> (f64, f64) {
    let n = grid.dim();
    let mut lo = verts[0];
    let mut hi = verts[0];
    for v in verts {
        for k in 0..n {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let cell: Vec<f64> = (0..n).map(|k| (hi[k] - lo[k]) / per_axis as f64).collect();
    let cell_vol: f64 = cell.iter().product();
    let total = per_axis.pow(n as u32);
    // Per-row seeding keeps the result independent of the thread count.
    let rows = total / per_axis;
    let hits: usize = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (row as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut count = 0;
            for i in 0..per_axis {
                let code = row * per_axis + i;
                let mut y = VecN::zeros(n);
                let mut t = code;
                for k in 0..n {
                    y[k] = lo[k] + cell[k] * ((t % per_axis) as f64 + rng.gen_range(0.0..1.0));
                    t /= per_axis;
                }
                if image_winding(grid, verts, y) != 0 {
                    count += 1;
                }
            }
            count
        })
        .sum();
    let p = hits as f64 / total as f64;
    let box_vol = cell_vol * total as f64;
    (box_vol * p, box_vol * (p * (1.0 - p) / total as f64).sqrt())
}

/// `r_f(x0, t) = (|f(B(x0,t))| / Ω_n)^{1/n}`.
pub fn mean_radius(f: &Map, x0: VecN, t: f64, method: MeanRadiusMethod) -> Result<f64> {
    let n = x0.dim();
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {t}")));
    }
    let vol = match method {
        MeanRadiusMethod::Jacobian => {
            let deg = local_degree(f, x0, t).unsigned_abs().max(1);
            jacobian_integral(f, x0, t) / deg as f64
        }
        MeanRadiusMethod::MonteCarlo => {
            let grid = boundary_grid(n);
            let img = boundary_image(f, x0, t, &grid);
            let per = if n == 2 { 256 } else { 40 };
            monte_carlo_image_volume(&img, &grid, per, MC_SEED).0
        }
        MeanRadiusMethod::Boundary => {
            let fx0 = f(x0);
            homogeneous_image_volume(&|u| f(x0 + u.scale(t)) - fx0, n)
        }
    };
    Ok((vol / unit_ball_volume(n)).powf(1.0 / n as f64))
}

/// Jacobian-method mean radius, cross-checked by Monte Carlo.
pub fn mean_radius_checked(f: &Map, x0: VecN, t: f64) -> Result<f64> {
    let a = mean_radius(f, x0, t, MeanRadiusMethod::Jacobian)?;
    let b = mean_radius(f, x0, t, MeanRadiusMethod::MonteCarlo)?;
    let rel = (a - b).abs() / a.max(b);
    if rel > METHOD_DISAGREEMENT {
        return Err(Error::MethodDisagreement(rel));
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageMeasure {
    /// Enclosed volume of `g(S)` divided by its winding number about 0.
    pub volume: f64,
    /// Stratified Monte-Carlo estimate of `|g(B(0,1))|` as a set.
    pub mc_volume: f64,
    pub std_error: f64,
}

/// Measure of `g(B(0,1))` for the homogeneous extension of `g`.
pub fn image_ball_measure(g: &SampledSphereMap) -> ImageMeasure {
    image_ball_measure_seeded(g, MC_SEED)
}

pub fn image_ball_measure_seeded(g: &SampledSphereMap, seed: u64) -> ImageMeasure {
    let grid = &g.grid;
    let n = grid.dim();
    let per = if n == 2 { 256 } else { 40 };
    let (mc_volume, std_error) = monte_carlo_image_volume(&g.values, grid, per, seed);
    let deg = match n {
        2 => winding_2d(&g.values, VecN::zeros(2)),
        _ => solid_angle_degree(&g.values, grid.faces(), VecN::zeros(n)),
    };
    let volume = if deg == 0 {
        mc_volume
    } else {
        enclosed_signed_volume(grid, &g.values).abs() / deg.unsigned_abs() as f64
    };
    ImageMeasure {
        volume,
        mc_volume,
        std_error,
    }
}

/// `|G(B(0,1))|` for a map `g` of the sphere, computed as the enclosed
/// volume `(1/n)∫ det(g, ∂g)` by trapezoid (and Gauss-Legendre in the polar
/// angle) with central differences, divided by the degree about 0.
pub fn homogeneous_image_volume(g: &Map, n: usize) -> f64 {
    let h = 1e-5;
    let (signed, deg) = match n {
        2 => {
            let m = 2048;
            let at = |th: f64| g(VecN::new2(th.cos(), th.sin()));
            let pts: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
            let area = det_sum(&pts, |&th| {
                let v = at(th);
                let dv = (at(th + h) - at(th - h)).scale(0.5 / h);
                v[0] * dv[1] - v[1] * dv[0]
            }) * PI
                / m as f64;
            let poly: Vec<VecN> = pts.iter().map(|&th| at(th)).collect();
            (area, winding_2d(&poly, VecN::zeros(2)))
        }
        _ => {
            let at = |th: f64, ph: f64| {
                g(VecN::new3(
                    th.sin() * ph.cos(),
                    th.sin() * ph.sin(),
                    th.cos(),
                ))
            };
            let (xs, ws) = gauss_legendre(64);
            let nphi = 128;
            let mut pts = Vec::with_capacity(xs.len() * nphi);
            for (x, w) in xs.iter().zip(&ws) {
                for k in 0..nphi {
                    pts.push((
                        0.5 * PI * (x + 1.0),
                        0.5 * PI * w,
                        2.0 * PI * k as f64 / nphi as f64,
                    ));
                }
            }
            let vol = det_sum(&pts, |&(th, w, ph)| {
                let v = at(th, ph);
                let dth = (at(th + h, ph) - at(th - h, ph)).scale(0.5 / h);
                let dph = (at(th, ph + h) - at(th, ph - h)).scale(0.5 / h);
                w * v.dot(&dth.cross(&dph))
            }) * 2.0
                * PI
                / (3.0 * nphi as f64);
            let grid = SphereGrid::new(3, 600);
            let verts: Vec<VecN> = grid.nodes().iter().map(|u| g(*u)).collect();
            (
                vol,
                solid_angle_degree(&verts, grid.faces(), VecN::zeros(3)),
            )
        }
    };
    if deg == 0 {
        signed.abs()
    } else {
        signed.abs() / deg.unsigned_abs() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: VecN) -> VecN {
        VecN::from_complex(x.to_complex().powu(2))
    }

    #[test]
    fn scaling_map_radius() {
        let f = |x: VecN| x.scale(3.0);
        for x0 in [VecN::new2(0.0, 0.0), VecN::new3(0.2, 0.1, 0.0)] {
            let r = mean_radius(&f, x0, 0.1, MeanRadiusMethod::Jacobian).unwrap();
            assert!((r - 0.3).abs() < 1e-12);
            let r = mean_radius(&f, x0, 0.1, MeanRadiusMethod::MonteCarlo).unwrap();
            assert!((r - 0.3).abs() < 0.3 * 0.01, "{r}");
        }
    }

    #[test]
    fn square_at_branch_point_uses_set_volume() {
        assert_eq!(local_degree(&square, VecN::zeros(2), 0.1), 2);
        let r = mean_radius_checked(&square, VecN::zeros(2), 0.1).unwrap();
        assert!((r - 0.01).abs() < 1e-12, "{r}");
    }

    #[test]
    fn square_near_one() {
        let x0 = VecN::new2(1.0, 0.0);
        let t = 1e-3;
        let r = mean_radius(&square, x0, t, MeanRadiusMethod::Jacobian).unwrap();
        // |f(B(1,t))| = ∫ 4|z|² = 4π(t² + t⁴/2) exactly.
        let exact = (4.0 * (t * t + t.powi(4) / 2.0)).sqrt();
        assert!((r - exact).abs() < 1e-12, "{r} {exact}");
        assert!((r / t - 2.0).abs() < 1e-5);
        let b = mean_radius(&square, x0, t, MeanRadiusMethod::Boundary).unwrap();
        assert!((b - exact).abs() < 1e-9 * exact, "{b} {exact}");
        let b = mean_radius(&square, VecN::zeros(2), 0.1, MeanRadiusMethod::Boundary).unwrap();
        assert!((b - 0.01).abs() < 1e-9, "{b}");
    }

    #[test]
    fn disagreement_is_reported() {
        // Folding map: the jacobian integral counts the fold twice.
        let fold = |x: VecN| VecN::new2(x[0].abs(), x[1]);
        let r = mean_radius_checked(&fold, VecN::new2(0.0, 0.0), 0.5);
        assert!(matches!(r, Err(Error::MethodDisagreement(_))), "{r:?}");
    }
}
