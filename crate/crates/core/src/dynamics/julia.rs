use num_complex::Complex64;
use rayon::prelude::*;

use crate::automorphic::ExtendedPoint;
use crate::error::{Error, Result};
use crate::geometry::{Domain, VecN};
use crate::schroder::{complex_derivative, uqr_eval_tracked, UqrMap};

pub const ESCAPE_RADIUS: f64 = 1e6;
pub const CONVERGENCE_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PixelClass {
    /// Left `|z| ≤ 1e6` at this step.
    Escaped(u32),
    /// Consecutive iterates within 1e-6 at this step.
    Converged(u32),
    Bounded,
}

impl PixelClass {
    fn kind(&self) -> u8 {
        match self {
            PixelClass::Escaped(_) => 0,
            PixelClass::Converged(_) => 1,
            PixelClass::Bounded => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub window: Domain,
    /// Third coordinate of the slice for maps of R^3.
    pub slice: Option<f64>,
    /// Row-major, row 0 at the top (largest y).
    pub pixels: Vec<PixelClass>,
    /// Distance estimate for escaping pixels of closed-form maps.
    pub distance: Vec<Option<f64>>,
    /// Approximation of the Julia set: class boundaries, plus pixels whose
    /// distance estimate is below the pixel size.
    pub marked: Vec<bool>,
}

impl Raster {
    pub fn pixel_size(&self) -> (f64, f64) {
        (
            (self.window.hi[0] - self.window.lo[0]) / self.width as f64,
            (self.window.hi[1] - self.window.lo[1]) / self.height as f64,
        )
    }

    /// Centre of pixel `(ix, iy)` in window coordinates.
    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let (dx, dy) = self.pixel_size();
        (
            self.window.lo[0] + (ix as f64 + 0.5) * dx,
            self.window.hi[1] - (iy as f64 + 0.5) * dy,
        )
    }

    pub fn marked_points(&self) -> Vec<(f64, f64)> {
        (0..self.pixels.len())
            .filter(|&i| self.marked[i])
            .map(|i| self.center(i % self.width, i / self.width))
            .collect()
    }

    /// Binary PPM: marked white, escaping shaded blue by step, converged
    /// grey, bounded black.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for (p, &m) in self.pixels.iter().zip(&self.marked) {
            let rgb = if m {
                [255, 255, 255]
            } else {
                match p {
                    PixelClass::Escaped(k) => {
                        let s = (255.0 * (1.0 - (*k as f64 / 40.0).min(1.0))) as u8;
                        [0, s / 2, s]
                    }
                    PixelClass::Converged(_) => [90, 90, 90],
                    PixelClass::Bounded => [0, 0, 0],
                }
            };
            out.extend_from_slice(&rgb);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("ix,iy,x,y,class,steps,marked\n");
        for (i, p) in self.pixels.iter().enumerate() {
            let (ix, iy) = (i % self.width, i / self.width);
            let (x, y) = self.center(ix, iy);
            let (class, steps) = match p {
                PixelClass::Escaped(k) => ("escaped", *k as i64),
                PixelClass::Converged(k) => ("converged", *k as i64),
                PixelClass::Bounded => ("bounded", -1),
            };
            s.push_str(&format!(
                "{ix},{iy},{x:.12e},{y:.12e},{class},{steps},{}\n",
                self.marked[i] as u8
            ));
        }
        s
    }
}

fn orbit(f: &UqrMap, y0: VecN, iterations: u32) -> (PixelClass, Option<f64>) {
    let closed = !matches!(f, UqrMap::Implicit { .. });
    let mut y = ExtendedPoint::Finite(y0);
    // f is single-valued, so any preimage will do, branch images included.
    let mut hint = (!closed).then(|| VecN::zeros(y0.dim()));
    let mut dz = Complex64::new(1.0, 0.0);
    for k in 1..=iterations {
        let prev = y;
        if closed {
            if let ExtendedPoint::Finite(v) = prev {
                dz *= complex_derivative(f, v.to_complex())
                    .unwrap_or(Complex64::new(f64::INFINITY, 0.0));
            }
        }
        let Ok((next, h)) = uqr_eval_tracked(f, &prev, hint) else {
            return (PixelClass::Bounded, None);
        };
        hint = h;
        y = next;
        match (prev, y) {
            (_, ExtendedPoint::Infinity) => return (PixelClass::Escaped(k), None),
            (_, ExtendedPoint::Finite(v)) if v.norm() > ESCAPE_RADIUS => {
                let r = v.norm();
                let dist = (closed && dz.norm().is_finite() && dz.norm() > 0.0)
                    .then(|| r * r.ln() / dz.norm());
                return (PixelClass::Escaped(k), dist);
            }
            (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b))
                if a.dist(&b) < CONVERGENCE_RADIUS =>
            {
                return (PixelClass::Converged(k), None);
            }
            _ => {}
        }
    }
    (PixelClass::Bounded, None)
}

/// Escape/convergence classification of a pixel grid over a planar window.
pub fn julia_render(
    f: &UqrMap,
    window: &Domain,
    resolution: (usize, usize),
    iterations: u32,
) -> Result<Raster> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch(f.dim(), 2));
    }
    render(f, window, resolution, iterations, None)
}

/// As [`julia_render`] on the plane `x_3 = slice` for maps of R^3.
pub fn julia_render_slice(
    f: &UqrMap,
    window: &Domain,
    resolution: (usize, usize),
    iterations: u32,
    slice: f64,
) -> Result<Raster> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch(f.dim(), 3));
    }
    render(f, window, resolution, iterations, Some(slice))
}

fn render(
    f: &UqrMap,
    window: &Domain,
    (w, h): (usize, usize),
    iterations: u32,
    slice: Option<f64>,
) -> Result<Raster> {
    if window.dim() != 2 {
        return Err(Error::DimensionMismatch(window.dim(), 2));
    }
    if w < 2 || h < 2 {
        return Err(Error::InvalidArgument(
            "resolution must be at least 2x2".into(),
        ));
    }
    let mut raster = Raster {
        width: w,
        height: h,
        window: *window,
        slice,
        pixels: Vec::new(),
        distance: Vec::new(),
        marked: Vec::new(),
    };
    let results: Vec<(PixelClass, Option<f64>)> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = raster.center(i % w, i / w);
            let p = match slice {
                None => VecN::new2(x, y),
                Some(s) => VecN::new3(x, y, s),
            };
            orbit(f, p, iterations)
        })
        .collect();
    let (dx, dy) = raster.pixel_size();
    let size = dx.max(dy);
    raster.pixels = results.iter().map(|r| r.0).collect();
    raster.distance = results.iter().map(|r| r.1).collect();
    let px = &raster.pixels;
    raster.marked = (0..w * h)
        .map(|i| {
            let (ix, iy) = (i % w, i / w);
            let kind = px[i].kind();
            let neighbours = [
                (ix > 0).then(|| i - 1),
                (ix + 1 < w).then(|| i + 1),
                (iy > 0).then(|| i - w),
                (iy + 1 < h).then(|| i + w),
            ];
            let boundary = neighbours.iter().flatten().any(|&j| px[j].kind() != kind);
            boundary || raster.distance[i].is_some_and(|d| d < size)
        })
        .collect();
    Ok(raster)
}
