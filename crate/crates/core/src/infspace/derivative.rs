use rayon::prelude::*;

use super::measure::{homogeneous_image_volume, mean_radius, unit_ball_volume, MeanRadiusMethod};
use super::sphere::SphereGrid;
use super::{Map, SampledSphereMap};
use crate::error::{Error, Result};
use crate::geometry::VecN;
use crate::numeric::newton_solve;

/// Consecutive-scale discrepancy below which a point counts as simple.
pub const SIMPLE_TOL: f64 = 1e-3;
/// Log-log deviation above which a homogeneity fit is rejected.
pub const POOR_FIT: f64 = 0.05;
/// Round-off allowance when testing that discrepancies decrease.
const NOISE: f64 = 1e-9;
/// Discrepancies below this are round-off and count as settled even if
/// they grow as `t` shrinks.
const ROUNDOFF: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct MeanRadiusProfile {
    pub center: VecN,
    /// `(t, r_f(t))`, `t` decreasing.
    pub samples: Vec<(f64, f64)>,
    pub fitted_d: f64,
    /// Largest deviation of `log r` from the fitted line.
    pub fit_residual: f64,
}

impl MeanRadiusProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,r\n");
        for (t, r) in &self.samples {
            s.push_str(&format!("{t:.16e},{r:.16e}\n"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneityFit {
    pub d: f64,
    pub intercept: f64,
    pub residual: f64,
}

fn loglog_fit(samples: &[(f64, f64)]) -> HomogeneityFit {
    let m = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, r)| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let d = sxy / sxx;
    let intercept = my - d * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - d * x).abs())
        .fold(0.0, f64::max);
    HomogeneityFit {
        d,
        intercept,
        residual,
    }
}

/// `r_f(x0, t)` for `t = t0, t0 q, t0 q², …` (`count` values).
pub fn mean_radius_profile(
    f: &Map,
    x0: VecN,
    t0: f64,
    q: f64,
    count: usize,
    method: MeanRadiusMethod,
) -> Result<MeanRadiusProfile> {
    if !(q > 0.0 && q < 1.0) || count < 2 {
        return Err(Error::InvalidArgument(
            "profile needs 0 < q < 1 and two scales".into(),
        ));
    }
    let ts: Vec<f64> = (0..count).map(|k| t0 * q.powi(k as i32)).collect();
    profile_at(f, x0, &ts, method)
}

fn profile_at(
    f: &Map,
    x0: VecN,
    ts: &[f64],
    method: MeanRadiusMethod,
) -> Result<MeanRadiusProfile> {
    let mut samples = Vec::with_capacity(ts.len());
    for &t in ts {
        samples.push((t, mean_radius(f, x0, t, method)?));
    }
    let fit = loglog_fit(&samples);
    Ok(MeanRadiusProfile {
        center: x0,
        samples,
        fitted_d: fit.d,
        fit_residual: fit.residual,
    })
}

/// Least-squares slope of `log r` against `log t`.
pub fn fit_homogeneity(profile: &MeanRadiusProfile) -> Result<HomogeneityFit> {
    let s = &profile.samples;
    if s.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "{} samples, need 6",
            s.len()
        )));
    }
    let tmax = s.iter().map(|p| p.0).fold(0.0, f64::max);
    let tmin = s.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if tmax / tmin < 8.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(
            "samples span fewer than 3 dyadic scales".into(),
        ));
    }
    if s.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::InvalidArgument("non-positive mean radius".into()));
    }
    let fit = loglog_fit(s);
    if fit.residual > POOR_FIT {
        return Err(Error::PoorFit(fit.residual));
    }
    Ok(fit)
}

/// A sampled element of the infinitesimal space `T(x0, f)`.
#[derive(Clone, Debug)]
pub struct GeneralizedDerivative {
    pub g: SampledSphereMap,
    pub simple: bool,
    /// `sup_u` distance between consecutive scales.
    pub discrepancies: Vec<f64>,
    pub profile: MeanRadiusProfile,
    x0: VecN,
    fx0: VecN,
    t_min: f64,
    r_min: f64,
}

impl GeneralizedDerivative {
    pub fn center(&self) -> VecN {
        self.x0
    }

    /// `|v|^d q(v/|v|)` with `q` the rescaled map at the finest scale.
    pub fn eval_with(&self, f: &Map, v: VecN) -> VecN {
        let r = v.norm();
        if r == 0.0 {
            return VecN::zeros(v.dim());
        }
        let u = v.scale(1.0 / r);
        (f(self.x0 + u.scale(self.t_min)) - self.fx0).scale(r.powf(self.g.d) / self.r_min)
    }
}

fn check_geometric(ts: &[f64]) -> Result<()> {
    if ts.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 scales".into()));
    }
    let q = ts[1] / ts[0];
    if !(q > 0.0 && q < 1.0) || ts.windows(2).any(|w| ((w[1] / w[0]) - q).abs() > 1e-9 * q) {
        return Err(Error::InvalidArgument(
            "scales must form a decreasing geometric sequence".into(),
        ));
    }
    Ok(())
}

/// Rescaled maps `(f(x0 + t u) - f(x0)) / r_f(t)` over the grid at each
/// scale; the finest one is returned as `g`.
pub fn generalized_derivative(
    f: &Map,
    x0: VecN,
    ts: &[f64],
    grid: &SphereGrid,
) -> Result<GeneralizedDerivative> {
    generalized_derivative_with(f, x0, ts, grid, MeanRadiusMethod::Jacobian)
}

/// As [`generalized_derivative`], with the mean radii computed by `method`.
pub fn generalized_derivative_with(
    f: &Map,
    x0: VecN,
    ts: &[f64],
    grid: &SphereGrid,
    method: MeanRadiusMethod,
) -> Result<GeneralizedDerivative> {
    check_geometric(ts)?;
    if grid.dim() != x0.dim() {
        return Err(Error::DimensionMismatch(x0.dim(), grid.dim()));
    }
    let profile = profile_at(f, x0, ts, method)?;
    let fx0 = f(x0);
    let rescaled: Vec<Vec<VecN>> = profile
        .samples
        .iter()
        .map(|&(t, r)| {
            grid.nodes()
                .par_iter()
                .map(|u| (f(x0 + u.scale(t)) - fx0).scale(1.0 / r))
                .collect()
        })
        .collect();
    if rescaled.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence("non-finite rescaled values".into()));
    }
    let discrepancies: Vec<f64> = rescaled
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| a.dist(b))
                .fold(0.0, f64::max)
        })
        .collect();
    let decreasing = discrepancies
        .windows(2)
        .all(|w| w[1] <= (w[0] + NOISE).max(ROUNDOFF));
    let last = *discrepancies.last().unwrap();
    if !decreasing && last > SIMPLE_TOL {
        return Err(Error::NotConverging(discrepancies));
    }
    let simple = decreasing && last <= SIMPLE_TOL;
    let &(t_min, r_min) = profile.samples.last().unwrap();
    let g = SampledSphereMap {
        grid: grid.clone(),
        values: rescaled.into_iter().last().unwrap(),
        d: profile.fitted_d,
        scale_tag: t_min,
    };
    Ok(GeneralizedDerivative {
        g,
        simple,
        discrepancies,
        profile,
        x0,
        fx0,
        t_min,
        r_min,
    })
}

fn require_simple(gd: &GeneralizedDerivative) -> Result<()> {
    if gd.simple {
        Ok(())
    } else {
        Err(Error::NotConverging(gd.discrepancies.clone()))
    }
}

/// Factor `C` making `C·G(B(0,1))` have the measure of the unit ball.
fn measure_normalizer(g: &Map, n: usize) -> f64 {
    (unit_ball_volume(n) / homogeneous_image_volume(g, n)).powf(1.0 / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRuleReport {
    /// `sup_u |g_{f∘h}(u) - C g_f(g_h(u))|`.
    pub discrepancy: f64,
    pub c: f64,
    pub d_f: f64,
    pub d_h: f64,
    pub d_composite: f64,
}

/// Compares the generalized derivative of `f ∘ h` at 0 with the normalized
/// composition of those of `f` and `h`.
pub fn chain_rule_check(
    f: &Map,
    h: &Map,
    grid: &SphereGrid,
    ts: &[f64],
) -> Result<ChainRuleReport> {
    let n = grid.dim();
    let zero = VecN::zeros(n);
    if f(zero).norm() > 1e-12 || h(zero).norm() > 1e-12 {
        return Err(Error::InvalidArgument("both maps must fix 0".into()));
    }
    let fh = |x: VecN| f(h(x));
    let gf = generalized_derivative(f, zero, ts, grid)?;
    let gh = generalized_derivative(h, zero, ts, grid)?;
    let gfh = generalized_derivative(&fh, zero, ts, grid)?;
    require_simple(&gf)?;
    require_simple(&gh)?;
    require_simple(&gfh)?;
    let comp: Vec<VecN> = gh.g.values.iter().map(|v| gf.eval_with(f, *v)).collect();
    let c = measure_normalizer(&|u| gf.eval_with(f, gh.eval_with(h, u)), n);
    let discrepancy = gfh
        .g
        .values
        .iter()
        .zip(&comp)
        .map(|(a, b)| a.dist(&b.scale(c)))
        .fold(0.0, f64::max);
    Ok(ChainRuleReport {
        discrepancy,
        c,
        d_f: gf.g.d,
        d_h: gh.g.d,
        d_composite: gfh.g.d,
    })
}

/// Solves `f(x0 + ξ) = y` near `x0`, starting from the grid direction whose
/// rescaled image points closest to `y - f(x0)` and a radial bisection.
fn local_inverse(f: &Map, gd: &GeneralizedDerivative, y: VecN) -> Option<VecN> {
    let target = y - gd.fx0;
    let tn = target.norm();
    if tn == 0.0 {
        return Some(gd.x0);
    }
    let (i, _) =
        gd.g.values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.dot(&target) / (v.norm() * tn)))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let u = gd.g.grid.nodes()[i];
    let radial = |s: f64| (f(gd.x0 + u.scale(s)) - gd.fx0).norm() - tn;
    let mut hi = gd.t_min;
    let mut doublings = 0;
    while radial(hi) < 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 80 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if radial(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shifted = |xi: VecN| f(gd.x0 + xi) - gd.fx0;
    let xi = newton_solve(&shifted, target, u.scale(0.5 * (lo + hi)), 1e-13, 60)?;
    Some(gd.x0 + xi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseReport {
    /// `sup_u |g_{f^{-1}}(u) - C g^{-1}(u)|`.
    pub discrepancy: f64,
    pub c: f64,
    pub d: f64,
    pub d_inv: f64,
}

/// Compares `T(0, f^{-1})`, computed from a numerical inverse of `f`, with
/// `C g^{-1}` where `g` is the generalized derivative of `f` at 0.
pub fn inverse_formula_check(f: &Map, grid: &SphereGrid, ts: &[f64]) -> Result<InverseReport> {
    let n = grid.dim();
    let zero = VecN::zeros(n);
    let gd = generalized_derivative(f, zero, ts, grid)?;
    require_simple(&gd)?;
    let d = gd.g.d;
    let finv = |y: VecN| local_inverse(f, &gd, y).unwrap_or(VecN::from_slice(&vec![f64::NAN; n]));
    let q = (ts[1] / ts[0]).powf(d);
    let s0 = gd.profile.samples[0].1;
    let ss: Vec<f64> = (0..ts.len()).map(|k| s0 * q.powi(k as i32)).collect();
    // Only boundary values of the numerical inverse are affordable.
    let ginv_t = generalized_derivative_with(&finv, gd.fx0, &ss, grid, MeanRadiusMethod::Boundary)?;
    // g^{-1} by Newton on the homogeneous extension of g.
    let gext = |x: VecN| gd.eval_with(f, x);
    let ginv_at = |w: VecN| -> Option<VecN> {
        let (i, _) =
            gd.g.values
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.dot(&w) / (v.norm() * w.norm())))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
        let guess = grid.nodes()[i].scale((w.norm() / gd.g.values[i].norm()).powf(1.0 / d));
        newton_solve(&gext, w, guess, 1e-12, 60)
    };
    let ginv = grid
        .nodes()
        .iter()
        .map(|w| ginv_at(*w))
        .collect::<Option<Vec<VecN>>>()
        .ok_or_else(|| Error::NoConvergence("inverting the generalized derivative".into()))?;
    let c = measure_normalizer(
        &|w| ginv_at(w).unwrap_or(VecN::from_slice(&vec![f64::NAN; n])),
        n,
    );
    let discrepancy = ginv_t
        .g
        .values
        .iter()
        .zip(&ginv)
        .map(|(a, b)| a.dist(&b.scale(c)))
        .fold(0.0, f64::max);
    Ok(InverseReport {
        discrepancy,
        c,
        d,
        d_inv: ginv_t.g.d,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRow {
    pub radius: f64,
    /// `sup |F - D| / (|F| + |D|)` over the sphere of this radius.
    pub ratio: f64,
}

pub fn decay_table_csv(rows: &[DecayRow]) -> String {
    let mut s = String::from("radius,ratio\n");
    for r in rows {
        s.push_str(&format!("{:.16e},{:.16e}\n", r.radius, r.ratio));
    }
    s
}

/// Relative deviation of `F(x) = f(x0 + x) - f(x0)` from
/// `D(x) = r_f(|x|) g(x/|x|)` on spheres of the given radii.
pub fn asymptotic_rep_check(
    f: &Map,
    x0: VecN,
    radii: &[f64],
    grid: &SphereGrid,
) -> Result<Vec<DecayRow>> {
    let rmin = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let t = 1e-3 * rmin;
    let ts = [8.0 * t, 4.0 * t, 2.0 * t, t];
    let gd = generalized_derivative(f, x0, &ts, grid)?;
    require_simple(&gd)?;
    let fx0 = f(x0);
    let mut rows = Vec::with_capacity(radii.len());
    for &rho in radii {
        let r = mean_radius(f, x0, rho, MeanRadiusMethod::Jacobian)?;
        let ratio = grid
            .nodes()
            .iter()
            .map(|u| {
                let big_f = f(x0 + u.scale(rho)) - fx0;
                let big_d = gd.eval_with(f, *u).scale(r);
                big_f.dist(&big_d) / (big_f.norm() + big_d.norm())
            })
            .fold(0.0, f64::max);
        rows.push(DecayRow { radius: rho, ratio });
    }
    Ok(rows)
}
