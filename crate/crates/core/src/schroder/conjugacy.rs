use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ConformalLinear, Lattice, VecN};
use crate::numeric::par_max;

/// Iterations ignored before the decay test starts.
pub const BURN_IN: usize = 3;
/// Slack over `1/λ` allowed in the step ratio.
pub const RATIO_SLACK: f64 = 0.05;
/// Consecutive slow steps that abort the iteration.
pub const MAX_SLOW_STEPS: usize = 5;

#[derive(Clone, Debug)]
pub struct ConjugacyOptions {
    pub radius: f64,
    pub tol: f64,
    pub kmax: usize,
    /// Grid cells per axis over `[-radius, radius]^n`.
    pub grid_per_axis: usize,
    /// Seed for the jitter inside each grid cell.
    pub seed: u64,
    /// Lattice on which `ι = Id` is checked.
    pub lattice: Option<Lattice>,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions {
            radius: 4.0,
            tol: 1e-10,
            kmax: 80,
            grid_per_axis: 201,
            seed: 0,
            lattice: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyReport {
    /// Index of the last increment; `ι = ι_{k_final + 1}`.
    pub k_final: usize,
    /// `sup |ι_{k+1} - ι_k|` over the grid, for `k = 0..=k_final`.
    pub sup_deltas: Vec<f64>,
    /// `sup |ι(A x) - M ι(x)|` over the grid.
    pub residual_conj: f64,
    /// `sup |ι(w) - w|` over lattice points in the ball.
    pub residual_lattice: f64,
    /// Largest step ratio observed after the burn-in.
    pub max_ratio_after_burn_in: f64,
}

impl ConjugacyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,sup_step\n");
        for (k, d) in self.sup_deltas.iter().enumerate() {
            s.push_str(&format!("{k},{d:.16e}\n"));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ConjugacyResult {
    pub report: ConjugacyReport,
    pub grid: Vec<VecN>,
    pub iota: Vec<VecN>,
}

/// State of `ι_k(x)`: the current orbit point `A^k x` and the accumulated
/// value.
#[derive(Clone, Copy)]
struct Track {
    orbit: VecN,
    acc: VecN,
}

fn advance(a: &(dyn Fn(VecN) -> VecN + Sync), m: &ConformalLinear, t: &mut Track, k: u32) -> f64 {
    let next = a(t.orbit);
    let inc = m.apply_inverse_pow(next - m.apply(t.orbit), k + 1);
    t.acc += inc;
    t.orbit = next;
    inc.norm()
}

/// `ι_k(x) = M^{-k} A^k x`, accumulated as a telescoping sum.
pub fn iota_at(a: &(dyn Fn(VecN) -> VecN + Sync), m: &ConformalLinear, x: VecN, k: usize) -> VecN {
    let mut t = Track { orbit: x, acc: x };
    for j in 0..k {
        advance(a, m, &mut t, j as u32);
    }
    t.acc
}

/// One uniformly jittered point per cell of a regular grid, kept if inside
/// the ball, plus the origin. A regular grid would alias under `A^k`: its
/// images modulo the lattice revisit the same few points.
fn ball_grid(n: usize, radius: f64, per_axis: usize, seed: u64) -> Vec<VecN> {
    let per = per_axis.max(2);
    let h = 2.0 * radius / per as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![VecN::zeros(n)];
    for code in 0..per.pow(n as u32) {
        let mut p = VecN::zeros(n);
        let mut t = code;
        for i in 0..n {
            p[i] = -radius + h * ((t % per) as f64 + rng.gen_range(0.0..1.0));
            t /= per;
        }
        if p.norm() <= radius {
            out.push(p);
        }
    }
    out
}

/// Iterates `ι_k = M^{-k} A^k` on a grid in `B(0, radius)` until the sup
/// step drops to `tol`.
pub fn conjugacy_iteration(
    a: &(dyn Fn(VecN) -> VecN + Sync),
    m: &ConformalLinear,
    opts: &ConjugacyOptions,
) -> Result<ConjugacyResult> {
    let n = m.dim();
    if !(m.scale() > 1.0) {
        return Err(Error::NotContracting(1.0 / m.scale()));
    }
    let grid = ball_grid(n, opts.radius, opts.grid_per_axis, opts.seed);
    let mut tracks: Vec<Track> = grid.iter().map(|x| Track { orbit: *x, acc: *x }).collect();
    let bound = (1.0 / m.scale() + RATIO_SLACK).min(1.0);
    let mut sup_deltas = Vec::new();
    let mut slow = 0;
    let mut max_ratio: f64 = 0.0;
    let mut k = 0usize;
    loop {
        let steps: Vec<f64> = tracks
            .par_iter_mut()
            .map(|t| advance(a, m, t, k as u32))
            .collect();
        let sup = steps.iter().copied().fold(0.0, f64::max);
        if !sup.is_finite() {
            return Err(Error::Diverged(k));
        }
        sup_deltas.push(sup);
        if sup <= opts.tol {
            break;
        }
        if k > BURN_IN {
            let ratio = sup / sup_deltas[k - 1];
            max_ratio = max_ratio.max(ratio);
            if ratio > bound {
                slow += 1;
                if slow >= MAX_SLOW_STEPS {
                    return Err(Error::NotContracting(ratio));
                }
            } else {
                slow = 0;
            }
        }
        k += 1;
        if k >= opts.kmax {
            return Err(Error::NoConvergence(format!(
                "sup step {sup:e} after {k} iterations"
            )));
        }
    }
    let steps_used = k + 1;
    let iota: Vec<VecN> = tracks.iter().map(|t| t.acc).collect();
    let residual_conj = par_max(&grid, |x| {
        let lhs = iota_at(a, m, a(*x), steps_used);
        let rhs = m.apply(iota_at(a, m, *x, steps_used));
        lhs.dist(&rhs)
    });
    let residual_lattice = match &opts.lattice {
        Some(l) => l
            .points_within(opts.radius)
            .iter()
            .map(|w| iota_at(a, m, *w, steps_used).dist(w))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    let report = ConjugacyReport {
        k_final: k,
        sup_deltas,
        residual_conj,
        residual_lattice,
        max_ratio_after_burn_in: max_ratio,
    };
    Ok(ConjugacyResult { report, grid, iota })
}
