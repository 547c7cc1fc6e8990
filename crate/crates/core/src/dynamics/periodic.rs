use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use super::linearizer::multiplier_with_hint;
use crate::automorphic::{chordal, evaluate_h, is_branch_image, AutomorphicMap, ExtendedPoint};
use crate::error::{Error, Result};
use crate::geometry::{ConformalLinear, MatN, VecN};
use crate::schroder::{uqr_iterate, UqrMap};

/// Distinct periodic points closer than this (chordally) are merged.
pub const DEDUP_TOL: f64 = 1e-9;
/// Largest accepted `chordal(f^m(x'), x')`.
pub const PERIODIC_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPointRecord {
    pub m: u32,
    /// Index of `R` in the point group of `h`.
    pub r_index: usize,
    pub rotation: MatN,
    /// Element of the coset `t_R + Λ`.
    pub v: VecN,
    /// `(M^m − R)^{-1} v`.
    pub u: VecN,
    pub x: ExtendedPoint,
    /// Finite-difference Jacobian of `f^m` at `x'` (in the chart `1/z` at ∞).
    pub multiplier: Option<MatN>,
    pub branch_flag: bool,
    pub residual: f64,
}

#[derive(Serialize)]
struct RecordRow {
    m: u32,
    r_index: usize,
    rotation: Vec<Vec<f64>>,
    v: Vec<f64>,
    u: Vec<f64>,
    /// `None` for ∞.
    x: Option<Vec<f64>>,
    multiplier: Option<Vec<Vec<f64>>>,
    branch_flag: bool,
    residual: f64,
}

fn rows(m: &MatN) -> Vec<Vec<f64>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
        .collect()
}

impl PeriodicPointRecord {
    fn row(&self) -> RecordRow {
        RecordRow {
            m: self.m,
            r_index: self.r_index,
            rotation: rows(&self.rotation),
            v: self.v.as_slice().to_vec(),
            u: self.u.as_slice().to_vec(),
            x: self.x.finite().map(|x| x.as_slice().to_vec()),
            multiplier: self.multiplier.as_ref().map(rows),
            branch_flag: self.branch_flag,
            residual: self.residual,
        }
    }
}

pub fn records_to_json(records: &[PeriodicPointRecord]) -> String {
    let rows: Vec<RecordRow> = records.iter().map(|r| r.row()).collect();
    serde_json::to_string_pretty(&rows).expect("records serialize")
}

/// One row per record; vectors are `;`-separated, `x` is `inf` at ∞.
pub fn records_to_csv(records: &[PeriodicPointRecord]) -> String {
    let join = |v: &[f64]| {
        v.iter()
            .map(|c| format!("{c:.16e}"))
            .collect::<Vec<_>>()
            .join(";")
    };
    let mut s = String::from("m,r_index,v,u,x,branch_flag,residual,multiplier\n");
    for r in records {
        let x =
            r.x.finite()
                .map_or("inf".to_string(), |x| join(x.as_slice()));
        let mult = r
            .multiplier
            .as_ref()
            .map_or(String::new(), |m| join(&rows(m).concat()));
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.6e},{}\n",
            r.m,
            r.r_index,
            join(r.v.as_slice()),
            join(r.u.as_slice()),
            x,
            r.branch_flag,
            r.residual,
            mult
        ));
    }
    s
}

/// Enumeration radius used when none is given: `1.5‖M^m − R‖` times the
/// cell diameter of the lattice.
pub fn default_radius(h: &AutomorphicMap, m_lin: &ConformalLinear, m: u32, rot: &MatN) -> f64 {
    let a = m_lin.pow(m).matrix() - *rot;
    1.5 * a.op_norm() * h.group().lattice().cell_diameter()
}

/// Orders candidates by `|v|`, then `R`, then coordinates of `v`
/// descending, so that the first representative of each point is kept.
fn candidate_order(a: &(usize, VecN), b: &(usize, VecN)) -> Ordering {
    a.1.norm()
        .total_cmp(&b.1.norm())
        .then(a.0.cmp(&b.0))
        .then_with(|| {
            for k in 0..a.1.dim() {
                match b.1[k].total_cmp(&a.1[k]) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
}

/// Periodic points of period dividing `m` of the map `f` with `f∘h = h∘M`:
/// `x' = h((M^m − R)^{-1} v)` for `R` in the point group and `v` in the
/// matching coset of the lattice with `|v| ≤ ρ`.
pub fn periodic_points(
    h: &AutomorphicMap,
    m_lin: &ConformalLinear,
    m: u32,
    rho: Option<f64>,
) -> Result<Vec<PeriodicPointRecord>> {
    if m == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let f = UqrMap::implicit(h.clone(), *m_lin)?;
    let mm = m_lin.pow(m).matrix();
    let lattice = h.group().lattice();
    let mut cands: Vec<(usize, VecN)> = Vec::new();
    for (idx, g) in h.group().point_group().iter().enumerate() {
        let rho = rho.unwrap_or_else(|| default_radius(h, m_lin, m, &g.rot()));
        let t = g.shift();
        for w in lattice.points_within(rho + t.norm()) {
            let v = t + w;
            if v.norm() <= rho {
                cands.push((idx, v));
            }
        }
    }
    cands.sort_by(candidate_order);
    let pg = h.group().point_group();
    let solved: Vec<Option<(usize, VecN, VecN, ExtendedPoint)>> = cands
        .par_iter()
        .map(|&(idx, v)| {
            let u = (mm - pg[idx].rot()).solve(v)?;
            Some((idx, v, u, evaluate_h(h, u)))
        })
        .collect();
    let mut kept: Vec<(usize, VecN, VecN, ExtendedPoint)> = Vec::new();
    for (idx, v, u, x) in solved.into_iter().flatten() {
        if kept.iter().all(|k| chordal(&k.3, &x) > DEDUP_TOL) {
            kept.push((idx, v, u, x));
        }
    }
    let records: Vec<Option<PeriodicPointRecord>> = kept
        .par_iter()
        .map(|&(idx, v, u, x)| {
            let fx = uqr_iterate(&f, &x, m, Some(u)).ok()?;
            let residual = chordal(&fx, &x);
            if residual > PERIODIC_TOL {
                return None;
            }
            Some(PeriodicPointRecord {
                m,
                r_index: idx,
                rotation: pg[idx].rot(),
                v,
                u,
                x,
                multiplier: multiplier_with_hint(&f, &x, m, Some(u)).ok(),
                branch_flag: is_branch_image(h, &x),
                residual,
            })
        })
        .collect();
    Ok(records.into_iter().flatten().collect())
}
