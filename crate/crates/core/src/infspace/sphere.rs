use std::collections::HashSet;
use std::f64::consts::PI;

use crate::geometry::VecN;

/// Nodes on the unit sphere `S^{n-1}`: uniform angles in the plane,
/// Fibonacci points in space (with their convex-hull triangulation).
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    n: usize,
    nodes: Vec<VecN>,
    /// Outward-oriented triangles (space only).
    faces: Vec<[usize; 3]>,
}

impl SphereGrid {
    pub fn new(n: usize, count: usize) -> Self {
        assert!(count >= 64, "at least 64 nodes");
        match n {
            2 => {
                let nodes = (0..count)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / count as f64;
                        VecN::new2(th.cos(), th.sin())
                    })
                    .collect();
                SphereGrid {
                    n,
                    nodes,
                    faces: Vec::new(),
                }
            }
            3 => {
                let golden = PI * (3.0 - 5f64.sqrt());
                let nodes: Vec<VecN> = (0..count)
                    .map(|k| {
                        let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                        let r = (1.0 - z * z).sqrt();
                        let phi = golden * k as f64;
                        VecN::new3(r * phi.cos(), r * phi.sin(), z).normalized()
                    })
                    .collect();
                let faces = sphere_hull(&nodes);
                SphereGrid { n, nodes, faces }
            }
            _ => panic!("dimension must be 2 or 3"),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[VecN] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
}

/// Convex hull of points on the unit sphere, all of which are extreme.
/// Incremental; faces are oriented with outward normals.
fn sphere_hull(p: &[VecN]) -> Vec<[usize; 3]> {
    let normal = |f: &[usize; 3]| (p[f[1]] - p[f[0]]).cross(&(p[f[2]] - p[f[0]]));
    // Initial tetrahedron from the first point, the farthest one, and two
    // more chosen for volume.
    let a = 0;
    let b = (1..p.len())
        .max_by(|&i, &j| p[i].dist(&p[a]).total_cmp(&p[j].dist(&p[a])))
        .unwrap();
    let c = (0..p.len())
        .max_by(|&i, &j| {
            let ai = (p[b] - p[a]).cross(&(p[i] - p[a])).norm();
            let aj = (p[b] - p[a]).cross(&(p[j] - p[a])).norm();
            ai.total_cmp(&aj)
        })
        .unwrap();
    let nrm = (p[b] - p[a]).cross(&(p[c] - p[a]));
    let d = (0..p.len())
        .max_by(|&i, &j| {
            nrm.dot(&(p[i] - p[a]))
                .abs()
                .total_cmp(&nrm.dot(&(p[j] - p[a])).abs())
        })
        .unwrap();
    let centroid = (p[a] + p[b] + p[c] + p[d]).scale(0.25);
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = f;
        if normal(&f).dot(&(p[f[0]] - centroid)) < 0.0 {
            f.swap(1, 2);
        }
        faces.push(f);
    }
    for (i, q) in p.iter().enumerate() {
        if [a, b, c, d].contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| normal(f).dot(&(*q - p[f[0]])) > 1e-14)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
            for k in 0..3 {
                edges.insert((f[k], f[(k + 1) % 3]));
            }
        }
        let mut next: Vec<[usize; 3]> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, v)| !**v)
            .map(|(f, _)| *f)
            .collect();
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(u, v)| !edges.contains(&(*v, *u)))
            .copied()
            .collect();
        horizon.sort_unstable();
        for (u, v) in horizon {
            next.push([u, v, i]);
        }
        faces = next;
    }
    faces
}

/// Winding number of the closed polygon `poly` around `y`.
pub fn winding_2d(poly: &[VecN], y: VecN) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly[i] - y;
        let b = poly[(i + 1) % n] - y;
        let cr = a[0] * b[1] - a[1] * b[0];
        if a[1] <= 0.0 {
            if b[1] > 0.0 && cr > 0.0 {
                w += 1;
            }
        } else if b[1] <= 0.0 && cr < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Winding number of a closed triangulated surface around `y`, counted by
/// signed crossings of the ray `y + s e_3`, `s > 0`.
pub fn winding_3d(verts: &[VecN], faces: &[[usize; 3]], y: VecN) -> i32 {
    let mut w = 0;
    for f in faces {
        let (a, b, c) = (verts[f[0]] - y, verts[f[1]] - y, verts[f[2]] - y);
        let d1 = a[0] * b[1] - a[1] * b[0];
        let d2 = b[0] * c[1] - b[1] * c[0];
        let d3 = c[0] * a[1] - c[1] * a[0];
        let inside = (d1 > 0.0 && d2 > 0.0 && d3 > 0.0) || (d1 < 0.0 && d2 < 0.0 && d3 < 0.0);
        if !inside {
            continue;
        }
        let s = d1 + d2 + d3;
        let z = (d2 * a[2] + d3 * b[2] + d1 * c[2]) / s;
        if z > 0.0 {
            w += if s > 0.0 { 1 } else { -1 };
        }
    }
    w
}

/// Degree of a closed triangulated surface around `y` from the total
/// solid angle.
pub fn solid_angle_degree(verts: &[VecN], faces: &[[usize; 3]], y: VecN) -> i32 {
    let total: f64 = faces
        .iter()
        .map(|f| {
            let (a, b, c) = (verts[f[0]] - y, verts[f[1]] - y, verts[f[2]] - y);
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
            2.0 * num.atan2(den)
        })
        .sum();
    (total / (4.0 * PI)).round() as i32
}

/// Signed area (plane) or volume (space) enclosed by the image of the grid.
pub fn enclosed_signed_volume(grid: &SphereGrid, verts: &[VecN]) -> f64 {
    match grid.dim() {
        2 => {
            let n = verts.len();
            0.5 * (0..n)
                .map(|i| {
                    let (a, b) = (verts[i], verts[(i + 1) % n]);
                    a[0] * b[1] - a[1] * b[0]
                })
                .sum::<f64>()
        }
        _ => grid
            .faces()
            .iter()
            .map(|f| verts[f[0]].dot(&verts[f[1]].cross(&verts[f[2]])) / 6.0)
            .sum(),
    }
}

/// Winding number of the image `verts` of the grid around `y`.
pub fn image_winding(grid: &SphereGrid, verts: &[VecN], y: VecN) -> i32 {
    match grid.dim() {
        2 => winding_2d(verts, y),
        _ => winding_3d(verts, grid.faces(), y),
    }
}
