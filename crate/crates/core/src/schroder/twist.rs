use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{ConformalLinear, DiscreteGroup, Isometry, MatN, VecN};

/// Radial twist about `center`: rotation by `angle · ρ(|x - center|)`, with
/// `ρ = 1` on `[0, radius]` and `ρ = 0` beyond `2 radius`. In R^3 the
/// rotation axis is the last coordinate direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Twist {
    pub center: VecN,
    pub radius: f64,
    pub angle: f64,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ cutoff: 1 on `[0, r]`, 0 on `[2r, ∞)`.
pub fn smooth_cutoff(s: f64, r: f64) -> f64 {
    let t = (s - r) / r;
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = bump(t);
    1.0 - a / (a + bump(1.0 - t))
}

impl Twist {
    fn rotation(&self, theta: f64) -> MatN {
        match self.center.dim() {
            2 => MatN::rotation2(theta),
            _ => MatN::rotation3(VecN::new3(0.0, 0.0, 1.0), theta),
        }
    }

    /// The local twist (sign `±1` selects it or its inverse).
    fn local(&self, y: VecN, sign: f64) -> VecN {
        let d = y - self.center;
        let rho = smooth_cutoff(d.norm(), self.radius);
        if rho == 0.0 {
            return y;
        }
        self.center + self.rotation(sign * self.angle * rho).apply(d)
    }
}

/// `A = ψ^{-1} ∘ M ∘ ψ` with `ψ` the `G`-equivariant extension of a twist.
#[derive(Clone, Debug)]
pub struct TwistedMap {
    group: DiscreteGroup,
    m: ConformalLinear,
    twist: Twist,
}

impl TwistedMap {
    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    pub fn multiplier(&self) -> &ConformalLinear {
        &self.m
    }

    fn equivariant(&self, x: VecN, sign: f64) -> VecN {
        let t = &self.twist;
        if t.angle == 0.0 {
            return x;
        }
        // The twist balls are disjoint, so at most one contributes.
        match self.group.orbit_near(t.center, x, 2.0 * t.radius).first() {
            Some((g, _)) => g.apply(t.local(g.inverse().apply(x), sign)),
            None => x,
        }
    }

    pub fn psi(&self, x: VecN) -> VecN {
        self.equivariant(x, 1.0)
    }

    pub fn psi_inv(&self, x: VecN) -> VecN {
        self.equivariant(x, -1.0)
    }

    pub fn apply(&self, x: VecN) -> VecN {
        self.psi_inv(self.m.apply(self.psi(x)))
    }

    /// `max |A(x) - M x|` over a circle of radius `1.5 r` about the twist
    /// centre; positive iff `A` differs from `M` there.
    pub fn nonlinearity_witness(&self) -> f64 {
        let t = &self.twist;
        let n = t.center.dim();
        (0..16)
            .map(|k| {
                let phi = k as f64 * std::f64::consts::PI / 8.0;
                let mut d = VecN::zeros(n);
                d[0] = phi.cos();
                d[1] = phi.sin();
                let x = t.center + d.scale(1.5 * t.radius);
                self.apply(x).dist(&self.m.apply(x))
            })
            .fold(0.0, f64::max)
    }
}

/// Builds a non-linear `A` with the same linear part and equivariance as
/// `M`. The twist balls `B(g x0, 2r)` must be pairwise far apart (orbit
/// separation at least `6r`, so `B(x0, 3r)` embeds in the quotient) and
/// must avoid the origin.
pub fn construct_nonlinear_a(
    g: &DiscreteGroup,
    m: &ConformalLinear,
    twist: Twist,
) -> Result<TwistedMap> {
    let n = g.dim();
    if m.dim() != n || twist.center.dim() != n {
        return Err(Error::DimensionMismatch(n, twist.center.dim()));
    }
    if !(twist.radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "twist radius {}",
            twist.radius
        )));
    }
    let near = g.orbit_near(twist.center, twist.center, 6.0 * twist.radius);
    if near.len() != 1 {
        return Err(Error::Geometry(format!(
            "{} orbit points of the twist centre lie within 6r",
            near.len()
        )));
    }
    if !g
        .orbit_near(twist.center, VecN::zeros(n), 2.0 * twist.radius)
        .is_empty()
    {
        return Err(Error::Geometry("twist ball meets the origin".into()));
    }
    Ok(TwistedMap {
        group: g.clone(),
        m: *m,
        twist,
    })
}

/// `M g M^{-1}` as an isometry.
pub fn conjugate_isometry(m: &ConformalLinear, g: &Isometry) -> Isometry {
    let o = m.orth();
    Isometry::new(o * g.rot() * o.transpose(), m.apply(g.shift())).expect("orthogonal")
}

/// `sup |A(g x) - (M g M^{-1})(A x)|` over generators and random `x` in
/// `[-box, box]^n`.
pub fn check_equivariance(
    a: &dyn Fn(VecN) -> VecN,
    g: &DiscreteGroup,
    m: &ConformalLinear,
    half_width: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.dim();
    let gens: Vec<Isometry> = g
        .generators()
        .iter()
        .flat_map(|s| [*s, s.inverse()])
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut x = VecN::zeros(n);
        for k in 0..n {
            x[k] = rng.gen_range(-half_width..half_width);
        }
        let ax = a(x);
        for s in &gens {
            let lhs = a(s.apply(x));
            let rhs = conjugate_isometry(m, s).apply(ax);
            worst = worst.max(lhs.dist(&rhs) / (1.0 + rhs.norm()));
        }
    }
    worst
}
