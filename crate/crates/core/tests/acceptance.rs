//! Acceptance run: one pass/fail line per criterion, in order.

#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use qrlab::automorphic::{
    chordal, evaluate_h, strong_automorphy_check, AutomorphicMap, ExtendedPoint,
};
use qrlab::dynamics::*;
use qrlab::geometry::{
    extract_linear_part, ConformalLinear, DiscreteGroup, Domain, Isometry, Lattice, MatN, VecN,
};
use qrlab::infspace::*;
use qrlab::schroder::*;
use qrlab::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: Vec<(bool, String)>) -> Outcome {
    Outcome {
        pass: checks.iter().all(|c| c.0),
        detail: checks
            .into_iter()
            .map(|(ok, s)| if ok { s } else { format!("FAILED {s}") })
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn doubling() -> ConformalLinear {
    ConformalLinear::scaling(2, 2.0)
}

fn pow(d: u32) -> impl Fn(VecN) -> VecN + Sync {
    move |x: VecN| VecN::from_complex(x.to_complex().powu(d))
}

fn diag(a: f64, b: f64) -> impl Fn(VecN) -> VecN + Sync {
    move |x: VecN| VecN::new2(a * x[0], b * x[1])
}

fn stretch(x: VecN) -> VecN {
    x.scale(x.norm().sqrt())
}

fn dyadic(t0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t0 * 0.5f64.powi(k as i32)).collect()
}

fn periodic_of_square() -> Outcome {
    let h = AutomorphicMap::exp();
    let mut checks = Vec::new();
    for m in 1..=6u32 {
        let recs = periodic_points(&h, &doubling(), m, None).unwrap();
        let n = (1u32 << m) - 1;
        // Nearest root of unity of order 2^m - 1.
        let mut ks: Vec<i64> = Vec::new();
        let mut worst: f64 = 0.0;
        for r in &recs {
            let z = r.x.finite().unwrap().to_complex();
            let k = (z.arg() / (2.0 * PI) * n as f64).round() as i64;
            let k = k.rem_euclid(n as i64);
            ks.push(k);
            worst =
                worst.max((z - Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).norm());
        }
        ks.sort();
        ks.dedup();
        let ok = recs.len() == n as usize && ks.len() == n as usize && worst <= 1e-10;
        checks.push((
            ok,
            format!("m={m}: {} points, max error {worst:.1e}", recs.len()),
        ));
    }
    outcome(checks)
}

fn power_linearization() -> Outcome {
    let h = AutomorphicMap::exp();
    let f = UqrMap::Power(2);
    let mut checks = Vec::new();
    for m in 1..=4u32 {
        let recs = periodic_points(&h, &doubling(), m, None).unwrap();
        let (mut res, mut mult, mut count): (f64, f64, usize) = (0.0, 0.0, 0);
        for rec in recs.iter().filter(|r| !r.branch_flag && !r.x.is_infinite()) {
            let spec = build_linearizer(rec, &h, &doubling()).unwrap();
            res = res.max(linearizer_residual(&spec, &f, &Domain::cube(2, 1.0), 441));
            let j = multiplier_with_hint(&f, &rec.x, m, Some(rec.u)).unwrap();
            mult = mult.max((j - MatN::scalar(2, 2f64.powi(m as i32))).max_abs());
            count += 1;
        }
        let ok = count > 0 && res <= 1e-10 && mult <= 1e-6;
        checks.push((
            ok,
            format!("m={m}: {count} points, residual {res:.1e}, multiplier error {mult:.1e}"),
        ));
    }
    outcome(checks)
}

fn chebyshev_linearization() -> Outcome {
    let h = AutomorphicMap::cos();
    let f = UqrMap::Chebyshev(2);
    let recs = periodic_points(&h, &doubling(), 1, Some(10.0)).unwrap();
    let near = |t: f64| {
        recs.iter().find(|r| {
            r.x.finite()
                .is_some_and(|v| v.dist(&VecN::new2(t, 0.0)) < 1e-10)
        })
    };
    let mut checks = Vec::new();
    let (Some(half), Some(one)) = (near(-0.5), near(1.0)) else {
        return outcome(vec![(
            false,
            format!(
                "fixed points -1/2 and 1 not both found among {}",
                recs.len()
            ),
        )]);
    };
    checks.push((
        one.branch_flag,
        format!("x'=1 branch flag {}", one.branch_flag),
    ));
    let spec = build_linearizer(half, &h, &doubling()).unwrap();
    checks.push((spec.r == 2, format!("r = {}", spec.r)));
    let u = c(2.0 * PI / 3.0, 0.0);
    checks.push((
        spec.u.dist(&VecN::from_complex(u)) < 1e-12,
        format!("u = {:?}", spec.u.as_slice()),
    ));
    let t2 = |w: Complex64| 2.0 * w * w - 1.0;
    let worst = Domain::cube(2, 1.0)
        .grid(441)
        .iter()
        .map(|x| {
            let z = x.to_complex();
            (t2(t2((z + u).cos())) - (4.0 * z + u).cos()).norm()
        })
        .fold(0.0, f64::max);
    checks.push((
        worst <= 1e-10,
        format!("sup |f^2(cos(x+2pi/3)) - cos(4x+2pi/3)| = {worst:.1e}"),
    ));
    let exact = exact_multiplier(&f, c(-0.5, 0.0), 2).unwrap();
    let fd = multiplier(&f, &half.x, 2).unwrap();
    let err = (exact - 4.0)
        .norm()
        .max((fd - MatN::scalar(2, 4.0)).max_abs());
    checks.push((err <= 1e-6, format!("(f^2)'(-1/2) error {err:.1e}")));
    outcome(checks)
}

fn lattes_multipliers() -> Outcome {
    let r = RationalMap::lattes_gaussian();
    let f = UqrMap::Rational(r.clone());
    let finite: Vec<Complex64> = r.fixed_points().into_iter().flatten().collect();
    let mut checks = Vec::new();
    let res = finite
        .iter()
        .map(|z| (r.eval(*z).unwrap() - z).norm())
        .fold(0.0, f64::max);
    checks.push((
        !finite.is_empty() && res <= 1e-10,
        format!("{} finite fixed points, residual {res:.1e}", finite.len()),
    ));
    for z in &finite {
        let x = ExtendedPoint::from_complex(*z);
        let j1 = multiplier(&f, &x, 1).unwrap();
        let modulus = j1.det().abs().sqrt();
        checks.push((
            (modulus - 2f64.sqrt()).abs() <= 1e-6,
            format!("|f'| = {modulus:.9}"),
        ));
        let j4 = multiplier(&f, &x, 4).unwrap();
        let e4 = (j4 - MatN::scalar(2, -4.0)).max_abs();
        let d4 = exact_multiplier(&f, *z, 4).unwrap();
        checks.push((
            e4 <= 1e-5 && d4.im.abs() <= 1e-5,
            format!("(f^4)' = {:.6}+{:.1e}i, FD error {e4:.1e}", d4.re, d4.im),
        ));
        let j8 = multiplier(&f, &x, 8).unwrap();
        let e8 = (j8 - MatN::scalar(2, 16.0)).max_abs();
        checks.push((e8 <= 1e-4, format!("(f^8)' FD error {e8:.1e}")));
    }
    outcome(checks)
}

fn chain_rule() -> Outcome {
    let grid = SphereGrid::new(2, 256);
    let ts = dyadic(0.2, 4);
    let zero = VecN::zeros(2);
    let mut checks = Vec::new();
    let pairs: Vec<(
        &str,
        Box<dyn Fn(VecN) -> VecN + Sync>,
        Box<dyn Fn(VecN) -> VecN + Sync>,
    )> = vec![
        ("(z^2, z^3)", Box::new(pow(2)), Box::new(pow(3))),
        (
            "(diag(2,1), diag(2,1))",
            Box::new(diag(2.0, 1.0)),
            Box::new(diag(2.0, 1.0)),
        ),
        ("(z^2, x|x|^1/2)", Box::new(pow(2)), Box::new(stretch)),
    ];
    for (name, f, h) in &pairs {
        let r = chain_rule_check(f, h, &grid, &ts).unwrap();
        // Set measure of C g_f(g_h(B)) by Monte Carlo, against the unit ball.
        let gf = generalized_derivative(f, zero, &ts, &grid).unwrap();
        let gh = generalized_derivative(h, zero, &ts, &grid).unwrap();
        let comp = |u: VecN| gf.eval_with(f, gh.eval_with(h, u)).scale(r.c);
        let sampled = SampledSphereMap::sample(&comp, &grid, gf.g.d * gh.g.d);
        let ratio = image_ball_measure_seeded(&sampled, 5).mc_volume / unit_ball_volume(2);
        let ok = r.discrepancy <= 1e-3 && (ratio - 1.0).abs() <= 0.02;
        checks.push((
            ok,
            format!(
                "{name}: discrepancy {:.1e}, C = {:.6}, measure ratio {ratio:.4}",
                r.discrepancy, r.c
            ),
        ));
    }
    outcome(checks)
}

fn inverse_formula() -> Outcome {
    let grid = SphereGrid::new(2, 128);
    let ts = dyadic(0.2, 4);
    let s = inverse_formula_check(&stretch, &grid, &ts).unwrap();
    let d = diag(2.0, 3.0);
    let a = inverse_formula_check(&d, &grid, &ts).unwrap();
    outcome(vec![
        (
            (s.d_inv - 2.0 / 3.0).abs() <= 1e-3 && s.discrepancy <= 2e-3,
            format!(
                "x|x|^1/2: inverse homogeneity {:.6}, discrepancy {:.1e}",
                s.d_inv, s.discrepancy
            ),
        ),
        (
            a.discrepancy <= 1e-6,
            format!("diag(2,3): discrepancy {:.1e}", a.discrepancy),
        ),
    ])
}

fn mean_radius_and_homogeneity() -> Outcome {
    let mut checks = Vec::new();
    for d in [2u32, 3] {
        let p = mean_radius_profile(
            &pow(d),
            VecN::zeros(2),
            0.5,
            0.5,
            6,
            MeanRadiusMethod::Jacobian,
        )
        .unwrap();
        let fit = fit_homogeneity(&p).unwrap().d;
        checks.push((
            (fit - d as f64).abs() <= 1e-3,
            format!("z^{d}: d = {fit:.6}"),
        ));
    }
    let x0 = VecN::new2(0.3, 0.2);
    let wp = AutomorphicMap::weierstrass_with_radius(Lattice::gaussian(), 200.0);
    let h_maps: Vec<(&str, AutomorphicMap)> = vec![
        ("exp", AutomorphicMap::exp()),
        ("cos", AutomorphicMap::cos()),
        ("wp", wp),
    ];
    let f_maps: Vec<(&str, UqrMap)> = vec![
        ("z^2", UqrMap::Power(2)),
        ("T_2", UqrMap::Chebyshev(2)),
        ("Lattes", UqrMap::Rational(RationalMap::lattes_gaussian())),
    ];
    let mut worst: (f64, &str) = (0.0, "");
    let mut track = |name: &'static str, g: &Map| {
        let a = mean_radius(g, x0, 0.1, MeanRadiusMethod::Jacobian).unwrap();
        let b = mean_radius(g, x0, 0.1, MeanRadiusMethod::MonteCarlo).unwrap();
        let rel = (a - b).abs() / a.max(b);
        if !(rel <= worst.0) {
            worst = (rel, name);
        }
    };
    for (name, h) in &h_maps {
        track(name, &|x| {
            evaluate_h(h, x)
                .finite()
                .unwrap_or(VecN::new2(f64::NAN, f64::NAN))
        });
    }
    for (name, f) in &f_maps {
        track(name, &|x| {
            uqr_eval(f, &ExtendedPoint::Finite(x), None)
                .ok()
                .and_then(|y| y.finite())
                .unwrap_or(VecN::new2(f64::NAN, f64::NAN))
        });
    }
    checks.push((
        worst.0 <= 0.02,
        format!(
            "Jacobian vs Monte Carlo: worst {:.2e} ({})",
            worst.0, worst.1
        ),
    ));
    outcome(checks)
}

fn gaussian_translations() -> (Lattice, DiscreteGroup) {
    let l = Lattice::gaussian();
    let g = DiscreteGroup::new(
        l.basis()
            .iter()
            .map(|w| Isometry::translation(*w))
            .collect(),
        vec![],
    )
    .unwrap();
    (l, g)
}

fn twisted() -> TwistedMap {
    let (_, g) = gaussian_translations();
    let twist = Twist {
        center: VecN::new2(0.5, 0.5),
        radius: 0.1,
        angle: PI / 3.0,
    };
    construct_nonlinear_a(&g, &doubling(), twist).unwrap()
}

fn conjugacy() -> Outcome {
    let (l, _) = gaussian_translations();
    let a = twisted();
    let opts = ConjugacyOptions {
        radius: 4.0,
        tol: 1e-10,
        lattice: Some(l),
        ..Default::default()
    };
    let r = conjugacy_iteration(&|x| a.apply(x), &doubling(), &opts)
        .unwrap()
        .report;
    outcome(vec![
        (
            a.nonlinearity_witness() > 1e-3,
            format!("|A - M| = {:.2e}", a.nonlinearity_witness()),
        ),
        (
            r.max_ratio_after_burn_in <= 0.55,
            format!(
                "max step ratio {:.4} over k = 0..{}",
                r.max_ratio_after_burn_in, r.k_final
            ),
        ),
        (
            r.residual_conj <= 1e-8,
            format!("sup |i(Ax) - M i(x)| = {:.1e}", r.residual_conj),
        ),
        (
            r.residual_lattice <= 1e-10,
            format!("|i - Id| on lattice = {:.1e}", r.residual_lattice),
        ),
    ])
}

fn linear_part() -> Outcome {
    let (l, _) = gaussian_translations();
    let a = twisted();
    let lin = extract_linear_part(|x| a.apply(x), &l).unwrap();
    let err = (lin.matrix() - doubling().matrix()).max_abs();
    let rejected = extract_linear_part(diag(2.0, 3.0), &l);
    outcome(vec![
        (err <= 1e-12, format!("recovered M, error {err:.1e}")),
        (
            matches!(rejected, Err(Error::NonConformal(_))),
            format!("diag(2,3): {rejected:?}"),
        ),
    ])
}

fn zorich() -> Outcome {
    let h = AutomorphicMap::zorich();
    let mut checks = Vec::new();
    let auto = strong_automorphy_check(&h, 1000, 10);
    checks.push((
        auto.max_residual <= 1e-6 && auto.transitivity_failures == 0,
        format!(
            "automorphy {:.1e}, transitivity {}/{}",
            auto.max_residual,
            auto.transitivity_checked - auto.transitivity_failures,
            auto.transitivity_checked
        ),
    ));
    // The stated multiplier is 2 Id; M = 2 Id does not normalize the group.
    let literal = UqrMap::implicit(h.clone(), ConformalLinear::scaling(3, 2.0));
    checks.push((
        literal.is_ok(),
        format!(
            "M = 2 Id: {}",
            literal
                .as_ref()
                .map_or_else(|e| e.to_string(), |_| "ok".into())
        ),
    ));
    let m = ConformalLinear::scaling(3, 3.0);
    let f = UqrMap::implicit(h.clone(), m).unwrap();
    let far = VecN::new3(13.0, -9.0, 0.0);
    let worst = Domain::cube(3, 0.9)
        .grid(343)
        .iter()
        .map(|x| {
            let y = evaluate_h(&h, *x);
            match (uqr_eval(&f, &y, Some(*x)), uqr_eval(&f, &y, Some(*x + far))) {
                (Ok(a), Ok(b)) => chordal(&a, &b),
                _ => 2.0,
            }
        })
        .fold(0.0, f64::max);
    checks.push((
        worst <= 1e-6,
        format!("M = 3 Id: branch independence {worst:.1e}"),
    ));
    let x = evaluate_h(&h, VecN::zeros(3));
    let class = classify_fixed_point(&f, &x);
    checks.push((
        class == Ok(FixedPointClass::Repelling),
        format!("h(0) {class:?}"),
    ));
    let j = multiplier_with_hint(&f, &x, 1, Some(VecN::zeros(3))).unwrap();
    let e3 = (j - MatN::scalar(3, 3.0)).max_abs();
    let e2 = (j - MatN::scalar(3, 2.0)).max_abs();
    checks.push((e3 <= 1e-2, format!("multiplier error vs 3 Id {e3:.1e}")));
    checks.push((e2 <= 1e-2, format!("multiplier error vs 2 Id {e2:.1e}")));
    let recs = periodic_points(&h, &m, 1, Some(8.0)).unwrap();
    let rec = recs.iter().find(|r| r.u.norm() < 1e-12).unwrap();
    let spec = build_linearizer(rec, &h, &m).unwrap();
    let res = linearizer_residual(&spec, &f, &Domain::cube(3, 0.5), 125);
    checks.push((
        res <= 1e-5,
        format!("linearizer residual {res:.1e} (r = {})", spec.r),
    ));
    outcome(checks)
}

fn julia() -> Outcome {
    let window = Domain::cube(2, 1.5);
    let sq = julia_render(&UqrMap::Power(2), &window, (512, 512), 60).unwrap();
    let px = sq.pixel_size().0;
    let d_sq = sq
        .marked_points()
        .iter()
        .map(|(x, y)| (x.hypot(*y) - 1.0).abs() / px)
        .fold(0.0, f64::max);
    let ch = julia_render(&UqrMap::Chebyshev(2), &window, (512, 512), 60).unwrap();
    let d_ch = ch
        .marked_points()
        .iter()
        .map(|(x, y)| (x.abs() - 1.0).max(0.0).hypot(*y) / px)
        .fold(0.0, f64::max);
    outcome(vec![
        (
            !sq.marked_points().is_empty() && d_sq <= 2.0,
            format!(
                "z^2: {} marked, max {d_sq:.2} px from |z| = 1",
                sq.marked_points().len()
            ),
        ),
        (
            !ch.marked_points().is_empty() && d_ch <= 2.0,
            format!(
                "2z^2-1: {} marked, max {d_ch:.2} px from [-1,1]",
                ch.marked_points().len()
            ),
        ),
    ])
}

/// Criteria that cannot hold as stated. They are still run and printed as
/// FAIL; the run fails if any other criterion fails or if one of these
/// starts passing.
/// 10: M = 2 Id maps the half-turn about (1,1) to one about (2,2), which is
/// not in the Zorich group, so f(h(x)) = h(2x) is not well defined.
const UNATTAINABLE: &[usize] = &[10];

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("periodic points of z^2", periodic_of_square),
        ("simultaneous linearization, power", power_linearization),
        (
            "simultaneous linearization, Chebyshev",
            chebyshev_linearization,
        ),
        ("Lattes multipliers", lattes_multipliers),
        ("chain rule", chain_rule),
        ("inverse formula", inverse_formula),
        ("mean radius and homogeneity", mean_radius_and_homogeneity),
        ("conjugacy iteration", conjugacy),
        ("linear part extraction", linear_part),
        ("Zorich pipeline", zorich),
        ("Julia rasters", julia),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {:>2} {} {name} ({secs:.1} s): {}",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !out.pass {
            failed.push(i + 1);
        }
    }
    println!("failed criteria: {failed:?}; known unattainable: {UNATTAINABLE:?}");
    if failed != UNATTAINABLE {
        std::process::exit(1);
    }
}
