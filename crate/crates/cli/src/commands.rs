use qrlab::automorphic::{
    chordal, evaluate_h, strong_automorphy_check, AutomorphicMap, ExtendedPoint,
};
use qrlab::dynamics::{
    build_linearizer, julia_render, julia_render_slice, linearizer_residual, multiplier_with_hint,
    periodic_points, records_to_csv, records_to_json, PeriodicPointRecord,
};
use qrlab::geometry::{
    extract_linear_part, ConformalLinear, DiscreteGroup, Domain, Isometry, Lattice, MatN, VecN,
};
use qrlab::infspace::{
    chain_rule_check, fit_homogeneity, generalized_derivative, image_ball_measure_seeded,
    inverse_formula_check, mean_radius, mean_radius_profile, unit_ball_volume, MeanRadiusMethod,
    SampledSphereMap, SphereGrid,
};
use qrlab::schroder::{
    conjugacy_iteration, construct_nonlinear_a, fit_lattes_rational, lattes_degree,
    schroder_residual, uqr_eval, ConjugacyOptions, Twist, UqrMap,
};

use crate::config::{Command, CommandTable, FamilyName, RunConfig};
use crate::error::CliError;
use crate::report::{flatten, Criterion, Format, Report, Table};

/// A finished command: the report and any extra files (name, bytes).
pub struct Run {
    pub report: Report,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn linear_part(c: &CommandTable, n: usize) -> Result<ConformalLinear, CliError> {
    let orth = match n {
        2 => MatN::rotation2(c.angle),
        _ => {
            let axis = VecN::new3(c.axis[0], c.axis[1], c.axis[2]);
            if axis.norm() == 0.0 {
                return Err(config_err("rotation axis is zero"));
            }
            MatN::rotation3(axis.normalized(), c.angle)
        }
    };
    Ok(ConformalLinear::new(c.lambda, orth)?)
}

fn lattice_of(c: &CommandTable) -> Result<Lattice, CliError> {
    match &c.lattice {
        None => Ok(Lattice::gaussian()),
        Some(rows) => {
            if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
                return Err(config_err("lattice must be two rows of two numbers"));
            }
            Ok(Lattice::new(
                rows.iter().map(|r| VecN::new2(r[0], r[1])).collect(),
                2,
            )?)
        }
    }
}

/// Integer degree when `M = λ Id` with integer `λ`.
fn integer_degree(c: &CommandTable) -> Option<u32> {
    (c.angle == 0.0 && c.lambda.fract() == 0.0 && c.lambda >= 1.0).then_some(c.lambda as u32)
}

pub struct FamilySetup {
    pub h: AutomorphicMap,
    pub m: ConformalLinear,
    pub f: UqrMap,
}

pub fn family(c: &CommandTable) -> Result<FamilySetup, CliError> {
    let h = match c.family {
        FamilyName::Power => AutomorphicMap::exp(),
        FamilyName::Chebyshev => AutomorphicMap::cos(),
        FamilyName::Lattes => AutomorphicMap::weierstrass_with_radius(lattice_of(c)?, c.wp_radius),
        FamilyName::Zorich => AutomorphicMap::zorich(),
    };
    let m = linear_part(c, h.dim())?;
    let f = match (c.family, integer_degree(c)) {
        (FamilyName::Power, Some(d)) => UqrMap::Power(d),
        (FamilyName::Chebyshev, Some(d)) => UqrMap::Chebyshev(d),
        _ => UqrMap::implicit(h.clone(), m)?,
    };
    Ok(FamilySetup { h, m, f })
}

/// `f` on finite points; NaN where it cannot be evaluated or is ∞.
fn as_map(f: &UqrMap) -> impl Fn(VecN) -> VecN + Sync + '_ {
    let n = f.dim();
    // f is single-valued, so any preimage near 0 will do.
    let hint = (!f.is_closed_form()).then(|| VecN::zeros(n));
    move |x: VecN| match uqr_eval(f, &ExtendedPoint::Finite(x), hint) {
        Ok(ExtendedPoint::Finite(y)) => y,
        _ => VecN::from_slice(&vec![f64::NAN; n]),
    }
}

/// Model maps for the chain and inverse rules.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelMap {
    Power(u32),
    Diag(Vec<f64>),
    /// `x |x|^α` in dimension `n`.
    Stretch(f64, usize),
}

impl ModelMap {
    /// `power:d`, `diag:a,b[,c]`, `stretch:α` or `stretch:α@n`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || config_err(format!("bad model map {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "power" => {
                let d: u32 = arg.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ok(ModelMap::Power(d))
            }
            "diag" => {
                let v: Vec<f64> = arg
                    .split(',')
                    .map(|x| x.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if !(2..=3).contains(&v.len()) || v.iter().any(|a| !(*a != 0.0 && a.is_finite())) {
                    return Err(bad());
                }
                Ok(ModelMap::Diag(v))
            }
            "stretch" => {
                let (a, n) = match arg.split_once('@') {
                    Some((a, n)) => (a, n.trim().parse().map_err(|_| bad())?),
                    None => (arg, 2),
                };
                let a: f64 = a.trim().parse().map_err(|_| bad())?;
                if !(2..=3).contains(&n) || a.is_nan() || a <= -1.0 {
                    return Err(bad());
                }
                Ok(ModelMap::Stretch(a, n))
            }
            _ => Err(bad()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelMap::Power(_) => 2,
            ModelMap::Diag(v) => v.len(),
            ModelMap::Stretch(_, n) => *n,
        }
    }

    pub fn apply(&self, x: VecN) -> VecN {
        match self {
            ModelMap::Power(d) => VecN::from_complex(x.to_complex().powu(*d)),
            ModelMap::Diag(v) => {
                let mut y = x;
                for (i, a) in v.iter().enumerate() {
                    y[i] *= a;
                }
                y
            }
            ModelMap::Stretch(a, _) => x.scale(x.norm().powf(*a)),
        }
    }
}

fn scales(c: &CommandTable) -> Vec<f64> {
    (0..c.levels)
        .map(|k| c.t0 * 0.5f64.powi(k as i32))
        .collect()
}

fn echo(cfg: &RunConfig, command: Command) -> Report {
    let mut r = Report::new(command.name());
    let v = serde_json::to_value(cfg).expect("config serializes");
    flatten("", &v, &mut r.inputs);
    r.inputs
        .insert("command.name".into(), command.name().into());
    r
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let mut report = echo(cfg, command);
    let mut artifacts = Vec::new();
    match command {
        Command::VerifySchroder => verify_schroder(cfg, &mut report)?,
        Command::PeriodicPoints => periodic(cfg, &mut report, &mut artifacts)?,
        Command::Linearize => linearize(cfg, &mut report)?,
        Command::Infspace => infspace(cfg, &mut report)?,
        Command::ChainRule => chain_rule(cfg, &mut report)?,
        Command::InverseRule => inverse_rule(cfg, &mut report)?,
        Command::Conjugacy => conjugacy(cfg, &mut report)?,
        Command::RenderJulia => render(cfg, &mut report, &mut artifacts)?,
    }
    Ok(Run { report, artifacts })
}

/// The format-dependent artifacts are chosen after the run.
pub fn run_with_format(command: Command, cfg: &RunConfig, format: Format) -> Result<Run, CliError> {
    let mut run = run(command, cfg)?;
    let keep = |name: &str| match format {
        Format::Json => !name.ends_with(".csv"),
        Format::Csv | Format::Text => !name.ends_with(".json"),
    };
    run.artifacts.retain(|(name, _)| keep(name));
    Ok(run)
}

fn verify_schroder(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let c = &cfg.command;
    let tol = &cfg.tolerances;
    let FamilySetup { h, m, f } = family(c)?;
    let n = h.dim();
    let domain = Domain::cube(n, c.radius);
    report.push(Criterion::at_most(
        "schroder_residual",
        schroder_residual(&f, &h, &m, &domain, c.samples),
        tol.schroder,
    ));
    let auto = strong_automorphy_check(&h, c.samples.max(100), cfg.seed);
    report.push(Criterion::at_most(
        "automorphy_residual",
        auto.max_residual,
        tol.automorphy,
    ));
    report.push(Criterion::at_most(
        "transitivity_failures",
        auto.transitivity_failures as f64,
        0.0,
    ));
    if !f.is_closed_form() {
        // The value of f at h(x) must not depend on which preimage is used.
        let far = h
            .group()
            .lattice()
            .basis()
            .iter()
            .fold(VecN::zeros(n), |a, w| a + w.scale(3.0));
        let worst = domain
            .grid(c.samples)
            .iter()
            .map(|x| {
                let y = evaluate_h(&h, *x);
                match (uqr_eval(&f, &y, Some(*x)), uqr_eval(&f, &y, Some(*x + far))) {
                    (Ok(a), Ok(b)) => chordal(&a, &b),
                    _ => 2.0,
                }
            })
            .fold(0.0, f64::max);
        report.push(Criterion::at_most("well_defined", worst, tol.well_defined));
    }
    if c.family == FamilyName::Lattes {
        let fit = fit_lattes_rational(&h, &m, lattes_degree(&m))?;
        report.push(Criterion::at_most(
            "lattes_fit_holdout",
            fit.holdout_residual,
            tol.well_defined,
        ));
        let mut t = Table::new(
            "lattes_fit",
            &[
                "power",
                "numerator_re",
                "numerator_im",
                "denominator_re",
                "denominator_im",
            ],
        );
        let (num, den) = (fit.map.numerator(), fit.map.denominator());
        for k in 0..num.len().max(den.len()) {
            let get = |v: &[num_complex::Complex64]| v.get(k).copied().unwrap_or_default();
            let (a, b) = (get(num), get(den));
            t.rows.push(vec![k as f64, a.re, a.im, b.re, b.im]);
        }
        report.tables.push(t);
    }
    Ok(())
}

fn records(cfg: &RunConfig) -> Result<(FamilySetup, Vec<PeriodicPointRecord>), CliError> {
    let setup = family(&cfg.command)?;
    let recs = periodic_points(&setup.h, &setup.m, cfg.command.m, cfg.command.search_radius)?;
    Ok((setup, recs))
}

fn coords(p: &ExtendedPoint, n: usize) -> Vec<f64> {
    p.finite()
        .map_or(vec![f64::INFINITY; n], |v| v.as_slice().to_vec())
}

fn periodic(
    cfg: &RunConfig,
    report: &mut Report,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<(), CliError> {
    let c = &cfg.command;
    let (setup, recs) = records(cfg)?;
    let n = setup.h.dim();
    let worst = recs.iter().map(|r| r.residual).fold(0.0, f64::max);
    report.push(Criterion::at_most(
        "max_residual",
        worst,
        cfg.tolerances.periodic,
    ));
    if let (FamilyName::Power, Some(d)) = (c.family, integer_degree(c)) {
        // z^d has d^m - 1 periodic points of period dividing m in C \ {0}.
        let expected = (d as f64).powi(c.m as i32) - 1.0;
        report.push(Criterion::at_most(
            format!("count_deviation_from_{expected}"),
            (recs.len() as f64 - expected).abs(),
            0.0,
        ));
    }
    let mut header = vec!["index".to_string(), "r_index".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend(["residual".into(), "branch".into()]);
    let mut t = Table {
        name: "points".into(),
        header,
        rows: Vec::new(),
    };
    for (i, r) in recs.iter().enumerate() {
        let mut row = vec![i as f64, r.r_index as f64];
        row.extend(coords(&r.x, n));
        row.extend([r.residual, r.branch_flag as u8 as f64]);
        t.rows.push(row);
    }
    report.tables.push(t);
    artifacts.push((
        "periodic-points.records.csv".into(),
        records_to_csv(&recs).into_bytes(),
    ));
    artifacts.push((
        "periodic-points.records.json".into(),
        records_to_json(&recs).into_bytes(),
    ));
    Ok(())
}

fn linearize(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let c = &cfg.command;
    let tol = &cfg.tolerances;
    let (FamilySetup { h, m, f }, recs) = records(cfg)?;
    let n = h.dim();
    let domain = Domain::cube(n, c.radius);
    let mut header = vec!["index".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n).map(|i| format!("u{i}")));
    header.extend(["r", "iterate", "residual", "multiplier_error", "branch"].map(String::from));
    let mut t = Table {
        name: "linearizers".into(),
        header,
        rows: Vec::new(),
    };
    let mut count = 0;
    for (i, rec) in recs.iter().enumerate() {
        let mut row = vec![i as f64];
        row.extend(coords(&rec.x, n));
        row.extend(rec.u.as_slice());
        if rec.branch_flag || rec.x.is_infinite() {
            row.extend([f64::NAN, f64::NAN, f64::NAN, f64::NAN, 1.0]);
            t.rows.push(row);
            continue;
        }
        count += 1;
        let spec = build_linearizer(rec, &h, &m)?;
        let res = linearizer_residual(&spec, &f, &domain, c.samples);
        let k = spec.iterate();
        let expected = m.pow(k).matrix();
        let err = match multiplier_with_hint(&f, &rec.x, k, Some(rec.u)) {
            Ok(j) => (j - expected).max_abs() / expected.max_abs(),
            Err(_) => f64::INFINITY,
        };
        report.push(Criterion::at_most(
            format!("residual[{i}]"),
            res,
            tol.linearizer,
        ));
        report.push(Criterion::at_most(
            format!("multiplier[{i}]"),
            err,
            tol.multiplier,
        ));
        row.extend([spec.r as f64, k as f64, res, err, 0.0]);
        t.rows.push(row);
    }
    report.push(Criterion::at_least(
        "linearizable_points",
        count as f64,
        1.0,
    ));
    report.tables.push(t);
    Ok(())
}

fn point(c: &CommandTable, n: usize) -> Result<VecN, CliError> {
    match &c.point {
        None => Ok(VecN::zeros(n)),
        Some(p) if p.len() == n => Ok(VecN::from_slice(p)),
        Some(p) => Err(config_err(format!(
            "point has {} coordinates, expected {n}",
            p.len()
        ))),
    }
}

fn infspace(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let c = &cfg.command;
    let tol = &cfg.tolerances;
    let setup = family(c)?;
    let n = setup.f.dim();
    let x0 = point(c, n)?;
    let f = as_map(&setup.f);
    let profile = mean_radius_profile(&f, x0, c.t0, 0.5, c.levels, MeanRadiusMethod::Jacobian)?;
    let fit = fit_homogeneity(&profile)?;
    let expected = c.expected_d.or_else(|| match (&setup.f, x0.norm() == 0.0) {
        (UqrMap::Power(d), true) => Some(*d as f64),
        _ => None,
    });
    if let Some(e) = expected {
        report.push(Criterion::at_most(
            format!("homogeneity_vs_{e}"),
            (fit.d - e).abs(),
            tol.homogeneity,
        ));
    }
    let a = mean_radius(&f, x0, c.t0, MeanRadiusMethod::Jacobian)?;
    let b = mean_radius(&f, x0, c.t0, MeanRadiusMethod::MonteCarlo)?;
    report.push(Criterion::at_most(
        "mean_radius_methods",
        (a - b).abs() / a.max(b),
        tol.mean_radius,
    ));
    let mut t = Table::new("profile", &["t", "r"]);
    t.rows
        .extend(profile.samples.iter().map(|(t, r)| vec![*t, *r]));
    report.tables.push(t);
    let mut s = Table::new(
        "fit",
        &["d", "intercept", "residual", "r_jacobian", "r_monte_carlo"],
    );
    s.rows.push(vec![fit.d, fit.intercept, fit.residual, a, b]);
    report.tables.push(s);
    Ok(())
}

fn chain_rule(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let c = &cfg.command;
    let tol = &cfg.tolerances;
    let (fm, hm) = (ModelMap::parse(&c.f)?, ModelMap::parse(&c.h)?);
    if fm.dim() != hm.dim() {
        return Err(config_err("f and h live in different dimensions"));
    }
    let n = fm.dim();
    let grid = SphereGrid::new(n, c.nodes);
    let ts = scales(c);
    let f = |x: VecN| fm.apply(x);
    let h = |x: VecN| hm.apply(x);
    let r = chain_rule_check(&f, &h, &grid, &ts)?;
    report.push(Criterion::at_most(
        "chain_rule_discrepancy",
        r.discrepancy,
        tol.chain,
    ));
    // Monte-Carlo measure of C g_f(g_h(B)), independent of the boundary
    // integral that fixed C.
    let zero = VecN::zeros(n);
    let gf = generalized_derivative(&f, zero, &ts, &grid)?;
    let gh = generalized_derivative(&h, zero, &ts, &grid)?;
    let comp = |u: VecN| gf.eval_with(&f, gh.eval_with(&h, u)).scale(r.c);
    let sampled = SampledSphereMap::sample(&comp, &grid, gf.g.d * gh.g.d);
    let mc = image_ball_measure_seeded(&sampled, cfg.seed).mc_volume / unit_ball_volume(n);
    report.push(Criterion::at_most(
        "normalized_measure",
        (mc - 1.0).abs(),
        tol.measure,
    ));
    let mut t = Table::new(
        "chain_rule",
        &["c", "d_f", "d_h", "d_composite", "measure_ratio"],
    );
    t.rows.push(vec![r.c, r.d_f, r.d_h, r.d_composite, mc]);
    report.tables.push(t);
    Ok(())
}

fn inverse_rule(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let c = &cfg.command;
    let tol = &cfg.tolerances;
    let fm = ModelMap::parse(&c.f)?;
    let grid = SphereGrid::new(fm.dim(), c.nodes);
    let r = inverse_formula_check(&|x: VecN| fm.apply(x), &grid, &scales(c))?;
    report.push(Criterion::at_most(
        "inverse_discrepancy",
        r.discrepancy,
        tol.inverse,
    ));
    report.push(Criterion::at_most(
        "inverse_homogeneity",
        (r.d_inv - 1.0 / r.d).abs(),
        tol.inverse_d,
    ));
    let mut t = Table::new("inverse_rule", &["c", "d", "d_inv"]);
    t.rows.push(vec![r.c, r.d, r.d_inv]);
    report.tables.push(t);
    Ok(())
}

fn conjugacy(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let c = &cfg.command;
    let tol = &cfg.tolerances;
    let lattice = lattice_of(c)?;
    let group = DiscreteGroup::new(
        lattice
            .basis()
            .iter()
            .map(|w| Isometry::translation(*w))
            .collect(),
        vec![],
    )?;
    let m = linear_part(c, 2)?;
    if c.twist_center.len() != 2 {
        return Err(config_err("twist_center must have two coordinates"));
    }
    let twist = Twist {
        center: VecN::from_slice(&c.twist_center),
        radius: c.twist_radius,
        angle: c.twist_angle,
    };
    let a = construct_nonlinear_a(&group, &m, twist)?;
    let lin = extract_linear_part(|x| a.apply(x), &lattice)?;
    report.push(Criterion::at_most(
        "linear_part_error",
        (lin.matrix() - m.matrix()).max_abs(),
        tol.linear_part,
    ));
    let opts = ConjugacyOptions {
        radius: c.radius,
        tol: c.tol,
        kmax: c.kmax,
        grid_per_axis: c.grid_per_axis,
        seed: cfg.seed,
        lattice: Some(lattice),
    };
    let res = conjugacy_iteration(&|x| a.apply(x), &m, &opts)?.report;
    report.push(Criterion::at_most(
        "step_ratio_after_burn_in",
        res.max_ratio_after_burn_in,
        tol.step_ratio,
    ));
    report.push(Criterion::at_most(
        "conjugacy_residual",
        res.residual_conj,
        tol.conjugacy,
    ));
    report.push(Criterion::at_most(
        "lattice_residual",
        res.residual_lattice,
        tol.lattice,
    ));
    let mut t = Table::new("steps", &["k", "sup_step"]);
    t.rows.extend(
        res.sup_deltas
            .iter()
            .enumerate()
            .map(|(k, d)| vec![k as f64, *d]),
    );
    report.tables.push(t);
    let mut s = Table::new("summary", &["k_final", "nonlinearity"]);
    s.rows
        .push(vec![res.k_final as f64, a.nonlinearity_witness()]);
    report.tables.push(s);
    Ok(())
}

fn render(
    cfg: &RunConfig,
    report: &mut Report,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<(), CliError> {
    let c = &cfg.command;
    let FamilySetup { f, .. } = family(c)?;
    let window = Domain::cube(2, c.radius);
    let res = (c.resolution[0], c.resolution[1]);
    let raster = match f.dim() {
        2 => julia_render(&f, &window, res, c.iterations)?,
        _ => julia_render_slice(&f, &window, res, c.iterations, c.slice)?,
    };
    let (dx, dy) = raster.pixel_size();
    let px = dx.max(dy);
    let pts = raster.marked_points();
    report.push(Criterion::at_least("marked_pixels", pts.len() as f64, 1.0));
    // Known Julia sets: |z| = 1 for z^d and for the Zorich maps (a sphere,
    // cut by the slice), [-1, 1] for T_d.
    let expected: Option<Box<dyn Fn(f64, f64) -> f64>> = match (c.family, integer_degree(c)) {
        (FamilyName::Power, _) => Some(Box::new(|x: f64, y: f64| (x.hypot(y) - 1.0).abs())),
        (FamilyName::Chebyshev, Some(d)) if d >= 2 => {
            Some(Box::new(|x: f64, y: f64| (x.abs() - 1.0).max(0.0).hypot(y)))
        }
        (FamilyName::Zorich, _) if c.slice.abs() < 1.0 => {
            let rho = (1.0 - c.slice * c.slice).sqrt();
            Some(Box::new(move |x: f64, y: f64| (x.hypot(y) - rho).abs()))
        }
        _ => None,
    };
    if let Some(dist) = expected {
        let worst = pts
            .iter()
            .map(|(x, y)| dist(*x, *y) / px)
            .fold(0.0, f64::max);
        report.push(Criterion::at_most(
            "julia_distance_px",
            worst,
            cfg.tolerances.julia_px,
        ));
    }
    let mut t = Table::new("raster", &["width", "height", "pixel_size", "marked"]);
    t.rows.push(vec![
        raster.width as f64,
        raster.height as f64,
        px,
        pts.len() as f64,
    ]);
    report.tables.push(t);
    artifacts.push(("render-julia.ppm".into(), raster.to_ppm()));
    artifacts.push((
        "render-julia.raster.csv".into(),
        raster.to_csv().into_bytes(),
    ));
    Ok(())
}
