use std::path::Path;
use std::process::Command as Process;

use proptest::prelude::*;
use qrlab_cli::{execute, run, Command, Format, RunConfig};

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml(text).unwrap()
}

fn table<'a>(r: &'a qrlab_cli::Report, name: &str) -> &'a qrlab_cli::report::Table {
    r.tables.iter().find(|t| t.name == name).unwrap()
}

fn column(t: &qrlab_cli::report::Table, name: &str) -> Vec<f64> {
    let i = t.header.iter().position(|h| h == name).unwrap();
    t.rows.iter().map(|r| r[i]).collect()
}

#[test]
fn linearize_power_period_two() {
    let cfg = config("[command]\nfamily = \"power\"\nm = 2\n");
    let r = run(Command::Linearize, &cfg).unwrap().report;
    assert!(r.passed(), "{}", r.to_text());
    let t = table(&r, "linearizers");
    assert_eq!(t.rows.len(), 3);
    assert!(column(t, "residual").iter().all(|x| *x <= 1e-10));
    // multiplier of f^2 is 4 Id
    assert!(column(t, "multiplier_error").iter().all(|x| *x <= 1e-6));
    assert!(column(t, "iterate").iter().all(|k| *k == 2.0));
}

#[test]
fn untwisted_conjugacy_stops_at_once() {
    let cfg = config("[command]\ntwist_angle = 0.0\nradius = 4.0\n");
    let r = run(Command::Conjugacy, &cfg).unwrap().report;
    assert!(r.passed());
    assert_eq!(column(table(&r, "summary"), "k_final"), [0.0]);
    let res = r
        .criteria
        .iter()
        .find(|c| c.name == "conjugacy_residual")
        .unwrap();
    assert_eq!(res.value, 0.0);
}

#[test]
fn cubic_period_of_square_has_seven_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[command]\nm = 3\n");
    let (r, files) = execute(Command::PeriodicPoints, &cfg, Format::Csv, dir.path()).unwrap();
    assert!(r.passed());
    assert_eq!(table(&r, "points").rows.len(), 7);
    let records = std::fs::read_to_string(dir.path().join("periodic-points.records.csv")).unwrap();
    assert_eq!(records.lines().count(), 8);
    assert!(files
        .iter()
        .all(|f| !f.to_string_lossy().ends_with(".json")));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn same_seed_gives_identical_files() {
    let cfg = config("seed = 11\n[command]\nf = \"power:2\"\nh = \"stretch:0.5\"\nnodes = 64\n");
    for format in [Format::Csv, Format::Json] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        execute(Command::ChainRule, &cfg, format, a.path()).unwrap();
        execute(Command::ChainRule, &cfg, format, b.path()).unwrap();
        let (fa, fb) = (read_all(a.path()), read_all(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb);
    }
}

#[test]
fn render_writes_ppm_of_declared_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[command]\nfamily = \"chebyshev\"\nradius = 1.5\nresolution = [40, 30]\n");
    let (r, _) = execute(Command::RenderJulia, &cfg, Format::Text, dir.path()).unwrap();
    assert!(r.criteria.iter().any(|c| c.name == "julia_distance_px"));
    let ppm = std::fs::read(dir.path().join("render-julia.ppm")).unwrap();
    let header = b"P6\n40 30\n255\n";
    assert!(ppm.starts_with(header));
    assert_eq!(ppm.len(), header.len() + 3 * 40 * 30);
    assert!(dir.path().join("render-julia.report.txt").exists());
}

#[test]
fn zorich_campaign() {
    let cfg = config(
        "[command]\nfamily = \"zorich\"\nlambda = 3.0\nradius = 0.5\nsamples = 27\nsearch_radius = 8.0\n\
         [tolerances]\nlinearizer = 1e-5\nmultiplier = 1e-2\n",
    );
    let r = run(Command::VerifySchroder, &cfg).unwrap().report;
    assert!(r.passed(), "{}", r.to_text());
    assert!(r.criteria.iter().any(|c| c.name == "well_defined"));
    let r = run(Command::Linearize, &cfg).unwrap().report;
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn inverse_rule_for_stretch() {
    let cfg = config("[command]\nf = \"stretch:0.5\"\nnodes = 128\nt0 = 0.2\nlevels = 4\n");
    let r = run(Command::InverseRule, &cfg).unwrap().report;
    assert!(r.passed(), "{}", r.to_text());
    let d_inv = column(table(&r, "inverse_rule"), "d_inv")[0];
    assert!((d_inv - 2.0 / 3.0).abs() < 1e-3);
}

fn qrlab(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_qrlab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("QRLAB_THREADS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let ok = write("ok.toml", "[command]\nname = \"periodic-points\"\nm = 2\n");
    let (code, stdout) = qrlab(
        dir.path(),
        &["--config", &ok, "--seed", "3", "--format", "json"],
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("result: PASS"));
    let report = std::fs::read_to_string(dir.path().join("periodic-points.report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["inputs"]["seed"], 3);
    assert_eq!(v["passed"], true);

    let strict = write(
        "strict.toml",
        "[command]\nname = \"linearize\"\n[tolerances]\nlinearizer = 1e-30\n",
    );
    assert_eq!(qrlab(dir.path(), &["--config", &strict]).0, 1);
    let text = std::fs::read_to_string(dir.path().join("linearize.report.txt")).unwrap();
    assert!(text.contains("[FAIL] residual[0]"));

    let bad = write(
        "bad.toml",
        "[command]\nname = \"linearize\"\nlambda = -2.0\n",
    );
    assert_eq!(qrlab(dir.path(), &["--config", &bad]).0, 2);
    let unknown = write("unknown.toml", "[command]\nwobble = 1\n");
    assert_eq!(qrlab(dir.path(), &["linearize", "--config", &unknown]).0, 2);
    assert_eq!(qrlab(dir.path(), &["--config", &ok, "linearize"]).0, 2);
    assert_eq!(qrlab(dir.path(), &[]).0, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_survives_toml_round_trip(
        chain in 1e-12f64..1.0,
        lambda in 1.0f64..5.0,
        m in 1u32..6,
        seed in 0..=i64::MAX as u64,
        point in proptest::option::of(proptest::collection::vec(-2.0f64..2.0, 2)),
    ) {
        let mut cfg = RunConfig::default();
        cfg.tolerances.chain = chain;
        cfg.command.lambda = lambda;
        cfg.command.m = m;
        cfg.command.point = point;
        cfg.seed = seed;
        let text = toml::to_string(&cfg).unwrap();
        prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn non_positive_tolerances_rejected(t in -1.0f64..=0.0) {
        let text = format!("[tolerances]\nmeasure = {t:?}\n");
        prop_assert!(RunConfig::from_toml(&text).is_err());
    }
}
