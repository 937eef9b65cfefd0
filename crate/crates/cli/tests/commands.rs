use std::path::Path;

use eplab_cli::commands::{write_oracle, MANIFEST_FILE, SERIES_FILE};
use eplab_cli::output::sha256_hex;
use eplab_cli::{
    cmd_lp_check, cmd_oracle, cmd_run, cmd_sweep_tau, CliError, LpCheckOptions, RunConfig,
};
use eplab_core::diagnostics::SERIES_COLUMNS;
use eplab_core::{InitSpec, ModeTarget, Params};
use serde_json::Value;

fn small(init: InitSpec) -> RunConfig {
    let mut c = RunConfig::reference(init);
    c.grid.points = 32;
    c.time.t_end = 2.0;
    c.time.sample_interval = 0.1;
    c
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

#[test]
fn sha256_known_vector() {
    assert_eq!(
        sha256_hex("abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

#[test]
fn equilibrium_run_is_all_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(InitSpec::equilibrium());
    let summary = cmd_run(&c, &c.emit(), tmp.path()).unwrap();
    assert_eq!(summary.mu_fit, Some(0.0));
    assert_eq!(summary.mu_oracle, None);
    let text = std::fs::read_to_string(tmp.path().join(SERIES_FILE)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SERIES_COLUMNS.join(","));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    for row in &rows {
        assert_eq!(row.len(), 11);
        assert!(row[1..10].iter().all(|&v| v == 0.0), "{row:?}");
    }
    let m = manifest(tmp.path());
    assert!(m["fits"].as_array().unwrap().iter().all(|f| f["mu"] == 0.0));
}

#[test]
fn series_format() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(InitSpec::single(vec![1, 0], 1e-3, ModeTarget::M));
    cmd_run(&c, &c.emit(), tmp.path()).unwrap();
    let text = std::fs::read_to_string(tmp.path().join(SERIES_FILE)).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    for line in text.lines().skip(1) {
        for v in line.split(',') {
            let mantissa = v.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.replace('.', "").len(), 17, "{v}");
            let x: f64 = v.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), v);
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(InitSpec::Random(eplab_core::RandomSpec {
        seed: 11,
        amplitude: 1e-3,
        band: [1.0, 4.0],
    }));
    c.time.t_end = 0.5;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    cmd_run(&c, &c.emit(), &a).unwrap();
    cmd_run(&c, &c.emit(), &b).unwrap();
    let read = |d: &Path| std::fs::read(d.join(SERIES_FILE)).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn reference_run_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let c = RunConfig::reference(InitSpec::single(vec![1, 0], 1e-4, ModeTarget::M));
    let text = c.emit();
    let summary = cmd_run(&c, &text, tmp.path()).unwrap();
    let m = manifest(tmp.path());
    assert_eq!(m["config"], text.as_str());
    assert_eq!(m["config_sha256"], sha256_hex(&text).as_str());
    assert_eq!(m["status"]["ok"], true);
    let p = Params::reference();
    assert_eq!(m["params"]["psi_bar"], p.psi_bar());
    assert_eq!(m["params"]["c"], p.c());
    assert_eq!(m["params"]["sigma"], 2.0);
    // oracle: slow root of lambda^2 + 2 lambda + 3 = 0 has real part -1
    assert_eq!(m["oracle"]["mu"], 1.0);
    let joint = m["fits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["series"] == "joint")
        .unwrap();
    let mu = joint["mu"].as_f64().unwrap();
    assert_eq!(Some(mu), summary.mu_fit);
    assert!((mu - 1.0).abs() < 0.05, "{mu}");
    assert_eq!(joint["window"][0], 2.0);
    assert!(joint["residual"].as_f64().unwrap().is_finite());
}

#[test]
fn runtime_violation_reports_time_and_keeps_series() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(InitSpec::single(vec![1, 0], 1e-3, ModeTarget::M));
    c.time.dt = Some(0.5);
    c.time.sample_interval = 0.5;
    let err = cmd_run(&c, &c.emit(), tmp.path()).unwrap_err();
    assert!(matches!(err, CliError::Runtime(ref m) if m.contains("t = 0")), "{err}");
    assert_eq!(err.exit_code(), 3);
    let m = manifest(tmp.path());
    assert_eq!(m["status"]["ok"], false);
    assert_eq!(m["status"]["t"], 0.0);
    assert_eq!(m["samples"], 1);
}

#[test]
fn domain_violation_at_start() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(InitSpec::single(vec![1, 0], 3.0, ModeTarget::M));
    let err = cmd_run(&c, &c.emit(), tmp.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    assert!(err.to_string().contains("t = 0"));
}

#[test]
fn sweep_oracle_values() {
    let tmp = tempfile::tempdir().unwrap();
    let c = RunConfig::reference(InitSpec::single(vec![1, 0], 1e-4, ModeTarget::M));
    let r = cmd_sweep_tau(&c, &c.emit(), &[0.1, 2.0], tmp.path(), true).unwrap();
    // slow root of lambda^2 + 10 lambda + 3 = 0
    assert!((r.rows[0].mu_oracle.unwrap() - (5.0 - 22f64.sqrt())).abs() < 1e-12);
    assert!((r.rows[0].mu_oracle.unwrap() - 0.3096).abs() < 1e-3);
    assert!((r.rows[1].mu_oracle.unwrap() - 0.25).abs() < 1e-14);
    let table = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("tau,mu_fit,mu_oracle,status\n"));
}

#[test]
fn sweep_singleton() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(InitSpec::single(vec![1, 0], 1e-4, ModeTarget::M));
    let r = cmd_sweep_tau(&c, &c.emit(), &[0.5], tmp.path(), false).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.failures(), 0);
    assert!(r.rows[0].mu_fit.is_some());
    assert!(tmp.path().join("tau-000").join(SERIES_FILE).exists());
    assert_eq!(r.oracle_slope_small_tau, None);
}

#[test]
fn sweep_slopes_from_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let c = RunConfig::reference(InitSpec::single(vec![1, 0], 1e-4, ModeTarget::M));
    let taus = [1e-3, 2e-3, 5e-3, 1e-2, 1e2, 2e2, 5e2, 1e3];
    let r = cmd_sweep_tau(&c, &c.emit(), &taus, tmp.path(), true).unwrap();
    assert!((r.oracle_slope_small_tau.unwrap() - 1.0).abs() < 0.1);
    assert!((r.oracle_slope_large_tau.unwrap() + 1.0).abs() < 0.1);
}

#[test]
fn sweep_continues_past_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(InitSpec::single(vec![1, 0], 1e-3, ModeTarget::M));
    c.time.dt = Some(0.02);
    // explicit RK4 is unstable for dt/tau beyond about 2.8
    let r = cmd_sweep_tau(&c, &c.emit(), &[0.5, 0.002], tmp.path(), false).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows[0].failure.is_none());
    assert!(r.rows[1].failure.is_some(), "{:?}", r.rows[1]);
    let table = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(table.lines().nth(2).unwrap().contains("failed"));
}

#[test]
fn sweep_rejects_bad_taus() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(InitSpec::equilibrium());
    for taus in [&[][..], &[0.5, -1.0][..]] {
        let e = cmd_sweep_tau(&c, &c.emit(), taus, tmp.path(), true).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}

#[test]
fn lp_check_default_grid_passes() {
    let report = cmd_lp_check(&LpCheckOptions::default()).unwrap();
    assert_eq!(report.points, 128);
    assert!(report.passed(), "{report:?}");
    assert!(report.checks.len() >= 5);
    for c in &report.checks {
        assert!(c.max_residual.is_finite() && c.max_residual <= c.tolerance, "{c:?}");
    }
    let json = serde_json::to_value(&report).unwrap();
    assert!(json["checks"][0]["max_residual"].is_number());
}

#[test]
fn lp_check_detects_corrupted_cutoff() {
    let opts = LpCheckOptions {
        points: 32,
        fields: 4,
        corrupt: Some((1, 1.01)),
        ..LpCheckOptions::default()
    };
    let report = cmd_lp_check(&opts).unwrap();
    assert!(!report.passed());
    assert!(!report.check("partition_of_unity").unwrap().passed);
    let bad = LpCheckOptions {
        corrupt: Some((40, 1.01)),
        ..opts
    };
    assert_eq!(cmd_lp_check(&bad).unwrap_err().exit_code(), 2);
}

#[test]
fn oracle_rows() {
    let rows = cmd_oracle(&Params::reference(), &[0.0, 1.0]).unwrap();
    let s2 = 2f64.sqrt();
    let r1 = rows[1];
    assert!((r1.re_plus + 1.0).abs() < 1e-14 && (r1.im_plus - s2).abs() < 1e-14);
    assert!((r1.re_minus + 1.0).abs() < 1e-14 && (r1.im_minus + s2).abs() < 1e-14);
    assert_eq!(r1.solenoidal, -2.0);
    // kappa = 0: lambda^2 + 2 lambda + 1 = 0 with the coupling, lambda (lambda + 2) = 0 without
    let r0 = rows[0];
    assert!((r0.re_plus + 1.0).abs() < 1e-7 && (r0.re_minus + 1.0).abs() < 1e-7);
    assert_eq!(r0.re_plus_uncoupled, 0.0);
    assert!((r0.re_minus_uncoupled + 2.0).abs() < 1e-14);
    let mut buf = Vec::new();
    write_oracle(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("kappa,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,solenoidal,"));
    assert!(cmd_oracle(&Params::reference(), &[-1.0]).is_err());
}
