use std::path::{Path, PathBuf};
use std::time::Instant;

use eplab_core::diagnostics::{default_window, fit_rates, Recorder};
use eplab_core::lp::suite::{run_suite, SuiteReport};
use eplab_core::oracle::{loglog_slope, mode_spectrum, Coupling};
use eplab_core::{
    build_cutoffs, compatible_init, evolve, predicted_decay_rate, Excitation, Grid,
    IntegratorError, ModelError, Observer, Params, Series, SymmetricSystem, System,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{
    format_value, sha256_hex, write_json, write_series_file, GridInfo, Manifest, OracleInfo,
    ParamsInfo, Status,
};
use crate::CliError;

pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub dir: PathBuf,
    /// Fitted rate of the joint `B^sigma` norm of `(m, u, e)`.
    pub mu_fit: Option<f64>,
    pub mu_oracle: Option<f64>,
    pub violation: Option<String>,
}

fn excitation_of(config: &RunConfig, grid: &Grid) -> Excitation {
    let (kappas, solenoidal) = config.init.excitation(grid);
    Excitation { kappas, solenoidal }
}

fn oracle_info(excitation: Excitation, params: &Params) -> OracleInfo {
    match predicted_decay_rate(&excitation, params) {
        Ok(mu) => OracleInfo {
            excitation,
            mu: Some(mu),
            error: None,
        },
        Err(e) => OracleInfo {
            excitation,
            mu: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs one configuration and writes `series.csv` and `manifest.json` to
/// `out`. A runtime violation still writes both files, then returns
/// [`CliError::Runtime`].
pub fn cmd_run(config: &RunConfig, config_text: &str, out: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    config.validate()?;
    let grid = config.grid()?;
    let params = config.params()?;
    let cutoffs = build_cutoffs(&grid).map_err(|e| CliError::Config(format!("grid: {e}")))?;
    let initial = compatible_init(&config.init, &params, &grid).map_err(|e| match e {
        ModelError::DomainViolation { index, .. } | ModelError::NonPositiveDensity { index, .. } => {
            CliError::Runtime(format!("t = 0: {e} (x = {:?})", grid.coordinates(index)))
        }
        other => CliError::Config(format!("init: {other}")),
    })?;
    let system = SymmetricSystem::with_options(params, config.rhs_options());
    let control = config.control();
    let resolved = control.resolve(grid.spacing(), system.wave_speed(&initial)).ok();

    let mut recorder = Recorder::new(&cutoffs, params);
    let result = {
        let mut observers: [&mut dyn Observer<SymmetricSystem>; 1] = [&mut recorder];
        evolve(&system, &initial, &control, &mut observers)
    };
    let samples = recorder.samples;

    std::fs::create_dir_all(out)?;
    write_series_file(&out.join(SERIES_FILE), &samples)?;

    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let fits = fit_rates(&samples, default_window(&times));
    let oracle = oracle_info(excitation_of(config, &grid), &params);
    let status = match &result {
        Ok(_) => Status {
            ok: true,
            violation: None,
            t: None,
        },
        Err(e) => Status {
            ok: false,
            violation: Some(e.to_string()),
            t: e.time(),
        },
    };
    let mu_fit = fits
        .iter()
        .find(|f| f.series == Series::Joint)
        .map(|f| f.mu)
        .filter(|mu| mu.is_finite());
    let summary = RunSummary {
        dir: out.to_path_buf(),
        mu_fit,
        mu_oracle: oracle.mu,
        violation: status.violation.clone(),
    };
    let manifest = Manifest {
        tool: "eplab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(config_text),
        config: config_text.into(),
        init: config.init.clone(),
        grid: GridInfo::new(&grid, &cutoffs),
        params: ParamsInfo::new(&params, grid.dim()),
        scheme: control.scheme,
        e_mode: config.model.e_mode,
        linear: config.model.linear,
        dt: resolved.map(|r| r.0),
        steps_per_sample: resolved.map(|r| r.1),
        samples: samples.len(),
        series_file: SERIES_FILE.into(),
        fits,
        oracle,
        last_sample: samples.last().copied(),
        status,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;

    match result {
        Ok(_) => Ok(summary),
        Err(IntegratorError::InvalidControl(m)) => Err(CliError::Config(format!("time: {m}"))),
        Err(e) => Err(CliError::Runtime(e.to_string())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub mu_fit: Option<f64>,
    pub mu_oracle: Option<f64>,
    pub dir: Option<PathBuf>,
    /// `None` when the run succeeded.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Log-log slopes of `mu` against `tau` over `tau <= 1` and `tau > 1`.
    pub oracle_slope_small_tau: Option<f64>,
    pub oracle_slope_large_tau: Option<f64>,
    pub fit_slope_small_tau: Option<f64>,
    pub fit_slope_large_tau: Option<f64>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }
}

fn branch_slope(rows: &[SweepRow], small: bool, value: impl Fn(&SweepRow) -> Option<f64>) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| (r.tau <= 1.0) == small)
        .filter_map(|r| value(r).filter(|&v| v > 0.0).map(|v| (r.tau, v)))
        .collect();
    let distinct = points.iter().any(|p| p.0 != points[0].0);
    (points.len() >= 2 && distinct).then(|| loglog_slope(&points))
}

/// One run per `tau` in parallel, each into its own directory under `out`.
/// Failed runs are flagged in the table and do not stop the sweep. With
/// `oracle_only` no simulations are run.
pub fn cmd_sweep_tau(
    config: &RunConfig,
    config_text: &str,
    taus: &[f64],
    out: &Path,
    oracle_only: bool,
) -> Result<SweepReport, CliError> {
    if taus.is_empty() {
        return Err(CliError::Config("taus: empty list".into()));
    }
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Config(format!("taus: {t} is not a positive number")));
    }
    config.validate()?;
    let grid = config.grid()?;
    let excitation = excitation_of(config, &grid);
    std::fs::create_dir_all(out)?;

    let rows: Vec<SweepRow> = taus
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let cfg = config.clone().with_tau(tau);
            let mu_oracle = cfg
                .params()
                .ok()
                .and_then(|p| predicted_decay_rate(&excitation, &p).ok());
            if oracle_only {
                return SweepRow {
                    tau,
                    mu_fit: None,
                    mu_oracle,
                    dir: None,
                    failure: None,
                };
            }
            let dir = out.join(format!("tau-{i:03}"));
            let (mu_fit, failure) = match cmd_run(&cfg, config_text, &dir) {
                Ok(s) => (s.mu_fit, None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow {
                tau,
                mu_fit,
                mu_oracle,
                dir: Some(dir),
                failure,
            }
        })
        .collect();

    let report = SweepReport {
        oracle_slope_small_tau: branch_slope(&rows, true, |r| r.mu_oracle),
        oracle_slope_large_tau: branch_slope(&rows, false, |r| r.mu_oracle),
        fit_slope_small_tau: branch_slope(&rows, true, |r| r.mu_fit),
        fit_slope_large_tau: branch_slope(&rows, false, |r| r.mu_fit),
        rows,
    };

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out.join("sweep.csv"))?;
    w.write_record(["tau", "mu_fit", "mu_oracle", "status"])?;
    for r in &report.rows {
        let opt = |v: Option<f64>| v.map(format_value).unwrap_or_else(|| "NaN".into());
        let status = match (&r.failure, oracle_only) {
            (Some(m), _) => format!("failed: {m}"),
            (None, true) => "oracle-only".into(),
            (None, false) => "ok".into(),
        };
        w.write_record([format_value(r.tau), opt(r.mu_fit), opt(r.mu_oracle), status])?;
    }
    w.flush()?;
    write_json(&out.join("sweep.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpCheckOptions {
    pub dimension: usize,
    pub points: usize,
    pub length: f64,
    pub fields: usize,
    pub seed: u64,
    /// Scales block `q` of the cutoff family by the given factor.
    pub corrupt: Option<(i32, f64)>,
}

impl Default for LpCheckOptions {
    fn default() -> Self {
        Self {
            dimension: 2,
            points: 128,
            length: 2.0 * std::f64::consts::PI,
            fields: 200,
            seed: 2024,
            corrupt: None,
        }
    }
}

/// Runs the dyadic property suite. Failing checks are report content, not
/// errors.
pub fn cmd_lp_check(opts: &LpCheckOptions) -> Result<SuiteReport, CliError> {
    let grid = Grid::new(opts.dimension, opts.points, opts.length)
        .map_err(|e| CliError::Config(format!("grid: {e}")))?;
    let mut cutoffs = build_cutoffs(&grid).map_err(|e| CliError::Config(format!("grid: {e}")))?;
    if let Some((q, scale)) = opts.corrupt {
        if !cutoffs.blocks().contains(&q) {
            return Err(CliError::Config(format!(
                "corrupt-block: {q} outside {:?}",
                cutoffs.blocks()
            )));
        }
        cutoffs = cutoffs.perturbed(q, scale);
    }
    if opts.fields == 0 {
        return Err(CliError::Config("fields: must be positive".into()));
    }
    run_suite(&cutoffs, opts.fields, opts.seed).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub kappa: f64,
    pub re_plus: f64,
    pub im_plus: f64,
    pub re_minus: f64,
    pub im_minus: f64,
    /// `-1/tau`
    pub solenoidal: f64,
    /// Roots with the Poisson coupling removed.
    pub re_plus_uncoupled: f64,
    pub re_minus_uncoupled: f64,
}

pub const ORACLE_COLUMNS: [&str; 8] = [
    "kappa",
    "re_lambda_plus",
    "im_lambda_plus",
    "re_lambda_minus",
    "im_lambda_minus",
    "solenoidal",
    "re_lambda_plus_uncoupled",
    "re_lambda_minus_uncoupled",
];

impl OracleRow {
    pub fn values(&self) -> [f64; 8] {
        [
            self.kappa,
            self.re_plus,
            self.im_plus,
            self.re_minus,
            self.im_minus,
            self.solenoidal,
            self.re_plus_uncoupled,
            self.re_minus_uncoupled,
        ]
    }
}

pub fn cmd_oracle(params: &Params, kappas: &[f64]) -> Result<Vec<OracleRow>, CliError> {
    if let Some(k) = kappas.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
        return Err(CliError::Config(format!("kappas: {k} is not a nonnegative number")));
    }
    Ok(kappas
        .iter()
        .map(|&kappa| {
            let s = mode_spectrum(kappa, params, Coupling::Poisson);
            let d = mode_spectrum(kappa, params, Coupling::Disabled);
            OracleRow {
                kappa,
                re_plus: s.lambda_plus.re,
                im_plus: s.lambda_plus.im,
                re_minus: s.lambda_minus.re,
                im_minus: s.lambda_minus.im,
                solenoidal: s.solenoidal,
                re_plus_uncoupled: d.lambda_plus.re,
                re_minus_uncoupled: d.lambda_minus.re,
            }
        })
        .collect())
}

pub fn write_oracle<W: std::io::Write>(writer: W, rows: &[OracleRow]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(ORACLE_COLUMNS)?;
    for r in rows {
        w.write_record(r.values().iter().map(|&v| format_value(v)))?;
    }
    w.flush()?;
    Ok(())
}
