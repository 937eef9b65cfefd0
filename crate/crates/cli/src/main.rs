use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eplab_cli::commands::write_oracle;
use eplab_cli::output::write_json;
use eplab_cli::{
    cmd_lp_check, cmd_oracle, cmd_run, cmd_sweep_tau, CliError, LpCheckOptions, RunConfig,
};
use eplab_core::Params;

#[derive(Parser)]
#[command(name = "eplab", version, about = "Damped Euler-Poisson spectral laboratory")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed; overrides the random-init seed, or the lp-check seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration.
    Run,
    /// Repeat a run for each relaxation time.
    SweepTau {
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        /// Tabulate oracle rates only.
        #[arg(long)]
        oracle_only: bool,
    },
    /// Littlewood-Paley property suite on random fields.
    LpCheck {
        #[arg(long)]
        dimension: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, default_value_t = 200)]
        fields: usize,
        #[arg(long, hide = true, num_args = 2, value_names = ["Q", "SCALE"], allow_negative_numbers = true)]
        corrupt_block: Option<Vec<f64>>,
    },
    /// Linear spectrum per wavenumber.
    Oracle {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,3,4")]
        kappas: Vec<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        nbar: Option<f64>,
    },
}

fn load(path: Option<&Path>) -> Result<(RunConfig, String), CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config is required".into()))?;
    RunConfig::load(path)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    match cli.command {
        Command::Run => {
            let (config, text) = load(cli.config.as_deref())?;
            let config = config.with_seed(cli.seed);
            let out = cli.out.unwrap_or_else(|| config.output.dir.clone());
            let summary = cmd_run(&config, &text, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::SweepTau { taus, oracle_only } => {
            let (config, text) = load(cli.config.as_deref())?;
            let config = config.with_seed(cli.seed);
            let out = cli.out.unwrap_or_else(|| config.output.dir.clone());
            let report = cmd_sweep_tau(&config, &text, &taus, &out, oracle_only)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report.failures() > 0 {
                return Err(CliError::Runtime(format!(
                    "{} of {} runs failed",
                    report.failures(),
                    report.rows.len()
                )));
            }
        }
        Command::LpCheck {
            dimension,
            points,
            length,
            fields,
            corrupt_block,
        } => {
            let mut opts = LpCheckOptions::default();
            if let Some(path) = cli.config.as_deref() {
                let (config, _) = RunConfig::load(path)?;
                opts.dimension = config.grid.dimension;
                opts.points = config.grid.points;
                opts.length = config.grid.length;
            }
            opts.dimension = dimension.unwrap_or(opts.dimension);
            opts.points = points.unwrap_or(opts.points);
            opts.length = length.unwrap_or(opts.length);
            opts.fields = fields;
            opts.seed = cli.seed.unwrap_or(opts.seed);
            opts.corrupt = corrupt_block.map(|v| (v[0] as i32, v[1]));
            let report = cmd_lp_check(&opts)?;
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out)?;
                write_json(&out.join("lp_check.json"), &report)?;
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Oracle {
            kappas,
            tau,
            a,
            gamma,
            nbar,
        } => {
            let mut p = match cli.config.as_deref() {
                Some(path) => RunConfig::load(path)?.0.params()?,
                None => Params::reference(),
            };
            p.tau = tau.unwrap_or(p.tau);
            p.a = a.unwrap_or(p.a);
            p.gamma = gamma.unwrap_or(p.gamma);
            p.nbar = nbar.unwrap_or(p.nbar);
            p.validate()
                .map_err(|e| CliError::Config(format!("params: {e}")))?;
            let rows = cmd_oracle(&p, &kappas)?;
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out)?;
                write_oracle(std::fs::File::create(out.join("oracle.csv"))?, &rows)?;
            }
            write_oracle(std::io::stdout().lock(), &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
