//! Command-line driver: runs one experiment from a TOML config (with flag
//! overrides) or writes the CSV bundle behind one of the four figures.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 I/O failure, 1 other.

use std::path::PathBuf;
use std::process::ExitCode;

use cellpp::exec::with_workers;
use cellpp::runner::{figure_command, run_experiment, ExperimentConfig, FigureId, FigureOptions, ModelKind};
use cellpp::{Error, Execution};
use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "cellpp", version, about = "Monte Carlo study of user point processes in cellular networks")]
struct Cli {
    /// TOML experiment description; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// TypeI, TypeII, Lattice or PPPBaseline.
    #[arg(long)]
    model: Option<String>,
    /// Base-station intensity.
    #[arg(long)]
    lambda: Option<f64>,
    /// Population-to-base-station density ratio (TypeII).
    #[arg(long)]
    eta: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Output directory.
    #[arg(long, env = "CELLPP_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write the bundle for fig1, fig2, fig3 or fig4 instead of running a config.
    #[arg(long)]
    figure: Option<String>,
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &cli.model {
        cfg.model = m.parse::<ModelKind>()?;
    }
    if let Some(l) = cli.lambda {
        cfg.lambda_bs = l;
    }
    if cli.eta.is_some() {
        cfg.eta = cli.eta;
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = cli.realizations {
        cfg.n_realizations = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    let output = if let Some(fig) = &cli.figure {
        let id: FigureId = fig.parse()?;
        let defaults = FigureOptions::default();
        let opts = FigureOptions {
            master_seed: cli.seed.unwrap_or(defaults.master_seed),
            n_realizations: cli.realizations.unwrap_or(defaults.n_realizations),
        };
        if opts.n_realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        with_workers(cli.workers, || figure_command(id, opts, Execution::Parallel))?
    } else {
        let cfg = resolve_config(cli)?;
        with_workers(cli.workers, || run_experiment(&cfg, Execution::Parallel))?
    };
    output.write_to(&cli.out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Io(_) => 3,
                Error::Domain(_) => 1,
            })
        }
    }
}
