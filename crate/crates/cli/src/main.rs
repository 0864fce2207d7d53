use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use uav_harvest::{Mode, ModulationRule};
use uavh_cli::spec::DEFAULT_SEED;
use uavh_cli::verify::{verify_all_to, DEFAULT_VERIFY_TRIALS};
use uavh_cli::{run, ExperimentId, ExperimentSpec, RunSummary, Sweep, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "uavh", version, about = "UAV data-harvesting analysis and Monte Carlo verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment: laplace, coverage, rate, harvest, optimize,
    /// transport, sinr, 2d or figure:<3-11|2d>.
    Run {
        experiment: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the agreement and invariant suite on every *.toml in a directory.
    VerifyAll {
        config_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_VERIFY_TRIALS)]
        trials: u64,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out: PathBuf,
    },
    /// Window-length optimization (the `optimize` experiment).
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Harvested-data / rate identity check (the `transport` experiment).
    Transport {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// key=value override, e.g. `--param lambda=20/km2`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// name=v1,v2,... or name=lin:a:b:n or name=log:a:b:n.
    #[arg(long = "sweep", value_name = "NAME=GRID")]
    sweeps: Vec<Sweep>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Monte Carlo trials per estimate [default: preset value or 100000].
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
    /// Exit nonzero if analytic and simulated values differ by more than 5 SE.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    mode: Option<Mode>,
    /// floor, shannon or a fixed constellation size.
    #[arg(long)]
    modulation: Option<ModulationRule>,
    /// Passage slot length in seconds.
    #[arg(long)]
    slot_duration: Option<f64>,
    /// Simulated windows on each side of the serving one.
    #[arg(long)]
    k_sim: Option<usize>,
}

impl Common {
    fn into_spec(self, id: ExperimentId) -> ExperimentSpec {
        ExperimentSpec {
            id,
            config: self.config,
            overrides: self.params,
            sweeps: self.sweeps,
            out: self.out,
            seed: self.seed,
            trials: self.trials,
            mode: self.mode,
            modulation: self.modulation,
            slot_duration: self.slot_duration,
            k_sim: self.k_sim,
            verify: self.verify,
        }
    }
}

fn report(summary: &RunSummary) -> ExitCode {
    for t in &summary.outcome.tables {
        println!("{}: {} rows", t.metric, t.rows.len());
    }
    for n in &summary.outcome.notes {
        eprintln!("note: {n}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    println!("wall time {:.2} s", summary.wall_time_s);
    if summary.disagreements.is_empty() {
        ExitCode::SUCCESS
    } else {
        for d in &summary.disagreements {
            eprintln!("disagreement: {d}");
        }
        ExitCode::FAILURE
    }
}

fn print_table(summary: &RunSummary, metric: &str) {
    if let Some(t) = summary.outcome.tables.iter().find(|t| t.metric == metric) {
        print!("{}", t.to_csv_string());
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { experiment, common } => {
            let id: ExperimentId = experiment.parse()?;
            let summary = run(&common.into_spec(id)).context("experiment failed")?;
            Ok(report(&summary))
        }
        Command::Optimize { common } => {
            let summary = run(&common.into_spec(ExperimentId::Optimize)).context("optimization failed")?;
            print_table(&summary, "window_optimum");
            Ok(report(&summary))
        }
        Command::Transport { common } => {
            let summary = run(&common.into_spec(ExperimentId::Transport)).context("transport check failed")?;
            print_table(&summary, "transport");
            Ok(report(&summary))
        }
        Command::VerifyAll {
            config_dir,
            seed,
            trials,
            out,
        } => {
            let report = verify_all_to(&config_dir, seed, trials, &out)
                .with_context(|| format!("verify-all on {}", config_dir.display()))?;
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {} {} {}", c.config, c.check, c.detail);
            }
            println!("wrote {}", out.join("verify_all.csv").display());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
