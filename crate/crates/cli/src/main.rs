//! `hppo`: train, aggregate, plot and ablate from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hppo::env::Task;
use hppo::harness::aggregate::{aggregate_dirs, curves, read_curves, write_curves};
use hppo::harness::ablation::{run_ablation, AblationParam};
use hppo::harness::plot::write_plots;
use hppo::harness::{read_manifest, run, ExperimentConfig, Preset};
use hppo::{Error, GuidanceMode};

#[derive(Parser)]
#[command(name = "hppo", version, about = "PPO with symbolic action guidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where a config comes from plus the overrides every subcommand shares.
#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "task", required_unless_present = "task")]
    config: Option<PathBuf>,
    /// Start from the bundled config of a task instead, e.g. deliver_coffee.
    #[arg(long)]
    task: Option<Task>,
    /// Run only this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// none (ppo), product, symloss or rm.
    #[arg(long)]
    guidance: Option<GuidanceMode>,
    /// paper or desk.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    total_timesteps: Option<u64>,
    /// Root directory for run output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> hppo::Result<ExperimentConfig> {
        let mut config = match (&self.config, self.task) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(task)) => ExperimentConfig::paper(task, GuidanceMode::Product),
            (None, None) => return Err(Error::Config("pass --config or --task".into())),
        };
        if let Some(mode) = self.guidance {
            config.set_mode(mode);
        }
        if let Some(preset) = self.preset {
            config.apply_preset(preset);
        }
        if let Some(seed) = self.seed {
            config.seeds = vec![seed];
        }
        if let Some(total) = self.total_timesteps {
            config.hyperparams.total_timesteps = total;
            config.eval_interval = (total / 100).max(1);
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of an experiment.
    Train(ConfigArgs),
    /// Print the resolved config as JSON.
    Config(ConfigArgs),
    /// Average run directories into a learning-curve CSV.
    Aggregate {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Rolling window in episodes (default: from the runs' config).
        #[arg(long)]
        window: Option<usize>,
        /// Step grid spacing (default: from the runs' config).
        #[arg(long)]
        interval: Option<u64>,
    },
    /// Render one SVG per task from a curve CSV.
    Plot {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep theta or epsilon_f around a base config.
    Ablate {
        #[command(flatten)]
        base: ConfigArgs,
        #[arg(long)]
        param: AblationParam,
    },
}

fn summarize(dirs: &[PathBuf]) -> hppo::Result<()> {
    for dir in dirs {
        let m = read_manifest(dir)?;
        if let Some(s) = &m.summary {
            println!(
                "{}  seed {}  steps {}  episodes {}  final return {:.3}  ({:.1}s)",
                dir.display(),
                m.seed,
                s.global_steps,
                s.episodes,
                s.final_return,
                s.wall_seconds
            );
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> hppo::Result<()> {
    match cli.command {
        Command::Train(args) => summarize(&run(&args.resolve()?)?),
        Command::Config(args) => {
            print!("{}", args.resolve()?.to_json());
            Ok(())
        }
        Command::Aggregate {
            runs,
            out,
            window,
            interval,
        } => {
            let rows = aggregate_dirs(&runs, window, interval)?;
            write_curves(&out, &rows)?;
            for c in curves(&rows) {
                println!("{}  {}  final {:.3}  auc {:.3}", c.task, c.method, c.final_mean(), c.auc());
            }
            Ok(())
        }
        Command::Plot { curves, out } => {
            for path in write_plots(&read_curves(&curves)?, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Ablate { base, param } => summarize(&run_ablation(&base.resolve()?, param)?),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => 3,
        Error::Io { .. } | Error::Csv(_) | Error::Generation(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hppo: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
