use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use edo_core::config::ExperimentConfig;
use edo_core::harness;
use edo_core::indicators::rows_to_csv;
use edo_core::instance_io::INSTANCE_DIR_ENV;

#[derive(Parser)]
#[command(name = "edo", version, about = "Evolve diverse sets of high-quality solutions")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run NSGA-II and/or SPEA2 and write one archive per run.
    Run(Box<RunArgs>),
    /// Compute the indicator table from a directory of archives.
    Indicators {
        archive_dir: PathBuf,
        /// Output directory (defaults to the archive directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the diversity upper bound for r solutions of size at most b over n columns.
    Bound { n: u64, b: u64, r: u64 },
    /// Write scatter data for plotting from a directory of archives.
    Plotdata {
        archive_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[command(after_help = format!("Instances are looked up in --instance-dir, else ${INSTANCE_DIR_ENV}, else the current directory."))]
struct RunArgs {
    /// key = value configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    instance_dir: Option<PathBuf>,
    /// min or avg.
    #[arg(long)]
    aggregation: Option<String>,
    /// Solutions per individual.
    #[arg(short)]
    r: Option<usize>,
    /// Population size N.
    #[arg(short = 'N', long)]
    population_size: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    /// Mutation rate numerator; the per-bit rate is this over n.
    #[arg(long)]
    chi_numerator: Option<f64>,
    /// Budget = multiplier * r * n * N evaluations.
    #[arg(long)]
    budget_multiplier: Option<f64>,
    /// standard or biased.
    #[arg(long)]
    mutation: Option<String>,
    /// Repair vertex-cover solutions.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    repair: Option<bool>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated list of nsga2, spea2.
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Extra key=value settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<String> {
        let mut o = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push(format!("{k}={v}"));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        push("problem", self.problem.clone());
        push("instance", self.instance.clone());
        push("instance_dir", path(&self.instance_dir));
        push("aggregation", self.aggregation.clone());
        push("r", self.r.map(|v| v.to_string()));
        push("population_size", self.population_size.map(|v| v.to_string()));
        push("crossover_rate", self.crossover_rate.map(|v| format!("{v:?}")));
        push("chi_numerator", self.chi_numerator.map(|v| format!("{v:?}")));
        push("budget_multiplier", self.budget_multiplier.map(|v| format!("{v:?}")));
        push("mutation", self.mutation.clone());
        push("repair", self.repair.map(|v| v.to_string()));
        push("runs", self.runs.map(|v| v.to_string()));
        push("base_seed", self.seed.map(|v| v.to_string()));
        push("algorithms", self.algorithms.clone());
        push("output_dir", path(&self.output_dir));
        push("workers", self.workers.map(|v| v.to_string()));
        o.extend(self.set.iter().cloned());
        o
    }
}

fn execute(cli: Cli) -> edo_core::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = ExperimentConfig::load(args.config.as_deref(), &args.overrides())?;
            for p in harness::cmd_run(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Indicators { archive_dir, out } => {
            let out = out.unwrap_or_else(|| archive_dir.clone());
            let rows = harness::cmd_indicators(&archive_dir, &out)?;
            print!("{}", rows_to_csv(&rows));
        }
        Command::Bound { n, b, r } => println!("{}", harness::cmd_bound(n, b, r)?),
        Command::Plotdata { archive_dir, out } => {
            let out = out.unwrap_or_else(|| archive_dir.clone());
            for p in harness::cmd_plotdata(&archive_dir, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
