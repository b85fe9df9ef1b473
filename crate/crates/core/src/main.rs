use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use attrnet::experiment::{self, CommandOutput, ExperimentConfig, Overrides};

type CommandFn = fn(&ExperimentConfig) -> attrnet::Result<CommandOutput>;

#[derive(Parser)]
#[command(name = "attrnet", version, about = "Attribute-based random graph experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw graphs from a model and check edge density
    Generate(Common),
    /// Crawl a graph and estimate the class kernel
    SampleEstimate(Common),
    /// Degree, spectral, planarity, centrality and walk reports
    Test(Common),
    /// Compare class rankings and crawl versus random-node estimation
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> attrnet::Result<String> {
    let (common, command) = match cli.command {
        Command::Generate(c) => (c, experiment::cmd_generate as CommandFn),
        Command::SampleEstimate(c) => (c, experiment::cmd_sample_estimate as CommandFn),
        Command::Test(c) => (c, experiment::cmd_test as CommandFn),
        Command::Compare(c) => (c, experiment::cmd_compare as CommandFn),
    };
    let env: BTreeMap<String, String> = std::env::vars()
        .filter(|(k, _)| k.starts_with(experiment::ENV_PREFIX))
        .collect();
    let overrides = Overrides {
        seed: common.seed,
        out: common.out,
        reps: common.reps,
    };
    let cfg = ExperimentConfig::resolve(common.config.as_deref(), &env, &overrides)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(attrnet::Error::Config("threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| attrnet::Error::Config(e.to_string()))?;
    let out = pool.install(|| command(&cfg))?;
    let mut text = out.summary;
    for f in out.files {
        text.push_str(&format!("wrote {}\n", f.display()));
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e) as u8)
        }
    }
}
