use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use snn::error::Result;
use snn::harness::{
    cmd_complete, cmd_experiment, cmd_lti, cmd_simulate, CompleteOptions, Estimator, ExperimentConfig, ExperimentKind,
};

#[derive(Parser)]
#[command(name = "snn", version, about = "Matrix completion with synthetic nearest neighbors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated matrices and masks.
    Simulate(Common),
    /// Complete a CSV matrix with `NA` for missing cells.
    Complete {
        #[command(flatten)]
        common: Common,
        /// snn, knn, usvt or softimpute.
        #[arg(long, default_value = "snn")]
        estimator: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run replicated experiments and write result tables.
    Experiment(Common),
    /// Simulate a linear-recurrence panel.
    Lti {
        #[command(flatten)]
        common: Common,
        /// Estimate the counterfactual cells and report their error.
        #[arg(long)]
        evaluate: bool,
    },
}

fn load(common: &Common, fallback: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load_with(path, fallback)?,
        None => match fallback {
            Some(kind) => ExperimentConfig::defaults(kind),
            None => ExperimentConfig::from_toml_str("")?,
        },
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &common.output {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => cmd_simulate(&load(&common, None)?, common.jobs),
        Command::Experiment(common) => {
            let cfg = load(&common, None)?;
            let outcome = cmd_experiment(&cfg, common.jobs)?;
            print!("{}", outcome.table.to_csv());
            Ok(())
        }
        Command::Lti { common, evaluate } => {
            let cfg = load(&common, Some(ExperimentKind::LtiSequential))?;
            let outcome = cmd_lti(&cfg, evaluate)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(rep) = &outcome.evaluation {
                print!("{}", rep.metrics_csv());
            }
            Ok(())
        }
        Command::Complete {
            common,
            estimator,
            input,
        } => {
            let cfg = load(&common, Some(ExperimentKind::RecsysLimited))?;
            let estimator: Estimator = estimator.parse()?;
            if cfg.output_dir.as_os_str().is_empty() {
                return Err(snn::error::Error::Config {
                    field: "output_dir".into(),
                    reason: "required; pass --output".into(),
                });
            }
            cfg.snn.validate()?;
            let opts = CompleteOptions {
                snn: cfg.snn.clone(),
                baselines: cfg.baselines.clone(),
                seed: cfg.master_seed,
                ..CompleteOptions::new(input, cfg.output_dir.clone(), estimator)
            };
            cmd_complete(&opts).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
