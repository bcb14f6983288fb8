use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subgrad_core::certifiers::Verdict;
use subgrad_core::harness::{self, ExperimentConfig, CONFIG_ENV};
use subgrad_core::par::Execution;
use subgrad_core::problems::ProblemSpec;
use subgrad_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "subgrad",
    version,
    about = "Subgradient-method instability experiments"
)]
struct Cli {
    /// Run trials and samples on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run independent trials and write one trajectory CSV per trial plus a summary.
    Run(Common),
    /// Run certifiers on a problem and write one report per certifier.
    Certify {
        #[arg(value_name = "PROBLEM")]
        target: String,
        #[arg(required = true)]
        certifiers: Vec<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-verify a trajectory CSV produced by `run`.
    Replay {
        csv: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Escape statistics over an evenly spaced grid of step sizes.
    Sweep {
        #[arg(long)]
        alpha_steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Default)]
struct Common {
    /// Flat `key = value` config file. Falls back to $SUBGRAD_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Robust-PCA data matrix CSV.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    alpha_lo: Option<f64>,
    #[arg(long)]
    alpha_hi: Option<f64>,
    #[arg(long)]
    init_rel_radius: Option<f64>,
    #[arg(long)]
    escape_radius: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// List every coordinate in trajectory CSVs.
    #[arg(long)]
    full_coordinates: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let mut cfg = match (&path, &self.problem) {
            (Some(path), problem) => {
                let cfg = ExperimentConfig::load(path)?;
                if let Some(id) = problem {
                    let wanted = ProblemSpec::from_id(id)?;
                    if wanted.id() != cfg.problem.id() {
                        return Err(Error::Config(format!(
                            "--problem {id} conflicts with `problem = {}` in {}",
                            cfg.problem.id(),
                            path.display()
                        )));
                    }
                }
                cfg
            }
            (None, problem) => ExperimentConfig::for_problem(ProblemSpec::from_id(
                problem.as_deref().unwrap_or("relu-l1"),
            )?),
        };
        let overrides: [(&str, Option<String>); 11] = [
            (
                "matrix",
                self.matrix.as_ref().map(|p| p.display().to_string()),
            ),
            ("rank", self.rank.map(|v| v.to_string())),
            ("trials", self.trials.map(|v| v.to_string())),
            ("alpha_lo", self.alpha_lo.map(|v| v.to_string())),
            ("alpha_hi", self.alpha_hi.map(|v| v.to_string())),
            (
                "init_rel_radius",
                self.init_rel_radius.map(|v| v.to_string()),
            ),
            ("escape_radius", self.escape_radius.map(|v| v.to_string())),
            ("max_iters", self.max_iters.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            (
                "out_dir",
                self.out_dir.as_ref().map(|p| p.display().to_string()),
            ),
            (
                "full_coordinates",
                self.full_coordinates.then(|| "true".to_string()),
            ),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                cfg.set(key, &value)?;
            }
        }
        Ok(cfg)
    }
}

fn print_report(r: &subgrad_core::certifiers::CertificateReport) {
    println!(
        "{}: {} ({} = {})",
        r.certifier,
        r.verdict.label(),
        r.statistic_name,
        r.statistic
    );
}

fn execute(cli: Cli) -> Result<u8> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let summary = harness::run_experiment(&cfg, exec)?;
            for t in &summary.trials {
                println!(
                    "trial {}: alpha = {}, {} after {} steps",
                    t.trial, t.alpha, t.outcome, t.steps
                );
            }
            println!(
                "escaped {}/{} ({}), output in {}",
                summary.escaped(),
                summary.trials.len(),
                summary.escape_fraction(),
                cfg.out_dir.display()
            );
        }
        Command::Certify {
            target,
            certifiers,
            samples,
            mut common,
        } => {
            common.problem = Some(target);
            let mut cfg = common.resolve()?;
            if let Some(n) = samples {
                cfg.samples = n;
            }
            for r in harness::certify(&cfg, &certifiers, exec)? {
                print_report(&r);
            }
        }
        Command::Replay { csv, common } => {
            let cfg = common.resolve()?;
            let p = cfg.problem.build()?;
            let r = harness::replay_file(p.as_ref(), &csv)?;
            match r.verdict {
                Verdict::Violated { step: Some(k) } => {
                    println!("Violated at row {k}");
                    return Ok(harness::EXIT_VIOLATION);
                }
                Verdict::Violated { step: None } => {
                    println!("Violated");
                    return Ok(harness::EXIT_VIOLATION);
                }
                _ => println!(
                    "Satisfied ({} rows, chetaev audit {})",
                    r.samples,
                    r.detail("chetaev_verdict").unwrap_or("n/a")
                ),
            }
        }
        Command::Sweep {
            alpha_steps,
            common,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = alpha_steps {
                cfg.alpha_steps = n;
            }
            for pt in harness::sweep(&cfg, exec)? {
                println!("alpha = {}: escaped {}/{}", pt.alpha, pt.escaped, pt.trials);
            }
        }
    }
    Ok(harness::EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e))
        }
    }
}
