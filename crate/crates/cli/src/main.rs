use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lawruk_cli::commands::{self, Outcome, Verdict};
use lawruk_cli::config::RunConfig;
use lawruk_cli::{parse_config, ConfigError, ProblemConfig, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "lawruk", version, about = "Lawruk-elliptic boundary problems: ellipticity, adjoint, disk-model solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interior ellipticity, proper ellipticity and the covering condition.
    CheckEllipticity(Common),
    /// Formally adjoint problem from the Green tableau.
    Adjoint(Common),
    /// Solve the disk problem for the [rhs] table.
    Solve(Common),
    /// Kernel, cokernel and index of the disk problem.
    Fredholm(Common),
    /// Empirical constant of the global a priori estimate.
    Apriori(Common),
    /// Decay envelopes of solutions for envelope data.
    Regularity(Common),
    /// Continuity of derivatives and classical-solution verdict.
    Smoothness(Common),
    /// Finiteness of int dt / (t phi(t)^2).
    Embedding(EmbeddingArgs),
}

#[derive(Args, Clone)]
struct Flags {
    /// Write the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Band limit K.
    #[arg(long)]
    modes: Option<usize>,
    /// Rank tolerance (disk commands) or covering tolerance (check-ellipticity).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// Exponents r1,r2,... of phi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi: Option<Vec<f64>>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Smoothness level l.
    #[arg(long)]
    level: Option<i64>,
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct EmbeddingArgs {
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

impl Flags {
    fn run(&self) -> RunConfig {
        RunConfig {
            modes: self.modes,
            tol: self.tol,
            trials: self.trials,
            s: self.s,
            phi: self.phi.clone(),
            lambda: self.lambda,
            level: self.level,
            seed: None,
        }
    }
}

fn load(path: &PathBuf) -> Result<ProblemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read: {e}")))?;
    parse_config(&text)
}

fn run(command: &Command) -> Result<(Outcome, &Flags, Option<&PathBuf>, &'static str), ConfigError> {
    let with = |c: &Common, name: &'static str| -> Result<(ProblemConfig, RunConfig, &'static str), ConfigError> {
        let cfg = load(&c.config)?;
        let run = cfg.run().overridden_by(&c.flags.run());
        Ok((cfg, run, name))
    };
    let (outcome, flags, path, name) = match command {
        Command::CheckEllipticity(c) => {
            let (cfg, r, n) = with(c, "check-ellipticity")?;
            (commands::check_ellipticity(&cfg, &r), &c.flags, Some(&c.config), n)
        }
        Command::Adjoint(c) => {
            let (cfg, _, n) = with(c, "adjoint")?;
            (commands::adjoint(&cfg), &c.flags, Some(&c.config), n)
        }
        Command::Solve(c) => {
            let (cfg, r, n) = with(c, "solve")?;
            (commands::solve(&cfg, &r), &c.flags, Some(&c.config), n)
        }
        Command::Fredholm(c) => {
            let (cfg, r, n) = with(c, "fredholm")?;
            (commands::fredholm(&cfg, &r), &c.flags, Some(&c.config), n)
        }
        Command::Apriori(c) => {
            let (cfg, r, n) = with(c, "apriori")?;
            (commands::apriori(&cfg, &r), &c.flags, Some(&c.config), n)
        }
        Command::Regularity(c) => {
            let (cfg, r, n) = with(c, "regularity")?;
            (commands::regularity(&cfg, &r), &c.flags, Some(&c.config), n)
        }
        Command::Smoothness(c) => {
            let (cfg, r, n) = with(c, "smoothness")?;
            (commands::smoothness(&cfg, &r), &c.flags, Some(&c.config), n)
        }
        Command::Embedding(e) => {
            let base = match &e.config {
                Some(p) => load(p)?.run().clone(),
                None => RunConfig::default(),
            };
            let r = base.overridden_by(&e.flags.run());
            (commands::embedding(&r), &e.flags, e.config.as_ref(), "embedding")
        }
    };
    Ok((outcome?, flags, path, name))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_path = match &cli.command {
        Command::Embedding(e) => e.config.clone(),
        Command::CheckEllipticity(c)
        | Command::Adjoint(c)
        | Command::Solve(c)
        | Command::Fredholm(c)
        | Command::Apriori(c)
        | Command::Regularity(c)
        | Command::Smoothness(c) => Some(c.config.clone()),
    };
    match run(&cli.command) {
        Ok((outcome, flags, path, name)) => {
            print!("{}", outcome.summary);
            if let Some(json_path) = &flags.json {
                let doc = serde_json::json!({
                    "schemaVersion": SCHEMA_VERSION,
                    "command": name,
                    "config": path.map(|p| p.display().to_string()),
                    "verdict": outcome.verdict.label(),
                    "report": outcome.report,
                });
                let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
                if let Err(e) = std::fs::write(json_path, text + "\n") {
                    eprintln!("error: cannot write {}: {e}", json_path.display());
                    return ExitCode::from(1);
                }
            }
            match outcome.verdict {
                Verdict::Positive => ExitCode::SUCCESS,
                Verdict::Negative => ExitCode::from(2),
            }
        }
        Err(e) => {
            match config_path {
                Some(p) => eprintln!("error: {}: {e}", p.display()),
                None => eprintln!("error: {e}"),
            }
            ExitCode::from(1)
        }
    }
}
