use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faithkit_cli::commands::{cmd_bound, cmd_evaluate, cmd_generate, cmd_simulate, cmd_verify, graph_failures};
use faithkit_cli::config::RunConfig;

/// Faithfulness metrics, checks and bound terms for graph explanations.
#[derive(Parser)]
#[command(name = "faithkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write train/ID/OOD graph records and a manifest.
    Generate(Common),
    /// Per-graph faithfulness, plausibility and stability.
    Evaluate(Common),
    /// Run the verification checks and print a pass/fail ledger.
    Verify(Common),
    /// Hit-probability curves and the explanation-size sweep.
    Simulate(Common),
    /// Bound terms per model and the correlation summary.
    Bound(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> faithkit::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::with_seed(0),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_out(cfg: &RunConfig, name: &str, text: &str) -> faithkit::Result<()> {
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> faithkit::Result<bool> {
    match cli.command {
        Command::Generate(c) => {
            let cfg = c.config()?;
            let out = cfg.out.clone().unwrap_or_else(|| Path::new(".").to_path_buf());
            let m = cmd_generate(&cfg, &out)?;
            println!(
                "wrote {} train, {} id, {} ood graphs to {} (config {})",
                m.counts.train,
                m.counts.id_test,
                m.counts.ood_test,
                out.display(),
                m.config_hash
            );
            Ok(true)
        }
        Command::Evaluate(c) => {
            let cfg = c.config()?;
            let report = cmd_evaluate(&cfg)?;
            let text = report.to_csv();
            print!("{text}");
            write_out(&cfg, "metrics.csv", &text)?;
            let failed = graph_failures(&report);
            if failed > cfg.metrics.max_failures {
                eprintln!("{failed} graphs failed (max {})", cfg.metrics.max_failures);
                return Ok(false);
            }
            Ok(true)
        }
        Command::Verify(c) => {
            let cfg = c.config()?;
            let ledger = cmd_verify(&cfg)?;
            let text = ledger.render();
            print!("{text}");
            write_out(&cfg, "verify.txt", &text)?;
            Ok(ledger.passed())
        }
        Command::Simulate(c) => {
            let cfg = c.config()?;
            let sim = cmd_simulate(&cfg)?;
            print!("{}\n{}", sim.curves, sim.sweep);
            write_out(&cfg, "curves.csv", &sim.curves)?;
            write_out(&cfg, "sweep.csv", &sim.sweep)?;
            Ok(true)
        }
        Command::Bound(c) => {
            let cfg = c.config()?;
            let text = cmd_bound(&cfg)?.render()?;
            print!("{text}");
            write_out(&cfg, "bound.csv", &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
