use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nqcs_core::harness::{self, exit_code};
use nqcs_core::{Result, SimConfig};

#[derive(Parser)]
#[command(
    name = "nqcs",
    version,
    about = "Event-triggered networked quantized control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write trace.csv, summary.json and plot.csv.
    Simulate(Common),
    /// Run the configured scenario against its rho = 0 baseline.
    Compare(Common),
    /// Compute the largest (T, Delta) per network.
    Design(Common),
    /// Check a config without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML or JSON scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the integrator step.
    #[arg(long)]
    step: Option<f64>,
    /// Bisection tolerance for `design`, monitor tolerance otherwise.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<SimConfig> {
        let mut c = SimConfig::from_path(&self.config)?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(h) = self.step {
            c.step = h;
        }
        Ok(c)
    }
}

fn write_json<T: serde::Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let mut c = a.load()?;
            if let Some(t) = a.tol {
                c.monitor.tol = t;
            }
            let scenario = c.build()?;
            for w in &scenario.warnings {
                eprintln!("warning: {w}");
            }
            let out = harness::simulate(&scenario)?;
            harness::write_simulation(&out, &a.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&out.summary)?);
            if let Some(m) = &out.monitor {
                if !m.is_clean() {
                    eprintln!("monitor: {} violation(s)", m.violations.len());
                }
            }
        }
        Command::Compare(a) => {
            let scenario = a.load()?.build()?;
            let report = harness::compare(&scenario)?;
            write_json(&a.out_dir, "compare.json", &report)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Design(a) => {
            let table = harness::design(&a.load()?, a.tol.unwrap_or(1e-6))?;
            write_json(&a.out_dir, "design.json", &table)?;
            println!("{}", serde_json::to_string_pretty(&table)?);
        }
        Command::Validate(a) => {
            for w in harness::validate(&a.load()?)? {
                eprintln!("warning: {w}");
            }
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
