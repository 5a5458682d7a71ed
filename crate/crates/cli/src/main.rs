use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qubit_heom::runner::{
    run_equilibrium_sweep, run_ness_sweep, run_relax, run_verify, Overrides, RunnerError,
    SweepConfig, SweepOutput, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_ORACLE,
};

/// Steady states of two qubits coupled to independent Drude-Lorentz baths.
#[derive(Parser)]
#[command(name = "qubit-heom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record one relaxation trajectory at `relax.lambda_b`.
    Relax(Common),
    /// Equal-temperature sweep over the coupling grid.
    SweepEq(Common),
    /// Two-temperature sweep plus the mean-temperature reference sweep.
    SweepNess {
        #[command(flatten)]
        common: Common,
        /// Temperature of bath 1 (default: `ness.t1` from the config).
        #[arg(long)]
        t1: Option<f64>,
        /// Temperature of bath 2 (default: `ness.t2` from the config).
        #[arg(long)]
        t2: Option<f64>,
    },
    /// Run the oracle suite.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Hierarchy truncation depth.
    #[arg(long)]
    depth: Option<usize>,
    /// RK4 step.
    #[arg(long)]
    dt: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<SweepConfig, RunnerError> {
        let mut cfg = match &self.config {
            Some(p) => SweepConfig::load(p)?,
            None => SweepConfig::default(),
        };
        Overrides {
            output_dir: self.out.clone(),
            parallelism: self.parallelism,
            depth: self.depth,
            dt: self.dt,
        }
        .apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report_sweep(out: &SweepOutput) -> i32 {
    println!("wrote {} and {}", out.csv.display(), out.sidecar.display());
    let failed: Vec<_> = out.points.iter().filter(|p| !p.record.converged).map(|p| p.record.lambda_b).collect();
    if failed.is_empty() {
        EXIT_OK
    } else {
        eprintln!("not converged at lambda_b = {failed:?}");
        EXIT_NOT_CONVERGED
    }
}

fn run(cli: Cli) -> Result<i32, RunnerError> {
    match cli.command {
        Command::Relax(c) => {
            let out = run_relax(&c.load()?)?;
            println!("wrote {} rows to {} and {}", out.records.len(), out.csv.display(), out.sidecar.display());
            Ok(EXIT_OK)
        }
        Command::SweepEq(c) => Ok(report_sweep(&run_equilibrium_sweep(&c.load()?)?)),
        Command::SweepNess { common, t1, t2 } => {
            let cfg = common.load()?;
            let t1 = t1.unwrap_or(cfg.ness.t1);
            let t2 = t2.unwrap_or(cfg.ness.t2);
            let out = run_ness_sweep(&cfg, t1, t2)?;
            let a = report_sweep(&out.effective);
            let b = report_sweep(&out.ness);
            Ok(a.max(b))
        }
        Command::Verify(c) => {
            let (report, path) = run_verify(&c.load()?)?;
            for check in &report.checks {
                let status = if check.ok() { "ok  " } else { "FAIL" };
                let note = if check.expect_pass { "" } else { " (negative control)" };
                println!("{status} {}: {:.3e} vs {:.3e}{note}", check.name, check.value, check.threshold);
            }
            println!("wrote {}", path.display());
            Ok(if report.all_ok() { EXIT_OK } else { EXIT_ORACLE })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
