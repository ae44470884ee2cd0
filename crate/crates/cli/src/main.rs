use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinoc_cli::cell::run_optimize;
use spinoc_cli::spectra::{run_brody, run_connectivity_maps, run_difference_histograms};
use spinoc_cli::sweep::run_sweep;
use spinoc_cli::{CliError, ExperimentConfig, Preset};

#[derive(Parser)]
#[command(name = "spinoc", about = "Optimal control and level statistics of spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every (process, K, gamma, J, seed) cell and tabulate field metrics.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Exit 0 even if some cells miss the target fidelity.
        #[arg(long)]
        allow_unconverged: bool,
    },
    /// Brody parameter of H01 + eps Hc over the gamma and epsilon grids.
    Brody(Common),
    /// Histograms of generalized energy differences at two gammas.
    Diffhist(Common),
    /// Matrix-element magnitude grids of both control operators.
    Connmap(Common),
    /// Run the configured single cell and dump field, spectrum and history.
    Optimize(Common),
    /// Print the version.
    Version,
}

#[derive(Args)]
struct Common {
    /// JSON document overriding preset values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (overrides the config).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), CliError> {
        let mut cfg = ExperimentConfig::load(self.preset, self.config.as_deref())?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(jobs) = self.jobs {
            cfg.jobs = jobs;
        }
        let out = cfg.output_dir.clone();
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Sweep {
            common,
            allow_unconverged,
        } => {
            let (cfg, out) = common.load()?;
            let summary = run_sweep(&cfg, &out)?;
            let missed = summary.unconverged();
            println!(
                "sweep: {} cells ({} computed, {} reused), {} not converged -> {}",
                summary.rows.len(),
                summary.computed,
                summary.skipped,
                missed,
                summary.path.display()
            );
            Ok(if missed > 0 && cfg.fail_on_unconverged && !allow_unconverged {
                3
            } else {
                0
            })
        }
        Command::Brody(common) => {
            let (cfg, out) = common.load()?;
            let rows = run_brody(&cfg, &out)?;
            println!("brody: {} cells -> {}", rows.len(), out.display());
            Ok(0)
        }
        Command::Diffhist(common) => {
            let (cfg, out) = common.load()?;
            for r in run_difference_histograms(&cfg, &out)? {
                println!("diffhist: M = {:>4}  L1 = {:.4}", r.m, r.l1_distance);
            }
            Ok(0)
        }
        Command::Connmap(common) => {
            let (cfg, out) = common.load()?;
            let c = run_connectivity_maps(&cfg, &out)?;
            println!(
                "connmap: entries above threshold, Hc {} / {} and H'c {} / {} (computational / energy)",
                c.local_computational, c.local_energy, c.long_range_computational, c.long_range_energy
            );
            Ok(0)
        }
        Command::Optimize(common) => {
            let (cfg, out) = common.load()?;
            let o = run_optimize(&cfg, &out)?;
            println!(
                "optimize: F = {:.6} after {} iterations, omega_bw = {:.4}, siprn = {:.4}",
                o.fidelity, o.iterations, o.metrics.omega_bw, o.metrics.siprn
            );
            Ok(0)
        }
        Command::Version => {
            println!("spinoc {}", env!("CARGO_PKG_VERSION"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
