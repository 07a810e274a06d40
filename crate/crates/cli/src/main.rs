use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sphwiener::bank::WaveletBank;
use sphwiener::harmonic::forward_sht;
use sphwiener::io::{read_map, write_coeffs};
use sphwiener_cli::experiment::{run_denoise, run_sweep_on, threads_from_env, write_sweep};
use sphwiener_cli::validate::run_checks;
use sphwiener_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sphwiener", version, about = "Optimal wavelet-domain denoising on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set snr_in_db=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    bandlimit: Option<usize>,
    #[arg(long)]
    snr_in_db: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let mut overrides = self.overrides.clone();
        if let Some(l) = self.bandlimit {
            overrides.push(format!("bandlimit={l}"));
        }
        if let Some(s) = &self.snr_in_db {
            overrides.push(format!("snr_in_db={s}"));
        }
        if let Some(s) = self.seed {
            overrides.push(format!("master_seed={s}"));
        }
        if let Some(o) = &self.out {
            overrides.push(format!("out_dir={}", o.display()));
        }
        cfg.apply_overrides(&overrides)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Denoise one noisy realization and write maps, rasters and a summary.
    Denoise(ConfigArgs),
    /// Compare estimators over an input-SNR grid and write sweep.csv.
    Sweep(ConfigArgs),
    /// Print the scale range and admissibility of a wavelet bank.
    BankInfo {
        #[arg(long, default_value_t = 64)]
        bandlimit: usize,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        j1: usize,
    },
    /// Run the numerical self-checks.
    Validate {
        #[arg(long, default_value_t = 64)]
        bandlimit: usize,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Convert a sampled map CSV to spherical harmonic coefficients.
    ImportGrid {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Defaults to the exact bandlimit of the sampling.
        #[arg(long)]
        bandlimit: Option<usize>,
    },
}

fn bank_info(bandlimit: usize, lambda: f64, j1: usize) -> CliResult<()> {
    let bank = WaveletBank::new(bandlimit, lambda, j1)?;
    println!("bandlimit {bandlimit}, lambda {lambda}, scales {}..={}", bank.j1(), bank.j2());
    println!("admissibility error {:.3e}", bank.check_admissibility());
    let support = |k: &[f64]| {
        let nz: Vec<usize> = (0..k.len()).filter(|&l| k[l] != 0.0).collect();
        match (nz.first(), nz.last()) {
            (Some(a), Some(b)) => format!("l in {a}..={b}"),
            _ => "empty".to_string(),
        }
    };
    println!("scaling   {}", support(bank.eta()));
    for j in bank.scales() {
        println!("scale {j:<3} {}", support(bank.kappa(j)?));
    }
    Ok(())
}

fn import_grid(input: &Path, output: &Path, bandlimit: Option<usize>) -> CliResult<()> {
    let map = read_map(input).map_err(|e| CliError::io(input, e))?;
    let l = bandlimit.unwrap_or_else(|| map.grid().exact_bandlimit());
    let c = forward_sht(&map, l)?;
    write_coeffs(output, &c).map_err(|e| CliError::io(output, e))?;
    println!("wrote {} coefficients (bandlimit {l}) to {}", c.values().len(), output.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Denoise(args) => {
            let cfg = args.load()?;
            let s = run_denoise(&cfg)?;
            println!(
                "snr_in {:.3} dB, snr_out {:.3} dB, gain {:.3} dB -> {}",
                s.snr_in_realized_db,
                s.snr_out_db,
                s.gain_db,
                cfg.out_dir.display()
            );
        }
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let rows = run_sweep_on(&cfg, threads_from_env()?)?;
            let path = write_sweep(&cfg, &rows)?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::BankInfo {
            bandlimit,
            lambda,
            j1,
        } => bank_info(bandlimit, lambda, j1)?,
        Command::Validate {
            bandlimit,
            lambda,
            seed,
        } => {
            let checks = run_checks(bandlimit, lambda, seed)?;
            for c in &checks {
                println!("{c}");
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
            if !failed.is_empty() {
                return Err(CliError::Validation(failed.join(", ")));
            }
        }
        Command::ImportGrid {
            input,
            output,
            bandlimit,
        } => import_grid(&input, &output, bandlimit)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
