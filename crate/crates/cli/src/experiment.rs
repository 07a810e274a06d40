//! Denoising experiments: one realization with maps (`denoise`) and the
//! Monte Carlo comparison of estimators over an input-SNR grid (`sweep`).

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use sphwiener::baselines::{gwks_denoise, hard_threshold_denoise, ThresholdPolicy};
use sphwiener::bank::WaveletBank;
use sphwiener::filter::{denoise, DegreeCovariance, DenoiseOptions};
use sphwiener::harmonic::{inverse_sht, HarmonicCoeffs, SphereGrid};
use sphwiener::io::{read_coeffs, write_map};
use sphwiener::stochastics::{
    sample_noise, sigma_from_input_snr, snr_db, split_seed, synthetic_source, NoiseModel,
};

use crate::config::{ExperimentConfig, Method, Source};
use crate::error::{CliError, CliResult};
use crate::render::render_map;

/// Everything shared by the realizations of one experiment.
pub struct Setup {
    pub source: HarmonicCoeffs,
    pub bank: Arc<WaveletBank>,
    pub grid: SphereGrid,
    source_cov: DegreeCovariance,
    options: DenoiseOptions,
    threshold_multiplier: f64,
}

/// Loads a source, truncating or zero-padding it to `bandlimit`.
pub fn load_source(source: &Source, bandlimit: usize) -> CliResult<HarmonicCoeffs> {
    match source {
        Source::File(path) => {
            let c = read_coeffs(path).map_err(|e| CliError::io(path, e))?;
            Ok(c.resized(bandlimit))
        }
        Source::Synthetic { law, seed } => Ok(synthetic_source(bandlimit, *law, *seed)?),
    }
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> CliResult<Self> {
        let source = load_source(&cfg.source, cfg.bandlimit)?;
        Self::with_source(cfg, source)
    }

    pub fn with_source(cfg: &ExperimentConfig, source: HarmonicCoeffs) -> CliResult<Self> {
        if source.norm_sqr() == 0.0 {
            return Err(CliError::Config("source has zero energy".into()));
        }
        let mut bank = WaveletBank::new(cfg.bandlimit, cfg.lambda, cfg.j1)?;
        if let Some(path) = &cfg.zeta_file {
            let zeta = read_coeffs(path).map_err(|e| CliError::io(path, e))?;
            bank = bank.with_directionality(zeta.resized(cfg.bandlimit))?;
        }
        Ok(Self {
            source_cov: DegreeCovariance::rank_one(&source),
            source,
            bank: Arc::new(bank),
            grid: SphereGrid::gauss_legendre(cfg.bandlimit)?,
            options: DenoiseOptions {
                mode: cfg.filter_mode,
                filter_scaling: cfg.filter_scaling,
            },
            threshold_multiplier: cfg.threshold_multiplier,
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bank.bandlimit()
    }

    /// Adds white noise at the requested expected input SNR.
    pub fn realize(&self, snr_in_db: f64, seed: u64) -> CliResult<Realization> {
        let sigma2 = sigma_from_input_snr(&self.source, snr_in_db)?;
        let model = NoiseModel::white(sigma2, seed, self.source.is_real_field());
        let noise = sample_noise(&model, self.bandlimit())?;
        let noisy = &self.source + &noise;
        let snr_in = snr_db(&noisy, &self.source)?;
        Ok(Realization {
            noise,
            noisy,
            sigma2,
            snr_in,
        })
    }

    /// Estimate of the source by `method`. `param` is the GWKS bandwidth.
    pub fn estimate(&self, method: Method, param: f64, r: &Realization) -> CliResult<HarmonicCoeffs> {
        let out = match method {
            Method::Optimal => {
                let cz = DegreeCovariance::white(self.bandlimit(), r.sigma2)?;
                denoise(&r.noisy, &self.source_cov, &cz, &self.bank, self.options)?
            }
            Method::Threshold => {
                let policy = ThresholdPolicy::new(self.threshold_multiplier, r.sigma2)?;
                hard_threshold_denoise(&r.noisy, &self.bank, &policy, &self.grid)?
            }
            Method::Gwks => gwks_denoise(&r.noisy, param)?,
        };
        Ok(out)
    }

    pub fn snr_out(&self, estimate: &HarmonicCoeffs) -> CliResult<f64> {
        Ok(snr_db(estimate, &self.source)?)
    }
}

pub struct Realization {
    pub noise: HarmonicCoeffs,
    pub noisy: HarmonicCoeffs,
    pub sigma2: f64,
    /// Realized input SNR in dB.
    pub snr_in: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseSummary {
    pub snr_in_db: f64,
    pub snr_in_realized_db: f64,
    pub snr_out_db: f64,
    pub gain_db: f64,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, sphwiener::Error::Io(e)))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| CliError::io(path, sphwiener::Error::Io(e)))
}

/// One realization at the first configured SNR. Writes the source, noise,
/// noisy and estimated maps as CSV and PGM plus `summary.csv` to `out_dir`.
pub fn run_denoise(cfg: &ExperimentConfig) -> CliResult<DenoiseSummary> {
    let setup = Setup::new(cfg)?;
    let snr = cfg.snr_in_db[0];
    let r = setup.realize(snr, split_seed(cfg.master_seed, &[0, 0]))?;
    let est = setup.estimate(Method::Optimal, 0.0, &r)?;
    let snr_out = setup.snr_out(&est)?;
    let summary = DenoiseSummary {
        snr_in_db: snr,
        snr_in_realized_db: r.snr_in,
        snr_out_db: snr_out,
        gain_db: snr_out - r.snr_in,
    };

    create_dir(&cfg.out_dir)?;
    for (name, c) in [
        ("source", &setup.source),
        ("noise", &r.noise),
        ("noisy", &r.noisy),
        ("estimate", &est),
    ] {
        let map = inverse_sht(c, &setup.grid)?;
        let csv = cfg.out_dir.join(format!("{name}.csv"));
        write_map(&csv, &map).map_err(|e| CliError::io(&csv, e))?;
        render_map(&map, &cfg.out_dir.join(format!("{name}.pgm")))?;
    }
    write_text(
        &cfg.out_dir.join("summary.csv"),
        &format!(
            "snr_in_db,snr_in_realized_db,snr_out_db,gain_db\n{},{:.6},{:.6},{:.6}\n",
            summary.snr_in_db, summary.snr_in_realized_db, summary.snr_out_db, summary.gain_db
        ),
    )?;
    Ok(summary)
}

/// One aggregated line of a sweep. `method` is `input` for the realized
/// input SNR; `param` is the GWKS bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_in_db: f64,
    pub method: &'static str,
    pub param: Option<f64>,
    pub mean_db: f64,
    pub std_db: f64,
}

fn estimators(cfg: &ExperimentConfig) -> Vec<(Method, Option<f64>)> {
    let mut out = Vec::new();
    for &m in &cfg.methods {
        match m {
            Method::Gwks => out.extend(cfg.kappa.iter().map(|&k| (m, Some(k)))),
            _ => out.push((m, None)),
        }
    }
    out
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn row_order(a: &SweepRow, b: &SweepRow) -> Ordering {
    a.snr_in_db
        .total_cmp(&b.snr_in_db)
        .then_with(|| a.method.cmp(b.method))
        .then_with(|| match (a.param, b.param) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (x, y) => x.is_some().cmp(&y.is_some()),
        })
}

/// Monte Carlo sweep on the current rayon pool. Realization `r` at grid
/// point `i` draws its noise from `split_seed(master_seed, [i, r])`, so the
/// rows do not depend on the number of threads.
pub fn run_sweep(cfg: &ExperimentConfig) -> CliResult<Vec<SweepRow>> {
    let setup = Setup::new(cfg)?;
    run_sweep_with(&setup, cfg)
}

pub fn run_sweep_with(setup: &Setup, cfg: &ExperimentConfig) -> CliResult<Vec<SweepRow>> {
    let est = estimators(cfg);
    let jobs: Vec<(usize, usize)> = (0..cfg.snr_in_db.len())
        .flat_map(|i| (0..cfg.n_realizations).map(move |r| (i, r)))
        .collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(i, r)| -> CliResult<Vec<f64>> {
            let seed = split_seed(cfg.master_seed, &[i as u64, r as u64]);
            let real = setup.realize(cfg.snr_in_db[i], seed)?;
            let mut vals = Vec::with_capacity(est.len() + 1);
            vals.push(real.snr_in);
            for &(m, p) in &est {
                let s = setup.estimate(m, p.unwrap_or(0.0), &real)?;
                vals.push(setup.snr_out(&s)?);
            }
            Ok(vals)
        })
        .collect::<CliResult<_>>()?;

    let mut rows = Vec::new();
    for (i, &snr) in cfg.snr_in_db.iter().enumerate() {
        let block = &results[i * cfg.n_realizations..(i + 1) * cfg.n_realizations];
        let column = |k: usize| -> Vec<f64> { block.iter().map(|v| v[k]).collect() };
        let (mean_db, std_db) = mean_std(&column(0));
        rows.push(SweepRow {
            snr_in_db: snr,
            method: "input",
            param: None,
            mean_db,
            std_db,
        });
        for (k, &(m, param)) in est.iter().enumerate() {
            let (mean_db, std_db) = mean_std(&column(k + 1));
            rows.push(SweepRow {
                snr_in_db: snr,
                method: m.name(),
                param,
                mean_db,
                std_db,
            });
        }
    }
    rows.sort_by(row_order);
    Ok(rows)
}

/// Runs the sweep on a pool of `threads` workers, 0 meaning one per core.
pub fn run_sweep_on(cfg: &ExperimentConfig, threads: usize) -> CliResult<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(cfg))
}

pub fn sweep_csv(rows: &[SweepRow]) -> CliResult<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let map_err = |e: csv::Error| CliError::Numerical(sphwiener::Error::Csv(e));
    wtr.write_record(["snr_in_db", "method", "param", "mean_snr_out_db", "std_db"])
        .map_err(map_err)?;
    for r in rows {
        wtr.write_record([
            r.snr_in_db.to_string(),
            r.method.to_string(),
            r.param.map(|p| p.to_string()).unwrap_or_default(),
            format!("{:.6}", r.mean_db),
            format!("{:.6}", r.std_db),
        ])
        .map_err(map_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Config(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `sweep.csv` into `out_dir` and returns its path.
pub fn write_sweep(cfg: &ExperimentConfig, rows: &[SweepRow]) -> CliResult<PathBuf> {
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("sweep.csv");
    write_text(&path, &sweep_csv(rows)?)?;
    Ok(path)
}

/// `SPHWIENER_THREADS`, 0 or unset meaning automatic.
pub fn threads_from_env() -> CliResult<usize> {
    match std::env::var("SPHWIENER_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("SPHWIENER_THREADS: bad value '{v}'"))),
        _ => Ok(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sphwiener::stochastics::SpectrumLaw;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            bandlimit: 16,
            snr_in_db: vec![0.0, 5.0],
            n_realizations: 3,
            kappa: vec![0.0, 1e-3],
            source: Source::Synthetic {
                law: SpectrumLaw::Red(2.0),
                seed: 3,
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sweep_rows_sorted_and_complete() {
        let cfg = small_cfg();
        let rows = run_sweep_on(&cfg, 2).unwrap();
        // input, optimal, threshold and two gwks rows per SNR
        assert_eq!(rows.len(), 2 * 5);
        for w in rows.windows(2) {
            assert_ne!(row_order(&w[0], &w[1]), Ordering::Greater);
        }
        let csv = sweep_csv(&rows).unwrap();
        assert!(csv.starts_with("snr_in_db,method,param,mean_snr_out_db,std_db\n0,gwks,0,"));
    }

    #[test]
    fn gwks_zero_matches_input() {
        let rows = run_sweep_on(&small_cfg(), 1).unwrap();
        for snr in [0.0, 5.0] {
            let find = |m: &str, p: Option<f64>| {
                rows.iter()
                    .find(|r| r.snr_in_db == snr && r.method == m && r.param == p)
                    .unwrap()
                    .clone()
            };
            let input = find("input", None);
            let gw = find("gwks", Some(0.0));
            assert_eq!(input.mean_db, gw.mean_db);
            assert_eq!(input.std_db, gw.std_db);
        }
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let cfg = small_cfg();
        let a = sweep_csv(&run_sweep_on(&cfg, 1).unwrap()).unwrap();
        let b = sweep_csv(&run_sweep_on(&cfg, 3).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn realized_snr_near_target() {
        let setup = Setup::new(&ExperimentConfig {
            bandlimit: 32,
            ..small_cfg()
        })
        .unwrap();
        let r = setup.realize(3.0, 11).unwrap();
        assert!((r.snr_in - 3.0).abs() < 0.5, "{}", r.snr_in);
        assert!(r.noisy.is_real_field());
    }

    #[test]
    fn denoise_writes_outputs() {
        let dir = std::env::temp_dir().join(format!("sphwiener-denoise-{}", std::process::id()));
        let cfg = ExperimentConfig {
            out_dir: dir.clone(),
            ..small_cfg()
        };
        let s = run_denoise(&cfg).unwrap();
        assert!(s.gain_db > 0.0);
        for name in ["source", "noise", "noisy", "estimate"] {
            assert!(dir.join(format!("{name}.csv")).exists());
            assert!(dir.join(format!("{name}.pgm")).exists());
        }
        let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
        assert!(summary.starts_with("snr_in_db,snr_in_realized_db,snr_out_db,gain_db\n0,"));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn zero_source_rejected() {
        let err = Setup::with_source(&small_cfg(), HarmonicCoeffs::zeros(16)).err().unwrap();
        assert_eq!(err.exit_code(), 2);
    }
}
