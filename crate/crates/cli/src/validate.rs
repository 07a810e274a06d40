//! Self-checks run by `sphwiener validate`.

use std::sync::Arc;

use sphwiener::baselines::gwks_denoise;
use sphwiener::bank::WaveletBank;
use sphwiener::filter::{denoise, DegreeCovariance, DenoiseOptions, FilterMode};
use sphwiener::harmonic::{forward_sht, inverse_sht, HarmonicCoeffs, SphereGrid};
use sphwiener::stochastics::GaussianStream;
use sphwiener::xform::{analyze, synthesize};
use sphwiener::Complex64;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<26} {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

fn random_coeffs(bandlimit: usize, seed: u64) -> HarmonicCoeffs {
    let mut g = GaussianStream::new(seed, 0);
    HarmonicCoeffs::from_fn(bandlimit, |_, _| Complex64::new(g.next_normal(), g.next_normal()))
}

/// Transform, bank and filter invariants at bandlimit `bandlimit`.
pub fn run_checks(bandlimit: usize, lambda: f64, seed: u64) -> CliResult<Vec<Check>> {
    let f = random_coeffs(bandlimit, seed);
    let grid = SphereGrid::gauss_legendre(bandlimit)?;
    let sht = forward_sht(&inverse_sht(&f, &grid)?, bandlimit)?.max_abs_diff(&f);

    let bank = Arc::new(WaveletBank::new(bandlimit, lambda, 0)?);
    let adm = bank.check_admissibility();
    let round_trip = synthesize(&analyze(&f, &bank)?)?.max_abs_diff(&f);

    let cs = DegreeCovariance::diagonal(bandlimit, |l, _| 1.0 / (l as f64 + 1.0).powi(2))?;
    let cz = DegreeCovariance::white(bandlimit, 0.05)?;
    let by = |mode| {
        denoise(
            &f,
            &cs,
            &cz,
            &bank,
            DenoiseOptions {
                mode,
                filter_scaling: false,
            },
        )
    };
    let modes = by(FilterMode::Matrix)?.max_abs_diff(&by(FilterMode::AxisymClosedForm)?);
    let gwks = gwks_denoise(&f, 0.0)?.max_abs_diff(&f);

    Ok(vec![
        Check {
            name: "sht round trip",
            value: sht,
            tolerance: 1e-10,
        },
        Check {
            name: "admissibility",
            value: adm,
            tolerance: 1e-9,
        },
        Check {
            name: "wavelet reconstruction",
            value: round_trip,
            tolerance: 1e-8,
        },
        Check {
            name: "filter mode agreement",
            value: modes,
            tolerance: 1e-10,
        },
        Check {
            name: "gwks identity at kappa 0",
            value: gwks,
            tolerance: 0.0,
        },
    ])
}
