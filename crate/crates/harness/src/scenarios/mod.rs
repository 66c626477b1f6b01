//! Scenario implementations. Each runner consumes a [`ResolvedConfig`] and
//! produces an [`ExperimentReport`] whose tables are byte-deterministic for a
//! fixed config: per-point work may run on a thread pool, but results are
//! always assembled in configuration order and every random draw is derived
//! from the config seed.

mod curves;
pub mod distortion;
mod errors;
mod width;

use std::time::Instant;

use anyhow::Context;
use covinterp_core::covariance::toeplitzify;
use covinterp_core::manifold::{ArrayConfig, Band};
use covinterp_core::psf::AngularPsf;
use covinterp_core::simchannel::{generate_snapshots, sample_covariance};
use covinterp_core::C64;

use crate::config::{ExperimentConfig, ResolvedConfig, Scenario};
use crate::report::ExperimentReport;

/// Runs one scenario end to end and stamps the wall time.
pub fn run(scenario: Scenario, config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let resolved = config.resolve(scenario)?;
    let start = Instant::now();
    let mut report = match scenario {
        Scenario::Aliasing => errors::run_aliasing(&resolved)?,
        Scenario::InteriorError => errors::run_interior_error(&resolved)?,
        Scenario::DistortionSweep => distortion::run(&resolved)?,
        Scenario::DofCurves => curves::run_dof(&resolved)?,
        Scenario::BoundCurves => curves::run_bounds(&resolved)?,
        Scenario::WidthSandwich => width::run(&resolved)?,
    };
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Normalized UL first column, either evaluated exactly from the PSF or
/// estimated from synthetic snapshots (sample covariance + diagonal
/// averaging), depending on `from_snapshots`.
pub(crate) fn ul_column(
    resolved: &ResolvedConfig,
    psf: &AngularPsf,
    cfg: &ArrayConfig,
) -> anyhow::Result<Vec<C64>> {
    let raw = &resolved.raw;
    let m = cfg.num_antennas();
    if !resolved.from_snapshots {
        let rho = cfg.oversampling();
        return Ok((0..m).map(|k| psf.fourier(k as f64 * rho)).collect());
    }
    // Sweep points must stay independent of list order, so each antenna count
    // gets its own derived seed.
    let seed = raw.seed.wrapping_add(m as u64);
    let batch = generate_snapshots(psf, cfg, raw.t_count, raw.snr_db, seed, Band::Ul, raw.sim_grid)
        .context("snapshot generation failed")?;
    let cov = toeplitzify(&sample_covariance(&batch)).context("sample covariance projection")?;
    let column = cov.first_column();
    let scale = column[0].re;
    if !(scale > 0.0) {
        anyhow::bail!("estimated UL power is not positive: {scale}");
    }
    Ok(column.iter().map(|c| c / scale).collect())
}

/// Exact DL first column `γ̌(kϱ/ν)` used as ground truth by the error and
/// distortion scenarios.
pub(crate) fn dl_truth(psf: &AngularPsf, cfg: &ArrayConfig) -> Vec<C64> {
    let step = cfg.oversampling() / cfg.carrier_ratio();
    (0..cfg.num_antennas()).map(|k| psf.fourier(k as f64 * step)).collect()
}
