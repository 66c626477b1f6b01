//! `covinterp`: command-line runner for the interpolation experiments.
//!
//! Subcommands: `run` executes a named scenario and writes CSV tables plus a
//! textual summary; `bounds` dumps the closed-form width-bound curve for one
//! array; `interpolate` runs the UL-to-DL pipeline on a UL column read from
//! CSV. Exit code 0 means every declared assertion passed, 1 means at least
//! one failed, 2 means the run itself errored. CSV layouts are documented in
//! `FORMATS.md`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use covinterp::{fmt_float, run, ExperimentConfig, Scenario};
use covinterp_core::chebyshev::{asymptotic_width_rate, width_bound};
use covinterp_core::interpolate::{run_algorithm1, TruncationMode};
use covinterp_core::C64;

#[derive(Parser)]
#[command(name = "covinterp", version, about = "UL-to-DL covariance interpolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment scenario and write its CSV tables and summary.
    Run {
        /// One of: aliasing, interior_error, distortion_sweep, dof_curves,
        /// bound_curves, width_sandwich.
        scenario: Scenario,
        /// JSON experiment config; omitted fields take scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for CSV tables and summary.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the closed-form width-bound curve for one array configuration.
    Bounds {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        rho: f64,
        /// Number of probe points on (0, M*rho).
        #[arg(long, default_value_t = 512)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Interpolate a DL column from a UL column stored as CSV (k,re,im).
    Interpolate {
        /// Input UL column; normalized by its k=0 entry before solving.
        #[arg(long = "sigma-ul")]
        sigma_ul: PathBuf,
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        nu: f64,
        /// Aperture half-angle in degrees.
        #[arg(long, default_value_t = 60.0)]
        theta_max_deg: f64,
        /// `theory` keeps the robust index set; `fraction=F` drops the last
        /// fraction F of the coefficients.
        #[arg(long, default_value = "fraction=0.1", value_parser = parse_mode)]
        mode: TruncationMode,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(text: &str) -> Result<TruncationMode, String> {
    if text == "theory" {
        return Ok(TruncationMode::Theory);
    }
    if let Some(value) = text.strip_prefix("fraction=") {
        let fraction: f64 =
            value.parse().map_err(|e| format!("bad truncation fraction {value:?}: {e}"))?;
        return Ok(TruncationMode::Fraction(fraction));
    }
    Err(format!("expected \"theory\" or \"fraction=F\", got {text:?}"))
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("COVINTERP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().context("COVINTERP_THREADS must be a positive integer")?;
    if threads == 0 {
        anyhow::bail!("COVINTERP_THREADS must be a positive integer");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("thread pool init failed")?;
    Ok(())
}

fn cmd_run(scenario: Scenario, config: Option<PathBuf>, out: PathBuf) -> anyhow::Result<bool> {
    let config = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let report = run(scenario, &config)?;
    let paths = report.write_csv(&out)?;
    let summary = report.summary();
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    for path in paths {
        println!("wrote {}", path.display());
    }
    Ok(report.passed())
}

fn cmd_bounds(m: usize, rho: f64, points: usize, out: PathBuf) -> anyhow::Result<bool> {
    if points == 0 {
        anyhow::bail!("need at least one probe point");
    }
    let mut writer =
        csv::Writer::from_path(&out).with_context(|| format!("cannot create {}", out.display()))?;
    writer.write_record(["s", "bound", "real_part", "imag_part", "asymptotic_rate"])?;
    let span = m as f64 * rho;
    for i in 0..points {
        // Open grid: both endpoints are degenerate (s=0 is a lattice point,
        // s=M*rho saturates the bound).
        let s = span * (i as f64 + 0.5) / points as f64;
        let wb = width_bound(s, m, rho)?;
        let rate = asymptotic_width_rate(s, m, rho)?;
        writer.write_record([
            fmt_float(s),
            fmt_float(wb.bound),
            fmt_float(wb.real_part),
            fmt_float(wb.imag_part),
            fmt_float(rate),
        ])?;
    }
    writer.flush()?;
    println!("wrote {}", out.display());
    Ok(true)
}

fn read_ul_column(path: &PathBuf) -> anyhow::Result<Vec<C64>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let expected = ["k", "re", "im"];
    if headers.iter().ne(expected) {
        anyhow::bail!("expected CSV header \"k,re,im\", got {headers:?}");
    }
    let mut column = Vec::new();
    for (row_index, record) in reader.records().enumerate() {
        let record = record?;
        let k: usize = record[0].parse().context("bad index column")?;
        if k != row_index {
            anyhow::bail!("rows must be sorted by k starting at 0, got k={k} in row {row_index}");
        }
        let re: f64 = record[1].parse().context("bad re column")?;
        let im: f64 = record[2].parse().context("bad im column")?;
        column.push(C64::new(re, im));
    }
    if column.is_empty() {
        anyhow::bail!("UL column file has no rows");
    }
    Ok(column)
}

fn cmd_interpolate(
    sigma_ul: PathBuf,
    m: usize,
    rho: f64,
    nu: f64,
    theta_max_deg: f64,
    mode: TruncationMode,
    out: PathBuf,
) -> anyhow::Result<bool> {
    let mut column = read_ul_column(&sigma_ul)?;
    if column.len() != m {
        anyhow::bail!("UL column has {} rows, expected M = {m}", column.len());
    }
    let scale = column[0].re;
    if !(scale > 0.0) {
        anyhow::bail!("UL power sigma_ul[0] must be positive, got {}", column[0]);
    }
    for c in column.iter_mut() {
        *c /= scale;
    }
    let cfg = covinterp_core::manifold::ArrayConfig::new(m, rho, nu, theta_max_deg.to_radians())?;
    if cfg.sampling_condition_violated() {
        eprintln!(
            "warning: UL lattice is sub-Nyquist (rho = {rho} >= 1); \
             interpolation beyond k = 0 is unreliable"
        );
    }
    let solver = covinterp_core::estimators::SolverConfig::default();
    let result = run_algorithm1(&column, &cfg, &solver, mode)?;
    if !result.solver.converged {
        eprintln!(
            "warning: NNLS stopped at KKT residual {:.3e} after {} iterations",
            result.solver.kkt_residual, result.solver.iterations
        );
    }

    let mut writer =
        csv::Writer::from_path(&out).with_context(|| format!("cannot create {}", out.display()))?;
    writer.write_record(["k", "s_probe", "re", "im", "kept"])?;
    let interp = &result.interpolation;
    let step = rho / nu;
    for k in 0..m {
        let kept = interp.kept_indices.contains(&k);
        // Full (untruncated) values are reported; the kept column marks which
        // survive truncation. Values are on the normalized scale.
        let value = interp.sigma_dl_full[k];
        writer.write_record([
            k.to_string(),
            fmt_float(k as f64 * step),
            fmt_float(value.re),
            fmt_float(value.im),
            u8::from(kept).to_string(),
        ])?;
    }
    writer.flush()?;
    println!("wrote {} (kept {} of {m} indices)", out.display(), interp.kept_indices.len());
    Ok(true)
}

fn real_main() -> anyhow::Result<bool> {
    configure_threads()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, config, out } => cmd_run(scenario, config, out),
        Command::Bounds { m, rho, points, out } => cmd_bounds(m, rho, points, out),
        Command::Interpolate { sigma_ul, m, rho, nu, theta_max_deg, mode, out } => {
            cmd_interpolate(sigma_ul, m, rho, nu, theta_max_deg, mode, out)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
