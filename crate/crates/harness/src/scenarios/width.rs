//! Width sandwich: the closed-form bound on the set of DL values consistent
//! with the UL samples must dominate an empirically computed lower bound at
//! off-lattice probes and collapse to zero on the lattice itself.

use covinterp_core::chebyshev::{asymptotic_width_rate, width_bound};
use covinterp_core::interpolate::empirical_width_lower_bound;
use rayon::prelude::*;

use crate::config::ResolvedConfig;
use crate::report::{fmt_float, ExperimentReport, Table};

/// Probes stay at least this far (in lattice units) from integers, where both
/// sides of the sandwich vanish and the comparison degenerates to noise.
const LATTICE_CLEARANCE: f64 = 0.2;

/// Deterministic off-lattice probes `s = u·ϱ` with `u ∈ (0, M)`.
pub(crate) fn probe_points(m: usize, rho: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| {
            let mut u = (j as f64 + 0.5) * m as f64 / count as f64;
            let r = u - u.round();
            if r.abs() < LATTICE_CLEARANCE {
                u = u.round() + if r < 0.0 { -LATTICE_CLEARANCE } else { LATTICE_CLEARANCE };
            }
            (u * rho).clamp(rho * LATTICE_CLEARANCE, (m as f64 - LATTICE_CLEARANCE) * rho)
        })
        .collect()
}

pub fn run(resolved: &ResolvedConfig) -> anyhow::Result<ExperimentReport> {
    let m = resolved.m_list[0];
    let rho = resolved.oversampling;
    let cfg = resolved.raw.array_config(m, rho)?;
    let psf = resolved.raw.psf.build()?;
    let g = resolved.grid_size;

    struct Row {
        s: f64,
        bound: f64,
        real_part: f64,
        imag_part: f64,
        empirical: f64,
        rate: f64,
    }

    let probes = probe_points(m, rho, resolved.raw.probe_count);
    let rows: Vec<Row> = probes
        .par_iter()
        .map(|&s| -> anyhow::Result<Row> {
            let wb = width_bound(s, m, rho)?;
            let empirical = empirical_width_lower_bound(&psf, &cfg, s, g)?;
            let rate = asymptotic_width_rate(s, m, rho)?;
            Ok(Row {
                s,
                bound: wb.bound,
                real_part: wb.real_part,
                imag_part: wb.imag_part,
                empirical,
                rate,
            })
        })
        .collect::<anyhow::Result<_>>()?;

    let mut report = ExperimentReport::new(resolved.scenario);
    let mut table = Table::new(
        "sandwich",
        &["s", "u", "bound", "real_part", "imag_part", "empirical", "asymptotic_rate"],
    );
    let mut violations = 0usize;
    let mut worst_gap = f64::INFINITY;
    for row in &rows {
        if row.empirical > row.bound {
            violations += 1;
        }
        worst_gap = worst_gap.min(row.bound - row.empirical);
        table.push(vec![
            fmt_float(row.s),
            fmt_float(row.s / rho),
            fmt_float(row.bound),
            fmt_float(row.real_part),
            fmt_float(row.imag_part),
            fmt_float(row.empirical),
            fmt_float(row.rate),
        ]);
    }
    report.tables.push(table);

    // On the lattice both sides must be pinned: the bound is exactly zero and
    // the oracle can only report feasibility-tolerance noise.
    let lattice_rows: Vec<(f64, f64, f64)> = (1..m)
        .into_par_iter()
        .map(|k| -> anyhow::Result<_> {
            let s = k as f64 * rho;
            let wb = width_bound(s, m, rho)?;
            let empirical = empirical_width_lower_bound(&psf, &cfg, s, g)?;
            Ok((s, wb.bound, empirical))
        })
        .collect::<anyhow::Result<_>>()?;
    let mut lattice = Table::new("lattice", &["s", "bound", "empirical"]);
    let mut lattice_worst = 0.0f64;
    for &(s, bound, emp) in &lattice_rows {
        lattice_worst = lattice_worst.max(bound.max(emp));
        lattice.push(vec![fmt_float(s), fmt_float(bound), fmt_float(emp)]);
    }
    report.tables.push(lattice);

    report.flag(
        "bound_dominates_everywhere",
        violations == 0,
        format!("{violations} violations over {} probes; smallest bound-empirical gap {}",
            rows.len(),
            fmt_float(worst_gap)
        ),
    );
    report.flag(
        "lattice_pinned",
        lattice_worst <= 1e-6,
        format!("max of bound and empirical width on the lattice: {}", fmt_float(lattice_worst)),
    );
    Ok(report)
}
