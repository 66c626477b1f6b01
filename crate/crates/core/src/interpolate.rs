//! UL→DL covariance interpolation: the robust downlink index set, the
//! degrees-of-freedom trade-off curves, DL column synthesis from an angular
//! measure, the end-to-end pipeline, and an empirical lower-bound oracle for
//! the set of DL values consistent with the UL samples.

use crate::chebyshev::{g_alpha, g_inverse};
use crate::covariance::ToeplitzCovariance;
use crate::estimators::{
    build_dictionary, lipschitz_real, measure_from_nnls, nnls_solve, stack_real, stack_real_vec,
    SolverConfig, SolverReport,
};
use crate::manifold::ArrayConfig;
use crate::psf::AngularPsf;
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How much of `|sigma_ul[0] - 1|` the pipeline tolerates before rejecting
/// the input as unnormalized.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Dictionary oversampling used by the pipeline (`G = 4M`); `G = 2M` is
/// typically already enough, the extra margin is cheap at these sizes.
pub const GRID_OVERSAMPLING: usize = 4;

/// Which DL coefficients to keep after interpolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    /// Keep exactly the robust index set `I_dl(ϱ)`.
    Theory,
    /// Keep the first `⌈(1-fraction)·M⌉` coefficients (e.g. 0.10 drops the
    /// last 10%).
    Fraction(f64),
}

/// DL first-column estimate before and after truncation.
#[derive(Clone, Debug)]
pub struct InterpolationResult {
    /// `μ̌(kϱ/ν)` for all `k ∈ [M]`, no truncation.
    pub sigma_dl_full: Vec<C64>,
    /// Same, zeroed outside `kept_indices`.
    pub sigma_dl_truncated: Vec<C64>,
    /// Sorted; always contains 0.
    pub kept_indices: Vec<usize>,
    pub mode: TruncationMode,
}

/// The robust DL index set
/// `I_dl(ϱ) = {k : k ≤ Mν, sin(πϱ/2)·g(k/(Mν)) < 1}` (always including 0).
///
/// When the UL lattice is sub-Nyquist (`ϱ ≥ 1`) the geometric argument behind
/// the predicate is void and no index beyond the normalization-pinned `k = 0`
/// is robust, so only `{0}` is returned; callers should warn. Use
/// [`ArrayConfig::sampling_condition_violated`] to detect the case.
pub fn feasible_index_set(cfg: &ArrayConfig) -> Vec<usize> {
    let m = cfg.num_antennas();
    if cfg.sampling_condition_violated() {
        return vec![0];
    }
    let eta = (PI * cfg.oversampling() / 2.0).sin();
    let m_nu = m as f64 * cfg.carrier_ratio();
    let mut kept = vec![0usize];
    for k in 1..m {
        let kf = k as f64;
        if kf <= m_nu {
            let g = g_alpha((kf / m_nu).min(1.0)).expect("argument clamped to [0,1]");
            if eta * g < 1.0 {
                kept.push(k);
            }
        }
    }
    kept
}

/// Degrees-of-freedom trade-off at oversampling `ϱ ∈ (0,1)`:
/// returns `(α, N, D)` with `α = g⁻¹(1/sin(πϱ/2))`, the robust fraction of the
/// DL window; `N = Mν·α`, the number of stable coefficients; and `D = ϱ·α`,
/// the per-antenna resolution actually delivered.
pub fn dof_tradeoff(num_antennas: usize, nu: f64, rho: f64) -> Result<(f64, f64, f64)> {
    if num_antennas == 0 {
        return Err(Error::Domain("need at least one antenna".into()));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("carrier ratio must be positive, got {nu}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("oversampling must lie in (0,1), got {rho}")));
    }
    let alpha = g_inverse(1.0 / (PI * rho / 2.0).sin());
    let n = num_antennas as f64 * nu * alpha;
    let d = rho * alpha;
    Ok((alpha, n, d))
}

/// Synthesizes the DL first column from an angular measure:
/// `full[k] = μ̌(kϱ/ν)`, then zeroes outside the kept set chosen by `mode`.
/// All `M` coefficients are computed before truncation so the discarded ones
/// remain inspectable in `sigma_dl_full`.
pub fn interpolate_dl(
    mu: &AngularPsf,
    cfg: &ArrayConfig,
    mode: TruncationMode,
) -> Result<InterpolationResult> {
    let m = cfg.num_antennas();
    let step = cfg.oversampling() / cfg.carrier_ratio();
    let sigma_dl_full: Vec<C64> = (0..m).map(|k| mu.fourier(k as f64 * step)).collect();
    let kept_indices: Vec<usize> = match mode {
        TruncationMode::Theory => feasible_index_set(cfg),
        TruncationMode::Fraction(fraction) => {
            if !(0.0..1.0).contains(&fraction) {
                return Err(Error::Domain(format!(
                    "truncation fraction must lie in [0,1), got {fraction}"
                )));
            }
            let count = (((1.0 - fraction) * m as f64).ceil() as usize).clamp(1, m);
            (0..count).collect()
        }
    };
    let mut sigma_dl_truncated = vec![C64::new(0.0, 0.0); m];
    for &k in &kept_indices {
        sigma_dl_truncated[k] = sigma_dl_full[k];
    }
    Ok(InterpolationResult { sigma_dl_full, sigma_dl_truncated, kept_indices, mode })
}

/// Everything the interpolation pipeline produces.
#[derive(Clone, Debug)]
pub struct Algorithm1Output {
    pub interpolation: InterpolationResult,
    /// Hermitian Toeplitz DL covariance assembled from the truncated column.
    pub covariance: ToeplitzCovariance,
    /// NNLS certificate; `converged = false` is reported, not thrown.
    pub solver: SolverReport,
    /// The feasible angular measure the DL column was synthesized from.
    pub measure: AngularPsf,
}

/// End-to-end UL→DL interpolation from a normalized UL first column:
/// dictionary on a `G = 4M` grid, NNLS fit of a nonnegative measure,
/// DL synthesis, truncation, Toeplitz assembly.
///
/// Requires `sigma_ul[0] = 1` within [`NORMALIZATION_TOL`]; normalize first
/// (divide by `sigma_ul[0]`) when feeding estimated columns.
pub fn run_algorithm1(
    sigma_ul: &[C64],
    cfg: &ArrayConfig,
    solver_cfg: &SolverConfig,
    mode: TruncationMode,
) -> Result<Algorithm1Output> {
    let m = cfg.num_antennas();
    if sigma_ul.len() != m {
        return Err(Error::Dimension(format!(
            "UL column has {} entries for {m} antennas",
            sigma_ul.len()
        )));
    }
    if (sigma_ul[0] - C64::new(1.0, 0.0)).norm() > NORMALIZATION_TOL {
        return Err(Error::Domain(format!(
            "first UL coefficient must be 1 (got {}); normalize the column first",
            sigma_ul[0]
        )));
    }
    let g = GRID_OVERSAMPLING * m;
    let dict = build_dictionary(cfg, g)?;
    let solver = nnls_solve(&dict, sigma_ul, solver_cfg.tol, solver_cfg.iteration_budget(g))?;
    let measure = measure_from_nnls(&solver.solution, dict.grid())?;
    let interpolation = interpolate_dl(&measure, cfg, mode)?;
    let covariance = ToeplitzCovariance::from_first_column(interpolation.sigma_dl_truncated.clone())?;
    Ok(Algorithm1Output { interpolation, covariance, solver, measure })
}

/// Residual below which a candidate measure counts as consistent with the UL
/// samples.
const FEASIBILITY_TOL: f64 = 1e-6;
/// Residual the feasibility polish aims for, well inside the acceptance tol.
const POLISH_TARGET: f64 = 1e-8;
const TILT_LAMBDAS: [f64; 3] = [1e-4, 1e-3, 1e-2];
const TILT_ITERS: usize = 1500;
const POLISH_MAX_PIVOTS: usize = 200;

/// Accelerated projected gradient on `½‖Ax-σ‖² + c·(d·x)` over `x ≥ 0` with
/// monotone restarts; exploration only, the feasibility polish is exact.
fn tilted_descent(
    a: &DMatrix<f64>,
    sigma: &DVector<f64>,
    tilt: (&DVector<f64>, f64),
    x0: &DVector<f64>,
    step: f64,
    iters: usize,
) -> DVector<f64> {
    let (d, c) = tilt;
    let objective =
        |x: &DVector<f64>| -> f64 { 0.5 * (a * x - sigma).norm_squared() + c * d.dot(x) };
    let gradient = |x: &DVector<f64>| -> DVector<f64> { a.transpose() * (a * x - sigma) + d * c };
    let mut x = x0.clone();
    let mut f_x = objective(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let mut z = &y - gradient(&y) * step;
        z.apply(|v| *v = v.max(0.0));
        let mut f_z = objective(&z);
        // Slack must be additive: f can be negative under the tilt.
        if f_z > f_x + 1e-14 * (1.0 + f_x.abs()) {
            z = &x - gradient(&x) * step;
            z.apply(|v| *v = v.max(0.0));
            f_z = objective(&z);
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &z + (&z - &x) * ((t - 1.0) / t_next);
        t = t_next;
        x = z;
        f_x = f_z;
    }
    x
}

/// Minimum-residual fit on a fixed support via SVD (rank-deficient safe).
fn restricted_lstsq(a: &DMatrix<f64>, sigma: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    let a_s = a.select_columns(support.iter());
    let svd = a_s.svd(true, true);
    let eps = svd.singular_values.max() * 1e-13;
    svd.solve(sigma, eps).expect("SVD least squares cannot fail after decomposition")
}

/// Exact nonnegative least squares by active-set pivoting (Lawson-Hanson),
/// optionally warm-started from a support guess. Unlike first-order descent,
/// this reaches the true residual floor of the problem in a finite number of
/// restricted least-squares solves, which the feasibility check needs.
fn active_set_nnls(
    a: &DMatrix<f64>,
    sigma: &DVector<f64>,
    hint: &[usize],
    target_residual: f64,
    max_pivots: usize,
) -> DVector<f64> {
    let g = a.ncols();
    let mut in_set = vec![false; g];
    let mut support: Vec<usize> = Vec::new();
    for &i in hint {
        if i < g && !in_set[i] {
            in_set[i] = true;
            support.push(i);
        }
    }
    let mut w = DVector::<f64>::zeros(g);

    // Shrink the warm-start support until its unconstrained fit is
    // nonnegative, then accept that fit.
    while !support.is_empty() {
        let z = restricted_lstsq(a, sigma, &support);
        if z.iter().all(|v| *v >= 0.0) {
            for (pos, &i) in support.iter().enumerate() {
                w[i] = z[pos];
            }
            break;
        }
        let drop_pos = z
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .map(|(pos, _)| pos)
            .unwrap();
        in_set[support[drop_pos]] = false;
        support.swap_remove(drop_pos);
    }

    for _ in 0..max_pivots {
        let r = sigma - a * &w;
        if r.norm() <= target_residual {
            break;
        }
        let grad = a.transpose() * &r;
        let mut entering = None;
        let mut best = 1e-12;
        for i in 0..g {
            if !in_set[i] && grad[i] > best {
                best = grad[i];
                entering = Some(i);
            }
        }
        let Some(enter) = entering else { break }; // KKT point: at the floor
        in_set[enter] = true;
        support.push(enter);

        // Inner positivity loop: walk toward the unconstrained fit, dropping
        // variables that hit zero. Finite because the support only shrinks.
        loop {
            let z = restricted_lstsq(a, sigma, &support);
            if z.iter().all(|v| *v >= -1e-14) {
                w.fill(0.0);
                for (pos, &i) in support.iter().enumerate() {
                    w[i] = z[pos].max(0.0);
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (pos, &i) in support.iter().enumerate() {
                if z[pos] < 0.0 {
                    let denom = w[i] - z[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    }
                }
            }
            let mut kept = Vec::with_capacity(support.len());
            for (pos, &i) in support.iter().enumerate() {
                let moved = w[i] + alpha * (z[pos] - w[i]);
                if moved > 1e-14 {
                    w[i] = moved;
                    kept.push(i);
                } else {
                    w[i] = 0.0;
                    in_set[i] = false;
                }
            }
            support = kept;
            if support.is_empty() {
                break;
            }
        }
    }
    w
}

/// Empirical lower bound on how far apart two measures consistent with the UL
/// lattice samples of `gamma` can be at continuation point `s ∈ [0, Mϱ]`.
///
/// Works on a `G`-point discretization: solves the untilted nonnegative
/// feasibility problem plus tilted variants (`±λ` sweep against the real and
/// imaginary parts of the probe response `b_i = e^{jπξ_i s}`, each re-polished
/// at `λ = 0` so the displacement survives inside the feasible set), keeps
/// candidates whose residual is at most 1e-6, and returns the largest pairwise
/// `|b·w₁ - b·w₂|`. By construction this never exceeds the true width of the
/// feasible set (up to discretization), so it can only under-report.
pub fn empirical_width_lower_bound(
    gamma: &AngularPsf,
    cfg: &ArrayConfig,
    s: f64,
    g: usize,
) -> Result<f64> {
    let m = cfg.num_antennas();
    let rho = cfg.oversampling();
    let span = m as f64 * rho;
    if !(s >= 0.0 && s <= span && s.is_finite()) {
        return Err(Error::Domain(format!("probe {s} outside [0, {span}]")));
    }
    let dict = build_dictionary(cfg, g)?;
    let sigma: Vec<C64> = (0..m).map(|k| gamma.fourier(k as f64 * rho)).collect();
    let a = stack_real(dict.matrix());
    let sigma_real = stack_real_vec(&sigma);
    let step = 1.0 / lipschitz_real(&a);
    let probe: Vec<C64> =
        dict.grid().iter().map(|&xi| C64::from_polar(1.0, PI * xi * s)).collect();

    let mut candidates: Vec<C64> = Vec::new();
    let mut consider = |w: &DVector<f64>| {
        let residual = (&a * w - &sigma_real).norm();
        if residual <= FEASIBILITY_TOL {
            let value: C64 = w.iter().zip(&probe).map(|(&wi, &bi)| bi * wi).sum();
            candidates.push(value);
        }
    };

    let base = active_set_nnls(&a, &sigma_real, &[], POLISH_TARGET, POLISH_MAX_PIVOTS);
    consider(&base);

    let d_re = DVector::from_iterator(g, probe.iter().map(|z| z.re));
    let d_im = DVector::from_iterator(g, probe.iter().map(|z| z.im));
    for direction in [&d_re, &d_im] {
        for sign in [1.0, -1.0] {
            for lambda in TILT_LAMBDAS {
                let tilted =
                    tilted_descent(&a, &sigma_real, (direction, sign * lambda), &base, step, TILT_ITERS);
                // Polish on the support the tilt wandered to: each tilt lands
                // on its own face of the solution polytope.
                let hint: Vec<usize> =
                    (0..g).filter(|&i| tilted[i] > 1e-12).collect();
                let polished =
                    active_set_nnls(&a, &sigma_real, &hint, POLISH_TARGET, POLISH_MAX_PIVOTS);
                consider(&polished);
            }
        }
    }

    if candidates.len() < 2 {
        return Err(Error::Infeasible(format!(
            "found {} feasible measures at probe {s}; cannot witness a width",
            candidates.len()
        )));
    }
    let mut widest = 0.0f64;
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            widest = widest.max((candidates[i] - candidates[j]).norm());
        }
    }
    Ok(widest)
}
