//! Feasibility/estimation solvers: non-negative least squares against a grid
//! dictionary of uplink steering vectors, and group-sparse (L21) recovery of
//! a discrete angular measure from sketched channel snapshots.
//!
//! Both solvers are accelerated projected/proximal gradient descent with a
//! monotone safeguard (momentum restarts whenever the objective would rise),
//! step size `1/L` with `L` estimated by power iteration, and explicit
//! optimality certificates in the returned [`SolverReport`]: a scaled KKT
//! residual for NNLS, a proximal fixed-point residual for the group solver.
//! Non-convergence within the iteration budget is reported, never thrown.

use crate::manifold::{steering_vector, ArrayConfig, Band};
use crate::psf::AngularPsf;
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Default KKT/fixed-point tolerance for both solvers.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-8;

/// Default iteration budget per grid column (budget = `50·G`).
pub const DEFAULT_ITER_PER_COLUMN: usize = 50;

/// Uniform grid of `G` candidate directions with the `M×G` matrix of uplink
/// steering columns `a_ul(ξ_i)`.
#[derive(Clone, Debug)]
pub struct GridDictionary {
    grid: Vec<f64>,
    matrix: DMatrix<C64>,
}

impl GridDictionary {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// The complex `M×G` dictionary matrix.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn num_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_columns(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Builds the dictionary on the uniform grid `ξ_i = -1 + 2i/(G-1)`
/// (single-point grids sit at the window center). Requires `G ≥ M` so the
/// grid can oversample the array.
pub fn build_dictionary(cfg: &ArrayConfig, g: usize) -> Result<GridDictionary> {
    let m = cfg.num_antennas();
    if g < m {
        return Err(Error::Dimension(format!(
            "dictionary needs at least as many columns as antennas: G={g} < M={m}"
        )));
    }
    let grid: Vec<f64> = if g == 1 {
        vec![0.0]
    } else {
        (0..g).map(|i| -1.0 + 2.0 * i as f64 / (g - 1) as f64).collect()
    };
    let mut matrix = DMatrix::<C64>::zeros(m, g);
    for (i, &xi) in grid.iter().enumerate() {
        let col = steering_vector(cfg, xi, Band::Ul)?;
        matrix.set_column(i, &col);
    }
    Ok(GridDictionary { grid, matrix })
}

/// Outcome of a solver run, with the certificate that justifies `converged`.
#[derive(Clone, Debug)]
pub struct SolverReport {
    /// NNLS: the nonnegative weight vector. Group solver: the row norms of
    /// the weight matrix (the group amplitudes).
    pub solution: Vec<f64>,
    /// Final objective value (`½‖residual‖²`, plus the L21 penalty for the
    /// group solver).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// NNLS: scaled KKT residual. Group solver: proximal fixed-point
    /// residual `‖W - prox(W - step·∇loss)‖_max`.
    pub kkt_residual: f64,
}

/// Real 2M×G stacking `[Re A; Im A]` of a complex dictionary; the complex
/// least squares `‖As - σ‖²` over real nonnegative `s` equals the stacked
/// real least squares.
pub(crate) fn stack_real(a: &DMatrix<C64>) -> DMatrix<f64> {
    let (m, g) = (a.nrows(), a.ncols());
    DMatrix::from_fn(2 * m, g, |r, c| {
        if r < m {
            a[(r, c)].re
        } else {
            a[(r - m, c)].im
        }
    })
}

pub(crate) fn stack_real_vec(v: &[C64]) -> DVector<f64> {
    let m = v.len();
    DVector::from_fn(2 * m, |r, _| if r < m { v[r].re } else { v[r - m].im })
}

/// Largest eigenvalue of `QᵀQ` by 20 power iterations from a deterministic
/// start, inflated by 5% so `1/L` is a safe gradient step.
pub(crate) fn lipschitz_real(q: &DMatrix<f64>) -> f64 {
    let g = q.ncols();
    let mut v = DVector::from_fn(g, |i, _| 1.0 + 0.01 * (i % 7) as f64);
    v /= v.norm();
    let mut lambda = 0.0f64;
    for _ in 0..20 {
        let w = q.transpose() * (q * &v);
        let n = w.norm();
        if n == 0.0 {
            return 1.0;
        }
        lambda = n;
        v = w / n;
    }
    (lambda * 1.05).max(f64::MIN_POSITIVE)
}

fn lipschitz_complex(mats: &[&DMatrix<C64>]) -> f64 {
    let g = mats[0].ncols();
    let mut worst = 0.0f64;
    for q in mats {
        let mut v = DVector::from_fn(g, |i, _| C64::new(1.0 + 0.01 * (i % 7) as f64, 0.0));
        v /= C64::new(v.norm(), 0.0);
        let mut lambda = 0.0f64;
        for _ in 0..20 {
            let w = q.adjoint() * (*q * &v);
            let n = w.norm();
            if n == 0.0 {
                break;
            }
            lambda = n;
            v = w / C64::new(n, 0.0);
        }
        worst = worst.max(lambda);
    }
    (worst * 1.05).max(f64::MIN_POSITIVE)
}

/// Non-negative least squares `min_{s≥0} ‖As - σ‖` by accelerated projected
/// gradient with monotone restarts.
///
/// Convergence is certified by the scaled KKT residual of the stacked-real
/// problem: `max(|g_i| for s_i > 0, max(0, -g_i) for s_i = 0) / scale` with
/// `g = Ãᵀ(Ãs - σ̃)` and `scale = max(1, ‖Ãᵀσ̃‖_∞)`. Failure to reach `tol`
/// within `max_iter` returns `converged = false` rather than an error.
pub fn nnls_solve(
    dict: &GridDictionary,
    target: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<SolverReport> {
    nnls_solve_with_init(dict, target, None, tol, max_iter)
}

/// [`nnls_solve`] from an explicit starting point instead of zero, for
/// studying which of several feasible solutions the solver lands on when the
/// dictionary makes the fit non-unique.
pub fn nnls_solve_with_init(
    dict: &GridDictionary,
    target: &[C64],
    init: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<SolverReport> {
    if target.len() != dict.num_antennas() {
        return Err(Error::Dimension(format!(
            "target length {} does not match antenna count {}",
            target.len(),
            dict.num_antennas()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let a = stack_real(dict.matrix());
    let sigma = stack_real_vec(target);
    let g_cols = a.ncols();
    if let Some(x0) = init {
        if x0.len() != g_cols {
            return Err(Error::Dimension(format!(
                "initial point has {} entries for {} columns",
                x0.len(),
                g_cols
            )));
        }
        if x0.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("initial point must be nonnegative and finite".into()));
        }
    }
    let step = 1.0 / lipschitz_real(&a);
    let scale = (a.transpose() * &sigma).amax().max(1.0);

    let objective = |x: &DVector<f64>| -> (DVector<f64>, f64) {
        let r = &a * x - &sigma;
        let f = 0.5 * r.norm_squared();
        (r, f)
    };

    let mut x = match init {
        Some(x0) => DVector::from_column_slice(x0),
        None => DVector::<f64>::zeros(g_cols),
    };
    let (mut r_x, mut f_x) = objective(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut kkt = kkt_residual(&a, &x, &r_x, scale);
    let mut converged = kkt <= tol;

    while !converged && iterations < max_iter {
        iterations += 1;
        let grad_y = a.transpose() * (&a * &y - &sigma);
        let mut z = &y - grad_y * step;
        z.apply(|v| *v = v.max(0.0));
        let (mut r_z, mut f_z) = objective(&z);
        if f_z > f_x * (1.0 + 1e-14) + 1e-300 {
            // Momentum overshot: restart from the last accepted iterate with a
            // plain projected-gradient step, which cannot increase f.
            let grad_x = a.transpose() * &r_x;
            z = &x - grad_x * step;
            z.apply(|v| *v = v.max(0.0));
            let (r2, f2) = objective(&z);
            r_z = r2;
            f_z = f2;
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &z + (&z - &x) * ((t - 1.0) / t_next);
        t = t_next;
        x = z;
        r_x = r_z;
        f_x = f_z;
        kkt = kkt_residual(&a, &x, &r_x, scale);
        converged = kkt <= tol;
    }

    Ok(SolverReport {
        solution: x.iter().copied().collect(),
        objective: f_x,
        iterations,
        converged,
        kkt_residual: kkt,
    })
}

fn kkt_residual(a: &DMatrix<f64>, x: &DVector<f64>, residual: &DVector<f64>, scale: f64) -> f64 {
    let grad = a.transpose() * residual;
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let v = if x[i] > 0.0 { grad[i].abs() } else { (-grad[i]).max(0.0) };
        worst = worst.max(v);
    }
    worst / scale
}

/// Group-sparse recovery: minimizes
/// `½ Σ_t ‖Ǎ(t)w(t) - x(t)‖² + ι‖W‖_{2,1}` over the complex `G×T` matrix `W`
/// whose rows couple the snapshots, by proximal gradient with momentum and
/// monotone restarts. The prox is the rowwise group soft threshold
/// `row ← row·max(0, 1 - ι·step/‖row‖)`.
pub fn group_l21_solve(
    sketched: &[(DMatrix<C64>, DVector<C64>)],
    iota: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(DMatrix<C64>, SolverReport)> {
    if sketched.is_empty() {
        return Err(Error::Dimension("need at least one snapshot".into()));
    }
    if !(iota >= 0.0 && iota.is_finite()) {
        return Err(Error::Domain(format!("iota must be nonnegative, got {iota}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let g = sketched[0].0.ncols();
    let t_count = sketched.len();
    for (i, (mat, obs)) in sketched.iter().enumerate() {
        if mat.ncols() != g {
            return Err(Error::Dimension(format!(
                "snapshot {i}: dictionary has {} columns, expected {g}",
                mat.ncols()
            )));
        }
        if mat.nrows() != obs.len() {
            return Err(Error::Dimension(format!(
                "snapshot {i}: {} rows vs observation length {}",
                mat.nrows(),
                obs.len()
            )));
        }
    }
    let mats: Vec<&DMatrix<C64>> = sketched.iter().map(|(m, _)| m).collect();
    let step = 1.0 / lipschitz_complex(&mats);

    let loss_grad = |w: &DMatrix<C64>| -> (DMatrix<C64>, f64) {
        let mut grad = DMatrix::<C64>::zeros(g, t_count);
        let mut loss = 0.0f64;
        for (t, (mat, obs)) in sketched.iter().enumerate() {
            let r = mat * w.column(t) - obs;
            loss += 0.5 * r.norm_squared();
            grad.set_column(t, &(mat.adjoint() * r));
        }
        (grad, loss)
    };
    let penalty = |w: &DMatrix<C64>| -> f64 {
        (0..g).map(|i| w.row(i).norm()).sum::<f64>() * iota
    };
    let prox = |w: &mut DMatrix<C64>, thresh: f64| {
        for i in 0..g {
            let norm = w.row(i).norm();
            let factor = if norm > thresh { 1.0 - thresh / norm } else { 0.0 };
            for t in 0..t_count {
                w[(i, t)] *= factor;
            }
        }
    };
    let fixed_point_residual = |w: &DMatrix<C64>, grad: &DMatrix<C64>| -> f64 {
        let mut z = w - grad * C64::new(step, 0.0);
        prox(&mut z, iota * step);
        (w - z).iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
    };

    let mut w = DMatrix::<C64>::zeros(g, t_count);
    let (mut grad_w, loss_w) = loss_grad(&w);
    let mut obj_w = loss_w + penalty(&w);
    let mut y = w.clone();
    let mut t_mom = 1.0f64;
    let mut iterations = 0;
    let mut residual = fixed_point_residual(&w, &grad_w);
    let mut converged = residual <= tol;

    while !converged && iterations < max_iter {
        iterations += 1;
        let (grad_y, _) = loss_grad(&y);
        let mut z = &y - grad_y * C64::new(step, 0.0);
        prox(&mut z, iota * step);
        let (grad_z, loss_z) = loss_grad(&z);
        let mut obj_z = loss_z + penalty(&z);
        let mut grad_next = grad_z;
        if obj_z > obj_w * (1.0 + 1e-14) + 1e-300 {
            // Restart: plain proximal step from the last accepted iterate.
            let mut z2 = &w - &grad_w * C64::new(step, 0.0);
            prox(&mut z2, iota * step);
            let (g2, l2) = loss_grad(&z2);
            obj_z = l2 + penalty(&z2);
            z = z2;
            grad_next = g2;
            t_mom = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
        y = &z + (&z - &w) * C64::new((t_mom - 1.0) / t_next, 0.0);
        t_mom = t_next;
        w = z;
        grad_w = grad_next;
        obj_w = obj_z;
        residual = fixed_point_residual(&w, &grad_w);
        converged = residual <= tol;
    }

    let row_norms: Vec<f64> = (0..g).map(|i| w.row(i).norm()).collect();
    let report = SolverReport {
        solution: row_norms,
        objective: obj_w,
        iterations,
        converged,
        kkt_residual: residual,
    };
    Ok((w, report))
}

/// Turns group-solver output into a discrete measure: atom masses proportional
/// to the row norms of `W`, zero rows dropped. An identically zero `W` has no
/// measure and is an error.
pub fn measure_from_weights(w: &DMatrix<C64>, grid: &[f64]) -> Result<AngularPsf> {
    if w.nrows() != grid.len() {
        return Err(Error::Dimension(format!(
            "weight matrix has {} rows for {} grid points",
            w.nrows(),
            grid.len()
        )));
    }
    let atoms: Vec<(f64, f64)> = (0..w.nrows())
        .filter_map(|i| {
            let norm = w.row(i).norm();
            (norm > 0.0).then_some((grid[i], norm))
        })
        .collect();
    if atoms.is_empty() {
        return Err(Error::Infeasible("weight matrix is identically zero".into()));
    }
    AngularPsf::new(&atoms, &[])
}

/// Turns an NNLS solution into a discrete measure: atoms at grid points with
/// positive weight, normalized. An all-zero solution is an error.
pub fn measure_from_nnls(weights: &[f64], grid: &[f64]) -> Result<AngularPsf> {
    if weights.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} weights for {} grid points",
            weights.len(),
            grid.len()
        )));
    }
    if weights.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain("weights must be nonnegative and finite".into()));
    }
    let atoms: Vec<(f64, f64)> = weights
        .iter()
        .zip(grid)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &xi)| (xi, w))
        .collect();
    if atoms.is_empty() {
        return Err(Error::Infeasible("all NNLS weights are zero".into()));
    }
    AngularPsf::new(&atoms, &[])
}

/// Snapshot projection family `B(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SketchConfig {
    /// `B(t) = I_M` (no compression).
    Identity,
    /// `m` distinct antennas selected uniformly at random per snapshot.
    Selection { m: usize },
    /// Dense `m×M` matrix with i.i.d. `CN(0,1)` entries scaled by `1/√m`.
    Gaussian { m: usize },
}

impl SketchConfig {
    /// Sketch output dimension for an `M`-antenna array.
    pub fn output_dim(&self, num_antennas: usize) -> usize {
        match self {
            SketchConfig::Identity => num_antennas,
            SketchConfig::Selection { m } | SketchConfig::Gaussian { m } => *m,
        }
    }
}

/// Solver configuration accepted as JSON:
/// `{"tol":…, "max_iter":…, "iota_scale":…, "sketch":{"kind":…,"m":…}}`.
/// `max_iter = null` (or absent) means the `50·G` default.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: Option<usize>,
    /// The group penalty is `ι = iota_scale·√T`.
    pub iota_scale: f64,
    pub sketch: SketchConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SOLVER_TOL,
            max_iter: None,
            iota_scale: 1.0,
            sketch: SketchConfig::Identity,
        }
    }
}

impl SolverConfig {
    /// Iteration budget for a `G`-column dictionary.
    pub fn iteration_budget(&self, g: usize) -> usize {
        self.max_iter.unwrap_or(DEFAULT_ITER_PER_COLUMN * g)
    }
}
