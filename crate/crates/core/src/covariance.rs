//! Hermitian Toeplitz covariance matrices, eigen power distributions, the
//! power-capture distortion metric, and the line-of-sight attenuation factor.
//!
//! A stationary angular PSF makes the spatial covariance Toeplitz:
//! `T_{k,l} = σ[k-l]` with `σ[m] = γ̌(mϱ)` (UL) or `γ̌(mϱ/ν)` (DL) and
//! `σ[-m] = conj σ[m]`. Only the first column is stored.

use crate::manifold::{ula_lattice, ArrayConfig, Band};
use crate::psf::AngularPsf;
use crate::{C64, Error, Result};
use nalgebra::DMatrix;

/// Hermitian (PSD up to tolerance) Toeplitz matrix stored as its first column.
///
/// `σ[0]` is the per-antenna power `γ̌(0)` and must be real and positive; the
/// stored head entry has its (tolerated, tiny) imaginary part removed.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzCovariance {
    first_column: Vec<C64>,
}

impl ToeplitzCovariance {
    /// Builds from a first column; rejects empty input, non-finite entries,
    /// and a head entry that is not (numerically) real positive.
    pub fn from_first_column(column: Vec<C64>) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::Dimension("first column must be non-empty".into()));
        }
        if column.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("first column entries must be finite".into()));
        }
        let head = column[0];
        if !(head.re > 0.0) {
            return Err(Error::Domain(format!(
                "sigma[0] must be positive (total per-antenna power), got {}",
                head.re
            )));
        }
        if head.im.abs() > 1e-8 * head.re {
            return Err(Error::Numerical(format!(
                "sigma[0] must be real; imaginary part {} exceeds tolerance",
                head.im
            )));
        }
        let mut first_column = column;
        first_column[0] = C64::new(head.re, 0.0);
        Ok(Self { first_column })
    }

    pub fn dim(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[C64] {
        &self.first_column
    }

    /// `trace = M·σ[0]` (all diagonal entries equal `σ[0]`).
    pub fn trace(&self) -> f64 {
        self.first_column[0].re * self.first_column.len() as f64
    }

    /// Expands the full Hermitian Toeplitz matrix `T_{k,l} = σ[k-l]`.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |r, c| {
            if r >= c {
                self.first_column[r - c]
            } else {
                self.first_column[c - r].conj()
            }
        })
    }
}

/// Samples the PSF transform on the band's lattice: `σ[k] = γ̌(kϱ)` (UL) or
/// `γ̌(kϱ/ν)` (DL).
pub fn covariance_from_psf(psf: &AngularPsf, cfg: &ArrayConfig, band: Band) -> ToeplitzCovariance {
    let lattice = ula_lattice(cfg, band);
    let samples = psf
        .sample_on_lattice(&lattice)
        .expect("ULA lattices are scalar sampling sets");
    ToeplitzCovariance::from_first_column(samples.values)
        .expect("normalized PSF has sigma[0] = 1")
}

/// Projects a Hermitian matrix onto Toeplitz structure by averaging each
/// subdiagonal (together with the conjugated superdiagonal, so exactly
/// Toeplitz-Hermitian inputs are fixed points bit for bit). Preserves the
/// trace. Inputs farther than `1e-8·max(1, ‖S‖_max)` from Hermitian are
/// rejected.
pub fn toeplitzify(sample: &DMatrix<C64>) -> Result<ToeplitzCovariance> {
    let m = sample.nrows();
    if m == 0 || sample.ncols() != m {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            sample.nrows(),
            sample.ncols()
        )));
    }
    let scale = sample.iter().fold(0.0f64, |acc, v| acc.max(v.norm())).max(1.0);
    let mut asym = 0.0f64;
    for r in 0..m {
        for c in 0..m {
            asym = asym.max((sample[(r, c)] - sample[(c, r)].conj()).norm());
        }
    }
    if asym > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "input is not Hermitian: max |S - S^H| = {asym:.3e} exceeds tolerance"
        )));
    }
    let mut column = Vec::with_capacity(m);
    for d in 0..m {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..m - d {
            acc += 0.5 * (sample[(k + d, k)] + sample[(k, k + d)].conj());
        }
        column.push(acc / (m - d) as f64);
    }
    ToeplitzCovariance::from_first_column(column)
}

/// Nonnegative eigen-power fractions, sorted non-increasing, summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDistribution {
    values: Vec<f64>,
}

impl PowerDistribution {
    /// Sorts non-increasing and normalizes. Entries must be nonnegative up to
    /// fp noise (anything above `-1e-12·max` is clamped to zero).
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("power distribution must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("power values must be finite".into()));
        }
        let max = values.iter().fold(0.0f64, |a, &v| a.max(v));
        if values.iter().any(|&v| v < -1e-12 * max.max(1.0)) {
            return Err(Error::Domain("power values must be nonnegative".into()));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        let sum: f64 = values.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::Domain("power distribution must have positive mass".into()));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite values compare"));
        for v in values.iter_mut() {
            *v /= sum;
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cumulative capture `η(k) = Σ_{i≤k} p_i` for 1-indexed `k`.
    pub fn cumulative(&self, k: usize) -> f64 {
        self.values[..k].iter().sum()
    }
}

/// Hermitian eigendecomposition with deterministic ordering and gauge:
/// eigenvalues sorted non-increasing, each eigenvector's first significant
/// component rotated to be real positive. Returns the unitary basis and the
/// normalized power fractions `p_i = λ_i/Σλ_j`.
///
/// Matrices indefinite beyond `-1e-8·trace` are rejected; tiny negative
/// eigenvalues within tolerance are clamped to zero.
pub fn eigen_power(cov: &ToeplitzCovariance) -> Result<(DMatrix<C64>, PowerDistribution)> {
    let m = cov.dim();
    let mat = cov.to_matrix();
    let eig = mat
        .clone()
        .symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });

    let tol = 1e-8 * cov.trace();
    let mut lambdas = Vec::with_capacity(m);
    let mut basis = DMatrix::<C64>::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        let lam = eig.eigenvalues[src];
        if lam < -tol {
            return Err(Error::Numerical(format!(
                "covariance is indefinite beyond tolerance: eigenvalue {lam:.3e}"
            )));
        }
        lambdas.push(lam.max(0.0));
        let mut col = eig.eigenvectors.column(src).clone_owned();
        // Gauge: first component with |v_i| > 1e-8 made real positive.
        if let Some(lead) = col.iter().find(|v| v.norm() > 1e-8) {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
        basis.set_column(dst, &col);
    }

    // Orthonormality certificate on the returned basis.
    let gram = basis.adjoint() * &basis;
    let mut dev = 0.0f64;
    for r in 0..m {
        for c in 0..m {
            let expect = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((gram[(r, c)] - expect).norm());
        }
    }
    if dev > 1e-8 {
        return Err(Error::Numerical(format!(
            "eigenbasis failed the orthonormality check: max deviation {dev:.3e}"
        )));
    }

    Ok((basis, PowerDistribution::new(lambdas)?))
}

/// Power captured by an arbitrary unitary basis against a true covariance:
/// `q_i = û_i^H Σ û_i`, normalized and sorted into a [`PowerDistribution`].
pub fn captured_power(
    true_cov: &ToeplitzCovariance,
    estimated_basis: &DMatrix<C64>,
) -> Result<PowerDistribution> {
    let m = true_cov.dim();
    if estimated_basis.nrows() != m || estimated_basis.ncols() != m {
        return Err(Error::Dimension(format!(
            "basis must be {m}x{m}, got {}x{}",
            estimated_basis.nrows(),
            estimated_basis.ncols()
        )));
    }
    let gram = estimated_basis.adjoint() * estimated_basis;
    let mut dev = 0.0f64;
    for r in 0..m {
        for c in 0..m {
            let expect = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((gram[(r, c)] - expect).norm());
        }
    }
    if dev > 1e-8 {
        return Err(Error::Numerical(format!(
            "basis is not unitary: max |U^H U - I| = {dev:.3e}"
        )));
    }
    let sigma = true_cov.to_matrix();
    let projected = &sigma * estimated_basis;
    let mut q = Vec::with_capacity(m);
    for i in 0..m {
        // û_i^H Σ û_i is real for Hermitian Σ; the residual imaginary part is fp noise.
        let val: C64 = estimated_basis.column(i).dotc(&projected.column(i));
        q.push(val.re.max(0.0));
    }
    let total: f64 = q.iter().sum();
    let trace = true_cov.trace();
    if (total - trace).abs() > 1e-8 * trace.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "captured power {total} does not sum to trace {trace}"
        )));
    }
    PowerDistribution::new(q)
}

/// Worst relative loss in cumulative eigen-power capture:
/// `ϑ(p, p̂) = max_{k∈1..M} (η_p(k) - η_p̂(k))/η_p(k)`, clamped into `[0, 1]`.
/// Zero iff the estimated basis captures at least as much as the true one at
/// every depth `k`.
pub fn distortion(p: &PowerDistribution, p_hat: &PowerDistribution) -> Result<f64> {
    if p.len() != p_hat.len() {
        return Err(Error::Dimension(format!(
            "distributions must share length, got {} and {}",
            p.len(),
            p_hat.len()
        )));
    }
    let mut worst = 0.0f64;
    let (mut cum_p, mut cum_q) = (0.0f64, 0.0f64);
    for k in 0..p.len() {
        cum_p += p.values()[k];
        cum_q += p_hat.values()[k];
        if cum_p > 0.0 {
            worst = worst.max((cum_p - cum_q) / cum_p);
        }
    }
    Ok(worst.clamp(0.0, 1.0))
}

/// Line-of-sight attenuation factor for a single path at `θ₀` when the UL
/// eigenbasis is reused on a DL carrier with ratio `ν`:
/// `|sin(Mπ(1-ν)r)| / (M·|sin(π(1-ν)r)|)` with `r = sinθ₀/sinθ_max`.
/// Returns 1 in the `(1-ν)r → 0` limit (and at every integer argument, where
/// the Dirichlet ratio again peaks at magnitude 1).
pub fn los_attenuation(nu: f64, m: usize, theta0: f64, theta_max: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("antenna count must be >= 1".into()));
    }
    if !(theta_max > 0.0 && theta_max <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("theta_max must lie in (0, pi/2], got {theta_max}")));
    }
    if !(theta0.abs() <= theta_max) {
        return Err(Error::Domain(format!(
            "theta0 must satisfy |theta0| <= theta_max, got {theta0}"
        )));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Domain(format!("carrier ratio must be positive, got {nu}")));
    }
    let r = theta0.sin() / theta_max.sin();
    let x = (1.0 - nu) * r;
    if (x - x.round()).abs() < 1e-12 {
        return Ok(1.0);
    }
    let m_f = m as f64;
    let val = (m_f * std::f64::consts::PI * x).sin().abs()
        / (m_f * (std::f64::consts::PI * x).sin().abs());
    Ok(val.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(m: usize, rho: f64, nu: f64) -> ArrayConfig {
        ArrayConfig::new(m, rho, nu, std::f64::consts::FRAC_PI_2).unwrap()
    }

    fn rect_cov(m: usize, rho: f64, nu: f64, band: Band) -> ToeplitzCovariance {
        covariance_from_psf(&AngularPsf::standard_rect(), &cfg(m, rho, nu), band)
    }

    #[test]
    fn constructor_validates_head_entry() {
        assert!(ToeplitzCovariance::from_first_column(vec![]).is_err());
        assert!(ToeplitzCovariance::from_first_column(vec![C64::new(0.0, 0.0)]).is_err());
        assert!(ToeplitzCovariance::from_first_column(vec![C64::new(-1.0, 0.0)]).is_err());
        assert!(ToeplitzCovariance::from_first_column(vec![C64::new(1.0, 0.5)]).is_err());
        let cov = ToeplitzCovariance::from_first_column(vec![
            C64::new(1.0, 0.0),
            C64::new(0.3, -0.2),
        ])
        .unwrap();
        assert_eq!(cov.dim(), 2);
        assert_abs_diff_eq!(cov.trace(), 2.0);
        let m = cov.to_matrix();
        assert_eq!(m[(1, 0)], C64::new(0.3, -0.2));
        assert_eq!(m[(0, 1)], C64::new(0.3, 0.2));
    }

    #[test]
    fn psf_covariance_ul_dl_coincide_at_unit_carrier_ratio() {
        let ul = rect_cov(6, 0.9, 1.0, Band::Ul);
        let dl = rect_cov(6, 0.9, 1.0, Band::Dl);
        for k in 0..6 {
            assert_abs_diff_eq!(
                (ul.first_column()[k] - dl.first_column()[k]).norm(),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn rank_one_all_ones_covariance_concentrates_power() {
        // Atom at xi = 0 gives sigma = all-ones: the 11^H matrix.
        let psf = AngularPsf::new(&[(0.0, 1.0)], &[]).unwrap();
        let cov = covariance_from_psf(&psf, &cfg(8, 0.9, 0.9), Band::Ul);
        let (basis, p) = eigen_power(&cov).unwrap();
        assert_abs_diff_eq!(p.values()[0], 1.0, epsilon = 1e-12);
        for &v in &p.values()[1..] {
            assert!(v.abs() <= 1e-12);
        }
        // Dominant eigenvector is the normalized all-ones vector up to gauge;
        // the gauge makes its first entry real positive.
        let lead = basis.column(0);
        for k in 0..8 {
            assert_abs_diff_eq!((lead[k] - lead[0]).norm(), 0.0, epsilon = 1e-8);
        }
        assert!(lead[0].re > 0.0 && lead[0].im.abs() < 1e-10);
    }

    #[test]
    fn identity_covariance_gives_uniform_power() {
        let mut col = vec![C64::new(0.0, 0.0); 5];
        col[0] = C64::new(1.0, 0.0);
        let cov = ToeplitzCovariance::from_first_column(col).unwrap();
        let (_, p) = eigen_power(&cov).unwrap();
        for &v in p.values() {
            assert_abs_diff_eq!(v, 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigen_reconstructs_rect_covariance() {
        let cov = rect_cov(16, 0.9, 0.9, Band::Ul);
        let (basis, p) = eigen_power(&cov).unwrap();
        let lambda = DMatrix::from_fn(16, 16, |r, c| {
            if r == c {
                C64::new(p.values()[r] * cov.trace(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let rebuilt = &basis * lambda * basis.adjoint();
        let diff = (&rebuilt - cov.to_matrix()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        assert!(diff <= 1e-10, "reconstruction deviates by {diff}");
    }

    #[test]
    fn toeplitzify_is_identity_on_toeplitz_input_and_preserves_trace() {
        let cov = rect_cov(10, 0.9, 0.9, Band::Ul);
        let round = toeplitzify(&cov.to_matrix()).unwrap();
        for k in 0..10 {
            assert_abs_diff_eq!(
                (round.first_column()[k] - cov.first_column()[k]).norm(),
                0.0,
                epsilon = 1e-14
            );
        }

        let ident = DMatrix::<C64>::identity(4, 4);
        let e0 = toeplitzify(&ident).unwrap();
        assert_eq!(e0.first_column()[0], C64::new(1.0, 0.0));
        for k in 1..4 {
            assert_eq!(e0.first_column()[k], C64::new(0.0, 0.0));
        }

        // Random Hermitian with positive diagonal: trace preserved.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = DMatrix::<C64>::from_fn(6, 6, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let herm = (&a * a.adjoint()).scale(0.5);
        let t = toeplitzify(&herm).unwrap();
        let trace: f64 = (0..6).map(|i| herm[(i, i)].re).sum();
        assert_abs_diff_eq!(t.trace(), trace, epsilon = 1e-10 * trace.abs());
    }

    #[test]
    fn toeplitzify_rejects_non_hermitian() {
        let mut m = DMatrix::<C64>::identity(3, 3);
        m[(0, 1)] = C64::new(0.5, 0.0);
        m[(1, 0)] = C64::new(0.1, 0.0);
        assert!(toeplitzify(&m).is_err());
        assert!(toeplitzify(&DMatrix::<C64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn self_capture_reproduces_eigen_power() {
        let cov = rect_cov(12, 0.9, 0.9, Band::Dl);
        let (basis, p) = eigen_power(&cov).unwrap();
        let p_hat = captured_power(&cov, &basis).unwrap();
        for k in 0..12 {
            assert_abs_diff_eq!(p.values()[k], p_hat.values()[k], epsilon = 1e-10);
        }
    }

    #[test]
    fn identity_covariance_captures_uniformly_in_any_basis() {
        let mut col = vec![C64::new(0.0, 0.0); 6];
        col[0] = C64::new(1.0, 0.0);
        let cov = ToeplitzCovariance::from_first_column(col).unwrap();
        // Any unitary basis: take the eigenbasis of an unrelated covariance.
        let (basis, _) = eigen_power(&rect_cov(6, 0.9, 0.9, Band::Ul)).unwrap();
        let p_hat = captured_power(&cov, &basis).unwrap();
        for &v in p_hat.values() {
            assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn captured_power_rejects_non_unitary_basis() {
        let cov = rect_cov(4, 0.9, 0.9, Band::Ul);
        let skew = DMatrix::<C64>::identity(4, 4).scale(0.5);
        assert!(captured_power(&cov, &skew).is_err());
    }

    #[test]
    fn distortion_hand_values() {
        let p = PowerDistribution::new(vec![1.0, 0.0]).unwrap();
        let q = PowerDistribution::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(distortion(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(distortion(&p, &q).unwrap(), 0.5, epsilon = 1e-15);
        // Estimator capturing more than the truth at every depth: distortion 0.
        assert_abs_diff_eq!(distortion(&q, &p).unwrap(), 0.0);
        let r = PowerDistribution::new(vec![1.0]).unwrap();
        assert!(distortion(&p, &r).is_err());
    }

    #[test]
    fn power_distribution_sorts_normalizes_and_validates() {
        let p = PowerDistribution::new(vec![1.0, 3.0, 0.0]).unwrap();
        assert_eq!(p.values(), &[0.75, 0.25, 0.0]);
        assert_abs_diff_eq!(p.cumulative(2), 1.0, epsilon = 1e-15);
        assert!(PowerDistribution::new(vec![]).is_err());
        assert!(PowerDistribution::new(vec![-0.5, 1.0]).is_err());
        assert!(PowerDistribution::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn attenuation_limits_and_range() {
        assert_eq!(los_attenuation(1.0, 64, 0.4, 1.0).unwrap(), 1.0);
        assert_eq!(los_attenuation(0.9, 64, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(los_attenuation(0.9, 1, 0.5, 1.0).unwrap(), 1.0);
        let v = los_attenuation(0.9, 64, 0.7, 1.2).unwrap();
        assert!(v > 0.0 && v < 1.0, "attenuation {v} outside (0,1)");
        assert!(los_attenuation(0.9, 0, 0.1, 1.0).is_err());
        assert!(los_attenuation(0.9, 4, 1.4, 1.0).is_err());
    }
}
