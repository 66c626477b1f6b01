//! Synthetic channel snapshots under the uncorrelated-scattering model, plus
//! sample-covariance estimation and snapshot sketching.
//!
//! Each snapshot is `h(t) = Σ_i w_i(t)·a(ξ_i) + n(t)` with independent
//! `w_i(t) ~ CN(0, γ_i)` across sources and snapshots. Continuous spectrum
//! components are discretized on a dedicated simulation grid, deliberately
//! finer than and independent of the estimation dictionary.
//!
//! Randomness: ChaCha8 seeded per snapshot through a splitmix64-style seed
//! derivation from `(seed, stream, index)`, so batches are bit-for-bit
//! reproducible regardless of how generation is scheduled. Normal draws use
//! `rand_distr::StandardNormal` (Ziggurat); a complex `CN(0, v)` sample is
//! `sqrt(v/2)·(x + jy)`.

use crate::estimators::{GridDictionary, SketchConfig};
use crate::manifold::{steering_vector, ArrayConfig, Band};
use crate::psf::AngularPsf;
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Default number of discretization points per continuous spectrum component.
pub const DEFAULT_SIM_GRID: usize = 4096;

/// Minimum allowed discretization fineness.
pub const MIN_SIM_GRID: usize = 256;

/// A batch of i.i.d. channel snapshots with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct SnapshotBatch {
    snapshots: Vec<DVector<C64>>,
    seed: u64,
    snr_db: Option<f64>,
    band: Band,
}

impl SnapshotBatch {
    pub fn snapshots(&self) -> &[DVector<C64>] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn num_antennas(&self) -> usize {
        self.snapshots[0].len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `None` means the batch was generated without additive noise.
    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    pub fn band(&self) -> Band {
        self.band
    }
}

/// Splitmix64 finalizer over a `(seed, stream, index)` triple; distinct
/// streams keep channel, sketch, and noise draws independent.
pub(crate) fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0xA076_1D64_78BD_642F))
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_normal(rng: &mut ChaCha8Rng, variance: f64) -> C64 {
    let scale = (variance * 0.5).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(scale * re, scale * im)
}

/// Point sources for simulation: atoms kept as-is, each density component
/// split into `sim_grid_size` cells with per-cell variance `density·Δξ`
/// (cell midpoints carry the phase), so total variance equals the component
/// mass exactly.
fn discretize_psf(psf: &AngularPsf, sim_grid_size: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xis = Vec::new();
    let mut variances = Vec::new();
    for atom in psf.atoms() {
        xis.push(atom.xi);
        variances.push(atom.mass);
    }
    for rect in psf.rects() {
        let width = rect.b - rect.a;
        let delta = width / sim_grid_size as f64;
        for j in 0..sim_grid_size {
            xis.push(rect.a + (j as f64 + 0.5) * delta);
            variances.push(rect.density * delta);
        }
    }
    (xis, variances)
}

/// Generates `t_count` i.i.d. snapshots of the channel whose angular power
/// distribution is `psf`, observed by the array in the given band.
///
/// `snr_db = None` disables noise; otherwise the per-antenna noise variance
/// is `σ² = total_mass·10^(-snr/10)`, i.e. `snr_db = 10·log10(trace Σ/(M σ²))`.
pub fn generate_snapshots(
    psf: &AngularPsf,
    cfg: &ArrayConfig,
    t_count: usize,
    snr_db: Option<f64>,
    seed: u64,
    band: Band,
    sim_grid_size: usize,
) -> Result<SnapshotBatch> {
    if t_count == 0 {
        return Err(Error::Domain("need at least one snapshot".into()));
    }
    if sim_grid_size < MIN_SIM_GRID {
        return Err(Error::Domain(format!(
            "simulation grid too coarse: {sim_grid_size} < {MIN_SIM_GRID}"
        )));
    }
    let (xis, variances) = discretize_psf(psf, sim_grid_size);
    let m = cfg.num_antennas();
    let n = xis.len();
    let mut steering = DMatrix::<C64>::zeros(m, n);
    for (i, &xi) in xis.iter().enumerate() {
        steering.set_column(i, &steering_vector(cfg, xi, band)?);
    }
    let total_mass: f64 = variances.iter().sum();
    let noise_var = snr_db.map(|snr| total_mass * 10f64.powf(-snr / 10.0));

    let mut snapshots = Vec::with_capacity(t_count);
    for t in 0..t_count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, t as u64));
        let weights =
            DVector::from_iterator(n, variances.iter().map(|&v| complex_normal(&mut rng, v)));
        let mut h = &steering * weights;
        if let Some(var) = noise_var {
            for k in 0..m {
                h[k] += complex_normal(&mut rng, var);
            }
        }
        snapshots.push(h);
    }
    Ok(SnapshotBatch { snapshots, seed, snr_db, band })
}

/// Empirical covariance `(1/T)·Σ_t h(t)h(t)ᴴ`, Hermitian by construction.
pub fn sample_covariance(batch: &SnapshotBatch) -> DMatrix<C64> {
    let m = batch.num_antennas();
    let mut acc = DMatrix::<C64>::zeros(m, m);
    for h in batch.snapshots() {
        acc += h * h.adjoint();
    }
    acc / C64::new(batch.len() as f64, 0.0)
}

/// Projects each snapshot through a per-snapshot sketch `B(t)` and returns the
/// solver inputs `(Ǎ(t), x(t)) = (B(t)·A, B(t)·h(t) + n(t))` with additive
/// `CN(0, noise_var·I)` noise (`noise_var = 0` disables it). Sketch draws and
/// noise use seed streams separate from channel generation.
pub fn sketch_snapshots(
    batch: &SnapshotBatch,
    dict: &GridDictionary,
    sketch: &SketchConfig,
    noise_var: f64,
    seed: u64,
) -> Result<Vec<(DMatrix<C64>, DVector<C64>)>> {
    let m_full = batch.num_antennas();
    if dict.num_antennas() != m_full {
        return Err(Error::Dimension(format!(
            "dictionary has {} rows but snapshots have {} antennas",
            dict.num_antennas(),
            m_full
        )));
    }
    let m_out = sketch.output_dim(m_full);
    if m_out > m_full {
        return Err(Error::Dimension(format!(
            "sketch output dimension {m_out} exceeds antenna count {m_full}"
        )));
    }
    if m_out == 0 {
        return Err(Error::Dimension("sketch output dimension must be positive".into()));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::Domain(format!("noise variance must be nonnegative, got {noise_var}")));
    }

    let mut out = Vec::with_capacity(batch.len());
    for (t, h) in batch.snapshots().iter().enumerate() {
        let mut rng_b = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, t as u64));
        let (a_t, mut x_t) = match sketch {
            SketchConfig::Identity => (dict.matrix().clone(), h.clone()),
            SketchConfig::Selection { m } => {
                let rows = rand::seq::index::sample(&mut rng_b, m_full, *m).into_vec();
                let a = DMatrix::from_fn(*m, dict.num_columns(), |r, c| {
                    dict.matrix()[(rows[r], c)]
                });
                let x = DVector::from_fn(*m, |r, _| h[rows[r]]);
                (a, x)
            }
            SketchConfig::Gaussian { m } => {
                // Entries CN(0,1)/sqrt(m), so E[BᴴB] = I.
                let b = DMatrix::from_fn(*m, m_full, |_, _| {
                    complex_normal(&mut rng_b, 1.0 / *m as f64)
                });
                (&b * dict.matrix(), &b * h)
            }
        };
        if noise_var > 0.0 {
            let mut rng_n = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2, t as u64));
            for k in 0..m_out {
                x_t[k] += complex_normal(&mut rng_n, noise_var);
            }
        }
        out.push((a_t, x_t));
    }
    Ok(out)
}
