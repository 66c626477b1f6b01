//! Array configurations, steering vectors, sampling lattices, and Minkowski
//! difference sets.
//!
//! The canonical angular coordinate is `ξ = sinθ / sinθ_max ∈ [-1, 1]`.
//! With antenna spacing `d = ϱ·λ_ul/(2 sinθ_max)` the k-th uplink array
//! element responds to direction `ξ` with phase `e^{jkπϱξ}`; on the downlink
//! carrier the phase step scales by `1/ν` where `ν = f_ul/f_dl`.

use crate::{C64, Error, Result};
use nalgebra::DVector;

/// Which carrier a quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    Ul,
    Dl,
}

/// Uniform-linear-array configuration.
///
/// `oversampling` (ϱ) measures antenna spacing against the no-grating-lobe
/// spacing `λ_ul/(2 sinθ_max)`; values `ϱ ≥ 1` are accepted so aliasing
/// experiments can be expressed, but [`ArrayConfig::sampling_condition_violated`]
/// flags them.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayConfig {
    num_antennas: usize,
    oversampling: f64,
    carrier_ratio: f64,
    theta_max: f64,
}

impl ArrayConfig {
    /// Validates and builds a configuration.
    ///
    /// Requirements: `M ≥ 1`, `ϱ ∈ (0, 2)`, `ν ∈ (0, 2)`, `θ_max ∈ (0, π/2]`.
    pub fn new(num_antennas: usize, oversampling: f64, carrier_ratio: f64, theta_max: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::Domain("num_antennas must be >= 1".into()));
        }
        if !(oversampling > 0.0 && oversampling < 2.0) {
            return Err(Error::Domain(format!(
                "oversampling must lie in (0, 2), got {oversampling}"
            )));
        }
        if !(carrier_ratio > 0.0 && carrier_ratio < 2.0) {
            return Err(Error::Domain(format!(
                "carrier_ratio must lie in (0, 2), got {carrier_ratio}"
            )));
        }
        if !(theta_max > 0.0 && theta_max <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "theta_max must lie in (0, pi/2], got {theta_max}"
            )));
        }
        Ok(Self { num_antennas, oversampling, carrier_ratio, theta_max })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn oversampling(&self) -> f64 {
        self.oversampling
    }

    pub fn carrier_ratio(&self) -> f64 {
        self.carrier_ratio
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Antenna spacing in units of the uplink wavelength: `d/λ_ul = ϱ/(2 sinθ_max)`.
    pub fn spacing_in_wavelengths(&self) -> f64 {
        self.oversampling / (2.0 * self.theta_max.sin())
    }

    /// True when `ϱ ≥ 1`, i.e. the array under-samples and angular aliasing
    /// (grating lobes) is possible.
    pub fn sampling_condition_violated(&self) -> bool {
        self.oversampling >= 1.0
    }

    /// Per-element phase step multiplier: `πϱ` on the UL band, `πϱ/ν` on DL.
    pub fn phase_step(&self, band: Band) -> f64 {
        match band {
            Band::Ul => std::f64::consts::PI * self.oversampling,
            Band::Dl => std::f64::consts::PI * self.oversampling / self.carrier_ratio,
        }
    }
}

/// Antenna positions in units of `λ_ul/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 3]>,
}

impl ArrayGeometry {
    /// Builds a geometry from explicit positions (units of `λ_ul/2`).
    pub fn new(positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Domain("geometry needs at least one antenna".into()));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Domain("antenna positions must be finite".into()));
        }
        Ok(Self { positions })
    }

    /// Uniform linear array along the x-axis: positions `{k·ϱ·e_x}`.
    pub fn ula(num_antennas: usize, oversampling: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::Domain("num_antennas must be >= 1".into()));
        }
        let positions = (0..num_antennas)
            .map(|k| [k as f64 * oversampling, 0.0, 0.0])
            .collect();
        Ok(Self { positions })
    }

    /// Uniform circular array of the given radius (units of `λ_ul/2`) in the
    /// x-y plane.
    pub fn circle(num_antennas: usize, radius: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::Domain("num_antennas must be >= 1".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain("radius must be positive".into()));
        }
        let positions = (0..num_antennas)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / num_antennas as f64;
                [radius * phi.cos(), radius * phi.sin(), 0.0]
            })
            .collect();
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }
}

/// Points closer than this (in `λ_ul/2` units) are merged when deduplicating
/// difference sets. Geometry inputs are exact rationals or analytic circle
/// points, so 1e-9 cleanly separates genuine duplicates from distinct points.
pub const DIFFERENCE_DEDUP_TOL: f64 = 1e-9;

/// A set of spatial sampling points: scalar lattices for linear arrays,
/// 3-vectors for general geometries (e.g. Minkowski difference sets).
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingSet {
    /// Scalar sampling points, sorted ascending.
    Line(Vec<f64>),
    /// Deduplicated 3-D points.
    Spatial(Vec<[f64; 3]>),
}

impl SamplingSet {
    pub fn len(&self) -> usize {
        match self {
            SamplingSet::Line(p) => p.len(),
            SamplingSet::Spatial(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scalar points, if this is a 1-D set.
    pub fn scalars(&self) -> Option<&[f64]> {
        match self {
            SamplingSet::Line(p) => Some(p),
            SamplingSet::Spatial(_) => None,
        }
    }

    /// 3-D points, if this is a spatial set.
    pub fn points3(&self) -> Option<&[[f64; 3]]> {
        match self {
            SamplingSet::Spatial(p) => Some(p),
            SamplingSet::Line(_) => None,
        }
    }
}

/// Array response at direction `ξ`: element `k` is `e^{jkπϱξ}` (UL) or
/// `e^{jkπ(ϱ/ν)ξ}` (DL). Element 0 is always 1.
pub fn steering_vector(cfg: &ArrayConfig, xi: f64, band: Band) -> Result<DVector<C64>> {
    if !(xi.is_finite() && xi.abs() <= 1.0) {
        return Err(Error::Domain(format!("xi must lie in [-1, 1], got {xi}")));
    }
    let step = cfg.phase_step(band) * xi;
    Ok(DVector::from_fn(cfg.num_antennas(), |k, _| {
        C64::from_polar(1.0, k as f64 * step)
    }))
}

/// Spatial sampling lattice of the first covariance column: `{kϱ}` on UL,
/// `{kϱ/ν}` on DL, for `k = 0..M-1`, ascending.
pub fn ula_lattice(cfg: &ArrayConfig, band: Band) -> SamplingSet {
    let step = match band {
        Band::Ul => cfg.oversampling(),
        Band::Dl => cfg.oversampling() / cfg.carrier_ratio(),
    };
    SamplingSet::Line((0..cfg.num_antennas()).map(|k| k as f64 * step).collect())
}

/// Minkowski difference set `D = R - R = {r_k - r_l}` of a geometry,
/// deduplicated with tolerance [`DIFFERENCE_DEDUP_TOL`]. Contains the origin
/// and is symmetric (`D = -D`).
pub fn difference_set(geom: &ArrayGeometry) -> SamplingSet {
    let pos = geom.positions();
    let mut raw: Vec<[f64; 3]> = Vec::with_capacity(pos.len() * pos.len());
    for a in pos {
        for b in pos {
            raw.push([a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
        }
    }
    // Deterministic order before tolerance-deduplication.
    raw.sort_by(|p, q| {
        p.partial_cmp(q).expect("finite positions yield comparable differences")
    });
    let mut kept: Vec<[f64; 3]> = Vec::new();
    'outer: for p in raw {
        for q in &kept {
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            if d2 <= DIFFERENCE_DEDUP_TOL * DIFFERENCE_DEDUP_TOL {
                continue 'outer;
            }
        }
        kept.push(p);
    }
    SamplingSet::Spatial(kept)
}

/// Scales every point of a sampling set by `factor > 0` (e.g. `D_dl = D_ul/ν`).
pub fn scale_sampling_set(set: &SamplingSet, factor: f64) -> Result<SamplingSet> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Domain(format!("scale factor must be positive, got {factor}")));
    }
    Ok(match set {
        SamplingSet::Line(p) => SamplingSet::Line(p.iter().map(|x| x * factor).collect()),
        SamplingSet::Spatial(p) => SamplingSet::Spatial(
            p.iter().map(|v| [v[0] * factor, v[1] * factor, v[2] * factor]).collect(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(m: usize, rho: f64, nu: f64) -> ArrayConfig {
        ArrayConfig::new(m, rho, nu, std::f64::consts::FRAC_PI_2).unwrap()
    }

    #[test]
    fn config_rejects_out_of_range() {
        assert!(ArrayConfig::new(0, 0.9, 0.9, 1.0).is_err());
        assert!(ArrayConfig::new(4, 0.0, 0.9, 1.0).is_err());
        assert!(ArrayConfig::new(4, 2.0, 0.9, 1.0).is_err());
        assert!(ArrayConfig::new(4, 0.9, 0.0, 1.0).is_err());
        assert!(ArrayConfig::new(4, 0.9, 0.9, 0.0).is_err());
        assert!(ArrayConfig::new(4, 0.9, 0.9, 1.6).is_err());
        assert!(ArrayConfig::new(4, 1.05, 0.9, 1.0).is_ok()); // aliasing configs allowed
        assert!(cfg(4, 1.05, 0.9).sampling_condition_violated());
        assert!(!cfg(4, 0.9, 0.9).sampling_condition_violated());
    }

    #[test]
    fn steering_zero_direction_is_all_ones() {
        let v = steering_vector(&cfg(5, 0.7, 0.9), 0.0, Band::Ul).unwrap();
        for k in 0..5 {
            assert_eq!(v[k], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_halfwave_endfire() {
        // M=2, rho=1, xi=1, UL: (1, e^{j pi}) = (1, -1).
        let v = steering_vector(&cfg(2, 1.0, 0.9), 1.0, Band::Ul).unwrap();
        assert_abs_diff_eq!(v[1].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn steering_dl_cancels_carrier_ratio() {
        // rho = nu = 0.9 makes the DL phase step exactly pi per unit xi.
        let v = steering_vector(&cfg(4, 0.9, 0.9), 0.5, Band::Dl).unwrap();
        for k in 0..4 {
            let expect = C64::from_polar(1.0, k as f64 * std::f64::consts::PI * 0.5);
            assert_abs_diff_eq!((v[k] - expect).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn steering_rejects_out_of_window() {
        assert!(steering_vector(&cfg(4, 0.9, 0.9), 1.2, Band::Ul).is_err());
    }

    #[test]
    fn lattices_match_hand_values() {
        let c = cfg(3, 0.9, 0.9);
        let ul = ula_lattice(&c, Band::Ul);
        let dl = ula_lattice(&c, Band::Dl);
        let ul = ul.scalars().unwrap();
        let dl = dl.scalars().unwrap();
        assert_abs_diff_eq!(ul[0], 0.0);
        assert_abs_diff_eq!(ul[1], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(ul[2], 1.8, epsilon = 1e-15);
        assert_abs_diff_eq!(dl[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dl[2], 2.0, epsilon = 1e-15);

        let single = ula_lattice(&cfg(1, 0.7, 0.8), Band::Ul);
        assert_eq!(single.scalars().unwrap(), &[0.0]);
    }

    #[test]
    fn ula_difference_set_has_2m_minus_1_points() {
        for m in 1..=16 {
            let geom = ArrayGeometry::ula(m, 0.9).unwrap();
            let d = difference_set(&geom);
            assert_eq!(d.len(), 2 * m - 1, "M={m}");
        }
    }

    #[test]
    fn difference_set_is_symmetric_and_contains_origin() {
        let geom = ArrayGeometry::circle(6, 1.3).unwrap();
        let d = difference_set(&geom);
        let pts = d.points3().unwrap();
        assert!(pts.iter().any(|p| p.iter().all(|c| c.abs() < 1e-12)));
        for p in pts {
            let neg = [-p[0], -p[1], -p[2]];
            assert!(
                pts.iter().any(|q| {
                    (q[0] - neg[0]).abs() < 1e-9 && (q[1] - neg[1]).abs() < 1e-9 && (q[2] - neg[2]).abs() < 1e-9
                }),
                "missing mirror of {p:?}"
            );
        }
    }

    #[test]
    fn scaling_matches_hand_values() {
        let s = SamplingSet::Line(vec![0.0, 1.0, 2.0]);
        let scaled = scale_sampling_set(&s, 1.0 / 0.9).unwrap();
        let p = scaled.scalars().unwrap();
        assert_abs_diff_eq!(p[1], 1.0 / 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 2.0 / 0.9, epsilon = 1e-15);
        assert!(scale_sampling_set(&s, 0.0).is_err());
        assert!(scale_sampling_set(&s, -1.0).is_err());
    }
}
