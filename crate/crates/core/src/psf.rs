//! Angular power spread functions (PSFs) as positive normalized measures on
//! `ξ ∈ [-1, 1]`, and their continuous Fourier transforms
//! `γ̌(x) = ∫ γ(dξ) e^{jπξx}`.
//!
//! A PSF is a mixture of point masses (atoms) and piecewise-constant densities
//! (rects); every experimental configuration in this crate uses exactly these
//! two ingredients. Construction normalizes total mass to 1, so `γ̌(0) = 1`
//! and `|γ̌(x)| ≤ 1` everywhere.

use crate::manifold::SamplingSet;
use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};

/// Point mass `mass · δ(ξ - xi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub xi: f64,
    pub mass: f64,
}

/// Constant density `density` on the interval `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub a: f64,
    pub b: f64,
    pub density: f64,
}

/// Positive normalized measure on `[-1, 1]`: atoms plus rectangular densities.
///
/// Inputs with positive total mass are accepted and rescaled so the total
/// mass is exactly 1 (normalization is "without loss of generality" for all
/// downstream uses: covariances scale linearly in the measure).
#[derive(Clone, Debug, PartialEq)]
pub struct AngularPsf {
    atoms: Vec<Atom>,
    rects: Vec<Rect>,
}

impl AngularPsf {
    /// Builds and normalizes a PSF from `(xi, mass)` atoms and
    /// `(a, b, density)` rects.
    pub fn new(atoms: &[(f64, f64)], rects: &[(f64, f64, f64)]) -> Result<Self> {
        for &(xi, mass) in atoms {
            if !(xi.is_finite() && xi.abs() <= 1.0) {
                return Err(Error::Domain(format!("atom location {xi} outside [-1, 1]")));
            }
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::Domain(format!("atom mass must be positive, got {mass}")));
            }
        }
        for &(a, b, density) in rects {
            if !(a.is_finite() && b.is_finite() && a >= -1.0 && b <= 1.0 && b > a) {
                return Err(Error::Domain(format!(
                    "rect [{a}, {b}] must be a non-degenerate subinterval of [-1, 1]"
                )));
            }
            if !(density > 0.0 && density.is_finite()) {
                return Err(Error::Domain(format!("rect density must be positive, got {density}")));
            }
        }
        let total: f64 = atoms.iter().map(|&(_, m)| m).sum::<f64>()
            + rects.iter().map(|&(a, b, c)| c * (b - a)).sum::<f64>();
        if !(total > 0.0) {
            return Err(Error::Domain("PSF must have positive total mass".into()));
        }
        Ok(Self {
            atoms: atoms.iter().map(|&(xi, mass)| Atom { xi, mass: mass / total }).collect(),
            rects: rects
                .iter()
                .map(|&(a, b, density)| Rect { a, b, density: density / total })
                .collect(),
        })
    }

    /// The two-level rectangular PSF used by the simulation scenarios:
    /// density 1 on `[0.6, 0.8]` plus density 4 on `[0.8, 1.0]`
    /// (total mass `0.2·1 + 0.2·4 = 1`).
    pub fn standard_rect() -> Self {
        Self::new(&[], &[(0.6, 0.8, 1.0), (0.8, 1.0, 4.0)])
            .expect("standard rect PSF is valid by construction")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// Total mass after normalization; equals 1 up to the two roundings in
    /// the normalizing division.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.rects.iter().map(|r| r.density * (r.b - r.a)).sum::<f64>()
    }

    /// Continuous Fourier transform `γ̌(x) = ∫ γ(dξ) e^{jπξx}`.
    ///
    /// Atoms contribute `Σ γ_i e^{jπξ_i x}`; a rect contributes its closed
    /// form `c(e^{jπbx} - e^{jπax})/(jπx)`, evaluated in the cancellation-free
    /// equivalent `c(b-a)·e^{jπ(a+b)x/2}·sinc(π(b-a)x/2)` so small `|x|` needs
    /// no special casing beyond the sinc itself.
    pub fn fourier(&self, x: f64) -> C64 {
        debug_assert!(x.is_finite());
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.atoms {
            acc += a.mass * C64::from_polar(1.0, std::f64::consts::PI * a.xi * x);
        }
        for r in &self.rects {
            let half_width = 0.5 * (r.b - r.a);
            let center = 0.5 * (r.a + r.b);
            let phase = C64::from_polar(1.0, std::f64::consts::PI * center * x);
            let s = sinc(std::f64::consts::PI * half_width * x);
            acc += r.density * (r.b - r.a) * s * phase;
        }
        acc
    }

    /// Samples `γ̌` on a scalar lattice; for the UL lattice `{kϱ}` this is the
    /// first column of the UL covariance.
    pub fn sample_on_lattice(&self, lattice: &SamplingSet) -> Result<FourierSamples> {
        let points = lattice.scalars().ok_or_else(|| {
            Error::Domain("Fourier sampling needs a scalar (1-D) sampling set".into())
        })?;
        let values = points.iter().map(|&x| self.fourier(x)).collect();
        Ok(FourierSamples { points: points.to_vec(), values })
    }
}

/// `sin(z)/z` with the usual series branch near zero.
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        // |error| <= z^4/120 < 9e-27 on this branch.
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Fourier-transform samples `γ̌(x_k)` on a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSamples {
    pub points: Vec<f64>,
    pub values: Vec<C64>,
}

/// Serializable PSF description: `{"atoms":[{"xi":..,"mass":..}],
/// "rects":[{"a":..,"b":..,"density":..}]}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsfSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub rects: Vec<RectSpec>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub xi: f64,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSpec {
    pub a: f64,
    pub b: f64,
    pub density: f64,
}

impl PsfSpec {
    /// Validates and builds the measure.
    pub fn build(&self) -> Result<AngularPsf> {
        let atoms: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.xi, a.mass)).collect();
        let rects: Vec<(f64, f64, f64)> = self.rects.iter().map(|r| (r.a, r.b, r.density)).collect();
        AngularPsf::new(&atoms, &rects)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constructor_rejects_bad_inputs() {
        assert!(AngularPsf::new(&[(1.5, 1.0)], &[]).is_err());
        assert!(AngularPsf::new(&[(0.0, 0.0)], &[]).is_err());
        assert!(AngularPsf::new(&[], &[(0.5, 0.5, 1.0)]).is_err());
        assert!(AngularPsf::new(&[], &[(0.8, 0.6, 1.0)]).is_err());
        assert!(AngularPsf::new(&[], &[(0.6, 0.8, -1.0)]).is_err());
        assert!(AngularPsf::new(&[], &[]).is_err());
    }

    #[test]
    fn normalization_makes_unit_mass() {
        let psf = AngularPsf::new(&[(0.3, 2.0), (-0.1, 6.0)], &[(0.0, 0.5, 4.0)]).unwrap();
        assert_abs_diff_eq!(psf.total_mass(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psf.fourier(0.0).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psf.fourier(0.0).im, 0.0);
    }

    #[test]
    fn standard_rect_has_unit_mass_without_rescaling() {
        let psf = AngularPsf::standard_rect();
        // Densities stay at (1, 4) up to the fp total-mass rounding
        // (0.8 - 0.6 is one ulp above 0.2).
        assert_abs_diff_eq!(psf.rects()[0].density, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(psf.rects()[1].density, 4.0, epsilon = 4e-15);
        assert_abs_diff_eq!(psf.total_mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_atom_transform_is_pure_phase() {
        let psf = AngularPsf::new(&[(1.0, 1.0)], &[]).unwrap();
        for &x in &[0.3, 1.0, 2.7] {
            let v = psf.fourier(x);
            let expect = C64::from_polar(1.0, std::f64::consts::PI * x);
            assert_abs_diff_eq!((v - expect).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn symmetric_atom_pair_gives_real_cosine() {
        let psf = AngularPsf::new(&[(0.4, 0.5), (-0.4, 0.5)], &[]).unwrap();
        for &x in &[0.0, 0.9, 1.8, 3.3] {
            let v = psf.fourier(x);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.re, (std::f64::consts::PI * 0.4 * x).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let psf = AngularPsf::new(&[(0.25, 0.3)], &[(-0.5, 0.1, 2.0)]).unwrap();
        for &x in &[0.17, 1.3, 4.6] {
            let plus = psf.fourier(x);
            let minus = psf.fourier(-x);
            assert_abs_diff_eq!((minus - plus.conj()).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rect_transform_matches_endpoint_formula() {
        // Direct (cancellation-prone) closed form c(e^{j pi b x}-e^{j pi a x})/(j pi x)
        // at moderate x agrees with the sinc-based evaluation.
        let psf = AngularPsf::new(&[], &[(0.6, 0.8, 1.0), (0.8, 1.0, 4.0)]).unwrap();
        for &x in &[0.5, 1.7, 3.3] {
            let mut direct = C64::new(0.0, 0.0);
            for r in psf.rects() {
                let jpx = C64::new(0.0, std::f64::consts::PI * x);
                direct += r.density
                    * ((C64::from_polar(1.0, std::f64::consts::PI * r.b * x)
                        - C64::from_polar(1.0, std::f64::consts::PI * r.a * x))
                        / jpx);
            }
            assert_abs_diff_eq!((psf.fourier(x) - direct).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn atom_at_zero_gives_all_ones_samples() {
        let psf = AngularPsf::new(&[(0.0, 1.0)], &[]).unwrap();
        let lattice = SamplingSet::Line(vec![0.0, 0.9, 1.8, 2.7]);
        let s = psf.sample_on_lattice(&lattice).unwrap();
        for v in &s.values {
            assert_abs_diff_eq!((v - C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sampling_rejects_spatial_sets() {
        let psf = AngularPsf::standard_rect();
        let spatial = SamplingSet::Spatial(vec![[0.0, 0.0, 0.0]]);
        assert!(psf.sample_on_lattice(&spatial).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let json = r#"{"atoms":[{"xi":0.2,"mass":0.5}],"rects":[{"a":-0.3,"b":0.1,"density":1.25}]}"#;
        let spec: PsfSpec = serde_json::from_str(json).unwrap();
        let psf = spec.build().unwrap();
        assert_abs_diff_eq!(psf.total_mass(), 1.0, epsilon = 1e-12);
        assert!(serde_json::from_str::<PsfSpec>(r#"{"bogus":1}"#).is_err());
    }
}
