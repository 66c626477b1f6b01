//! Independent oracles shared by the integration suites.
//!
//! Everything here recomputes quantities from first principles with methods
//! deliberately different from the library's own (numerical quadrature
//! instead of closed forms, cyclic Jacobi rotations instead of the nalgebra
//! eigensolver), so agreement is evidence rather than tautology.

#![allow(dead_code)]

use covinterp_core::psf::AngularPsf;
use covinterp_core::C64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `∫ γ(dξ) e^{jπξx}` by exact atom sums plus adaptive Simpson quadrature
/// over each rectangular piece. No closed-form rect transform is used.
pub fn quadrature_fourier(psf: &AngularPsf, x: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for atom in psf.atoms() {
        acc += atom.mass * C64::from_polar(1.0, std::f64::consts::PI * atom.xi * x);
    }
    for rect in psf.rects() {
        // Pre-split into panels shorter than a quarter oscillation so the
        // adaptive refinement never accepts an aliased coarse sample.
        let width = rect.b - rect.a;
        let panels = ((4.0 * x.abs() * width).ceil() as usize).max(8);
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for i in 0..panels {
            let lo = rect.a + width * i as f64 / panels as f64;
            let hi = rect.a + width * (i + 1) as f64 / panels as f64;
            re += adaptive_simpson(
                &|xi: f64| rect.density * (std::f64::consts::PI * xi * x).cos(),
                lo,
                hi,
                1e-13,
            );
            im += adaptive_simpson(
                &|xi: f64| rect.density * (std::f64::consts::PI * xi * x).sin(),
                lo,
                hi,
                1e-13,
            );
        }
        acc += C64::new(re, im);
    }
    acc
}

/// Adaptive Simpson integration with the usual 15·tol Richardson acceptance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in descending order with matching
/// eigenvector columns; panics if its own residual check fails, so a broken
/// oracle cannot silently pass a test.
pub fn jacobi_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let scale = a.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
    for r in 0..n {
        for c in 0..n {
            let dev = (a[(r, c)] - a[(c, r)].conj()).norm();
            assert!(dev <= 1e-12 * scale, "jacobi_eigen input is not Hermitian: {dev:.3e}");
        }
    }

    let mut h = a.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(h[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = h[(p, q)];
                let abs = hpq.norm();
                if abs <= 1e-18 * scale {
                    continue;
                }
                let phase = hpq / abs;
                let tau = (h[(q, q)].re - h[(p, p)].re) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pq = s * phase;
                // H ← UᴴHU and V ← VU with the plane rotation
                // U[p,p]=c, U[p,q]=s·phase, U[q,p]=-s·conj(phase), U[q,q]=c.
                for r in 0..n {
                    let hrp = h[(r, p)];
                    let hrq = h[(r, q)];
                    h[(r, p)] = hrp * c - hrq * u_pq.conj();
                    h[(r, q)] = hrp * u_pq + hrq * c;
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c - vrq * u_pq.conj();
                    v[(r, q)] = vrp * u_pq + vrq * c;
                }
                for col in 0..n {
                    let hpc = h[(p, col)];
                    let hqc = h[(q, col)];
                    h[(p, col)] = hpc * c - hqc * u_pq;
                    h[(q, col)] = hpc * u_pq.conj() + hqc * c;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (h[(i, i)].re, i)).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = pairs.iter().map(|&(lam, _)| lam).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }

    for i in 0..n {
        let residual = (a * vectors.column(i) - vectors.column(i) * C64::new(eigenvalues[i], 0.0))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(
            residual <= 1e-9 * scale.max(1.0),
            "jacobi_eigen self-check failed: residual {residual:.3e} for eigenvalue {i}"
        );
    }
    (eigenvalues, vectors)
}

/// Haar-ish random unitary from modified Gram-Schmidt on a complex Gaussian
/// matrix; orthonormality is verified before returning.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C64> {
    loop {
        let mut q = DMatrix::<C64>::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        let mut degenerate = false;
        for j in 0..n {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let corrected = q.column(j) - q.column(k) * proj;
                q.set_column(j, &corrected);
            }
            let norm = q.column(j).norm();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            let scaled = q.column(j) / C64::new(norm, 0.0);
            q.set_column(j, &scaled);
        }
        if degenerate {
            continue;
        }
        let gram = q.adjoint() * &q;
        let mut dev = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                dev = dev.max((gram[(r, c)] - expect).norm());
            }
        }
        if dev <= 1e-10 {
            return q;
        }
    }
}

/// Random mixture of a few atoms and rects; always a valid normalized PSF.
pub fn random_psf<R: Rng>(rng: &mut R) -> AngularPsf {
    let n_atoms = rng.gen_range(0..3usize);
    let n_rects = rng.gen_range(1..3usize);
    let atoms: Vec<(f64, f64)> = (0..n_atoms)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0)))
        .collect();
    let rects: Vec<(f64, f64, f64)> = (0..n_rects)
        .map(|_| {
            let a = rng.gen_range(-1.0..0.9);
            let b = rng.gen_range((a + 0.05)..1.0);
            (a, b, rng.gen_range(0.2..2.0))
        })
        .collect();
    AngularPsf::new(&atoms, &rects).expect("random PSF parameters are valid by construction")
}

/// Max-norm relative error between two complex vectors, scaled by the largest
/// reference magnitude.
pub fn max_rel_err(actual: &[C64], reference: &[C64]) -> f64 {
    assert_eq!(actual.len(), reference.len());
    let scale = reference.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
    actual
        .iter()
        .zip(reference)
        .map(|(a, r)| (a - r).norm())
        .fold(0.0f64, f64::max)
        / scale
}
