//! Even Chebyshev-type series and the error bounds driving the interpolation
//! analysis.
//!
//! The even solution of `(1-t²)y'' - t y' + (2s)² y = 0` with `y(0)=1`,
//! `y'(0)=0` is `y_e(t) = cos(2s·asin t)`. Its power-series coefficients obey
//!
//! ```text
//! a_0 = 1,   a_{2k+2} = a_{2k} · ((2k)² - (2s)²) / ((2k+1)(2k+2)),
//! ```
//!
//! so `a_{2M}(s) = ((2M)^{2M}/(2M)!)·∏_{n<M}((n/M)² - (s/M)²)` up to exact
//! cancellation at integer `s < M`. Everything quantitative here reduces to
//! this coefficient: the truncation error `E_M(t) = y_e(t) - Σ_{k<M} a_{2k}t^{2k}`
//! and its derivative are bounded by explicit multiples of `|a_{2M}|`, the
//! exponent `h(s) = (1/2M)·log|a_{2M}(s)|` approaches the entropy-type limit
//! `f(s/M)`, and the finite-`M` width bound combines a real-part and an
//! imaginary-part term built from the same quantities.
//!
//! Coefficients and series evaluation run in compensated (double-double)
//! arithmetic: the coefficients alternate in sign and reach ~1e11 before the
//! sum cancels back to O(1), which plain f64 evaluation cannot survive at the
//! accuracy required here. Bound formulas are evaluated in log space so large
//! `M` neither overflows nor underflows prematurely.

use crate::dd::Dd;
use crate::{Error, Result};

/// Coefficients `a_0, a_2, …, a_{2M}` of the even solution for parameter `s`.
///
/// The stored f64 coefficients are the correctly rounded values of an
/// extended-precision forward recursion (relative error far below 1e-9 up to
/// `M = 256`); reconstructing the recursion in plain f64 from the stored
/// values therefore agrees to a few ulps rather than bitwise.
#[derive(Clone, Debug)]
pub struct ChebyshevSeries {
    s: f64,
    order: usize,
    coeffs_dd: Vec<Dd>,
    coeffs: Vec<f64>,
}

impl ChebyshevSeries {
    /// Runs the forward recursion up to `a_{2M}` for `0 ≤ s ≤ M`.
    pub fn new(s: f64, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("series order M must be >= 1".into()));
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Domain(format!("parameter s must be finite and >= 0, got {s}")));
        }
        if s > order as f64 {
            return Err(Error::Domain(format!("parameter s={s} exceeds series order M={order}")));
        }
        let mut coeffs_dd = Vec::with_capacity(order + 1);
        coeffs_dd.push(Dd::ONE);
        // (2s)² carried as an exact double-double product; (2k)² and
        // (2k+1)(2k+2) are exactly representable for every supported order.
        let four_s_sq = Dd::from_prod(2.0 * s, 2.0 * s);
        for k in 0..order {
            let two_k = 2.0 * k as f64;
            let num = Dd::from_f64(two_k * two_k).sub(four_s_sq);
            let den = (two_k + 1.0) * (two_k + 2.0);
            let next = coeffs_dd[k].mul(num).div_f64(den);
            coeffs_dd.push(next);
        }
        let coeffs = coeffs_dd.iter().map(|c| c.to_f64()).collect();
        Ok(Self { s, order, coeffs_dd, coeffs })
    }

    pub fn parameter(&self) -> f64 {
        self.s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `a_0, a_2, …, a_{2M}` (even indices only; length `M + 1`).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// The first omitted coefficient `a_{2M}` of the truncated sum; drives
    /// every bound.
    pub fn tail_coefficient(&self) -> f64 {
        self.coeffs[self.order]
    }

    /// Truncated partial sum `y_{e,M}(t) = Σ_{k<M} a_{2k} t^{2k}`.
    ///
    /// The ODE is singular at `t = ±1`, so `|t| ≥ 1` is a domain error.
    pub fn eval_truncated(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.eval_terms(t, self.order))
    }

    /// Partial sum including the stored tail term: `Σ_{k≤M} a_{2k} t^{2k}`
    /// (i.e. `y_{e,M+1}`). For integer `s ≤ M` this reproduces
    /// `cos(2s·asin t)` exactly because the series terminates.
    pub fn eval_all_terms(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.eval_terms(t, self.order + 1))
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t.abs() < 1.0) {
            return Err(Error::Domain(format!("evaluation point t must satisfy |t| < 1, got {t}")));
        }
        Ok(())
    }

    fn eval_terms(&self, t: f64, n_terms: usize) -> f64 {
        let t2 = Dd::from_prod(t, t);
        let mut acc = Dd::ZERO;
        for k in (0..n_terms).rev() {
            acc = acc.mul(t2).add(self.coeffs_dd[k]);
        }
        acc.to_f64()
    }
}

/// Snaps values that differ from an integer only by division round-off
/// (e.g. `(kϱ)/ϱ`), so lattice probes hit the exact coefficient zeros.
fn snap_to_integer(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() <= 1e-12 * u.abs().max(1.0) {
        r
    } else {
        u
    }
}

/// `log|a_{2M}(s)|` via the factored product
/// `∏_{n<M} 4|n-s|(n+s) / ((2n+1)(2n+2))`, or `None` when the coefficient is
/// exactly zero (integer `s < M`).
fn log_abs_tail_coefficient(s: f64, order: usize) -> Option<f64> {
    if s.fract() == 0.0 && (s as usize) < order {
        return None;
    }
    let mut acc = 0.0f64;
    for n in 0..order {
        let nf = n as f64;
        // (2n)² - (2s)² = 4(n-s)(n+s), factored to avoid cancellation near n ≈ s.
        let num = 4.0 * (nf - s).abs() * (nf + s);
        let den = (2.0 * nf + 1.0) * (2.0 * nf + 2.0);
        acc += num.ln() - den.ln();
    }
    Some(acc)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

fn check_s_order(s: f64, order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::Domain("order M must be >= 1".into()));
    }
    if !(s.is_finite() && s >= 0.0 && s <= order as f64) {
        return Err(Error::Domain(format!("s must lie in [0, M={order}], got {s}")));
    }
    Ok(())
}

/// Upper bound `|a_{2M}(s)|·η^{2M}/(1-η²)` on `sup_{|t|≤η} |E_M(t)|`, the
/// error of the `M`-term partial sum against `cos(2s·asin t)`.
pub fn truncation_bound(s: f64, order: usize, eta: f64) -> Result<f64> {
    check_s_order(s, order)?;
    check_eta(eta)?;
    let Some(log_a) = log_abs_tail_coefficient(s, order) else {
        return Ok(0.0);
    };
    let m = order as f64;
    let log_val = log_a + 2.0 * m * eta.ln() - (1.0 - eta * eta).ln();
    Ok(log_val.exp())
}

/// Slope estimate `2|a_{2M}(s)|·η^{2M-1}(M-(M-2)η)/(1-η²)²` for
/// `sup_{|t|≤η} |E_M'(t)|`.
///
/// A certified upper bound for `η ≥ (M-2)/(M-1)`. For smaller `η` the factor
/// `M-(M-2)η` can undercut the geometric tail sum, whose always-valid value
/// has `M-(M-1)η²` in its place; the true slope then exceeds this estimate by
/// a few percent (e.g. by 3.4% at `s≈1.76, M=5, η=0.1`).
pub fn derivative_bound(s: f64, order: usize, eta: f64) -> Result<f64> {
    check_s_order(s, order)?;
    check_eta(eta)?;
    let Some(log_a) = log_abs_tail_coefficient(s, order) else {
        return Ok(0.0);
    };
    let m = order as f64;
    // M - (M-2)η > 0 for every η in (0,1).
    let slope = m - (m - 2.0) * eta;
    let log_val = std::f64::consts::LN_2
        + log_a
        + (2.0 * m - 1.0) * eta.ln()
        + slope.ln()
        - 2.0 * (1.0 - eta * eta).ln();
    Ok(log_val.exp())
}

/// Entropy-type exponent `f(α) = ½[(1+α)ln(1+α) + (1-α)ln(1-α)]`,
/// increasing and convex from `f(0) = 0` to `f(1) = ln 2`.
pub fn f_alpha(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let plus = (1.0 + alpha) * alpha.ln_1p();
    // (1-α)·ln(1-α) → 0 as α → 1; the explicit branch avoids 0·(-inf).
    let minus = if alpha == 1.0 { 0.0 } else { (1.0 - alpha) * (-alpha).ln_1p() };
    Ok(0.5 * (plus + minus))
}

/// `g(α) = e^{f(α)}`, a strictly increasing bijection `[0,1] → [1,2]`.
pub fn g_alpha(alpha: f64) -> Result<f64> {
    Ok(f_alpha(alpha)?.exp())
}

/// Inverse of `g` by bisection (`|Δα| ≤ 1e-12`). Inputs outside `[1, 2]`
/// clamp to the boundary: `y ≥ 2 → 1` (the whole window is feasible, which is
/// exactly the `ϱ ≤ 1/3` regime where `1/sin(πϱ/2) ≥ 2`), `y ≤ 1 → 0`.
pub fn g_inverse(y: f64) -> f64 {
    if y.is_nan() {
        return 0.0;
    }
    if y >= 2.0 {
        return 1.0;
    }
    if y <= 1.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let gm = g_alpha(mid).expect("midpoint stays in [0,1]");
        if gm < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Finite-`M` exponent `h(s) = (1/2M)·log|a_{2M}(s)|`, computed from the
/// factored product. Integer `s` is excluded (`a_{2M}` vanishes, the log
/// diverges).
pub fn finite_m_exponent(s: f64, order: usize) -> Result<f64> {
    check_s_order(s, order)?;
    if s.fract() == 0.0 {
        return Err(Error::Domain(format!(
            "h(s) is undefined at integer s (a_2M(s) = 0), got s={s}"
        )));
    }
    let log_a = log_abs_tail_coefficient(s, order)
        .expect("non-integer s has a nonzero tail coefficient");
    Ok(log_a / (2.0 * order as f64))
}

/// The summand side of the exponent sandwich:
/// `f_sum(s) = 1 + (1/2M)·Σ_{n<M} log|(n/M)² - (s/M)²|`.
///
/// Exact algebra gives `h(s) = f_sum(s) - [½·log(4πM) + λ_M]/(2M)` with the
/// Stirling remainder `λ_M ∈ (1/(24M+1), 1/(24M))`, so `h` and `f_sum` differ
/// by `log(4πM)/(4M) + O(1/M²)`.
pub fn finite_m_exponent_sum(s: f64, order: usize) -> Result<f64> {
    check_s_order(s, order)?;
    if s.fract() == 0.0 && (s as usize) < order {
        return Err(Error::Domain(format!("f_sum diverges at integer s < M, got s={s}")));
    }
    let m = order as f64;
    let mut acc = 0.0f64;
    for n in 0..order {
        let nf = n as f64;
        // |(n/M)² - (s/M)²| = |n-s|·(n+s)/M², factored against cancellation.
        let v = (nf - s).abs() * (nf + s) / (m * m);
        acc += v.ln();
    }
    Ok(1.0 + acc / (2.0 * m))
}

fn check_probe(s: f64, order: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let limit = order as f64 * rho;
    if !(s.is_finite() && s >= 0.0 && s <= limit) {
        return Err(Error::Domain(format!(
            "probe s must lie in [0, M*rho] = [0, {limit}], got {s}"
        )));
    }
    Ok(limit)
}

/// Real-part minimax bound `|a_{2M}(s/ϱ)|·η^{2M}/(1-η²)` with `η = sin(πϱ/2)`.
/// Vanishes on the sampling lattice `s = kϱ`, `k < M`.
pub fn minimax_real_bound(s: f64, order: usize, rho: f64) -> Result<f64> {
    check_probe(s, order, rho)?;
    let eta = (std::f64::consts::FRAC_PI_2 * rho).sin();
    let u = snap_to_integer(s / rho);
    let Some(log_a) = log_abs_tail_coefficient(u, order) else {
        return Ok(0.0);
    };
    let m = order as f64;
    let log_val = log_a + 2.0 * m * eta.ln() - (1.0 - eta * eta).ln();
    Ok(log_val.exp())
}

/// Imaginary-part minimax bound
/// `|a_{2M}(s/ϱ)|·η^{2M-1}(M-(M-2)η)/(s(1-η²)²)`; returns 0 at `s = 0` by
/// convention (the odd part vanishes identically there).
pub fn minimax_imag_bound(s: f64, order: usize, rho: f64) -> Result<f64> {
    check_probe(s, order, rho)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let eta = (std::f64::consts::FRAC_PI_2 * rho).sin();
    let u = snap_to_integer(s / rho);
    let Some(log_a) = log_abs_tail_coefficient(u, order) else {
        return Ok(0.0);
    };
    let m = order as f64;
    let slope = m - (m - 2.0) * eta;
    let log_val = log_a + (2.0 * m - 1.0) * eta.ln() + slope.ln()
        - s.ln()
        - 2.0 * (1.0 - eta * eta).ln();
    Ok(log_val.exp())
}

/// Width bound at probe `s`: twice the sum of the real- and imaginary-part
/// minimax bounds, capped at the trivial width 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WidthBound {
    pub probe: f64,
    /// `min(2(e_r + e_i), 2)`.
    pub bound: f64,
    pub real_part: f64,
    pub imag_part: f64,
}

/// Assembles the finite-`M` width bound `min(2(e_r(s) + e_i(s)), 2)`.
pub fn width_bound(s: f64, order: usize, rho: f64) -> Result<WidthBound> {
    let real_part = minimax_real_bound(s, order, rho)?;
    let imag_part = minimax_imag_bound(s, order, rho)?;
    let bound = (2.0 * (real_part + imag_part)).min(2.0);
    Ok(WidthBound { probe: s, bound, real_part, imag_part })
}

/// Asymptotic width rate `(sin(πϱ/2)·g(s/(Mϱ)))^{2M}` (unit constant),
/// exposed for plotting next to the exact finite-`M` bound.
pub fn asymptotic_width_rate(s: f64, order: usize, rho: f64) -> Result<f64> {
    let limit = check_probe(s, order, rho)?;
    let eta = (std::f64::consts::FRAC_PI_2 * rho).sin();
    let g = g_alpha(s / limit)?;
    Ok(((eta * g).ln() * 2.0 * order as f64).exp())
}
