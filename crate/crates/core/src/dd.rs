//! Minimal double-double (compensated) arithmetic.
//!
//! The even-series coefficients `a_{2k}(s)` alternate in sign and grow to
//! ~1e11 before the partial sums cancel back to O(1). Plain f64 Horner
//! evaluation then carries an absolute error around `n·eps·Σ|a_{2k}||t|^{2k}`,
//! far above the 1e-10 accuracy the series evaluation has to meet. Carrying
//! an unevaluated (hi, lo) pair through the recursion and the Horner loop
//! keeps roughly 31 significant digits, which is more than enough.
//!
//! Only the handful of operations the series code needs are implemented.
//! Algorithms are the classical error-free transformations (Knuth two-sum,
//! FMA two-product) composed as in Dekker/Bailey double-double arithmetic.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2` when normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns `(s, e)` with `s = fl(a+b)` and `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via FMA: `a*b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two f64 values, kept unevaluated.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    /// Division by a plain f64 (used with exactly representable integers).
    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p1, p2) = two_prod(q1, d);
        // Remainder of the first quotient digit, computed exactly.
        let (s, e) = two_sum(self.hi, -p1);
        let e = e + self.lo - p2;
        let q2 = (s + e) / d;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}
