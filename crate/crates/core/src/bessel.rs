//! Bessel function of the first kind, order zero.
//!
//! For `|x| ≤ 25` the alternating power series
//! `Σ (-1)^k (x/2)^{2k} / (k!)²` is summed in double-double arithmetic; the
//! largest term there is about 1e9, so plain `f64` summation would lose the
//! absolute accuracy we need. Beyond that, Hankel's asymptotic expansion
//! truncated at its smallest term is accurate to well below 1e-16.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SERIES_LIMIT: f64 = 25.0;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let t = Self::two_sum(self.lo, other.lo);
        let s = Self::quick_two_sum(s.hi, s.lo + t.hi);
        Self::quick_two_sum(s.hi, s.lo + t.lo)
    }

    fn mul(self, other: Self) -> Self {
        let p = Self::two_prod(self.hi, other.hi);
        let lo = p.lo + (self.hi * other.lo + self.lo * other.hi);
        Self::quick_two_sum(p.hi, lo)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let p = Self::two_prod(q1, b);
        let r = ((self.hi - p.hi) - p.lo + self.lo) / b;
        Self::quick_two_sum(q1, r)
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn j0_series(x: f64) -> f64 {
    // q = x²/4, exact in double-double.
    let q = DoubleDouble::two_prod(x, x).div_f64(4.0);
    let mut term = DoubleDouble::from_f64(1.0);
    let mut sum = term;
    let mut k = 1.0_f64;
    loop {
        term = term.mul(q).div_f64(k * k).neg();
        sum = sum.add(term);
        if k > q.hi && term.hi.abs() < 1e-34 {
            break;
        }
        k += 1.0;
    }
    sum.to_f64()
}

fn j0_asymptotic(x: f64) -> f64 {
    // J0(x) ~ sqrt(2/(πx)) [P cos χ - Q sin χ], χ = x - π/4, with
    // P = Σ (-1)^k b_{2k} x^{-2k}, Q = -Σ (-1)^k b_{2k+1} x^{-2k-1},
    // b_m = Π_{j≤m} (2j-1)² / (m! 8^m).
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut m = 1_u32;
    loop {
        let odd = f64::from(2 * m - 1);
        let next = term * odd * odd / (8.0 * f64::from(m) * x);
        if next >= term || next < 1e-18 {
            break;
        }
        term = next;
        let sign = if (m / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if m.is_multiple_of(2) {
            p += sign * term;
        } else {
            q -= sign * term;
        }
        m += 1;
    }
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// `J₀(x)`, even in `x`, absolute error below 1e-12 for `|x| ≤ 50`.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        j0_series(ax)
    } else {
        j0_asymptotic(ax)
    }
}
