//! Double-double ("compensated") arithmetic for the cancellation-prone
//! inner loops.
//!
//! The Toeplitz normalisations `h_n` of the elliptic families decay
//! geometrically — around `1e-12` by degree 15 at typical parameters —
//! while the Levinson numerators that must resolve them are sums of
//! `O(1)` terms.  Plain `f64` therefore loses the reflection
//! coefficients entirely beyond degree ~14.  Carrying the recursion in
//! an unevaluated sum of two doubles (~31 significant digits) keeps the
//! relative error of `a_n` below `1e-12` through every degree the crate
//! promises.
//!
//! Only the handful of operations the crate needs are implemented; all
//! classic error-free transformations (Dekker/Knuth, with an FMA-based
//! product split).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// `pi` to ~32 digits as an unevaluated sum.
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473531772e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Square root by one Newton step on the `f64` estimate; the step
    /// squares the error, landing at full double-double accuracy.
    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative double-double");
        let est = Dd::from_f64(self.hi.sqrt());
        (est + self / est) * Dd::from_f64(0.5)
    }

    /// Sine and cosine by argument reduction modulo `2 pi` (using the
    /// double-double `pi`) followed by a plain Taylor sum.  After
    /// reduction `|r| <= pi`, where the series needs ~27 terms to drop
    /// below the working precision; this is seed-grade code (used once
    /// per construction, not in inner loops), so simplicity beats
    /// minimax polynomials.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let two_pi = Dd::PI * Dd::from_f64(2.0);
        let n = (self.hi / (2.0 * std::f64::consts::PI)).round();
        let r = self - two_pi * Dd::from_f64(n);
        let r2 = r * r;
        // sin: r * sum (-r^2)^m / (2m+1)!,  cos: sum (-r^2)^m / (2m)!
        let mut sin_acc = Dd::ONE;
        let mut cos_acc = Dd::ONE;
        let mut term_s = Dd::ONE;
        let mut term_c = Dd::ONE;
        for m in 1..=28 {
            let mf = 2.0 * m as f64;
            term_c = term_c * r2 / Dd::from_f64(mf * (mf - 1.0));
            term_s = term_s * r2 / Dd::from_f64(mf * (mf + 1.0));
            if m % 2 == 1 {
                cos_acc = cos_acc - term_c;
                sin_acc = sin_acc - term_s;
            } else {
                cos_acc = cos_acc + term_c;
                sin_acc = sin_acc + term_s;
            }
        }
        (r * sin_acc, cos_acc)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = (r.hi + r.lo) / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: f64) -> Dd {
        self * Dd::from_f64(rhs)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: f64) -> Dd {
        self + Dd::from_f64(rhs)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: f64) -> Dd {
        self / Dd::from_f64(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catastrophic_cancellation_is_resolved() {
        let big = Dd::from_f64(1e16);
        let one = Dd::ONE;
        let sum = big + one;
        assert_eq!((sum - big).to_f64(), 1.0);
    }

    #[test]
    fn product_carries_low_part() {
        // (1 + 2^-40)^2 = 1 + 2^-39 + 2^-80; f64 drops the last term.
        let x = Dd::from_f64(1.0 + (0.5f64).powi(40));
        let sq = x * x;
        let expected_lo = (0.5f64).powi(80);
        assert!((sq.lo - expected_lo).abs() < 1e-40 || sq.hi != 1.0 + (0.5f64).powi(39));
        // Divide straight back.
        let back = sq / x;
        assert!((back - x).abs().to_f64() < 1e-32);
    }

    #[test]
    fn sqrt_and_trig_reach_working_precision() {
        let two = Dd::from_f64(2.0);
        let r = two.sqrt();
        assert!((r * r - two).abs().to_f64() < 1e-31);
        // sin(pi/6) = 1/2 exactly; cos(pi/3) = 1/2.
        let sixth = Dd::PI / Dd::from_f64(6.0);
        assert!((sixth.sin_cos().0 - Dd::from_f64(0.5)).abs().to_f64() < 1e-31);
        let third = Dd::PI / Dd::from_f64(3.0);
        assert!((third.sin_cos().1 - Dd::from_f64(0.5)).abs().to_f64() < 1e-31);
        // Pythagorean identity after reduction of a larger argument.
        let x = Dd::from_f64(17.3);
        let (s, c) = x.sin_cos();
        assert!((s * s + c * c - Dd::ONE).abs().to_f64() < 1e-30);
        // sin at double-double pi is ~0 (tests the reduction constant).
        assert!(Dd::PI.sin_cos().0.abs().to_f64() < 1e-30);
    }

    #[test]
    fn long_alternating_sum() {
        // sum (-1)^s / (s+1) over 10^4 terms, vs the same in reverse:
        // both orders agree to ~1e-30 in double-double.
        let forward = (0..10_000).fold(Dd::ZERO, |acc, s| {
            let term = 1.0 / (s as f64 + 1.0);
            acc + Dd::from_f64(if s % 2 == 0 { term } else { -term })
        });
        let backward = (0..10_000).rev().fold(Dd::ZERO, |acc, s| {
            let term = 1.0 / (s as f64 + 1.0);
            acc + Dd::from_f64(if s % 2 == 0 { term } else { -term })
        });
        assert!((forward - backward).abs().to_f64() < 1e-28);
    }
}
