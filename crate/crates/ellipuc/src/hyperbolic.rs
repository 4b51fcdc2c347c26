//! The `k -> 1` limit of the two families, where both collapse to a
//! single hyperbolic family:
//!
//! ```text
//! a_n = (-1)^n / cosh(w(n+1)),        c_n = 1 / cosh(wn),
//! ```
//!
//! with explicit basic-hypergeometric coefficients in the base
//! `q = e^{-2w}`, and — in contrast to the dense elliptic case — an
//! absolutely continuous orthogonality measure: a weight on the circle
//! expressed through `dn` at the modulus solving `w = pi K'/K`.
//!
//! Two unrelated `q`'s coexist here and are deliberately never aliased:
//! the hypergeometric base `e^{-2w}` (local to [`hyp_poly`] and the
//! [`QPochhammerCache`] it drives) and the elliptic nome `e^{-w}` living
//! inside the weight's [`EllipticContext`].
//!
//! The `k -> 0` endpoint is also here for completeness: the measures
//! collapse to one or two point masses ([`k0_degenerate_measure`]).

use crate::circle::{Family, MomentSequence, MonicCirclePolynomial};
use crate::elliptic::{jacobi_dn, solve_k_from_w, EllipticContext};
use crate::error::Result;
use crate::measures::DiscretePointMeasure;
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

/// Memoised q-shifted factorials `(x;q)_n = prod_{j<n} (1 - x q^j)` at a
/// fixed base, extended on demand by the defining recurrence
/// `(x;q)_{n+1} = (x;q)_n (1 - x q^n)` (so `(x;q)_0 = 1` always).
#[derive(Debug, Clone)]
pub struct QPochhammerCache {
    q: f64,
    table: HashMap<u64, Vec<f64>>,
}

impl QPochhammerCache {
    pub fn new(q: f64) -> Self {
        assert!(q > 0.0 && q < 1.0, "base must be in (0,1), got {q}");
        QPochhammerCache {
            q,
            table: HashMap::new(),
        }
    }

    pub fn base(&self) -> f64 {
        self.q
    }

    /// `(x;q)_n`, computing and caching any missing prefix.
    pub fn value(&mut self, x: f64, n: usize) -> f64 {
        let q = self.q;
        let entry = self.table.entry(x.to_bits()).or_insert_with(|| vec![1.0]);
        while entry.len() <= n {
            let m = entry.len() - 1;
            let next = entry[m] * (1.0 - x * q.powi(m as i32));
            entry.push(next);
        }
        entry[n]
    }
}

/// Reflection coefficients `a_0, ..., a_{count-1}` of the hyperbolic
/// family: alternating in sign, shrinking in magnitude, always strictly
/// inside `(-1, 1)` — this family never terminates.
pub fn hyp_reflections(count: usize, w: f64) -> Vec<f64> {
    assert!(w > 0.0, "step must be positive, got {w}");
    (0..count)
        .map(|n| {
            let v = 1.0 / (w * (n + 1) as f64).cosh();
            if n % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Moments `c_n = 1/cosh(wn)` for `n = 0..=n_max`.
///
/// Plain `f64` values suffice here: the normalisations `h_n` of this
/// family are bounded below (the `a_n` are summable-squared), so the
/// moment problem stays well conditioned at every degree — unlike the
/// elliptic families, no extended-precision synthesis is needed.
pub fn hyp_moments(n_max: usize, w: f64) -> MomentSequence {
    assert!(w > 0.0, "step must be positive, got {w}");
    let vals: Vec<f64> = (0..=n_max)
        .map(|n| 1.0 / (w * n as f64).cosh())
        .collect();
    MomentSequence::from_f64(&vals)
}

/// Degree-`n` hyperbolic polynomial from its explicit coefficients
///
/// ```text
/// W_{ns} = 2 (-1)^n q^{(s-n)/2} / (1 + q^{-n})
///          * (q^{-n};q)_s (-q;q)_s / ((q;q)_s (-q^{1-n};q)_s),
/// ```
///
/// `q = e^{-2w}`.  Exact algebra makes `W_{nn} = 1`; the computed
/// leading value carries a few ulps of product rounding, so the vector
/// is normalised by it to keep the polynomial exactly monic.
pub fn hyp_poly(n: usize, w: f64) -> MonicCirclePolynomial {
    assert!(w > 0.0, "step must be positive, got {w}");
    let q = (-2.0 * w).exp();
    let mut cache = QPochhammerCache::new(q);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let scale = 2.0 * sign / (1.0 + q.powi(-(n as i32)));
    let x_top = q.powi(-(n as i32));
    let x_bot = -q.powi(1 - n as i32);
    let raw: Vec<f64> = (0..=n)
        .map(|s| {
            let top = cache.value(x_top, s) * cache.value(-q, s);
            let bot = cache.value(q, s) * cache.value(x_bot, s);
            scale * q.powf((s as f64 - n as f64) / 2.0) * top / bot
        })
        .collect();
    let lead = raw[n];
    MonicCirclePolynomial {
        coeffs: raw.iter().map(|c| c / lead).collect(),
    }
}

/// The absolutely continuous orthogonality weight of the hyperbolic
/// family, `rho(theta) = (K/pi^2) dn(K theta / pi; k)` with the modulus
/// `k` solving `w = pi K'/K`.
#[derive(Debug, Clone)]
pub struct HyperbolicWeight {
    /// Elliptic data at the solved modulus (its nome is `e^{-w}`).
    pub ctx: EllipticContext,
    pub w: f64,
}

impl HyperbolicWeight {
    pub fn new(w: f64) -> Result<Self> {
        Ok(HyperbolicWeight {
            ctx: solve_k_from_w(w)?,
            w,
        })
    }

    /// `rho(theta)`; positive everywhere, `2pi`-periodic, symmetric
    /// under `theta -> 2pi - theta` (dn is even with period `2K`).
    pub fn density(&self, theta: f64) -> f64 {
        let k_big = self.ctx.big_k;
        k_big / (PI * PI) * jacobi_dn(k_big * theta / PI, &self.ctx)
    }

    /// The weight of the sign-reflected family,
    /// `rho~(theta) = rho(theta + pi) = (k' K / pi^2) / dn(K theta / pi)`.
    pub fn reflected_density(&self, theta: f64) -> f64 {
        self.density(theta + PI)
    }

    /// `int_0^{2pi} rho(theta) cos(n theta) d theta` by the uniform
    /// trapezoid rule (spectrally accurate for this periodic analytic
    /// integrand); reproduces the moment `1/cosh(wn)`.
    pub fn quadrature_moment(&self, n: usize, nodes: usize) -> f64 {
        assert!(nodes >= 2);
        let h = TAU / nodes as f64;
        (0..nodes)
            .map(|i| {
                let theta = i as f64 * h;
                self.density(theta) * (n as f64 * theta).cos()
            })
            .sum::<f64>()
            * h
    }
}

/// Convenience evaluation of the weight at a single angle; for repeated
/// evaluation construct a [`HyperbolicWeight`] once.
pub fn hyp_weight(theta: f64, w: f64) -> Result<f64> {
    Ok(HyperbolicWeight::new(w)?.density(theta))
}

/// The `k -> 0` endpoint, where the measures degenerate to finitely
/// many atoms: the cn family to equal masses `1/2` at `e^{+-iw}` (its
/// moments become `cos(wn)`), the dn family to a single unit mass at
/// `z = 1` (all moments 1).
pub fn k0_degenerate_measure(family: Family, w: f64) -> DiscretePointMeasure {
    assert!(w > 0.0, "step must be positive, got {w}");
    match family {
        Family::Cn => DiscretePointMeasure {
            indices: vec![0, 1],
            angles: vec![(-w).rem_euclid(TAU), w.rem_euclid(TAU)],
            weights: vec![0.5, 0.5],
            trunc: 1,
            tail_bound: 0.0,
        },
        Family::Dn => DiscretePointMeasure {
            indices: vec![0],
            angles: vec![0.0],
            weights: vec![1.0],
            trunc: 0,
            tail_bound: 0.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{explicit_cn_poly, levinson_reflections, szego_all};
    use crate::ebc::EbcParams;
    use crate::measures::moment_from_measure;
    use approx::assert_abs_diff_eq;

    const W: f64 = 0.4;

    #[test]
    fn pochhammer_cache_matches_direct_product() {
        let q = 0.37;
        let mut cache = QPochhammerCache::new(q);
        assert_eq!(cache.value(0.8, 0), 1.0);
        for n in 1..=8 {
            let direct: f64 = (0..n).map(|j| 1.0 - 0.8 * q.powi(j as i32)).product();
            assert_abs_diff_eq!(cache.value(0.8, n), direct, epsilon = 1e-15);
        }
        // Asking for a smaller n after a larger one reads the cache.
        let high = cache.value(-q, 6);
        assert_eq!(cache.value(-q, 6), high);
        assert_eq!(cache.value(-q, 1), 1.0 + q);
    }

    #[test]
    fn reflections_alternate_and_shrink() {
        let a = hyp_reflections(12, W);
        let c = hyp_moments(12, W);
        assert_eq!(c.get(0), 1.0);
        for n in 0..12 {
            assert!(a[n].abs() < 1.0);
            assert_eq!(a[n] > 0.0, n % 2 == 0, "sign alternation at {n}");
            if n > 0 {
                assert!(a[n].abs() < a[n - 1].abs());
            }
            assert!(c.get(n) > 0.0 && c.get(n) <= 1.0);
        }
    }

    #[test]
    fn levinson_recovers_hyperbolic_reflections() {
        let c = hyp_moments(21, W);
        let (a, h) = levinson_reflections(&c, 20).unwrap();
        let direct = hyp_reflections(20, W);
        for n in 0..20 {
            assert!((a[n] - direct[n]).abs() <= 1e-10, "a_{n}");
            assert!(h[n] > 0.0);
        }
        // Normalisations stay bounded away from zero (well-conditioned
        // family, unlike the elliptic ones).
        assert!(h[20] > 0.01);
    }

    #[test]
    fn explicit_coefficients_match_recursion() {
        let a = hyp_reflections(16, W);
        let phis = szego_all(&a, 16);
        for n in 0..=16 {
            let explicit = hyp_poly(n, W);
            assert_eq!(explicit.degree(), n);
            assert_eq!(explicit.coeffs[n], 1.0);
            for s in 0..=n {
                assert!(
                    (explicit.coeffs[s] - phis[n].coeffs[s]).abs() <= 1e-11,
                    "n = {n}, s = {s}"
                );
            }
        }
        // Degree 1 in closed form: z - 1/cosh(w).
        let p1 = hyp_poly(1, W);
        assert_abs_diff_eq!(p1.coeffs[0], -1.0 / W.cosh(), epsilon = 1e-15);
    }

    #[test]
    fn degree_four_reference_coefficients() {
        let phi = hyp_poly(4, W);
        let expect = [
            0.3879781898744895751905661,
            -1.339718835948215483648032,
            2.277041085795080574354716,
            -2.243854742891765484658545,
            1.0,
        ];
        for (got, want) in phi.coeffs.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn near_one_modulus_families_approach_hyperbolic() {
        // The cn family at k = 1 - 10^-m converges to the hyperbolic
        // one; the error scales like k'^2 ~ 10^-m.
        let hyp = hyp_reflections(10, W);
        let hyp_phi = hyp_poly(10, W);
        let mut errs = Vec::new();
        for m in [3, 4, 5] {
            let ctx = EllipticContext::new(1.0 - 10f64.powi(-m)).unwrap();
            let a = crate::circle::reflection_cn(&ctx, W, 10).unwrap();
            let err = a
                .iter()
                .zip(&hyp)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[1] > 0.0 && errs[2] > 0.0);
        assert!(errs[0] / errs[1] > 3.0 && errs[0] / errs[1] < 30.0);
        assert!(errs[1] / errs[2] > 3.0 && errs[1] / errs[2] < 30.0);
        // Spec-level gates at k = 0.999999.
        let ctx = EllipticContext::new(0.999999).unwrap();
        let a = crate::circle::reflection_cn(&ctx, W, 10).unwrap();
        for (n, (x, y)) in a.iter().zip(&hyp).enumerate() {
            assert!((x - y).abs() <= 1e-4, "a_{n}");
        }
        let params = EbcParams::new(&ctx, W, 10).unwrap();
        let phi = explicit_cn_poly(&params, 10);
        for s in 0..=10 {
            assert!((phi.coeffs[s] - hyp_phi.coeffs[s]).abs() <= 1e-3);
        }
    }

    #[test]
    fn weight_is_positive_symmetric_and_normalised() {
        let weight = HyperbolicWeight::new(0.8).unwrap();
        for i in 0..40 {
            let theta = TAU * i as f64 / 40.0;
            let rho = weight.density(theta);
            assert!(rho > 0.0);
            assert!((weight.density(TAU - theta) - rho).abs() <= 1e-12 * rho);
        }
        assert!((weight.quadrature_moment(0, 4096) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn quadrature_reproduces_cosh_moments() {
        let weight = HyperbolicWeight::new(W).unwrap();
        for n in 0..=12 {
            let got = weight.quadrature_moment(n, 4096);
            let want = 1.0 / (W * n as f64).cosh();
            assert!((got - want).abs() <= 1e-8, "moment {n}: {got} vs {want}");
        }
    }

    #[test]
    fn reflected_weight_closed_form() {
        let weight = HyperbolicWeight::new(0.8).unwrap();
        let ctx = &weight.ctx;
        for i in 0..25 {
            let theta = TAU * i as f64 / 25.0;
            let lhs = weight.reflected_density(theta);
            let rhs =
                ctx.k_prime * ctx.big_k / (PI * PI) / jacobi_dn(ctx.big_k * theta / PI, ctx);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }

    #[test]
    fn zero_modulus_measures_are_finite() {
        let cn = k0_degenerate_measure(Family::Cn, W);
        assert_eq!(cn.weights, vec![0.5, 0.5]);
        assert_eq!(cn.total_mass(), 1.0);
        let m3 = moment_from_measure(&cn, 3);
        assert_abs_diff_eq!(m3.re, (3.0 * W).cos(), epsilon = 1e-14);
        assert!(m3.im.abs() <= 1e-14);
        let dn = k0_degenerate_measure(Family::Dn, W);
        assert_eq!(dn.len(), 1);
        assert_eq!(dn.weights[0], 1.0);
        for n in [0, 1, 7] {
            assert_eq!(moment_from_measure(&dn, n).re, 1.0);
        }
    }
}
