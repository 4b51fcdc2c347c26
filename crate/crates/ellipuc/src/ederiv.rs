//! The elliptic derivative: a degree-lowering operator that exchanges
//! the cn and dn polynomial families.
//!
//! On monomials it acts by `E z^n = e_n z^{n-1}` with `e_n = sn(wn)/sn(w)`
//! the elliptic number, extended linearly to coefficient vectors.  As
//! `w -> 0` every `e_n -> n` and `E` collapses to `d/dz`; for general `w`
//! it plays the same role the ordinary derivative plays for classical
//! families, sending each elliptic family onto the *other* one:
//!
//! ```text
//! E Phi_n^{cn} = e_n Phi_{n-1}^{dn},      E Phi_n^{dn} = e_n Phi_{n-1}^{cn},
//! ```
//!
//! so `E^2` maps each family to itself with factor `e_n e_{n-1}`
//! ([`verify_intertwining`] checks all of this coefficientwise).
//!
//! `E` also expands over the one-parameter family of degree-lowering
//! operators `W_j z^n = sin(n j theta) z^{n-1}` (`theta = pi w / (2K)`):
//! only odd indices enter, with weights decaying like `q^{j-1/2}`, giving
//! a geometrically convergent operator series ([`e_series_expansion`]).

use crate::circle::{family_data, Family};
use crate::ebc::{elliptic_number, EbcParams};
use crate::elliptic::EllipticContext;
use crate::error::Result;
use std::f64::consts::PI;

/// Apply the elliptic derivative to a coefficient vector
/// (`coeffs[s]` multiplies `z^s`): the result has one degree less, with
/// `out[s-1] = coeffs[s] * e_s`.  Constants map to the empty (zero)
/// polynomial.  The degree must not exceed `params.n_max`.
pub fn apply_e(coeffs: &[f64], params: &EbcParams) -> Vec<f64> {
    assert!(
        coeffs.len() <= params.n_max + 1,
        "degree {} exceeds the table range {}",
        coeffs.len().saturating_sub(1),
        params.n_max
    );
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, &c)| c * elliptic_number(params, s))
        .collect()
}

/// Apply the q-derivative operator `W_j`: `out[s-1] = coeffs[s] * sin(s j theta)`.
pub fn apply_w_op(coeffs: &[f64], j: usize, theta: f64) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, &c)| c * ((s * j) as f64 * theta).sin())
        .collect()
}

/// Coefficientwise residuals of the derivative's exchange relations.
#[derive(Debug, Clone)]
pub struct IntertwiningReport {
    /// `|E Phi_n^{cn} - e_n Phi_{n-1}^{dn}|`, max over coefficients,
    /// indexed by `n - 1` for `n = 1..=n_max`.
    pub cn_to_dn: Vec<f64>,
    /// Same with the families swapped.
    pub dn_to_cn: Vec<f64>,
    /// `|E^2 Phi_n - e_n e_{n-1} Phi_{n-2}|`, worse of the two
    /// families, indexed by `n - 2` for `n = 2..=n_max`.
    pub second_order: Vec<f64>,
}

impl IntertwiningReport {
    pub fn max(&self) -> f64 {
        self.cn_to_dn
            .iter()
            .chain(&self.dn_to_cn)
            .chain(&self.second_order)
            .fold(0.0, |m, &r| m.max(r))
    }
}

fn max_abs_diff(lhs: &[f64], rhs: &[f64]) -> f64 {
    assert_eq!(lhs.len(), rhs.len());
    lhs.iter()
        .zip(rhs)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Check, for `1 <= n <= n_max`, that the elliptic derivative carries
/// each family's degree-`n` polynomial onto `e_n` times the other
/// family's degree-`n-1` polynomial, and that applying it twice returns
/// to the same family with factor `e_n e_{n-1}`.
pub fn verify_intertwining(
    ctx: &EllipticContext,
    w: f64,
    n_max: usize,
) -> Result<IntertwiningReport> {
    assert!(n_max >= 1);
    let params = EbcParams::new(ctx, w, n_max)?;
    let cn = family_data(ctx, w, Family::Cn, n_max)?;
    let dn = family_data(ctx, w, Family::Dn, n_max)?;
    let mut report = IntertwiningReport {
        cn_to_dn: Vec::with_capacity(n_max),
        dn_to_cn: Vec::with_capacity(n_max),
        second_order: Vec::with_capacity(n_max.saturating_sub(1)),
    };
    for n in 1..=n_max {
        let e_n = elliptic_number(&params, n);
        let scaled = |phi: &crate::circle::MonicCirclePolynomial| -> Vec<f64> {
            phi.coeffs.iter().map(|&c| e_n * c).collect()
        };
        report.cn_to_dn.push(max_abs_diff(
            &apply_e(&cn.phis[n].coeffs, &params),
            &scaled(&dn.phis[n - 1]),
        ));
        report.dn_to_cn.push(max_abs_diff(
            &apply_e(&dn.phis[n].coeffs, &params),
            &scaled(&cn.phis[n - 1]),
        ));
        if n >= 2 {
            let factor = e_n * elliptic_number(&params, n - 1);
            let mut worst = 0.0_f64;
            for data in [&cn, &dn] {
                let twice = apply_e(&apply_e(&data.phis[n].coeffs, &params), &params);
                let target: Vec<f64> =
                    data.phis[n - 2].coeffs.iter().map(|&c| factor * c).collect();
                worst = worst.max(max_abs_diff(&twice, &target));
            }
            report.second_order.push(worst);
        }
    }
    Ok(report)
}

/// Weight `beta_j` of `W_{2j-1}` in the operator expansion of the
/// elliptic derivative:
///
/// ```text
/// E = sum_{j >= 1} beta_j W_{2j-1},
/// beta_j = 2 pi / (K k (q^{1/2-j} - q^{j-1/2}) sn(w)),
/// ```
///
/// positive and decaying like `q^{j-1/2}`.
pub fn q_derivative_weight(params: &EbcParams, j: usize) -> f64 {
    assert!(j >= 1);
    let ctx = &params.ctx;
    let q = ctx.nome_q;
    let gap = q.powf(0.5 - j as f64) - q.powf(j as f64 - 0.5);
    2.0 * PI / (ctx.big_k * ctx.k * gap * params.sn_lattice(1))
}

/// Truncated operator expansion `sum_{j<=J} beta_j W_{2j-1}` applied to
/// a coefficient vector, with a certified bound on the dropped tail.
///
/// The tail bound is `||coeffs||_1` times the weight tail
/// `sum_{j>J} beta_j <= (2 pi / (K k sn w)) q^{J+1/2} / ((1-q^{2J+1})(1-q))`
/// (each `W_j` multiplier is a sine, so no further growth enters).  The
/// approximation error itself decays by a factor of roughly the nome per
/// added term.
pub fn e_series_expansion(coeffs: &[f64], params: &EbcParams, j_terms: usize) -> (Vec<f64>, f64) {
    assert!(j_terms >= 1);
    let theta = PI * params.w / (2.0 * params.ctx.big_k);
    let mut acc = vec![0.0; coeffs.len().saturating_sub(1)];
    for j in 1..=j_terms {
        let beta = q_derivative_weight(params, j);
        for (s, term) in apply_w_op(coeffs, 2 * j - 1, theta).into_iter().enumerate() {
            acc[s] += beta * term;
        }
    }
    let ctx = &params.ctx;
    let q = ctx.nome_q;
    let weight_tail = 2.0 * PI / (ctx.big_k * ctx.k * params.sn_lattice(1).abs())
        * q.powf(j_terms as f64 + 0.5)
        / ((1.0 - q.powi(2 * j_terms as i32 + 1)) * (1.0 - q));
    let norm: f64 = coeffs.iter().map(|c| c.abs()).sum();
    (acc, weight_tail * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::szego_all;

    const K_MOD: f64 = 0.6;
    const W: f64 = 0.31;

    fn ctx() -> EllipticContext {
        EllipticContext::new(K_MOD).unwrap()
    }

    fn params(n_max: usize) -> EbcParams {
        EbcParams::new(&ctx(), W, n_max).unwrap()
    }

    #[test]
    fn monomial_action_edges() {
        let p = params(4);
        assert!(apply_e(&[3.5], &p).is_empty());
        assert_eq!(apply_e(&[0.0, 1.0], &p), vec![1.0]);
        // W_j kills constants and sends z to sin(j theta).
        let theta = 0.37;
        assert!(apply_w_op(&[2.0], 3, theta).is_empty());
        assert_eq!(apply_w_op(&[0.0, 1.0], 3, theta), vec![(3.0 * theta).sin()]);
        assert_eq!(apply_w_op(&[0.0, 0.0, 0.0, 1.0], 2, theta).len(), 3);
    }

    #[test]
    fn small_step_becomes_ordinary_derivative() {
        let ctx = ctx();
        let p = EbcParams::new(&ctx, 1e-8, 3).unwrap();
        // d/dz (z^3 + 2z) = 3z^2 + 2.
        let out = apply_e(&[0.0, 2.0, 0.0, 1.0], &p);
        let expect = [2.0, 0.0, 3.0];
        for (got, want) in out.iter().zip(expect) {
            assert!((got - want).abs() <= 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn exchange_relations_hold_to_degree_twenty() {
        let report = verify_intertwining(&ctx(), W, 20).unwrap();
        assert_eq!(report.cn_to_dn.len(), 20);
        assert_eq!(report.second_order.len(), 19);
        assert!(report.max() <= 1e-11, "max residual {}", report.max());
        // Degree 1 is exact: E(z - a_0) = 1 = e_1 * Phi_0.
        assert_eq!(report.cn_to_dn[0], 0.0);
        assert_eq!(report.dn_to_cn[0], 0.0);
    }

    #[test]
    fn operator_series_converges_to_derivative() {
        let p = params(8);
        let z5 = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let direct = apply_e(&z5, &p);
        let (series, tail) = e_series_expansion(&z5, &p, 40);
        assert!(tail <= 1e-25, "tail bound should be negligible at J = 40");
        for (got, want) in series.iter().zip(&direct) {
            assert!((got - want).abs() <= 1e-12);
        }
        // Constants stay zero at any truncation.
        let (zero, _) = e_series_expansion(&[7.0], &p, 3);
        assert!(zero.is_empty());
        // Truncation error actually respects the certified bound (plus
        // the rounding floor of the evaluated sum, which the analytic
        // tail cannot see once it drops below ~1e-15).
        for j_terms in 1..=10 {
            let (approx, bound) = e_series_expansion(&z5, &p, j_terms);
            let err = max_abs_diff(&approx, &direct);
            assert!(err <= bound.max(5e-15), "J = {j_terms}: {err} > {bound}");
        }
    }

    #[test]
    fn expansion_weights_positive_and_nome_decaying() {
        let p = params(4);
        let q = p.ctx.nome_q;
        let mut prev = q_derivative_weight(&p, 1);
        assert!(prev > 0.0);
        for j in 2..=12 {
            let beta = q_derivative_weight(&p, j);
            assert!(beta > 0.0);
            let ratio = beta / prev;
            assert!((ratio / q - 1.0).abs() <= 3.0 * q, "j = {j}: {ratio}");
            prev = beta;
        }
    }

    #[test]
    fn truncation_error_decays_at_nome_rate() {
        // Slope of log(error) per added term, against log q.  The rate
        // is the nome itself (the weights go like q^{j-1/2}), not its
        // square; allow the sine factors 20% slack around that.
        let p = params(8);
        let a = crate::circle::reflection_cn(&ctx(), W, 8).unwrap();
        let phi = &szego_all(&a, 8)[8];
        let direct = apply_e(&phi.coeffs, &p);
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|j| {
                let (approx, _) = e_series_expansion(&phi.coeffs, &p, j);
                (j as f64, max_abs_diff(&approx, &direct).ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let rate = p.ctx.nome_q.ln();
        assert!(
            (slope / rate - 1.0).abs() <= 0.2,
            "slope {slope} vs log q {rate}"
        );
    }

    #[test]
    fn operator_is_linear() {
        let p = params(6);
        let u = [0.3, -1.2, 0.0, 0.7, 2.0, -0.4, 0.9];
        let v = [1.1, 0.2, -0.8, 0.0, 0.5, 1.3, -2.2];
        let (alpha, beta) = (2.0, -0.25);
        let mixed: Vec<f64> = u.iter().zip(&v).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = apply_e(&mixed, &p);
        let eu = apply_e(&u, &p);
        let ev = apply_e(&v, &p);
        for (s, &l) in lhs.iter().enumerate() {
            let r = alpha * eu[s] + beta * ev[s];
            assert!((l - r).abs() <= 1e-15 * (l.abs() + 1.0));
        }
    }
}
