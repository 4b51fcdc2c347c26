//! The degenerate rational steps `w = K M/N`: orthogonality collapses
//! from a dense spectrum to the `2N` vertices of a regular polygon.
//!
//! At `w = K/N` the reflection sequence of the cn family terminates —
//! `a_{2N-1} = -dn(2K) = -1` exactly — which freezes the recursion at
//! `Phi_{2N}(z) = z^{2N} + 1`.  Its zeros, the `2N`-th roots of `-1`,
//! are precisely where the dense measure's atoms pile up, and the atom
//! masses cluster into the finite weights
//!
//! ```text
//! rho_j = (pi/(kK)) S(j;N),    S(j;N) = F((j - 1/2)/(2N); q^{2N}),
//! ```
//!
//! where `F` is the bilateral sum `F(alpha; p) = sum_{s in Z} 1/(p^{s+alpha} + p^{-s-alpha})`.
//! `F` is computable four independent ways — the sum itself, a
//! Ramanujan-summation product, a `dn` evaluation at the complementary
//! modulus, and Poisson resummation — and `S` three ways (the `dn` route
//! descends `2N` Landen levels first).  The module cross-checks all of
//! them, plus a residue formula for the weights that bypasses `F`
//! entirely.

use crate::circle::{szego_all, MonicCirclePolynomial};
use crate::elliptic::{jacobi_cn, jacobi_dn, landen_2n, sncndn_raw, EllipticContext};
use crate::error::{Error, Result};
use crate::measures::DiscretePointMeasure;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Largest polygon order with validated weights (the `q^{2N}` ladders
/// underflow long before this bound bites).
pub const MAX_POLYGON_ORDER: usize = 8;

/// Everything attached to one finite case `w = K M/N`.
#[derive(Debug, Clone)]
pub struct PolygonCase {
    /// Polygon half-order: the support has `2N` points.
    pub n: usize,
    /// Step multiplier, co-prime with `n` (1 in the fully validated
    /// construction).
    pub m: usize,
    /// `true` when `m != 1`: the measure side is still exact (the atom
    /// clusters just land in a permuted order), but the polynomial side
    /// is carried mechanically and not certified.
    pub experimental: bool,
    pub ctx: EllipticContext,
    /// The rational step `K m / n`.
    pub w: f64,
    /// Cluster indices `j = -N+1 ..= N`.
    pub indices: Vec<i64>,
    /// Canonical angles of the support points `z_j = e^{i pi m (j-1/2)/N}`.
    pub zeros: Vec<f64>,
    /// Cluster masses `rho_j`, mirrored bitwise across `j -> 1-j`.
    pub weights: Vec<f64>,
    /// Reflection coefficients through the terminal `a_{2N-1} = -1`.
    pub a: Vec<f64>,
    /// Normalisations `h_0 ..= h_{2N-1}` (the next one would vanish).
    pub h: Vec<f64>,
    /// `Phi_0 ..= Phi_{2N}` from the Szego recursion.
    pub phis: Vec<MonicCirclePolynomial>,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The bilateral sum `F(alpha; q) = sum_{s in Z} 1/(q^{s+alpha} + q^{-s-alpha})`,
/// truncated once the terms certify a tail below `1e-25` (they decay
/// like `q^{|s+alpha|}`).  This is the reference route the other three
/// are checked against.
pub fn ramanujan_f(alpha: f64, q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "base must be in (0,1), got {q}");
    let reach = (25.0 * std::f64::consts::LN_10 / -q.ln()).ceil() as i64 + 2;
    let center = (-alpha).round() as i64;
    ((center - reach)..=(center + reach))
        .map(|s| {
            let x = q.powf((s as f64 + alpha).abs());
            x / (1.0 + x * x)
        })
        .sum()
}

/// `(x; p)_infinity`, truncated when the running factor is within
/// `1e-17` of 1.
fn q_infinite_product(x: f64, p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let mut prod = 1.0;
    let mut t = x;
    while t.abs() >= 1e-17 {
        prod *= 1.0 - t;
        t *= p;
    }
    prod
}

/// `F` by the Ramanujan-summation product
///
/// ```text
/// F(alpha; q) = (-q^{1+2a}, -q^{1-2a}, q^2, q^2; q^2)_inf
///               ----------------------------------------  / (q^a + q^{-a})
///               (-q^{2+2a}, -q^{2-2a}, q,   q;   q^2)_inf
/// ```
pub fn ramanujan_f_product(alpha: f64, q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "base must be in (0,1), got {q}");
    let p = q * q;
    let xa = q.powf(alpha);
    let lead = xa / (1.0 + xa * xa);
    let num = q_infinite_product(-q.powf(1.0 + 2.0 * alpha), p)
        * q_infinite_product(-q.powf(1.0 - 2.0 * alpha), p)
        * q_infinite_product(p, p).powi(2);
    let den = q_infinite_product(-q.powf(2.0 + 2.0 * alpha), p)
        * q_infinite_product(-q.powf(2.0 - 2.0 * alpha), p)
        * q_infinite_product(q, p).powi(2);
    lead * num / den
}

/// `F` as an elliptic value: `(K/pi) dn(2 alpha K'; k')` with `k` the
/// modulus whose nome is `q`.  The complementary modulus can round to
/// 1.0 in `f64` when `q` is large, so `dn` is evaluated from
/// `1 - k'^2 = k^2` directly rather than through a rebuilt context.
pub fn ramanujan_f_dn(alpha: f64, q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "base must be in (0,1), got {q}");
    let ctx = EllipticContext::from_nome(q).expect("nome already validated");
    let dn = sncndn_raw(2.0 * alpha * ctx.big_k_prime, ctx.k * ctx.k).2;
    ctx.big_k / PI * dn
}

/// `F` by Poisson resummation:
/// `(pi/(2 beta)) [1 + 2 sum_{s>=1} sech(pi^2 s / beta) cos(2 pi s alpha)]`,
/// `beta = ln(1/q)`.  Converges fastest exactly where the direct sum is
/// slowest (q near 1), which makes it a good independent witness.
pub fn ramanujan_f_poisson(alpha: f64, q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "base must be in (0,1), got {q}");
    let beta = -q.ln();
    let mut sum = 1.0;
    for s in 1..200 {
        let sech = 1.0 / (PI * PI * s as f64 / beta).cosh();
        if sech < 1e-18 {
            break;
        }
        sum += 2.0 * sech * (TAU * s as f64 * alpha).cos();
    }
    PI / (2.0 * beta) * sum
}

/// The polygon weight kernel `S(j; N) = F((j-1/2)/(2N); q^{2N})` by the
/// direct bilateral sum.
pub fn s_weight(j: i64, n: usize, ctx: &EllipticContext) -> f64 {
    assert!(n >= 1);
    let q_pow = ctx.nome_q.powi(2 * n as i32);
    ramanujan_f((j as f64 - 0.5) / (2.0 * n as f64), q_pow)
}

/// `S(j; N)` by all three routes: `[direct sum, product, dn]`.
///
/// The `dn` route first descends `2N` Landen levels so the evaluation
/// happens at the transformed quarter-periods: with `2 alpha = (j-1/2)/N`,
/// `S = (K~/pi) dn(2 alpha K~'; k~')`.
pub fn s_weight_routes(j: i64, n: usize, ctx: &EllipticContext) -> Result<[f64; 3]> {
    let alpha = (j as f64 - 0.5) / (2.0 * n as f64);
    let q_pow = ctx.nome_q.powi(2 * n as i32);
    let (tilde, _scale) = landen_2n(ctx, n)?;
    let dn = sncndn_raw(2.0 * alpha * tilde.big_k_prime, tilde.k * tilde.k).2;
    Ok([
        ramanujan_f(alpha, q_pow),
        ramanujan_f_product(alpha, q_pow),
        tilde.big_k / PI * dn,
    ])
}

/// Build the finite case at `w = K m / n` (`m = 1` is the fully
/// validated construction; see [`build_polygon_case`]).
///
/// The weights are exact cluster masses of the dense measure — summing
/// the atoms that land on each vertex gives `rho_j = (pi/(kK)) S(j;N)`
/// independently of `m` (only the vertex *order* feels `m`), so the
/// measure side is certified for every co-prime `m`.  The polynomial
/// side runs the Szego recursion through the terminal step; for even
/// `m` an interior `|a| = 1` occurs and everything past it is formal.
pub fn build_polygon_case_general(
    n: usize,
    m: usize,
    ctx: &EllipticContext,
) -> Result<PolygonCase> {
    if n == 0 || n > MAX_POLYGON_ORDER {
        return Err(Error::domain(format!(
            "polygon order must be in 1..={MAX_POLYGON_ORDER}, got {n}"
        )));
    }
    if m == 0 || gcd(m, n) != 1 {
        return Err(Error::domain(format!(
            "step multiplier {m} must be positive and co-prime with {n}"
        )));
    }
    let w = ctx.big_k * m as f64 / n as f64;
    // Reflection sequence of the cn family, run through the terminal
    // index on purpose (this is the one place |a| = 1 is wanted).
    let a: Vec<f64> = (0..2 * n)
        .map(|idx| {
            let u = w * (idx + 1) as f64;
            if idx % 2 == 0 {
                jacobi_cn(u, ctx)
            } else {
                -jacobi_dn(u, ctx)
            }
        })
        .collect();
    let phis = szego_all(&a, 2 * n);
    let mut h = Vec::with_capacity(2 * n);
    h.push(1.0);
    for s in 0..2 * n - 1 {
        let prev = h[s];
        h.push(prev * (1.0 - a[s] * a[s]));
    }
    let half: Vec<f64> = (1..=n as i64)
        .map(|j| PI / (ctx.k * ctx.big_k) * s_weight(j, n, ctx))
        .collect();
    let mut indices = Vec::with_capacity(2 * n);
    let mut zeros = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for j in (1 - n as i64)..=(n as i64) {
        indices.push(j);
        zeros.push((PI * (m as f64) * (j as f64 - 0.5) / n as f64).rem_euclid(TAU));
        let mirror = if j >= 1 { j } else { 1 - j };
        weights.push(half[(mirror - 1) as usize]);
    }
    Ok(PolygonCase {
        n,
        m,
        experimental: m != 1,
        ctx: *ctx,
        w,
        indices,
        zeros,
        weights,
        a,
        h,
        phis,
    })
}

/// The standard finite case `w = K/N`.
pub fn build_polygon_case(n: usize, ctx: &EllipticContext) -> Result<PolygonCase> {
    build_polygon_case_general(n, 1, ctx)
}

impl PolygonCase {
    /// Support points as complex numbers.
    pub fn points(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect()
    }

    /// View the finite support as a [`DiscretePointMeasure`], for reuse
    /// of the Gram and moment machinery.  The quoted tail covers the
    /// cluster-sum truncation.
    pub fn as_measure(&self) -> DiscretePointMeasure {
        DiscretePointMeasure {
            indices: self.indices.clone(),
            angles: self.zeros.clone(),
            weights: self.weights.clone(),
            trunc: self.n,
            tail_bound: 1e-22,
        }
    }
}

/// Reconstruct the moment `c_n = sum_j rho_j z_j^n`; equals `cn(w n)`
/// for the validated cases.  The support is conjugate-symmetric with
/// mirrored weights, so only the real part carries information (the
/// imaginary part is rounding noise).
pub fn finite_moment_check(case: &PolygonCase, n: usize) -> f64 {
    let acc: Complex64 = case
        .zeros
        .iter()
        .zip(&case.weights)
        .map(|(&theta, &rho)| rho * Complex64::from_polar(1.0, n as f64 * theta))
        .sum();
    debug_assert!(acc.im.abs() <= 1e-12);
    acc.re
}

/// Gram matrix of `Phi_0 ..= Phi_{2N-1}` over the finite support:
/// off-diagonal entries are the orthogonality residuals, the diagonal
/// reproduces `h_n`.
pub fn finite_gram_check(case: &PolygonCase) -> Vec<Vec<f64>> {
    crate::measures::gram_check(&case.as_measure(), &case.phis[..2 * case.n])
}

/// Weights by the residue formula
/// `rho_s = h_{2N-1} / (Phi_{2N-1}(1/z_s) * Phi'_{2N}(z_s))`, with
/// `Phi'_{2N}(z) = 2N z^{2N-1}` since `Phi_{2N} = z^{2N} + 1`.  A
/// derivation completely independent of the Ramanujan sums; returned in
/// `indices` order.
pub fn residue_weights(case: &PolygonCase) -> Vec<f64> {
    let two_n = 2 * case.n;
    let h_top = case.h[two_n - 1];
    let phi_prev = &case.phis[two_n - 1];
    case.zeros
        .iter()
        .map(|&theta| {
            let z = Complex64::from_polar(1.0, theta);
            let deriv = two_n as f64 * Complex64::from_polar(1.0, (two_n as f64 - 1.0) * theta);
            let rho = h_top / (phi_prev.eval(z.conj()) * deriv);
            debug_assert!(rho.im.abs() <= 1e-9, "residue weight not real: {rho}");
            rho.re
        })
        .collect()
}

/// CSV export: vertex index, angle, weight, and the product/dn route
/// residuals against the direct-sum weight kernel.
pub fn polygon_csv(case: &PolygonCase) -> Result<String> {
    let mut out = String::from("j,angle,weight,res_product,res_dn\n");
    for (i, &j) in case.indices.iter().enumerate() {
        let [direct, product, dn] = s_weight_routes(j, case.n, &case.ctx)?;
        out.push_str(&format!(
            "{j},{:.16e},{:.16e},{:.3e},{:.3e}\n",
            case.zeros[i],
            case.weights[i],
            (product - direct).abs(),
            (dn - direct).abs(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cn_measure, moment_from_measure};
    use approx::assert_abs_diff_eq;

    const K_MOD: f64 = 0.6;

    fn ctx() -> EllipticContext {
        EllipticContext::new(K_MOD).unwrap()
    }

    #[test]
    fn f_reference_and_symmetry() {
        assert_abs_diff_eq!(
            ramanujan_f(0.27, 0.3),
            1.304497109672089530907805,
            epsilon = 1e-14
        );
        for q in [0.1, 0.3, 0.6] {
            for alpha in [0.05, 0.27, 0.49] {
                let plus = ramanujan_f(alpha, q);
                let minus = ramanujan_f(-alpha, q);
                assert!((plus - minus).abs() <= 1e-14 * plus);
            }
            // F(0; q) = K/pi at the modulus with nome q.
            let ctx = EllipticContext::from_nome(q).unwrap();
            assert!((ramanujan_f(0.0, q) - ctx.big_k / PI).abs() <= 1e-12);
        }
    }

    #[test]
    fn f_four_routes_agree() {
        for q in [0.1, 0.3, 0.6] {
            for alpha in [0.0, 0.1, 0.27, 0.49] {
                let reference = ramanujan_f(alpha, q);
                let product = ramanujan_f_product(alpha, q);
                let dn = ramanujan_f_dn(alpha, q);
                let poisson = ramanujan_f_poisson(alpha, q);
                for (name, v) in [("product", product), ("dn", dn), ("poisson", poisson)] {
                    assert!(
                        (v - reference).abs() <= 1e-10,
                        "{name} at (alpha, q) = ({alpha}, {q}): {v} vs {reference}"
                    );
                }
            }
        }
    }

    #[test]
    fn s_kernel_three_routes_and_references() {
        let ctx = ctx();
        let routes = s_weight_routes(2, 5, &ctx).unwrap();
        for v in routes {
            assert!((v - routes[0]).abs() <= 1e-10);
        }
        assert_abs_diff_eq!(routes[0], 0.004651120960920327002102538, epsilon = 1e-14);
        assert_abs_diff_eq!(
            s_weight(1, 5, &ctx),
            0.16240023541170998176,
            epsilon = 1e-14
        );
        // Symmetry inherited from F: S(j) = S(1-j).
        for j in [-2i64, 0, 3] {
            let lhs = s_weight(j, 5, &ctx);
            let rhs = s_weight(1 - j, 5, &ctx);
            assert!((lhs - rhs).abs() <= 1e-15 * lhs.abs());
        }
        // Full three-route sweep across the index range.
        for j in -4i64..=5 {
            let r = s_weight_routes(j, 5, &ctx).unwrap();
            assert!((r[1] - r[0]).abs() <= 1e-10 && (r[2] - r[0]).abs() <= 1e-10);
        }
    }

    #[test]
    fn simplest_polygon_is_the_square() {
        // N = 1: a_0 = cn(K) = 0, a_1 = -dn(2K) = -1, Phi_2 = z^2 + 1,
        // masses 1/2 at +-i.
        let case = build_polygon_case(1, &ctx()).unwrap();
        assert!(case.a[0].abs() <= 1e-15);
        assert_eq!(case.a[1], -1.0);
        assert_eq!(case.phis[2].coeffs[2], 1.0);
        assert!((case.phis[2].coeffs[0] - 1.0).abs() <= 1e-15);
        assert!(case.phis[2].coeffs[1].abs() <= 1e-15);
        for &w in &case.weights {
            assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn recursion_terminates_on_binomial_polynomial() {
        let case = build_polygon_case(5, &ctx()).unwrap();
        assert_eq!(case.a[9], -1.0, "terminal reflection coefficient");
        let top = &case.phis[10];
        assert!((top.coeffs[0] - 1.0).abs() <= 1e-10);
        assert_eq!(top.coeffs[10], 1.0);
        for s in 1..10 {
            assert!(top.coeffs[s].abs() <= 1e-10, "middle coefficient {s}");
        }
        // Zeros are the 10th roots of -1.
        for &theta in &case.zeros {
            let arg = 10.0 * theta;
            assert!((arg.cos() + 1.0).abs() <= 1e-12);
            assert!(arg.sin().abs() <= 1e-12);
        }
    }

    #[test]
    fn zeros_sit_on_the_dense_measure_grid() {
        let ctx = ctx();
        let case = build_polygon_case(5, &ctx).unwrap();
        let grid = cn_measure(&ctx, case.w, 30);
        for &theta in &grid.angles {
            let hit = case
                .zeros
                .iter()
                .any(|&z| ((z - theta).cos() - 1.0).abs() <= 1e-20 || (z - theta).abs() <= 1e-9);
            assert!(hit, "grid angle {theta} misses every vertex");
        }
    }

    #[test]
    fn weights_positive_mass_one_up_to_order_eight() {
        let ctx = ctx();
        for n in 1..=MAX_POLYGON_ORDER {
            let case = build_polygon_case(n, &ctx).unwrap();
            assert!(case.weights.iter().all(|&w| w > 0.0));
            let mass: f64 = case.weights.iter().sum();
            assert!((mass - 1.0).abs() <= 1e-10, "N = {n}: mass {mass}");
        }
        assert!(build_polygon_case(9, &ctx).is_err());
        assert!(build_polygon_case(0, &ctx).is_err());
    }

    #[test]
    fn finite_moments_match_lattice_values() {
        let ctx = ctx();
        let case = build_polygon_case(5, &ctx).unwrap();
        assert_abs_diff_eq!(finite_moment_check(&case, 0), 1.0, epsilon = 1e-12);
        // n = N lands on the quarter-period zero of cn.
        assert!(finite_moment_check(&case, 5).abs() <= 1e-12);
        for n in 0..=9 {
            let want = jacobi_cn(case.w * n as f64, &ctx);
            assert!(
                (finite_moment_check(&case, n) - want).abs() <= 1e-10,
                "moment {n}"
            );
        }
    }

    #[test]
    fn gram_and_residue_weights_close_the_loop() {
        let ctx = ctx();
        for n in [3, 5] {
            let case = build_polygon_case(n, &ctx).unwrap();
            let gram = finite_gram_check(&case);
            for r in 0..2 * n {
                for c in 0..2 * n {
                    if r == c {
                        assert!((gram[r][c] - case.h[r]).abs() <= 1e-9, "diag {r}");
                    } else {
                        assert!(gram[r][c].abs() <= 1e-9, "off-diag ({r},{c})");
                    }
                }
            }
            let residue = residue_weights(&case);
            for (got, want) in residue.iter().zip(&case.weights) {
                assert!((got - want).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn general_multiplier_permutes_the_support() {
        let ctx = ctx();
        let base = build_polygon_case(5, &ctx).unwrap();
        let skew = build_polygon_case_general(5, 3, &ctx).unwrap();
        assert!(skew.experimental && !base.experimental);
        // Same weight multiset, same vertex set, different pairing.
        let mut sorted_base = base.zeros.clone();
        let mut sorted_skew = skew.zeros.clone();
        sorted_base.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted_skew.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in sorted_base.iter().zip(&sorted_skew) {
            assert!((x - y).abs() <= 1e-9);
        }
        assert_eq!(base.weights, skew.weights);
        // The clustered measure still reproduces the moments at w = 3K/5.
        for n in 0..=9i64 {
            let rec = moment_from_measure(&skew.as_measure(), n);
            let want = jacobi_cn(skew.w * n as f64, &ctx);
            assert!((rec.re - want).abs() <= 1e-10, "moment {n}");
        }
        // Co-primality is enforced.
        assert!(build_polygon_case_general(6, 3, &ctx).is_err());
        assert!(build_polygon_case_general(5, 0, &ctx).is_err());
    }

    #[test]
    fn csv_reports_route_residuals() {
        let case = build_polygon_case(3, &ctx()).unwrap();
        let csv = polygon_csv(&case).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("j,angle,weight,res_product,res_dn"));
        assert_eq!(csv.lines().count(), 7);
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5);
            assert!(fields[3].parse::<f64>().unwrap() <= 1e-10);
            assert!(fields[4].parse::<f64>().unwrap() <= 1e-10);
        }
    }
}
