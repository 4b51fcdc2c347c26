//! Transport from the circle to the interval `[-1,1]`.
//!
//! Folding a circle polynomial with its reflected partner,
//!
//! ```text
//! S_n(x) = (z^{-n/2} Phi_n(z) + z^{n/2} Phi_n(1/z)) / (2^n (1 - a_{n-1})),
//! x = (z^{1/2} + z^{-1/2})/2,
//! ```
//!
//! yields monic *symmetric* polynomials on the interval.  No half-integer
//! power is ever evaluated here: since `z^{m/2} + z^{-m/2} = 2 T_m(x)`,
//! the fold is pure coefficient algebra over an exact integer Chebyshev
//! table.  `S_n` obeys the symmetric three-term recurrence with
//! `v_n = (1 + a_{n-1})(1 - a_{n-2})/4` (and `a_{-1} = -1`, so `v_0 = 0`),
//! and splits quadratically into two ordinary monic families,
//! `S_{2n}(x) = 2^{-n} P_n(2x^2-1)` and `S_{2n+1}(x) = 2^{-n} x Q_n(2x^2-1)`,
//! whose recurrence coefficients come in two independently checkable
//! forms (through the `v_n` and directly through the `a_n`).
//!
//! For the elliptic families the interval measure is again a dense point
//! set; the Gram checks here work on the half-angle grid.  In the `k -> 1`
//! limit the `P`-family coefficients become rational in `q = e^{-2w}`
//! and the weight collapses to a classical basic-hypergeometric one wearing
//! an elliptic disguise: an infinite `q`-product equal to `dn` at the
//! modulus whose nome is `sqrt(q)`.

use crate::circle::{szego_all, MomentSequence, MonicCirclePolynomial};
use crate::elliptic::{jacobi_cn, jacobi_dn, jacobi_sn, EllipticContext};
use crate::error::{Error, Result};
use crate::measures::DiscretePointMeasure;
use std::f64::consts::PI;

/// Degree cap for the exact integer Chebyshev coefficient table (the
/// largest entry of `T_40` is `2^39`, comfortably inside `i64`).
pub const MAX_CHEBYSHEV_DEGREE: usize = 40;

/// Monic polynomial with `S_n(-x) = (-1)^n S_n(x)`: every other
/// coefficient is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricIntervalPolynomial {
    /// Ascending monomial coefficients in `x`.
    pub coeffs: Vec<f64>,
}

impl SymmetricIntervalPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }
}

/// Recurrence data for one of the split families: monic
/// `p_{n+1} = (x - b_n) p_n - u_n p_{n-1}`.  `u[0]` is a placeholder
/// (the recurrence never uses it).
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRecurrence {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Monomial coefficients of the Chebyshev polynomial `T_s`, exact.
pub fn chebyshev_t_coeffs(s: usize) -> Vec<i64> {
    assert!(
        s <= MAX_CHEBYSHEV_DEGREE,
        "exact Chebyshev table capped at degree {MAX_CHEBYSHEV_DEGREE}"
    );
    let mut prev = vec![1i64];
    if s == 0 {
        return prev;
    }
    let mut cur = vec![0, 1];
    for _ in 1..s {
        let mut next = vec![0i64; cur.len() + 1];
        for (j, &c) in cur.iter().enumerate() {
            next[j + 1] += 2 * c;
        }
        for (j, &c) in prev.iter().enumerate() {
            next[j] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Convert a Chebyshev-basis coefficient list (`c[0]` on `T_0`) to
/// ascending monomial coefficients.
pub fn chebyshev_to_monomial(cheb: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cheb.len()];
    for (m, &c) in cheb.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (j, &t) in chebyshev_t_coeffs(m).iter().enumerate() {
            if t != 0 {
                out[j] += c * t as f64;
            }
        }
    }
    out
}

/// Fold one circle polynomial down to the interval.  `a_prev` is the
/// reflection coefficient one index below the degree (`-1` for degree 0).
pub fn dgt(phi: &MonicCirclePolynomial, a_prev: f64) -> Result<SymmetricIntervalPolynomial> {
    if 1.0 - a_prev < 1e-14 {
        return Err(Error::DegenerateTransform(format!(
            "fold normalisation 1 - a = {:e} vanishes",
            1.0 - a_prev
        )));
    }
    let n = phi.degree();
    let mut cheb = vec![0.0; n + 1];
    for (s, &w_ns) in phi.coeffs.iter().enumerate() {
        // z^{s - n/2} + z^{n/2 - s} contributes 2 T_{|2s-n|}.
        let m = (2 * s as i64 - n as i64).unsigned_abs() as usize;
        cheb[m] += 2.0 * w_ns;
    }
    let scale = 1.0 / (2f64.powi(n as i32) * (1.0 - a_prev));
    let coeffs: Vec<f64> = chebyshev_to_monomial(&cheb)
        .into_iter()
        .map(|c| c * scale)
        .collect();
    debug_assert!(coeffs
        .iter()
        .skip((n + 1) % 2)
        .step_by(2)
        .all(|&c| c == 0.0));
    Ok(SymmetricIntervalPolynomial { coeffs })
}

/// `S_0 ..= S_count` for a reflection sequence (needs `a` through index
/// `count - 1`).
pub fn dgt_family(a: &[f64], count: usize) -> Result<Vec<SymmetricIntervalPolynomial>> {
    assert!(a.len() >= count, "need reflection data through a_{count}");
    szego_all(a, count)
        .iter()
        .enumerate()
        .map(|(n, phi)| dgt(phi, if n == 0 { -1.0 } else { a[n - 1] }))
        .collect()
}

/// Symmetric-recurrence coefficients `v_0 = 0, v_n = (1+a_{n-1})(1-a_{n-2})/4`
/// for `n = 1 ..= a.len()`, all strictly positive while `|a| < 1`.
pub fn v_coeffs(a: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + 1);
    v.push(0.0);
    for n in 1..=a.len() {
        let lag = if n >= 2 { a[n - 2] } else { -1.0 };
        v.push(0.25 * (1.0 + a[n - 1]) * (1.0 - lag));
    }
    v
}

/// Running norms `kappa_n = v_1 v_2 ... v_n` (`kappa_0 = 1`).
pub fn kappa_products(v: &[f64]) -> Vec<f64> {
    let mut kappa = Vec::with_capacity(v.len());
    kappa.push(1.0);
    for n in 1..v.len() {
        let prev = kappa[n - 1];
        kappa.push(prev * v[n]);
    }
    kappa
}

/// `a_i` with the boundary convention `a_{-1} = -1`.  Indices below
/// `-1` only ever appear multiplied by `1 + a_{-1} = 0`, so any finite
/// stand-in works.
fn a_at(a: &[f64], i: i64) -> f64 {
    if i >= 0 {
        a[i as usize]
    } else if i == -1 {
        -1.0
    } else {
        0.0
    }
}

/// Split-family recurrence coefficients straight from the reflection
/// sequence:
///
/// ```text
/// P: u_n = (1+a_{2n-1})(1-a_{2n-2}^2)(1-a_{2n-3})/4,
///    b_n = (a_{2n}(1-a_{2n-1}) - a_{2n-2}(1+a_{2n-1}))/2
/// Q: u_n = (1+a_{2n})(1-a_{2n-1}^2)(1-a_{2n-2})/4,
///    b_n = (a_{2n+1}(1-a_{2n}) - a_{2n-1}(1+a_{2n}))/2
/// ```
pub fn split_pq_recurrences(a: &[f64]) -> (IntervalRecurrence, IntervalRecurrence) {
    let len = a.len() as i64;
    let mut p = IntervalRecurrence {
        u: vec![0.0],
        b: Vec::new(),
    };
    let mut q = IntervalRecurrence {
        u: vec![0.0],
        b: Vec::new(),
    };
    let mut n = 1i64;
    while 2 * n - 1 < len {
        let m = 2 * n;
        p.u.push(
            0.25 * (1.0 + a_at(a, m - 1))
                * (1.0 - a_at(a, m - 2) * a_at(a, m - 2))
                * (1.0 - a_at(a, m - 3)),
        );
        n += 1;
    }
    n = 1;
    while 2 * n < len {
        let m = 2 * n;
        q.u.push(
            0.25 * (1.0 + a_at(a, m))
                * (1.0 - a_at(a, m - 1) * a_at(a, m - 1))
                * (1.0 - a_at(a, m - 2)),
        );
        n += 1;
    }
    n = 0;
    while 2 * n < len {
        let m = 2 * n;
        p.b.push(
            0.5 * (a_at(a, m) * (1.0 - a_at(a, m - 1)) - a_at(a, m - 2) * (1.0 + a_at(a, m - 1))),
        );
        n += 1;
    }
    n = 0;
    while 2 * n + 1 < len {
        let m = 2 * n;
        q.b.push(
            0.5 * (a_at(a, m + 1) * (1.0 - a_at(a, m)) - a_at(a, m - 1) * (1.0 + a_at(a, m))),
        );
        n += 1;
    }
    (p, q)
}

/// The same coefficients composed from the symmetric `v_n`:
///
/// ```text
/// P: u_n = 4 v_{2n} v_{2n-1},  b_n = 2(v_{2n} + v_{2n+1}) - 1
/// Q: u_n = 4 v_{2n} v_{2n+1},  b_n = 2(v_{2n+2} + v_{2n+1}) - 1
/// ```
pub fn split_pq_from_v(v: &[f64]) -> (IntervalRecurrence, IntervalRecurrence) {
    let mut p = IntervalRecurrence {
        u: vec![0.0],
        b: Vec::new(),
    };
    let mut q = IntervalRecurrence {
        u: vec![0.0],
        b: Vec::new(),
    };
    let mut n = 1;
    while 2 * n < v.len() {
        p.u.push(4.0 * v[2 * n] * v[2 * n - 1]);
        n += 1;
    }
    n = 1;
    while 2 * n + 1 < v.len() {
        q.u.push(4.0 * v[2 * n] * v[2 * n + 1]);
        n += 1;
    }
    n = 0;
    while 2 * n + 1 < v.len() {
        p.b.push(2.0 * (v[2 * n] + v[2 * n + 1]) - 1.0);
        n += 1;
    }
    n = 0;
    while 2 * n + 2 < v.len() {
        q.b.push(2.0 * (v[2 * n + 2] + v[2 * n + 1]) - 1.0);
        n += 1;
    }
    (p, q)
}

/// Monic polynomials `p_0 ..= p_count` of a three-term recurrence,
/// ascending monomial coefficients.
pub fn recurrence_polys(rec: &IntervalRecurrence, count: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![1.0]];
    if count == 0 {
        return polys;
    }
    assert!(
        rec.b.len() >= count && rec.u.len() >= count,
        "recurrence data too short for degree {count}"
    );
    polys.push(vec![-rec.b[0], 1.0]);
    for n in 1..count {
        let mut next = vec![0.0; n + 2];
        for (j, &c) in polys[n].iter().enumerate() {
            next[j + 1] += c;
            next[j] -= rec.b[n] * c;
        }
        for (j, &c) in polys[n - 1].iter().enumerate() {
            next[j] -= rec.u[n] * c;
        }
        polys.push(next);
    }
    polys
}

/// Both split families `P_0..P_count`, `Q_0..Q_count` built from the
/// direct-in-`a` recurrence coefficients.
pub fn split_polys(a: &[f64], count: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (p_rec, q_rec) = split_pq_recurrences(a);
    (
        recurrence_polys(&p_rec, count),
        recurrence_polys(&q_rec, count),
    )
}

/// Chebyshev expansion of the even split: for `phi` of degree `2n`,
///
/// ```text
/// P_n(x) = 2^{1-n} (1 - a_{2n-1})^{-1} (W_{2n,n} + sum_{s=1}^n (W_{2n,n+s} + W_{2n,n-s}) T_s(x)).
/// ```
///
/// Returned as the coefficient list over `T_0 ..= T_n`.
pub fn chebyshev_expansion(phi: &MonicCirclePolynomial, a: &[f64]) -> Result<Vec<f64>> {
    let deg = phi.degree();
    if deg % 2 != 0 {
        return Err(Error::domain(
            "Chebyshev split expansion needs an even-degree circle polynomial",
        ));
    }
    let n = deg / 2;
    let a_top = if n == 0 { -1.0 } else { a[2 * n - 1] };
    if 1.0 - a_top < 1e-14 {
        return Err(Error::DegenerateTransform(format!(
            "fold normalisation 1 - a = {:e} vanishes",
            1.0 - a_top
        )));
    }
    let scale = 2f64.powi(1 - n as i32) / (1.0 - a_top);
    let w = &phi.coeffs;
    let mut out = Vec::with_capacity(n + 1);
    out.push(scale * 0.5 * w[n]);
    for s in 1..=n {
        out.push(scale * (w[n + s] + w[n - s]));
    }
    // The constant slot carries no factor 2 in the display; fold it back.
    out[0] *= 2.0;
    Ok(out)
}

/// Interval moments of the symmetric weight:
/// `M_n = 2^{-n} sum_j C(n,j) c_{j-n/2}` for even `n`, and exactly zero
/// for odd `n` (the weight is even).
pub fn interval_moments(c: &MomentSequence, n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let half = (n / 2) as i64;
    let mut binom = 1.0f64;
    let mut acc = 0.0;
    for j in 0..=n as i64 {
        acc += binom * c.get((j - half).unsigned_abs() as usize);
        binom = binom * (n as i64 - j) as f64 / (j + 1) as f64;
    }
    acc * 2f64.powi(-(n as i32))
}

/// Gram matrices of the three interval families over one discrete
/// circle measure.
#[derive(Debug, Clone)]
pub struct IntervalGramReport {
    /// Symmetrised `S`-family Gram on `x_s = cos(theta_s/2)`; diagonal
    /// should be `kappa_n`.  The symmetrisation makes the half-angle
    /// branch irrelevant.
    pub s: Vec<Vec<f64>>,
    /// `P`-family Gram on `y_s = cos(theta_s)`; diagonal `H_n = u_1...u_n`.
    pub p: Vec<Vec<f64>>,
    /// `Q`-family Gram with the extra weight factor `1 + y_s`; diagonal
    /// `2^{2n+1} kappa_{2n+1}`.
    pub q: Vec<Vec<f64>>,
}

/// Evaluate the discrete interval orthogonality for all three families.
/// `S` runs to degree `count`, the split families to `count/2`.
pub fn interval_gram(
    m: &DiscretePointMeasure,
    a: &[f64],
    count: usize,
) -> Result<IntervalGramReport> {
    assert!(a.len() >= count, "need reflection data through a_{count}");
    let s_polys = dgt_family(a, count)?;
    let half = count / 2;
    let (p_polys, q_polys) = split_polys(a, half);

    let mut s = vec![vec![0.0; count + 1]; count + 1];
    let mut p = vec![vec![0.0; half + 1]; half + 1];
    let mut q = vec![vec![0.0; half + 1]; half + 1];
    for (&theta, &rho) in m.angles.iter().zip(&m.weights) {
        let x = (0.5 * theta).cos();
        let y = theta.cos();
        let sv: Vec<f64> = s_polys.iter().map(|poly| poly.eval(x)).collect();
        let sn: Vec<f64> = s_polys.iter().map(|poly| poly.eval(-x)).collect();
        let pv: Vec<f64> = p_polys.iter().map(|poly| horner(poly, y)).collect();
        let qv: Vec<f64> = q_polys.iter().map(|poly| horner(poly, y)).collect();
        for r in 0..=count {
            for c in 0..=r {
                let g = 0.5 * rho * (sv[r] * sv[c] + sn[r] * sn[c]);
                s[r][c] += g;
            }
        }
        for r in 0..=half {
            for c in 0..=r {
                p[r][c] += rho * pv[r] * pv[c];
                q[r][c] += rho * (1.0 + y) * qv[r] * qv[c];
            }
        }
    }
    for r in 0..=count {
        for c in r + 1..=count {
            s[r][c] = s[c][r];
        }
    }
    for r in 0..=half {
        for c in r + 1..=half {
            p[r][c] = p[c][r];
            q[r][c] = q[c][r];
        }
    }
    Ok(IntervalGramReport { s, p, q })
}

/// Closed-form `P`-family recurrence coefficient for the cn case:
/// `u_n = sn^2(w(2n-1)) (1 - dn(2wn)) (1 + dn(2w(n-1))) / 4`.
pub fn explicit_cn_split_u(ctx: &EllipticContext, w: f64, n: usize) -> f64 {
    assert!(n >= 1);
    let n = n as f64;
    let sn = jacobi_sn(w * (2.0 * n - 1.0), ctx);
    sn * sn * (1.0 - jacobi_dn(2.0 * w * n, ctx)) * (1.0 + jacobi_dn(2.0 * w * (n - 1.0), ctx))
        / 4.0
}

/// Closed-form companion:
/// `b_n = (cn(w(2n+1))(1 + dn(2wn)) - cn(w(2n-1))(1 - dn(2wn))) / 2`.
pub fn explicit_cn_split_b(ctx: &EllipticContext, w: f64, n: usize) -> f64 {
    let n = n as f64;
    let dn = jacobi_dn(2.0 * w * n, ctx);
    (jacobi_cn(w * (2.0 * n + 1.0), ctx) * (1.0 + dn)
        - jacobi_cn(w * (2.0 * n - 1.0), ctx) * (1.0 - dn))
        / 2.0
}

/// `k = 1` limit of the `P`-family `u_n`, rational in `q = e^{-2w}`.
pub fn askey_wilson_u(n: usize, q: f64) -> f64 {
    assert!(n >= 1);
    let n = n as i32;
    0.25 * (1.0 - q.powi(n)).powi(2)
        * (1.0 - q.powi(2 * n - 1)).powi(2)
        * (1.0 + q.powi(n - 1)).powi(2)
        / ((1.0 + q.powi(2 * n - 1)).powi(2)
            * (1.0 + q.powi(2 * n))
            * (1.0 + q.powi(2 * n - 2)))
}

/// `k = 1` limit of the `P`-family `b_n`.
pub fn askey_wilson_b(n: usize, q: f64) -> f64 {
    let n = n as i32;
    q.powf(n as f64 - 0.5) * (2.0 * (q + 1.0) * q.powi(n) - (1.0 - q) * (1.0 - q.powi(2 * n)))
        / ((1.0 + q.powi(2 * n - 1)) * (1.0 + q.powi(2 * n + 1)))
}

/// The limiting weight as an infinite `q`-product,
/// `w(x) = prod_{s>=0} (1 + 2x q^{s+1/2} + q^{2s+1}) / (1 - 2x q^{s+1/2} + q^{2s+1})`,
/// truncated once the factors are within rounding of 1.
pub fn askey_wilson_weight(x: f64, q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "base must be in (0,1), got {q}");
    let mut t = q.sqrt();
    let mut prod = 1.0;
    while t >= 1e-17 {
        let t2 = t * t;
        prod *= (1.0 + 2.0 * x * t + t2) / (1.0 - 2.0 * x * t + t2);
        t *= q;
    }
    prod
}

/// What the `k = 1` cross-check produced.
#[derive(Debug, Clone)]
pub struct AskeyWilsonReport {
    pub q: f64,
    /// `1/sqrt(k')` at the modulus whose nome is `sqrt(q)` — the exact
    /// proportionality constant between the product weight and `dn`.
    pub constant: f64,
    /// Largest relative deviation of `weight(cos 2theta) / dn(2K theta/pi)`
    /// from `constant` over the grid.
    pub max_ratio_deviation: f64,
    /// Largest `|u_n - display|` over `n <= 8`, sech-sequence route.
    pub max_u_margin: f64,
    /// Largest `|b_n - display|` over `n <= 8`.
    pub max_b_margin: f64,
}

/// Check the two faces of the `k = 1` limit: the rational displays for
/// the `P`-family recurrence, and the product weight's identity with
/// `dn` at the modulus of nome `sqrt(q)`.
///
/// The weight comparison term-matches the two products: the weight has
/// factors in `q^{s+1/2} = (sqrt(q))^{2s+1}` and the `dn` product has
/// factors in `nome^{2s+1}`, so the nome must be `sqrt(q)` (reading the
/// substitution the other way round turns the `dn` product into the
/// weight).
pub fn askey_wilson_limit_check(w: f64, m_grid: usize) -> Result<AskeyWilsonReport> {
    if w <= 0.0 {
        return Err(Error::domain(format!("step must be positive, got {w}")));
    }
    let q = (-2.0 * w).exp();

    let a = crate::hyperbolic::hyp_reflections(18, w);
    let (p_rec, _) = split_pq_recurrences(&a);
    let mut max_u_margin = 0.0f64;
    let mut max_b_margin = 0.0f64;
    for n in 1..=8 {
        max_u_margin = max_u_margin.max((p_rec.u[n] - askey_wilson_u(n, q)).abs());
    }
    for n in 0..=8 {
        max_b_margin = max_b_margin.max((p_rec.b[n] - askey_wilson_b(n, q)).abs());
    }

    let ctx = EllipticContext::from_nome(q.sqrt())?;
    let constant = 1.0 / ctx.k_prime.sqrt();
    let mut max_ratio_deviation = 0.0f64;
    for j in 0..m_grid {
        let theta = 0.5 * PI * j as f64 / m_grid as f64;
        let dn = jacobi_dn(2.0 * ctx.big_k * theta / PI, &ctx);
        let ratio = askey_wilson_weight((2.0 * theta).cos(), q) / dn;
        max_ratio_deviation = max_ratio_deviation.max(((ratio - constant) / constant).abs());
    }
    Ok(AskeyWilsonReport {
        q,
        constant,
        max_ratio_deviation,
        max_u_margin,
        max_b_margin,
    })
}

/// CSV table of the interval recurrence data: `n, v, kappa, u, b, H`
/// (`u`, `b`, `H` from the `P` family; blank once the reflection data
/// runs out).
pub fn recurrence_table_csv(a: &[f64], count: usize) -> String {
    let v = v_coeffs(a);
    let kappa = kappa_products(&v);
    let (p_rec, _) = split_pq_recurrences(a);
    let mut out = String::from("n,v,u,b,kappa,H\n");
    let mut big_h = 1.0;
    for n in 0..=count.min(a.len()) {
        let u_cell = if n >= 1 && n < p_rec.u.len() {
            big_h *= p_rec.u[n];
            format!("{:.16e}", p_rec.u[n])
        } else {
            String::new()
        };
        let b_cell = p_rec
            .b
            .get(n)
            .map_or_else(String::new, |x| format!("{x:.16e}"));
        let h_cell = if n == 0 || (n >= 1 && n < p_rec.u.len()) {
            format!("{big_h:.16e}")
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{n},{:.16e},{u_cell},{b_cell},{:.16e},{h_cell}\n",
            v[n], kappa[n]
        ));
    }
    out
}

/// The same table as JSON (`null` where the data runs out).
pub fn recurrence_table_json(a: &[f64], count: usize) -> serde_json::Value {
    let v = v_coeffs(a);
    let kappa = kappa_products(&v);
    let (p_rec, _) = split_pq_recurrences(a);
    let mut rows = Vec::new();
    let mut big_h = 1.0;
    for n in 0..=count.min(a.len()) {
        let u = (n >= 1 && n < p_rec.u.len()).then(|| {
            big_h *= p_rec.u[n];
            p_rec.u[n]
        });
        rows.push(serde_json::json!({
            "n": n,
            "v": v[n],
            "kappa": kappa[n],
            "u": u,
            "b": p_rec.b.get(n).copied(),
            "H": (n == 0 || u.is_some()).then_some(big_h),
        }));
    }
    serde_json::json!({ "schema": 1, "rows": rows })
}
