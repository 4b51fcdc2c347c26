//! Real Jacobi elliptic functions, complete integrals, and nome/modulus
//! conversions.
//!
//! Everything in the crate funnels through [`EllipticContext`], which
//! freezes a modulus `k` together with the derived quantities that are
//! expensive or delicate to recompute: the complementary modulus
//! `k' = sqrt(1 - k^2)`, the quarter-periods `K = K(k)` and `K' = K(k')`,
//! and the nome `q = exp(-pi K'/K)`.
//!
//! Two construction routes are provided.  [`EllipticContext::new`] starts
//! from `k` and uses the arithmetic-geometric mean for the integrals.
//! [`EllipticContext::from_nome`] starts from `q` and recovers the moduli
//! from Jacobi theta ratios; for `q` above `exp(-pi)` it first maps to the
//! complementary nome `exp(-pi^2 / ln(1/q))` and swaps the roles of `k`
//! and `k'`.  The swap matters: near `q -> 1` the modulus `k` rounds to
//! `1.0` in `f64`, but `k'` and both quarter-periods remain accurately
//! representable, and every consumer in this crate that operates in that
//! regime reads the surviving fields.  Each quarter-period is always an
//! AGM of the *other* modulus, so the rounding of `k` itself is harmless.
//!
//! The point evaluator `sn/cn/dn` is a descending-AGM ladder with a
//! backward recurrence (the classical real-argument scheme), wrapped in
//! range reduction modulo `4K` so that the quarter-period symmetries and
//! periodicities hold by construction, not by accident of rounding:
//! `sn` is odd, `cn(u + 2K) = -cn(u)`, `dn(u + 2K) = dn(u)`.

use crate::dd::Dd;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Arithmetic-geometric mean of two positive numbers.
///
/// Converges quadratically; 64 iterations is a very generous cap (for
/// arguments in `[1e-300, 1e300]` about 10 suffice).
fn agm(mut a: f64, mut g: f64) -> f64 {
    for _ in 0..64 {
        let an = 0.5 * (a + g);
        let gn = (a * g).sqrt();
        if (a - g).abs() <= 4.0 * f64::EPSILON * a.abs() {
            break;
        }
        a = an;
        g = gn;
    }
    0.5 * (a + g)
}

/// A modulus `0 < k < 1` with its derived constants.
///
/// Invariants maintained by the constructors:
/// `k^2 + k_prime^2 = 1` (up to rounding, with whichever of the two is
/// small held accurately), `big_k = K(k)`, `big_k_prime = K(k')`, and
/// `nome_q = exp(-pi * big_k_prime / big_k)`, strictly increasing in `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticContext {
    pub k: f64,
    pub k_prime: f64,
    pub big_k: f64,
    pub big_k_prime: f64,
    pub nome_q: f64,
}

impl EllipticContext {
    /// Build a context from the modulus.
    ///
    /// `K(k) = pi / (2 * agm(1, k'))`, and the complementary integral
    /// uses `k` itself, so each integral is accurate even when the other
    /// modulus is within an ulp of `1`.
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && 0.0 < k && k < 1.0) {
            return Err(Error::domain(format!(
                "modulus k must lie strictly inside (0, 1), got {k}"
            )));
        }
        let k_prime = ((1.0 - k) * (1.0 + k)).sqrt();
        let big_k = PI / (2.0 * agm(1.0, k_prime));
        let big_k_prime = PI / (2.0 * agm(1.0, k));
        let nome_q = (-PI * big_k_prime / big_k).exp();
        Ok(EllipticContext {
            k,
            k_prime,
            big_k,
            big_k_prime,
            nome_q,
        })
    }

    /// Build a context from the nome `0 < q < 1`.
    ///
    /// For `q <= exp(-pi)` the moduli come straight from theta ratios,
    ///
    /// ```text
    /// k = (theta_2 / theta_3)^2,    k' = (theta_4 / theta_3)^2,
    /// ```
    ///
    /// whose series converge fast and without cancellation in that range.
    /// For larger `q` the complementary nome `q* = exp(-pi^2/ln(1/q))`
    /// (which is then below `exp(-pi)`) is expanded instead and the
    /// moduli and quarter-periods are swapped.  The stored `nome_q` is
    /// the exact input either way.
    pub fn from_nome(q: f64) -> Result<Self> {
        if !(q.is_finite() && 0.0 < q && q < 1.0) {
            return Err(Error::domain(format!(
                "nome q must lie strictly inside (0, 1), got {q}"
            )));
        }
        let exp_neg_pi = (-PI).exp();
        if q <= exp_neg_pi {
            Ok(Self::from_small_nome(q))
        } else {
            let log_inv = -q.ln(); // pi K'/K, in (0, pi)
            let q_comp = (-(PI * PI) / log_inv).exp();
            let c = Self::from_small_nome(q_comp);
            Ok(EllipticContext {
                k: c.k_prime,
                k_prime: c.k,
                big_k: c.big_k_prime,
                big_k_prime: c.big_k,
                nome_q: q,
            })
        }
    }

    /// Theta-ratio expansion, valid (accurate) for `q <= exp(-pi)`.
    fn from_small_nome(q: f64) -> Self {
        // theta_2 = 2 q^{1/4} sum q^{n(n+1)}, theta_3/theta_4 = 1 +- 2 sum (+-q)^{n^2}
        let mut t2 = 0.0;
        let mut t3 = 1.0;
        let mut t4 = 1.0;
        for n in 0..32u32 {
            let e2 = q.powi((n * (n + 1)) as i32);
            let e3 = q.powi(((n + 1) * (n + 1)) as i32);
            t2 += e2;
            t3 += 2.0 * e3;
            t4 += if n % 2 == 0 { -2.0 * e3 } else { 2.0 * e3 };
            if e3 < 1e-320 {
                break;
            }
        }
        t2 *= 2.0 * q.powf(0.25);
        let k = (t2 / t3) * (t2 / t3);
        let k_prime = (t4 / t3) * (t4 / t3);
        let big_k = PI / (2.0 * agm(1.0, k_prime));
        let big_k_prime = PI / (2.0 * agm(1.0, k));
        EllipticContext {
            k,
            k_prime,
            big_k,
            big_k_prime,
            nome_q: q,
        }
    }
}

/// Solve `pi * K(k') / K(k) = w` for the modulus and return its context.
///
/// This is nothing but `from_nome(exp(-w))`; the function exists because
/// the lattice step `w` is the natural input everywhere else in the
/// crate, and because inverting through the nome keeps full accuracy for
/// small `w`, where `k` itself is no longer representable away from `1`.
pub fn solve_k_from_w(w: f64) -> Result<EllipticContext> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain(format!("w must be positive, got {w}")));
    }
    EllipticContext::from_nome((-w).exp())
}

/// Descending-AGM evaluator for `(sn, cn, dn)(u)` with `emc = k'^2`.
///
/// Classical real-argument scheme: run the AGM on `(1, k')`, evaluate
/// circular functions of the rescaled argument at the top of the ladder,
/// and descend with the Gauss transformation.  The stopping constant is
/// `sqrt(eps)`; quadratic convergence makes the result accurate to about
/// `eps`.  The identity `sn^2 + cn^2 = 1` holds to rounding by
/// construction (`sn = 1/sqrt(1 + c^2)`, `cn = c * sn`).
pub(crate) fn sncndn_raw(u: f64, emc: f64) -> (f64, f64, f64) {
    const CA: f64 = 1.0e-8;
    if emc == 0.0 {
        // k = 1: sn = tanh, cn = dn = sech.
        let cn = 1.0 / u.cosh();
        return (u.tanh(), cn, cn);
    }
    let mut emc = emc;
    let mut a = 1.0_f64;
    let mut dn = 1.0_f64;
    let mut em = [0.0_f64; 16];
    let mut en = [0.0_f64; 16];
    let mut l = 0usize;
    let mut c = 0.0_f64;
    for i in 0..16 {
        l = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= CA * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let u = c * u;
    let mut sn = u.sin();
    let mut cn = u.cos();
    if sn != 0.0 {
        let mut aa = cn / sn;
        c *= aa;
        for i in (0..=l).rev() {
            let b = em[i];
            aa *= c;
            c *= dn;
            dn = (en[i] + aa) / (b + aa);
            aa = c / b;
        }
        let mag = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn < 0.0 { -mag } else { mag };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Reduce `u` modulo `4K` and evaluate on `[0, K]`, restoring signs from
/// the quarter-period symmetries.  Returns `(sn, cn, dn)`.
fn sncndn(u: f64, ctx: &EllipticContext) -> (f64, f64, f64) {
    let kk = ctx.big_k;
    let four_k = 4.0 * kk;
    let mut r = u % four_k;
    if r < 0.0 {
        r += four_k;
    }
    let (v, sign_sn, sign_cn) = if r <= kk {
        (r, 1.0, 1.0)
    } else if r <= 2.0 * kk {
        (2.0 * kk - r, 1.0, -1.0)
    } else if r <= 3.0 * kk {
        (r - 2.0 * kk, -1.0, -1.0)
    } else {
        (four_k - r, -1.0, 1.0)
    };
    let (sn, cn, dn) = sncndn_raw(v, ctx.k_prime * ctx.k_prime);
    (sign_sn * sn, sign_cn * cn, dn)
}

pub fn jacobi_sn(u: f64, ctx: &EllipticContext) -> f64 {
    sncndn(u, ctx).0
}

pub fn jacobi_cn(u: f64, ctx: &EllipticContext) -> f64 {
    sncndn(u, ctx).1
}

pub fn jacobi_dn(u: f64, ctx: &EllipticContext) -> f64 {
    sncndn(u, ctx).2
}

/// All three Jacobi functions at once (one ladder descent).
pub fn jacobi_sncndn(u: f64, ctx: &EllipticContext) -> (f64, f64, f64) {
    sncndn(u, ctx)
}

/// Double-double port of the descending ladder, used to seed the
/// extended-precision moment constructions.  No elliptic range
/// reduction (the circular reduction inside [`Dd::sin_cos`] suffices
/// for the moderate arguments this is called with), and no `emc == 0`
/// branch: the extended path is only taken for interior moduli.
pub(crate) fn jacobi_sncndn_dd(u: f64, k: f64) -> (Dd, Dd, Dd) {
    const CA: f64 = 1.0e-16;
    let kd = Dd::from_f64(k);
    let mut emc = (Dd::ONE - kd) * (Dd::ONE + kd);
    let mut a = Dd::ONE;
    let mut dn = Dd::ONE;
    let mut em = [Dd::ZERO; 24];
    let mut en = [Dd::ZERO; 24];
    let mut l = 0usize;
    let mut c = Dd::ZERO;
    for i in 0..24 {
        l = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = (a + emc) * Dd::from_f64(0.5);
        if (a - emc).abs().to_f64() <= CA * a.to_f64() {
            break;
        }
        emc = emc * a;
        a = c;
    }
    let u = c * u;
    let (mut sn, mut cn) = u.sin_cos();
    if sn.to_f64() != 0.0 {
        let mut aa = cn / sn;
        c = c * aa;
        for i in (0..=l).rev() {
            let b = em[i];
            aa = aa * c;
            c = c * dn;
            dn = (en[i] + aa) / (b + aa);
            aa = c / b;
        }
        let mag = Dd::ONE / (c * c + Dd::ONE).sqrt();
        sn = if sn.to_f64() < 0.0 { -mag } else { mag };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// A partial sum together with a certified bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Fourier-series evaluation of `cn`:
///
/// ```text
/// cn(u) = (2 pi / (k K)) * sum_{s>=1} q^{s-1/2}/(1 + q^{2s-1}) * cos((2s-1) pi u / (2K))
/// ```
///
/// This shares no code with the AGM evaluator and serves as an
/// independent oracle for it.  The tail bound is the crude geometric
/// estimate `2 * (pi/(kK)) * q^{terms - 1/2} / (1 - q)`.
pub fn fourier_oracle_cn(u: f64, ctx: &EllipticContext, terms: usize) -> OracleValue {
    let q = ctx.nome_q;
    let pre = PI / (ctx.k * ctx.big_k);
    let omega = PI * u / (2.0 * ctx.big_k);
    let mut value = 0.0;
    for s in 1..=terms {
        let half_odd = s as f64 - 0.5;
        let coeff = q.powf(half_odd) / (1.0 + q.powf(2.0 * half_odd));
        value += coeff * (omega * (2.0 * s as f64 - 1.0)).cos();
    }
    value *= 2.0 * pre;
    let tail_bound = 2.0 * pre * q.powf(terms as f64 - 0.5) / (1.0 - q);
    OracleValue { value, tail_bound }
}

/// Fourier-series evaluation of `dn`:
///
/// ```text
/// dn(u) = pi/(2K) + (2 pi / K) * sum_{s>=1} q^s/(1 + q^{2s}) * cos(s pi u / K)
/// ```
pub fn fourier_oracle_dn(u: f64, ctx: &EllipticContext, terms: usize) -> OracleValue {
    let q = ctx.nome_q;
    let pre = PI / ctx.big_k;
    let omega = PI * u / ctx.big_k;
    let mut value = 0.5;
    for s in 1..=terms {
        let qs = q.powi(s as i32);
        value += 2.0 * qs / (1.0 + qs * qs) * (omega * s as f64).cos();
    }
    value *= pre;
    let tail_bound = 2.0 * pre * q.powi(terms as i32) / (1.0 - q);
    OracleValue { value, tail_bound }
}

/// Fourier-series evaluation of `sn`:
///
/// ```text
/// sn(u) = (2 pi / (k K)) * sum_{s>=1} q^{s-1/2}/(1 - q^{2s-1}) * sin((2s-1) pi u / (2K))
/// ```
pub fn fourier_oracle_sn(u: f64, ctx: &EllipticContext, terms: usize) -> OracleValue {
    let q = ctx.nome_q;
    let pre = PI / (ctx.k * ctx.big_k);
    let omega = PI * u / (2.0 * ctx.big_k);
    let mut value = 0.0;
    for s in 1..=terms {
        let half_odd = s as f64 - 0.5;
        let coeff = q.powf(half_odd) / (1.0 - q.powf(2.0 * half_odd));
        value += coeff * (omega * (2.0 * s as f64 - 1.0)).sin();
    }
    value *= 2.0 * pre;
    let tail_bound = 2.0 * pre * q.powf(terms as f64 - 0.5) / (1.0 - q);
    OracleValue { value, tail_bound }
}

/// Principal transformation of order `2n` of the modulus: the map
/// `q -> q^{2n}` on nomes.  Returns the transformed context together
/// with the period scale `mu`, where
///
/// ```text
/// K~ = K / (2 n mu),    K~' = K' / mu,
/// k~ = k^{2n} * prod_{r=1}^{n} sn^4((2r-1) K / (2n); k),
/// mu = prod_{r=1}^{n} sn^2((2r-1) K / (2n); k) / sn^2(r K / n; k).
/// ```
///
/// The transformed modulus is computed from the product formula (every
/// factor is a plain `sn` value, no cancellation), and the context is
/// rebuilt from it; the identity `q~ = q^{2n}` is then a theorem about
/// the output, not an input, which makes it a useful acceptance check.
pub fn landen_2n(ctx: &EllipticContext, n: usize) -> Result<(EllipticContext, f64)> {
    if n == 0 {
        return Err(Error::domain("transformation order n must be >= 1"));
    }
    let nf = n as f64;
    let mut k_new = ctx.k.powi(2 * n as i32);
    let mut mu = 1.0;
    for r in 1..=n {
        let s_odd = jacobi_sn((2.0 * r as f64 - 1.0) * ctx.big_k / (2.0 * nf), ctx);
        let s_even = jacobi_sn(r as f64 * ctx.big_k / nf, ctx);
        k_new *= s_odd.powi(4);
        mu *= (s_odd / s_even).powi(2);
    }
    if !(k_new.is_finite() && k_new > 0.0 && k_new < 1.0) {
        return Err(Error::DegenerateTransform(format!(
            "transformed modulus {k_new} left (0, 1)"
        )));
    }
    let new_ctx = EllipticContext::new(k_new)?;
    Ok((new_ctx, mu))
}
