//! Moment sequences sampled from periodic profiles.
//!
//! Every family in this crate fits one template: pick an even, `T`-periodic
//! function `f` whose cosine-series coefficients are nonnegative and sum to
//! one at the origin, then read the trigonometric moments straight off the
//! lattice, `c_n = f(w n)`.  Positivity of the Fourier data makes the Toeplitz
//! determinants positive, so a genuine orthogonality measure exists: point
//! masses `A_s` at `exp(2 pi i w s / T)`, dense on the circle whenever `w / T`
//! is irrational.
//!
//! Besides the two elliptic profiles (`cn` and `dn`, which reproduce the
//! closed-form families elsewhere in the crate) this module ships a
//! triangular-wave profile.  Its reflection coefficients vanish except at
//! rare indices governed by the best rational approximations to `w`, so the
//! monic polynomials keep at most three nonzero monomials.  The
//! continued-fraction utilities at the bottom predict exactly which powers
//! survive.

use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::circle::{levinson_reflections, szego_build, MomentSequence};
use crate::ebc::nearby_rational;
use crate::elliptic::{jacobi_cn, jacobi_dn, EllipticContext};
use crate::error::{Error, Result};
use crate::measures::DiscretePointMeasure;

/// Hard cap on continued-fraction expansion depth.  Forty partial quotients
/// already pin `w` down to better than `1 / fib(40)^2 ~ 1e-16` in the worst
/// (all-ones) case, which is all a double-precision pipeline can use.
pub const MAX_CF_DEPTH: usize = 40;

/// Relative size below which a monomial coefficient of a monic polynomial is
/// treated as numerically zero when counting surviving powers.
pub const SPARSITY_THRESHOLD: f64 = 1e-8;

enum Kind {
    Cn(EllipticContext),
    Dn(EllipticContext),
    /// Triangular wave `f(x) = 1 - 2|x|` on `[-1, 1]`, period 2.
    Magnus,
    /// Explicit cosine-series table: pairs `(m, A_m)` with `m >= 0`.
    Table(Vec<(u64, f64)>),
}

/// An even periodic function with nonnegative Fourier coefficients summing to
/// one, used as a moment profile `c_n = f(w n)`.
pub struct PeriodicProfile {
    period: f64,
    kind: Kind,
}

impl PeriodicProfile {
    /// Profile `f = cn(.; k)`, period `4K`.  Only odd cosine harmonics enter.
    pub fn cn(ctx: &EllipticContext) -> Self {
        PeriodicProfile {
            period: 4.0 * ctx.big_k,
            kind: Kind::Cn(ctx.clone()),
        }
    }

    /// Profile `f = dn(.; k)`, period `2K`.  All harmonics enter, and the
    /// constant term `pi / (2K)` is nonzero.
    pub fn dn(ctx: &EllipticContext) -> Self {
        PeriodicProfile {
            period: 2.0 * ctx.big_k,
            kind: Kind::Dn(ctx.clone()),
        }
    }

    /// The triangular-wave profile (period 2, antiperiodic with period 1).
    pub fn magnus() -> Self {
        PeriodicProfile {
            period: 2.0,
            kind: Kind::Magnus,
        }
    }

    /// Explicit profile from a finite cosine table.  `coefficients` holds
    /// `(harmonic index, A_m)` pairs; indices must be distinct and the values
    /// nonnegative with `A_0 + 2 sum_{m>0} A_m = 1`.
    pub fn table(period: f64, coefficients: &[(u64, f64)]) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::config("period", "must be a positive real number"));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut origin = 0.0;
        for &(m, a) in coefficients {
            if !seen.insert(m) {
                return Err(Error::config(
                    "coefficients",
                    format!("harmonic index {m} listed twice"),
                ));
            }
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::config(
                    "coefficients",
                    format!("coefficient at index {m} must be finite and nonnegative"),
                ));
            }
            origin += if m == 0 { a } else { 2.0 * a };
        }
        if (origin - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "coefficients",
                format!("profile must equal one at the origin, got f(0) = {origin}"),
            ));
        }
        let mut table: Vec<(u64, f64)> = coefficients.to_vec();
        table.sort_unstable_by_key(|&(m, _)| m);
        Ok(PeriodicProfile {
            period,
            kind: Kind::Table(table),
        })
    }

    /// Load a profile from JSON: either `{"builtin": "cn"|"dn", "k": 0.6}`,
    /// `{"builtin": "magnus"}`, or an explicit table
    /// `{"period": 2.0, "coefficients": [[1, 0.4], [3, 0.1]]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::config("profile", format!("invalid JSON: {e}")))?;
        if let Some(tag) = value.get("builtin") {
            let name = tag
                .as_str()
                .ok_or_else(|| Error::config("builtin", "expected a string"))?;
            return match name {
                "magnus" => Ok(PeriodicProfile::magnus()),
                "cn" | "dn" => {
                    let k = value
                        .get("k")
                        .and_then(serde_json::Value::as_f64)
                        .ok_or_else(|| {
                            Error::config("k", "elliptic builtins need a numeric modulus")
                        })?;
                    let ctx = EllipticContext::new(k)?;
                    Ok(if name == "cn" {
                        PeriodicProfile::cn(&ctx)
                    } else {
                        PeriodicProfile::dn(&ctx)
                    })
                }
                other => Err(Error::config(
                    "builtin",
                    format!("unknown builtin profile `{other}`"),
                )),
            };
        }
        let period = value
            .get("period")
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| Error::config("period", "missing or non-numeric"))?;
        let entries = value
            .get("coefficients")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::config("coefficients", "missing or not an array"))?;
        let mut coefficients = Vec::with_capacity(entries.len());
        for entry in entries {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::config("coefficients", "entries must be [index, value]"))?;
            let m = pair[0]
                .as_u64()
                .ok_or_else(|| Error::config("coefficients", "indices must be integers >= 0"))?;
            let a = pair[1]
                .as_f64()
                .ok_or_else(|| Error::config("coefficients", "values must be numbers"))?;
            coefficients.push((m, a));
        }
        PeriodicProfile::table(period, &coefficients)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Short tag for reports: which profile this is.
    pub fn describe(&self) -> &'static str {
        match self.kind {
            Kind::Cn(_) => "cn",
            Kind::Dn(_) => "dn",
            Kind::Magnus => "magnus",
            Kind::Table(_) => "table",
        }
    }

    /// Evaluate the profile by its closed form (not the cosine series).
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Cn(ctx) => jacobi_cn(x, ctx),
            Kind::Dn(ctx) => jacobi_dn(x, ctx),
            Kind::Magnus => {
                // Distance to the nearest even integer, folded into [0, 1].
                let r = x.rem_euclid(2.0);
                let d = if r > 1.0 { 2.0 - r } else { r };
                1.0 - 2.0 * d
            }
            Kind::Table(entries) => {
                let base = TAU / self.period;
                entries
                    .iter()
                    .map(|&(m, a)| {
                        if m == 0 {
                            a
                        } else {
                            2.0 * a * (base * m as f64 * x).cos()
                        }
                    })
                    .sum()
            }
        }
    }

    /// Cosine-series coefficient `A_m` (even in `m`).
    pub fn fourier_coeff(&self, m: i64) -> f64 {
        let m = m.unsigned_abs();
        match &self.kind {
            Kind::Cn(ctx) => {
                if m % 2 == 0 {
                    0.0
                } else {
                    // A_m = (pi / (k K)) q^{m/2} / (1 + q^m), written with
                    // x = q^{m/2} so large harmonics underflow gracefully.
                    let x = ctx.nome_q.powf(m as f64 / 2.0);
                    PI / (ctx.k * ctx.big_k) * x / (1.0 + x * x)
                }
            }
            Kind::Dn(ctx) => {
                if m == 0 {
                    PI / (2.0 * ctx.big_k)
                } else {
                    let x = ctx.nome_q.powi(m as i32);
                    PI / ctx.big_k * x / (1.0 + x * x)
                }
            }
            Kind::Magnus => {
                if m % 2 == 1 {
                    4.0 / (PI * PI * (m * m) as f64)
                } else {
                    0.0
                }
            }
            Kind::Table(entries) => entries
                .iter()
                .find(|&&(idx, _)| idx == m)
                .map_or(0.0, |&(_, a)| a),
        }
    }

    /// Partial cosine series `A_0 + 2 sum_{m=1}^{terms} A_m cos(2 pi m x / T)`.
    /// Used as an independent cross-check of `eval`.
    pub fn fourier_partial_sum(&self, x: f64, terms: usize) -> f64 {
        let base = TAU / self.period;
        let mut acc = self.fourier_coeff(0);
        for m in 1..=terms {
            let a = self.fourier_coeff(m as i64);
            if a != 0.0 {
                acc += 2.0 * a * (base * m as f64 * x).cos();
            }
        }
        acc
    }

    /// Upper bound on the total mass beyond harmonic `s`:
    /// `sum_{|m| > s} A_m`.
    pub fn tail_bound(&self, s: usize) -> f64 {
        match &self.kind {
            Kind::Cn(ctx) => {
                let q = ctx.nome_q;
                2.0 * PI / (ctx.k * ctx.big_k) * q.powf((s + 1) as f64 / 2.0) / (1.0 - q)
            }
            Kind::Dn(ctx) => {
                let q = ctx.nome_q;
                2.0 * PI / ctx.big_k * q.powi(s as i32 + 1) / (1.0 - q)
            }
            Kind::Magnus => {
                // sum_{m > s, m odd} 1/m^2 <= 1/s^2 + 1/(2s).
                let s = s.max(1) as f64;
                8.0 / (PI * PI) * (1.0 / (s * s) + 1.0 / (2.0 * s))
            }
            Kind::Table(entries) => entries
                .iter()
                .filter(|&&(m, _)| m as usize > s)
                .map(|&(_, a)| 2.0 * a)
                .sum(),
        }
    }
}

/// Lattice moments `c_n = f(w n)` together with a resonance warning.
pub struct SchemeMoments {
    pub c: MomentSequence,
    /// Set when `w / T` is within `1e-14` of a rational with denominator up
    /// to a million.  The construction still runs, but the support of the
    /// measure closes up into finitely many points and high-degree
    /// determinants will eventually collapse.
    pub resonant: bool,
}

/// Sample the profile on the lattice `w, 2w, 3w, ...` up to `n_max`.
///
/// The two elliptic builtins route through the extended-precision moment
/// constructors (their determinants decay geometrically, and the downstream
/// Levinson recursion needs the headroom); the triangular and table profiles
/// are benign and stay in plain doubles.
pub fn scheme_moments(profile: &PeriodicProfile, w: f64, n_max: usize) -> Result<SchemeMoments> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain("step w must be positive and finite"));
    }
    let resonant = nearby_rational(w / profile.period, 1_000_000, 1e-14).is_some();
    let c = match &profile.kind {
        Kind::Cn(ctx) => MomentSequence::cn_family(ctx, w, n_max),
        Kind::Dn(ctx) => MomentSequence::dn_family(ctx, w, n_max),
        Kind::Magnus | Kind::Table(_) => {
            let values: Vec<f64> = (0..=n_max).map(|n| profile.eval(w * n as f64)).collect();
            MomentSequence::from_f64(&values)
        }
    };
    Ok(SchemeMoments { c, resonant })
}

/// The orthogonality measure of a profile: mass `A_s` at angle
/// `2 pi w s / T` for every harmonic `|s| <= s_max` with positive weight.
pub fn scheme_measure(profile: &PeriodicProfile, w: f64, s_max: usize) -> DiscretePointMeasure {
    let reach = s_max as i64;
    let mut indices = Vec::new();
    let mut angles = Vec::new();
    let mut weights = Vec::new();
    for s in -reach..=reach {
        let mass = profile.fourier_coeff(s);
        if mass > 0.0 {
            indices.push(s);
            angles.push((TAU * w * s as f64 / profile.period).rem_euclid(TAU));
            weights.push(mass);
        }
    }
    DiscretePointMeasure {
        indices,
        angles,
        weights,
        trunc: s_max,
        tail_bound: profile.tail_bound(s_max),
    }
}

/// Convenience alias for the sparse-polynomial profile.
pub fn magnus_profile() -> PeriodicProfile {
    PeriodicProfile::magnus()
}

/// Exact continued-fraction expansion of a positive rational input.
///
/// The input is either a decimal string (interpreted exactly as
/// `digits / 10^d`) or a fraction `"p/q"`.  For decimal inputs the expansion
/// stops as soon as a convergent denominator `Q` reaches `2 Q^2 > 10^d`:
/// beyond that point the partial quotients of the underlying real number are
/// no longer determined by the given digits.
pub struct ContinuedFractionData {
    /// Partial quotients `q_0, q_1, ...` (`q_0` is the integer part).
    pub quotients: Vec<BigInt>,
    /// Convergents `(P_i, Q_i)` aligned with `quotients`.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// The parsed input as an exact (unreduced) fraction.
    pub numerator: BigInt,
    pub denominator: BigInt,
    /// Expansion stopped because the input's decimal precision ran out.
    pub truncated: bool,
    /// The input is exactly rational and the expansion terminated.
    pub exact: bool,
    /// `10^d` for a `d`-digit decimal input; `None` for `"p/q"` inputs,
    /// which are taken as exact.
    precision: Option<BigInt>,
}

impl ContinuedFractionData {
    /// Whether best-approximation searches with multipliers up to `n` are
    /// certified by the input's precision (`2 n^2 <= 10^d`).
    pub fn certified_for(&self, n: usize) -> bool {
        match &self.precision {
            None => true,
            Some(p) => {
                let n = BigInt::from(n);
                &n * &n * 2 <= *p
            }
        }
    }

    /// The input rounded to a double.
    pub fn value_f64(&self) -> f64 {
        big_to_f64(&self.numerator) / big_to_f64(&self.denominator)
    }
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn parse_positive_ratio(text: &str) -> Result<(BigInt, BigInt, Option<BigInt>)> {
    let bad = |msg: &str| Error::config("w", msg.to_string());
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| bad("fraction numerator is not an integer"))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| bad("fraction denominator is not an integer"))?;
        if num <= BigInt::zero() || den <= BigInt::zero() {
            return Err(bad("fraction must be positive"));
        }
        return Ok((num, den, None));
    }
    let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
    let digits: String = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("expected a decimal number or a fraction p/q"));
    }
    let num: BigInt = digits.parse().expect("digit string parses");
    if num.is_zero() {
        return Err(bad("value must be positive"));
    }
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let precision = den.clone();
    Ok((num, den, Some(precision)))
}

/// Expand `text` as a continued fraction with at most `depth` partial
/// quotients (`depth <= MAX_CF_DEPTH`).
pub fn continued_fraction(text: &str, depth: usize) -> Result<ContinuedFractionData> {
    if depth == 0 || depth > MAX_CF_DEPTH {
        return Err(Error::domain(format!(
            "continued-fraction depth must lie in 1..={MAX_CF_DEPTH}"
        )));
    }
    let (numerator, denominator, precision) = parse_positive_ratio(text)?;

    let mut quotients = Vec::new();
    let mut convergents: Vec<(BigInt, BigInt)> = Vec::new();
    // (P_{-2}, Q_{-2}) = (0, 1) and (P_{-1}, Q_{-1}) = (1, 0).
    let (mut p_prev2, mut q_prev2) = (BigInt::zero(), BigInt::one());
    let (mut p_prev1, mut q_prev1) = (BigInt::one(), BigInt::zero());
    let mut a = numerator.clone();
    let mut b = denominator.clone();
    let mut truncated = false;

    while quotients.len() < depth && !b.is_zero() {
        let q = &a / &b; // floor division: everything here is nonnegative
        let r = &a - &q * &b;
        let p_next = &q * &p_prev1 + &p_prev2;
        let q_next = &q * &q_prev1 + &q_prev2;
        if let Some(prec) = &precision {
            // The integer part is always read exactly off the digits; later
            // quotients are only certified while 2 Q^2 stays within 10^d.
            if !quotients.is_empty() && &q_next * &q_next * 2 > *prec {
                truncated = true;
                break;
            }
        }
        quotients.push(q);
        convergents.push((p_next.clone(), q_next.clone()));
        p_prev2 = p_prev1;
        q_prev2 = q_prev1;
        p_prev1 = p_next;
        q_prev1 = q_next;
        a = b;
        b = r;
    }

    let exact = b.is_zero();
    Ok(ContinuedFractionData {
        quotients,
        convergents,
        numerator,
        denominator,
        truncated,
        exact,
        precision,
    })
}

/// One row of the best-approximation ladder for a step `w`: the multiplier
/// `n`, the nearest integer `m` to `w n`, and the miss `|w n - m|`.
#[derive(Debug, Clone)]
pub struct BestApproximation {
    pub n: u64,
    pub m: u64,
    pub err: f64,
}

/// All multipliers `1..=n` ranked by how well `w n_i` approaches an integer,
/// best first.  Comparisons are exact integer arithmetic on the parsed
/// fraction, so the ranking is reliable even when two misses differ by less
/// than double-precision resolution.  Fails with `ExtendDepth` when the
/// input's decimal precision cannot certify the requested range.
pub fn best_approximations(cf: &ContinuedFractionData, n: usize) -> Result<Vec<BestApproximation>> {
    if !cf.certified_for(n) {
        return Err(Error::ExtendDepth);
    }
    let den = &cf.denominator;
    let mut rows: Vec<(BigInt, u64, u64)> = Vec::with_capacity(n);
    for y in 1..=n as u64 {
        let target = &cf.numerator * y; // w y = target / den
        let m_floor = &target / den;
        let r = &target - &m_floor * den;
        let (m_big, err_big) = if &r * 2u32 > *den {
            (m_floor + 1u32, den - &r)
        } else {
            (m_floor, r)
        };
        let m = m_big
            .to_u64()
            .ok_or_else(|| Error::domain("nearest integer overflows u64"))?;
        rows.push((err_big, y, m));
    }
    // Ties (possible only for rational w) break toward the smaller multiplier.
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(rows
        .into_iter()
        .map(|(err_big, y, m)| BestApproximation {
            n: y,
            m,
            err: big_to_f64(&err_big) / big_to_f64(den),
        })
        .collect())
}

/// Which monomials of the degree-`n` triangular-wave polynomial survive.
#[derive(Debug, Clone)]
pub struct SparsityReport {
    pub n: usize,
    /// Offsets `n - s` of the surviving sub-leading coefficients, largest
    /// magnitude first.
    pub offsets: Vec<usize>,
    /// The coefficient values, aligned with `offsets`.
    pub coefficients: Vec<f64>,
    /// The two best approximation multipliers `n_1, n_2` for this range
    /// (fewer when `n < 2`): the offsets the theory predicts.
    pub predicted: Vec<u64>,
    /// Number of nonzero monomials including the leading power.
    pub survivors: usize,
    /// Largest coefficient magnitude that fell below the threshold.
    pub noise_floor: f64,
    /// The noise floor came within a factor of ten of the threshold, so the
    /// survivor count is not clean.
    pub inconclusive: bool,
}

/// Build the degree-`n` monic polynomial for the triangular-wave profile at
/// step `w` (given as a decimal string or fraction, so the predicted offsets
/// can be computed exactly) and report which powers carry weight.
pub fn magnus_sparsity_check(w_text: &str, n: usize) -> Result<SparsityReport> {
    if n == 0 {
        return Err(Error::domain("sparsity check needs degree n >= 1"));
    }
    let cf = continued_fraction(w_text, MAX_CF_DEPTH)?;
    let ranked = best_approximations(&cf, n)?;
    let predicted: Vec<u64> = ranked.iter().take(2).map(|row| row.n).collect();

    let w = cf.value_f64();
    let moments = scheme_moments(&magnus_profile(), w, n)?;
    let (a, _) = levinson_reflections(&moments.c, n)?;
    let phi = szego_build(&a, n);

    let mut tagged: Vec<(f64, usize)> = Vec::new();
    let mut noise_floor = 0.0f64;
    for (s, &coeff) in phi.coeffs.iter().enumerate().take(n) {
        if coeff.abs() > SPARSITY_THRESHOLD {
            tagged.push((coeff, n - s));
        } else {
            noise_floor = noise_floor.max(coeff.abs());
        }
    }
    tagged.sort_by(|x, y| y.0.abs().partial_cmp(&x.0.abs()).unwrap());
    Ok(SparsityReport {
        n,
        offsets: tagged.iter().map(|&(_, off)| off).collect(),
        coefficients: tagged.iter().map(|&(c, _)| c).collect(),
        predicted,
        survivors: tagged.len() + 1,
        noise_floor,
        inconclusive: noise_floor > SPARSITY_THRESHOLD / 10.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{moments_cn, moments_dn, toeplitz_dets};

    const GOLDEN_50: &str = "0.61803398874989484820458683436563811772030917980576";
    const PI_MINUS_3_50: &str = "0.14159265358979323846264338327950288419716939937510";

    fn ctx06() -> EllipticContext {
        EllipticContext::new(0.6).unwrap()
    }

    #[test]
    fn triangular_wave_shape() {
        let f = magnus_profile();
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(1.0), -1.0);
        assert_eq!(f.eval(-0.25), 0.5);
        // Antiperiodic: f(x + 1) = -f(x), hence 2-periodic.
        for i in 0..40 {
            let x = -3.7 + 0.19 * i as f64;
            assert!((f.eval(x + 1.0) + f.eval(x)).abs() <= 1e-15);
            assert!((f.eval(x + 2.0) - f.eval(x)).abs() <= 1e-15);
            assert!((f.eval(-x) - f.eval(x)).abs() <= 1e-15);
        }
        // Harmonics: 4 / (pi^2 m^2) on odd m only.
        assert_eq!(f.fourier_coeff(0), 0.0);
        assert_eq!(f.fourier_coeff(2), 0.0);
        assert!((f.fourier_coeff(1) - 4.0 / (PI * PI)).abs() <= 1e-16);
        assert!((f.fourier_coeff(-3) - 4.0 / (9.0 * PI * PI)).abs() <= 1e-17);
    }

    #[test]
    fn triangular_wave_fourier_sum_converges() {
        let f = magnus_profile();
        // The series converges like 1/terms; 2000 odd harmonics give ~1e-7
        // at a generic point and the tail bound is a couple of 1e-4.
        let s = f.fourier_partial_sum(0.3, 2000);
        assert!((s - f.eval(0.3)).abs() <= 1e-6, "partial sum {s}");
        let tail = f.tail_bound(2000);
        assert!(tail < 2.1e-4 && tail > 1.9e-4, "tail {tail}");
        for &x in &[0.0, 0.1, 0.45, 0.9, 1.3] {
            assert!((f.fourier_partial_sum(x, 4000) - f.eval(x)).abs() <= f.tail_bound(4000));
        }
    }

    #[test]
    fn builtin_profiles_match_their_evaluators() {
        let ctx = ctx06();
        for (profile, period) in [
            (PeriodicProfile::cn(&ctx), 4.0 * ctx.big_k),
            (PeriodicProfile::dn(&ctx), 2.0 * ctx.big_k),
        ] {
            assert!((profile.period() - period).abs() <= 1e-15);
            for i in 0..25 {
                let x = -2.0 + 0.37 * i as f64;
                let series = profile.fourier_partial_sum(x, 200);
                assert!(
                    (series - profile.eval(x)).abs() <= 1e-10,
                    "{} profile drifted at x = {x}",
                    profile.describe()
                );
            }
            // f(0) = 1 pins the normalisation of the coefficient formulas.
            assert!((profile.fourier_partial_sum(0.0, 400) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn scheme_moments_reproduce_lattice_values() {
        let ctx = ctx06();
        let w = 0.31;
        let cn = scheme_moments(&PeriodicProfile::cn(&ctx), w, 24).unwrap();
        let dn = scheme_moments(&PeriodicProfile::dn(&ctx), w, 24).unwrap();
        assert!(!cn.resonant);
        let oracle_cn = moments_cn(&ctx, w, 24);
        let oracle_dn = moments_dn(&ctx, w, 24);
        for n in 0..=24usize {
            assert_eq!(cn.c.get(n), oracle_cn.get(n));
            assert_eq!(dn.c.get(n), oracle_dn.get(n));
        }
    }

    #[test]
    fn measure_reconstructs_moments_for_elliptic_profiles() {
        let ctx = ctx06();
        let w = 0.31;
        for profile in [PeriodicProfile::cn(&ctx), PeriodicProfile::dn(&ctx)] {
            let mu = scheme_measure(&profile, w, 200);
            assert!(mu.tail_bound < 1e-50);
            assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
            let c = scheme_moments(&profile, w, 24).unwrap().c;
            for n in 0..=24 {
                let recon: f64 = mu
                    .angles
                    .iter()
                    .zip(&mu.weights)
                    .map(|(&th, &rho)| rho * (n as f64 * th).cos())
                    .sum();
                assert!(
                    (recon - c.get(n)).abs() <= 1e-12,
                    "{} moment {n}: {recon} vs {}",
                    profile.describe(),
                    c.get(n)
                );
            }
        }
    }

    #[test]
    fn measure_reconstructs_moments_for_triangular_profile() {
        let f = magnus_profile();
        let w = 0.6180339887498949;
        let s_max = 2000;
        let mu = scheme_measure(&f, w, s_max);
        // Only odd harmonics carry mass.
        assert!(mu.indices.iter().all(|s| s % 2 != 0));
        let tail = mu.tail_bound;
        assert!((mu.total_mass() - 1.0).abs() <= tail);
        let c = scheme_moments(&f, w, 20).unwrap().c;
        for n in 0..=20 {
            let recon: f64 = mu
                .angles
                .iter()
                .zip(&mu.weights)
                .map(|(&th, &rho)| rho * (n as f64 * th).cos())
                .sum();
            assert!(
                (recon - c.get(n)).abs() <= tail,
                "moment {n}: {recon} vs {} (tail {tail})",
                c.get(n)
            );
        }
    }

    #[test]
    fn determinants_stay_positive_for_all_builtins() {
        let ctx = ctx06();
        for profile in [
            PeriodicProfile::cn(&ctx),
            PeriodicProfile::dn(&ctx),
            magnus_profile(),
        ] {
            let c = scheme_moments(&profile, 0.31, 12).unwrap().c;
            let dets = toeplitz_dets(&c, 12).unwrap();
            for (i, d) in dets.iter().enumerate() {
                assert!(*d > 0.0, "{} det {i} = {d}", profile.describe());
            }
        }
    }

    #[test]
    fn resonance_flag_detects_rational_steps() {
        let ctx = ctx06();
        let profile = PeriodicProfile::cn(&ctx);
        let resonant = scheme_moments(&profile, profile.period() * 3.0 / 7.0, 4).unwrap();
        assert!(resonant.resonant);
        let clean = scheme_moments(&profile, 0.31, 4).unwrap();
        assert!(!clean.resonant);
        assert!(scheme_moments(&profile, -1.0, 4).is_err());
    }

    #[test]
    fn table_profiles_with_finite_support_collapse() {
        // A pure cosine is a two-point measure: the recursion terminates
        // with a reflection coefficient on the boundary, and the raw
        // determinants vanish from size three onward.
        let f = PeriodicProfile::table(2.0, &[(1, 0.5)]).unwrap();
        assert!((f.eval(0.25) - (PI * 0.25).cos()).abs() <= 1e-15);
        let c = scheme_moments(&f, 0.31, 6).unwrap().c;
        match levinson_reflections(&c, 6) {
            Err(Error::PositivityLoss { index }) => assert!(index <= 2, "late stop at {index}"),
            other => panic!("two-atom profile should terminate: {other:?}"),
        }
        let dets = toeplitz_dets(&c, 4).unwrap();
        assert!(dets[2] > 0.5);
        assert!(dets[3].abs() <= 1e-12 && dets[4].abs() <= 1e-12);
        // The constant profile is a single atom at z = 1: it dies at once.
        let point = PeriodicProfile::table(2.0, &[(0, 1.0)]).unwrap();
        let c = scheme_moments(&point, 0.31, 4).unwrap().c;
        assert!(matches!(
            levinson_reflections(&c, 4),
            Err(Error::PositivityLoss { index: 0 })
        ));
        // tail_bound is exact for tables.
        assert_eq!(f.tail_bound(0), 1.0);
        assert_eq!(f.tail_bound(1), 0.0);
    }

    #[test]
    fn json_profiles_validate_their_input() {
        let f = PeriodicProfile::from_json(r#"{"builtin": "cn", "k": 0.6}"#).unwrap();
        assert_eq!(f.describe(), "cn");
        assert!((f.eval(0.31) - jacobi_cn(0.31, &ctx06())).abs() <= 1e-15);
        assert_eq!(
            PeriodicProfile::from_json(r#"{"builtin": "magnus"}"#)
                .unwrap()
                .describe(),
            "magnus"
        );

        let table = PeriodicProfile::from_json(
            r#"{"period": 3.0, "coefficients": [[0, 0.5], [2, 0.25]]}"#,
        )
        .unwrap();
        assert_eq!(table.describe(), "table");
        assert!((table.eval(0.0) - 1.0).abs() <= 1e-15);

        for bad in [
            "not json",
            r#"{"builtin": "sn"}"#,
            r#"{"builtin": "cn"}"#,
            r#"{"period": -1.0, "coefficients": [[0, 1.0]]}"#,
            r#"{"period": 2.0, "coefficients": [[0, 0.9]]}"#,
            r#"{"period": 2.0, "coefficients": [[0, 0.5], [0, 0.25]]}"#,
            r#"{"period": 2.0, "coefficients": [[1, -0.5], [0, 2.0]]}"#,
            r#"{"period": 2.0, "coefficients": [[0.5, 1.0]]}"#,
        ] {
            assert!(
                matches!(PeriodicProfile::from_json(bad), Err(Error::Config { .. })),
                "accepted bad profile {bad}"
            );
        }
    }

    #[test]
    fn continued_fraction_of_exact_rationals() {
        let cf = continued_fraction("1/3", 10).unwrap();
        assert!(cf.exact && !cf.truncated);
        let q: Vec<i64> = cf.quotients.iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(q, vec![0, 3]);
        assert_eq!(cf.convergents.last().unwrap().1.to_i64().unwrap(), 3);

        // A terminating decimal reduces cleanly: 0.25 = [0; 4].
        let quarter = continued_fraction("0.25", 10).unwrap();
        assert!(quarter.exact);
        let q: Vec<i64> = quarter
            .quotients
            .iter()
            .map(|x| x.to_i64().unwrap())
            .collect();
        assert_eq!(q, vec![0, 4]);

        assert!(continued_fraction("abc", 10).is_err());
        assert!(continued_fraction("0", 10).is_err());
        assert!(continued_fraction("-0.5", 10).is_err());
        assert!(continued_fraction("1/3", 0).is_err());
        assert!(continued_fraction("1/3", MAX_CF_DEPTH + 1).is_err());
    }

    #[test]
    fn continued_fraction_golden_is_all_ones() {
        let cf = continued_fraction(GOLDEN_50, MAX_CF_DEPTH).unwrap();
        assert!(!cf.exact && !cf.truncated);
        assert_eq!(cf.quotients.len(), MAX_CF_DEPTH);
        assert!(cf.quotients[0].is_zero());
        assert!(cf.quotients[1..].iter().all(|q| q.is_one()));
        // Convergent denominators are the Fibonacci numbers.
        let mut fib = (1i64, 1i64);
        for (_, q) in &cf.convergents {
            assert_eq!(q.to_i64().unwrap(), fib.0);
            fib = (fib.1, fib.0 + fib.1);
        }
    }

    #[test]
    fn continued_fraction_recovers_pi_quotients() {
        let cf = continued_fraction(PI_MINUS_3_50, MAX_CF_DEPTH).unwrap();
        let q: Vec<i64> = cf
            .quotients
            .iter()
            .take(5)
            .map(|x| x.to_i64().unwrap())
            .collect();
        assert_eq!(q, vec![0, 7, 15, 1, 292]);
    }

    #[test]
    fn short_decimals_truncate_instead_of_inventing_quotients() {
        // Fifteen digits certify convergent denominators only up to
        // ~2.2e7 ~ fib(37), so the expansion must stop early and say so.
        let cf = continued_fraction("0.618033988749895", MAX_CF_DEPTH).unwrap();
        assert!(cf.truncated && !cf.exact);
        assert!(cf.quotients.len() < MAX_CF_DEPTH);
        assert!(cf.quotients[1..].iter().all(|q| q.is_one()));
    }

    #[test]
    fn best_approximations_golden_ladder() {
        let cf = continued_fraction(GOLDEN_50, MAX_CF_DEPTH).unwrap();
        let rows = best_approximations(&cf, 20).unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!((rows[0].n, rows[0].m), (13, 8));
        assert_eq!((rows[1].n, rows[1].m), (8, 5));
        assert!((rows[0].err - 0.0344).abs() <= 1e-3);
        assert!((rows[1].err - 0.0557).abs() <= 1e-3);
        // Strictly increasing misses, and the multipliers are a permutation
        // of 1..=20.
        for pair in rows.windows(2) {
            assert!(pair[0].err < pair[1].err);
        }
        let mut seen: Vec<u64> = rows.iter().map(|r| r.n).collect();
        seen.sort_unstable();
        assert_eq!(seen, (1..=20).collect::<Vec<_>>());
    }

    #[test]
    fn best_approximation_head_is_a_convergent_denominator() {
        let cf = continued_fraction(GOLDEN_50, MAX_CF_DEPTH).unwrap();
        for n in [1usize, 2, 5, 13, 20, 50, 120, 200] {
            let rows = best_approximations(&cf, n).unwrap();
            let best_den = cf
                .convergents
                .iter()
                .map(|(_, q)| q.to_u64().unwrap())
                .filter(|&q| q as usize <= n)
                .max()
                .unwrap();
            assert_eq!(rows[0].n, best_den, "head at range {n}");
        }
    }

    #[test]
    fn best_approximations_match_float_brute_force() {
        let cf = continued_fraction(GOLDEN_50, MAX_CF_DEPTH).unwrap();
        let w = cf.value_f64();
        let rows = best_approximations(&cf, 200).unwrap();
        // Independent check in plain floating point: same argmin, and the
        // reported misses agree with |w n - round(w n)|.
        let float_best = (1..=200u64)
            .min_by(|&x, &y| {
                let ex = (w * x as f64 - (w * x as f64).round()).abs();
                let ey = (w * y as f64 - (w * y as f64).round()).abs();
                ex.partial_cmp(&ey).unwrap()
            })
            .unwrap();
        assert_eq!(rows[0].n, float_best);
        for row in &rows {
            let direct = (w * row.n as f64 - row.m as f64).abs();
            assert!((row.err - direct).abs() <= 1e-9);
        }
    }

    #[test]
    fn best_approximations_demand_enough_precision() {
        let cf = continued_fraction("0.618034", MAX_CF_DEPTH).unwrap();
        assert!(cf.truncated);
        assert!(best_approximations(&cf, 500).is_ok());
        assert!(matches!(
            best_approximations(&cf, 1000),
            Err(Error::ExtendDepth)
        ));
    }

    #[test]
    fn golden_step_polynomial_keeps_three_monomials() {
        let report = magnus_sparsity_check(GOLDEN_50, 20).unwrap();
        assert_eq!(report.survivors, 3);
        assert!(!report.inconclusive, "noise floor {}", report.noise_floor);
        assert_eq!(report.offsets, vec![13, 8]);
        assert_eq!(report.predicted, vec![13, 8]);
        // Frozen values: the two surviving coefficients sit at z^7 and z^12.
        assert!((report.coefficients[0] + 0.61803).abs() <= 1e-5);
        assert!((report.coefficients[1] - 0.38197).abs() <= 1e-5);
    }

    #[test]
    fn sparsity_offsets_follow_best_approximations() {
        let cf = continued_fraction(GOLDEN_50, MAX_CF_DEPTH).unwrap();
        for n in 2..=50 {
            let report = magnus_sparsity_check(GOLDEN_50, n).unwrap();
            assert!(report.survivors <= 3, "degree {n}: {:?}", report.offsets);
            assert!(!report.inconclusive, "degree {n}");
            for off in &report.offsets {
                assert!(
                    report.predicted.contains(&(*off as u64)),
                    "degree {n}: stray offset {off} (predicted {:?})",
                    report.predicted
                );
            }
            // The constant coefficient survives exactly when the degree
            // itself is a best-approximation multiplier, i.e. the reflection
            // coefficient a_{n-1} is nonzero only at those degrees.
            let ranked = best_approximations(&cf, n).unwrap();
            let predicted_hit = ranked.iter().take(2).any(|row| row.n as usize == n);
            let constant_survives = report.offsets.contains(&n);
            assert_eq!(constant_survives, predicted_hit, "degree {n}");
        }
    }
}
