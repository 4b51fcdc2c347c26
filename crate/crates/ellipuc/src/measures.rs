//! Discrete orthogonality measures on the unit circle.
//!
//! Both elliptic families are orthogonal with respect to a purely
//! atomic measure whose support is *dense* on the circle for generic
//! step `w`: the atoms sit at
//!
//! ```text
//! cn family:  z_s = exp(i pi w (s - 1/2) / K),   rho_s = (pi/(kK)) / (q^{s-1/2} + q^{-s+1/2}),
//! dn family:  z_s = exp(i pi w s / K),           rho_s = (pi/K)  / (q^s + q^{-s}),
//! ```
//!
//! with `s` running over the integers and `q` the nome.  The weights
//! decay geometrically in `|s|` (ratio approaching `q`), so bilateral
//! sums truncate with a certified tail, while the angles `pi w s / K`
//! fill the circle densely whenever `w / K` is irrational.
//!
//! [`moment_from_measure`] and [`gram_check`] close the loop: the
//! truncated measure reproduces the moment sequences `cn(wn)` / `dn(wn)`
//! and orthogonalises the polynomial families built in
//! [`crate::circle`], diagonal equal to `h_n`.

use crate::circle::MonicCirclePolynomial;
use crate::elliptic::EllipticContext;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Default target for the truncation tail bound (see
/// [`truncation_for_tail`]).
pub const DEFAULT_TAIL_EPS: f64 = 1e-14;

/// A finite truncation of one of the bilateral atomic measures.
///
/// Angles are reduced to the canonical chart `[0, 2pi)` so that gap and
/// density statistics are well defined.  Weights are stored as computed;
/// note that far atoms underflow `f64` (the true weight drops below the
/// smallest subnormal near `|s| ~ 450` at `q ~ 0.03`), which is harmless
/// for quadrature but means positivity should be asserted over the
/// operational range `S <= 200`, not arbitrarily far out.
#[derive(Debug, Clone)]
pub struct DiscretePointMeasure {
    /// Atom indices `s`, in ascending order.
    pub indices: Vec<i64>,
    /// Canonical angles `theta_s` of the atoms `z_s = e^{i theta_s}`.
    pub angles: Vec<f64>,
    /// Atom masses `rho_s`, aligned with `indices`.
    pub weights: Vec<f64>,
    /// Truncation parameter `S` used to build the index window.
    pub trunc: usize,
    /// Certified bound on the total mass left outside the window.
    pub tail_bound: f64,
}

impl DiscretePointMeasure {
    /// Number of atoms retained.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Total retained mass; within `tail_bound` of `c_0 = 1`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Atoms as complex points on the unit circle.
    pub fn points(&self) -> Vec<Complex64> {
        self.angles
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect()
    }

    /// CSV export, columns `s,angle,weight`, one atom per row.
    pub fn csv(&self) -> String {
        let mut out = String::from("s,angle,weight\n");
        for ((&s, &angle), &weight) in self.indices.iter().zip(&self.angles).zip(&self.weights) {
            out.push_str(&format!("{s},{angle:.16e},{weight:.16e}\n"));
        }
        out
    }

    /// JSON export with the same columns plus the truncation metadata.
    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "s": self.indices,
            "angle": self.angles,
            "weight": self.weights,
            "trunc": self.trunc,
            "tail_bound": self.tail_bound,
        })
    }
}

fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself when theta is a tiny negative
    // number; fold that representative back to 0.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Weight profile shared by the cn-type windows: `1/(x + 1/x)` with
/// `x = q^e`, evaluated in the order that keeps it finite for large `e`.
fn bilateral_weight(q: f64, e: f64, scale: f64) -> f64 {
    let x = q.powf(e);
    scale * x / (1.0 + x * x)
}

/// The cn-family measure truncated to `2S` atoms, `s = -S+1 ..= S`.
///
/// Atoms `z_s = exp(i pi w (s - 1/2) / K)` carry masses
/// `rho_s = (pi/(kK)) / (q^{s-1/2} + q^{-s+1/2})`; the window is
/// symmetric under `s -> 1-s`, and the weight at `s` and `1-s` is the
/// same number (the code computes each mass once and mirrors it, so the
/// symmetry holds bitwise).  The discarded tail is bounded by
/// `(2 pi/(kK)) q^{S-1/2} / (1-q)`.
pub fn cn_measure(ctx: &EllipticContext, w: f64, s_trunc: usize) -> DiscretePointMeasure {
    assert!(s_trunc >= 1, "need at least one atom pair");
    let q = ctx.nome_q;
    let scale = PI / (ctx.k * ctx.big_k);
    let half: Vec<f64> = (1..=s_trunc as i64)
        .map(|s| bilateral_weight(q, s as f64 - 0.5, scale))
        .collect();
    let mut indices = Vec::with_capacity(2 * s_trunc);
    let mut angles = Vec::with_capacity(2 * s_trunc);
    let mut weights = Vec::with_capacity(2 * s_trunc);
    for s in (1 - s_trunc as i64)..=(s_trunc as i64) {
        indices.push(s);
        angles.push(canonical_angle(PI * w * (s as f64 - 0.5) / ctx.big_k));
        let mirror = if s >= 1 { s } else { 1 - s };
        weights.push(half[(mirror - 1) as usize]);
    }
    let tail_bound = 2.0 * scale * q.powf(s_trunc as f64 - 0.5) / (1.0 - q);
    DiscretePointMeasure {
        indices,
        angles,
        weights,
        trunc: s_trunc,
        tail_bound,
    }
}

/// The dn-family measure truncated to `2S + 1` atoms, `|s| <= S`.
///
/// Atoms `z_s = exp(i pi w s / K)` carry masses
/// `rho_s = (pi/K) / (q^s + q^{-s})` (so `rho_0 = pi/(2K)`), mirrored
/// bitwise across `s -> -s`.  Tail bound `(2 pi/K) q^{S+1} / (1-q)`.
pub fn dn_measure(ctx: &EllipticContext, w: f64, s_trunc: usize) -> DiscretePointMeasure {
    assert!(s_trunc >= 1, "need at least one atom pair");
    let q = ctx.nome_q;
    let scale = PI / ctx.big_k;
    let half: Vec<f64> = (1..=s_trunc as i64)
        .map(|s| bilateral_weight(q, s as f64, scale))
        .collect();
    let mut indices = Vec::with_capacity(2 * s_trunc + 1);
    let mut angles = Vec::with_capacity(2 * s_trunc + 1);
    let mut weights = Vec::with_capacity(2 * s_trunc + 1);
    for s in -(s_trunc as i64)..=(s_trunc as i64) {
        indices.push(s);
        angles.push(canonical_angle(PI * w * s as f64 / ctx.big_k));
        weights.push(if s == 0 {
            scale / 2.0
        } else {
            half[(s.abs() - 1) as usize]
        });
    }
    let tail_bound = 2.0 * scale * q.powi(s_trunc as i32 + 1) / (1.0 - q);
    DiscretePointMeasure {
        indices,
        angles,
        weights,
        trunc: s_trunc,
        tail_bound,
    }
}

/// The sign-reflected cn measure: every atom moved to `-z_s` (angles
/// shifted by `pi`), weights unchanged.  The polynomials
/// `(-1)^n Phi_n(-z)` of [`crate::circle::reflect_sign`] are orthogonal
/// on this measure with the same normalisations.
pub fn reflected_cn_measure(ctx: &EllipticContext, w: f64, s_trunc: usize) -> DiscretePointMeasure {
    let mut m = cn_measure(ctx, w, s_trunc);
    for t in &mut m.angles {
        *t = canonical_angle(*t + PI);
    }
    m
}

/// Smallest truncation `S` whose cn-measure tail bound is below `eps`:
/// `S = ceil(1/2 + log(eps (1-q) k K / (2 pi)) / log q)` (never below 1).
///
/// The dn tail decays strictly faster at the same `S`, so the same
/// choice certifies both families.
pub fn truncation_for_tail(ctx: &EllipticContext, eps: f64) -> usize {
    assert!(eps > 0.0 && eps < 1.0, "tail target must be in (0,1)");
    let q = ctx.nome_q;
    let s = 0.5 + (eps * (1.0 - q) * ctx.k * ctx.big_k / (2.0 * PI)).ln() / q.ln();
    s.ceil().max(1.0) as usize
}

/// Reconstruct the moment `c_n = L{z^n}` by summing the measure:
/// `sum_s rho_s z_s^n`.  The grid is conjugate-symmetric and the weights
/// are mirrored exactly, so the imaginary part is pure noise — bounded
/// by `tail_bound` or the `f64` rounding floor of the sum, whichever is
/// larger (at generous truncations the certified tail drops far below
/// machine precision).  Negative `n` is allowed and by the same symmetry
/// reproduces `c_{-n} = c_n`.
pub fn moment_from_measure(m: &DiscretePointMeasure, n: i64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (&theta, &rho) in m.angles.iter().zip(&m.weights) {
        acc += rho * Complex64::from_polar(1.0, n as f64 * theta);
    }
    acc
}

/// Gram matrix `G_{nm} = sum_s rho_s Phi_n(z_s) Phi_m(1/z_s)` for the
/// supplied polynomials (all real-coefficient, so on the circle
/// `Phi_m(1/z) = conj(Phi_m(z))`).
///
/// The off-diagonal entries are the orthogonality residuals themselves;
/// the diagonal reproduces the normalisations `h_n` up to the measure's
/// tail.  Summation order is fixed (ascending `s`), so repeated runs are
/// bit-identical.
pub fn gram_check(m: &DiscretePointMeasure, polys: &[MonicCirclePolynomial]) -> Vec<Vec<f64>> {
    let points = m.points();
    let evals: Vec<Vec<Complex64>> = polys
        .iter()
        .map(|p| points.iter().map(|&z| p.eval(z)).collect())
        .collect();
    let mut gram = vec![vec![0.0; polys.len()]; polys.len()];
    for (n, row_n) in evals.iter().enumerate() {
        for (mm, row_m) in evals.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((&fn_s, &fm_s), &rho) in row_n.iter().zip(row_m).zip(&m.weights) {
                acc += rho * fn_s * fm_s.conj();
            }
            debug_assert!(acc.im.abs() <= 1e-8, "Gram entry should be real");
            gram[n][mm] = acc.re;
        }
    }
    gram
}

/// Nearest-neighbour statistics of the atom angles on the circle.
#[derive(Debug, Clone, Copy)]
pub struct GapReport {
    /// Number of distinct atom positions (angles closer than the
    /// clustering tolerance `1e-9` count as one).
    pub distinct: usize,
    /// Smallest angular gap between distinct positions.
    pub min_gap: f64,
    /// Largest angular gap between neighbouring positions.
    pub max_gap: f64,
}

/// Measure how the atoms fill the circle.
///
/// For generic `w` every atom is distinct and the minimum gap shrinks as
/// the truncation grows (the spectrum is dense in the limit); for
/// `w = K M/N` the atoms land on finitely many points no matter how far
/// the window extends, which is exactly the finite polygon regime.
pub fn density_report(m: &DiscretePointMeasure) -> GapReport {
    assert!(m.len() >= 2, "need at least two atoms");
    const CLUSTER_TOL: f64 = 1e-9;
    let mut sorted = m.angles.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("angles are finite"));
    // Circular consecutive gaps, wrapping the last atom to the first.
    let mut distinct = 0;
    let mut min_gap = f64::INFINITY;
    let mut max_gap = 0.0_f64;
    for i in 0..sorted.len() {
        let next = if i + 1 == sorted.len() {
            sorted[0] + TAU
        } else {
            sorted[i + 1]
        };
        let gap = next - sorted[i];
        if gap > CLUSTER_TOL {
            distinct += 1;
            min_gap = min_gap.min(gap);
        }
        max_gap = max_gap.max(gap);
    }
    GapReport {
        distinct,
        min_gap,
        max_gap,
    }
}
