//! The `verify` subcommand: per-family identity suites with one reported
//! residual per identity, and exit status 0 exactly when every residual is
//! within its tolerance.

use ellipuc::circle::{
    determinant_poly, explicit_cn_poly, explicit_dn_poly, family_data, functional_orthogonality,
    h_closed_cn, h_closed_dn, levinson_reflections, szego_all, three_term_check_with,
    toeplitz_dets, Family, MomentSequence, MonicCirclePolynomial,
};
use ellipuc::ebc::EbcParams;
use ellipuc::elliptic::{jacobi_sncndn, EllipticContext};
use ellipuc::error::{Error, Result};
use ellipuc::hyperbolic::{hyp_moments, hyp_poly, hyp_reflections, HyperbolicWeight};
use ellipuc::measures::{cn_measure, dn_measure, gram_check, moment_from_measure};
use ellipuc::scheme::{
    magnus_sparsity_check, scheme_measure, scheme_moments, PeriodicProfile, SPARSITY_THRESHOLD,
};

use crate::config::{Resolved, Source};

struct Check {
    name: &'static str,
    residual: Option<f64>,
    tolerance: f64,
    pass: bool,
    detail: Option<String>,
}

impl Check {
    fn residual(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Check {
            name,
            residual: Some(residual),
            tolerance,
            pass: residual <= tolerance,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    fn gate(mut self, condition: bool) -> Self {
        self.pass = self.pass && condition;
        self
    }
}

/// splitmix64, folded to a double in [0, 1).
struct Rng(u64);

impl Rng {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn max_coeff_diff(p: &MonicCirclePolynomial, q: &MonicCirclePolynomial) -> f64 {
    p.coeffs
        .iter()
        .zip(&q.coeffs)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn corrupted(a: &[f64], corrupt: Option<usize>) -> Result<Vec<f64>> {
    let mut a = a.to_vec();
    if let Some(idx) = corrupt {
        if idx >= a.len() {
            return Err(Error::config(
                "corrupt-a",
                format!("index {idx} out of range (have {} coefficients)", a.len()),
            ));
        }
        a[idx] += 0.01;
    }
    Ok(a)
}

fn kernel_identities(ctx: &EllipticContext, seed: u64, points: usize) -> f64 {
    let mut rng = Rng(seed);
    let k2 = ctx.k * ctx.k;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let u = (rng.next_f64() * 2.0 - 1.0) * 3.0 * ctx.big_k;
        let (sn, cn, dn) = jacobi_sncndn(u, ctx);
        worst = worst.max((sn * sn + cn * cn - 1.0).abs());
        worst = worst.max((dn * dn - (1.0 - k2 * sn * sn)).abs());
    }
    worst
}

fn orthogonality_sweep(
    phis: &[MonicCirclePolynomial],
    c: &MomentSequence,
    nmax: usize,
) -> (f64, Vec<f64>) {
    let mut worst = 0.0f64;
    let mut diags = vec![1.0];
    for n in 1..=nmax {
        let (vals, diag) = functional_orthogonality(&phis[n], c);
        for v in vals {
            worst = worst.max(v.abs());
        }
        diags.push(diag);
    }
    (worst, diags)
}

fn elliptic_checks(res: &Resolved, family: Family, ctx: &EllipticContext) -> Result<Vec<Check>> {
    let n = res.nmax;
    let tol = res.tol;
    let fd = family_data(ctx, res.w, family, n)?;
    let a_checked = corrupted(&fd.a, res.corrupt_a)?;
    let params = EbcParams::new(ctx, res.w, n)?;
    let mut checks = Vec::new();

    checks.push(Check::residual(
        "kernel_identities",
        kernel_identities(ctx, res.seed, 1000),
        tol,
    ));

    // All four construction routes must produce the same coefficients.
    let (a_lev, _) = levinson_reflections(&fd.c, n)?;
    let phis_lev = szego_all(&a_lev, n);
    let mut worst = 0.0f64;
    for m in 0..=n {
        let explicit = match family {
            Family::Cn => explicit_cn_poly(&params, m),
            Family::Dn => explicit_dn_poly(&params, m),
        };
        worst = worst.max(max_coeff_diff(&fd.phis[m], &explicit));
        worst = worst.max(max_coeff_diff(&fd.phis[m], &phis_lev[m]));
        if m <= 10 {
            worst = worst.max(max_coeff_diff(&fd.phis[m], &determinant_poly(&fd.c, m)?));
        }
    }
    checks.push(Check::residual("construction_agreement", worst, tol));

    let tt = three_term_check_with(&fd.phis, &a_checked, n);
    let mut row = Check::residual("three_term_check", tt.max_residual, tol);
    if !tt.skipped.is_empty() {
        row = row.with_detail(format!("skipped degrees {:?}", tt.skipped));
    }
    checks.push(row);

    let (worst_orth, diags) = orthogonality_sweep(&fd.phis, &fd.c, n);
    checks.push(Check::residual("orthogonality", worst_orth, tol));

    // Norm along three routes: running product, closed form, functional
    // diagonal.  The first two are individually stable and compared
    // relatively; the functional diagonal is an f64 sum whose terms are
    // O(1), so once h_m decays far below epsilon only the absolute
    // difference is meaningful.
    let mut worst = 0.0f64;
    for m in 0..=n.min(16) {
        let closed = match family {
            Family::Cn => h_closed_cn(&params, m),
            Family::Dn => h_closed_dn(&params, m),
        };
        worst = worst.max((fd.h[m] - closed).abs() / fd.h[m]);
        worst = worst.max((diags[m] - fd.h[m]).abs());
    }
    checks.push(Check::residual("norm_routes", worst, tol));

    let s = res.measure_truncation();
    let mu = match family {
        Family::Cn => cn_measure(ctx, res.w, s),
        Family::Dn => dn_measure(ctx, res.w, s),
    };
    let moment_tol = tol.max(2.0 * mu.tail_bound);
    let mut worst = (mu.total_mass() - 1.0).abs();
    for m in 0..=n {
        let z = moment_from_measure(&mu, m as i64);
        worst = worst.max((z.re - fd.c.get(m)).abs()).max(z.im.abs());
    }
    checks.push(
        Check::residual("moment_reconstruction", worst, moment_tol)
            .with_detail(format!("truncation {s}")),
    );

    let top = n.min(16);
    let gram = gram_check(&mu, &fd.phis[..=top]);
    let mut worst = 0.0f64;
    for (r, row) in gram.iter().enumerate() {
        for (c_idx, &val) in row.iter().enumerate() {
            if r == c_idx {
                worst = worst.max((val - fd.h[r]).abs() / fd.h[r]);
            } else {
                worst = worst.max(val.abs());
            }
        }
    }
    checks.push(Check::residual("gram_offdiagonal", worst, moment_tol));

    Ok(checks)
}

fn hyperbolic_checks(res: &Resolved) -> Result<Vec<Check>> {
    let n = res.nmax;
    let tol = res.tol;
    let a = hyp_reflections(n, res.w);
    let phis = szego_all(&a, n);
    let c = hyp_moments(n, res.w);
    let a_checked = corrupted(&a, res.corrupt_a)?;
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for m in 0..=n {
        worst = worst.max(max_coeff_diff(&phis[m], &hyp_poly(m, res.w)));
    }
    checks.push(Check::residual("construction_agreement", worst, tol));

    let tt = three_term_check_with(&phis, &a_checked, n);
    checks.push(Check::residual("three_term_check", tt.max_residual, tol));

    let (worst_orth, diags) = orthogonality_sweep(&phis, &c, n);
    checks.push(Check::residual("orthogonality", worst_orth, tol));

    let mut worst = 0.0f64;
    let mut h = 1.0;
    for m in 0..=n {
        worst = worst.max((diags[m] - h).abs());
        if m < n {
            h *= 1.0 - a[m] * a[m];
        }
    }
    checks.push(Check::residual("norm_routes", worst, tol));

    // Trapezoid quadrature against the continuous weight is spectrally
    // accurate but still the softest identity here; floor at 1e-8.
    let nodes = if res.precision.unwrap_or(0) > 12 { 16384 } else { 4096 };
    let weight = HyperbolicWeight::new(res.w)?;
    let mut worst = 0.0f64;
    for m in 0..=n.min(12) {
        worst = worst.max((weight.quadrature_moment(m, nodes) - c.get(m)).abs());
    }
    checks.push(
        Check::residual("quadrature_moments", worst, tol.max(1e-8))
            .with_detail(format!("{nodes} nodes")),
    );

    Ok(checks)
}

fn scheme_checks(res: &Resolved, profile: &PeriodicProfile) -> Result<(Vec<Check>, bool)> {
    let n = res.nmax;
    let tol = res.tol;
    let moments = scheme_moments(profile, res.w, n)?;
    let mut checks = Vec::new();

    // Closed-form evaluator vs its own cosine series.
    let terms = 2000;
    let series_tol = tol.max(profile.tail_bound(terms));
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let x = profile.period() * i as f64 / 20.0;
        worst = worst.max((profile.eval(x) - profile.fourier_partial_sum(x, terms)).abs());
    }
    checks.push(Check::residual("profile_consistency", worst, series_tol));

    match toeplitz_dets(&moments.c, n) {
        Ok(dets) => {
            let min = dets.iter().cloned().fold(f64::INFINITY, f64::min);
            checks.push(
                Check::residual("positivity", (-min).max(0.0), 0.0)
                    .with_detail(format!("smallest determinant {min:.3e}")),
            );
        }
        Err(e) => checks.push(Check {
            name: "positivity",
            residual: None,
            tolerance: 0.0,
            pass: false,
            detail: Some(e.to_string()),
        }),
    }

    let (a, h) = levinson_reflections(&moments.c, n)?;
    let phis = szego_all(&a, n);
    let a_checked = corrupted(&a, res.corrupt_a)?;
    let tt = three_term_check_with(&phis, &a_checked, n);
    let mut row = Check::residual("three_term_check", tt.max_residual, tol);
    if !tt.skipped.is_empty() {
        row = row.with_detail(format!("{} degrees skipped (a_n = 0)", tt.skipped.len()));
    }
    checks.push(row);

    let (worst_orth, diags) = orthogonality_sweep(&phis, &moments.c, n);
    let worst_diag = (0..=n)
        .map(|m| (diags[m] - h[m]).abs())
        .fold(worst_orth, f64::max);
    checks.push(Check::residual("orthogonality", worst_diag, tol));

    let s = res.measure_truncation();
    let mu = scheme_measure(profile, res.w, s);
    let moment_tol = tol.max(2.0 * mu.tail_bound);
    let mut worst = (mu.total_mass() - 1.0).abs();
    for m in 0..=n {
        let z = moment_from_measure(&mu, m as i64);
        worst = worst.max((z.re - moments.c.get(m)).abs()).max(z.im.abs());
    }
    checks.push(
        Check::residual("moment_reconstruction", worst, moment_tol)
            .with_detail(format!("truncation {s}")),
    );

    if profile.describe() == "magnus" && moments.resonant {
        // A rational step makes the orbit wn mod 1 periodic: the sparsity
        // ladder of best rational approximations degenerates, so there is
        // nothing to certify.  The top-level `resonant` flag carries the
        // warning.
        checks.push(Check {
            name: "sparsity_check",
            residual: None,
            tolerance: SPARSITY_THRESHOLD / 10.0,
            pass: true,
            detail: Some("skipped: step is a rational multiple of the period".into()),
        });
    } else if profile.describe() == "magnus" {
        match magnus_sparsity_check(&res.w_text, n) {
            Ok(report) => {
                let offsets_predicted = report
                    .offsets
                    .iter()
                    .all(|&o| report.predicted.contains(&(o as u64)));
                let detail = format!(
                    "survivors {}, offsets {:?}, predicted {:?}{}",
                    report.survivors,
                    report.offsets,
                    report.predicted,
                    if report.inconclusive {
                        ", inconclusive"
                    } else {
                        ""
                    }
                );
                checks.push(
                    Check::residual(
                        "sparsity_check",
                        report.noise_floor,
                        SPARSITY_THRESHOLD / 10.0,
                    )
                    .gate(report.survivors <= 3 && offsets_predicted && !report.inconclusive)
                    .with_detail(detail),
                );
            }
            Err(e) => checks.push(Check {
                name: "sparsity_check",
                residual: None,
                tolerance: SPARSITY_THRESHOLD / 10.0,
                pass: false,
                detail: Some(e.to_string()),
            }),
        }
    }

    Ok((checks, moments.resonant))
}

/// Run the suite for the resolved family.  Returns the JSON report and
/// whether every check passed.
pub fn cmd_verify(res: &Resolved) -> Result<(String, bool)> {
    let (checks, resonant) = match &res.source {
        Source::Elliptic(family, ctx) => (elliptic_checks(res, *family, ctx)?, false),
        Source::Hyperbolic => (hyperbolic_checks(res)?, false),
        Source::Scheme(profile) => scheme_checks(res, profile)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    let rows: Vec<serde_json::Value> = checks
        .iter()
        .map(|c| {
            serde_json::json!({
                "name": c.name,
                "max_residual": c.residual,
                "tolerance": c.tolerance,
                "pass": c.pass,
                "detail": c.detail,
            })
        })
        .collect();
    let report = serde_json::json!({
        "schema": 1,
        "command": "verify",
        "family": res.label,
        "k": res.k,
        "w": res.w_text,
        "nmax": res.nmax,
        "seed": res.seed,
        "tolerance": res.tol,
        "precision": res.precision,
        "resonant": resonant,
        "pass": pass,
        "checks": rows,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok((text, pass))
}
