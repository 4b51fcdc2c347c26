//! Flag parsing and family resolution.
//!
//! Every subcommand shares one flag set.  The step `w` is kept as the raw
//! string: the numeric pipeline parses it to a double, while the
//! continued-fraction machinery consumes the exact digits.

use std::path::PathBuf;

use clap::Args;

use ellipuc::circle::{
    family_data, levinson_reflections, toeplitz_dets, Family, MomentSequence,
};
use ellipuc::elliptic::EllipticContext;
use ellipuc::error::{Error, Result};
use ellipuc::hyperbolic::{hyp_moments, hyp_reflections};
use ellipuc::measures::truncation_for_tail;
use ellipuc::scheme::{scheme_moments, PeriodicProfile};

#[derive(Args, Debug)]
pub struct RunConfig {
    /// Family: cn | dn | hyperbolic | magnus, or a path to a JSON profile.
    #[arg(long, default_value = "cn")]
    pub family: String,

    /// Elliptic modulus k in (0, 1).  Ignored by hyperbolic and magnus.
    #[arg(long, default_value_t = 0.6)]
    pub k: f64,

    /// Step w, as a decimal string or an exact fraction "p/q".
    #[arg(long, default_value = "0.31")]
    pub w: String,

    /// Largest polynomial degree.
    #[arg(long, default_value_t = 16)]
    pub nmax: usize,

    /// Measure truncation: keep harmonics with |s| <= TRUNC.
    #[arg(long, conflicts_with = "tail")]
    pub trunc: Option<usize>,

    /// Measure truncation by mass: smallest S whose tail is below TAIL.
    #[arg(long)]
    pub tail: Option<f64>,

    /// Residual tolerance for `verify`.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format: csv | json.
    #[arg(long, default_value = "csv")]
    pub format: String,

    /// Seed for the randomized identity spot checks in `verify`.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Polygon order N for the `polygon` subcommand (2N vertices).
    #[arg(long = "polygon-N", default_value_t = 5)]
    pub polygon_n: usize,

    /// JSON profile path (overrides --family).
    #[arg(long)]
    pub profile: Option<PathBuf>,

    /// Fault injection for the test suite: add 0.01 to reflection
    /// coefficient a_i before running `verify`.
    #[arg(long, hide = true)]
    pub corrupt_a: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Where the family's data comes from.
pub enum Source {
    /// One of the two closed-form elliptic families.
    Elliptic(Family, EllipticContext),
    /// The k -> 1 limit with its continuous weight.
    Hyperbolic,
    /// A periodic moment profile (triangular wave or user table).
    Scheme(PeriodicProfile),
}

pub struct Resolved {
    pub label: String,
    pub source: Source,
    pub w_text: String,
    pub w: f64,
    pub nmax: usize,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
    /// Echoed in reports; `None` when the family does not use a modulus.
    pub k: Option<f64>,
    /// The raw --k flag, kept for subcommands (polygon) that need a modulus
    /// regardless of the family.
    pub raw_k: f64,
    pub trunc: Option<usize>,
    pub tail: Option<f64>,
    pub polygon_n: usize,
    pub out: Option<PathBuf>,
    /// Requested fixture-oracle precision (digits), from ELLIPUC_PRECISION.
    pub precision: Option<u32>,
    pub corrupt_a: Option<usize>,
}

/// Parse `w` to a double, accepting the same decimal/fraction grammar the
/// exact pipeline uses.
pub fn parse_w(text: &str) -> Result<f64> {
    let value = if let Some((p, q)) = text.split_once('/') {
        let num: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::config("w", "fraction numerator is not a number"))?;
        let den: f64 = q
            .trim()
            .parse()
            .map_err(|_| Error::config("w", "fraction denominator is not a number"))?;
        num / den
    } else {
        text.trim()
            .parse()
            .map_err(|_| Error::config("w", format!("not a decimal number: `{text}`")))?
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::config("w", "step must be positive and finite"));
    }
    Ok(value)
}

fn elliptic_context(k: f64) -> Result<EllipticContext> {
    EllipticContext::new(k).map_err(|e| Error::config("k", e.to_string()))
}

fn load_profile(path: &std::path::Path) -> Result<PeriodicProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("profile", format!("{}: {e}", path.display())))?;
    PeriodicProfile::from_json(&text)
}

fn read_precision_env() -> Result<Option<u32>> {
    match std::env::var("ELLIPUC_PRECISION") {
        Err(_) => Ok(None),
        Ok(text) => {
            let digits: u32 = text.trim().parse().map_err(|_| {
                Error::config("ELLIPUC_PRECISION", format!("not an integer: `{text}`"))
            })?;
            if !(4..=30).contains(&digits) {
                return Err(Error::config(
                    "ELLIPUC_PRECISION",
                    "oracle precision must lie in 4..=30 digits",
                ));
            }
            Ok(Some(digits))
        }
    }
}

pub fn resolve(config: &RunConfig) -> Result<Resolved> {
    if !(config.tol.is_finite() && config.tol > 0.0) {
        return Err(Error::config("tol", "tolerance must be positive"));
    }
    if let Some(eps) = config.tail {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::config("tail", "tail target must be positive"));
        }
    }
    let format = match config.format.as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => {
            return Err(Error::config(
                "format",
                format!("expected csv or json, got `{other}`"),
            ))
        }
    };
    let w = parse_w(&config.w)?;

    let (label, source, k) = if let Some(path) = &config.profile {
        let profile = load_profile(path)?;
        (format!("profile:{}", profile.describe()), Source::Scheme(profile), None)
    } else {
        match config.family.as_str() {
            "cn" => (
                "cn".to_string(),
                Source::Elliptic(Family::Cn, elliptic_context(config.k)?),
                Some(config.k),
            ),
            "dn" => (
                "dn".to_string(),
                Source::Elliptic(Family::Dn, elliptic_context(config.k)?),
                Some(config.k),
            ),
            "hyperbolic" => ("hyperbolic".to_string(), Source::Hyperbolic, None),
            "magnus" => (
                "magnus".to_string(),
                Source::Scheme(PeriodicProfile::magnus()),
                None,
            ),
            other if other.contains('/') || other.ends_with(".json") => {
                let profile = load_profile(std::path::Path::new(other))?;
                (
                    format!("profile:{}", profile.describe()),
                    Source::Scheme(profile),
                    None,
                )
            }
            other => {
                return Err(Error::config(
                    "family",
                    format!("unknown family `{other}` (cn | dn | hyperbolic | magnus | profile path)"),
                ))
            }
        }
    };

    Ok(Resolved {
        label,
        source,
        w_text: config.w.trim().to_string(),
        w,
        nmax: config.nmax,
        tol: config.tol,
        seed: config.seed,
        format,
        k,
        raw_k: config.k,
        trunc: config.trunc,
        tail: config.tail,
        polygon_n: config.polygon_n,
        out: config.out.clone(),
        precision: read_precision_env()?,
        corrupt_a: config.corrupt_a,
    })
}

impl Resolved {
    /// Truncation index for measure-based work: an explicit --trunc wins,
    /// then a --tail / ELLIPUC_PRECISION mass target, then a family default.
    pub fn measure_truncation(&self) -> usize {
        if let Some(s) = self.trunc {
            return s;
        }
        let target = match (self.tail, self.precision) {
            (Some(eps), Some(d)) => Some(eps.min(10f64.powi(-(d as i32)))),
            (Some(eps), None) => Some(eps),
            (None, Some(d)) => Some(10f64.powi(-(d as i32))),
            (None, None) => None,
        };
        match (&self.source, target) {
            (Source::Elliptic(_, ctx), Some(eps)) => truncation_for_tail(ctx, eps),
            (Source::Elliptic(..), None) => 200,
            (Source::Scheme(profile), Some(eps)) => {
                // Doubling search; the triangular profile's 1/S tail can make
                // tiny targets unaffordable, so cap the reach.
                let mut s = 16usize;
                while profile.tail_bound(s) > eps && s < 1 << 22 {
                    s *= 2;
                }
                s
            }
            (Source::Scheme(profile), None) => {
                if profile.describe() == "magnus" {
                    2000
                } else {
                    200
                }
            }
            // Hyperbolic exports sample a continuous density; the truncation
            // plays the role of the grid half-count.
            (Source::Hyperbolic, _) => 200,
        }
    }
}

/// Reflection coefficients, moments, normalisations, and determinants
/// through degree `nmax`, from whatever route the family prescribes.
pub struct Dataset {
    pub a: Vec<f64>,
    pub c: MomentSequence,
    pub h: Vec<f64>,
    pub dets: Vec<f64>,
    pub resonant: bool,
}

pub fn dataset(res: &Resolved) -> Result<Dataset> {
    let n = res.nmax + 1;
    match &res.source {
        Source::Elliptic(family, ctx) => {
            let fd = family_data(ctx, res.w, *family, n)?;
            let dets = toeplitz_dets(&fd.c, res.nmax)?;
            Ok(Dataset {
                a: fd.a,
                c: fd.c,
                h: fd.h,
                dets,
                resonant: false,
            })
        }
        Source::Hyperbolic => {
            let a = hyp_reflections(n, res.w);
            let c = hyp_moments(n, res.w);
            let mut h = Vec::with_capacity(n + 1);
            h.push(1.0);
            for m in 0..n {
                let prev = h[m];
                h.push(prev * (1.0 - a[m] * a[m]));
            }
            let dets = toeplitz_dets(&c, res.nmax)?;
            Ok(Dataset {
                a,
                c,
                h,
                dets,
                resonant: false,
            })
        }
        Source::Scheme(profile) => {
            let moments = scheme_moments(profile, res.w, n)?;
            let (a, h) = levinson_reflections(&moments.c, n)?;
            let dets = toeplitz_dets(&moments.c, res.nmax)?;
            Ok(Dataset {
                a,
                c: moments.c,
                h,
                dets,
                resonant: moments.resonant,
            })
        }
    }
}
