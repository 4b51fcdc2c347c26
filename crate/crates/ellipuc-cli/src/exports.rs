//! The four export subcommands: `table`, `measure`, `dgt`, `polygon`.
//!
//! Every number is printed with `{:.16e}`, and JSON objects serialize with
//! sorted keys, so identical configurations produce byte-identical files.

use std::f64::consts::PI;

use ellipuc::circle::Family;
use ellipuc::elliptic::EllipticContext;
use ellipuc::error::{Error, Result};
use ellipuc::hyperbolic::HyperbolicWeight;
use ellipuc::interval::{recurrence_table_csv, recurrence_table_json};
use ellipuc::measures::{cn_measure, dn_measure, DiscretePointMeasure};
use ellipuc::polygon::{build_polygon_case, polygon_csv};
use ellipuc::scheme::scheme_measure;

use crate::config::{dataset, Format, Resolved, Source};

fn render_json(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn meta(res: &Resolved, command: &str) -> serde_json::Value {
    serde_json::json!({
        "schema": 1,
        "command": command,
        "family": res.label,
        "k": res.k,
        "w": res.w_text,
        "nmax": res.nmax,
    })
}

/// `(n, a_n, c_n, h_n, delta_n)` rows for `n = 0..=nmax`.
pub fn cmd_table(res: &Resolved) -> Result<String> {
    let d = dataset(res)?;
    match res.format {
        Format::Csv => {
            let mut out = String::from("n,a_n,c_n,h_n,delta_n\n");
            for n in 0..=res.nmax {
                out.push_str(&format!(
                    "{n},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    d.a[n],
                    d.c.get(n),
                    d.h[n],
                    d.dets[n]
                ));
            }
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = (0..=res.nmax)
                .map(|n| {
                    serde_json::json!({
                        "n": n,
                        "a": d.a[n],
                        "c": d.c.get(n),
                        "h": d.h[n],
                        "delta": d.dets[n],
                    })
                })
                .collect();
            let mut value = meta(res, "table");
            let obj = value.as_object_mut().unwrap();
            obj.insert("resonant".into(), d.resonant.into());
            obj.insert("rows".into(), rows.into());
            Ok(render_json(&value))
        }
    }
}

fn point_measure(res: &Resolved) -> Result<DiscretePointMeasure> {
    let s = res.measure_truncation();
    match &res.source {
        Source::Elliptic(Family::Cn, ctx) => Ok(cn_measure(ctx, res.w, s)),
        Source::Elliptic(Family::Dn, ctx) => Ok(dn_measure(ctx, res.w, s)),
        Source::Scheme(profile) => Ok(scheme_measure(profile, res.w, s)),
        Source::Hyperbolic => Err(Error::config(
            "family",
            "the hyperbolic weight is continuous; measure exports a density grid instead",
        )),
    }
}

/// Orthogonality measure export: point masses for the discrete families, a
/// uniform density grid (2S rows) for the hyperbolic weight.
pub fn cmd_measure(res: &Resolved) -> Result<String> {
    if let Source::Hyperbolic = res.source {
        let s = res.measure_truncation();
        let weight = HyperbolicWeight::new(res.w)?;
        let angles: Vec<f64> = (0..2 * s).map(|j| (j as f64 + 0.5) * PI / s as f64).collect();
        return Ok(match res.format {
            Format::Csv => {
                let mut out = String::from("j,angle,density\n");
                for (j, &theta) in angles.iter().enumerate() {
                    out.push_str(&format!("{j},{theta:.16e},{:.16e}\n", weight.density(theta)));
                }
                out
            }
            Format::Json => {
                let densities: Vec<f64> = angles.iter().map(|&t| weight.density(t)).collect();
                let mut value = meta(res, "measure");
                let obj = value.as_object_mut().unwrap();
                obj.insert("angle".into(), serde_json::json!(angles));
                obj.insert("density".into(), serde_json::json!(densities));
                render_json(&value)
            }
        });
    }
    let measure = point_measure(res)?;
    Ok(match res.format {
        Format::Csv => measure.csv(),
        Format::Json => {
            let mut value = meta(res, "measure");
            let obj = value.as_object_mut().unwrap();
            obj.insert("measure".into(), measure.json());
            render_json(&value)
        }
    })
}

/// Interval recurrence data `(n, v_n, u_n, b_n, kappa_n, H_n)`.
pub fn cmd_dgt(res: &Resolved) -> Result<String> {
    let d = dataset(res)?;
    Ok(match res.format {
        Format::Csv => recurrence_table_csv(&d.a, res.nmax),
        Format::Json => {
            let mut value = recurrence_table_json(&d.a, res.nmax);
            let obj = value.as_object_mut().unwrap();
            obj.insert("command".into(), "dgt".into());
            obj.insert("family".into(), res.label.clone().into());
            obj.insert("w".into(), res.w_text.clone().into());
            render_json(&value)
        }
    })
}

/// The finite case `w = K/N`: 2N vertex angles with closed-form weights and
/// both residue-formula cross-checks.
pub fn cmd_polygon(res: &Resolved) -> Result<String> {
    let ctx =
        EllipticContext::new(res.raw_k).map_err(|e| Error::config("k", e.to_string()))?;
    let case = build_polygon_case(res.polygon_n, &ctx)?;
    Ok(match res.format {
        Format::Csv => polygon_csv(&case)?,
        Format::Json => {
            let value = serde_json::json!({
                "schema": 1,
                "command": "polygon",
                "k": res.raw_k,
                "n": case.n,
                "m": case.m,
                "w": case.w,
                "angle": case.zeros,
                "weight": case.weights,
                "a": case.a,
                "h": case.h,
            });
            render_json(&value)
        }
    })
}
