//! Browser bindings for a few ffcircle computations. Every export takes plain
//! strings and numbers and returns a JSON string, so the page needs no glue
//! beyond `JSON.parse`.

use ffcircle::arcs::{classify_among, ArcScale, Classification};
use ffcircle::expsum::{gauss_table, ExponentSystem, Frequency, PowerTable};
use ffcircle::torus::TailSeries;
use ffcircle::{Field, FieldParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps page interactions responsive.
const MAX_POINTS: u64 = 1 << 16;

fn setup(field: &str, exponents: &str) -> Result<(Field, ExponentSystem), String> {
    let field = Field::new(FieldParams::parse(field).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .with_count_limit(MAX_POINTS);
    let exps = exponents
        .split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad exponent {x:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    let system = ExponentSystem::from_unsorted(&exps, field.p()).map_err(|e| e.to_string())?;
    Ok((field, system))
}

#[derive(Serialize)]
struct MultiplierOut {
    n: usize,
    re: f64,
    im: f64,
    abs: f64,
    class: String,
    center: Option<String>,
    stamp: &'static str,
}

/// `M_n(alpha)` for one frequency per exponent (`;`-separated), with its arc.
pub fn multiplier_json(field: &str, exponents: &str, n: usize, alphas: &str) -> Result<String, String> {
    let (f, system) = setup(field, exponents)?;
    let scale = ArcScale::new(&system, n);
    let prec = scale.decision_precision().max(n * system.r_star as usize + 1);
    let freqs = alphas
        .split(';')
        .map(|s| {
            let s = s.trim();
            let t = if s == "0" {
                TailSeries::zero(prec)
            } else {
                TailSeries::parse(s, Some(prec)).map_err(|e| e.to_string())?
            };
            Ok(Frequency::Tail(t))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let table = PowerTable::new(&f, &system, n).map_err(|e| e.to_string())?;
    let m = table.multiplier(&freqs).map_err(|e| e.to_string())?;
    let centers = scale.centers(&f).map_err(|e| e.to_string())?;
    let (class, center) = match classify_among(&f, &freqs, &scale, &centers).map_err(|e| e.to_string())? {
        Classification::Major(c) => ("major".to_string(), Some(c.to_string())),
        Classification::Minor => ("minor".to_string(), None),
    };
    let out = MultiplierOut { n, re: m.re, im: m.im, abs: m.norm(), class, center, stamp: scale.stamp() };
    Ok(serde_json::to_string(&out).unwrap())
}

#[derive(Serialize)]
struct GaussOut {
    center: String,
    re: f64,
    im: f64,
    abs: f64,
    root_counts: Vec<i64>,
}

/// Every reduced Gauss sum with `deg h = s`.
pub fn gauss_json(field: &str, exponents: &str, s: usize) -> Result<String, String> {
    let (f, system) = setup(field, exponents)?;
    let table = gauss_table(&f, s, &system).map_err(|e| e.to_string())?;
    let rows: Vec<GaussOut> = table
        .rows
        .iter()
        .map(|r| GaussOut {
            center: r.center.to_string(),
            re: r.sum.value.re,
            im: r.sum.value.im,
            abs: r.sum.value.norm(),
            root_counts: r.sum.cyclo.counts.clone(),
        })
        .collect();
    Ok(serde_json::to_string(&serde_json::json!({ "s": s, "max_abs": table.max_abs, "rows": rows })).unwrap())
}

#[derive(Serialize)]
struct StripPoint {
    alpha: String,
    /// Position in `[0, 1)`: the digits of `alpha` read base `q`.
    x: f64,
    abs: f64,
    major: bool,
}

/// `|M_n|` and the arc verdict at every `alpha` with digits in `t^-1..t^-depth`,
/// for a single exponent. The points run left to right along the circle.
pub fn strip_json(field: &str, exponent: u32, n: usize, depth: usize) -> Result<String, String> {
    let (f, system) = setup(field, &exponent.to_string())?;
    let q = f.q() as u64;
    let count = q.checked_pow(depth as u32).filter(|c| *c <= 4096).ok_or("depth too large for the demo")?;
    let scale = ArcScale::new(&system, n);
    let prec = scale.decision_precision().max(n * exponent as usize + 1).max(depth);
    let table = PowerTable::new(&f, &system, n).map_err(|e| e.to_string())?;
    let centers = scale.centers(&f).map_err(|e| e.to_string())?;
    let mut points = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let mut t = TailSeries::zero(prec);
        let mut rest = idx;
        for j in (1..=depth).rev() {
            t.set_coeff(j, (rest % q) as u32);
            rest /= q;
        }
        let freq = [Frequency::Tail(t.clone())];
        let abs = table.multiplier(&freq).map_err(|e| e.to_string())?.norm();
        let major =
            matches!(classify_among(&f, &freq, &scale, &centers).map_err(|e| e.to_string())?, Classification::Major(_));
        points.push(StripPoint { alpha: t.to_string(), x: idx as f64 / count as f64, abs, major });
    }
    Ok(serde_json::to_string(&serde_json::json!({ "n": n, "stamp": scale.stamp(), "points": points })).unwrap())
}

#[wasm_bindgen]
pub fn multiplier(field: &str, exponents: &str, n: usize, alphas: &str) -> Result<String, JsValue> {
    multiplier_json(field, exponents, n, alphas).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn gauss(field: &str, exponents: &str, s: usize) -> Result<String, JsValue> {
    gauss_json(field, exponents, s).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn strip(field: &str, exponent: u32, n: usize, depth: usize) -> Result<String, JsValue> {
    strip_json(field, exponent, n, depth).map_err(|e| JsValue::from_str(&e))
}
