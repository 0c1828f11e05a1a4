//! Browser demo. Three operations, each returning a JSON string that the
//! page in `www/` draws: the two-gon explorer, the Voronoi cell of a 2×2
//! Gram matrix, and the Tate degeneration scan.

use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use slopelab::graph::fixtures::two_gon;
use slopelab::rational::{self, RationalJson};
use slopelab::theta::{self, McConfig, PeriodFamily};
use slopelab::tropical::{self, GramLattice};
use slopelab::{invariants, jump, Error, Rational};

const CURVE_POINTS: i64 = 48;

fn exact(q: &Rational) -> Value {
    serde_json::to_value(RationalJson::from(q)).expect("plain data")
}

fn parse_positive(s: &str) -> Result<Rational, Error> {
    let q = rational::parse(s.trim())?;
    if !rational::is_positive(&q) {
        return Err(Error::Input(format!("`{s}` is not positive")));
    }
    Ok(q)
}

/// Invariants of the two-gon of genus `g` with vertex genera `h`, `g-h-1`,
/// plus the slope along `m1 = s·L`, `m2 = (1-s)·L` for the same total `L`.
pub fn two_gon_report(g: u32, h: u32, m1: &str, m2: &str) -> Result<Value, Error> {
    if !(2..=12).contains(&g) || h >= g {
        return Err(Error::Input("need 2 <= g <= 12 and 0 <= h < g".into()));
    }
    let (m1, m2) = (parse_positive(m1)?, parse_positive(m2)?);
    let graph = two_gon(g, h, m1.clone(), m2.clone());
    let report = invariants::report(&graph)?;
    let jump = if graph.is_stable() { Some(exact(&jump::height_jump(&graph)?)) } else { None };
    let total = &m1 + &m2;
    let curve: Vec<[f64; 2]> = (1..CURVE_POINTS)
        .map(|k| {
            let a = &total * rational::ratio(k, CURVE_POINTS);
            let b = &total - &a;
            let s = invariants::slope(&two_gon(g, h, a, b)).expect("two-gon is polarized");
            [k as f64 / CURVE_POINTS as f64, rational::to_f64(&s)]
        })
        .collect();
    Ok(json!({
        "g": g,
        "h": h,
        "stable": graph.is_stable(),
        "jump": jump,
        "invariants": report.to_json(),
        "curve": curve,
    }))
}

/// Voronoi cell of `[[a, b], [b, c]]`, its vertices in counterclockwise
/// order and the exact second moment.
pub fn voronoi_report(a: &str, b: &str, c: &str) -> Result<Value, Error> {
    let (a, b, c) = (rational::parse(a.trim())?, rational::parse(b.trim())?, rational::parse(c.trim())?);
    let lat = GramLattice::new(vec![vec![a, b.clone()], vec![b, c]])?;
    let cell = tropical::voronoi_cell(&lat)?;
    let mut vertices: Vec<[f64; 2]> =
        cell.vertices().iter().map(|v| [rational::to_f64(&v[0]), rational::to_f64(&v[1])]).collect();
    vertices.sort_by(|p, q| p[1].atan2(p[0]).total_cmp(&q[1].atan2(q[0])));
    Ok(json!({
        "gram": lat.to_json(),
        "vertices": vertices,
        "relevant": cell.relevant,
        "moment": exact(&tropical::moment(&lat)?),
        "volume": exact(&cell.polytope.volume()),
    }))
}

/// Degeneration scan of the genus-one Tate family `Ω(t) = i + log(t)/(2πi)`
/// down to `|t| = 10^-depth`.
pub fn tate_scan_report(depth: u32, samples: usize, seed: u64) -> Result<Value, Error> {
    if !(2..=10).contains(&depth) {
        return Err(Error::Input("depth must lie in 2..=10".into()));
    }
    let family = PeriodFamily::tate(Complex64::new(0.0, 1.0));
    let schedule: Vec<Complex64> = (1..=depth as i32).map(|k| Complex64::new(10f64.powi(-k), 0.0)).collect();
    let scan = theta::degeneration_scan(&family, &schedule, &McConfig::new(samples, seed)?)?;
    let mut out = scan.to_json();
    out["target"] = json!(-0.5 * std::f64::consts::LN_2 + std::f64::consts::PI / 6.0);
    Ok(out)
}

fn to_js(r: Result<Value, Error>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = twoGon)]
pub fn two_gon_js(g: u32, h: u32, m1: &str, m2: &str) -> Result<String, JsValue> {
    to_js(two_gon_report(g, h, m1, m2))
}

#[wasm_bindgen(js_name = voronoiCell)]
pub fn voronoi_js(a: &str, b: &str, c: &str) -> Result<String, JsValue> {
    to_js(voronoi_report(a, b, c))
}

#[wasm_bindgen(js_name = tateScan)]
pub fn tate_scan_js(depth: u32, samples: usize, seed: u64) -> Result<String, JsValue> {
    to_js(tate_scan_report(depth, samples, seed))
}
