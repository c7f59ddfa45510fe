//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function returns a JSON string. The `*_json` functions hold
//! the logic and report errors as plain strings so they can be tested natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qit_core::apps::{chernoff_distance, helstrom_error};
use qit_core::divergences::{divergence, umegaki, Family, RenyiOrder};
use qit_core::entropies::renyi_entropy;
use qit_core::linalg::{c, diag, real_matrix, CMat};
use qit_core::smooth::{iid_smooth_bracket, iid_surprisal_cut};
use qit_core::Base;

const MAX_STEPS: usize = 400;
const MAX_COPIES: usize = 8;
const MAX_N: usize = 100_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Qubit state `(id + x X + y Y + z Z)/2`.
pub fn bloch(x: f64, y: f64, z: f64) -> Result<CMat, String> {
    let r = (x * x + y * y + z * z).sqrt();
    if !r.is_finite() || r > 1.0 + 1e-12 {
        return Err(format!("Bloch vector has length {r}, above 1"));
    }
    let mut m = real_matrix(&[&[0.5 * (1.0 + z), 0.5 * x], &[0.5 * x, 0.5 * (1.0 - z)]]);
    m[(0, 1)] = c(0.5 * x, -0.5 * y);
    m[(1, 0)] = c(0.5 * x, 0.5 * y);
    Ok(m)
}

fn pair(preset: &str, r: &[f64], s: &[f64]) -> Result<(CMat, CMat), String> {
    match preset {
        "orgy" => Ok((
            real_matrix(&[&[5.0, 5.0, 2.0], &[5.0, 5.0, 2.0], &[2.0, 2.0, 2.0]]).unscale(12.0),
            diag(&[5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0]),
        )),
        "qubits" => {
            if r.len() != 3 || s.len() != 3 {
                return Err("qubit preset needs two Bloch vectors of length 3".into());
            }
            Ok((bloch(r[0], r[1], r[2])?, bloch(s[0], s[1], s[2])?))
        }
        other => Err(format!("unknown preset '{other}'")),
    }
}

/// Minimal, Petz and maximal divergences on an α grid, with data-processing flags.
pub fn renyi_curves_json(preset: &str, r: &[f64], s: &[f64], a_min: f64, a_max: f64, steps: usize) -> Result<String, String> {
    let (rho, sigma) = pair(preset, r, s)?;
    if !(a_min > 0.0 && a_max > a_min && a_max.is_finite()) {
        return Err(format!("need 0 < alpha_min < alpha_max, got [{a_min}, {a_max}]"));
    }
    if !(2..=MAX_STEPS).contains(&steps) {
        return Err(format!("steps must lie in [2, {MAX_STEPS}]"));
    }
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let alpha = a_min + (a_max - a_min) * k as f64 / (steps - 1) as f64;
        let mut row = json!({"alpha": alpha});
        for (name, fam) in [("minimal", Family::Minimal), ("petz", Family::Petz), ("maximal", Family::Maximal)] {
            let v = divergence(&rho, &sigma, fam, alpha, Base::Two).map_err(err)?;
            let dpi = RenyiOrder::new(fam, alpha).map_err(err)?.dpi_valid();
            // an infinite value has no JSON number
            row[name] = if v.is_finite() { json!(v) } else { Value::Null };
            row[format!("{name}_dpi")] = json!(dpi);
        }
        rows.push(row);
    }
    let d = umegaki(&rho, &sigma, Base::Two).map_err(err)?;
    Ok(json!({"rows": rows, "umegaki": if d.is_finite() { json!(d) } else { Value::Null }}).to_string())
}

/// Smoothed and surprisal-cut brackets for i.i.d. Bernoulli(p) at each `n`.
pub fn aep_brackets_json(p: f64, eps: f64, ns: &[usize]) -> Result<String, String> {
    if !(p > 0.0 && p < 1.0) {
        return Err(format!("p must lie in (0, 1), got {p}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(format!("eps must lie in (0, 1), got {eps}"));
    }
    if ns.is_empty() || ns.iter().any(|&n| n == 0 || n > MAX_N) {
        return Err(format!("every n must lie in [1, {MAX_N}]"));
    }
    let pmf = [p, 1.0 - p];
    let mut rows = Vec::new();
    for &n in ns {
        let (lo, hi) = iid_smooth_bracket(&pmf, n, eps, Base::Two).map_err(err)?;
        let (clo, chi) = iid_surprisal_cut(&pmf, n, eps, Base::Two).map_err(err)?;
        rows.push(json!({"n": n, "smoothed_lower": lo, "smoothed_upper": hi, "cut_lower": clo, "cut_upper": chi}));
    }
    let h = |a: f64| renyi_entropy(&pmf, a, Base::Two).map_err(err);
    Ok(json!({"rows": rows, "h": h(1.0)?, "h_min": h(f64::INFINITY)?, "h_max": h(0.5)?}).to_string())
}

/// Helstrom error for `n = 1..=n_max` copies of two qubit states, the error
/// rate `−log P_err / n`, and the Chernoff distance it approaches.
pub fn helstrom_chernoff_json(r: &[f64], s: &[f64], n_max: usize) -> Result<String, String> {
    let (rho, sigma) = pair("qubits", r, s)?;
    if !(1..=MAX_COPIES).contains(&n_max) {
        return Err(format!("copies must lie in [1, {MAX_COPIES}]"));
    }
    let xi = chernoff_distance(&rho, &sigma, Base::Two).map_err(err)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let e = helstrom_error(&rho, &sigma, n).map_err(err)?;
        let rate = if e > 0.0 { json!(-e.log2() / n as f64) } else { Value::Null };
        rows.push(json!({"n": n, "error": e, "rate": rate}));
    }
    Ok(json!({"rows": rows, "chernoff": xi.value, "s": xi.s}).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn renyi_curves(preset: &str, r: Vec<f64>, s: Vec<f64>, a_min: f64, a_max: f64, steps: usize) -> Result<String, JsError> {
    js(renyi_curves_json(preset, &r, &s, a_min, a_max, steps))
}

#[wasm_bindgen]
pub fn aep_brackets(p: f64, eps: f64, ns: Vec<usize>) -> Result<String, JsError> {
    js(aep_brackets_json(p, eps, &ns))
}

#[wasm_bindgen]
pub fn helstrom_chernoff(r: Vec<f64>, s: Vec<f64>, n_max: usize) -> Result<String, JsError> {
    js(helstrom_chernoff_json(&r, &s, n_max))
}
