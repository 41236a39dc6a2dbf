//! Browser bindings: a few fockrad operations over JSON strings.

use wasm_bindgen::prelude::*;

use fockrad::fock::build_shifts;
use fockrad::io::{parse_tuple_str, to_json};
use fockrad::radii;

fn js(e: fockrad::Error) -> JsValue {
    JsValue::from_str(&format!("error[{}]: {e}", e.code()))
}

/// All radii of a tuple given in the tuple-file JSON format.
#[wasm_bindgen]
pub fn tuple_radii(tuple_json: &str, q: usize, rho: f64) -> Result<String, JsValue> {
    let t = parse_tuple_str(tuple_json).map_err(js)?;
    radii::all_radii(&t, q, rho).map(|r| to_json(&r)).map_err(js)
}

/// Joint numerical radius of the truncated creation operators `S_1, ..., S_n` on words of
/// length at most `m - 1`.
#[wasm_bindgen]
pub fn shift_numerical_radius(n: usize, m: usize) -> Result<f64, JsValue> {
    if m < 2 {
        return Err(JsValue::from_str("m must be at least 2"));
    }
    let f = build_shifts(n, m - 1).map_err(js)?;
    let t = fockrad::OperatorTuple::new(f.s).map_err(js)?;
    radii::joint_numerical_radius(&t, 1).map(|r| r.value).map_err(js)
}

/// Runs one certification suite (or `all`) and returns the JSON reports.
#[wasm_bindgen]
pub fn certify(suite: &str, trials: usize, seed: u64) -> Result<String, JsValue> {
    fockrad::certify::run_named(suite, trials, seed, fockrad::certify::DEFAULT_TOL)
        .map(|r| to_json(&r))
        .map_err(js)
}
