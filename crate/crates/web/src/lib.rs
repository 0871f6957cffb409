//! Browser bindings: exact profiles, one-dimensional training, and the rate suite.
//!
//! The plain-Rust functions return `Result<_, String>` so they run in native tests;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use std::fmt::Write as _;

use slpinn::checks::{rate_suite, SLOPE_CSV_HEADER};
use slpinn::train::build_training_sets;
use slpinn::{error_row, train_target, ExperimentConfig, Field, LayeredGrid, Manufactured, Method, Target, Upstream, Viscosity};
use wasm_bindgen::prelude::*;

/// Samples along `z` at a fixed `x`, laid out like the error grid.
#[wasm_bindgen]
pub struct Profile {
    z: Vec<f64>,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl Profile {
    #[wasm_bindgen(getter)]
    pub fn z(&self) -> Vec<f64> {
        self.z.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

fn sample(field: &dyn Field, v: Viscosity, x: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let grid = LayeredGrid::with_resolution(v, n.max(4), 2);
    let values = grid.z.iter().map(|&z| field.value([x, z])).collect();
    (grid.z, values)
}

pub fn exact_profile_inner(target: &str, eps: f64, x: f64, n: usize) -> Result<Profile, String> {
    let target: Target = target.parse().map_err(|e| format!("{e}"))?;
    let v = Viscosity::new(eps).map_err(|e| e.to_string())?;
    let (z, values) = sample(&Manufactured::new(v).field(target), v, x, n);
    Ok(Profile { z, values })
}

/// Exact solution of `target` (u1, u2, w1, w2, w3) along `z` at `x`, `n` points.
#[wasm_bindgen]
pub fn exact_profile(target: &str, eps: f64, x: f64, n: usize) -> Result<Profile, JsError> {
    exact_profile_inner(target, eps, x, n).map_err(|e| JsError::new(&e))
}

/// One trained one-dimensional field next to the exact one.
#[wasm_bindgen]
pub struct Training {
    losses: Vec<f64>,
    z: Vec<f64>,
    prediction: Vec<f64>,
    exact: Vec<f64>,
    rel_l2: f64,
    termination: String,
}

#[wasm_bindgen]
impl Training {
    /// Loss after each accepted iteration, starting with the initial loss.
    #[wasm_bindgen(getter)]
    pub fn losses(&self) -> Vec<f64> {
        self.losses.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn z(&self) -> Vec<f64> {
        self.z.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn prediction(&self) -> Vec<f64> {
        self.prediction.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn rel_l2(&self) -> f64 {
        self.rel_l2
    }

    #[wasm_bindgen(getter)]
    pub fn termination(&self) -> String {
        self.termination.clone()
    }
}

pub fn train_inner(target: &str, method: &str, eps: f64, seed: u64, max_iter: usize) -> Result<Training, String> {
    let target: Target = target.parse().map_err(|e| format!("{e}"))?;
    if target.dims() != 1 {
        return Err(format!("{target} is two-dimensional; the demo trains u1 and w2 only"));
    }
    let method: Method = method.parse().map_err(|e| format!("{e}"))?;
    let v = Viscosity::new(eps).map_err(|e| e.to_string())?;
    let mut config = ExperimentConfig::default();
    config.lbfgs.max_iter = max_iter.max(1);
    let sets = build_training_sets(target, method, &config).map_err(|e| e.to_string())?;
    let (model, trace) = train_target(target, method, v, seed, &Upstream::none(), &sets, config.n_hidden, &config.lbfgs)
        .map_err(|e| e.to_string())?;
    let rel_l2 = error_row(&model, target, method, v).map_err(|e| e.to_string())?.rel_l2;
    let (z, prediction) = sample(&model, v, 0.0, 240);
    let (_, exact) = sample(&Manufactured::new(v).field(target), v, 0.0, 240);
    Ok(Training {
        losses: trace.records.iter().map(|r| r.loss).collect(),
        z,
        prediction,
        exact,
        rel_l2,
        termination: trace.termination.to_string(),
    })
}

/// Trains `target` (u1 or w2) with `method` (plain or sl) from `seed`.
#[wasm_bindgen]
pub fn train(target: &str, method: &str, eps: f64, seed: u64, max_iter: usize) -> Result<Training, JsError> {
    train_inner(target, method, eps, seed, max_iter).map_err(|e| JsError::new(&e))
}

pub fn rates_inner(eps_list: &[f64]) -> Result<String, String> {
    let rows = rate_suite(eps_list).map_err(|e| e.to_string())?;
    let mut out = format!("{SLOPE_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    Ok(out)
}

/// Log-log slopes of the asymptotic checks over `eps_list`, as CSV.
#[wasm_bindgen]
pub fn rates(eps_list: Vec<f64>) -> Result<String, JsError> {
    rates_inner(&eps_list).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_u1_profile_meets_walls() {
        let p = exact_profile_inner("u1", 1e-4, 0.0, 60).unwrap();
        assert_eq!(p.z.len(), p.values.len());
        assert!(p.values[0].abs() < 1e-12 && p.values.last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(exact_profile_inner("u9", 1e-4, 0.0, 10).is_err());
        assert!(train_inner("u2", "sl", 1e-4, 0, 5).is_err());
        assert!(train_inner("u1", "sl", 3.0, 0, 5).is_err());
    }

    #[test]
    fn short_sl_training_improves_the_loss() {
        let t = train_inner("u1", "sl", 1e-6, 0, 200).unwrap();
        assert!(t.losses.last().unwrap() < &t.losses[0]);
        assert!(t.rel_l2 < 1e-1);
    }

    #[test]
    fn rates_csv_has_a_row_per_check() {
        let csv = rates_inner(&[1e-3, 1e-4, 1e-5, 1e-6]).unwrap();
        assert_eq!(csv.lines().count(), 14);
        assert!(rates_inner(&[1e-3, 1e-4]).is_err());
    }
}
