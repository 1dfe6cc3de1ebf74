//! Browser bindings: rates at one distance, the multi-jump deviation curve and
//! a simulated telegraph trace. Every export returns a JSON string.

use jumpstat::liouville::CollectiveScope;
use jumpstat::rates::RateMethod;
use jumpstat::sweep::{rate_point, rel_dev, run_sweep, ConfigOverrides, SweepConfig};
use jumpstat::telegraph::simulate;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn config(rabi: f64, detuning: f64, extra: ConfigOverrides) -> Result<SweepConfig, String> {
    let o = ConfigOverrides { rabi: Some(rabi), detuning: Some(detuning), ..Default::default() };
    SweepConfig::resolve(extra.over(o)).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct MethodRates {
    pub method: String,
    /// `[p01, p10, p12, p21, p23, p32]` in units of `A3`.
    pub rates: Vec<f64>,
    pub deviation: Vec<f64>,
}

#[derive(Serialize)]
pub struct RatesReport {
    pub r: f64,
    pub independent: Vec<f64>,
    pub methods: Vec<MethodRates>,
}

fn neighbours(p: &jumpstat::rates::RateMatrix) -> Vec<f64> {
    (0..p.n_atoms).flat_map(|i| [p.get(i, i + 1), p.get(i + 1, i)]).collect()
}

pub fn rates_report(r: f64, rabi: f64, detuning: f64, all_transitions: bool) -> Result<RatesReport, String> {
    let scope = if all_transitions { CollectiveScope::AllTransitions } else { CollectiveScope::StrongTransition };
    let cfg = config(
        rabi,
        detuning,
        ConfigOverrides {
            methods: Some(vec![RateMethod::ClosedForm, RateMethod::Projection]),
            scope: Some(scope),
            ..Default::default()
        },
    )?;
    let pt = rate_point(&cfg, r).map_err(|e| e.to_string())?;
    let independent = neighbours(&pt.independent);
    let methods = pt
        .tables
        .iter()
        .map(|t| {
            let rates = neighbours(t);
            let deviation = rates.iter().zip(&independent).map(|(&a, &b)| a / b - 1.0).collect();
            MethodRates { method: t.method.to_string(), rates, deviation }
        })
        .collect();
    Ok(RatesReport { r, independent, methods })
}

#[derive(Serialize)]
pub struct DeviationCurve {
    pub r: Vec<f64>,
    pub double_exact: Vec<f64>,
    pub double_first_order: Vec<f64>,
    pub triple_exact: Vec<f64>,
    pub triple_first_order: Vec<f64>,
}

/// Signed relative deviation of `n_DJ`, `n_TJ` from independent atoms over `r`.
pub fn deviation_curve_data(
    rabi: f64,
    detuning: f64,
    r_min: f64,
    r_max: f64,
    points: usize,
) -> Result<DeviationCurve, String> {
    let cfg = config(
        rabi,
        detuning,
        ConfigOverrides { r_min: Some(r_min), r_max: Some(r_max), points: Some(points), ..Default::default() },
    )?;
    let rows = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let mut c = DeviationCurve {
        r: Vec::new(),
        double_exact: Vec::new(),
        double_first_order: Vec::new(),
        triple_exact: Vec::new(),
        triple_first_order: Vec::new(),
    };
    let signed = |x: f64, base: f64| rel_dev(x, base).copysign(x - base);
    for row in rows {
        let (dj0, tj0) = row.jumps_independent.ok_or("three atoms needed")?;
        c.r.push(row.point.r);
        c.double_exact.push(signed(row.jumps[0].0, dj0));
        c.double_first_order.push(signed(row.jumps[1].0, dj0));
        c.triple_exact.push(signed(row.jumps[0].1, tj0));
        c.triple_first_order.push(signed(row.jumps[1].1, tj0));
    }
    Ok(c)
}

#[derive(Serialize)]
pub struct Trace {
    /// Event times in units of the mean holding time.
    pub times: Vec<f64>,
    pub levels: Vec<u8>,
    pub initial_level: u8,
    pub t_end: f64,
    pub occupation: Vec<f64>,
}

/// Telegraph trace of the closed-form rates at distance `r`, about `events` jumps long.
pub fn trace_data(r: f64, rabi: f64, detuning: f64, events: u32, seed: u64) -> Result<Trace, String> {
    let cfg = config(rabi, detuning, ConfigOverrides::default())?;
    let p = cfg.system(r).and_then(|s| s.rates(RateMethod::ClosedForm)).map_err(|e| e.to_string())?;
    let pi = p.stationary().map_err(|e| e.to_string())?;
    let mean_exit: f64 = (0..p.levels()).map(|i| pi[i] * p.escape_rate(i)).sum();
    let unit = p.scaled(1.0 / mean_exit);
    let traj = simulate(&unit, f64::from(events.max(1)), seed).map_err(|e| e.to_string())?;
    Ok(Trace {
        occupation: traj.occupation(unit.levels()),
        times: traj.times,
        levels: traj.levels,
        initial_level: traj.initial_level,
        t_end: traj.t_end,
    })
}

fn to_json<T: Serialize>(v: Result<T, String>) -> Result<String, JsError> {
    let v = v.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn optimal_rabi() -> f64 {
    jumpstat::sweep::optimal_rabi()
}

#[wasm_bindgen]
pub fn rates_at(r: f64, rabi: f64, detuning: f64, all_transitions: bool) -> Result<String, JsError> {
    to_json(rates_report(r, rabi, detuning, all_transitions))
}

#[wasm_bindgen]
pub fn deviation_curve(rabi: f64, detuning: f64, r_min: f64, r_max: f64, points: usize) -> Result<String, JsError> {
    to_json(deviation_curve_data(rabi, detuning, r_min, r_max, points))
}

#[wasm_bindgen]
pub fn telegraph_trace(r: f64, rabi: f64, detuning: f64, events: u32, seed: u64) -> Result<String, JsError> {
    to_json(trace_data(r, rabi, detuning, events, seed))
}
