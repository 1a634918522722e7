//! Browser bindings for the static demo page in `www/`: render the gasket,
//! trace induction steps, and follow the Markov map from a clicked pixel.
//!
//! Every function returns plain data (bytes or a JSON string) so the same
//! code runs under native tests.

use rauzy_core::io::Raster;
use rauzy_core::markov::{self, ChartPoint};
use rauzy_core::rational::{format_rational, parse_rational};
use rauzy_core::{AcceleratedOutcome, SpecialSystem, StepOutcome};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Chaos-game density image as RGBA bytes, ready for `ImageData`.
#[wasm_bindgen]
pub fn render_gasket(points: u32, seed: u32, width: u32, height: u32) -> Vec<u8> {
    let bary = markov::chaos_game_barycentric(points as usize, 64, seed as u64, None, 1);
    let raster = rauzy_core::io::render(&bary, width as usize, height as usize);
    raster.gray().into_iter().flat_map(|g| [255 - g, 255 - g, 255 - g, 255]).collect()
}

fn error(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Induction trace from three `p/q` lengths separated by spaces or commas.
#[wasm_bindgen]
pub fn step_trace(lengths: &str, iters: u32, accelerated: bool) -> String {
    let parts: Vec<&str> = lengths.split([' ', ',']).filter(|s| !s.is_empty()).collect();
    let [a, b, c] = parts[..] else { return error("enter three lengths p/q") };
    let parsed: Result<Vec<_>, _> = [a, b, c].iter().map(|s| parse_rational(s)).collect();
    let [a, b, c]: [_; 3] = match parsed {
        Ok(v) => v.try_into().unwrap(),
        Err(e) => return error(e),
    };
    let mut s = match SpecialSystem::new(a, b, c) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let lengths = |s: &SpecialSystem| s.lengths().as_array().each_ref().map(format_rational);
    let mut records: Vec<Value> = vec![json!({ "iteration": 0, "outcome": "start", "lengths": lengths(&s) })];
    for i in 1..=iters {
        let (rec, next) = if accelerated {
            match s.accelerated_step() {
                AcceleratedOutcome::Continue(st) => (
                    json!({ "iteration": i, "outcome": "continue", "winner": st.winner, "n": st.n, "lengths": lengths(&st.system) }),
                    Some(st.system),
                ),
                AcceleratedOutcome::HoleAfter { k } => (json!({ "iteration": i, "outcome": "hole", "n": k }), None),
                AcceleratedOutcome::TieEncountered => (json!({ "iteration": i, "outcome": "tie" }), None),
            }
        } else {
            match s.rauzy_step() {
                StepOutcome::Continue(st) => (
                    json!({ "iteration": i, "outcome": "continue", "winner": st.winner, "n": 1, "lengths": lengths(&st.system) }),
                    Some(st.system),
                ),
                StepOutcome::Hole => (json!({ "iteration": i, "outcome": "hole" }), None),
                StepOutcome::TieEncountered => (json!({ "iteration": i, "outcome": "tie" }), None),
            }
        };
        records.push(rec);
        match next {
            Some(n) => s = n,
            None => break,
        }
    }
    json!({ "records": records }).to_string()
}

/// Orbit of the Markov map from the point under pixel `(col, row)` of a
/// `width × height` render: cell, next chart point and Jacobian per step.
#[wasm_bindgen]
pub fn locate(width: u32, height: u32, col: u32, row: u32, steps: u32) -> String {
    let x = Raster::new(width as usize, height as usize).unpixel(col as usize, row as usize);
    if x.iter().any(|&t| t <= 0.0) {
        return error("outside the simplex");
    }
    let mut p = ChartPoint::from_lengths(x);
    let chart = [p.a, p.b];
    let mut orbit = Vec::new();
    let mut stop = Value::Null;
    for _ in 0..steps {
        let jac = markov::jacobian(&p);
        match markov::apply_t(&p) {
            Ok((q, cell)) => {
                orbit.push(json!({ "cell": cell.to_string(), "a": q.a, "b": q.b, "jacobian": jac.ok() }));
                p = q;
            }
            Err(e) => {
                stop = json!(e.to_string());
                break;
            }
        }
    }
    json!({ "barycentric": x, "chart": chart, "orbit": orbit, "stop": stop })
        .to_string()
}
