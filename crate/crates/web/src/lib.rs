//! Browser bindings: single-point statistics, one trajectory snapshot and a
//! percolation spanning curve, each returned as JSON text.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fsmoc::circuits::{Circuit, CircuitConfig, Trajectory};
use fsmoc::harness::{simulate_point as simulate, Probes};
use fsmoc::lattice::{build_lieb_lattice, CellKind};
use fsmoc::percolation::SpanningCurve;
use fsmoc::rng::SampleRng;

#[derive(Serialize)]
struct QubitView {
    x: i32,
    y: i32,
    kind: &'static str,
    /// `X` on this qubit is a stabilizer.
    x_fixed: bool,
    /// The `Z` coupling on a bulk edge (`Z_v Z_e Z_v'`) is a stabilizer.
    coupled: bool,
}

#[derive(Serialize)]
struct PlaquetteView {
    x: i32,
    y: i32,
    flux_fixed: bool,
}

#[derive(Serialize)]
struct Snapshot {
    lx: usize,
    ly: usize,
    qubits: Vec<QubitView>,
    plaquettes: Vec<PlaquetteView>,
    s_topo: i64,
    bmi: i64,
    wilson: Vec<(usize, u8)>,
}

fn config(p_j: f64, p_k: f64, n_t: usize, half_cycle: bool, seed: u64) -> CircuitConfig {
    CircuitConfig { half_cycle, master_seed: seed, ..CircuitConfig::fs_moc(p_j, p_k, n_t) }
}

pub fn simulate_json(
    lx: usize,
    ly: usize,
    p_j: f64,
    p_k: f64,
    n_t: usize,
    n_s: usize,
    half_cycle: bool,
    seed: u64,
) -> Result<String, String> {
    let wilson = [lx.saturating_sub(4).max(1)];
    let stats =
        simulate(lx, ly, config(p_j, p_k, n_t, half_cycle, seed), n_s, &wilson, None).map_err(|e| e.to_string())?;
    serde_json::to_string(&stats).map_err(|e| e.to_string())
}

pub fn snapshot_json(
    lx: usize,
    ly: usize,
    p_j: f64,
    p_k: f64,
    n_t: usize,
    half_cycle: bool,
    seed: u64,
) -> Result<String, String> {
    let lat = build_lieb_lattice(lx, ly).map_err(|e| e.to_string())?;
    let circuit = Circuit::fs_moc(&lat);
    let cfg = config(p_j, p_k, n_t, half_cycle, seed);
    let mut traj = Trajectory::new(&circuit, cfg, SampleRng::new(seed, 0)).map_err(|e| e.to_string())?;
    traj.run();
    let t = traj.tableau();
    let nq = lat.nq();
    let fixed = |op: fsmoc::lattice::OperatorSupport| t.expectation_abs(&op.to_pauli(nq)) == 1;
    let qubits = (0..nq)
        .map(|q| {
            let (x, y) = lat.coord(q);
            let (kind, x_fixed, coupled) = match lat.kind(q) {
                CellKind::Vertex => ("vertex", fixed(lat.vertex_x(q)), false),
                CellKind::BulkEdge => ("edge", fixed(lat.edge_x(q)), fixed(lat.edge_coupling(q))),
                CellKind::BoundaryEdge => ("boundary", fixed(lat.edge_x(q)), false),
            };
            QubitView { x, y, kind, x_fixed, coupled }
        })
        .collect();
    let plaquettes = (0..lat.plaquettes().len())
        .map(|p| {
            let (x, y) = lat.plaquettes()[p].center;
            PlaquetteView { x, y, flux_fixed: fixed(lat.plaquette(p)) }
        })
        .collect();
    let probes = Probes::new(&lat, &[lx.saturating_sub(4).max(1)], &[]);
    let d = probes.evaluate(&lat, t).map_err(|e| e.to_string())?;
    let snap = Snapshot { lx, ly, qubits, plaquettes, s_topo: d.s_topo, bmi: d.bmi, wilson: d.wilson_abs };
    serde_json::to_string(&snap).map_err(|e| e.to_string())
}

pub fn percolation_json(dim: usize, l: usize, trials: usize, seed: u64, points: usize) -> Result<String, String> {
    let curve = SpanningCurve::sample(dim, l, trials, seed, None).map_err(|e| e.to_string())?;
    let n = points.max(2);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let p = i as f64 / (n - 1) as f64;
            (p, curve.at(p))
        })
        .collect();
    let half = curve.crossing(60, 1e-9).ok();
    serde_json::to_string(&serde_json::json!({ "l": l, "dim": dim, "points": pts, "half_crossing": half }))
        .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn simulate_point(
    lx: usize,
    ly: usize,
    p_j: f64,
    p_k: f64,
    n_t: usize,
    n_s: usize,
    half_cycle: bool,
    seed: u32,
) -> Result<String, JsValue> {
    simulate_json(lx, ly, p_j, p_k, n_t, n_s, half_cycle, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn trajectory_snapshot(
    lx: usize,
    ly: usize,
    p_j: f64,
    p_k: f64,
    n_t: usize,
    half_cycle: bool,
    seed: u32,
) -> Result<String, JsValue> {
    snapshot_json(lx, ly, p_j, p_k, n_t, half_cycle, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn percolation_curve(dim: usize, l: usize, trials: usize, seed: u32, points: usize) -> Result<String, JsValue> {
    percolation_json(dim, l, trials, seed as u64, points).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_at_deconfined_point() {
        let v: serde_json::Value = serde_json::from_str(&snapshot_json(8, 5, 0.0, 1.0, 2, false, 1).unwrap()).unwrap();
        assert_eq!(v["s_topo"], -1);
        assert!(v["plaquettes"].as_array().unwrap().iter().all(|p| p["flux_fixed"] == true));
    }

    #[test]
    fn simulate_and_percolation_json() {
        let v: serde_json::Value =
            serde_json::from_str(&simulate_json(8, 5, 1.0, 1.0, 2, 3, false, 0).unwrap()).unwrap();
        assert_eq!(v["bmi"]["mean"], 1.0);
        let c: serde_json::Value = serde_json::from_str(&percolation_json(2, 8, 50, 0, 11).unwrap()).unwrap();
        assert_eq!(c["points"].as_array().unwrap().len(), 11);
        assert!(simulate_json(2, 2, 0.5, 0.5, 1, 1, false, 0).is_err());
    }
}
