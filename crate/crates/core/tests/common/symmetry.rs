use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsmoc::circuits::{Circuit, CircuitConfig, RoundKind, Trajectory};
use fsmoc::diagnostics::{bmi, tee, wilson_abs};
use fsmoc::lattice::{bmi_regions, build_lieb_lattice, tee_regions, wilson_line, Lattice};
use fsmoc::rng::SampleRng;
use fsmoc::{Membership, OutcomePolicy, Tableau};

/// TEE, BMI, a length-4 Wilson line and the three region entropies.
pub fn measures(lat: &Lattice, t: &Tableau) -> (i64, i64, u8, Vec<usize>) {
    let (a, b, c) = tee_regions(lat).unwrap();
    let (ba, bb) = bmi_regions(lat).unwrap();
    let w = wilson_line(lat, 4).unwrap();
    let cuts: Vec<usize> =
        [&a.qubits, &b.qubits, &c.qubits].iter().map(|q| t.entanglement_entropy(q).unwrap()).collect();
    (tee(t, &a, &b, &c).unwrap(), bmi(t, &ba, &bb).unwrap(), wilson_abs(t, &w), cuts)
}

/// Runs `pairs` trajectories on (8,5) twice with different outcome streams
/// and the same basis coins.
pub fn outcome_invariance(pairs: u64) -> Result<(), String> {
    let lat = build_lieb_lattice(8, 5).unwrap();
    let circuit = Circuit::fs_moc(&lat);
    let mut pick = ChaCha8Rng::seed_from_u64(17);
    for i in 0..pairs {
        let cfg = CircuitConfig { half_cycle: i % 2 == 1, ..CircuitConfig::fs_moc(pick.gen(), pick.gen(), 3) };
        let run = |outcome_seed: u64| {
            let mut tr = Trajectory::new(&circuit, cfg, SampleRng::with_outcome_seed(5, i, outcome_seed)).unwrap();
            tr.run();
            tr.into_tableau()
        };
        let (t1, t2) = (run(1000 + i), run(2000 + i));
        if measures(&lat, &t1) != measures(&lat, &t2) {
            return Err(format!("pair {i}, {cfg:?}: entanglement differs"));
        }
        // Same stabilizer group up to signs.
        let strip = |t: &Tableau| -> Vec<(Vec<u64>, Vec<u64>)> {
            t.canonical_generators().iter().map(|g| (g.x_words().to_vec(), g.z_words().to_vec())).collect()
        };
        if strip(&t1) != strip(&t2) {
            return Err(format!("pair {i}, {cfg:?}: groups differ beyond signs"));
        }
    }
    Ok(())
}

/// Gauss law and the boundary symmetry after every round under `force_plus`.
pub fn gauss_law_and_boundary_symmetry() -> Result<(), String> {
    for (lx, ly) in [(8, 5), (6, 4)] {
        let lat = build_lieb_lattice(lx, ly).unwrap();
        let circuit = Circuit::fs_moc(&lat);
        let p_boundary = lat.boundary_symmetry();
        let gauss: Vec<_> = lat.vertices().map(|v| lat.gauss_law(v).to_pauli(lat.nq())).collect();
        for (pj, pk) in [(0.3, 0.6), (0.8, 0.2), (0.5, 0.5), (0.0, 1.0), (1.0, 1.0)] {
            let cfg = CircuitConfig { outcome_policy: OutcomePolicy::ForcePlus, ..CircuitConfig::fs_moc(pj, pk, 4) };
            let mut tr = Trajectory::for_sample(&circuit, cfg, 3).unwrap();
            for step in 0..4 {
                for kind in [RoundKind::Z, RoundKind::X] {
                    tr.round(kind);
                    let t = tr.tableau();
                    if let Some(v) = gauss.iter().position(|g| t.group_contains(g) != Membership::Plus) {
                        return Err(format!("({lx},{ly}) ({pj},{pk}) step {step} {kind:?}: G_{v} not +1"));
                    }
                    if t.group_contains(&p_boundary) != Membership::Plus {
                        return Err(format!("({lx},{ly}) ({pj},{pk}) step {step} {kind:?}: P_boundary not +1"));
                    }
                }
            }
        }
    }
    Ok(())
}
