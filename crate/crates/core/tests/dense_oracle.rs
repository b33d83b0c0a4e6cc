//! Tableau operations against a dense state-vector simulator on up to four qubits.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fsmoc::{OutcomePolicy, Tableau};

mod common;
use common::{check_instance, random_pauli, Dense};

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn tableau_matches_state_vector(seed in any::<u64>()) {
        check_instance(seed)?;
    }
}

#[test]
fn force_plus_matches_positive_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = 3;
        let mut t = Tableau::new_plus(n);
        let mut d = Dense::plus(n);
        for _ in 0..6 {
            let p = random_pauli(n, &mut rng);
            let out = t.measure_pauli(&p, OutcomePolicy::ForcePlus, &mut rng).unwrap();
            let (prob, after) = d.project(&p, out.value);
            assert!(prob > 0.4);
            if !out.deterministic {
                assert_eq!(out.value, 1);
            }
            d = after;
        }
    }
}

#[test]
fn bell_and_ghz_entropies() {
    let mut t = Tableau::new_plus(4);
    let mut d = Dense::plus(4);
    for q in 1..4 {
        t.apply_h(q);
        d.h(q);
    }
    for q in 1..4 {
        t.apply_h(q);
        d.h(q);
        t.apply_cz(0, q);
        d.cz(0, q);
        t.apply_h(q);
        d.h(q);
    }
    // GHZ on four qubits: every proper bipartition carries one bit.
    for sub in [vec![0], vec![1, 2], vec![0, 3], vec![0, 1, 2]] {
        assert_eq!(t.entanglement_entropy(&sub).unwrap(), 1);
        assert!((d.entropy(&sub) - 1.0).abs() < 1e-9);
    }
}
