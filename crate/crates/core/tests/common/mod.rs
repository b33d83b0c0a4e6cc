//! Shared oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsmoc::{Membership, OutcomePolicy, PauliString, Tableau};

pub mod symmetry;

pub const EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Dense {
    n: usize,
    amp: Vec<Complex64>,
}

impl Dense {
    pub fn plus(n: usize) -> Self {
        let a = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Self { n, amp: vec![a; 1 << n] }
    }

    pub fn h(&mut self, q: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for b in 0..self.amp.len() {
            if b >> q & 1 == 0 {
                let (a0, a1) = (self.amp[b], self.amp[b | 1 << q]);
                self.amp[b] = (a0 + a1) * s;
                self.amp[b | 1 << q] = (a0 - a1) * s;
            }
        }
    }

    pub fn cz(&mut self, a: usize, c: usize) {
        for b in 0..self.amp.len() {
            if b >> a & 1 == 1 && b >> c & 1 == 1 {
                self.amp[b] = -self.amp[b];
            }
        }
    }

    /// `P|ψ⟩` with `P = i^phase X^x Z^z`.
    pub fn apply(&self, p: &PauliString) -> Vec<Complex64> {
        let (x, z) = (p.x_words()[0] as usize, p.z_words()[0] as usize);
        let ph = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()]
            [p.phase() as usize % 4];
        let mut out = vec![Complex64::new(0.0, 0.0); self.amp.len()];
        for (b, &a) in self.amp.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ x] = a * sign * ph;
        }
        out
    }

    pub fn expectation(&self, p: &PauliString) -> f64 {
        let pv = self.apply(p);
        self.amp.iter().zip(&pv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
    }

    /// Probability of outcome `s` and the collapsed state.
    pub fn project(&self, p: &PauliString, s: i8) -> (f64, Dense) {
        let pv = self.apply(p);
        let mut amp: Vec<Complex64> = self.amp.iter().zip(&pv).map(|(a, b)| (a + b * s as f64) * 0.5).collect();
        let prob: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
        if prob > EPS {
            let k = 1.0 / prob.sqrt();
            amp.iter_mut().for_each(|a| *a *= k);
        }
        (prob, Dense { n: self.n, amp })
    }

    /// Von Neumann entropy (bits) of the reduced state on `sub`.
    pub fn entropy(&self, sub: &[usize]) -> f64 {
        let rest: Vec<usize> = (0..self.n).filter(|q| !sub.contains(q)).collect();
        let (da, dr) = (1 << sub.len(), 1 << rest.len());
        let index = |i: usize, j: usize| -> usize {
            let mut b = 0;
            for (k, &q) in sub.iter().enumerate() {
                b |= (i >> k & 1) << q;
            }
            for (k, &q) in rest.iter().enumerate() {
                b |= (j >> k & 1) << q;
            }
            b
        };
        let rho = DMatrix::from_fn(da, da, |i, k| {
            (0..dr).map(|j| self.amp[index(i, j)] * self.amp[index(k, j)].conj()).sum::<Complex64>()
        });
        let eig = rho.symmetric_eigenvalues();
        -eig.iter().filter(|&&l| l > 1e-12).map(|&l| l * l.log2()).sum::<f64>()
    }
}

pub fn random_pauli(n: usize, rng: &mut impl Rng) -> PauliString {
    loop {
        let x = rng.gen_range(0..1u64 << n);
        let z = rng.gen_range(0..1u64 << n);
        if x | z == 0 {
            continue;
        }
        let y = (x & z).count_ones() as u8;
        let phase = (y + 2 * rng.gen_range(0..2u8)) % 4;
        return PauliString::from_raw(n, vec![x], vec![z], phase);
    }
}

pub fn random_subset(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

/// Random Clifford circuit with interleaved Pauli measurements, run on both
/// simulators; every measurement and the final state are cross-checked.
pub fn check_instance(seed: u64) -> std::result::Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4usize);
    let mut t = Tableau::new_plus(n);
    let mut d = Dense::plus(n);
    for _ in 0..rng.gen_range(4..16) {
        match rng.gen_range(0..3) {
            0 => {
                let q = rng.gen_range(0..n);
                t.apply_h(q);
                d.h(q);
            }
            1 if n > 1 => {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                t.apply_cz(a, b);
                d.cz(a, b);
            }
            _ => {
                let p = random_pauli(n, &mut rng);
                let before = d.expectation(&p);
                let out = t.measure_pauli(&p, OutcomePolicy::Random, &mut rng).unwrap();
                let (prob, after) = d.project(&p, out.value);
                if out.deterministic {
                    prop_assert!((prob - 1.0).abs() < 1e-9, "deterministic outcome has probability {prob}");
                    prop_assert!((before - out.value as f64).abs() < 1e-9);
                } else {
                    prop_assert!((prob - 0.5).abs() < 1e-9, "random outcome has probability {prob}");
                }
                d = after;
            }
        }
        t.check_invariants().unwrap();
    }
    for _ in 0..4 {
        let sub = random_subset(n, &mut rng);
        let s = t.entanglement_entropy(&sub).unwrap() as f64;
        prop_assert!((s - d.entropy(&sub)).abs() < 1e-6, "entropy of {sub:?}: {s} vs {}", d.entropy(&sub));
    }
    for _ in 0..8 {
        let p = random_pauli(n, &mut rng);
        let e = d.expectation(&p);
        let want = if e > 1.0 - EPS {
            Membership::Plus
        } else if e < -1.0 + EPS {
            Membership::Minus
        } else {
            prop_assert!(e.abs() < EPS, "stabilizer expectation must be 0 or ±1, got {e}");
            Membership::Absent
        };
        prop_assert_eq!(t.group_contains(&p), want);
        prop_assert_eq!(t.expectation_abs(&p), (want != Membership::Absent) as u8);
    }
    // Every generator is a +1 eigen-operator of the dense state.
    for g in t.generators() {
        prop_assert!((d.expectation(&g) - 1.0).abs() < 1e-9);
    }
    Ok(())
}

/// Rank over GF(2) by elimination on a dense boolean matrix.
pub fn naive_rank(mut m: Vec<Vec<bool>>) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c]) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] {
                let pivot = m[rank].clone();
                m[r].iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}
