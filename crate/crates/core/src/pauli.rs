//! Sign-tracked Pauli operators on `n` qubits.
//!
//! A [`PauliString`] stores the operator `i^phase · X^x · Z^z` as two packed
//! bit-vectors plus a phase exponent mod 4. With this ordering a single `Y`
//! is `i·XZ`, so Hermitian operators have `phase ≡ |x ∧ z| (mod 2)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of 64-bit words needed to hold `n` bits.
#[inline]
pub fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Builds `X` on `x_support` times `Z` on `z_support` (qubits in both get `XZ`, i.e. `-iY`).
    pub fn from_supports(n: usize, x_support: &[usize], z_support: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in x_support {
            p.x[q / 64] ^= 1 << (q % 64);
        }
        for &q in z_support {
            p.z[q / 64] ^= 1 << (q % 64);
        }
        p
    }

    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, pauli);
        p
    }

    pub fn from_raw(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        debug_assert_eq!(x.len(), words_for(n));
        debug_assert_eq!(z.len(), words_for(n));
        Self { n, x, z, phase: phase & 3 }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the factor on `q` with a Hermitian single-qubit Pauli,
    /// keeping the operator's overall sign.
    pub fn set(&mut self, q: usize, pauli: Pauli) {
        let old_y = self.x_bit(q) && self.z_bit(q);
        let (x, z) = pauli.bits();
        let (w, b) = (q / 64, 1u64 << (q % 64));
        self.x[w] = if x { self.x[w] | b } else { self.x[w] & !b };
        self.z[w] = if z { self.z[w] | b } else { self.z[w] & !b };
        let new_y = x && z;
        match (old_y, new_y) {
            (false, true) => self.phase = (self.phase + 1) & 3,
            (true, false) => self.phase = (self.phase + 3) & 3,
            _ => {}
        }
    }

    /// Multiplies the operator by -1.
    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum()
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 & 1) == (self.y_count() & 1)
    }

    /// `+1` or `-1` for Hermitian operators, measured relative to the
    /// positive product of `X`, `Y`, `Z` factors.
    pub fn sign(&self) -> i8 {
        let rel = (self.phase as u32 + 4 - (self.y_count() & 3)) & 3;
        match rel {
            0 => 1,
            2 => -1,
            _ => 0,
        }
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Qubits where the operator is not the identity, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, (a, b)) in self.x.iter().zip(&self.z).enumerate() {
            let mut m = a | b;
            while m != 0 {
                let t = m.trailing_zeros() as usize;
                out.push(w * 64 + t);
                m &= m - 1;
            }
        }
        out
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 0
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let mut cross = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for i in 0..self.x.len() {
            cross += (self.z[i] & other.x[i]).count_ones();
            x.push(self.x[i] ^ other.x[i]);
            z.push(self.z[i] ^ other.z[i]);
        }
        let phase = ((self.phase as u32 + other.phase as u32 + 2 * cross) & 3) as u8;
        PauliString { n: self.n, x, z, phase }
    }

    /// Same Pauli content ignoring phase.
    pub fn same_up_to_phase(&self, other: &PauliString) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Express the phase relative to the Hermitian XYZ product.
        let rel = (self.phase as u32 + 4 - (self.y_count() & 3)) & 3;
        f.write_str(["+", "+i", "-", "-i"][rel as usize])?;
        for q in 0..self.n {
            let c = match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses strings such as `"+XIZY"`, `"-ZZ"`, `"+iX"` or a bare `"XYZ"`.
    fn from_str(s: &str) -> Result<Self> {
        let (rel, body) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        let mut p = PauliString::identity(n);
        for (q, c) in body.chars().enumerate() {
            let pauli = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::Parse(format!("invalid Pauli character {c:?} in {s:?}"))),
            };
            p.set(q, pauli);
        }
        p.phase = (p.phase + rel) & 3;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").mul(&p("Z")), p("-iY"));
        assert_eq!(p("Z").mul(&p("X")), p("+iY"));
        assert_eq!(p("Y").mul(&p("Y")), p("I"));
        assert_eq!(p("X").mul(&p("Y")), p("+iZ"));
    }

    #[test]
    fn display_roundtrip_and_sign() {
        let a = p("-XYZI");
        assert_eq!(a.to_string(), "-XYZI");
        assert!(a.is_hermitian());
        assert_eq!(a.sign(), -1);
        assert!(!p("+iXZ").is_hermitian());
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZZ")));
        assert!(p("Y").commutes_with(&p("Y")));
    }

    #[test]
    fn set_preserves_sign() {
        let mut a = p("-XZ");
        a.set(0, Pauli::Y);
        assert_eq!(a, p("-YZ"));
        a.set(0, Pauli::I);
        assert_eq!(a, p("-IZ"));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(fs, ph)| {
            let mut q = PauliString::identity(n);
            for (i, f) in fs.into_iter().enumerate() {
                q.set(i, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][f as usize]);
            }
            q.phase = (q.phase + ph) & 3;
            q
        })
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_pauli(70), b in arb_pauli(70), c in arb_pauli(70)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commutation_matches_product_order(a in arb_pauli(9), b in arb_pauli(9)) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            prop_assert!(ab.same_up_to_phase(&ba));
            let same = ab.phase() == ba.phase();
            prop_assert_eq!(same, a.commutes_with(&b));
        }
    }
}
