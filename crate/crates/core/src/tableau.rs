//! Stabilizer tableau without destabilizers.
//!
//! Generators are stored column-major: for every qubit there is one bitset
//! over generator rows for the `X` part and one for the `Z` part. A Pauli
//! measurement touches only the columns in the measured operator's support
//! plus the support of the pivot generator, so the sparse checks of the
//! measurement-only circuits stay cheap even for several hundred qubits.
//!
//! Row `r` represents `i^phase_r · X^{x_r} · Z^{z_r}`; the phase is split into
//! two bit-planes (`lo` + 2·`hi`).

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2;
use crate::pauli::{words_for, PauliString};

/// How outcomes of non-deterministic measurements are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomePolicy {
    /// Fair coin from the caller's outcome stream.
    Random,
    /// Always project onto the +1 eigenspace.
    ForcePlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    /// `+1` or `-1`.
    pub value: i8,
    pub deterministic: bool,
}

/// Whether `±op` belongs to the stabilizer group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Plus,
    Minus,
    Absent,
}

impl Membership {
    pub fn is_present(self) -> bool {
        self != Membership::Absent
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    len: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    lo: Vec<u64>,
    hi: Vec<u64>,
}

impl std::fmt::Debug for Tableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.generators()).finish()
    }
}

#[inline]
fn bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

impl Tableau {
    fn empty(n: usize) -> Self {
        let words = words_for(n).max(1);
        Self {
            n,
            len: 0,
            words,
            xs: vec![0; n * words],
            zs: vec![0; n * words],
            lo: vec![0; words],
            hi: vec![0; words],
        }
    }

    /// The product state `|+⟩^{⊗n}`, with generator `r` equal to `X_r`.
    pub fn new_plus(n: usize) -> Self {
        let mut t = Self::empty(n);
        for q in 0..n {
            t.xs[q * t.words + q / 64] |= 1 << (q % 64);
        }
        t.len = n;
        t
    }

    /// The product state `|0⟩^{⊗n}`.
    pub fn new_zero(n: usize) -> Self {
        let mut t = Self::empty(n);
        for q in 0..n {
            t.zs[q * t.words + q / 64] |= 1 << (q % 64);
        }
        t.len = n;
        t
    }

    /// Builds a tableau from explicit generators, checking that they are
    /// Hermitian, pairwise commuting and independent.
    pub fn from_generators(n: usize, gens: &[PauliString]) -> Result<Self> {
        if gens.len() > n {
            return Err(Error::Generators(format!("{} generators exceed {n} qubits", gens.len())));
        }
        for g in gens {
            if g.num_qubits() != n {
                return Err(Error::Dimension { expected: n, got: g.num_qubits() });
            }
            if !g.is_hermitian() {
                return Err(Error::NonHermitian(g.to_string()));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::Generators(format!("{a} and {b} anticommute")));
                }
            }
        }
        let mut t = Self::empty(n);
        for g in gens {
            t.push_row(g);
        }
        if t.symplectic_rank() != gens.len() {
            return Err(Error::Generators("generators are not independent".into()));
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of generators.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when the generators fix a pure state (`len == n`).
    pub fn is_complete(&self) -> bool {
        self.len == self.n
    }

    #[inline]
    fn xcol(&self, q: usize) -> &[u64] {
        &self.xs[q * self.words..(q + 1) * self.words]
    }

    #[inline]
    fn zcol(&self, q: usize) -> &[u64] {
        &self.zs[q * self.words..(q + 1) * self.words]
    }

    fn row_phase(&self, r: usize) -> u8 {
        (bit(&self.lo, r) as u8) | ((bit(&self.hi, r) as u8) << 1)
    }

    fn set_row_phase(&mut self, r: usize, phase: u8) {
        let (w, b) = (r / 64, 1u64 << (r % 64));
        self.lo[w] = if phase & 1 == 1 { self.lo[w] | b } else { self.lo[w] & !b };
        self.hi[w] = if phase & 2 == 2 { self.hi[w] | b } else { self.hi[w] & !b };
    }

    pub fn generator(&self, r: usize) -> PauliString {
        assert!(r < self.len, "generator index out of range");
        let w = words_for(self.n);
        let mut x = vec![0u64; w];
        let mut z = vec![0u64; w];
        for q in 0..self.n {
            if bit(self.xcol(q), r) {
                x[q / 64] |= 1 << (q % 64);
            }
            if bit(self.zcol(q), r) {
                z[q / 64] |= 1 << (q % 64);
            }
        }
        PauliString::from_raw(self.n, x, z, self.row_phase(r))
    }

    pub fn generators(&self) -> Vec<PauliString> {
        (0..self.len).map(|r| self.generator(r)).collect()
    }

    fn push_row(&mut self, op: &PauliString) {
        let r = self.len;
        self.len += 1;
        self.write_row(r, op);
    }

    fn write_row(&mut self, r: usize, op: &PauliString) {
        let (w, b) = (r / 64, 1u64 << (r % 64));
        let words = self.words;
        for q in 0..self.n {
            let i = q * words + w;
            self.xs[i] = if op.x_bit(q) { self.xs[i] | b } else { self.xs[i] & !b };
            self.zs[i] = if op.z_bit(q) { self.zs[i] | b } else { self.zs[i] & !b };
        }
        self.set_row_phase(r, op.phase());
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (wa, ba) = (a / 64, a % 64);
        let (wb, bb) = (b / 64, b % 64);
        let words = self.words;
        let swap_in = |v: &mut [u64], base: usize| {
            let ia = (v[base + wa] >> ba) & 1;
            let ib = (v[base + wb] >> bb) & 1;
            if ia != ib {
                v[base + wa] ^= 1 << ba;
                v[base + wb] ^= 1 << bb;
            }
        };
        for q in 0..self.n {
            swap_in(&mut self.xs, q * words);
            swap_in(&mut self.zs, q * words);
        }
        swap_in(&mut self.lo, 0);
        swap_in(&mut self.hi, 0);
    }

    /// Bitset over rows of generators anticommuting with `op`.
    fn anticommuting_rows(&self, op: &PauliString) -> Vec<u64> {
        let mut mask = vec![0u64; self.words];
        for q in op.support() {
            if op.z_bit(q) {
                for (m, c) in mask.iter_mut().zip(self.xcol(q)) {
                    *m ^= c;
                }
            }
            if op.x_bit(q) {
                for (m, c) in mask.iter_mut().zip(self.zcol(q)) {
                    *m ^= c;
                }
            }
        }
        mask
    }

    /// Replaces every row `i` selected by `mask` with `g_src · g_i`.
    fn mul_row_into(&mut self, src: usize, mask: &[u64]) {
        let (w, b) = (src / 64, src % 64);
        let words = self.words;
        // Sign from commuting Z^{z_src} past X^{x_i}.
        let mut parity = vec![0u64; words];
        for q in 0..self.n {
            if (self.zs[q * words + w] >> b) & 1 == 1 {
                for (p, c) in parity.iter_mut().zip(&self.xs[q * words..(q + 1) * words]) {
                    *p ^= c;
                }
            }
        }
        for q in 0..self.n {
            let base = q * words;
            if (self.xs[base + w] >> b) & 1 == 1 {
                for k in 0..words {
                    self.xs[base + k] ^= mask[k];
                }
            }
            if (self.zs[base + w] >> b) & 1 == 1 {
                for k in 0..words {
                    self.zs[base + k] ^= mask[k];
                }
            }
        }
        let src_phase = self.row_phase(src);
        for k in 0..words {
            let m = mask[k];
            if src_phase & 1 == 1 {
                let carry = self.lo[k] & m;
                self.lo[k] ^= m;
                self.hi[k] ^= carry;
            }
            if src_phase & 2 == 2 {
                self.hi[k] ^= m;
            }
            self.hi[k] ^= parity[k] & m;
        }
    }

    fn check_operator(&self, op: &PauliString) -> Result<()> {
        if op.num_qubits() != self.n {
            return Err(Error::Dimension { expected: self.n, got: op.num_qubits() });
        }
        if !op.is_hermitian() {
            return Err(Error::NonHermitian(op.to_string()));
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(policy: OutcomePolicy, rng: &mut R) -> i8 {
        match policy {
            OutcomePolicy::ForcePlus => 1,
            OutcomePolicy::Random => {
                if rng.gen::<bool>() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    /// Handles the anticommuting branch; returns false when `op` commutes with
    /// every generator.
    fn try_random_update<R: Rng + ?Sized>(
        &mut self,
        op: &PauliString,
        policy: OutcomePolicy,
        rng: &mut R,
    ) -> Option<i8> {
        let mut mask = self.anticommuting_rows(op);
        let k = mask.iter().enumerate().find(|(_, &m)| m != 0).map(|(w, m)| w * 64 + m.trailing_zeros() as usize)?;
        self.swap_rows(0, k);
        if k != 0 {
            let kb = bit(&mask, k);
            let zb = bit(&mask, 0);
            if kb != zb {
                mask[0] ^= 1;
                mask[k / 64] ^= 1 << (k % 64);
            }
        }
        mask[0] &= !1;
        if mask.iter().any(|&m| m != 0) {
            self.mul_row_into(0, &mask);
        }
        let value = Self::draw(policy, rng);
        let row = if value < 0 { op.clone().negated() } else { op.clone() };
        self.write_row(0, &row);
        Some(value)
    }

    /// Projective measurement of a Hermitian Pauli operator.
    ///
    /// If a generator anticommutes with `op` it is swapped to the front, multiplied
    /// into every other anticommuting generator and replaced by `±op`. Otherwise
    /// the outcome is fixed by group membership, or `±op` is appended when the
    /// generator set is incomplete and `op` is independent of it.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        op: &PauliString,
        policy: OutcomePolicy,
        rng: &mut R,
    ) -> Result<MeasureOutcome> {
        self.check_operator(op)?;
        if let Some(value) = self.try_random_update(op, policy, rng) {
            return Ok(MeasureOutcome { value, deterministic: false });
        }
        match self.group_contains(op) {
            Membership::Plus => Ok(MeasureOutcome { value: 1, deterministic: true }),
            Membership::Minus => Ok(MeasureOutcome { value: -1, deterministic: true }),
            Membership::Absent => {
                let value = Self::draw(policy, rng);
                let row = if value < 0 { op.clone().negated() } else { op.clone() };
                self.push_row(&row);
                Ok(MeasureOutcome { value, deterministic: false })
            }
        }
    }

    /// Measurement that skips resolving the sign of deterministic outcomes on a
    /// complete tableau, where the state does not change. Returns whether the
    /// outcome was random.
    pub fn project<R: Rng + ?Sized>(&mut self, op: &PauliString, policy: OutcomePolicy, rng: &mut R) -> bool {
        debug_assert!(self.check_operator(op).is_ok());
        if self.try_random_update(op, policy, rng).is_some() {
            return true;
        }
        if self.is_complete() {
            return false;
        }
        self.measure_pauli(op, policy, rng).map(|o| !o.deterministic).unwrap_or(false)
    }

    /// True iff `op` commutes with every generator.
    pub fn commutes_with_all(&self, op: &PauliString) -> bool {
        self.anticommuting_rows(op).iter().all(|&m| m == 0)
    }

    /// Decides whether `+op`, `-op` or neither is in the stabilizer group.
    pub fn group_contains(&self, op: &PauliString) -> Membership {
        if op.num_qubits() != self.n || !self.commutes_with_all(op) {
            return Membership::Absent;
        }
        let unknowns = self.len;
        let uw = words_for(unknowns).max(1);
        let mut eqs = Vec::with_capacity(2 * self.n);
        for q in 0..self.n {
            eqs.push((self.xcol(q)[..uw].to_vec(), op.x_bit(q)));
            eqs.push((self.zcol(q)[..uw].to_vec(), op.z_bit(q)));
        }
        let Some(coeffs) = gf2::solve(eqs, unknowns) else {
            return Membership::Absent;
        };
        let mut prod = PauliString::identity(self.n);
        for r in 0..unknowns {
            if bit(&coeffs, r) {
                prod = prod.mul(&self.generator(r));
            }
        }
        debug_assert!(prod.same_up_to_phase(op));
        match (prod.phase() + 4 - op.phase()) & 3 {
            0 => Membership::Plus,
            2 => Membership::Minus,
            _ => Membership::Absent,
        }
    }

    /// `|⟨op⟩|` for a complete tableau: 1 if `±op` is a stabilizer, else 0.
    pub fn expectation_abs(&self, op: &PauliString) -> u8 {
        if self.is_complete() {
            self.commutes_with_all(op) as u8
        } else {
            self.group_contains(op).is_present() as u8
        }
    }

    /// GF(2) rank of the stacked `(x | z)` generator rows.
    pub fn symplectic_rank(&self) -> usize {
        let mut buf = Vec::with_capacity(2 * self.n * self.words);
        buf.extend_from_slice(&self.xs);
        buf.extend_from_slice(&self.zs);
        gf2::rank_in_place(&mut buf, 2 * self.n, self.words)
    }

    /// Rank of the generator matrix restricted to the columns of `qubits`.
    pub fn restricted_rank(&self, qubits: &[usize]) -> usize {
        let words = self.words;
        let mut buf = Vec::with_capacity(2 * qubits.len() * words);
        for &q in qubits {
            buf.extend_from_slice(self.xcol(q));
            buf.extend_from_slice(self.zcol(q));
        }
        gf2::rank_in_place(&mut buf, 2 * qubits.len(), words)
    }

    /// Entanglement entropy in bits of `qubits` for the pure state fixed by a
    /// complete tableau: rank of the restricted generator matrix minus `|A|`.
    pub fn entanglement_entropy(&self, qubits: &[usize]) -> Result<usize> {
        if !self.is_complete() {
            return Err(Error::Underdetermined { generators: self.len, qubits: self.n });
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n) {
            return Err(Error::Region(format!("qubit {q} out of range for {} qubits", self.n)));
        }
        let rank = self.restricted_rank(qubits);
        Ok(rank - qubits.len())
    }

    /// Conjugates every generator by a controlled-Z on qubits `a`, `b`.
    pub fn apply_cz(&mut self, a: usize, b: usize) {
        assert!(a != b && a < self.n && b < self.n);
        let words = self.words;
        for k in 0..words {
            let xa = self.xs[a * words + k];
            let xb = self.xs[b * words + k];
            self.zs[a * words + k] ^= xb;
            self.zs[b * words + k] ^= xa;
            self.hi[k] ^= xa & xb;
        }
    }

    /// Conjugates every generator by a Hadamard on `q`.
    pub fn apply_h(&mut self, q: usize) {
        let words = self.words;
        for k in 0..words {
            let x = self.xs[q * words + k];
            let z = self.zs[q * words + k];
            // H Y H = -Y
            self.hi[k] ^= x & z;
            self.xs[q * words + k] = z;
            self.zs[q * words + k] = x;
        }
    }

    /// Stabilizer group of the reduced state on `keep`.
    ///
    /// Row-reduces over every column outside `keep`; the generators left with
    /// no support outside `keep` generate the reduced stabilizer group. For a
    /// state that factorizes across the cut the result is complete.
    pub fn reduce_onto(&self, keep: &[usize]) -> Result<Tableau> {
        let mut kept = vec![false; self.n];
        for &q in keep {
            if q >= self.n {
                return Err(Error::Region(format!("qubit {q} out of range")));
            }
            kept[q] = true;
        }
        let mut t = self.clone();
        let words = t.words;
        let mut free = vec![0u64; words];
        for r in 0..t.len {
            free[r / 64] |= 1 << (r % 64);
        }
        for q in (0..self.n).filter(|&q| !kept[q]) {
            for use_x in [true, false] {
                let col = if use_x { t.xcol(q) } else { t.zcol(q) };
                let mut mask: Vec<u64> = col.iter().zip(&free).map(|(c, f)| c & f).collect();
                let Some(p) =
                    mask.iter().enumerate().find(|(_, &m)| m != 0).map(|(w, m)| w * 64 + m.trailing_zeros() as usize)
                else {
                    continue;
                };
                mask[p / 64] &= !(1 << (p % 64));
                free[p / 64] &= !(1 << (p % 64));
                if mask.iter().any(|&m| m != 0) {
                    t.mul_row_into(p, &mask);
                }
            }
        }
        let mut out = Tableau::empty(keep.len());
        for r in (0..t.len).filter(|&r| bit(&free, r)) {
            let full = t.generator(r);
            let mut op = PauliString::identity(keep.len());
            for (i, &q) in keep.iter().enumerate() {
                op.set(i, full.get(q));
            }
            // `set` keeps the ±1 sign relative to XYZ form; transfer the sign.
            if op.sign() != full.sign() {
                op.negate();
            }
            out.push_row(&op);
        }
        Ok(out)
    }

    /// `self ⊗ |+⟩^{⊗extra}`, with the new qubits appended after the old ones.
    pub fn append_plus(&self, extra: usize) -> Tableau {
        let mut t = Tableau::empty(self.n + extra);
        let (ow, nw) = (self.words, t.words);
        for q in 0..self.n {
            t.xs[q * nw..q * nw + ow].copy_from_slice(self.xcol(q));
            t.zs[q * nw..q * nw + ow].copy_from_slice(self.zcol(q));
        }
        t.lo[..ow].copy_from_slice(&self.lo);
        t.hi[..ow].copy_from_slice(&self.hi);
        for i in 0..extra {
            let (q, r) = (self.n + i, self.len + i);
            t.xs[q * nw + r / 64] |= 1 << (r % 64);
        }
        t.len = self.len + extra;
        t
    }

    /// Reduced row-echelon generators with resolved signs; equal groups give
    /// equal canonical forms.
    pub fn canonical_generators(&self) -> Vec<PauliString> {
        let mut rows = self.generators();
        let mut rank = 0;
        for col in 0..2 * self.n {
            let probe = |p: &PauliString| {
                if col < self.n {
                    p.x_bit(col)
                } else {
                    p.z_bit(col - self.n)
                }
            };
            let Some(pivot) = (rank..rows.len()).find(|&r| probe(&rows[r])) else {
                continue;
            };
            rows.swap(rank, pivot);
            let prow = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && probe(row) {
                    *row = prow.mul(row);
                }
            }
            rank += 1;
        }
        rows
    }

    /// Pairwise commutation and independence of the generators.
    pub fn check_invariants(&self) -> Result<()> {
        let gens = self.generators();
        for (i, a) in gens.iter().enumerate() {
            if !a.is_hermitian() {
                return Err(Error::NonHermitian(a.to_string()));
            }
            for b in &gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::Generators(format!("{a} and {b} anticommute")));
                }
            }
        }
        if self.symplectic_rank() != self.len {
            return Err(Error::Generators("generators are dependent".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn plaquette_measurement_on_square_matches_worked_example() {
        // Qubits 0..4 are vertices, 4..8 are the edges of one square.
        let mut t = Tableau::new_plus(8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let plaquette = p("IIIIZZZZ");
        let out = t.measure_pauli(&plaquette, OutcomePolicy::ForcePlus, &mut rng).unwrap();
        assert!(!out.deterministic);
        let expected =
            ["+IIIIZZZZ", "+IXII____", "+IIXI____", "+IIIX____", "+XIII____", "+____XX__", "+____X_X_", "+____X__X"];
        let got: Vec<String> = t.generators().iter().map(|g| g.to_string()).collect();
        let expected: Vec<String> = expected.iter().map(|s| p(s).to_string()).collect();
        assert_eq!(got, expected);
        t.check_invariants().unwrap();
    }

    #[test]
    fn measuring_a_generator_is_deterministic() {
        let mut t = Tableau::new_plus(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = t.measure_pauli(&p("XII"), OutcomePolicy::Random, &mut rng).unwrap();
        assert_eq!(out, MeasureOutcome { value: 1, deterministic: true });
        let out = t.measure_pauli(&p("-XXI"), OutcomePolicy::Random, &mut rng).unwrap();
        assert_eq!(out, MeasureOutcome { value: -1, deterministic: true });
    }

    #[test]
    fn rejects_bad_operators() {
        let mut t = Tableau::new_plus(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(t.measure_pauli(&p("+iXI"), OutcomePolicy::Random, &mut rng), Err(Error::NonHermitian(_))));
        assert!(matches!(t.measure_pauli(&p("XII"), OutcomePolicy::Random, &mut rng), Err(Error::Dimension { .. })));
    }

    #[test]
    fn bell_pair_entropy() {
        let t = Tableau::from_generators(2, &[p("XX"), p("ZZ")]).unwrap();
        assert_eq!(t.entanglement_entropy(&[0]).unwrap(), 1);
        assert_eq!(t.entanglement_entropy(&[0, 1]).unwrap(), 0);
        assert_eq!(Tableau::new_plus(5).entanglement_entropy(&[0, 2, 4]).unwrap(), 0);
    }

    #[test]
    fn entropy_requires_complete_tableau() {
        let t = Tableau::from_generators(2, &[p("ZZ")]).unwrap();
        assert!(matches!(t.entanglement_entropy(&[0]), Err(Error::Underdetermined { .. })));
    }

    #[test]
    fn incomplete_tableau_appends_independent_measurement() {
        let mut t = Tableau::from_generators(2, &[p("ZZ")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = t.measure_pauli(&p("XX"), OutcomePolicy::ForcePlus, &mut rng).unwrap();
        assert!(!out.deterministic);
        assert_eq!(t.len(), 2);
        assert_eq!(t.group_contains(&p("-YY")), Membership::Plus);
    }

    #[test]
    fn group_membership_signs() {
        let t = Tableau::from_generators(3, &[p("XXI"), p("-ZZI"), p("IIZ")]).unwrap();
        assert_eq!(t.group_contains(&p("YYI")), Membership::Plus);
        assert_eq!(t.group_contains(&p("-ZZZ")), Membership::Plus);
        assert_eq!(t.group_contains(&p("ZZZ")), Membership::Minus);
        assert_eq!(t.group_contains(&p("ZII")), Membership::Absent);
        assert_eq!(Tableau::new_plus(3).group_contains(&p("IZI")), Membership::Absent);
    }

    #[test]
    fn cz_builds_graph_state() {
        let mut t = Tableau::new_plus(3);
        t.apply_cz(0, 1);
        t.apply_cz(1, 2);
        assert_eq!(t.group_contains(&p("XZI")), Membership::Plus);
        assert_eq!(t.group_contains(&p("ZXZ")), Membership::Plus);
        assert_eq!(t.group_contains(&p("IZX")), Membership::Plus);
        assert_eq!(t.entanglement_entropy(&[0]).unwrap(), 1);
    }

    #[test]
    fn reduce_onto_product_factor() {
        // Bell pair on (0,1) times |+> on 2, then measure qubit 2 in Z.
        let mut t = Tableau::from_generators(3, &[p("XXI"), p("ZZI"), p("IIX")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        t.measure_pauli(&p("IIZ"), OutcomePolicy::Random, &mut rng).unwrap();
        let r = t.reduce_onto(&[0, 1]).unwrap();
        assert!(r.is_complete());
        assert_eq!(r.group_contains(&p("XX")), Membership::Plus);
        assert_eq!(r.group_contains(&p("ZZ")), Membership::Plus);
        let mixed = Tableau::from_generators(2, &[p("XX"), p("ZZ")]).unwrap().reduce_onto(&[0]).unwrap();
        assert_eq!(mixed.len(), 0);
    }

    #[test]
    fn append_plus_embeds_state() {
        let base = Tableau::from_generators(2, &[p("-XX"), p("ZZ")]).unwrap();
        let t = base.append_plus(70);
        assert_eq!(t.num_qubits(), 72);
        assert!(t.is_complete());
        t.check_invariants().unwrap();
        let mut xx = PauliString::identity(72);
        xx.set(0, crate::pauli::Pauli::X);
        xx.set(1, crate::pauli::Pauli::X);
        assert_eq!(t.group_contains(&xx), Membership::Minus);
        assert_eq!(t.group_contains(&PauliString::single(72, 71, crate::pauli::Pauli::X)), Membership::Plus);
    }
}
