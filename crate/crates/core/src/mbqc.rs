//! Layered single-qubit measurements on the RBH cluster state.
//!
//! The base is an `l × m` torus extended over `z ∈ [0, lz]`. Qubits sit on
//! in-plane edges (every `z`), vertical edges `v × [z, z+1]`, in-plane faces
//! `f × {z}` with `z < lz` and vertical faces `e × [z, z+1]`. Each face couples
//! to its four edges by a controlled-Z.
//!
//! Layer `ℓ` measures every qubit in `ℓ ≤ z < ℓ+1` except the in-plane edges at
//! `z = ℓ+1`: edges in `X`, in-plane faces in `X` with probability `p_k`
//! (otherwise `Z`), vertical faces in `Z` with probability `1 − p_k` (otherwise
//! `X`). Coins are drawn in the same order as the pure-gauge circuit's
//! `B_p` and `X_e` coins, so equal basis streams realize the same measurement
//! pattern in both pictures.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{torus_h, torus_v, GaugeGeometry};
use crate::pauli::{Pauli, PauliString};
use crate::rng::SampleRng;
use crate::tableau::{OutcomePolicy, Tableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RbhCell {
    /// In-plane edge `e × {z}`.
    PlaneEdge { e: usize, z: usize },
    /// Vertical edge `v × [z, z+1]`.
    VerticalEdge { v: usize, z: usize },
    /// In-plane face `f × {z}`.
    PlaneFace { f: usize, z: usize },
    /// Vertical face `e × [z, z+1]`.
    VerticalFace { e: usize, z: usize },
}

#[derive(Clone, Debug)]
pub struct RbhLattice {
    l: usize,
    m: usize,
    lz: usize,
    base: GaugeGeometry,
    edge_ends: Vec<(usize, usize)>,
}

impl RbhLattice {
    pub fn new(l: usize, m: usize, lz: usize) -> Result<Self> {
        if lz < 1 {
            return Err(Error::Lattice("lz must be at least 1".into()));
        }
        let base = GaugeGeometry::torus(l, m)?;
        let mut edge_ends = vec![(0, 0); 2 * l * m];
        for y in 0..m {
            for x in 0..l {
                let v = y * l + x;
                edge_ends[torus_h(l, m, x, y)] = (v, y * l + (x + 1) % l);
                edge_ends[torus_v(l, m, x, y)] = (v, ((y + 1) % m) * l + x);
            }
        }
        Ok(Self { l, m, lz, base, edge_ends })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l, self.m, self.lz)
    }

    pub fn base(&self) -> &GaugeGeometry {
        &self.base
    }

    fn ne(&self) -> usize {
        2 * self.l * self.m
    }

    fn nv(&self) -> usize {
        self.l * self.m
    }

    pub fn num_qubits(&self) -> usize {
        let (ne, nv, lz) = (self.ne(), self.nv(), self.lz);
        ne * (lz + 1) + nv * lz + nv * lz + ne * lz
    }

    pub fn index(&self, cell: RbhCell) -> usize {
        let (ne, nv, lz) = (self.ne(), self.nv(), self.lz);
        match cell {
            RbhCell::PlaneEdge { e, z } => z * ne + e,
            RbhCell::VerticalEdge { v, z } => ne * (lz + 1) + z * nv + v,
            RbhCell::PlaneFace { f, z } => ne * (lz + 1) + nv * lz + z * nv + f,
            RbhCell::VerticalFace { e, z } => ne * (lz + 1) + 2 * nv * lz + z * ne + e,
        }
    }

    /// Edges of a face cell.
    pub fn face_edges(&self, face: RbhCell) -> Vec<RbhCell> {
        match face {
            RbhCell::PlaneFace { f, z } => {
                self.base.plaquettes()[f].iter().map(|&e| RbhCell::PlaneEdge { e, z }).collect()
            }
            RbhCell::VerticalFace { e, z } => {
                let (a, b) = self.edge_ends[e];
                vec![
                    RbhCell::PlaneEdge { e, z },
                    RbhCell::PlaneEdge { e, z: z + 1 },
                    RbhCell::VerticalEdge { v: a, z },
                    RbhCell::VerticalEdge { v: b, z },
                ]
            }
            _ => panic!("face_edges called on an edge cell"),
        }
    }

    pub fn faces(&self) -> impl Iterator<Item = RbhCell> + '_ {
        let (ne, nv) = (self.ne(), self.nv());
        (0..self.lz).flat_map(move |z| {
            (0..nv)
                .map(move |f| RbhCell::PlaneFace { f, z })
                .chain((0..ne).map(move |e| RbhCell::VerticalFace { e, z }))
        })
    }

    /// In-plane edges at `z = lz`, in base-edge order.
    pub fn boundary_qubits(&self) -> Vec<usize> {
        (0..self.ne()).map(|e| self.index(RbhCell::PlaneEdge { e, z: self.lz })).collect()
    }

    /// `∏_{f∈z} X_f` times the `Z` parts of the corresponding graph-state
    /// stabilizers, for a set of face cells.
    pub fn face_stabilizer_product(&self, faces: &[RbhCell]) -> PauliString {
        let n = self.num_qubits();
        let mut x = Vec::new();
        let mut z = Vec::new();
        for &f in faces {
            x.push(self.index(f));
            z.extend(self.face_edges(f).into_iter().map(|c| self.index(c)));
        }
        PauliString::from_supports(n, &x, &z)
    }
}

/// Graph state `∏ CZ_{e,f} |+⟩^E |+⟩^F`.
pub fn build_rbh_tableau(rbh: &RbhLattice) -> Tableau {
    let mut t = Tableau::new_plus(rbh.num_qubits());
    for f in rbh.faces() {
        let fq = rbh.index(f);
        for e in rbh.face_edges(f) {
            t.apply_cz(fq, rbh.index(e));
        }
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Basis {
    X,
    Z,
}

/// Basis choice per face of one layer: in-plane faces then vertical faces.
struct LayerCoins {
    plane: Vec<Basis>,
    vertical: Vec<Basis>,
}

fn draw_layer<R: Rng + ?Sized>(
    rbh: &RbhLattice,
    z: usize,
    p_k: f64,
    rng: &mut R,
    force_x: &dyn Fn(RbhCell) -> bool,
) -> LayerCoins {
    let plane = (0..rbh.nv())
        .map(|f| {
            let coin = rng.gen::<f64>() < p_k;
            if coin || force_x(RbhCell::PlaneFace { f, z }) {
                Basis::X
            } else {
                Basis::Z
            }
        })
        .collect();
    let vertical = (0..rbh.ne())
        .map(|e| {
            let coin = rng.gen::<f64>() < 1.0 - p_k;
            if !coin || force_x(RbhCell::VerticalFace { e, z }) {
                Basis::X
            } else {
                Basis::Z
            }
        })
        .collect();
    LayerCoins { plane, vertical }
}

fn single(n: usize, q: usize, b: Basis) -> PauliString {
    PauliString::single(n, q, if b == Basis::X { Pauli::X } else { Pauli::Z })
}

/// Measurement sequence of layer `z` as `(cell, basis)` in a fixed order.
fn layer_sequence(rbh: &RbhLattice, z: usize, coins: &LayerCoins) -> Vec<(RbhCell, Basis)> {
    let mut seq = Vec::with_capacity(3 * rbh.ne() + 2 * rbh.nv());
    for e in 0..rbh.ne() {
        seq.push((RbhCell::PlaneEdge { e, z }, Basis::X));
    }
    for (f, &b) in coins.plane.iter().enumerate() {
        seq.push((RbhCell::PlaneFace { f, z }, b));
    }
    for v in 0..rbh.nv() {
        seq.push((RbhCell::VerticalEdge { v, z }, Basis::X));
    }
    for (e, &b) in coins.vertical.iter().enumerate() {
        seq.push((RbhCell::VerticalFace { e, z }, b));
    }
    seq
}

/// Measures layers `0..lz` on the full graph state and returns the reduced
/// state of the `z = lz` in-plane edges.
pub fn measure_rbh_layers(t: &Tableau, rbh: &RbhLattice, p_k: f64, rng: &mut SampleRng) -> Result<Tableau> {
    measure_rbh_layers_forced(t, rbh, p_k, rng, OutcomePolicy::Random, &|_| false)
}

/// As [`measure_rbh_layers`], with faces for which `force_x` holds always
/// measured in `X`.
pub fn measure_rbh_layers_forced(
    t: &Tableau,
    rbh: &RbhLattice,
    p_k: f64,
    rng: &mut SampleRng,
    policy: OutcomePolicy,
    force_x: &dyn Fn(RbhCell) -> bool,
) -> Result<Tableau> {
    check_p(p_k)?;
    let n = rbh.num_qubits();
    if t.num_qubits() != n {
        return Err(Error::Dimension { expected: n, got: t.num_qubits() });
    }
    let mut t = t.clone();
    for z in 0..rbh.lz {
        let coins = draw_layer(rbh, z, p_k, &mut rng.basis, force_x);
        for (cell, b) in layer_sequence(rbh, z, &coins) {
            t.project(&single(n, rbh.index(cell), b), policy, &mut rng.outcome);
        }
    }
    t.reduce_onto(&rbh.boundary_qubits())
}

fn check_p(p_k: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p_k) {
        Ok(())
    } else {
        Err(Error::Config(format!("p_k = {p_k} is outside [0, 1]")))
    }
}

/// Same measurement pattern as [`measure_rbh_layers`], evaluated on a sliding
/// window: only the current layer's qubits are ever held in the tableau.
pub fn sample_rbh_boundary(rbh: &RbhLattice, p_k: f64, rng: &mut SampleRng) -> Result<Tableau> {
    sample_rbh_boundary_forced(rbh, p_k, rng, OutcomePolicy::Random, &|_| false)
}

pub fn sample_rbh_boundary_forced(
    rbh: &RbhLattice,
    p_k: f64,
    rng: &mut SampleRng,
    policy: OutcomePolicy,
    force_x: &dyn Fn(RbhCell) -> bool,
) -> Result<Tableau> {
    check_p(p_k)?;
    let (ne, nv) = (rbh.ne(), rbh.nv());
    // Window layout: current edges, plane faces, vertical edges, vertical faces, next edges.
    let (o_pf, o_ve, o_vf, o_next) = (ne, ne + nv, ne + 2 * nv, 2 * ne + 2 * nv);
    let wn = 3 * ne + 2 * nv;
    let local = |cell: RbhCell, z: usize| -> usize {
        match cell {
            RbhCell::PlaneEdge { e, z: ze } if ze == z => e,
            RbhCell::PlaneEdge { e, .. } => o_next + e,
            RbhCell::PlaneFace { f, .. } => o_pf + f,
            RbhCell::VerticalEdge { v, .. } => o_ve + v,
            RbhCell::VerticalFace { e, .. } => o_vf + e,
        }
    };
    let mut phi = Tableau::new_plus(ne);
    for z in 0..rbh.lz {
        let mut t = phi.append_plus(wn - ne);
        let faces = (0..nv).map(|f| RbhCell::PlaneFace { f, z }).chain((0..ne).map(|e| RbhCell::VerticalFace { e, z }));
        for f in faces {
            let fq = local(f, z);
            for e in rbh.face_edges(f) {
                t.apply_cz(fq, local(e, z));
            }
        }
        let coins = draw_layer(rbh, z, p_k, &mut rng.basis, force_x);
        for (cell, b) in layer_sequence(rbh, z, &coins) {
            t.project(&single(wn, local(cell, z), b), policy, &mut rng.outcome);
        }
        let next: Vec<usize> = (o_next..o_next + ne).collect();
        phi = t.reduce_onto(&next)?;
    }
    Ok(phi)
}
