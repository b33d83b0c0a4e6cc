//! Auxiliary geometries for the reference circuits: edge-only gauge lattices
//! (rough or periodic) and Ising chains/grids.

use crate::error::{Error, Result};
use crate::lattice::{CellKind, Lattice};

/// Edge qubits with plaquette supports, used by the pure-gauge circuit.
#[derive(Clone, Debug)]
pub struct GaugeGeometry {
    n_edges: usize,
    plaquettes: Vec<Vec<usize>>,
    /// Periodic `(l, m)` dimensions, `None` for the rough-boundary lattice.
    torus: Option<(usize, usize)>,
    /// Lieb-lattice qubit of each edge for the rough variant.
    lieb_index: Vec<usize>,
}

impl GaugeGeometry {
    /// `l × m` torus. Horizontal edge `(x, y)–(x+1, y)` is `y·l + x`, vertical
    /// edge `(x, y)–(x, y+1)` is `l·m + y·l + x`; plaquette `(x, y)` has corner
    /// `(x, y)` at its lower left.
    pub fn torus(l: usize, m: usize) -> Result<Self> {
        if l < 2 || m < 2 {
            return Err(Error::Lattice(format!("torus must be at least 2x2, got {l}x{m}")));
        }
        let mut plaquettes = Vec::with_capacity(l * m);
        for y in 0..m {
            for x in 0..l {
                let mut p =
                    vec![torus_h(l, m, x, y), torus_h(l, m, x, y + 1), torus_v(l, m, x, y), torus_v(l, m, x + 1, y)];
                p.sort_unstable();
                plaquettes.push(p);
            }
        }
        Ok(Self { n_edges: 2 * l * m, plaquettes, torus: Some((l, m)), lieb_index: Vec::new() })
    }

    /// Edge qubits of a rough-boundary Lieb lattice, reindexed to `0..|E|` in
    /// the lattice's own edge order.
    pub fn rough(lat: &Lattice) -> Self {
        let lieb_index: Vec<usize> = lat.edges().collect();
        let mut local = vec![usize::MAX; lat.nq()];
        for (i, &q) in lieb_index.iter().enumerate() {
            local[q] = i;
        }
        let plaquettes = lat
            .plaquettes()
            .iter()
            .map(|p| {
                let mut s: Vec<usize> = p.edges.iter().map(|&e| local[e]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        Self { n_edges: lieb_index.len(), plaquettes, torus: None, lieb_index }
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn plaquettes(&self) -> &[Vec<usize>] {
        &self.plaquettes
    }

    pub fn torus_dims(&self) -> Option<(usize, usize)> {
        self.torus
    }

    /// Local index of a Lieb-lattice edge qubit (rough variant only).
    pub fn local_of(&self, lieb_qubit: usize) -> Option<usize> {
        self.lieb_index.iter().position(|&q| q == lieb_qubit)
    }

    pub fn lieb_index(&self) -> &[usize] {
        &self.lieb_index
    }

    /// Torus edges with both endpoints inside the `w × h` vertex block at `(x0, y0)`.
    pub fn torus_patch(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Vec<usize>> {
        let (l, m) = self.torus.ok_or_else(|| Error::Region("patch requires a torus".into()))?;
        if w > l || h > m || w == 0 || h == 0 {
            return Err(Error::Region(format!("{w}x{h} patch does not fit on a {l}x{m} torus")));
        }
        let mut out = Vec::new();
        for dy in 0..h {
            for dx in 0..w {
                let (x, y) = (x0 + dx, y0 + dy);
                if dx + 1 < w {
                    out.push(torus_h(l, m, x, y));
                }
                if dy + 1 < h {
                    out.push(torus_v(l, m, x, y));
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Boundary edges of the `w × h` plaquette block with lower-left plaquette `(x0, y0)`.
    pub fn torus_loop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Vec<usize>> {
        let (l, m) = self.torus.ok_or_else(|| Error::Region("loop requires a torus".into()))?;
        if w == 0 || h == 0 || w >= l || h >= m {
            return Err(Error::Region(format!("{w}x{h} loop does not fit on a {l}x{m} torus")));
        }
        let mut parity = vec![false; self.n_edges];
        for dy in 0..h {
            for dx in 0..w {
                let p = ((y0 + dy) % m) * l + (x0 + dx) % l;
                for &e in &self.plaquettes[p] {
                    parity[e] ^= true;
                }
            }
        }
        Ok((0..self.n_edges).filter(|&e| parity[e]).collect())
    }
}

pub fn torus_h(l: usize, m: usize, x: usize, y: usize) -> usize {
    (y % m) * l + (x % l)
}

pub fn torus_v(l: usize, m: usize, x: usize, y: usize) -> usize {
    l * m + (y % m) * l + (x % l)
}

/// Sites and nearest-neighbour bonds for the Ising reference circuits.
#[derive(Clone, Debug)]
pub struct IsingGeometry {
    n_sites: usize,
    bonds: Vec<(usize, usize)>,
    dims: (usize, usize),
}

impl IsingGeometry {
    /// Periodic chain of `l` sites.
    pub fn chain(l: usize) -> Result<Self> {
        if l < 3 {
            return Err(Error::Lattice(format!("chain needs at least 3 sites, got {l}")));
        }
        let bonds = (0..l).map(|i| (i, (i + 1) % l)).collect();
        Ok(Self { n_sites: l, bonds, dims: (l, 1) })
    }

    /// Open `lx × ly` grid, site `(x, y)` at `y·lx + x`.
    pub fn grid(lx: usize, ly: usize) -> Result<Self> {
        if lx < 2 || ly < 2 {
            return Err(Error::Lattice(format!("grid must be at least 2x2, got {lx}x{ly}")));
        }
        let mut bonds = Vec::with_capacity(2 * lx * ly);
        for y in 0..ly {
            for x in 0..lx {
                let s = y * lx + x;
                if x + 1 < lx {
                    bonds.push((s, s + 1));
                }
                if y + 1 < ly {
                    bonds.push((s, s + lx));
                }
            }
        }
        Ok(Self { n_sites: lx * ly, bonds, dims: (lx, ly) })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }
}

/// Vertex qubits of the Lieb lattice, for restricting diagnostics to matter sites.
pub fn vertex_qubits(lat: &Lattice) -> Vec<usize> {
    (0..lat.nq()).filter(|&q| lat.kind(q) == CellKind::Vertex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lieb_lattice;

    #[test]
    fn torus_edges_in_two_plaquettes() {
        let g = GaugeGeometry::torus(4, 3).unwrap();
        let mut inc = vec![0; g.n_edges()];
        for p in g.plaquettes() {
            assert_eq!(p.len(), 4);
            for &e in p {
                inc[e] += 1;
            }
        }
        assert!(inc.iter().all(|&c| c == 2));
    }

    #[test]
    fn torus_regions() {
        let g = GaugeGeometry::torus(6, 6).unwrap();
        assert_eq!(g.torus_patch(1, 1, 3, 3).unwrap().len(), 12);
        assert_eq!(g.torus_loop(1, 1, 2, 2).unwrap().len(), 8);
        assert!(g.torus_loop(0, 0, 6, 1).is_err());
    }

    #[test]
    fn rough_gauge_matches_lattice() {
        let lat = build_lieb_lattice(5, 4).unwrap();
        let g = GaugeGeometry::rough(&lat);
        assert_eq!(g.n_edges(), lat.nq() - 20);
        assert_eq!(g.plaquettes().len(), 30);
        let e = lat.bulk_edges()[3];
        assert_eq!(g.lieb_index()[g.local_of(e).unwrap()], e);
    }

    #[test]
    fn ising_geometries() {
        let c = IsingGeometry::chain(24).unwrap();
        assert_eq!(c.bonds().len(), 24);
        let g = IsingGeometry::grid(4, 3).unwrap();
        assert_eq!(g.bonds().len(), 3 * 3 + 4 * 2);
    }
}
