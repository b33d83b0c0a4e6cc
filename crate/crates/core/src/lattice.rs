//! Lieb lattice with a rough boundary.
//!
//! Vertices sit at integer points `(x, y) ∈ {1..lx} × {1..ly}`, bulk edges join
//! neighbouring vertices, and every perimeter vertex carries one dangling
//! boundary edge per exposed side. Every cell is addressed in doubled
//! coordinates: vertex `(x, y)` at `(2x, 2y)`, the edge between `(x, y)` and
//! `(x+1, y)` at `(2x+1, 2y)`, the edge between `(x, y)` and `(x, y+1)` at
//! `(2x, 2y+1)`, and faces at odd/odd points. Boundary edges land at the
//! doubled coordinates just outside the vertex block, e.g. `(2x, 1)` below
//! the bottom row.
//!
//! Qubit indices are assigned row-major: vertices, horizontal bulk edges,
//! vertical bulk edges, then boundary edges (bottom, top, left, right).

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Vertex,
    BulkEdge,
    BoundaryEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlaquetteKind {
    /// Four edges.
    Bulk,
    /// Three edges along a side of the rough boundary.
    Side,
    /// Two edges at a corner.
    Corner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum OperatorKind {
    /// `Z_e ∏_{v⊂e} Z_v` on a bulk edge.
    EdgeCoupling,
    /// `∏_{e⊂p} Z_e`.
    Plaquette,
    EdgeX,
    VertexX,
    /// Gauss law `X_v ∏_{e⊃v} X_e`.
    GaussLaw,
    /// Star `∏_{e⊃v} X_e`.
    Star,
    /// Ising bond `∏_{v⊂e} Z_v`.
    IsingBond,
    WilsonLine,
}

/// Pauli support of one operator: `X` on `x_support`, `Z` on `z_support`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSupport {
    pub kind: OperatorKind,
    pub x_support: Vec<usize>,
    pub z_support: Vec<usize>,
}

impl OperatorSupport {
    fn z(kind: OperatorKind, mut qubits: Vec<usize>) -> Self {
        qubits.sort_unstable();
        Self { kind, x_support: Vec::new(), z_support: qubits }
    }

    fn x(kind: OperatorKind, mut qubits: Vec<usize>) -> Self {
        qubits.sort_unstable();
        Self { kind, x_support: qubits, z_support: Vec::new() }
    }

    pub fn to_pauli(&self, nq: usize) -> PauliString {
        PauliString::from_supports(nq, &self.x_support, &self.z_support)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RegionLabel {
    TeeA,
    TeeB,
    TeeC,
    BmiA,
    BmiB,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub label: RegionLabel,
    /// Sorted, deduplicated qubit indices.
    pub qubits: Vec<usize>,
}

impl Region {
    pub fn new(label: RegionLabel, qubits: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = qubits.into_iter().collect();
        Self { label, qubits: set.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.qubits.len() && j < other.qubits.len() {
            match self.qubits[i].cmp(&other.qubits[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(RegionLabel::Custom, self.qubits.iter().chain(&other.qubits).copied())
    }
}

/// Closed rectangle in doubled coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DoubledRect {
    pub x0: i32,
    pub x1: i32,
    pub y0: i32,
    pub y1: i32,
}

impl DoubledRect {
    /// Rectangle spanned by two vertex corners `(x, y)` in lattice coordinates.
    pub fn from_vertices(sw: (i32, i32), ne: (i32, i32)) -> Self {
        Self { x0: 2 * sw.0, x1: 2 * ne.0, y0: 2 * sw.1, y1: 2 * ne.1 }
    }

    pub fn contains(&self, (x, y): (i32, i32)) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }
}

#[derive(Clone, Debug)]
pub struct Plaquette {
    pub kind: PlaquetteKind,
    /// Doubled coordinate of the face centre.
    pub center: (i32, i32),
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    lx: usize,
    ly: usize,
    nq: usize,
    coords: Vec<(i32, i32)>,
    kinds: Vec<CellKind>,
    /// Doubled-coordinate lookup, `(2lx + 3) × (2ly + 3)` with padding.
    grid: Vec<Option<usize>>,
    n_vertices: usize,
    bulk_edges: Vec<usize>,
    boundary_edges: Vec<usize>,
    plaquettes: Vec<Plaquette>,
    edge_vertices: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
}

impl Lattice {
    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    /// Total qubit count `3·lx·ly + lx + ly`.
    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn coord(&self, q: usize) -> (i32, i32) {
        self.coords[q]
    }

    pub fn kind(&self, q: usize) -> CellKind {
        self.kinds[q]
    }

    /// Qubit at a doubled coordinate, if any.
    pub fn at(&self, (x, y): (i32, i32)) -> Option<usize> {
        let w = 2 * self.lx as i32 + 3;
        let h = 2 * self.ly as i32 + 3;
        if x < 0 || y < 0 || x >= w || y >= h {
            return None;
        }
        self.grid[(y * w + x) as usize]
    }

    pub fn vertex(&self, x: usize, y: usize) -> usize {
        assert!((1..=self.lx).contains(&x) && (1..=self.ly).contains(&y));
        (y - 1) * self.lx + (x - 1)
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.n_vertices
    }

    pub fn bulk_edges(&self) -> &[usize] {
        &self.bulk_edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    /// All edge qubits, bulk then boundary.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.bulk_edges.iter().chain(&self.boundary_edges).copied()
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Endpoint vertices of an edge (two for bulk edges, one for boundary edges).
    pub fn edge_vertices(&self, e: usize) -> &[usize] {
        &self.edge_vertices[e - self.n_vertices]
    }

    /// Edges incident to a vertex (always four on the rough-boundary lattice).
    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn edge_coupling(&self, e: usize) -> OperatorSupport {
        assert_eq!(self.kinds[e], CellKind::BulkEdge, "edge coupling is defined on bulk edges only");
        let mut z = vec![e];
        z.extend_from_slice(self.edge_vertices(e));
        OperatorSupport::z(OperatorKind::EdgeCoupling, z)
    }

    pub fn plaquette(&self, p: usize) -> OperatorSupport {
        OperatorSupport::z(OperatorKind::Plaquette, self.plaquettes[p].edges.clone())
    }

    pub fn edge_x(&self, e: usize) -> OperatorSupport {
        OperatorSupport::x(OperatorKind::EdgeX, vec![e])
    }

    pub fn vertex_x(&self, v: usize) -> OperatorSupport {
        OperatorSupport::x(OperatorKind::VertexX, vec![v])
    }

    pub fn gauss_law(&self, v: usize) -> OperatorSupport {
        let mut x = vec![v];
        x.extend_from_slice(self.vertex_edges(v));
        OperatorSupport::x(OperatorKind::GaussLaw, x)
    }

    pub fn star(&self, v: usize) -> OperatorSupport {
        OperatorSupport::x(OperatorKind::Star, self.vertex_edges(v).to_vec())
    }

    pub fn ising_bond(&self, e: usize) -> OperatorSupport {
        assert_eq!(self.kinds[e], CellKind::BulkEdge);
        OperatorSupport::z(OperatorKind::IsingBond, self.edge_vertices(e).to_vec())
    }

    /// `∏_{e∈E_∂} X_e`.
    pub fn boundary_symmetry(&self) -> PauliString {
        PauliString::from_supports(self.nq, &self.boundary_edges, &[])
    }

    /// Qubits whose doubled coordinate lies in the closed rectangle.
    pub fn qubits_in(&self, rect: DoubledRect) -> Vec<usize> {
        let mut out = Vec::new();
        for y in rect.y0.max(0)..=rect.y1 {
            for x in rect.x0.max(0)..=rect.x1 {
                if let Some(q) = self.at((x, y)) {
                    out.push(q);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Builds the rough-boundary Lieb lattice with `lx × ly` vertices.
pub fn build_lieb_lattice(lx: usize, ly: usize) -> Result<Lattice> {
    if lx < 3 || ly < 3 {
        return Err(Error::Lattice(format!("lattice must be at least 3x3, got {lx}x{ly}")));
    }
    let nq = 3 * lx * ly + lx + ly;
    let mut coords = Vec::with_capacity(nq);
    let mut kinds = Vec::with_capacity(nq);
    for y in 1..=ly as i32 {
        for x in 1..=lx as i32 {
            coords.push((2 * x, 2 * y));
            kinds.push(CellKind::Vertex);
        }
    }
    let n_vertices = coords.len();
    for y in 1..=ly as i32 {
        for x in 1..lx as i32 {
            coords.push((2 * x + 1, 2 * y));
            kinds.push(CellKind::BulkEdge);
        }
    }
    for y in 1..ly as i32 {
        for x in 1..=lx as i32 {
            coords.push((2 * x, 2 * y + 1));
            kinds.push(CellKind::BulkEdge);
        }
    }
    let (lxi, lyi) = (lx as i32, ly as i32);
    for x in 1..=lxi {
        coords.push((2 * x, 1));
    }
    for x in 1..=lxi {
        coords.push((2 * x, 2 * lyi + 1));
    }
    for y in 1..=lyi {
        coords.push((1, 2 * y));
    }
    for y in 1..=lyi {
        coords.push((2 * lxi + 1, 2 * y));
    }
    kinds.resize(coords.len(), CellKind::BoundaryEdge);
    if coords.len() != nq {
        return Err(Error::Lattice(format!("built {} qubits, expected {nq}", coords.len())));
    }

    let w = 2 * lxi + 3;
    let h = 2 * lyi + 3;
    let mut grid = vec![None; (w * h) as usize];
    for (q, &(x, y)) in coords.iter().enumerate() {
        let slot = &mut grid[(y * w + x) as usize];
        if slot.is_some() {
            return Err(Error::Lattice(format!("duplicate cell at ({x}, {y})")));
        }
        *slot = Some(q);
    }
    let at = |x: i32, y: i32| -> Option<usize> {
        if x < 0 || y < 0 || x >= w || y >= h {
            None
        } else {
            grid[(y * w + x) as usize]
        }
    };

    let bulk_edges: Vec<usize> = (n_vertices..nq).filter(|&q| kinds[q] == CellKind::BulkEdge).collect();
    let boundary_edges: Vec<usize> = (n_vertices..nq).filter(|&q| kinds[q] == CellKind::BoundaryEdge).collect();

    let mut edge_vertices = Vec::with_capacity(nq - n_vertices);
    for e in n_vertices..nq {
        let (x, y) = coords[e];
        let ends: Vec<usize> = if x % 2 == 1 {
            [at(x - 1, y), at(x + 1, y)].into_iter().flatten().collect()
        } else {
            [at(x, y - 1), at(x, y + 1)].into_iter().flatten().collect()
        };
        edge_vertices.push(ends);
    }
    let mut vertex_edges = vec![Vec::with_capacity(4); n_vertices];
    for v in 0..n_vertices {
        let (x, y) = coords[v];
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(e) = at(x + dx, y + dy) {
                vertex_edges[v].push(e);
            }
        }
    }

    let mut plaquettes = Vec::with_capacity((lx + 1) * (ly + 1));
    for j in 0..=lyi {
        for i in 0..=lxi {
            let (cx, cy) = (2 * i + 1, 2 * j + 1);
            let mut edges: Vec<usize> =
                [at(cx - 1, cy), at(cx + 1, cy), at(cx, cy - 1), at(cx, cy + 1)].into_iter().flatten().collect();
            edges.sort_unstable();
            let kind = match edges.len() {
                4 => PlaquetteKind::Bulk,
                3 => PlaquetteKind::Side,
                2 => PlaquetteKind::Corner,
                k => return Err(Error::Lattice(format!("face at ({cx}, {cy}) has {k} edges"))),
            };
            plaquettes.push(Plaquette { kind, center: (cx, cy), edges });
        }
    }

    Ok(Lattice {
        lx,
        ly,
        nq,
        coords,
        kinds,
        grid,
        n_vertices,
        bulk_edges,
        boundary_edges,
        plaquettes,
        edge_vertices,
        vertex_edges,
    })
}

/// Kitaev–Preskill regions `A` (top band), `B` (lower left) and `C` (lower right).
///
/// `A` spans vertices `(2, ly÷2+1)`–`(lx−1, ly−1)`. `B` spans `(2, 2)`–`(lx÷2, ly÷2)`
/// and `C` spans the remaining columns up to `lx−1`; both also take the gauge
/// qubits directly below `A` in their column range, so the three regions meet
/// pairwise. Membership follows the doubled-coordinate rectangles.
pub fn tee_regions(lat: &Lattice) -> Result<(Region, Region, Region)> {
    let (lx, ly) = (lat.lx as i32, lat.ly as i32);
    let a_rect = DoubledRect::from_vertices((2, ly / 2 + 1), (lx - 1, ly - 1));
    let b_rect = DoubledRect { x0: 4, x1: 2 * (lx / 2), y0: 4, y1: 2 * (ly / 2) + 1 };
    let c_rect = DoubledRect { x0: 2 * (lx / 2) + 1, x1: 2 * (lx - 1), y0: 4, y1: 2 * (ly / 2) + 1 };
    let a = Region::new(RegionLabel::TeeA, lat.qubits_in(a_rect));
    let b = Region::new(RegionLabel::TeeB, lat.qubits_in(b_rect));
    let c = Region::new(RegionLabel::TeeC, lat.qubits_in(c_rect));
    if a.is_empty() || b.is_empty() || c.is_empty() || a_rect.y0 > a_rect.y1 || b_rect.x0 > b_rect.x1 {
        return Err(Error::Region(format!("lattice {lx}x{ly} is too small for the TEE regions")));
    }
    // Regions need a vertex row each for the three-way junction to exist.
    if !(a.qubits.iter().any(|&q| lat.kind(q) == CellKind::Vertex)
        && b.qubits.iter().any(|&q| lat.kind(q) == CellKind::Vertex)
        && c.qubits.iter().any(|&q| lat.kind(q) == CellKind::Vertex))
    {
        return Err(Error::Region(format!("lattice {lx}x{ly} is too small for the TEE regions")));
    }
    debug_assert!(a.is_disjoint(&b) && b.is_disjoint(&c) && a.is_disjoint(&c));
    Ok((a, b, c))
}

/// Boundary vertex `(x, 1)` together with its rough-boundary edge below it.
fn boundary_site(lat: &Lattice, x: usize, label: RegionLabel) -> Region {
    let v = lat.vertex(x, 1);
    let e = lat.at((2 * x as i32, 1)).expect("bottom boundary edge exists");
    Region::new(label, [v, e])
}

/// Regions at `(2, 1)` and `(lx−1, 1)`, each with its boundary edge.
pub fn bmi_regions(lat: &Lattice) -> Result<(Region, Region)> {
    bmi_regions_at_distance(lat, lat.lx.saturating_sub(3))
}

/// `A` fixed at `x = 2`, `B` at `x = 2 + distance` on the bottom boundary row.
pub fn bmi_regions_at_distance(lat: &Lattice, distance: usize) -> Result<(Region, Region)> {
    if lat.lx < 5 {
        return Err(Error::Region(format!("boundary regions need lx >= 5, got {}", lat.lx)));
    }
    if distance == 0 || 2 + distance > lat.lx - 1 {
        return Err(Error::Region(format!("distance {distance} does not fit on a boundary row of length {}", lat.lx)));
    }
    Ok((boundary_site(lat, 2, RegionLabel::BmiA), boundary_site(lat, 2 + distance, RegionLabel::BmiB)))
}

/// Open Wilson line of `length` horizontal bulk edges on row `(ly+1)÷2`, centred
/// in `x`, with `Z` on both endpoint vertices.
pub fn wilson_line(lat: &Lattice, length: usize) -> Result<OperatorSupport> {
    if length == 0 || length + 2 > lat.lx {
        return Err(Error::Region(format!(
            "Wilson line length {length} must lie in 1..={} for lx = {}",
            lat.lx.saturating_sub(2),
            lat.lx
        )));
    }
    let y = (lat.ly + 1) / 2;
    let x0 = (lat.lx - length) / 2 + 1;
    let mut z = vec![lat.vertex(x0, y), lat.vertex(x0 + length, y)];
    for x in x0..x0 + length {
        let e = lat.at((2 * x as i32 + 1, 2 * y as i32)).expect("horizontal bulk edge");
        z.push(e);
    }
    Ok(OperatorSupport::z(OperatorKind::WilsonLine, z))
}
