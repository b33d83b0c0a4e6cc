//! Order diagnostics on a trajectory state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{bmi_regions_at_distance, Lattice, OperatorSupport, Region};
use crate::tableau::Tableau;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticValues {
    pub s_topo: i64,
    pub bmi: i64,
    /// `(length, |⟨W_γ⟩|)` per evaluated Wilson line.
    pub wilson_abs: Vec<(usize, u8)>,
    pub mi_by_distance: Option<Vec<(usize, i64)>>,
}

fn entropy(t: &Tableau, qubits: &[usize]) -> Result<i64> {
    Ok(t.entanglement_entropy(qubits)? as i64)
}

fn require_disjoint(a: &Region, b: &Region) -> Result<()> {
    if a.is_disjoint(b) {
        Ok(())
    } else {
        Err(Error::Region(format!("regions {:?} and {:?} overlap", a.label, b.label)))
    }
}

/// Kitaev–Preskill combination `S_A + S_B + S_C − S_AB − S_BC − S_AC + S_ABC`.
pub fn tee(t: &Tableau, a: &Region, b: &Region, c: &Region) -> Result<i64> {
    require_disjoint(a, b)?;
    require_disjoint(b, c)?;
    require_disjoint(a, c)?;
    let ab = a.union(b);
    let bc = b.union(c);
    let ac = a.union(c);
    let abc = ab.union(c);
    Ok(entropy(t, &a.qubits)? + entropy(t, &b.qubits)? + entropy(t, &c.qubits)?
        - entropy(t, &ab.qubits)?
        - entropy(t, &bc.qubits)?
        - entropy(t, &ac.qubits)?
        + entropy(t, &abc.qubits)?)
}

/// Mutual information `S_A + S_B − S_AB` in bits.
pub fn bmi(t: &Tableau, a: &Region, b: &Region) -> Result<i64> {
    require_disjoint(a, b)?;
    let ab = a.union(b);
    Ok(entropy(t, &a.qubits)? + entropy(t, &b.qubits)? - entropy(t, &ab.qubits)?)
}

/// `|⟨W_γ⟩|`: 1 when `±W_γ` is a stabilizer, else 0.
pub fn wilson_abs(t: &Tableau, gamma: &OperatorSupport) -> u8 {
    t.expectation_abs(&gamma.to_pauli(t.num_qubits()))
}

/// Boundary mutual information with `A` at `x = 2` and `B` at `x = 2 + d`.
pub fn mi_vs_distance(t: &Tableau, lat: &Lattice, distances: &[usize]) -> Result<Vec<(usize, i64)>> {
    distances
        .iter()
        .map(|&d| {
            let (a, b) = bmi_regions_at_distance(lat, d)?;
            Ok((d, bmi(t, &a, &b)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{run_fs_moc, CircuitConfig};
    use crate::lattice::{bmi_regions, build_lieb_lattice, tee_regions, wilson_line, RegionLabel};
    use crate::rng::SampleRng;

    fn state(lx: usize, ly: usize, pj: f64, pk: f64, seed: u64) -> (Lattice, Tableau) {
        let lat = build_lieb_lattice(lx, ly).unwrap();
        let t = run_fs_moc(&lat, &CircuitConfig::fs_moc(pj, pk, 2), SampleRng::new(seed, 0)).unwrap();
        (lat, t)
    }

    #[test]
    fn tee_limits() {
        for (lx, ly) in [(8, 5), (6, 4), (12, 7), (7, 6)] {
            let (lat, toric) = state(lx, ly, 0.0, 1.0, 1);
            let (a, b, c) = tee_regions(&lat).unwrap();
            assert_eq!(tee(&toric, &a, &b, &c).unwrap(), -1, "{lx}x{ly}");
            let (_, cluster) = state(lx, ly, 1.0, 1.0, 2);
            assert_eq!(tee(&cluster, &a, &b, &c).unwrap(), 0);
            let (_, product) = state(lx, ly, 0.0, 0.0, 3);
            assert_eq!(tee(&product, &a, &b, &c).unwrap(), 0);
        }
    }

    #[test]
    fn bmi_limits() {
        let (lat, cluster) = state(12, 7, 1.0, 1.0, 4);
        let (a, b) = bmi_regions(&lat).unwrap();
        assert_eq!(bmi(&cluster, &a, &b).unwrap(), 1);
        assert_eq!(bmi(&cluster, &b, &a).unwrap(), 1);
        let (_, toric) = state(12, 7, 0.0, 1.0, 5);
        assert_eq!(bmi(&toric, &a, &b).unwrap(), 0);
        let (_, product) = state(12, 7, 0.0, 0.0, 6);
        assert_eq!(bmi(&product, &a, &b).unwrap(), 0);
    }

    #[test]
    fn overlapping_regions_rejected() {
        let (lat, t) = state(8, 5, 0.0, 0.0, 0);
        let (a, _) = bmi_regions(&lat).unwrap();
        assert!(bmi(&t, &a, &a).is_err());
        let (x, y, _) = tee_regions(&lat).unwrap();
        assert!(tee(&t, &x, &y, &x).is_err());
        let custom = Region::new(RegionLabel::Custom, [0, 1]);
        assert!(bmi(&t, &custom, &Region::new(RegionLabel::Custom, [1])).is_err());
    }

    #[test]
    fn wilson_limits() {
        let (lat, cluster) = state(12, 7, 1.0, 1.0, 7);
        let (_, product) = state(12, 7, 0.0, 0.0, 8);
        for len in 1..=10 {
            let w = wilson_line(&lat, len).unwrap();
            assert_eq!(wilson_abs(&cluster, &w), 1);
            assert_eq!(wilson_abs(&product, &w), 0);
        }
    }

    #[test]
    fn mi_default_distance_matches_bmi() {
        let (lat, t) = state(12, 7, 1.0, 0.5, 9);
        let (a, b) = bmi_regions(&lat).unwrap();
        let d = lat.lx() - 3;
        assert_eq!(mi_vs_distance(&t, &lat, &[d]).unwrap(), vec![(d, bmi(&t, &a, &b).unwrap())]);
        assert!(mi_vs_distance(&t, &lat, &[d + 1]).is_err());
    }
}
