//! Exact diagonalization of the conserved sectors of the three- and
//! four-boson Hamiltonians.
//!
//! Both Hamiltonians are tridiagonal once the sector basis is ordered by the
//! occupation of the first mode.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};
use crate::model::{Method, Spectrum};

/// Sector of `H = ε(n_a − n_b − n_c) + Ω(a†bc + ab†c†)` with fixed
/// `N = 2n_a + n_b + n_c` and `K = n_b − n_c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSector3 {
    pub n_total: i64,
    pub k_diff: i64,
    /// `(n_a, n_b, n_c)` by increasing `n_a`.
    pub basis: Vec<[u64; 3]>,
}

/// Sector of the four-boson Hamiltonian with fixed
/// `(n₁ − n₂, n₁ + n₃, n₂ + n₄)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSector4 {
    pub charges: (i64, i64, i64),
    /// `(n₁, n₂, n₃, n₄)` by increasing `n₁`.
    pub basis: Vec<[u64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sector {
    Three(FockSector3),
    Four(FockSector4),
}

impl Sector {
    pub fn dimension(&self) -> usize {
        match self {
            Sector::Three(s) => s.basis.len(),
            Sector::Four(s) => s.basis.len(),
        }
    }
}

/// Symmetric tridiagonal matrix of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorMatrix {
    pub sector: Sector,
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl FockSector3 {
    pub fn new(n_total: i64, k_diff: i64) -> Result<Self> {
        let mut basis = Vec::new();
        if n_total >= 0 && (n_total - k_diff).rem_euclid(2) == 0 {
            let mut na = 0;
            while n_total - 2 * na >= k_diff.abs() {
                let rest = n_total - 2 * na;
                basis.push([na as u64, ((rest + k_diff) / 2) as u64, ((rest - k_diff) / 2) as u64]);
                na += 1;
            }
        }
        if basis.is_empty() {
            return Err(QesError::EmptySector(format!("N = {n_total}, K = {k_diff}")));
        }
        Ok(Self {
            n_total,
            k_diff,
            basis,
        })
    }
}

impl FockSector4 {
    pub fn new(charges: (i64, i64, i64)) -> Result<Self> {
        let (d, s13, s24) = charges;
        let basis: Vec<[u64; 4]> = (0..=s13.max(0))
            .filter_map(|n1| {
                let n = [n1, n1 - d, s13 - n1, s24 - n1 + d];
                n.iter().all(|&x| x >= 0).then(|| n.map(|x| x as u64))
            })
            .collect();
        if basis.is_empty() {
            return Err(QesError::EmptySector(format!("charges {charges:?}")));
        }
        Ok(Self { charges, basis })
    }
}

/// Three-boson sector matrix.
pub fn build_sector3(epsilon: f64, omega: f64, n_total: i64, k_diff: i64) -> Result<SectorMatrix> {
    let sector = FockSector3::new(n_total, k_diff)?;
    let diagonal = sector
        .basis
        .iter()
        .map(|&[na, nb, nc]| epsilon * (na as f64 - nb as f64 - nc as f64))
        .collect();
    let off_diagonal = sector
        .basis
        .windows(2)
        .map(|w| {
            let [na, nb, nc] = w[0];
            omega * ((na + 1) as f64 * nb as f64 * nc as f64).sqrt()
        })
        .collect();
    Ok(SectorMatrix {
        sector: Sector::Three(sector),
        diagonal,
        off_diagonal,
    })
}

/// Four-boson sector matrix.
pub fn build_sector4(epsilon: f64, g: f64, charges: (i64, i64, i64)) -> Result<SectorMatrix> {
    let sector = FockSector4::new(charges)?;
    let diagonal = sector
        .basis
        .iter()
        .map(|&[n1, n2, n3, n4]| {
            let n = [n1, n2, n3, n4].map(|x| x as f64);
            epsilon * (n[0] + n[1] - n[2] - n[3]) + g * (n[0] * n[2] + n[1] * n[3])
        })
        .collect();
    let off_diagonal = sector
        .basis
        .windows(2)
        .map(|w| {
            let n = w[0].map(|x| x as f64);
            g * ((n[0] + 1.0) * (n[1] + 1.0) * n[2] * n[3]).sqrt()
        })
        .collect();
    Ok(SectorMatrix {
        sector: Sector::Four(sector),
        diagonal,
        off_diagonal,
    })
}

/// All eigenvalues, ascending.
pub fn diagonalize(mat: &SectorMatrix) -> Spectrum {
    let n = mat.diagonal.len();
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        dense[(i, i)] = mat.diagonal[i];
    }
    for (i, &b) in mat.off_diagonal.iter().enumerate() {
        dense[(i, i + 1)] = b;
        dense[(i + 1, i)] = b;
    }
    let eig = dense.symmetric_eigenvalues();
    Spectrum::from_energies(eig.iter().copied().collect(), Method::Fock)
}

fn same_multiset(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Whether `spectrum(ε) = −spectrum(−ε)` in the given three-boson sector.
pub fn unitary_negation_check3(epsilon: f64, n_total: i64, k_diff: i64) -> Result<bool> {
    let plus = diagonalize(&build_sector3(epsilon, 1.0, n_total, k_diff)?).energies();
    let minus: Vec<f64> = diagonalize(&build_sector3(-epsilon, 1.0, n_total, k_diff)?)
        .energies()
        .into_iter()
        .map(|e| -e)
        .collect();
    Ok(same_multiset(&plus, &minus, 1e-10))
}

/// Charges after exchanging modes 1↔3 and 2↔4.
pub fn swapped_charges(charges: (i64, i64, i64)) -> (i64, i64, i64) {
    let (d, s13, s24) = charges;
    (s13 - s24 - d, s13, s24)
}

/// Whether `spectrum(ε; charges) = spectrum(−ε; swapped charges)`.
pub fn swap_symmetry_check4(epsilon: f64, g: f64, charges: (i64, i64, i64)) -> Result<bool> {
    let a = diagonalize(&build_sector4(epsilon, g, charges)?).energies();
    let b = diagonalize(&build_sector4(-epsilon, g, swapped_charges(charges))?).energies();
    Ok(same_multiset(&a, &b, 1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vacuum_sectors() {
        let m = build_sector3(0.7, 1.0, 0, 0).unwrap();
        assert_eq!(m.diagonal, vec![0.0]);
        let m = build_sector4(0.7, 1.0, (0, 0, 0)).unwrap();
        assert_eq!(diagonalize(&m).energies(), vec![0.0]);
    }

    #[test]
    fn single_state_sector() {
        let m = build_sector3(0.4, 1.0, 1, 1).unwrap();
        assert_eq!(m.diagonal, vec![-0.4]);
        assert!(m.off_diagonal.is_empty());
    }

    #[test]
    fn two_by_two_closed_form() {
        for eps in [0.0, 0.3, -1.1] {
            let e = diagonalize(&build_sector3(eps, 1.0, 2, 0).unwrap()).energies();
            let r = (9.0 * eps * eps + 4.0f64).sqrt();
            assert!((e[0] - (-eps - r) / 2.0).abs() < 1e-14);
            assert!((e[1] - (-eps + r) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_sectors_are_rejected() {
        assert!(matches!(build_sector3(0.1, 1.0, 3, 0), Err(QesError::EmptySector(_))));
        assert!(matches!(build_sector3(0.1, 1.0, 1, 3), Err(QesError::EmptySector(_))));
        assert!(matches!(build_sector4(0.1, 1.0, (0, -1, 2)), Err(QesError::EmptySector(_))));
    }

    #[test]
    fn alpha_reference_sector_matches_energy_formula() {
        // M = 0 with reference state |0,p,0,q⟩: E = gpq + (p − q)ε
        for (p, q) in [(0, 0), (1, 0), (2, 3)] {
            let m = build_sector4(0.4, 1.0, (-(p as i64), 0, p + q)).unwrap();
            let e = diagonalize(&m).energies();
            assert_eq!(e.len(), 1);
            assert!((e[0] - ((p * q) as f64 + (p - q) as f64 * 0.4)).abs() < 1e-14);
        }
    }

    #[test]
    fn negation_examples() {
        assert!(unitary_negation_check3(0.0, 6, 0).unwrap());
        assert!(unitary_negation_check3(0.7, 4, 0).unwrap());
        assert!(unitary_negation_check3(1.3, 5, 1).unwrap());
    }

    #[test]
    fn sector_dump_is_json() {
        let m = build_sector3(0.3, 1.0, 4, 0).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: SectorMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    fn tridiagonal_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                proptest::collection::vec(-5.0f64..5.0, n),
                proptest::collection::vec(-5.0f64..5.0, n - 1),
            )
        })
    }

    proptest! {
        #[test]
        fn eigenvalue_sum_is_trace((d, e) in tridiagonal_strategy()) {
            let trace: f64 = d.iter().sum();
            let m = SectorMatrix {
                sector: Sector::Three(FockSector3 { n_total: 0, k_diff: 0, basis: vec![] }),
                diagonal: d,
                off_diagonal: e,
            };
            let s = diagonalize(&m);
            prop_assert!((s.energies().iter().sum::<f64>() - trace).abs() < 1e-10);
            prop_assert!(s.energies().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn basis_respects_charges(n in 0i64..20, k in -6i64..6) {
            if let Ok(s) = FockSector3::new(n, k) {
                for b in &s.basis {
                    prop_assert_eq!(2 * b[0] as i64 + b[1] as i64 + b[2] as i64, n);
                    prop_assert_eq!(b[1] as i64 - b[2] as i64, k);
                }
            }
        }

        #[test]
        fn three_boson_negation(eps in -2.0f64..2.0, n in 0i64..14, k in -4i64..4) {
            if FockSector3::new(n, k).is_ok() {
                prop_assert!(unitary_negation_check3(eps, n, k).unwrap());
            }
        }

        #[test]
        fn four_boson_swap(eps in -2.0f64..2.0, d in -4i64..4, s13 in 0i64..6, s24 in 0i64..8) {
            if FockSector4::new((d, s13, s24)).is_ok() {
                prop_assert!(swap_symmetry_check4(eps, 1.0, (d, s13, s24)).unwrap());
            }
        }
    }
}
