use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::qsim::{DensityMatrix, PauliString, PauliSum, StateVector, MAX_QUBITS};

/// Tolerance for a supplied ground energy against exact diagonalization.
pub const GROUND_ENERGY_TOL: f64 = 1e-9;

/// On-disk form: `{"name": .., "n_qubits": .., "terms": [[c, "XZ.."], ..], "ground_energy": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_qubits: usize,
    pub terms: Vec<(f64, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<f64>,
}

/// Qubit Hamiltonian with its exact ground energy.
#[derive(Clone, Debug)]
pub struct PauliHamiltonian {
    name: Option<String>,
    sum: PauliSum<f64>,
    ground_energy: f64,
}

impl PauliHamiltonian {
    /// Validates the terms and computes the ground energy by dense
    /// diagonalization when it is not supplied. A supplied value is checked
    /// against diagonalization whenever the register fits the simulator.
    pub fn from_file(file: HamiltonianFile) -> Result<Self, ProblemError> {
        let n = file.n_qubits;
        let mut terms = Vec::with_capacity(file.terms.len());
        for (c, s) in &file.terms {
            if !c.is_finite() {
                return Err(ProblemError::NonFiniteCoefficient(s.clone()));
            }
            if s.chars().count() != n {
                return Err(ProblemError::StringLength { string: s.clone(), n_qubits: n });
            }
            let p: PauliString = s.parse()?;
            terms.push((*c, p));
        }
        if n > MAX_QUBITS {
            return Err(ProblemError::TooLarge(n));
        }
        let sum = PauliSum::new(n, terms)?;
        let exact = min_eigenvalue(&sum);
        let ground_energy = match file.ground_energy {
            Some(e) if (e - exact).abs() > GROUND_ENERGY_TOL => {
                return Err(ProblemError::GroundEnergyMismatch { supplied: e, exact })
            }
            Some(e) => e,
            None => exact,
        };
        Ok(Self { name: file.name, sum, ground_energy })
    }

    pub fn from_terms(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self, ProblemError> {
        Self::from_file(HamiltonianFile {
            name: None,
            n_qubits,
            terms: terms.iter().map(|(c, s)| (*c, s.to_string())).collect(),
            ground_energy: None,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProblemError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| ProblemError::Io { path: path.display().to_string(), source: e })?;
        Self::from_json_str(&text)
    }

    pub fn to_file(&self) -> HamiltonianFile {
        HamiltonianFile {
            name: self.name.clone(),
            n_qubits: self.sum.n_qubits(),
            terms: self.sum.terms().iter().map(|(c, p)| (*c, p.to_string())).collect(),
            ground_energy: Some(self.ground_energy),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("hamiltonian serializes")
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n_qubits(&self) -> usize {
        self.sum.n_qubits()
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn pauli_sum(&self) -> &PauliSum<f64> {
        &self.sum
    }

    pub fn expectation_pure(&self, psi: &StateVector<f64>) -> Result<f64, ProblemError> {
        Ok(psi.expectation(&self.sum)?)
    }

    pub fn expectation_mixed(&self, rho: &DensityMatrix<f64>) -> Result<f64, ProblemError> {
        Ok(rho.expectation(&self.sum)?)
    }
}

/// Smallest eigenvalue of the dense Hermitian matrix of `h`.
pub fn min_eigenvalue(h: &PauliSum<f64>) -> f64 {
    let dim = 1usize << h.n_qubits();
    let dense = h.dense_matrix();
    let m = DMatrix::<Complex64>::from_row_slice(dim, dim, &dense);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Molecular Hamiltonians shipped with the crate (Jordan-Wigner encoded,
/// STO-3G, computed upstream).
pub mod bundled {
    use super::PauliHamiltonian;

    pub const H2_4Q: &str = include_str!("../../data/h2_4q.json");
    pub const BEH2_6Q: &str = include_str!("../../data/beh2_6q.json");
    pub const H2O_8Q: &str = include_str!("../../data/h2o_8q.json");

    pub fn h2() -> PauliHamiltonian {
        PauliHamiltonian::from_json_str(H2_4Q).expect("bundled H2 file is valid")
    }

    pub fn beh2() -> PauliHamiltonian {
        PauliHamiltonian::from_json_str(BEH2_6Q).expect("bundled BeH2 file is valid")
    }

    pub fn h2o() -> PauliHamiltonian {
        PauliHamiltonian::from_json_str(H2O_8Q).expect("bundled H2O file is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zz_ground_energy() {
        let h = PauliHamiltonian::from_terms(2, &[(1.0, "ZZ")]).unwrap();
        assert!((h.ground_energy() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_z_plus_half_x() {
        let h = PauliHamiltonian::from_terms(1, &[(0.5, "Z"), (0.5, "X")]).unwrap();
        // eigenvalues of (Z + X)/2 are +-sqrt(2)/2
        assert!((h.ground_energy() + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(PauliHamiltonian::from_terms(2, &[(1.0, "Z")]), Err(ProblemError::StringLength { .. })));
        assert!(matches!(
            PauliHamiltonian::from_json_str(r#"{"n_qubits": 2, "terms": [[1.0, "ZQ"]]}"#),
            Err(ProblemError::Sim(_))
        ));
        assert!(matches!(
            PauliHamiltonian::from_json_str(r#"{"n_qubits": 2, "terms": [[1.0, "ZZ"]], "ground_energy": 0.3}"#),
            Err(ProblemError::GroundEnergyMismatch { .. })
        ));
        assert!(matches!(
            PauliHamiltonian::from_json_str(r#"{"n_qubits": 9, "terms": [[1.0, "ZZZZZZZZZ"]]}"#),
            Err(ProblemError::TooLarge(9))
        ));
        assert!(PauliHamiltonian::from_json_str("{not json").is_err());
        assert!(matches!(PauliHamiltonian::load("/definitely/not/here.json"), Err(ProblemError::Io { .. })));
    }

    #[test]
    fn bundled_files_load_and_round_trip() {
        for (text, n) in [(bundled::H2_4Q, 4), (bundled::BEH2_6Q, 6), (bundled::H2O_8Q, 8)] {
            let h = PauliHamiltonian::from_json_str(text).unwrap();
            assert_eq!(h.n_qubits(), n);
            let again = PauliHamiltonian::from_json_str(&h.to_json_string()).unwrap();
            assert_eq!(again.to_file(), h.to_file());
        }
    }

    #[test]
    fn h2_ground_energy_matches_diagonalization() {
        let h = bundled::h2();
        let exact = min_eigenvalue(h.pauli_sum());
        assert!((h.ground_energy() - exact).abs() < GROUND_ENERGY_TOL);
        assert!((h.ground_energy() + 1.137).abs() < 1e-3);
    }
}
