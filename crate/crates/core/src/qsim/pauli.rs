use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use super::{bit_of, check_register, SimError};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; character `q` acts on qubit `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    /// `(x_mask, z_mask, n_y)` such that `P|j> = i^n_y (-1)^{|j & z|} |j ^ x>`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let n = self.0.len();
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (q, p) in self.0.iter().enumerate() {
            let b = 1usize << bit_of(q, n);
            match p {
                Pauli::I => {}
                Pauli::X => x |= b,
                Pauli::Z => z |= b,
                Pauli::Y => {
                    x |= b;
                    z |= b;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }
}

impl FromStr for PauliString {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .map(PauliString)
            .ok_or_else(|| SimError::InvalidPauli(s.to_string()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings.
///
/// Terms are grouped by their bit-flip pattern at construction: every group
/// acts as a permutation `j -> j ^ x` times a diagonal, which makes
/// expectation values a handful of linear sweeps over the state.
#[derive(Clone, Debug)]
pub struct PauliSum<T> {
    n_qubits: usize,
    terms: Vec<(T, PauliString)>,
    groups: Vec<(usize, Vec<Complex<T>>)>,
    weight: T,
}

impl<T: Real> PauliSum<T> {
    pub fn new(n_qubits: usize, terms: Vec<(T, PauliString)>) -> Result<Self, SimError> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut groups: BTreeMap<usize, Vec<Complex<T>>> = BTreeMap::new();
        let mut weight = T::zero();
        for (c, p) in &terms {
            if p.len() != n_qubits {
                return Err(SimError::DimensionMismatch { expected: n_qubits, got: p.len() });
            }
            weight += c.abs();
            let (x, z, ny) = p.masks();
            let phase = match ny % 4 {
                0 => Complex::new(*c, T::zero()),
                1 => Complex::new(T::zero(), *c),
                2 => Complex::new(-*c, T::zero()),
                _ => Complex::new(T::zero(), -*c),
            };
            let diag = groups.entry(x).or_insert_with(|| vec![Complex::new(T::zero(), T::zero()); dim]);
            for (j, d) in diag.iter_mut().enumerate() {
                if (j & z).count_ones() % 2 == 0 {
                    *d += phase;
                } else {
                    *d -= phase;
                }
            }
        }
        Ok(Self { n_qubits, terms, groups: groups.into_iter().collect(), weight })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(T, PauliString)] {
        &self.terms
    }

    /// Sum of absolute coefficients.
    pub fn weight(&self) -> T {
        self.weight
    }

    pub(crate) fn groups(&self) -> &[(usize, Vec<Complex<T>>)] {
        &self.groups
    }

    /// Dense row-major matrix.
    pub fn dense_matrix(&self) -> Vec<Complex<T>> {
        let dim = 1usize << self.n_qubits;
        let mut m = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for (x, diag) in &self.groups {
            for (j, d) in diag.iter().enumerate() {
                m[(j ^ x) * dim + j] += *d;
            }
        }
        m
    }

    /// Discards the imaginary part after checking that it is roundoff.
    pub(crate) fn real_part(&self, v: Complex<T>) -> Result<T, SimError> {
        let tol = T::lit(1e-9) * (T::one() + self.weight);
        if v.im.abs() > tol {
            return Err(SimError::ComplexExpectation(v.im.to_f64_lossy()));
        }
        Ok(v.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let p: PauliString = "XYZI".parse().unwrap();
        assert_eq!(p.to_string(), "XYZI");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn masks_follow_qubit_zero_msb() {
        let p: PauliString = "XIZ".parse().unwrap();
        let (x, z, ny) = p.masks();
        assert_eq!(x, 0b100);
        assert_eq!(z, 0b001);
        assert_eq!(ny, 0);
    }

    #[test]
    fn single_y_matrix() {
        let h = PauliSum::new(1, vec![(1.0, "Y".parse().unwrap())]).unwrap();
        let m = h.dense_matrix();
        assert_eq!(m[1], Complex::new(0.0, -1.0));
        assert_eq!(m[2], Complex::new(0.0, 1.0));
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(PauliSum::new(2, vec![(1.0, "Z".parse().unwrap())]).is_err());
    }
}
