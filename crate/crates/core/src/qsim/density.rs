use num_complex::Complex;

use super::kernels::{apply_1q, apply_cx, conj_matrix};
use super::{bit_of, check_register, Gate, NoiseConfig, PauliSum, SimError, StateVector};
use crate::scalar::Real;

/// Mixed state stored as a dense row-major `2^n x 2^n` matrix.
///
/// The flat index `r * 2^n + c` is treated as a `2n`-bit register: row bits
/// on top, column bits below. Conjugation `U rho U^dag` is then `U` on the
/// row bits and `conj(U)` on the column bits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    n_qubits: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn zero_state(n_qubits: usize) -> Result<Self, SimError> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        data[0] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, data })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, SimError> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        let w = T::one() / T::lit(dim as f64);
        for i in 0..dim {
            data[i * dim + i] = Complex::new(w, T::zero());
        }
        Ok(Self { n_qubits, data })
    }

    pub fn from_pure(psi: &StateVector<T>) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(a[r] * a[c].conj());
            }
        }
        Self { n_qubits: psi.n_qubits(), data }
    }

    /// Wraps a row-major matrix without checking positivity; trace and
    /// hermiticity are checked within `1e-8`.
    pub fn from_matrix(n_qubits: usize, data: Vec<Complex<T>>) -> Result<Self, SimError> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(SimError::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        let s = Self { n_qubits, data };
        let tr = s.trace();
        if (tr.re - T::one()).abs() > T::lit(1e-8) || tr.im.abs() > T::lit(1e-8) {
            return Err(SimError::NotNormalized(tr.re.to_f64_lossy()));
        }
        if s.hermiticity_error() > T::lit(1e-8) {
            return Err(SimError::NotNormalized(tr.re.to_f64_lossy()));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex<T> {
        let dim = self.dim();
        (0..dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.data[i * dim + i])
    }

    pub fn hermiticity_error(&self) -> T {
        let dim = self.dim();
        let mut worst = T::zero();
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.data[r * dim + c] - self.data[c * dim + r].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&mut self, gate: &Gate<T>) -> Result<(), SimError> {
        gate.check_range(self.n_qubits)?;
        let n = self.n_qubits;
        match gate.single_qubit_matrix() {
            Some(m) => {
                let b = bit_of(gate.qubits()[0], n);
                apply_1q(&mut self.data, b + n, &m);
                apply_1q(&mut self.data, b, &conj_matrix(&m));
            }
            None => {
                let q = gate.qubits();
                let (cb, tb) = (bit_of(q[0], n), bit_of(q[1], n));
                apply_cx(&mut self.data, cb + n, tb + n);
                apply_cx(&mut self.data, cb, tb);
            }
        }
        Ok(())
    }

    /// Applies `gate` followed by the depolarizing channel `noise` prescribes
    /// for it.
    pub fn apply_noisy(&mut self, gate: &Gate<T>, noise: &NoiseConfig) -> Result<(), SimError> {
        self.apply(gate)?;
        if let Some(p) = noise.strength_after(gate) {
            self.depolarize(gate.qubits(), p)?;
        }
        Ok(())
    }

    /// `rho <- (1-p) rho + p/(4^k-1) sum_{P != I} P rho P` over the `k`
    /// listed qubits.
    ///
    /// Uses the twirl identity `sum_P P rho P = 2^k Tr_S(rho) (x) I_S`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::InvalidProbability(p));
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(SimError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(SimError::DuplicateQubits(q));
            }
        }
        if p == 0.0 || qubits.is_empty() {
            return Ok(());
        }
        let n = self.n_qubits;
        let dim = self.dim();
        let k = qubits.len();
        let smask = qubits.iter().fold(0usize, |m, &q| m | (1 << bit_of(q, n)));
        let subsets: Vec<usize> = (0..dim).filter(|s| s & !smask == 0).collect();

        let four_k = (1u64 << (2 * k)) as f64;
        let w = T::lit(p / (four_k - 1.0));
        let keep = T::one() - T::lit(p) - w;
        let twirl_scale = w * T::lit((1u64 << k) as f64);

        let old = self.data.clone();
        for r in 0..dim {
            for c in 0..dim {
                let mut v = old[r * dim + c] * keep;
                if r & smask == c & smask {
                    let (rb, cb) = (r & !smask, c & !smask);
                    let mut tr = Complex::new(T::zero(), T::zero());
                    for &s in &subsets {
                        tr += old[(rb | s) * dim + (cb | s)];
                    }
                    v += tr * twirl_scale;
                }
                self.data[r * dim + c] = v;
            }
        }
        Ok(())
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> T {
        // Tr(rho^2) = sum |rho_rc|^2 for Hermitian rho.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Copy with every off-diagonal entry set to zero.
    pub fn dephased(&self) -> Self {
        let dim = self.dim();
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = self.data[i * dim + i];
        }
        Self { n_qubits: self.n_qubits, data }
    }

    /// `Tr(dephase(rho)^2)`: sum of squared diagonal entries.
    pub fn dephased_purity(&self) -> T {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re.powi(2)).sum()
    }

    /// `Tr(H rho)`.
    pub fn expectation(&self, h: &PauliSum<T>) -> Result<T, SimError> {
        if h.n_qubits() != self.n_qubits {
            return Err(SimError::DimensionMismatch { expected: self.n_qubits, got: h.n_qubits() });
        }
        let dim = self.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for (x, diag) in h.groups() {
            for (j, d) in diag.iter().enumerate() {
                acc += *d * self.data[j * dim + (j ^ x)];
            }
        }
        h.real_part(acc)
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_with_pure(&self, psi: &StateVector<T>) -> Result<T, SimError> {
        if psi.n_qubits() != self.n_qubits {
            return Err(SimError::DimensionMismatch { expected: self.n_qubits, got: psi.n_qubits() });
        }
        let dim = self.dim();
        let a = psi.amplitudes();
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..dim {
            for c in 0..dim {
                acc += a[r].conj() * self.data[r * dim + c] * a[c];
            }
        }
        Ok(acc.re)
    }

    /// Largest entrywise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::GateKind;

    #[test]
    fn maximally_mixed_is_depolarizing_fixed_point() {
        let mut rho = DensityMatrix::<f64>::maximally_mixed(1).unwrap();
        let before = rho.clone();
        rho.depolarize(&[0], 0.37).unwrap();
        assert!(rho.max_abs_diff(&before) < 1e-15);
    }

    #[test]
    fn zero_probability_is_identity_channel() {
        let mut rho = DensityMatrix::<f64>::zero_state(2).unwrap();
        rho.apply(&Gate::fixed(GateKind::H, 0)).unwrap();
        rho.apply(&Gate::cx(0, 1)).unwrap();
        let before = rho.clone();
        rho.depolarize(&[0, 1], 0.0).unwrap();
        assert_eq!(rho, before);
    }

    #[test]
    fn closed_form_on_ground_state() {
        let p = 0.001;
        let mut rho = DensityMatrix::<f64>::zero_state(1).unwrap();
        rho.depolarize(&[0], p).unwrap();
        assert!((rho.get(0, 0).re - (1.0 - 2.0 * p / 3.0)).abs() < 1e-15);
        assert!((rho.get(1, 1).re - 2.0 * p / 3.0).abs() < 1e-15);
        assert!(rho.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn invalid_probability_rejected() {
        let mut rho = DensityMatrix::<f64>::zero_state(1).unwrap();
        assert!(matches!(rho.depolarize(&[0], 1.5), Err(SimError::InvalidProbability(_))));
        assert!(rho.depolarize(&[0], -0.1).is_err());
    }

    #[test]
    fn purity_values() {
        assert!((DensityMatrix::<f64>::zero_state(2).unwrap().purity() - 1.0).abs() < 1e-15);
        assert!((DensityMatrix::<f64>::maximally_mixed(2).unwrap().purity() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dephasing_a_diagonal_matrix_is_a_no_op() {
        let rho = DensityMatrix::<f64>::maximally_mixed(2).unwrap();
        assert_eq!(rho.dephased(), rho);
    }
}
