use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ProblemError;
use crate::qsim::{DensityMatrix, Gate, StateVector};

/// Random mixed state `G G^dag / Tr(G G^dag)` with `G` a seeded complex
/// Gaussian `2^n x rank` matrix (Hilbert-Schmidt-type ensemble).
pub fn random_mixed_state(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix<f64>, ProblemError> {
    crate::qsim::DensityMatrix::<f64>::zero_state(n_qubits)?;
    let dim = 1usize << n_qubits;
    if rank == 0 || rank > dim {
        return Err(ProblemError::InvalidRank { rank, dim });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Complex64> = (0..dim * rank)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..rank {
                acc += g[r * rank + k] * g[c * rank + k].conj();
            }
            m[r * dim + c] = acc;
        }
    }
    let tr: f64 = (0..dim).map(|i| m[i * dim + i].re).sum();
    for z in &mut m {
        *z /= tr;
    }
    // enforce exact hermiticity after the division
    for r in 0..dim {
        m[r * dim + r].im = 0.0;
        for c in r + 1..dim {
            m[c * dim + r] = m[r * dim + c].conj();
        }
    }
    Ok(DensityMatrix::from_matrix(n_qubits, m)?)
}

/// `(|0...0> + |1...1>)/sqrt(2)`.
pub fn ghz_target(n_qubits: usize) -> Result<StateVector<f64>, ProblemError> {
    if n_qubits < 2 {
        return Err(ProblemError::TooSmall(n_qubits));
    }
    let dim = 1usize << n_qubits;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[dim - 1] = amps[0];
    Ok(StateVector::from_amplitudes(n_qubits, amps)?)
}

/// Feature-map prefix: `RY(x1 pi)` on qubit 0 and `RY(x2 pi)` on qubit 1.
pub fn encode_features(x: [f64; 2]) -> [Gate<f64>; 2] {
    use std::f64::consts::PI;
    [Gate::ry(0, x[0] * PI), Gate::ry(1, x[1] * PI)]
}
