//! Task cost functions evaluated on a circuit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::problems::{encode_features, Sample};
use crate::qsim::{DensityMatrix, NoiseConfig, StateVector};

use super::circuit::CircuitProgram;
use super::EnvError;

/// `Tr(rho^2) - Tr(dephase(U rho U^dag)^2)`, zero iff the rotated state is
/// diagonal.
pub fn vqsd_cost(rho: &DensityMatrix<f64>, circuit: &CircuitProgram) -> Result<f64, EnvError> {
    vqsd_cost_with(rho, circuit, &circuit.params(), &NoiseConfig::noiseless())
}

pub fn vqsd_cost_with(
    rho: &DensityMatrix<f64>,
    circuit: &CircuitProgram,
    params: &[f64],
    noise: &NoiseConfig,
) -> Result<f64, EnvError> {
    if rho.n_qubits() != circuit.n_qubits() {
        return Err(EnvError::QubitMismatch { expected: circuit.n_qubits(), got: rho.n_qubits() });
    }
    let out = circuit.evolve_density(rho, params, noise)?;
    Ok(rho.purity() - out.dephased_purity())
}

/// Quadratic classifier cost and accuracy over one data split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqcScore {
    pub cost: f64,
    pub accuracy: f64,
}

/// Evaluates the classifier with the circuit's current angles, noiseless.
pub fn vqc_cost(circuit: &CircuitProgram, samples: &[Sample]) -> Result<VqcScore, EnvError> {
    vqc_score_with(circuit, &circuit.params(), samples, &NoiseConfig::noiseless())
}

/// Prediction is `y = (1 - <Z_0>)/2` after the feature map and the ansatz;
/// the cost is `sum (y - label)^2 / (2 n)` over the `n` samples.
pub fn vqc_score_with(
    circuit: &CircuitProgram,
    params: &[f64],
    samples: &[Sample],
    noise: &NoiseConfig,
) -> Result<VqcScore, EnvError> {
    let n = circuit.n_qubits();
    if n < 2 {
        return Err(EnvError::QubitMismatch { expected: 2, got: n });
    }
    if samples.is_empty() {
        return Ok(VqcScore { cost: 0.0, accuracy: 0.0 });
    }
    let mut sq = 0.0;
    let mut correct = 0usize;
    let mut account = |y: f64, label: u8| {
        sq += (y - f64::from(label)).powi(2);
        if y.round() as u8 == label {
            correct += 1;
        }
    };
    if noise.enabled {
        for s in samples {
            let mut rho = DensityMatrix::zero_state(n)?;
            for g in encode_features(s.x).iter().copied().chain(circuit.gates_with(params)) {
                rho.apply_noisy(&g, noise)?;
            }
            let dim = rho.dim();
            let z: f64 = (0..dim).map(|j| z0_sign(j, dim) * rho.get(j, j).re).sum();
            account((1.0 - z) / 2.0, s.label);
        }
    } else {
        let m = z0_gram(circuit, params)?;
        for s in samples {
            account(predict_from_gram(&m, s.x), s.label);
        }
    }
    let k = samples.len() as f64;
    Ok(VqcScore { cost: sq / (2.0 * k), accuracy: correct as f64 / k })
}

fn z0_sign(j: usize, dim: usize) -> f64 {
    if j < dim / 2 {
        1.0
    } else {
        -1.0
    }
}

/// The feature map only reaches the four basis states spanned by qubits 0
/// and 1, so `<Z_0>` is a quadratic form in their amplitudes with matrix
/// `M[b][b'] = <b| U^dag Z_0 U |b'>`.
fn z0_gram(circuit: &CircuitProgram, params: &[f64]) -> Result<[[f64; 4]; 4], EnvError> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    let gates: Vec<_> = circuit.gates_with(params).collect();
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(4);
    for b in 0..4usize {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[b << (n - 2)] = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(n, amps)?;
        s.apply_all(&gates)?;
        cols.push(s.amplitudes().to_vec());
    }
    let mut m = [[0.0; 4]; 4];
    for b in 0..4 {
        for c in b..4 {
            let v: Complex64 = (0..dim).map(|j| cols[b][j].conj() * cols[c][j] * z0_sign(j, dim)).sum();
            m[b][c] = v.re;
            m[c][b] = v.re;
        }
    }
    Ok(m)
}

fn predict_from_gram(m: &[[f64; 4]; 4], x: [f64; 2]) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let a0 = [(x[0] * FRAC_PI_2).cos(), (x[0] * FRAC_PI_2).sin()];
    let a1 = [(x[1] * FRAC_PI_2).cos(), (x[1] * FRAC_PI_2).sin()];
    let c = [a0[0] * a1[0], a0[0] * a1[1], a0[1] * a1[0], a0[1] * a1[1]];
    let mut z = 0.0;
    for b in 0..4 {
        for d in 0..4 {
            z += c[b] * c[d] * m[b][d];
        }
    }
    (1.0 - z) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Gate, GateKind};

    fn sample(x: [f64; 2], label: u8) -> Sample {
        Sample { x, label }
    }

    #[test]
    fn empty_ansatz_examples() {
        let c = CircuitProgram::new(3).unwrap();
        let s = vqc_cost(&c, &[sample([0.0, 0.0], 0)]).unwrap();
        assert!(s.cost.abs() < 1e-15 && s.accuracy == 1.0);
        let s = vqc_cost(&c, &[sample([1.0, 0.0], 1)]).unwrap();
        assert!(s.cost.abs() < 1e-15 && s.accuracy == 1.0);
    }

    #[test]
    fn constant_half_prediction() {
        // H on qubit 0 after the map RY(0) gives y = 1/2 for x1 = 0
        let c = CircuitProgram::from_gates(3, [Gate::fixed(GateKind::H, 0)]).unwrap();
        let data = [sample([0.0, 0.3], 0), sample([0.0, 0.9], 1)];
        let s = vqc_cost(&c, &data).unwrap();
        assert!((s.cost - 0.125).abs() < 1e-12);
    }

    #[test]
    fn fast_path_matches_density_path() {
        let c = CircuitProgram::from_gates(
            3,
            [Gate::ry(0, 0.4), Gate::cx(1, 0), Gate::rx(2, 1.1), Gate::cx(2, 0), Gate::rz(0, -0.7), Gate::ry(1, 2.0)],
        )
        .unwrap();
        let data: Vec<Sample> =
            (0..20).map(|i| sample([i as f64 / 19.0, (i * 7 % 20) as f64 / 19.0], (i % 2) as u8)).collect();
        let fast = vqc_cost(&c, &data).unwrap();
        let zero_noise = NoiseConfig { p1: 0.0, p2: 0.0, enabled: true };
        let slow = vqc_score_with(&c, &c.params(), &data, &zero_noise).unwrap();
        assert!((fast.cost - slow.cost).abs() < 1e-12);
        assert_eq!(fast.accuracy, slow.accuracy);
    }

    #[test]
    fn vqsd_fixed_points() {
        let diag = DensityMatrix::<f64>::maximally_mixed(2).unwrap();
        assert!(vqsd_cost(&diag, &CircuitProgram::new(2).unwrap()).unwrap().abs() < 1e-15);
        let mut plus = StateVector::zero_state(1).unwrap();
        plus.apply(&Gate::fixed(GateKind::H, 0)).unwrap();
        let rho = DensityMatrix::from_pure(&plus);
        let h = CircuitProgram::from_gates(1, [Gate::fixed(GateKind::H, 0)]).unwrap();
        assert!(vqsd_cost(&rho, &h).unwrap().abs() < 1e-15);
        assert!((vqsd_cost(&rho, &CircuitProgram::new(1).unwrap()).unwrap() - 0.5).abs() < 1e-15);
    }
}
