use serde::{Deserialize, Serialize};

use crate::qsim::{DensityMatrix, Gate, GateKind, NoiseConfig, SimError, StateVector};

use super::EnvError;

/// A circuit under construction, with greedy earliest-slot moment scheduling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitFile", into = "CircuitFile")]
pub struct CircuitProgram {
    n_qubits: usize,
    gates: Vec<Gate<f64>>,
    moments: Vec<usize>,
    /// First free moment per qubit.
    frontier: Vec<usize>,
    /// Index into `gates` of the last gate touching each qubit.
    last: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateEntry {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    pub moment: usize,
}

/// Serialized form of a [`CircuitProgram`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub n_qubits: usize,
    pub gates: Vec<GateEntry>,
}

impl From<CircuitProgram> for CircuitFile {
    fn from(c: CircuitProgram) -> Self {
        let gates = c
            .gates
            .iter()
            .zip(&c.moments)
            .map(|(g, &m)| GateEntry { kind: g.kind(), qubits: g.qubits().to_vec(), angle: g.angle(), moment: m })
            .collect();
        CircuitFile { n_qubits: c.n_qubits, gates }
    }
}

impl TryFrom<CircuitFile> for CircuitProgram {
    type Error = EnvError;

    fn try_from(f: CircuitFile) -> Result<Self, EnvError> {
        let mut c = CircuitProgram::new(f.n_qubits)?;
        for e in f.gates {
            let m = c.push(Gate::new(e.kind, &e.qubits, e.angle)?)?;
            if m != e.moment {
                return Err(EnvError::MomentMismatch { stored: e.moment, scheduled: m });
            }
        }
        Ok(c)
    }
}

impl CircuitProgram {
    pub fn new(n_qubits: usize) -> Result<Self, EnvError> {
        crate::qsim::check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            moments: Vec::new(),
            frontier: vec![0; n_qubits],
            last: vec![None; n_qubits],
        })
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate<f64>>) -> Result<Self, EnvError> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate<f64>] {
        &self.gates
    }

    pub fn moments(&self) -> &[usize] {
        &self.moments
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Number of moments; 0 for the empty circuit.
    pub fn depth(&self) -> usize {
        self.frontier.iter().copied().max().unwrap_or(0)
    }

    /// Moment the next gate on `qubits` would occupy.
    pub fn slot_for(&self, qubits: &[usize]) -> usize {
        qubits.iter().map(|&q| self.frontier[q]).max().unwrap_or(0)
    }

    /// Appends `gate` and returns its moment.
    pub fn push(&mut self, gate: Gate<f64>) -> Result<usize, EnvError> {
        gate.check_range(self.n_qubits)?;
        let m = self.slot_for(gate.qubits());
        let idx = self.gates.len();
        for &q in gate.qubits() {
            self.frontier[q] = m + 1;
            self.last[q] = Some(idx);
        }
        self.gates.push(gate);
        self.moments.push(m);
        Ok(m)
    }

    /// Last gate placed on `qubit`.
    pub fn last_gate_on(&self, qubit: usize) -> Option<&Gate<f64>> {
        self.last.get(qubit).copied().flatten().map(|i| &self.gates[i])
    }

    pub(crate) fn last_index_on(&self, qubit: usize) -> Option<usize> {
        self.last[qubit]
    }

    pub fn param_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind().is_rotation()).count()
    }

    /// Rotation angles in gate order.
    pub fn params(&self) -> Vec<f64> {
        self.gates.iter().filter_map(|g| g.angle()).collect()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), EnvError> {
        if params.len() != self.param_count() {
            return Err(EnvError::ParamCount { expected: self.param_count(), got: params.len() });
        }
        let mut it = params.iter();
        for g in &mut self.gates {
            if g.kind().is_rotation() {
                *g = Gate::new(g.kind(), g.qubits(), Some(*it.next().expect("length checked")))?;
            }
        }
        Ok(())
    }

    /// Gates with angles taken from `params` (length [`Self::param_count`]).
    pub fn gates_with<'a>(&'a self, params: &'a [f64]) -> impl Iterator<Item = Gate<f64>> + 'a {
        let mut next = 0;
        self.gates.iter().map(move |g| match g.kind() {
            GateKind::Rx => {
                next += 1;
                Gate::rx(g.qubits()[0], params[next - 1])
            }
            GateKind::Ry => {
                next += 1;
                Gate::ry(g.qubits()[0], params[next - 1])
            }
            GateKind::Rz => {
                next += 1;
                Gate::rz(g.qubits()[0], params[next - 1])
            }
            _ => *g,
        })
    }

    /// `U |0...0>`.
    pub fn statevector(&self) -> Result<StateVector<f64>, SimError> {
        let mut s = StateVector::zero_state(self.n_qubits)?;
        s.apply_all(&self.gates)?;
        Ok(s)
    }

    /// Noisy evolution of `rho` through the circuit with angles `params`.
    pub fn evolve_density(
        &self,
        rho: &DensityMatrix<f64>,
        params: &[f64],
        noise: &NoiseConfig,
    ) -> Result<DensityMatrix<f64>, SimError> {
        let mut out = rho.clone();
        for g in self.gates_with(params) {
            out.apply_noisy(&g, noise)?;
        }
        Ok(out)
    }
}

impl std::fmt::Display for CircuitProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_moments() {
        let mut c = CircuitProgram::new(3).unwrap();
        assert_eq!(c.depth(), 0);
        assert_eq!(c.push(Gate::fixed(GateKind::H, 0)).unwrap(), 0);
        assert_eq!(c.push(Gate::rx(2, 0.1)).unwrap(), 0);
        assert_eq!(c.push(Gate::cx(0, 1)).unwrap(), 1);
        assert_eq!(c.push(Gate::rz(2, 0.0)).unwrap(), 1);
        assert_eq!(c.push(Gate::cx(1, 2)).unwrap(), 2);
        assert_eq!(c.push(Gate::fixed(GateKind::X, 0)).unwrap(), 2);
        assert_eq!(c.depth(), 3);
        assert_eq!(c.moments(), &[0, 0, 1, 1, 2, 2]);
        assert_eq!(c.last_gate_on(1).unwrap().kind(), GateKind::Cx);
    }

    #[test]
    fn params_round_trip() {
        let mut c = CircuitProgram::from_gates(2, [Gate::rx(0, 0.1), Gate::cx(0, 1), Gate::ry(1, 0.2)]).unwrap();
        assert_eq!(c.params(), vec![0.1, 0.2]);
        c.set_params(&[0.3, 0.4]).unwrap();
        assert_eq!(c.params(), vec![0.3, 0.4]);
        assert!(c.set_params(&[1.0]).is_err());
        let g: Vec<_> = c.gates_with(&[1.0, 2.0]).collect();
        assert_eq!(g[2].angle(), Some(2.0));
    }

    #[test]
    fn serde_round_trip() {
        let c =
            CircuitProgram::from_gates(3, [Gate::fixed(GateKind::H, 0), Gate::cx(0, 1), Gate::rz(2, -0.5)]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: CircuitProgram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let bad = text.replace("\"moment\":1", "\"moment\":4");
        assert!(serde_json::from_str::<CircuitProgram>(&bad).is_err());
    }

    #[test]
    fn out_of_range_gate_rejected() {
        let mut c = CircuitProgram::new(2).unwrap();
        assert!(c.push(Gate::cx(0, 2)).is_err());
        assert!(c.is_empty());
    }
}
