use serde::{Deserialize, Serialize};

use crate::qsim::GateKind;
use crate::scalar::Real;

use super::action::ActionSpace;
use super::circuit::CircuitProgram;
use super::EnvError;

/// Circuit structure as a sparse binary `[d_max][N + 3][N]` tensor plus one
/// scalar progress feature.
///
/// Row `c < N` of column `q` marks `CX(c, q)`; rows `N..N+3` mark the
/// single-qubit gate on `q`. With three kinds (rotations) the rows are one-hot;
/// with five kinds they hold the 3-bit code `kind_idx + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QasObservation {
    pub d_max: usize,
    pub n_qubits: usize,
    /// Sorted flat indices of the ones.
    pub ones: Vec<u32>,
    pub cost_feature: f64,
}

/// One placed gate recovered from an observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlacedGate {
    pub kind: GateKind,
    pub qubits: [usize; 2],
    pub moment: usize,
}

pub fn structure_len(d_max: usize, n_qubits: usize) -> usize {
    d_max * (n_qubits + 3) * n_qubits
}

/// Network input width: the flattened tensor plus the cost feature.
pub fn input_len(d_max: usize, n_qubits: usize) -> usize {
    structure_len(d_max, n_qubits) + 1
}

fn flat(n: usize, m: usize, row: usize, q: usize) -> u32 {
    ((m * (n + 3) + row) * n + q) as u32
}

impl QasObservation {
    pub fn encode(
        circuit: &CircuitProgram,
        space: &ActionSpace,
        d_max: usize,
        cost_feature: f64,
    ) -> Result<Self, EnvError> {
        let n = circuit.n_qubits();
        if circuit.depth() > d_max {
            return Err(EnvError::DepthOverflow { depth: circuit.depth(), d_max });
        }
        let one_hot = space.single_kinds().len() <= 3;
        let mut ones = Vec::with_capacity(circuit.gate_count() * 2);
        for (g, &m) in circuit.gates().iter().zip(circuit.moments()) {
            let q = g.qubits();
            if g.kind() == GateKind::Cx {
                ones.push(flat(n, m, q[0], q[1]));
                continue;
            }
            let k = space.single_kinds().iter().position(|&s| s == g.kind()).ok_or(EnvError::ForeignGate(g.kind()))?;
            if one_hot {
                ones.push(flat(n, m, n + k, q[0]));
            } else {
                let code = k + 1;
                for bit in 0..3 {
                    if code >> bit & 1 == 1 {
                        ones.push(flat(n, m, n + bit, q[0]));
                    }
                }
            }
        }
        ones.sort_unstable();
        Ok(Self { d_max, n_qubits: n, ones, cost_feature: cost_feature.clamp(0.0, 1.0) })
    }

    pub fn input_len(&self) -> usize {
        input_len(self.d_max, self.n_qubits)
    }

    /// Writes the dense network input into `out` (length [`Self::input_len`]).
    pub fn write_dense<T: Real>(&self, out: &mut [T]) {
        assert_eq!(out.len(), self.input_len(), "input buffer size");
        out.fill(T::zero());
        for &i in &self.ones {
            out[i as usize] = T::one();
        }
        out[out.len() - 1] = T::lit(self.cost_feature);
    }

    pub fn to_dense<T: Real>(&self) -> Vec<T> {
        let mut v = vec![T::zero(); self.input_len()];
        self.write_dense(&mut v);
        v
    }

    /// Recovers gate kinds, qubits and moments, ordered by moment then qubit.
    pub fn decode(&self, space: &ActionSpace) -> Result<Vec<PlacedGate>, EnvError> {
        let n = self.n_qubits;
        let rows = n + 3;
        let one_hot = space.single_kinds().len() <= 3;
        let mut grid = vec![0u8; structure_len(self.d_max, n)];
        for &i in &self.ones {
            grid[i as usize] = 1;
        }
        let mut out = Vec::new();
        for m in 0..self.d_max {
            for q in 0..n {
                let at = |row: usize| grid[(m * rows + row) * n + q] == 1;
                for c in 0..n {
                    if at(c) {
                        out.push(PlacedGate { kind: GateKind::Cx, qubits: [c, q], moment: m });
                    }
                }
                let bits: Vec<bool> = (0..3).map(|r| at(n + r)).collect();
                let k = if one_hot {
                    bits.iter().position(|&b| b)
                } else {
                    let code = bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (usize::from(b) << i));
                    code.checked_sub(1)
                };
                if let Some(k) = k {
                    let kind = *space.single_kinds().get(k).ok_or(EnvError::CorruptObservation)?;
                    out.push(PlacedGate { kind, qubits: [q, 0], moment: m });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::TaskKind;
    use crate::qsim::Gate;

    fn placed(c: &CircuitProgram) -> Vec<PlacedGate> {
        let mut v: Vec<PlacedGate> = c
            .gates()
            .iter()
            .zip(c.moments())
            .map(|(g, &m)| {
                let q = g.qubits();
                let qubits = if q.len() == 2 { [q[0], q[1]] } else { [q[0], 0] };
                PlacedGate { kind: g.kind(), qubits, moment: m }
            })
            .collect();
        // decode order: moment, then the qubit whose column holds the mark
        v.sort_by_key(|p| {
            (p.moment, if p.kind == GateKind::Cx { p.qubits[1] } else { p.qubits[0] }, p.kind != GateKind::Cx)
        });
        v
    }

    #[test]
    fn empty_is_all_zero() {
        let s = ActionSpace::new(TaskKind::Vqe, 2);
        let o = QasObservation::encode(&CircuitProgram::new(2).unwrap(), &s, 5, 1.0).unwrap();
        assert!(o.ones.is_empty());
        let d: Vec<f64> = o.to_dense();
        assert_eq!(d.len(), 5 * 5 * 2 + 1);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn rotation_layout_and_decode() {
        let s = ActionSpace::new(TaskKind::Vqe, 3);
        let c = CircuitProgram::from_gates(3, [Gate::ry(0, 0.3), Gate::cx(0, 2), Gate::rz(1, 0.0)]).unwrap();
        let o = QasObservation::encode(&c, &s, 4, 0.5).unwrap();
        // RY on q0 at moment 0: row N + 1
        assert!(o.ones.contains(&flat(3, 0, 4, 0)));
        // CX(0, 2) at moment 1: row 0, column 2
        assert!(o.ones.contains(&flat(3, 1, 0, 2)));
        assert_eq!(o.decode(&s).unwrap(), placed(&c));
    }

    #[test]
    fn state_prep_code() {
        let s = ActionSpace::new(TaskKind::StatePrep, 3);
        let c = CircuitProgram::from_gates(
            3,
            [Gate::fixed(GateKind::T, 0), Gate::fixed(GateKind::H, 1), Gate::cx(1, 2), Gate::fixed(GateKind::X, 0)],
        )
        .unwrap();
        let o = QasObservation::encode(&c, &s, 3, 0.0).unwrap();
        // T has index 4, code 5 = 0b101
        assert!(o.ones.contains(&flat(3, 0, 3, 0)) && o.ones.contains(&flat(3, 0, 5, 0)));
        assert_eq!(o.decode(&s).unwrap(), placed(&c));
    }

    #[test]
    fn depth_overflow() {
        let s = ActionSpace::new(TaskKind::Vqe, 2);
        let c = CircuitProgram::from_gates(2, [Gate::rx(0, 0.0), Gate::ry(0, 0.0)]).unwrap();
        assert!(QasObservation::encode(&c, &s, 1, 0.0).is_err());
    }
}
