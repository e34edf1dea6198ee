use serde::{Deserialize, Serialize};

use crate::problems::TaskKind;
use crate::qsim::{Gate, GateKind};

use super::EnvError;

const ROTATIONS: [GateKind; 3] = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
const FIXED: [GateKind; 5] = [GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::T];

/// A decoded action: which gate goes where.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateAction {
    pub index: usize,
    pub kind: GateKind,
    /// `[q, _]` for single-qubit kinds, `[control, target]` for CX.
    pub qubits: [usize; 2],
}

impl GateAction {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    /// Gate to append; rotations start at angle 0.
    pub fn gate(&self) -> Gate<f64> {
        match self.kind {
            GateKind::Cx => Gate::cx(self.qubits[0], self.qubits[1]),
            GateKind::Rx => Gate::rx(self.qubits[0], 0.0),
            GateKind::Ry => Gate::ry(self.qubits[0], 0.0),
            GateKind::Rz => Gate::rz(self.qubits[0], 0.0),
            k => Gate::fixed(k, self.qubits[0]),
        }
    }
}

/// Discrete action layout.
///
/// Indices `kind_idx * N + q` cover the single-qubit kinds; the ordered CX
/// pairs follow, control-major with `c == t` skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpace {
    n_qubits: usize,
    single: &'static [GateKind],
}

impl ActionSpace {
    pub fn new(kind: TaskKind, n_qubits: usize) -> Self {
        let single: &'static [GateKind] = if kind.is_parameterized() { &ROTATIONS } else { &FIXED };
        Self { n_qubits, single }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Single-qubit kinds in index order.
    pub fn single_kinds(&self) -> &'static [GateKind] {
        self.single
    }

    pub fn size(&self) -> usize {
        let n = self.n_qubits;
        self.single.len() * n + n * (n - 1)
    }

    pub fn decode(&self, index: usize) -> Result<GateAction, EnvError> {
        let n = self.n_qubits;
        let n_single = self.single.len() * n;
        if index >= self.size() {
            return Err(EnvError::ActionOutOfRange { index, size: self.size() });
        }
        if index < n_single {
            return Ok(GateAction { index, kind: self.single[index / n], qubits: [index % n, 0] });
        }
        let pair = index - n_single;
        let c = pair / (n - 1);
        let r = pair % (n - 1);
        let t = if r < c { r } else { r + 1 };
        Ok(GateAction { index, kind: GateKind::Cx, qubits: [c, t] })
    }

    /// Index of `kind` on `qubits`, if that gate belongs to this space.
    pub fn encode(&self, kind: GateKind, qubits: &[usize]) -> Option<usize> {
        let n = self.n_qubits;
        if qubits.len() != kind.arity() || qubits.iter().any(|&q| q >= n) {
            return None;
        }
        if kind == GateKind::Cx {
            let (c, t) = (qubits[0], qubits[1]);
            if c == t {
                return None;
            }
            let r = if t < c { t } else { t - 1 };
            return Some(self.single.len() * n + c * (n - 1) + r);
        }
        let k = self.single.iter().position(|&s| s == kind)?;
        Some(k * n + qubits[0])
    }

    pub fn all(&self) -> impl Iterator<Item = GateAction> + '_ {
        (0..self.size()).map(|i| self.decode(i).expect("index in range"))
    }
}
