use crate::qsim::GateKind;

use super::action::{ActionSpace, GateAction};
use super::circuit::CircuitProgram;

/// Whether appending `action` to `circuit` is allowed.
///
/// A single-qubit gate may not directly follow a gate of the same kind on its
/// qubit, and `CX(c, t)` may not directly follow the same `CX(c, t)`.
/// `CX(t, c)` after `CX(c, t)` is allowed.
pub fn is_legal(circuit: &CircuitProgram, action: &GateAction) -> bool {
    match action.kind {
        GateKind::Cx => {
            let (c, t) = (action.qubits[0], action.qubits[1]);
            match (circuit.last_index_on(c), circuit.last_index_on(t)) {
                (Some(i), Some(j)) if i == j => circuit.gates()[i].qubits() != [c, t],
                _ => true,
            }
        }
        kind => circuit.last_gate_on(action.qubits[0]).is_none_or(|g| g.kind() != kind),
    }
}

pub fn legal_action_mask(circuit: &CircuitProgram, space: &ActionSpace) -> Vec<bool> {
    space.all().map(|a| is_legal(circuit, &a)).collect()
}
