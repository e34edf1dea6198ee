use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::scalar::Real;

/// Gate kinds available to the circuit builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cx,
    X,
    Y,
    Z,
    H,
    T,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cx,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::T,
    ];

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn arity(self) -> usize {
        if self == GateKind::Cx {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cx => "CX",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::T => "T",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate bound to qubits (and an angle for rotations).
///
/// For `CX` the qubits are `[control, target]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate<T> {
    kind: GateKind,
    qubits: [usize; 2],
    angle: Option<T>,
}

impl<T: Real> Gate<T> {
    pub fn new(kind: GateKind, qubits: &[usize], angle: Option<T>) -> Result<Self, SimError> {
        if qubits.len() != kind.arity() {
            return Err(SimError::Arity { kind, got: qubits.len() });
        }
        if kind == GateKind::Cx && qubits[0] == qubits[1] {
            return Err(SimError::DuplicateQubits(qubits[0]));
        }
        match (kind.is_rotation(), angle) {
            (true, Some(a)) if !a.is_finite() => return Err(SimError::NonFiniteAngle),
            (true, None) | (false, Some(_)) => return Err(SimError::AngleMismatch(kind)),
            _ => {}
        }
        let mut q = [qubits[0], 0];
        if qubits.len() == 2 {
            q[1] = qubits[1];
        }
        Ok(Self { kind, qubits: q, angle })
    }

    pub fn rx(q: usize, theta: T) -> Self {
        Self { kind: GateKind::Rx, qubits: [q, 0], angle: Some(theta) }
    }

    pub fn ry(q: usize, theta: T) -> Self {
        Self { kind: GateKind::Ry, qubits: [q, 0], angle: Some(theta) }
    }

    pub fn rz(q: usize, theta: T) -> Self {
        Self { kind: GateKind::Rz, qubits: [q, 0], angle: Some(theta) }
    }

    /// # Panics
    /// If `control == target`.
    pub fn cx(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "CX needs two distinct qubits");
        Self { kind: GateKind::Cx, qubits: [control, target], angle: None }
    }

    /// Non-parameterized single-qubit gate.
    ///
    /// # Panics
    /// If `kind` is a rotation or `CX`.
    pub fn fixed(kind: GateKind, q: usize) -> Self {
        assert!(!kind.is_rotation() && kind != GateKind::Cx, "{kind} is not a fixed 1-qubit gate");
        Self { kind, qubits: [q, 0], angle: None }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn angle(&self) -> Option<T> {
        self.angle
    }

    pub(crate) fn check_range(&self, n_qubits: usize) -> Result<(), SimError> {
        for &q in self.qubits() {
            if q >= n_qubits {
                return Err(SimError::QubitOutOfRange { qubit: q, n_qubits });
            }
        }
        Ok(())
    }

    /// 2x2 matrix of a single-qubit gate, `None` for `CX`.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex<T>; 2]; 2]> {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let half = T::lit(0.5);
        let m = match self.kind {
            GateKind::Cx => return None,
            GateKind::Rx => {
                let a = self.angle.unwrap_or_else(T::zero) * half;
                let (s, c) = a.sin_cos();
                [
                    [Complex::new(c, T::zero()), Complex::new(T::zero(), -s)],
                    [Complex::new(T::zero(), -s), Complex::new(c, T::zero())],
                ]
            }
            GateKind::Ry => {
                let a = self.angle.unwrap_or_else(T::zero) * half;
                let (s, c) = a.sin_cos();
                [
                    [Complex::new(c, T::zero()), Complex::new(-s, T::zero())],
                    [Complex::new(s, T::zero()), Complex::new(c, T::zero())],
                ]
            }
            GateKind::Rz => {
                let a = self.angle.unwrap_or_else(T::zero) * half;
                let (s, c) = a.sin_cos();
                [[Complex::new(c, -s), zero], [zero, Complex::new(c, s)]]
            }
            GateKind::X => [[zero, one], [one, zero]],
            GateKind::Y => [[zero, Complex::new(T::zero(), -T::one())], [Complex::new(T::zero(), T::one()), zero]],
            GateKind::Z => [[one, zero], [zero, -one]],
            GateKind::H => {
                let r = T::FRAC_1_SQRT_2();
                let p = Complex::new(r, T::zero());
                [[p, p], [p, -p]]
            }
            GateKind::T => {
                let r = T::FRAC_1_SQRT_2();
                [[one, zero], [zero, Complex::new(r, r)]]
            }
        };
        Some(m)
    }

    /// Dense unitary on the gate's own qubits (2x2, or 4x4 for `CX` with the
    /// control as the most significant bit), row-major.
    pub fn local_matrix(&self) -> Vec<Vec<Complex<T>>> {
        if let Some(m) = self.single_qubit_matrix() {
            return m.iter().map(|r| r.to_vec()).collect();
        }
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut m = vec![vec![zero; 4]; 4];
        m[0][0] = one;
        m[1][1] = one;
        m[2][3] = one;
        m[3][2] = one;
        m
    }
}

impl<T: Real> fmt::Display for Gate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.angle) {
            (GateKind::Cx, _) => write!(f, "CX({},{})", self.qubits[0], self.qubits[1]),
            (k, Some(a)) => write!(f, "{k}({:.4})@{}", a, self.qubits[0]),
            (k, None) => write!(f, "{k}@{}", self.qubits[0]),
        }
    }
}
