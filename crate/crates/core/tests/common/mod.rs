//! Dense-matrix reference implementations shared by the integration tests.
//! Written from the textbook definitions, independent of the simulator
//! kernels.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rlqas::agents::{ReplayBuffer, ReplayMode, Transition, PRIORITY_EPS};
use rlqas::env::QasObservation;
use rlqas::qsim::{DensityMatrix, Gate, GateKind, StateVector};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2x2 matrix of a single-qubit gate.
pub fn one_qubit(kind: GateKind, theta: f64) -> [[Complex64; 2]; 2] {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::Rx => [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]],
        GateKind::Ry => [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]],
        GateKind::Rz => [[c(co, -si), c(0.0, 0.0)], [c(0.0, 0.0), c(co, si)]],
        GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Y => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        GateKind::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::T => {
            let p = std::f64::consts::FRAC_PI_4;
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(p.cos(), p.sin())]]
        }
        GateKind::Cx => panic!("two-qubit gate"),
    }
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

fn small(m: [[Complex64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |r, col| m[r][col])
}

/// Full `2^n` operator; qubit 0 is the leftmost tensor factor.
pub fn gate_matrix(n: usize, g: &Gate<f64>) -> CMat {
    let dim = 1 << n;
    if g.kind() == GateKind::Cx {
        let (ctl, tgt) = (g.qubits()[0], g.qubits()[1]);
        let (cb, tb) = (1 << (n - 1 - ctl), 1 << (n - 1 - tgt));
        return CMat::from_fn(dim, dim, |r, col| {
            let image = if col & cb != 0 { col ^ tb } else { col };
            if r == image {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
    }
    let q = g.qubits()[0];
    let u = small(one_qubit(g.kind(), g.angle().unwrap_or(0.0)));
    let mut full = CMat::identity(1, 1);
    for k in 0..n {
        let f = if k == q { u.clone() } else { CMat::identity(2, 2) };
        full = kron(&full, &f);
    }
    full
}

/// Dense operator of a Pauli string such as `"XIZ"`.
pub fn pauli_matrix(s: &str) -> CMat {
    let mut full = CMat::identity(1, 1);
    for ch in s.chars() {
        let f = match ch {
            'I' => CMat::identity(2, 2),
            'X' => small(one_qubit(GateKind::X, 0.0)),
            'Y' => small(one_qubit(GateKind::Y, 0.0)),
            'Z' => small(one_qubit(GateKind::Z, 0.0)),
            _ => panic!("bad pauli {ch}"),
        };
        full = kron(&full, &f);
    }
    full
}

pub fn ket(psi: &StateVector<f64>) -> CMat {
    CMat::from_column_slice(psi.dim(), 1, psi.amplitudes())
}

pub fn dense(rho: &DensityMatrix<f64>) -> CMat {
    CMat::from_row_slice(rho.dim(), rho.dim(), rho.data())
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(1-p) rho + p/(4^k - 1) sum_{P != I} P rho P` over `qubits`.
pub fn depolarize_dense(n: usize, rho: &CMat, qubits: &[usize], p: f64) -> CMat {
    let k = qubits.len();
    let terms = 1usize << (2 * k);
    let mut out = rho * c(1.0 - p, 0.0);
    for code in 1..terms {
        let mut label: Vec<char> = vec!['I'; n];
        for (i, &q) in qubits.iter().enumerate() {
            label[q] = ['I', 'X', 'Y', 'Z'][(code >> (2 * i)) & 3];
        }
        let pm = pauli_matrix(&label.iter().collect::<String>());
        out += &pm * rho * pm.adjoint() * c(p / (terms as f64 - 1.0), 0.0);
    }
    out
}

/// Strategy for a register size in 1..=3 and up to eight gates on it.
pub fn circuit_strategy() -> impl Strategy<Value = (usize, Vec<Gate<f64>>)> {
    (1usize..=3).prop_flat_map(|n| {
        let gate = (0usize..9, 0..n, 1..n.max(2), -7.0f64..7.0).prop_map(move |(k, q, off, th)| match k {
            0 => Gate::rx(q, th),
            1 => Gate::ry(q, th),
            2 => Gate::rz(q, th),
            3 if n > 1 => Gate::cx(q, (q + off) % n),
            k => Gate::fixed([GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::T][k % 5], q),
        });
        (Just(n), prop::collection::vec(gate, 0..=8))
    })
}

/// Moment grid built independently of the circuit type: every gate sits in
/// the first moment after the latest occupied cell of its qubits.
pub struct Grid {
    pub n: usize,
    pub cells: Vec<Vec<Option<usize>>>,
    pub placed: Vec<(GateKind, Vec<usize>, usize)>,
}

impl Grid {
    pub fn new(n: usize) -> Self {
        Self { n, cells: Vec::new(), placed: Vec::new() }
    }

    pub fn top(&self, q: usize) -> Option<usize> {
        (0..self.cells.len()).rev().find(|&m| self.cells[m][q].is_some())
    }

    pub fn last_gate(&self, q: usize) -> Option<usize> {
        self.top(q).and_then(|m| self.cells[m][q])
    }

    pub fn place(&mut self, kind: GateKind, qubits: &[usize]) -> usize {
        let m = qubits.iter().filter_map(|&q| self.top(q)).max().map_or(0, |m| m + 1);
        while self.cells.len() <= m {
            self.cells.push(vec![None; self.n]);
        }
        let id = self.placed.len();
        for &q in qubits {
            self.cells[m][q] = Some(id);
        }
        self.placed.push((kind, qubits.to_vec(), m));
        m
    }

    pub fn legal(&self, kind: GateKind, qubits: &[usize]) -> bool {
        if kind == GateKind::Cx {
            match (self.last_gate(qubits[0]), self.last_gate(qubits[1])) {
                (Some(i), Some(j)) if i == j => self.placed[i].1 != qubits,
                _ => true,
            }
        } else {
            self.last_gate(qubits[0]).is_none_or(|i| self.placed[i].0 != kind)
        }
    }
}

/// Chi-square critical values at p = 0.001 for 1..=5 degrees of freedom.
pub const CHI2_P001: [f64; 5] = [10.828, 13.816, 16.266, 18.467, 20.515];

pub fn chi_square(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    counts.iter().zip(probs).map(|(&c, &p)| (c as f64 - p * n as f64).powi(2) / (p * n as f64)).sum()
}

pub fn obs() -> QasObservation {
    QasObservation { d_max: 1, n_qubits: 1, ones: vec![], cost_feature: 0.0 }
}

pub fn transition(reward: f64, action: usize, n_actions: usize) -> Transition {
    Transition { obs: obs(), action, reward, next_obs: obs(), done: false, next_mask: vec![true; n_actions] }
}

/// Buffer with the given priorities, set through the public update path.
pub fn prioritized(mode: ReplayMode, priorities: &[f64], rng: &mut ChaCha8Rng) -> ReplayBuffer {
    let mut b = ReplayBuffer::new(priorities.len(), mode, 1.0);
    for _ in priorities {
        b.push(transition(0.0, 0, 1));
    }
    loop {
        let s = b.sample(256, 0.4, rng);
        let mut seen = s.indices.clone();
        seen.sort();
        seen.dedup();
        let td: Vec<f64> = s.indices.iter().map(|&i| priorities[i] - PRIORITY_EPS).collect();
        b.update_priorities(&s.indices, &td).unwrap();
        if seen.len() == priorities.len() {
            return b;
        }
    }
}

pub fn empirical(b: &mut ReplayBuffer, draws: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut counts = vec![0; b.len()];
    for _ in 0..draws / 1000 {
        for i in b.sample(1000, 0.4, rng).indices {
            counts[i] += 1;
        }
    }
    counts
}
