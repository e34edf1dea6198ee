//! Fast self-checks run by `rlqas validate`: simulator oracles, masking,
//! rewards, ranking arithmetic and the learning machinery.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ranking::{composite_score, AgentMetrics, RankingWeights};
use crate::agents::{backward_check, ppo_surrogate, tppo_surrogate, Input, Mlp, ReplayBuffer, ReplayMode, Transition};
use crate::env::{cost_reward, fidelity_reward, is_legal, ActionSpace, CircuitProgram, QasObservation};
use crate::problems::{ghz_target, TaskKind};
use crate::qsim::{DensityMatrix, Gate, GateKind, NoiseConfig, StateVector};

/// Chi-square critical value for one degree of freedom at p = 0.001.
const CHI2_1DF_P001: f64 = 10.828;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> (bool, String);

const CHECKS: [(&str, Check); 9] = [
    ("reward table", reward_table),
    ("statevector and density agree", simulator_agreement),
    ("depolarizing matches Kraus sum", kraus_oracle),
    ("action mask matches predicates", mask_enumeration),
    ("GHZ sequence reaches fidelity 1", ghz_sequence),
    ("ranking fixture", ranking_fixture),
    ("PPO and TPPO surrogate values", surrogate_values),
    ("network gradients", gradients),
    ("prioritized sampling laws", per_sampling),
];

/// Runs every check.
pub fn run_checks() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, f)| {
            let start = Instant::now();
            let (passed, detail) = f();
            CheckResult { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

fn verdict(worst: f64, tol: f64, what: &str) -> (bool, String) {
    (worst <= tol, format!("max {what} {worst:.3e} (tolerance {tol:.0e})"))
}

/// `(c_prev, c_t, e_min, zeta, t, d_max)` and the expected `(reward, done)`.
type RewardCase = ((f64, f64, f64, f64, usize, usize), (f64, bool));

fn reward_table() -> (bool, String) {
    let cases: [RewardCase; 5] = [
        ((-1.0, -1.9995, -2.0, 1e-3, 3, 40), (5.0, true)),
        ((-1.0, -1.5, -2.0, 1e-3, 40, 40), (-5.0, true)),
        ((-1.0, -1.5, -2.0, 1e-3, 3, 40), (0.5, false)),
        ((-1.5, 0.0, -2.0, 1e-3, 3, 40), (-1.0, false)),
        ((-1.5, -1.0, -2.0, 1e-3, 3, 40), (-1.0, false)),
    ];
    let mut worst: f64 = 0.0;
    let mut flags = true;
    for ((cp, ct, e, z, t, d), (r, done)) in cases {
        let got = cost_reward(cp, ct, e, z, t, d);
        worst = worst.max((got.0 - r).abs());
        flags &= got.1 == done;
    }
    for (f, want) in [(0.98, (5.0, true)), (0.979_999, (0.979_999, false))] {
        let got = fidelity_reward(f, 0.98);
        worst = worst.max((got.0 - want.0).abs());
        flags &= got.1 == want.1;
    }
    let (ok, detail) = verdict(worst, 1e-12, "reward error");
    (ok && flags, detail)
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate<f64> {
    let q = rng.random_range(0..n);
    let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    match rng.random_range(0..9) {
        0 => Gate::rx(q, theta),
        1 => Gate::ry(q, theta),
        2 => Gate::rz(q, theta),
        3 if n > 1 => {
            let t = (q + rng.random_range(1..n)) % n;
            Gate::cx(q, t)
        }
        k => Gate::fixed([GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::T][k % 5], q),
    }
}

fn random_circuit(rng: &mut ChaCha8Rng) -> (usize, Vec<Gate<f64>>) {
    let n = rng.random_range(1..=3);
    let len = rng.random_range(0..=8);
    (n, (0..len).map(|_| random_gate(rng, n)).collect())
}

fn simulator_agreement() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut drift, mut diff): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (n, gates) = random_circuit(&mut rng);
        let mut psi = StateVector::zero_state(n).expect("register");
        let mut rho = DensityMatrix::zero_state(n).expect("register");
        for g in &gates {
            psi.apply(g).expect("gate fits");
            rho.apply(g).expect("gate fits");
        }
        drift = drift.max((psi.norm() - 1.0).abs());
        diff = diff.max(rho.max_abs_diff(&DensityMatrix::from_pure(&psi)));
    }
    let ok = drift <= 1e-10 && diff <= 1e-10;
    (ok, format!("norm drift {drift:.3e}, density vs outer product {diff:.3e} (tolerance 1e-10)"))
}

/// `(1-p) rho + p/(4^k-1) sum P rho P` with every Pauli applied as gates.
fn kraus_depolarize(rho: &DensityMatrix<f64>, qubits: &[usize], p: f64) -> DensityMatrix<f64> {
    let k = qubits.len();
    let n_terms = 1usize << (2 * k);
    let w = p / (n_terms as f64 - 1.0);
    let mut acc: Vec<Complex64> = rho.data().iter().map(|z| z * (1.0 - p)).collect();
    for code in 1..n_terms {
        let mut term = rho.clone();
        for (i, &q) in qubits.iter().enumerate() {
            let kind = match (code >> (2 * i)) & 3 {
                0 => continue,
                1 => GateKind::X,
                2 => GateKind::Y,
                _ => GateKind::Z,
            };
            term.apply(&Gate::fixed(kind, q)).expect("pauli fits");
        }
        for (a, z) in acc.iter_mut().zip(term.data()) {
            *a += z * w;
        }
    }
    DensityMatrix::from_matrix(rho.n_qubits(), acc).expect("valid matrix")
}

fn kraus_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let noise = NoiseConfig { p1: 0.03, p2: 0.07, enabled: true };
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (n, gates) = random_circuit(&mut rng);
        let mut fast = DensityMatrix::zero_state(n).expect("register");
        let mut oracle = fast.clone();
        for g in &gates {
            fast.apply_noisy(g, &noise).expect("gate fits");
            oracle.apply(g).expect("gate fits");
            let p = if g.qubits().len() == 2 { noise.p2 } else { noise.p1 };
            oracle = kraus_depolarize(&oracle, g.qubits(), p);
        }
        worst = worst.max(fast.max_abs_diff(&oracle));
    }
    verdict(worst, 1e-12, "entry difference")
}

/// Last gate index touching `q`, by scanning the gate list.
fn last_on(gates: &[Gate<f64>], q: usize) -> Option<usize> {
    gates.iter().rposition(|g| g.qubits().contains(&q))
}

fn mask_enumeration() -> (bool, String) {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for kind in [TaskKind::Vqe, TaskKind::StatePrep] {
        let space = ActionSpace::new(kind, 2);
        let actions: Vec<_> = space.all().collect();
        // every sequence of at most three actions
        let mut layer: Vec<Vec<usize>> = vec![vec![]];
        let mut sequences = layer.clone();
        for _ in 0..3 {
            layer = layer.iter().flat_map(|p| (0..actions.len()).map(move |a| [p.as_slice(), &[a]].concat())).collect();
            sequences.extend(layer.iter().cloned());
        }
        for seq in &sequences {
            let gates: Vec<Gate<f64>> = seq.iter().map(|&a| actions[a].gate()).collect();
            let circuit = CircuitProgram::from_gates(2, gates.iter().cloned()).expect("valid gates");
            for a in &actions {
                let expected = match a.kind {
                    GateKind::Cx => {
                        let (c, t) = (a.qubits[0], a.qubits[1]);
                        !matches!((last_on(&gates, c), last_on(&gates, t)),
                            (Some(i), Some(j)) if i == j && gates[i].qubits() == [c, t])
                    }
                    k => last_on(&gates, a.qubits[0]).is_none_or(|i| gates[i].kind() != k),
                };
                checked += 1;
                mismatches += usize::from(expected != is_legal(&circuit, a));
            }
        }
    }
    (mismatches == 0, format!("{mismatches} discrepancies over {checked} (circuit, action) pairs"))
}

fn ghz_sequence() -> (bool, String) {
    let target = ghz_target(3).expect("ghz");
    let mut psi = StateVector::zero_state(3).expect("register");
    for g in [Gate::fixed(GateKind::H, 0), Gate::cx(0, 1), Gate::cx(1, 2)] {
        psi.apply(&g).expect("gate fits");
    }
    let f = psi.fidelity(&target).expect("same size");
    verdict((1.0 - f).abs(), 1e-12, "fidelity deficit")
}

fn ranking_fixture() -> (bool, String) {
    let m = |agent: &str, e, g, d, t| AgentMetrics { agent: agent.into(), e, g, d, t };
    let fixture = [m("a", 1e-6, 10.0, 5.0, 1.0), m("b", 1e-4, 20.0, 10.0, 2.0), m("c", 1e-2, 30.0, 15.0, 3.0)];
    let ranked = composite_score(&fixture, &RankingWeights::noiseless()).expect("finite fixture");
    let mid = 0.5 * (1e-4 - 1e-6) / (1e-2 - 1e-6) + 0.2 * 0.5 + 0.2 * 0.5 + 0.1 * 0.5;
    let want = [0.0, mid, 1.0];
    let worst = ranked.iter().zip(want).map(|(r, w)| (r.s - w).abs()).fold(0.0, f64::max);
    verdict(worst, 1e-12, "score error")
}

fn surrogate_values() -> (bool, String) {
    let worst = [
        (ppo_surrogate(2.0, 1.0, 0.2), 1.2),
        (ppo_surrogate(0.5, -1.0, 0.2), -0.8),
        (ppo_surrogate(1.0, 0.7, 0.2), 0.7),
        (tppo_surrogate(1.5, 1.0, 0.2, 0.3), 1.11),
        (tppo_surrogate(1.1, 1.0, 0.2, 0.3), 1.1),
    ]
    .iter()
    .map(|(got, want): &(f64, f64)| (got - want).abs())
    .fold(0.0, f64::max);
    verdict(worst, 1e-10, "surrogate error")
}

fn gradients() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net: Mlp<f64> = Mlp::new(&[4, 6, 5, 3], &mut rng);
    let x = Array2::from_shape_fn((3, 4), |_| rng.random_range(-1.0..1.0));
    let r = backward_check(&net, Input::Dense(x.view()), |out| (out.iter().map(|v| 0.5 * v * v).sum(), out.clone()));
    verdict(r.max_rel_error, 1e-4, "relative gradient error")
}

fn per_sampling() -> (bool, String) {
    let obs = QasObservation { d_max: 1, n_qubits: 1, ones: vec![], cost_feature: 0.0 };
    let t = Transition { obs: obs.clone(), action: 0, reward: 0.0, next_obs: obs, done: false, next_mask: vec![true] };
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut worst: f64 = 0.0;
    for (mode, want) in [(ReplayMode::Proportional, [0.25, 0.75]), (ReplayMode::Rank, [1.0 / 3.0, 2.0 / 3.0])] {
        let mut b = ReplayBuffer::new(2, mode, 1.0);
        b.push(t.clone());
        b.push(t.clone());
        let s = b.sample(64, 0.4, &mut rng);
        let td: Vec<f64> = s.indices.iter().map(|&i| if i == 0 { 1.0 } else { 3.0 }).collect();
        b.update_priorities(&s.indices, &td).expect("fresh indices");
        let draws = 100_000;
        let mut counts = [0usize; 2];
        for _ in 0..draws / 1000 {
            for i in b.sample(1000, 0.4, &mut rng).indices {
                counts[i] += 1;
            }
        }
        let chi2: f64 = (0..2)
            .map(|i| {
                let e = want[i] * draws as f64;
                (counts[i] as f64 - e).powi(2) / e
            })
            .sum();
        worst = worst.max(chi2);
    }
    (worst <= CHI2_1DF_P001, format!("largest chi-square {worst:.3} (critical {CHI2_1DF_P001} at p = 0.001)"))
}
