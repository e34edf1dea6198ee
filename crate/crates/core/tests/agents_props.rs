use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlqas::agents::*;
use rlqas::problems::{TaskOptions, TaskSpec};

mod common;
use common::{chi_square, empirical, obs, prioritized, CHI2_P001};

fn small_net(sizes: &[usize], seed: u64) -> Mlp<f64> {
    let net = Mlp::new(sizes, &mut ChaCha8Rng::seed_from_u64(seed));
    assert!(net.param_count() <= 100, "{}", net.param_count());
    net
}

fn batch_input(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

fn assert_grad(check: GradCheck, what: &str) {
    assert!(check.max_rel_error <= 1e-4, "{what}: {check:?}");
    assert!(check.max_magnitude > 1e-6, "{what}: gradient vanished {check:?}");
}

#[test]
fn gradient_checks_for_every_head() {
    let x = batch_input(3, 4, 1);
    let a = 3;
    let actions = [0usize, 2, 1];
    let targets = [0.3, -0.7, 1.1];
    let weights = [1.0, 0.5, 0.8];

    let q_net = small_net(&[4, 5, a], 2);
    let r = backward_check(&q_net, Input::Dense(x.view()), |out| {
        let (l, g, _) = q_regression_loss(out, a, false, &actions, &targets, &weights);
        (l, g)
    });
    assert_grad(r, "q regression");

    let duel = small_net(&[4, 5, a + 1], 3);
    let r = backward_check(&duel, Input::Dense(x.view()), |out| {
        let (l, g, _) = q_regression_loss(out, a, true, &actions, &targets, &weights);
        (l, g)
    });
    assert_grad(r, "dueling");

    let ac = small_net(&[4, 5, a + 1], 4);
    let masks = vec![vec![true, true, true], vec![true, false, true], vec![false, true, true]];
    let advantages = [0.9, -1.3, 0.4];
    let returns = [1.0, -0.5, 0.2];
    // old log-probs chosen so every ratio sits away from the clip edges
    let logp_now: Vec<f64> = {
        let out = ac.forward(Input::Dense(x.view()));
        (0..3).map(|i| masked_log_softmax(&out.row(i).to_vec()[..a], &masks[i])[actions[i]]).collect()
    };
    let old: Vec<f64> = logp_now.iter().zip([0.5, -0.6, 0.05]).map(|(l, d)| l - d).collect();
    let batch = PolicyBatch {
        masks: &masks,
        actions: &actions,
        advantages: &advantages,
        returns: &returns,
        old_logp: Some(&old),
    };
    for (name, s, vc, ec) in [
        ("policy + value + entropy", Surrogate::Vanilla, 0.5, 0.01),
        ("value only", Surrogate::Vanilla, 1.0, 0.0),
        ("entropy heavy", Surrogate::Vanilla, 0.0, 1.0),
        ("clipped", Surrogate::Clip { eps: 0.2 }, 0.5, 0.01),
        ("rollback", Surrogate::Rollback { eps: 0.2, alpha: 0.3 }, 0.5, 0.01),
    ] {
        let b = if name == "value only" { PolicyBatch { advantages: &[0.0; 3], ..batch } } else { batch };
        let r = backward_check(&ac, Input::Dense(x.view()), |out| {
            let (parts, g) = actor_critic_loss(out, &b, s, vc, ec);
            (parts.total, g)
        });
        assert_grad(r, name);
    }

    // sparse first layer
    let rows = vec![
        SparseRow { idx: vec![0, 3], val: vec![1.0, 0.25] },
        SparseRow { idx: vec![1, 2, 3], val: vec![1.0, 1.0, -0.5] },
    ];
    let r = backward_check(&q_net, Input::Sparse(&rows), |out| {
        let (l, g, _) = q_regression_loss(out, a, false, &[1, 0], &[0.2, 0.1], &[1.0, 1.0]);
        (l, g)
    });
    assert_grad(r, "sparse input");
}

#[test]
fn gradient_check_examples() {
    let x = batch_input(2, 3, 9);
    // linear network, quadratic loss
    let lin = small_net(&[3, 2], 5);
    let r = backward_check(&lin, Input::Dense(x.view()), |out| (out.iter().map(|v| v * v).sum(), out * 2.0));
    assert!(r.max_rel_error <= 1e-8, "{r:?}");
    // zero gradient point
    let r = backward_check(&lin, Input::Dense(x.view()), |out| (0.0, Array2::zeros(out.dim())));
    assert!(r.max_abs_error <= 1e-8 && r.max_magnitude <= 1e-8, "{r:?}");
}

#[test]
fn single_hidden_unit_hand_calculation() {
    let mut net: Mlp<f64> = Mlp::zeros(&[2, 1, 1]);
    // h = relu(2 x0 - x1 + 0.5), y = 3 h - 1
    net.layers_mut()[0].w[[0, 0]] = 2.0;
    net.layers_mut()[0].w[[1, 0]] = -1.0;
    net.layers_mut()[0].b[0] = 0.5;
    net.layers_mut()[1].w[[0, 0]] = 3.0;
    net.layers_mut()[1].b[0] = -1.0;
    let x = ndarray::array![[1.0, 0.5], [-1.0, 1.0]];
    let y = net.forward(Input::Dense(x.view()));
    assert_eq!(y[[0, 0]], 3.0 * 2.0 - 1.0);
    assert_eq!(y[[1, 0]], -1.0);
    assert!(Mlp::<f64>::zeros(&[4, 3, 2]).forward(Input::Dense(batch_input(2, 4, 0).view())).iter().all(|&v| v == 0.0));
}

#[test]
fn prioritized_sampling_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut b = prioritized(ReplayMode::Proportional, &[1.0, 3.0], &mut rng);
    let c = empirical(&mut b, 100_000, &mut rng);
    assert!(chi_square(&c, &[0.25, 0.75]) < CHI2_P001[0], "{c:?}");

    let mut b = prioritized(ReplayMode::Rank, &[1.0, 3.0], &mut rng);
    let c = empirical(&mut b, 100_000, &mut rng);
    // entry 1 has rank 1
    assert!(chi_square(&c, &[1.0 / 3.0, 2.0 / 3.0]) < CHI2_P001[0], "{c:?}");

    // five entries, alpha 1
    let pr = [0.5, 2.0, 1.0, 4.0, 0.25];
    let mut b = prioritized(ReplayMode::Proportional, &pr, &mut rng);
    let total: f64 = pr.iter().sum();
    let c = empirical(&mut b, 100_000, &mut rng);
    assert!(chi_square(&c, &pr.map(|p| p / total)) < CHI2_P001[4], "{c:?}");
    let mut b = prioritized(ReplayMode::Rank, &pr, &mut rng);
    let ranks = [4.0, 2.0, 3.0, 1.0, 5.0];
    let z: f64 = ranks.iter().map(|r| 1.0 / r).sum();
    let c = empirical(&mut b, 100_000, &mut rng);
    assert!(chi_square(&c, &ranks.map(|r| 1.0 / r / z)) < CHI2_P001[4], "{c:?}");
}

#[test]
fn importance_weights_follow_the_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pr = [1.0, 3.0, 0.5];
    let mut b = prioritized(ReplayMode::Proportional, &pr, &mut rng);
    let s = b.sample(64, 0.7, &mut rng);
    let total: f64 = pr.iter().sum();
    let w = |p: f64| (3.0 * p / total).powf(-0.7);
    let w_max = w(0.5);
    for (i, got) in s.indices.iter().zip(&s.weights) {
        assert!((got - w(pr[*i]) / w_max).abs() < 1e-9);
        assert!(*got <= 1.0 + 1e-12);
    }
}

#[test]
fn epsilon_one_is_uniform_over_legal_actions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = [5.0f32, 1.0, -2.0, 9.0, 0.0, 3.0];
    let mask = [true, false, true, true, false, true];
    let draws = 100_000;
    let mut counts = [0usize; 6];
    for _ in 0..draws {
        counts[epsilon_greedy(&q, &mask, 1.0, &mut rng)] += 1;
    }
    let p = 0.25;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        if mask[i] {
            assert!((c as f64 - p * draws as f64).abs() <= 3.0 * sigma, "{counts:?}");
        } else {
            assert_eq!(c, 0);
        }
    }
}

#[test]
fn selection_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(epsilon_greedy(&[1.0f64, 9.0, 3.0], &[true, false, true], 0.0, &mut rng), 2);
    assert_eq!(greedy_action(&[2.0f64, 7.0, 7.0, 1.0], &[true; 4]), 1);
    for _ in 0..100 {
        let (a, lp) = sample_softmax(&[3.0f64, -1.0, 8.0], &[false, true, false], &mut rng);
        assert_eq!((a, lp), (1, 0.0));
    }
}

#[test]
fn masked_actions_are_never_emitted() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10_000 {
        let n = rng.random_range(1..12);
        let q: Vec<f32> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let forced = rng.random_range(0..n);
        mask[forced] = true;
        assert!(mask[greedy_action(&q, &mask)]);
        assert!(mask[epsilon_greedy(&q, &mask, 0.3, &mut rng)]);
        assert!(mask[sample_softmax(&q, &mask, &mut rng).0]);
    }
}

proptest! {
    #[test]
    fn dueling_argmax_ignores_advantage_shift(
        v in -64i32..64,
        adv in prop::collection::vec(-64i32..64, 1..10),
        shift in -64i32..64,
    ) {
        // eighths keep the advantages at least 1/8 apart, far above rounding
        let e = |x: i32| f64::from(x) / 8.0;
        let a: Vec<f64> = adv.iter().map(|&x| e(x)).collect();
        let shifted: Vec<f64> = a.iter().map(|&x| x + e(shift)).collect();
        let q = dueling_aggregate(e(v), &a);
        let q2 = dueling_aggregate(e(v), &shifted);
        let mask = vec![true; a.len()];
        for (x, y) in q.iter().zip(&q2) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert_eq!(greedy_action(&q, &mask), greedy_action(&q2, &mask));
        prop_assert_eq!(greedy_action(&q, &mask), greedy_action(&a, &mask));
    }

    #[test]
    fn tppo_is_continuous_at_the_band_edges(adv in -3.0f64..3.0, eps in 0.05f64..0.4, alpha in 0.0f64..1.0) {
        for edge in [1.0 - eps, 1.0 + eps] {
            let d = 1e-9;
            let left = tppo_surrogate(edge - d, adv, eps, alpha);
            let right = tppo_surrogate(edge + d, adv, eps, alpha);
            prop_assert!((left - right).abs() <= 10.0 * d * (1.0 + adv.abs()));
            prop_assert!((rollback(edge, eps, alpha) - edge).abs() < 1e-15);
        }
    }

    #[test]
    fn ppo_surrogates_reduce_to_vanilla_at_unit_ratio(seed in 0u64..50) {
        let net = small_net(&[4, 5, 4], seed);
        let x = batch_input(3, 4, seed + 1);
        let out = net.forward(Input::Dense(x.view()));
        let masks = vec![vec![true, true, true], vec![true, false, true], vec![true, true, false]];
        let actions = [1usize, 2, 0];
        let old: Vec<f64> = (0..3).map(|i| masked_log_softmax(&out.row(i).to_vec()[..3], &masks[i])[actions[i]]).collect();
        let adv = [0.7, -1.2, 0.3];
        let batch = PolicyBatch { masks: &masks, actions: &actions, advantages: &adv, returns: &[0.0; 3], old_logp: Some(&old) };
        let (_, g_vanilla) = actor_critic_loss(&out, &batch, Surrogate::Vanilla, 0.0, 0.0);
        for s in [Surrogate::Clip { eps: 0.2 }, Surrogate::Rollback { eps: 0.2, alpha: 0.3 }] {
            let (_, g) = actor_critic_loss(&out, &batch, s, 0.0, 0.0);
            let diff = (&g - &g_vanilla).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(diff <= 1e-10, "{:?}: {}", s, diff);
        }
    }
}

#[test]
fn surrogate_point_values() {
    assert!((ppo_surrogate(1.0f64, 0.8, 0.2) - 0.8).abs() <= 1e-10);
    assert!((ppo_surrogate(2.0f64, 1.0, 0.2) - 1.2).abs() <= 1e-10);
    assert!((ppo_surrogate(0.5f64, -1.0, 0.2) + 0.8).abs() <= 1e-10);
    assert!((tppo_surrogate(1.5f64, 1.0, 0.2, 0.3) - 1.11).abs() <= 1e-10);
    assert_eq!(tppo_surrogate(1.1f64, 0.6, 0.2, 0.3), ppo_surrogate(1.1, 0.6, 0.2));
    // zero advantage contributes no policy gradient
    let out = ndarray::array![[0.3f64, -0.2, 0.0]];
    let masks = vec![vec![true, true]];
    let b = PolicyBatch { masks: &masks, actions: &[0], advantages: &[0.0], returns: &[0.0], old_logp: None };
    let (_, g) = actor_critic_loss(&out, &b, Surrogate::Vanilla, 0.0, 0.0);
    assert!(g.iter().all(|&v| v == 0.0));
}

#[test]
fn dqn_targets_by_hand() {
    let online = ndarray::array![[1.0f64, 5.0, 2.0], [0.0, 0.0, 0.0]];
    let target = ndarray::array![[4.0f64, 0.5, 3.0], [9.0, 9.0, 9.0]];
    let masks = [vec![true, true, false], vec![true; 3]];
    let y = dqn_target(&[1.0, 2.0], &[false, true], &online, &target, &masks, 0.5, TargetRule::Max);
    assert_eq!(y, vec![3.0, 2.0]);
    let y = dqn_target(&[1.0, 2.0], &[false, true], &online, &target, &masks, 0.5, TargetRule::Double);
    assert_eq!(y, vec![1.25, 2.0]);
}

#[test]
fn epsilon_schedule_values() {
    let e = EpsilonSchedule::default();
    for k in [0u64, 1, 10, 1000, 59_000, 60_000, 1_000_000] {
        assert!((e.at(k) - 0.99995f64.powf(k as f64).max(0.05)).abs() < 1e-12);
    }
}

#[test]
fn target_network_syncs_on_schedule() {
    let cfg = AgentConfig { batch_size: 4, target_sync: 3, hidden_width: 8, ..AgentConfig::desk() };
    let mut agent = DqnAgent::new(Algorithm::Dqn, cfg, &[5, 8, 3], 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut frozen = agent.target().clone();
    let params = |n: &Net| (0..n.param_count()).map(|i| n.param(i)).collect::<Vec<f32>>();
    for step in 0..40 {
        let mut o = obs();
        o.cost_feature = rng.random_range(0.0..1.0);
        let t = Transition {
            obs: o.clone(),
            action: step % 3,
            reward: rng.random_range(-1.0..1.0),
            next_obs: o,
            done: step % 5 == 4,
            next_mask: vec![true; 3],
        };
        agent.observe(t).unwrap();
        if agent.learn_steps() > 0 && agent.learn_steps().is_multiple_of(3) {
            assert_eq!(params(agent.target()), params(agent.online()), "step {step}");
            frozen = agent.target().clone();
        } else {
            assert_eq!(params(agent.target()), params(&frozen), "step {step}");
        }
    }
    assert!(agent.learn_steps() >= 30);
}

fn trace(algo: Algorithm, seed: u64) -> Vec<(usize, f64, bool, f64, usize)> {
    let task = TaskSpec::from_id("ghz-3", &TaskOptions::default()).unwrap();
    let cfg = AgentConfig {
        batch_size: 16,
        hidden_width: 16,
        ppo: PpoConfig { rollout: 32, minibatch: 16, ..Default::default() },
        ..AgentConfig::desk()
    };
    let opts = TrainOptions { episodes: 4, ..Default::default() };
    train(&task, algo, &cfg, &opts, seed, &mut |_| {})
        .unwrap()
        .into_iter()
        .map(|e| (e.steps, e.total_reward, e.success, e.error, e.gates))
        .collect()
}

#[test]
fn single_threaded_agents_are_deterministic() {
    for algo in Algorithm::ALL.into_iter().filter(|a| a.is_deterministic()) {
        assert_eq!(trace(algo, 5), trace(algo, 5), "{algo}");
    }
}

#[test]
fn a3c_runs_with_worker_threads() {
    let task = TaskSpec::from_id("ghz-3", &TaskOptions::default()).unwrap();
    let cfg = AgentConfig { hidden_width: 16, ..AgentConfig::desk() };
    let opts = TrainOptions { episodes: 9, ..Default::default() };
    let eps = train(&task, Algorithm::A3c, &cfg, &opts, 0, &mut |_| {}).unwrap();
    assert_eq!(eps.len(), 9);
    assert!(eps.iter().all(|e| e.steps <= task.d_max && e.error.is_finite()));
}
