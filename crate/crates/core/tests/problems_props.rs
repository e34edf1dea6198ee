use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rlqas::problems::{
    bundled, circle_label, generate_vqc_dataset, random_mixed_state, PauliHamiltonian, TaskOptions, TaskSpec, TASK_IDS,
};

fn spectrum(data: &[Complex64], dim: usize) -> Vec<f64> {
    SymmetricEigen::new(DMatrix::from_row_slice(dim, dim, data)).eigenvalues.iter().copied().collect()
}

#[test]
fn random_mixed_states_are_valid_over_many_seeds() {
    for seed in 0..100 {
        for rank in 1..=4 {
            let rho = random_mixed_state(2, rank, seed).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-12 && rho.trace().im.abs() < 1e-15);
            assert_eq!(rho.hermiticity_error(), 0.0);
            let ev = spectrum(rho.data(), 4);
            assert!(ev.iter().all(|&e| e > -1e-12), "seed {seed} rank {rank}: {ev:?}");
            let nonzero = ev.iter().filter(|&&e| e > 1e-10).count();
            assert_eq!(nonzero, rank, "seed {seed}: {ev:?}");
            assert!(rho.purity() <= 1.0 + 1e-12 && rho.purity() >= 0.25 - 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn dataset_labels_follow_the_circle(seed in any::<u64>(), n_train in 10usize..80, n_test in 10usize..40) {
        let d = generate_vqc_dataset(seed, n_train, n_test).unwrap();
        prop_assert_eq!(d.train.len(), n_train);
        prop_assert_eq!(d.test.len(), n_test);
        for s in d.train.iter().chain(&d.test) {
            let r2 = (s.x[0] - 0.5).powi(2) + (s.x[1] - 0.5).powi(2);
            prop_assert_eq!(s.label, u8::from(r2 > 0.15));
            prop_assert_eq!(s.label, circle_label(s.x));
        }
    }

    #[test]
    fn ground_energy_lower_bounds_random_states(seed in 0u64..1000) {
        let h = bundled::h2();
        let rho = random_mixed_state(4, 3, seed).unwrap();
        prop_assert!(h.expectation_mixed(&rho).unwrap() >= h.ground_energy() - 1e-10);
    }
}

#[test]
fn bundled_hamiltonians_have_exact_ground_energies() {
    // frozen-core CASCI energies from a separate quantum-chemistry package,
    // computed from the molecular integrals without the qubit mapping
    for (h, n, e) in [
        (bundled::h2(), 4, -1.137270174660903),
        (bundled::beh2(), 6, -15.563354572690201),
        (bundled::h2o(), 8, -74.97055106892128),
    ] {
        assert_eq!(h.n_qubits(), n);
        let m = h.pauli_sum().dense_matrix();
        let ev = spectrum(&m, 1 << n);
        let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((h.ground_energy() - min).abs() < 1e-9);
        assert!((h.ground_energy() - e).abs() < 1e-8, "{} vs {e}", h.ground_energy());
    }
}

#[test]
fn hamiltonian_files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, bundled::h2().to_json_string()).unwrap();
    let again = PauliHamiltonian::load(&path).unwrap();
    assert_eq!(again.to_file(), bundled::h2().to_file());
    let opts = TaskOptions { hamiltonian_path: Some(path), ..Default::default() };
    let t = TaskSpec::from_id("vqe-h2", &opts).unwrap();
    assert!((t.e_min() - bundled::h2().ground_energy()).abs() < 1e-15);
}

#[test]
fn every_task_summary_serializes() {
    for id in TASK_IDS {
        let t = TaskSpec::from_id(id, &TaskOptions::default()).unwrap();
        let s = serde_json::to_string(&t.summary()).unwrap();
        assert_eq!(serde_json::from_str::<rlqas::problems::TaskSummary>(&s).unwrap(), t.summary());
    }
}
