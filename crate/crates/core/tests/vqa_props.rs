mod common;

use common::*;
use mpsvqa::linalg::random_unitary;
use mpsvqa::oracle::planted_phases;
use mpsvqa::vqa::{
    certificate, certificate_direct, loss_gradient_fd, minimize, probabilities, run_sweep, Method, Objective,
    OptimizerConfig, SweepConfig,
};
use mpsvqa::{AnsatzCircuit, BlackBoxUnitary, SatInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn planted(n: usize, k: usize, seed: u64) -> BlackBoxUnitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circuit = AnsatzCircuit::build_mps_ansatz(n, k).unwrap();
    let theta = circuit.random_parameters(&mut rng);
    BlackBoxUnitary::planted_unitary(&circuit, theta, planted_phases(n, 0.5, &mut rng).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn certificate_identity_and_dominance(seed in any::<u64>(), n in 2usize..7, kk in 0usize..4) {
        let k = kk.min(n / 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = AnsatzCircuit::build_mps_ansatz(n, k).unwrap();
        let theta = circuit.random_parameters::<f64, _>(&mut rng);
        let q = BlackBoxUnitary::<f64>::from_dense_matrix(random_unitary(1 << n, &mut rng)).unwrap();
        let a = certificate(&circuit, &theta, &q).unwrap();
        let b = certificate_direct(&circuit, &theta, &q).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        for p in probabilities(&circuit, &theta, &q).unwrap() {
            prop_assert!(a <= p + 1e-10);
        }
        let report = Objective::new(&circuit, &q).unwrap().report(&theta).unwrap();
        prop_assert!(report.certificate >= 1.0 - report.loss - 1e-12);
    }
}

#[test]
fn probabilities_match_dense_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let n = 4;
    let circuit = AnsatzCircuit::build_mps_ansatz(n, 1).unwrap();
    let q = planted(n, 1, 41);
    let qd = q.to_dense().unwrap();
    for _ in 0..10 {
        let theta = circuit.random_parameters::<f64, _>(&mut rng);
        let u = dense_circuit(&circuit, &theta);
        let psi = u.adjoint() * &qd * u.column(0);
        let p = probabilities(&circuit, &theta, &q).unwrap();
        for (i, pi) in p.iter().enumerate() {
            assert!((pi - prob_zero(psi.as_slice(), i, n)).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_loss_implies_certificate() {
    let q = planted(4, 1, 5);
    let p = q.planted().unwrap();
    let report = Objective::new(&p.circuit, &q).unwrap().report(&p.theta_star).unwrap();
    assert!(report.loss < 1e-10);
    assert!(report.certificate > 1.0 - 1e-8);
}

#[test]
fn fd_gradients_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let circuit = AnsatzCircuit::build_mps_ansatz(4, 1).unwrap();
    assert_eq!(circuit.total_params(), 45);
    let q = planted(4, 1, 10);
    for _ in 0..5 {
        let theta = circuit.random_parameters::<f64, _>(&mut rng);
        let g4 = loss_gradient_fd(&circuit, &theta, &q, 1e-4).unwrap();
        let g5 = loss_gradient_fd(&circuit, &theta, &q, 1e-5).unwrap();
        for (a, b) in g4.iter().zip(&g5) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }
    let id = BlackBoxUnitary::identity(4).unwrap();
    let theta = circuit.random_parameters::<f64, _>(&mut rng);
    let flat = loss_gradient_fd(&circuit, &theta, &id, 1e-5).unwrap();
    let worst = flat.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    // Only rounding in p_i ~ 1 - 1e-15 survives, amplified by 1 / (2 step).
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn two_qubit_planted_loss_vanishes() {
    let q = planted(2, 1, 3);
    let circuit = AnsatzCircuit::build_mps_ansatz(2, 1).unwrap();
    let objective = Objective::new(&circuit, &q).unwrap();
    let config = OptimizerConfig { max_iters: 2000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let best = (0..5)
        .map(|r| {
            let theta0 = circuit.random_parameters::<f64, _>(&mut rng);
            let cfg = OptimizerConfig { seed: r, ..config.clone() };
            minimize(&|t: &[f64]| objective.loss(t), &theta0, Method::NelderMead, &cfg, None).unwrap().loss
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-6, "{best}");
}

#[test]
fn sat_sweep_finds_basis_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sat = loop {
        let s = SatInstance::random(4, 6, 3, &mut rng);
        if (0..16).any(|x| s.unsatisfied(x) == 0) {
            break s;
        }
    };
    let q = BlackBoxUnitary::from_sat_instance(&sat, sat.default_time()).unwrap();
    let result = run_sweep(4, 1, &q, &SweepConfig::default()).unwrap();
    assert_eq!(result.per_k.len(), 1);
    let best = &result.per_k[0];
    assert!(best.certificate >= 1.0 - 1e-6);
    let circuit = AnsatzCircuit::build_mps_ansatz(4, 0).unwrap();
    let psi = circuit.prepare_state(&best.theta).unwrap();
    // Equal-cost assignments are degenerate, so the product eigenvector may
    // spread over several of them; every one must carry the eigenphase.
    let t = sat.default_time();
    let eig = (psi.inner_product(&q.apply(&psi).unwrap()).unwrap()).arg();
    let support: Vec<usize> = (0..16).filter(|&x| psi.amplitudes()[x].norm_sqr() > 1e-4).collect();
    assert!(!support.is_empty());
    for x in support {
        let cost = brute_force_unsat(&sat.clauses, 4, x);
        let d = (eig + t * cost as f64).rem_euclid(std::f64::consts::TAU);
        assert!(d.min(std::f64::consts::TAU - d) < 1e-2, "x={x} cost={cost}");
    }
}

fn brute_force_unsat(clauses: &[Vec<i64>], n: usize, x: usize) -> usize {
    clauses
        .iter()
        .filter(|clause| {
            !clause.iter().any(|&lit| {
                let bit = (x >> (n - lit.unsigned_abs() as usize)) & 1 == 1;
                if lit > 0 { bit } else { !bit }
            })
        })
        .count()
}

#[test]
fn planted_sweep_is_monotone_and_certified() {
    let q = planted(4, 1, 77);
    let config = SweepConfig {
        optimizer: OptimizerConfig {
            method: Some(Method::FdGradientDescent),
            restarts: 4,
            ..Default::default()
        },
        ..Default::default()
    };
    let result = run_sweep(4, 1, &q, &config).unwrap();
    assert_eq!(result.per_k.len(), 2);
    assert!(result.per_k[1].certificate >= result.per_k[0].certificate - 1e-12);
    assert!(result.per_k[1].certificate >= 0.99);
    let circuit = AnsatzCircuit::build_mps_ansatz(4, 1).unwrap();
    let psi = circuit.prepare_state(&result.per_k[1].theta).unwrap();
    assert!(overlap(psi.amplitudes(), q.planted().unwrap().state.amplitudes()) > 0.99);
}

#[test]
fn warm_start_never_loses_certificate() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = BlackBoxUnitary::<f64>::from_dense_matrix(random_unitary(32, &mut rng)).unwrap();
        let config = SweepConfig {
            optimizer: OptimizerConfig { max_iters: 150, restarts: 2, seed, ..Default::default() },
            ..Default::default()
        };
        let result = run_sweep(5, 2, &q, &config).unwrap();
        for w in result.per_k.windows(2) {
            assert!(w[1].certificate >= w[0].certificate - 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn sweep_is_deterministic() {
    let q = planted(4, 1, 8);
    for shots in [0, 4096] {
        let config = SweepConfig {
            optimizer: OptimizerConfig { max_iters: 200, restarts: 3, seed: 5, ..Default::default() },
            shots,
            ..Default::default()
        };
        let a = run_sweep(4, 1, &q, &config).unwrap();
        let b = run_sweep(4, 1, &q, &config).unwrap();
        assert_eq!(a.per_k.len(), b.per_k.len());
        for (x, y) in a.per_k.iter().zip(&b.per_k) {
            assert_eq!(x.theta.0, y.theta.0);
            assert_eq!(x.loss.to_bits(), y.loss.to_bits());
            assert_eq!(x.certificate.to_bits(), y.certificate.to_bits());
            assert_eq!(x.trace, y.trace);
            assert_eq!(x.evaluations, y.evaluations);
        }
    }
}
