use super::*;
use crate::collocation::CollocationSystem;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn identity_system(f: Vec<f64>) -> CollocationSystem {
    let n = f.len();
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        x[i * n + i] = 1.0;
    }
    CollocationSystem::from_dense(n, n, x, f).unwrap()
}

fn random_system(rng: &mut ChaCha8Rng, m: usize, p: usize) -> CollocationSystem {
    let x: Vec<f64> = (0..m * p).map(|_| rng.sample(StandardNormal)).collect();
    let f: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    CollocationSystem::from_dense(m, p, x, f).unwrap()
}

fn cfg(delta: f64) -> SolverConfig {
    SolverConfig {
        delta,
        ..SolverConfig::default()
    }
}

#[test]
fn identity_recovers_samples() {
    let f = vec![3.0, -1.0, 0.25, 0.0, 7.5];
    let r = solve(&identity_system(f.clone()), &cfg(0.0)).unwrap();
    assert!(r.converged);
    for (a, b) in r.coefficients.iter().zip(&f) {
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn orthonormal_columns_soft_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let (m, p) = (5, 5);
        let g = nalgebra::DMatrix::from_fn(m, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let x: Vec<f64> = (0..m)
            .flat_map(|i| (0..p).map(move |j| (i, j)))
            .map(|(i, j)| q[(i, j)])
            .collect();
        let f: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let sys = CollocationSystem::from_dense(m, p, x, f.clone()).unwrap();
        let delta = [0.0, 0.05, 0.3, 1.0][trial % 4];
        let r = solve(&sys, &cfg(delta)).unwrap();
        let lp = lp_oracle(&sys, delta).unwrap();
        for j in 0..p {
            let xtf: f64 = (0..m).map(|i| q[(i, j)] * f[i]).sum();
            let want = soft(xtf, delta);
            assert!(
                (r.coefficients[j] - want).abs() < 1e-8,
                "trial {trial} j {j}"
            );
            assert!((lp[j] - want).abs() < 1e-8);
        }
    }
}

#[test]
fn zero_samples_give_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &delta in &[0.0, 1e-8, 0.5] {
        let mut sys = random_system(&mut rng, 6, 9);
        sys = sys.matrix.with_samples(vec![0.0; 6]).unwrap();
        let r = solve(&sys, &cfg(delta)).unwrap();
        assert!(r.coefficients.iter().all(|v| *v == 0.0));
        assert!(r.converged);
    }
}

#[test]
fn residual_examples() {
    let sys = identity_system(vec![3.0, -1.0]);
    assert_eq!(residual(&sys, &[1.0, 0.0]).unwrap(), 2.0);
    assert_eq!(residual(&sys, &[3.0, -1.0]).unwrap(), 0.0);
    let b = sys.matrix.normalized_xt(sys.f());
    assert_eq!(residual(&sys, &[0.0, 0.0]).unwrap(), inf_norm(&b));
    assert!(residual(&sys, &[0.0]).is_err());
}

#[test]
fn oracle_equivalence_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for inst in 0..40 {
        let m = rng.random_range(3..=10);
        let p = rng.random_range(3..=20);
        let delta = [0.01, 0.1, 1.0][inst % 3];
        let sys = random_system(&mut rng, m, p);
        let r = solve(&sys, &cfg(delta)).unwrap();
        let lp = lp_oracle(&sys, delta).unwrap();
        let lp1 = l1(&lp);
        assert!(
            (r.l1_norm - lp1).abs() <= 1e-4 * lp1.max(1.0),
            "inst {inst}: {} vs {lp1}",
            r.l1_norm
        );
        assert!(
            r.residual_inf <= delta + 1e-6,
            "inst {inst}: {r:?} m={m} p={p}"
        );
        let lr = residual(&sys, &lp).unwrap();
        assert!(
            lr <= delta + 1e-8,
            "inst {inst}: lp residual {lr} m={m} p={p} lp1={lp1} ours={}",
            r.l1_norm
        );
    }
}

#[test]
fn converged_implies_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let sys = random_system(&mut rng, 8, 12);
        let c = SolverConfig {
            delta: 0.05,
            polish: false,
            max_iters: 20_000,
            ..SolverConfig::default()
        };
        let r = solve(&sys, &c).unwrap();
        if r.converged {
            assert!(r.residual_inf <= c.delta + c.tol * 10.0);
        }
    }
}

#[test]
fn bad_steps_rejected() {
    let sys = identity_system(vec![1.0, 2.0]);
    let c = SolverConfig {
        step_params: Some((2.0, 2.0)),
        ..cfg(0.0)
    };
    assert!(matches!(solve(&sys, &c), Err(Error::InvalidParameter(_))));
    let c = SolverConfig {
        tol: 0.0,
        ..cfg(0.0)
    };
    assert!(solve(&sys, &c).is_err());
    let c = SolverConfig {
        delta: -1.0,
        ..cfg(0.0)
    };
    assert!(solve(&sys, &c).is_err());
}

#[test]
fn iteration_cost_is_at_most_4mp() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(m, p) in &[(10, 30), (30, 10), (12, 12), (4, 40)] {
        let sys = random_system(&mut rng, m, p);
        for mode in [OperatorMode::Gram, OperatorMode::MatrixFree] {
            let solver = DantzigSolver::with_mode(Arc::clone(&sys.matrix), mode).unwrap();
            let c = SolverConfig {
                delta: 0.1,
                polish: false,
                max_iters: 200,
                ..SolverConfig::default()
            };
            let r = solver.solve_samples(sys.f(), &c).unwrap();
            let bound = (4 * m * p + 10 * (m + p)) as f64;
            let per = r.mults_per_iteration();
            match mode {
                OperatorMode::MatrixFree => assert!(per <= bound, "{m}x{p}: {per} > {bound}"),
                OperatorMode::Gram => assert!(per <= (2 * p * p + 10 * p) as f64),
            }
        }
        let auto = DantzigSolver::new(Arc::clone(&sys.matrix)).unwrap();
        let c = SolverConfig {
            delta: 0.1,
            polish: false,
            max_iters: 200,
            ..SolverConfig::default()
        };
        let r = auto.solve_samples(sys.f(), &c).unwrap();
        assert!(r.mults_per_iteration() <= (4 * m * p + 10 * (m + p)) as f64);
    }
}

#[test]
fn modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sys = random_system(&mut rng, 7, 15);
    let a = DantzigSolver::with_mode(Arc::clone(&sys.matrix), OperatorMode::Gram).unwrap();
    let b = DantzigSolver::with_mode(Arc::clone(&sys.matrix), OperatorMode::MatrixFree).unwrap();
    let c = cfg(0.1);
    let ra = a.solve_samples(sys.f(), &c).unwrap();
    let rb = b.solve_samples(sys.f(), &c).unwrap();
    assert!((ra.l1_norm - rb.l1_norm).abs() < 1e-6 * ra.l1_norm.max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn positive_homogeneity(seed in 0u64..10_000, alpha in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, 6, 6);
        let scaled = sys.matrix.with_samples(sys.f().iter().map(|v| alpha * v).collect()).unwrap();
        let r1 = solve(&sys, &cfg(0.0)).unwrap();
        let r2 = solve(&scaled, &cfg(0.0)).unwrap();
        for (a, b) in r1.coefficients.iter().zip(&r2.coefficients) {
            prop_assert!((alpha * a - b).abs() <= 1e-6 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn solution_is_feasible(seed in 0u64..10_000, delta in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, 5, 8);
        let r = solve(&sys, &cfg(delta)).unwrap();
        prop_assert!(r.residual_inf <= delta + 1e-6);
    }
}
