use std::ops::ControlFlow;

use ipzo_core::prelude::*;
use ipzo_core::problems::{gen_lasso, initial_point, lasso_blackbox};
use ipzo_core::solvers::{ipzopm_with, EpsilonRule, SigmaRule, SolverConfig, Termination};
use ipzo_core::solvers::gradient_mapping;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn theoretical(inst: &ipzo_core::problems::LassoInstance) -> SolverConfig {
    SolverConfig {
        sigma: SigmaRule::theoretical(inst.grad_lipschitz(), inst.hess_diag_bound()),
        max_iter: 200,
        ..SolverConfig::default()
    }
}

#[test]
fn descent_with_slack_on_quadratic_lasso() {
    for seed in 0..3 {
        let inst = gen_lasso(20, 10, 0.1, seed).unwrap();
        let model = lasso_blackbox(&inst);
        let config = theoretical(&inst);
        let report = ipzopm(&model, &config, &initial_point(20, seed));
        assert!(!report.termination.is_error());
        let h = report.h_trace();
        for k in 0..h.len() - 1 {
            assert!(h[k + 1] <= h[k] + config.epsilon_at(k) + 1e-8, "seed {seed} k {k}");
        }
    }
}

#[test]
fn near_stationarity_transfers_to_prox_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let inst = gen_lasso(8, 5, 0.3, 4).unwrap();
    let reg = Regularizer::l1(inst.mu);
    let mut hits = 0;
    for _ in 0..2000 {
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let gamma = 10f64.powf(rng.random_range(-3.0..0.0));
        let eps = 10f64.powf(rng.random_range(-2.0..2.0));
        let grad = inst.gradient(&x);
        let p = gradient_mapping(&reg, &x, gamma, &grad).unwrap();
        if p.iter().map(|v| v * v).sum::<f64>().sqrt() > eps {
            continue;
        }
        hits += 1;
        let fwd: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - gamma * g).collect();
        let xhat = reg.prox(&fwd, gamma).unwrap();
        let dist = x.iter().zip(&xhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(dist <= gamma * eps * (1.0 + 1e-12));
    }
    assert!(hits > 100);
}

#[test]
fn reruns_are_identical() {
    let inst = gen_lasso(30, 10, 0.05, 9).unwrap();
    let model = lasso_blackbox(&inst);
    let cfg = SolverConfig { max_iter: 50, ..SolverConfig::default() };
    let x0 = initial_point(30, 9);
    for kind in [SolverKind::Ipzopm, SolverKind::Zopg] {
        let a = solve(kind, &model.with_fresh_counter(), &cfg, &x0);
        let b = solve(kind, &model.with_fresh_counter().with_parallel(false), &cfg, &x0);
        assert_eq!(a.point, b.point);
        assert_eq!(a.h_trace(), b.h_trace());
        assert_eq!(a.total_evals, b.total_evals);
    }
}

#[test]
fn evaluation_budget_matches_records() {
    for n in [1, 4, 17] {
        let inst = gen_lasso(n, 6, 0.1, n as u64).unwrap();
        for kind in [SolverKind::Ipzopm, SolverKind::Zopg] {
            let model = lasso_blackbox(&inst);
            let cfg = SolverConfig { max_iter: 25, ..SolverConfig::default() };
            let r = solve(kind, &model, &cfg, &initial_point(n, 1));
            assert_eq!(r.total_evals, r.records.len() as u64 * (2 * n as u64 + 1));
            assert_eq!(model.evals(), r.total_evals);
            for (i, rec) in r.records.iter().enumerate() {
                assert_eq!(rec.evals, (i as u64 + 1) * (2 * n as u64 + 1));
            }
        }
    }
}

#[test]
fn observer_sees_every_iterate() {
    let inst = gen_lasso(10, 5, 0.1, 2).unwrap();
    let model = lasso_blackbox(&inst);
    let cfg = SolverConfig {
        epsilon: EpsilonRule::Constant(1e-6),
        max_iter: 30,
        ..SolverConfig::default()
    };
    let mut seen = Vec::new();
    let r = ipzopm_with(&model, &cfg, &initial_point(10, 2), |v| {
        seen.push(v.h);
        if v.k == 7 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
    });
    assert_eq!(r.termination, Termination::Stopped);
    assert_eq!(seen, r.h_trace());
    assert_eq!(seen.len(), 8);
}
