//! Outer loops: the inexact preconditioned zeroth-order proximal method
//! (IPZOPM) and the plain zeroth-order proximal-gradient baseline (ZOPG).
//!
//! Both share one driver. Each iteration samples the `2n + 1` trial points
//! around `x_k`, reads `h(x_k)` off the center value, checks the stopping
//! rule, and then takes a step:
//!
//! * IPZOPM minimizes the local model with preconditioner `H_δ(x_k) + σ_k I`
//!   (closed form for separable regularizers, certified inexact solve
//!   otherwise);
//! * ZOPG takes `prox_{η r}(x_k − η G_δ(x_k))`.

mod config;
mod stationarity;

pub use config::{
    DeltaRule, EpsilonRule, GammaRule, InexactPolicy, SigmaRule, SolverConfig, StepsizeRule,
};
pub use stationarity::{gradient_mapping, prox_grad_mapping};

use std::fmt;
use std::ops::ControlFlow;
use std::time::Instant;

use crate::error::{check_point, Error, Result};
use crate::estimators::estimate_smooth;
use crate::linalg::{dist, max_abs, norm};
use crate::oracle::ObjectiveModel;
use crate::prox::{check_nonexpansive, Regularizer};
use crate::subproblem::{solve_inexact, solve_separable, LocalModel, SubproblemSolution};

/// Stepsizes tried by [`tune_zopg`] when no other grid is given.
pub const ZOPG_ETA_GRID: [f64; 4] = [1.0, 0.1, 0.01, 0.001];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ipzopm,
    Zopg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ipzopm => "ipzopm",
            SolverKind::Zopg => "zopg",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ipzopm" => Ok(SolverKind::Ipzopm),
            "zopg" => Ok(SolverKind::Zopg),
            other => Err(format!("unknown solver `{other}` (expected ipzopm or zopg)")),
        }
    }
}

/// One row of the trace, measured at `x_k`.
///
/// The step fields (`inner_iters`, `gap_bound`, `step_norm`) are `None` on the
/// final record, where the run stopped instead of stepping.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub h_value: f64,
    /// Black-box evaluations so far, including this iteration's batch.
    pub evals: u64,
    pub delta: f64,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub stepsize: Option<f64>,
    pub gamma: f64,
    /// `‖P_γ(x_k)‖` computed with the estimated gradient.
    pub stationarity: f64,
    pub inner_iters: Option<usize>,
    pub gap_bound: Option<f64>,
    pub step_norm: Option<f64>,
    pub hess_clamped: usize,
    /// The inner solve missed `ε_k` and its best iterate was accepted.
    pub inexact_flagged: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Tolerance,
    MaxIter,
    /// An observer asked the run to stop.
    Stopped,
    Error(Error),
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIter => "max_iter",
            Termination::Stopped => "stopped",
            Termination::Error(_) => "error",
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Termination::Error(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solver: SolverKind,
    /// Last iterate whose objective was evaluated successfully.
    pub point: Vec<f64>,
    /// `h(point)`, or NaN if not even `x_0` could be evaluated.
    pub h: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub total_evals: u64,
}

impl SolverReport {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.step_norm.is_some()).count()
    }

    pub fn h_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.h_value).collect()
    }
}

/// What an observer sees at each iterate, before the stopping rule runs.
#[derive(Debug)]
pub struct IterateView<'a> {
    pub k: usize,
    pub x: &'a [f64],
    pub h: f64,
    /// Estimated smooth gradient at `x`.
    pub grad: &'a [f64],
    pub gamma: f64,
    pub stationarity: f64,
}

pub fn ipzopm(model: &ObjectiveModel, config: &SolverConfig, x0: &[f64]) -> SolverReport {
    drive(SolverKind::Ipzopm, model, config, x0, |_| ControlFlow::Continue(()))
}

pub fn ipzopm_with(
    model: &ObjectiveModel,
    config: &SolverConfig,
    x0: &[f64],
    observer: impl FnMut(&IterateView<'_>) -> ControlFlow<()>,
) -> SolverReport {
    drive(SolverKind::Ipzopm, model, config, x0, observer)
}

pub fn zopg(model: &ObjectiveModel, config: &SolverConfig, x0: &[f64]) -> SolverReport {
    drive(SolverKind::Zopg, model, config, x0, |_| ControlFlow::Continue(()))
}

pub fn zopg_with(
    model: &ObjectiveModel,
    config: &SolverConfig,
    x0: &[f64],
    observer: impl FnMut(&IterateView<'_>) -> ControlFlow<()>,
) -> SolverReport {
    drive(SolverKind::Zopg, model, config, x0, observer)
}

pub fn solve(
    kind: SolverKind,
    model: &ObjectiveModel,
    config: &SolverConfig,
    x0: &[f64],
) -> SolverReport {
    drive(kind, model, config, x0, |_| ControlFlow::Continue(()))
}

/// ZOPG runs over a stepsize grid; the chosen one has the lowest final `h`
/// among runs that did not error (among all runs if every one errored).
#[derive(Debug, Clone)]
pub struct ZopgTuning {
    pub runs: Vec<(f64, SolverReport)>,
    pub chosen: usize,
}

impl ZopgTuning {
    pub fn eta(&self) -> f64 {
        self.runs[self.chosen].0
    }

    pub fn report(&self) -> &SolverReport {
        &self.runs[self.chosen].1
    }

    pub fn into_report(mut self) -> (f64, SolverReport) {
        self.runs.swap_remove(self.chosen)
    }
}

pub fn tune_zopg(
    model: &ObjectiveModel,
    config: &SolverConfig,
    x0: &[f64],
    grid: &[f64],
) -> ZopgTuning {
    assert!(!grid.is_empty(), "stepsize grid must not be empty");
    let runs: Vec<(f64, SolverReport)> = grid
        .iter()
        .map(|&eta| {
            let cfg = SolverConfig {
                zopg_stepsize: StepsizeRule::Constant(eta),
                ..config.clone()
            };
            (eta, zopg(&model.with_fresh_counter(), &cfg, x0))
        })
        .collect();
    let score = |r: &SolverReport| if r.h.is_nan() { f64::INFINITY } else { r.h };
    let pick = |allow_errors: bool| {
        runs.iter()
            .enumerate()
            .filter(|(_, (_, r))| allow_errors || !r.termination.is_error())
            .min_by(|(_, (_, a)), (_, (_, b))| score(a).total_cmp(&score(b)))
            .map(|(i, _)| i)
    };
    let chosen = pick(false).or_else(|| pick(true)).unwrap_or(0);
    ZopgTuning { runs, chosen }
}

fn drive(
    kind: SolverKind,
    model: &ObjectiveModel,
    config: &SolverConfig,
    x0: &[f64],
    mut observer: impl FnMut(&IterateView<'_>) -> ControlFlow<()>,
) -> SolverReport {
    let base_evals = model.evals();
    let mut report = SolverReport {
        solver: kind,
        point: x0.to_vec(),
        h: f64::NAN,
        records: Vec::new(),
        termination: Termination::MaxIter,
        total_evals: 0,
    };
    let outcome = run_loop(kind, model, config, x0, &mut observer, &mut report, base_evals);
    report.termination = match outcome {
        Ok(t) => t,
        Err(e) => Termination::Error(e),
    };
    report.total_evals = model.evals() - base_evals;
    report
}

fn run_loop(
    kind: SolverKind,
    model: &ObjectiveModel,
    config: &SolverConfig,
    x0: &[f64],
    observer: &mut impl FnMut(&IterateView<'_>) -> ControlFlow<()>,
    report: &mut SolverReport,
    base_evals: u64,
) -> Result<Termination> {
    let start = Instant::now();
    config.validate()?;
    check_point(x0, model.dimension())?;
    let reg = model.regularizer();
    if !reg.value(x0).is_finite() {
        return Err(Error::InvalidInput(
            "initial point lies outside the regularizer's domain".into(),
        ));
    }
    let checked;
    let model = if config.debug_checks {
        if let Regularizer::Custom(_) = reg {
            check_nonexpansive(reg, model.dimension(), 1.0, 100, config.seed)?;
        }
        checked = model.clone().with_purity_check(true);
        &checked
    } else {
        model
    };

    let mut x = x0.to_vec();
    let mut prev_h: Option<f64> = None;
    let mut last_step: Option<f64> = None;
    let mut sigma_max = 0.0f64;
    let mut hess_max = 0.0f64;

    for k in 0.. {
        let delta = config.delta_at(k);
        let batch = model.sample_batch(&x, delta)?;
        let est = estimate_smooth(model, &batch, config.hess_cap)?;
        let f_center = batch.value_center + model.known_smooth_value(&x);
        let h = f_center + reg.value(&x);
        report.point.clone_from(&x);
        report.h = h;

        let (sigma, epsilon, stepsize, gamma) = match kind {
            SolverKind::Ipzopm => {
                let mut sigma = config.sigma_at(last_step);
                // keep every τ_i = H_ii + σ at least sigma_floor
                let min_h = est.hess_diag.iter().copied().fold(f64::INFINITY, f64::min);
                if min_h + sigma < config.sigma_floor {
                    sigma = config.sigma_floor - min_h;
                }
                sigma_max = sigma_max.max(sigma);
                hess_max = hess_max.max(max_abs(&est.hess_diag));
                let gamma = match config.gamma {
                    GammaRule::Fixed(g) => g,
                    GammaRule::Adaptive => 1.0 / (sigma_max + hess_max),
                };
                (Some(sigma), Some(config.epsilon_at(k)), None, gamma)
            }
            SolverKind::Zopg => {
                let eta = config.stepsize_at(k);
                let gamma = match config.gamma {
                    GammaRule::Fixed(g) => g,
                    GammaRule::Adaptive => eta,
                };
                (None, None, Some(eta), gamma)
            }
        };
        let stationarity = norm(&gradient_mapping(reg, &x, gamma, &est.grad)?);

        let mut record = IterationRecord {
            k,
            h_value: h,
            evals: model.evals() - base_evals,
            delta,
            sigma,
            epsilon,
            stepsize,
            gamma,
            stationarity,
            inner_iters: None,
            gap_bound: None,
            step_norm: None,
            hess_clamped: est.clamped,
            inexact_flagged: false,
            wall_ms: 0.0,
        };
        let elapsed = |r: &mut IterationRecord| r.wall_ms = start.elapsed().as_secs_f64() * 1e3;

        let view = IterateView {
            k,
            x: &x,
            h,
            grad: &est.grad,
            gamma,
            stationarity,
        };
        let stop = if observer(&view).is_break() {
            Some(Termination::Stopped)
        } else if prev_h.is_some_and(|p| (h - p).abs() < config.termination_tol) {
            Some(Termination::Tolerance)
        } else if k >= config.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        if let Some(t) = stop {
            elapsed(&mut record);
            report.records.push(record);
            return Ok(t);
        }

        let next = match kind {
            SolverKind::Ipzopm => {
                let local = LocalModel::new(
                    x.clone(),
                    est.grad,
                    &est.hess_diag,
                    sigma.expect("ipzopm sets sigma"),
                    f_center,
                    reg,
                )?;
                let sol = if reg.is_separable() {
                    solve_separable(&local)?
                } else {
                    match solve_inexact(&local, epsilon.expect("ipzopm sets epsilon"), config.max_inner) {
                        Ok(sol) => sol,
                        Err(Error::InexactnessFailure {
                            best_gap,
                            iters,
                            point,
                            ..
                        }) if config.on_inexact_failure == InexactPolicy::AcceptBest => {
                            record.inexact_flagged = true;
                            SubproblemSolution {
                                point,
                                gap_bound: best_gap,
                                inner_iters: iters,
                            }
                        }
                        Err(e) => {
                            elapsed(&mut record);
                            report.records.push(record);
                            return Err(e);
                        }
                    }
                };
                record.inner_iters = Some(sol.inner_iters);
                record.gap_bound = Some(sol.gap_bound);
                sol.point
            }
            SolverKind::Zopg => {
                let eta = stepsize.expect("zopg sets the stepsize");
                let forward: Vec<f64> = x.iter().zip(&est.grad).map(|(xi, gi)| xi - eta * gi).collect();
                record.inner_iters = Some(0);
                reg.prox(&forward, eta)?
            }
        };

        let step = dist(&next, &x);
        record.step_norm = Some(step);
        elapsed(&mut record);
        report.records.push(record);
        prev_h = Some(h);
        last_step = Some(step);
        x = next;
    }
    unreachable!("the iteration loop only exits by returning")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ObjectiveModel;

    fn half_sq(n: usize, reg: Regularizer) -> ObjectiveModel {
        ObjectiveModel::new(n, |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>(), reg).unwrap()
    }

    fn one_d_lasso() -> ObjectiveModel {
        ObjectiveModel::new(1, |x: &[f64]| 0.5 * (x[0] - 1.0).powi(2), Regularizer::l1(0.25)).unwrap()
    }

    #[test]
    fn ipzopm_smooth_quadratic_descends() {
        let cfg = SolverConfig {
            sigma: SigmaRule::theoretical(1.0, 1.0),
            termination_tol: 1e-8,
            ..Default::default()
        };
        let report = ipzopm(&half_sq(1, Regularizer::Zero), &cfg, &[5.0]);
        assert_eq!(report.termination, Termination::Tolerance);
        let trace = report.h_trace();
        assert!(trace.windows(2).all(|w| w[1] <= w[0]), "{trace:?}");
        assert!(report.h < 1e-6);
    }

    #[test]
    fn ipzopm_one_d_lasso() {
        let cfg = SolverConfig {
            sigma: SigmaRule::theoretical(1.0, 1.0),
            delta: DeltaRule::Constant(1e-2),
            termination_tol: 1e-12,
            ..Default::default()
        };
        let report = ipzopm(&one_d_lasso(), &cfg, &[-2.0]);
        assert!((report.point[0] - 0.75).abs() <= 1e-2, "{:?}", report.point);
    }

    #[test]
    fn zopg_unit_step_is_exact_on_quadratic() {
        let cfg = SolverConfig {
            zopg_stepsize: StepsizeRule::Constant(1.0),
            ..Default::default()
        };
        let report = zopg(&half_sq(3, Regularizer::Zero), &cfg, &[3.0, -1.0, 2.0]);
        assert_eq!(report.records[0].step_norm.map(|s| s > 0.0), Some(true));
        assert!(report.records[1].h_value.abs() < 1e-20);
        assert_eq!(report.termination, Termination::Tolerance);
    }

    #[test]
    fn zopg_one_d_lasso() {
        let cfg = SolverConfig {
            zopg_stepsize: StepsizeRule::Constant(0.5),
            termination_tol: 1e-12,
            ..Default::default()
        };
        let report = zopg(&one_d_lasso(), &cfg, &[3.0]);
        assert!((report.point[0] - 0.75).abs() <= 1e-2);
    }

    #[test]
    fn zopg_constant_f_soft_thresholds() {
        let model = ObjectiveModel::new(2, |_: &[f64]| 1.0, Regularizer::l1(2.0)).unwrap();
        let cfg = SolverConfig {
            zopg_stepsize: StepsizeRule::Constant(0.1),
            termination_tol: 0.0,
            max_iter: 3,
            ..Default::default()
        };
        let mut seen = Vec::new();
        zopg_with(&model, &cfg, &[1.0, -0.5], |v| {
            seen.push(v.x.to_vec());
            ControlFlow::Continue(())
        });
        let expect = [[1.0, -0.5], [0.8, -0.3], [0.6, -0.1], [0.4, 0.0]];
        for (got, want) in seen.iter().zip(expect) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12, "{seen:?}");
        }
    }

    #[test]
    fn eval_accounting() {
        let n = 4;
        let model = half_sq(n, Regularizer::l1(0.1));
        let cfg = SolverConfig { max_iter: 7, termination_tol: 0.0, ..Default::default() };
        for kind in [SolverKind::Ipzopm, SolverKind::Zopg] {
            let m = model.with_fresh_counter();
            let r = solve(kind, &m, &cfg, &[1.0, 2.0, -3.0, 0.5]);
            assert_eq!(r.termination, Termination::MaxIter);
            assert_eq!(r.records.len(), 8);
            assert_eq!(r.iterations(), 7);
            assert_eq!(r.total_evals, 8 * (2 * n as u64 + 1));
            assert!(r.records.windows(2).all(|w| w[1].evals > w[0].evals));
            assert_eq!(r.records.last().unwrap().evals, r.total_evals);
        }
    }

    #[test]
    fn oracle_failure_yields_error_report() {
        let model = ObjectiveModel::new(
            1,
            |x: &[f64]| if x[0].abs() > 10.0 { f64::NAN } else { x[0] * x[0] },
            Regularizer::Zero,
        )
        .unwrap();
        let cfg = SolverConfig {
            zopg_stepsize: StepsizeRule::Constant(5.0),
            ..Default::default()
        };
        let r = zopg(&model, &cfg, &[1.0]);
        assert!(r.termination.is_error());
        assert!(!r.records.is_empty());
        assert!(r.h.is_finite());
    }

    #[test]
    fn invalid_config_reported_not_panicked() {
        let cfg = SolverConfig { max_iter: 0, ..Default::default() };
        let r = ipzopm(&half_sq(1, Regularizer::Zero), &cfg, &[1.0]);
        assert!(matches!(r.termination, Termination::Error(Error::InvalidParameter { .. })));
        assert!(r.records.is_empty());
        assert_eq!(r.total_evals, 0);
    }

    #[test]
    fn x0_outside_domain_rejected() {
        let reg = Regularizer::Separable(vec![crate::prox::ScalarPiece::Interval { lower: 0.0, upper: 1.0 }]);
        let r = ipzopm(&half_sq(1, reg), &SolverConfig::default(), &[2.0]);
        assert!(r.termination.is_error());
    }

    #[test]
    fn negative_curvature_raises_sigma() {
        // f = −x², heuristic σ would leave τ ≤ 0 once steps shrink
        let model = ObjectiveModel::new(1, |x: &[f64]| -x[0] * x[0], Regularizer::Separable(vec![
            crate::prox::ScalarPiece::Interval { lower: -1.0, upper: 1.0 },
        ]))
        .unwrap();
        let cfg = SolverConfig { max_iter: 20, ..Default::default() };
        let r = ipzopm(&model, &cfg, &[0.1]);
        assert!(!r.termination.is_error(), "{:?}", r.termination);
        for rec in &r.records {
            assert!(rec.sigma.unwrap() - 2.0 >= 1e-8 * 0.99);
        }
    }

    #[test]
    fn tuning_prefers_converging_stepsize() {
        let model = one_d_lasso();
        let cfg = SolverConfig::default();
        let t = tune_zopg(&model, &cfg, &[3.0], &[10.0, 0.5, 1e-3]);
        assert_eq!(t.eta(), 0.5);
        assert_eq!(t.runs.len(), 3);
    }

    #[test]
    fn deterministic_traces() {
        let model = half_sq(5, Regularizer::l1(0.3));
        let cfg = SolverConfig::default();
        let x0 = [1.0, -2.0, 0.5, 3.0, -0.1];
        let strip = |r: SolverReport| {
            r.records
                .into_iter()
                .map(|mut rec| {
                    rec.wall_ms = 0.0;
                    rec
                })
                .collect::<Vec<_>>()
        };
        let a = strip(ipzopm(&model.with_fresh_counter(), &cfg, &x0));
        let b = strip(ipzopm(&model.with_fresh_counter(), &cfg, &x0));
        assert_eq!(a, b);
    }

    #[test]
    fn observer_can_stop() {
        let r = ipzopm_with(&half_sq(2, Regularizer::Zero), &SolverConfig::default(), &[1.0, 1.0], |v| {
            if v.k == 2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        assert_eq!(r.termination, Termination::Stopped);
        assert_eq!(r.records.len(), 3);
    }
}
