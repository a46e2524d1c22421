use crate::error::{Error, Result};
use crate::estimators::DEFAULT_HESS_CAP;

/// Finite-difference radius `δ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `δ_k = 1 / √(k + 1)`.
    InvSqrt,
    Constant(f64),
}

/// Proximal weight `σ_k` added to the estimated diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// `σ_k = scale · ‖x_k − x_{k−1}‖`, with `σ_0 = initial`.
    Heuristic { scale: f64, initial: f64 },
    Constant(f64),
}

impl SigmaRule {
    /// The paper's experimental rule, `5000 ‖x_k − x_{k−1}‖` with `σ_0 = 1`.
    pub const PAPER: SigmaRule = SigmaRule::Heuristic {
        scale: 5000.0,
        initial: 1.0,
    };

    /// Constant `σ = 2 (L_f + L_H)` from a gradient Lipschitz constant and a
    /// bound on the estimated diagonal.
    pub fn theoretical(grad_lipschitz: f64, hess_bound: f64) -> Self {
        SigmaRule::Constant(2.0 * (grad_lipschitz + hess_bound))
    }
}

/// Subproblem accuracy `ε_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonRule {
    /// `ε_k = 1 / (k + 1)²`.
    InvSquare,
    Constant(f64),
}

/// `γ` used for the reported stationarity `‖P_γ(x_k)‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `1 / (max σ_j + max |H_j|)` over the iterations so far (IPZOPM), or the
    /// current stepsize (ZOPG).
    Adaptive,
    Fixed(f64),
}

/// ZOPG stepsize `η_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeRule {
    Constant(f64),
    /// `η_k = initial / √(k + 1)`.
    InvSqrt { initial: f64 },
}

/// What IPZOPM does when the inner solver cannot certify `ε_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InexactPolicy {
    /// Take the best inner iterate and flag the iteration.
    #[default]
    AcceptBest,
    Abort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub delta: DeltaRule,
    pub sigma: SigmaRule,
    pub epsilon: EpsilonRule,
    pub gamma: GammaRule,
    pub zopg_stepsize: StepsizeRule,
    /// Stop when `|h(x_k) − h(x_{k−1})|` drops below this.
    pub termination_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub hess_cap: f64,
    pub delta_floor: f64,
    pub sigma_floor: f64,
    pub max_inner: usize,
    pub on_inexact_failure: InexactPolicy,
    /// Probe oracle purity and custom-prox nonexpansiveness while running.
    pub debug_checks: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: DeltaRule::InvSqrt,
            sigma: SigmaRule::PAPER,
            epsilon: EpsilonRule::InvSquare,
            gamma: GammaRule::Adaptive,
            zopg_stepsize: StepsizeRule::Constant(1e-3),
            termination_tol: 1e-3,
            max_iter: 1000,
            seed: 0,
            hess_cap: DEFAULT_HESS_CAP,
            delta_floor: 1e-6,
            sigma_floor: 1e-8,
            max_inner: 10_000,
            on_inexact_failure: InexactPolicy::AcceptBest,
            debug_checks: false,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let DeltaRule::Constant(d) = self.delta {
            positive("delta", d)?;
        }
        match self.sigma {
            SigmaRule::Heuristic { scale, initial } => {
                if !(scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "sigma scale",
                        value: scale,
                        reason: "must be nonnegative and finite",
                    });
                }
                positive("sigma initial", initial)?;
            }
            SigmaRule::Constant(s) => positive("sigma", s)?,
        }
        if let EpsilonRule::Constant(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        if let GammaRule::Fixed(g) = self.gamma {
            positive("gamma", g)?;
        }
        match self.zopg_stepsize {
            StepsizeRule::Constant(eta) => positive("eta", eta)?,
            StepsizeRule::InvSqrt { initial } => positive("eta", initial)?,
        }
        if !(self.termination_tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "termination_tol",
                value: self.termination_tol,
                reason: "must be nonnegative",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        positive("hess_cap", self.hess_cap)?;
        positive("delta_floor", self.delta_floor)?;
        positive("sigma_floor", self.sigma_floor)?;
        Ok(())
    }

    pub fn delta_at(&self, k: usize) -> f64 {
        let d = match self.delta {
            DeltaRule::InvSqrt => 1.0 / ((k + 1) as f64).sqrt(),
            DeltaRule::Constant(d) => d,
        };
        d.max(self.delta_floor)
    }

    pub fn epsilon_at(&self, k: usize) -> f64 {
        match self.epsilon {
            EpsilonRule::InvSquare => 1.0 / ((k + 1) as f64).powi(2),
            EpsilonRule::Constant(e) => e,
        }
    }

    /// `σ_k` given `‖x_k − x_{k−1}‖` (absent at `k = 0`), floored at `sigma_floor`.
    pub fn sigma_at(&self, last_step: Option<f64>) -> f64 {
        let s = match (self.sigma, last_step) {
            (SigmaRule::Heuristic { initial, .. }, None) => initial,
            (SigmaRule::Heuristic { scale, .. }, Some(step)) => scale * step,
            (SigmaRule::Constant(s), _) => s,
        };
        s.max(self.sigma_floor)
    }

    pub fn stepsize_at(&self, k: usize) -> f64 {
        match self.zopg_stepsize {
            StepsizeRule::Constant(eta) => eta,
            StepsizeRule::InvSqrt { initial } => initial / ((k + 1) as f64).sqrt(),
        }
    }
}
