//! Regularizers and their proximal mappings.
//!
//! `prox_{λr}(x)` is the minimizer of `r(y) + ‖y − x‖² / (2λ)`. Built-in
//! regularizers are separable, so their prox is applied coordinate by
//! coordinate; custom regularizers bring their own (possibly coupled) prox.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_positive, Error, Result};
use crate::linalg::{dist_sq, dot, sub};

/// One coordinate's term `r_i` of a separable regularizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarPiece {
    Zero,
    /// `weight · |t|`, `weight ≥ 0`.
    Abs { weight: f64 },
    /// Indicator of `[lower, upper]`.
    Interval { lower: f64, upper: f64 },
}

impl ScalarPiece {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            ScalarPiece::Zero => 0.0,
            ScalarPiece::Abs { weight } => weight * t.abs(),
            ScalarPiece::Interval { lower, upper } => {
                if (lower..=upper).contains(&t) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Prox without parameter validation; `lambda > 0` is the caller's job.
    #[inline]
    pub(crate) fn prox_unchecked(&self, t: f64, lambda: f64) -> f64 {
        match *self {
            ScalarPiece::Zero => t,
            ScalarPiece::Abs { weight } => soft_threshold(t, lambda * weight),
            ScalarPiece::Interval { lower, upper } => t.clamp(lower, upper),
        }
    }
}

/// `sign(t) · max(|t| − threshold, 0)`, with `sign(0) = 0`.
#[inline]
pub fn soft_threshold(t: f64, threshold: f64) -> f64 {
    if t > threshold {
        t - threshold
    } else if t < -threshold {
        t + threshold
    } else {
        0.0
    }
}

/// Scalar proximal mapping of a single separable piece.
pub fn prox_scalar(piece: &ScalarPiece, x: f64, lambda: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    Ok(piece.prox_unchecked(x, lambda))
}

/// A regularizer whose prox is supplied by the user.
///
/// The library only assumes the contract (convex, proper, lsc, prox returns
/// the exact minimizer); [`check_nonexpansive`] probes the prox side of it.
pub trait CustomRegularizer: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn prox(&self, x: &[f64], lambda: f64) -> Vec<f64>;
    fn name(&self) -> &str {
        "custom"
    }
}

#[derive(Clone)]
pub enum Regularizer {
    Zero,
    /// `weight · ‖x‖₁`.
    L1 { weight: f64 },
    /// `Σ_i pieces[i](x_i)`; the length must match the problem dimension.
    Separable(Vec<ScalarPiece>),
    Custom(Arc<dyn CustomRegularizer>),
}

impl fmt::Debug for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::Zero => write!(f, "Zero"),
            Regularizer::L1 { weight } => write!(f, "L1 {{ weight: {weight} }}"),
            Regularizer::Separable(pieces) => write!(f, "Separable({} pieces)", pieces.len()),
            Regularizer::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

impl Regularizer {
    pub fn l1(weight: f64) -> Self {
        Regularizer::L1 { weight }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Regularizer::Zero => 0.0,
            Regularizer::L1 { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            Regularizer::Separable(pieces) => {
                pieces.iter().zip(x).map(|(p, &t)| p.value(t)).sum()
            }
            Regularizer::Custom(c) => c.value(x),
        }
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self, Regularizer::Custom(_))
    }

    /// Coordinate `i`'s piece, or `None` for custom regularizers.
    pub fn piece(&self, i: usize) -> Option<ScalarPiece> {
        match self {
            Regularizer::Zero => Some(ScalarPiece::Zero),
            Regularizer::L1 { weight } => Some(ScalarPiece::Abs { weight: *weight }),
            Regularizer::Separable(pieces) => pieces.get(i).copied(),
            Regularizer::Custom(_) => None,
        }
    }

    pub(crate) fn validate(&self, dimension: usize) -> Result<()> {
        match self {
            Regularizer::L1 { weight } if !(*weight >= 0.0 && weight.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "l1 weight",
                    value: *weight,
                    reason: "must be nonnegative and finite",
                })
            }
            Regularizer::Separable(pieces) if pieces.len() != dimension => {
                Err(Error::InvalidInput(format!(
                    "separable regularizer has {} pieces for dimension {}",
                    pieces.len(),
                    dimension
                )))
            }
            Regularizer::Separable(pieces) => {
                for p in pieces {
                    match *p {
                        ScalarPiece::Abs { weight } if !(weight >= 0.0 && weight.is_finite()) => {
                            return Err(Error::InvalidParameter {
                                name: "abs weight",
                                value: weight,
                                reason: "must be nonnegative and finite",
                            })
                        }
                        ScalarPiece::Interval { lower, upper } if !(lower <= upper) => {
                            return Err(Error::InvalidParameter {
                                name: "interval lower bound",
                                value: lower,
                                reason: "must not exceed the upper bound",
                            })
                        }
                        _ => {}
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `prox_{λr}(x)`.
    pub fn prox(&self, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_positive("lambda", lambda)?;
        Ok(match self {
            Regularizer::Custom(c) => c.prox(x, lambda),
            _ => x
                .iter()
                .enumerate()
                .map(|(i, &t)| self.piece_unchecked(i).prox_unchecked(t, lambda))
                .collect(),
        })
    }

    #[inline]
    pub(crate) fn piece_unchecked(&self, i: usize) -> ScalarPiece {
        match self {
            Regularizer::Zero => ScalarPiece::Zero,
            Regularizer::L1 { weight } => ScalarPiece::Abs { weight: *weight },
            Regularizer::Separable(pieces) => pieces[i],
            Regularizer::Custom(_) => unreachable!("custom regularizers have no pieces"),
        }
    }
}

/// Free-function form of [`Regularizer::prox`].
pub fn prox(reg: &Regularizer, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    reg.prox(x, lambda)
}

/// Randomized check that `prox_{λr}` is firmly nonexpansive:
/// `‖p(u) − p(v)‖² ≤ ⟨p(u) − p(v), u − v⟩` on `trials` random pairs.
pub fn check_nonexpansive(
    reg: &Regularizer,
    dimension: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let u: Vec<f64> = (0..dimension).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..dimension).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let pu = reg.prox(&u, lambda)?;
        let pv = reg.prox(&v, lambda)?;
        let dp = sub(&pu, &pv);
        let lhs = dot(&dp, &dp);
        let rhs = dot(&dp, &sub(&u, &v));
        let tol = 1e-10 * (1.0 + dist_sq(&u, &v));
        if lhs > rhs + tol {
            return Err(Error::ExpansiveProx {
                ratio: lhs / rhs.max(f64::MIN_POSITIVE),
            });
        }
    }
    Ok(())
}
