//! Test-only oracles, independent of the code paths they check.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Minimizes a scalar function on `[lo, hi]` by exhaustive grid search:
/// `points` samples over the bracket, then `points` samples over the two
/// cells around the best one. `extra` candidates (e.g. kinks) are also tried.
pub fn grid_argmin(obj: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize, extra: &[f64]) -> f64 {
    let scan = |a: f64, b: f64, best: (f64, f64)| {
        let h = (b - a) / (points - 1) as f64;
        (0..points).fold(best, |(bx, bv), i| {
            let t = a + h * i as f64;
            let v = obj(t);
            if v < bv { (t, v) } else { (bx, bv) }
        })
    };
    let mut best = extra
        .iter()
        .filter(|t| (lo..=hi).contains(*t))
        .fold((lo, obj(lo)), |(bx, bv), &t| {
            let v = obj(t);
            if v < bv { (t, v) } else { (bx, bv) }
        });
    best = scan(lo, hi, best);
    let cell = (hi - lo) / (points - 1) as f64;
    best = scan((best.0 - cell).max(lo), (best.0 + cell).min(hi), best);
    for &t in extra {
        if (lo..=hi).contains(&t) && obj(t) <= best.1 {
            best = (t, obj(t));
        }
    }
    best.0
}

/// `f(x) = Σ c_i x_i³ / 6 + ½ xᵀQx + bᵀx` with symmetric `Q`.
///
/// `∇²f(x) = diag(c ∘ x) + Q`, so the Hessian is Lipschitz with constant
/// exactly `max |c_i|` in the operator norm.
#[derive(Debug, Clone)]
pub struct CubicPoly {
    pub c: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl CubicPoly {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, cubic_scale: f64) -> Self {
        let c = (0..n).map(|_| cubic_scale * rng.random_range(-1.0..1.0)).collect();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                q[i][j] = v;
                q[j][i] = v;
            }
            q[i][i] += 2.0;
        }
        let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        CubicPoly { c, q, b }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut v = 0.0;
        for i in 0..n {
            v += self.c[i] * x[i].powi(3) / 6.0 + self.b[i] * x[i];
            for j in 0..n {
                v += 0.5 * x[i] * self.q[i][j] * x[j];
            }
        }
        v
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                0.5 * self.c[i] * x[i] * x[i]
                    + self.b[i]
                    + (0..self.n()).map(|j| self.q[i][j] * x[j]).sum::<f64>()
            })
            .collect()
    }

    pub fn hess_diag(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| self.c[i] * x[i] + self.q[i][i]).collect()
    }

    pub fn hess_lipschitz(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
