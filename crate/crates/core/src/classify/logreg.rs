//! L2-regularised logistic regression by full-batch gradient descent.
//!
//! Objective on standardised inputs, bias unpenalised:
//! `(1/n) Σ [softplus(z_i) − y_i z_i] + (l2 / 2n) ‖w‖²`, `z_i = w·x_i + b`.
//! Each step backtracks from twice the previous step length until the
//! Armijo condition holds.

use serde::{Deserialize, Serialize};

use super::{binary_classes, Model, Standardizer, TrainedClassifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub l2: f64,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1.0,
            max_steps: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Gradient steps taken.
    pub steps: usize,
}

impl LogisticModel {
    pub fn zeros(p: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; p],
            bias: 0.0,
            steps: 0,
        }
    }

    pub fn margin(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// `P(y = 1)` for a standardised input.
    pub fn probability(&self, z: &[f64]) -> f64 {
        sigmoid(self.margin(z))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: Vec<f64>,
    l2: f64,
}

impl Problem<'_> {
    fn n(&self) -> f64 {
        self.x.len() as f64
    }

    /// `theta` is `[w.., b]`.
    fn margin(theta: &[f64], x: &[f64]) -> f64 {
        let p = x.len();
        theta[..p].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + theta[p]
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        let p = theta.len() - 1;
        let data: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(x, y)| {
                let z = Self::margin(theta, x);
                softplus(z) - y * z
            })
            .sum();
        let penalty: f64 = theta[..p].iter().map(|w| w * w).sum();
        data / self.n() + self.l2 * penalty / (2.0 * self.n())
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let p = theta.len() - 1;
        let mut g = vec![0.0; p + 1];
        for (x, y) in self.x.iter().zip(&self.y) {
            let r = sigmoid(Self::margin(theta, x)) - y;
            for (gj, xj) in g[..p].iter_mut().zip(x) {
                *gj += r * xj;
            }
            g[p] += r;
        }
        let n = self.n();
        for (j, gj) in g.iter_mut().enumerate() {
            *gj /= n;
            if j < p {
                *gj += self.l2 * theta[j] / n;
            }
        }
        g
    }
}

/// Fits on raw features; standardisation is learned from `x` itself.
pub fn fit_logreg(x: &[Vec<f64>], y: &[usize], params: &LogRegParams) -> Result<TrainedClassifier> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if !(params.l2 >= 0.0 && params.tol > 0.0) {
        return Err(Error::InvalidParameter("logreg needs l2 >= 0 and tol > 0".into()));
    }
    let classes = binary_classes(y)?;
    let standardizer = Standardizer::fit(x)?;
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform(r)).collect();
    let problem = Problem {
        x: &z,
        y: y.iter().map(|&l| l as f64).collect(),
        l2: params.l2,
    };
    let p = standardizer.mean.len();
    let mut theta = vec![0.0; p + 1];
    let mut loss = problem.loss(&theta);
    let mut step = 1.0;
    let mut steps = 0;
    while steps < params.max_steps {
        let g = problem.gradient(&theta);
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < params.tol {
            break;
        }
        let g_sq: f64 = g.iter().map(|v| v * v).sum();
        step *= 2.0;
        let (candidate, candidate_loss) = loop {
            let c: Vec<f64> = theta.iter().zip(&g).map(|(t, gj)| t - step * gj).collect();
            let l = problem.loss(&c);
            if l <= loss - 0.5 * step * g_sq || step < 1e-12 {
                break (c, l);
            }
            step *= 0.5;
        };
        theta = candidate;
        loss = candidate_loss;
        steps += 1;
    }
    let bias = theta.pop().unwrap_or(0.0);
    Ok(TrainedClassifier {
        standardizer,
        model: Model::Logistic(LogisticModel {
            weights: theta,
            bias,
            steps,
        }),
        classes,
    })
}
