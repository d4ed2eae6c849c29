// SPDX-License-Identifier: Apache-2.0

//! Logistic polarity head fitted on seed-user embeddings.

use serde::{Deserialize, Serialize};

use super::model::{sigmoid, Head};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            learning_rate: 0.5,
            epochs: 500,
        }
    }
}

/// Mean binary cross-entropy of `head` on `(xs, ys)`.
pub fn logistic_loss(head: &Head, xs: &[Vec<f64>], ys: &[u8]) -> f64 {
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = head.logit(x);
            // log(1 + e^z) - y z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - y as f64 * z
        })
        .sum();
    total / xs.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadFit {
    pub head: Head,
    /// Loss before each epoch's update, followed by the final loss.
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent from a zero initialization. Labels are 0 for
/// Left and 1 for Right.
pub fn train_head(xs: &[Vec<f64>], ys: &[u8], cfg: &HeadConfig) -> Result<HeadFit> {
    if xs.len() != ys.len() {
        return Err(invalid("features and labels differ in length"));
    }
    if ys.iter().any(|&y| y > 1) {
        return Err(invalid("labels must be 0 or 1"));
    }
    if !ys.contains(&0) || !ys.contains(&1) {
        return Err(invalid("head training needs both classes"));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(invalid("ragged feature matrix"));
    }
    let n = xs.len() as f64;
    let mut head = Head::zeros(dim);
    let mut losses = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        losses.push(logistic_loss(&head, xs, ys));
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let r = sigmoid(head.logit(x)) - y as f64;
            gb += r;
            for (g, v) in gw.iter_mut().zip(x) {
                *g += r * v;
            }
        }
        for (w, g) in head.weights.iter_mut().zip(&gw) {
            *w -= cfg.learning_rate * g / n;
        }
        head.bias -= cfg.learning_rate * gb / n;
    }
    losses.push(logistic_loss(&head, xs, ys));
    Ok(HeadFit { head, losses })
}
