// SPDX-License-Identifier: Apache-2.0

//! Euclidean triplet margin loss `max(|a - p| - |a - n| + margin, 0)`.

use crate::error::{Error, Result};

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

pub fn triplet_loss(anchor: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> Result<f64> {
    check_dims(anchor, positive)?;
    check_dims(anchor, negative)?;
    Ok((euclidean(anchor, positive) - euclidean(anchor, negative) + margin).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletGrad {
    pub loss: f64,
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

/// Unit vector `(a - b) / |a - b|`, or zero when `a == b`.
pub(crate) fn unit_diff(a: &[f64], b: &[f64], dist: f64) -> Vec<f64> {
    if dist == 0.0 {
        return vec![0.0; a.len()];
    }
    a.iter().zip(b).map(|(x, y)| (x - y) / dist).collect()
}

/// Loss and gradient. The subgradient is zero at the hinge (loss exactly
/// zero) and for any distance that is exactly zero.
pub fn triplet_grad(anchor: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> Result<TripletGrad> {
    check_dims(anchor, positive)?;
    check_dims(anchor, negative)?;
    let dp = euclidean(anchor, positive);
    let dn = euclidean(anchor, negative);
    let raw = dp - dn + margin;
    let d = anchor.len();
    if raw <= 0.0 {
        return Ok(TripletGrad {
            loss: 0.0,
            anchor: vec![0.0; d],
            positive: vec![0.0; d],
            negative: vec![0.0; d],
        });
    }
    let up = unit_diff(anchor, positive, dp);
    let un = unit_diff(anchor, negative, dn);
    Ok(TripletGrad {
        loss: raw,
        anchor: up.iter().zip(&un).map(|(p, n)| p - n).collect(),
        positive: up.iter().map(|p| -p).collect(),
        negative: un,
    })
}
