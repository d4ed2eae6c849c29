// SPDX-License-Identifier: Apache-2.0

//! One-way analysis of variance.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `f64::INFINITY` when within-group variance is zero but means differ.
    #[serde(serialize_with = "finite_or_string")]
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub infinite: bool,
}

fn finite_or_string<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str("inf")
    }
}

/// F statistic of between-group over within-group mean squares, with the
/// upper-tail p-value of the F distribution.
pub fn anova_f(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    let k = groups.len();
    if k < 2 {
        return Err(invalid("ANOVA needs at least two groups"));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(invalid("ANOVA groups must be non-empty"));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    if n <= k {
        return Err(invalid("ANOVA needs more observations than groups"));
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand).powi(2);
        ss_within += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    if ss_within == 0.0 {
        let infinite = ss_between > 0.0;
        return Ok(AnovaResult {
            f: if infinite { f64::INFINITY } else { 0.0 },
            df_between,
            df_within,
            p: if infinite { 0.0 } else { 1.0 },
            infinite,
        });
    }
    let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
    let (d1, d2) = (df_between as f64, df_within as f64);
    // upper tail of F(d1, d2) = I_{d2/(d2 + d1 f)}(d2/2, d1/2)
    let p = beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p,
        infinite: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups() {
        let g = vec![1.0, 2.0, 3.0];
        let r = anova_f(&[g.clone(), g.clone(), g]).unwrap();
        assert_eq!(r.f, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (2, 6));
    }

    #[test]
    fn zero_within_variance() {
        let r = anova_f(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(r.infinite);
        assert_eq!(r.f, f64::INFINITY);
        assert_eq!(r.p, 0.0);
        assert!(serde_json::to_string(&r).unwrap().contains("\"inf\""));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(anova_f(&[vec![1.0], vec![2.0]]).is_err());
        assert!(anova_f(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_f(&[vec![1.0, 2.0], vec![]]).is_err());
    }

    #[test]
    fn known_p_value() {
        // for d1 = 2 the F tail has the closed form (1 + 2F/d2)^(-d2/2)
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![2.0, 3.0, 4.0];
        let c = vec![5.0, 6.0, 7.0];
        let r = anova_f(&[a, b, c]).unwrap();
        assert!((r.f - 13.0).abs() < 1e-12);
        assert!((r.p - (1.0f64 + 26.0 / 6.0).powf(-3.0)).abs() < 1e-12, "{}", r.p);
    }
}
