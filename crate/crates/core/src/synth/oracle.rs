// SPDX-License-Identifier: Apache-2.0

//! Exact RWC by enumerating every walk on a tiny graph.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::analysis::{StepRule, DECILES};
use crate::error::{invalid, Result};
use crate::graph::InteractionGraph;

pub const MAX_ORACLE_NODES: usize = 7;
pub const MAX_ORACLE_LEN: usize = 4;

/// Exact conditional start-decile probabilities. `values[a][b]` is `None`
/// when decile a+1 is empty or no walk can end in b+1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactRwc {
    pub values: Vec<Vec<Option<BigRational>>>,
    /// `end_mass[a][b]`: probability that a walk from decile a+1 ends in b+1.
    pub end_mass: Vec<Vec<BigRational>>,
}

impl ExactRwc {
    pub fn to_f64(&self) -> Vec<Vec<Option<f64>>> {
        self.values
            .iter()
            .map(|row| row.iter().map(|v| v.as_ref().map(|q| q.to_f64().unwrap_or(f64::NAN))).collect())
            .collect()
    }
}

struct Walker<'a> {
    g: &'a InteractionGraph,
    authoritative: &'a [bool],
    max_len: usize,
    rule: StepRule,
}

impl Walker<'_> {
    fn branches(&self, node: usize) -> Vec<(usize, BigRational)> {
        let out = self.g.out_edges(node);
        match self.rule {
            StepRule::Uniform => {
                let n = BigInt::from(out.len());
                out.iter().map(|&(v, _)| (v, BigRational::new(BigInt::one(), n.clone()))).collect()
            }
            StepRule::WeightProportional => {
                let total = BigInt::from(out.iter().map(|&(_, w)| w).sum::<u64>());
                out.iter()
                    .map(|&(v, w)| (v, BigRational::new(BigInt::from(w), total.clone())))
                    .collect()
            }
        }
    }

    /// Adds `mass` times the end-node distribution of the walk continuing
    /// from `path` into `ends`.
    fn explore(&self, path: &mut Vec<usize>, mass: BigRational, ends: &mut [BigRational]) {
        let here = *path.last().expect("non-empty path");
        let steps_taken = path.len() - 1;
        if steps_taken == self.max_len || self.g.out_edges(here).is_empty() {
            ends[here] += mass;
            return;
        }
        for (next, p) in self.branches(here) {
            let m = &mass * &p;
            if self.authoritative[next] || path.contains(&next) {
                ends[next] += m;
            } else {
                path.push(next);
                self.explore(path, m, ends);
                path.pop();
            }
        }
    }

    /// End-node distribution for a walk starting at `start`.
    fn end_distribution(&self, start: usize) -> Vec<BigRational> {
        let mut ends = vec![BigRational::zero(); self.g.node_count()];
        if self.authoritative[start] {
            ends[start] = BigRational::one();
        } else {
            self.explore(&mut vec![start], BigRational::one(), &mut ends);
        }
        ends
    }
}

/// Enumerates every walk from every start node with its exact probability,
/// applying the same stopping rules as the Monte Carlo estimator.
pub fn rwc_bruteforce(
    g: &InteractionGraph,
    node_decile: &[Option<u8>],
    authoritative: &[bool],
    max_len: usize,
    rule: StepRule,
) -> Result<ExactRwc> {
    let n = g.node_count();
    if n == 0 || n > MAX_ORACLE_NODES {
        return Err(invalid(format!("oracle needs 1..={MAX_ORACLE_NODES} nodes, got {n}")));
    }
    if max_len == 0 || max_len > MAX_ORACLE_LEN {
        return Err(invalid(format!("oracle needs max_len in 1..={MAX_ORACLE_LEN}, got {max_len}")));
    }
    if node_decile.len() != n || authoritative.len() != n {
        return Err(invalid("assignment length does not match the graph"));
    }
    if node_decile.iter().flatten().any(|&d| d == 0 || d as usize > DECILES) {
        return Err(invalid("decile outside 1..10"));
    }
    let walker = Walker {
        g,
        authoritative,
        max_len,
        rule,
    };
    let mut end_mass = vec![vec![BigRational::zero(); DECILES]; DECILES];
    let mut present = [false; DECILES];
    for a in 0..DECILES {
        let starts: Vec<usize> = (0..n).filter(|&u| node_decile[u] == Some(a as u8 + 1)).collect();
        if starts.is_empty() {
            continue;
        }
        present[a] = true;
        let share = BigRational::new(BigInt::one(), BigInt::from(starts.len()));
        for s in starts {
            for (end, p) in walker.end_distribution(s).into_iter().enumerate() {
                if let Some(b) = node_decile[end] {
                    end_mass[a][b as usize - 1] += &share * p;
                }
            }
        }
    }
    let col_totals: Vec<BigRational> = (0..DECILES)
        .map(|b| (0..DECILES).fold(BigRational::zero(), |acc, a| acc + &end_mass[a][b]))
        .collect();
    let values = (0..DECILES)
        .map(|a| {
            (0..DECILES)
                .map(|b| (present[a] && !col_totals[b].is_zero()).then(|| &end_mass[a][b] / &col_totals[b]))
                .collect()
        })
        .collect();
    Ok(ExactRwc { values, end_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn graph(n: usize, edges: &[(usize, usize, u64)]) -> InteractionGraph {
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        InteractionGraph::from_edges(GraphKind::Retweet, ids, edges.iter().copied()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn isolated_nodes_end_where_they_start() {
        let g = graph(2, &[]);
        let r = rwc_bruteforce(&g, &[Some(2), Some(8)], &[false, false], 4, StepRule::Uniform).unwrap();
        assert_eq!(r.values[1][1], Some(q(1, 1)));
        assert_eq!(r.values[7][7], Some(q(1, 1)));
        assert_eq!(r.values[1][7], Some(q(0, 1)));
        assert_eq!(r.values[0][0], None);
    }

    #[test]
    fn self_loop_ends_by_revisit() {
        let g = graph(1, &[(0, 0, 3)]);
        let r = rwc_bruteforce(&g, &[Some(4)], &[false], 1, StepRule::WeightProportional).unwrap();
        assert_eq!(r.values[3][3], Some(q(1, 1)));
        assert_eq!(r.end_mass[3][3], q(1, 1));
    }

    #[test]
    fn hand_computed_weighted_split() {
        // 0 -> 1 (w=1), 0 -> 2 (w=3); 1 and 2 are dead ends
        let g = graph(3, &[(0, 1, 1), (0, 2, 3)]);
        let d = [Some(1), Some(2), Some(3)];
        let r = rwc_bruteforce(&g, &d, &[false; 3], 4, StepRule::WeightProportional).unwrap();
        assert_eq!(r.end_mass[0][1], q(1, 4));
        assert_eq!(r.end_mass[0][2], q(3, 4));
        // column 2: from decile 1 mass 1/4, from decile 2 mass 1
        assert_eq!(r.values[0][1], Some(q(1, 5)));
        assert_eq!(r.values[1][1], Some(q(4, 5)));
        let u = rwc_bruteforce(&g, &d, &[false; 3], 4, StepRule::Uniform).unwrap();
        assert_eq!(u.end_mass[0][1], q(1, 2));
    }

    #[test]
    fn columns_are_exactly_stochastic() {
        let g = graph(5, &[(0, 1, 2), (1, 2, 1), (2, 0, 1), (2, 3, 4), (3, 4, 1), (4, 1, 2), (1, 3, 1)]);
        let d = [Some(1), Some(1), Some(5), Some(10), Some(10)];
        let r = rwc_bruteforce(&g, &d, &[false, false, false, true, false], 4, StepRule::WeightProportional).unwrap();
        for b in 0..DECILES {
            let col: Vec<&BigRational> = (0..DECILES).filter_map(|a| r.values[a][b].as_ref()).collect();
            if !col.is_empty() {
                let sum = col.into_iter().fold(BigRational::zero(), |acc, x| acc + x);
                assert!(sum.is_one());
            }
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let g = graph(8, &[]);
        assert!(rwc_bruteforce(&g, &[Some(1); 8], &[false; 8], 2, StepRule::Uniform).is_err());
        let g = graph(2, &[]);
        assert!(rwc_bruteforce(&g, &[Some(1); 2], &[false; 2], 5, StepRule::Uniform).is_err());
        assert!(rwc_bruteforce(&g, &[Some(1); 2], &[false; 2], 0, StepRule::Uniform).is_err());
    }
}
