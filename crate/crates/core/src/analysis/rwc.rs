// SPDX-License-Identifier: Apache-2.0

//! Random Walk Controversy between polarity deciles.
//!
//! A walk starts at a uniformly chosen node of decile `A` and repeatedly
//! moves to an out-neighbor. It stops on the first of:
//!
//! * reaching an authoritative node (the start node included),
//! * revisiting a node already on the walk,
//! * a node without out-edges,
//! * `max_len` steps.
//!
//! The decile of the node it stops on is the end decile `B`, and
//! `RWC(A, B) = #(start A, end B) / Σ_A' #(start A', end B)`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Direction, InteractionGraph};
use crate::polarity::PolarityTable;
use crate::util::{derive_seed, rng_from_seed};

pub const DECILES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Next node drawn with probability proportional to edge weight.
    #[default]
    WeightProportional,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Authoritative {
    /// `ceil(f * |decile|)` highest in-degree nodes per decile.
    Fraction(f64),
    /// A fixed number per decile (capped at the decile size).
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub walks_per_decile: usize,
    pub max_len: usize,
    pub authoritative: Authoritative,
    pub step_rule: StepRule,
    pub rng_seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_decile: 10_000,
            max_len: 10,
            authoritative: Authoritative::Fraction(0.04),
            step_rule: StepRule::WeightProportional,
            rng_seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_decile == 0 {
            return Err(invalid("walks_per_decile must be at least 1"));
        }
        if self.max_len == 0 {
            return Err(invalid("max_len must be at least 1"));
        }
        if let Authoritative::Fraction(f) = self.authoritative {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid(format!("authoritative fraction {f} outside [0,1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwcMatrix {
    /// `values[a][b]` is RWC(a+1, b+1); `None` for an empty start decile or
    /// an end decile no walk reached.
    pub values: Vec<Vec<Option<f64>>>,
    /// `counts[a][b]` walks started in decile a+1 and ended in b+1.
    pub counts: Vec<Vec<u64>>,
    pub walks_per_decile: usize,
    pub max_len: usize,
    pub authoritative_per_decile: Vec<usize>,
    /// Walks that ended on a node without a decile.
    pub unassigned_endings: u64,
}

impl RwcMatrix {
    /// Conditions each column on its total. `row_present[a]` marks start
    /// deciles that have at least one node.
    pub fn from_counts(counts: Vec<Vec<u64>>, row_present: &[bool]) -> Vec<Vec<Option<f64>>> {
        let col_totals: Vec<u64> = (0..DECILES).map(|b| (0..DECILES).map(|a| counts[a][b]).sum()).collect();
        (0..DECILES)
            .map(|a| {
                (0..DECILES)
                    .map(|b| {
                        (row_present[a] && col_totals[b] > 0).then(|| counts[a][b] as f64 / col_totals[b] as f64)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn get(&self, start: u8, end: u8) -> Option<f64> {
        self.values[start as usize - 1][end as usize - 1]
    }

    pub fn column_sum(&self, end: u8) -> Option<f64> {
        let col: Vec<f64> = (0..DECILES).filter_map(|a| self.values[a][end as usize - 1]).collect();
        (!col.is_empty()).then(|| col.iter().sum())
    }

    /// Ten rows of ten comma-separated values, start decile by row and end
    /// decile by column, preceded by a header row. Missing entries are blank.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["start_decile".to_string()];
        header.extend((1..=DECILES).map(|b| format!("end_{b}")));
        wtr.write_record(&header)?;
        for (a, row) in self.values.iter().enumerate() {
            let mut rec = vec![(a + 1).to_string()];
            rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Decile (1..=10) of every node, `None` for nodes missing from `polarity`.
pub fn node_deciles(g: &InteractionGraph, polarity: &PolarityTable) -> Vec<Option<u8>> {
    g.ids().iter().map(|id| polarity.decile(id)).collect()
}

/// Marks the highest unweighted in-degree nodes of each decile, ties broken
/// by ascending node index.
pub fn authoritative_nodes(g: &InteractionGraph, node_decile: &[Option<u8>], rule: Authoritative) -> Vec<bool> {
    let mut marked = vec![false; g.node_count()];
    for d in 1..=DECILES as u8 {
        let mut members: Vec<usize> = (0..g.node_count()).filter(|&u| node_decile[u] == Some(d)).collect();
        let k = match rule {
            Authoritative::Fraction(f) => (f * members.len() as f64).ceil() as usize,
            Authoritative::Count(c) => c,
        }
        .min(members.len());
        members.sort_by_key(|&u| (std::cmp::Reverse(g.degree_of(u, Direction::In, false)), u));
        for &u in &members[..k] {
            marked[u] = true;
        }
    }
    marked
}

fn step<R: Rng>(g: &InteractionGraph, node: usize, rule: StepRule, rng: &mut R) -> Option<usize> {
    let out = g.out_edges(node);
    if out.is_empty() {
        return None;
    }
    Some(match rule {
        StepRule::Uniform => out[rng.random_range(0..out.len())].0,
        StepRule::WeightProportional => {
            let total: u64 = out.iter().map(|&(_, w)| w).sum();
            let mut ticket = rng.random_range(0..total);
            let mut chosen = out[out.len() - 1].0;
            for &(v, w) in out {
                if ticket < w {
                    chosen = v;
                    break;
                }
                ticket -= w;
            }
            chosen
        }
    })
}

/// Runs one walk from `start` and returns the node it stops on.
pub fn walk_endpoint<R: Rng>(
    g: &InteractionGraph,
    start: usize,
    authoritative: &[bool],
    max_len: usize,
    rule: StepRule,
    rng: &mut R,
) -> usize {
    if authoritative[start] {
        return start;
    }
    let mut path = vec![start];
    let mut current = start;
    for _ in 0..max_len {
        let Some(next) = step(g, current, rule, rng) else {
            return current;
        };
        if path.contains(&next) || authoritative[next] {
            return next;
        }
        path.push(next);
        current = next;
    }
    current
}

/// Monte Carlo RWC given explicit decile and authority assignments. Each
/// walk draws from its own stream seeded by `(rng_seed, start decile, walk
/// index)`, so the tallies do not depend on thread scheduling.
pub fn rwc_with_assignment(
    g: &InteractionGraph,
    node_decile: &[Option<u8>],
    authoritative: &[bool],
    cfg: &WalkConfig,
) -> Result<RwcMatrix> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(invalid("random walks need a non-empty graph"));
    }
    if node_decile.len() != g.node_count() || authoritative.len() != g.node_count() {
        return Err(invalid("assignment length does not match the graph"));
    }
    let members: Vec<Vec<usize>> = (1..=DECILES as u8)
        .map(|d| (0..g.node_count()).filter(|&u| node_decile[u] == Some(d)).collect())
        .collect();
    let mut counts = vec![vec![0u64; DECILES]; DECILES];
    let mut unassigned = 0u64;
    for (a, starts) in members.iter().enumerate() {
        if starts.is_empty() {
            continue;
        }
        let decile_seed = derive_seed(cfg.rng_seed, a as u64 + 1);
        let (row, lost) = (0..cfg.walks_per_decile)
            .into_par_iter()
            .fold(
                || (vec![0u64; DECILES], 0u64),
                |(mut row, mut lost), i| {
                    let mut rng = rng_from_seed(derive_seed(decile_seed, i as u64));
                    let start = starts[rng.random_range(0..starts.len())];
                    let end = walk_endpoint(g, start, authoritative, cfg.max_len, cfg.step_rule, &mut rng);
                    match node_decile[end] {
                        Some(b) => row[b as usize - 1] += 1,
                        None => lost += 1,
                    }
                    (row, lost)
                },
            )
            .reduce(
                || (vec![0u64; DECILES], 0u64),
                |(mut r1, l1), (r2, l2)| {
                    r1.iter_mut().zip(&r2).for_each(|(x, y)| *x += y);
                    (r1, l1 + l2)
                },
            );
        counts[a] = row;
        unassigned += lost;
    }
    let row_present: Vec<bool> = members.iter().map(|m| !m.is_empty()).collect();
    let authoritative_per_decile = (1..=DECILES as u8)
        .map(|d| (0..g.node_count()).filter(|&u| authoritative[u] && node_decile[u] == Some(d)).count())
        .collect();
    Ok(RwcMatrix {
        values: RwcMatrix::from_counts(counts.clone(), &row_present),
        counts,
        walks_per_decile: cfg.walks_per_decile,
        max_len: cfg.max_len,
        authoritative_per_decile,
        unassigned_endings: unassigned,
    })
}

/// RWC over the deciles of `polarity`, with authoritative nodes chosen per
/// `cfg.authoritative`.
pub fn rwc_matrix(g: &InteractionGraph, polarity: &PolarityTable, cfg: &WalkConfig) -> Result<RwcMatrix> {
    let deciles = node_deciles(g, polarity);
    let auth = authoritative_nodes(g, &deciles, cfg.authoritative);
    rwc_with_assignment(g, &deciles, &auth, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn graph(n: usize, edges: &[(usize, usize, u64)]) -> InteractionGraph {
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        InteractionGraph::from_edges(GraphKind::Retweet, ids, edges.iter().copied()).unwrap()
    }

    fn cfg(walks: usize) -> WalkConfig {
        WalkConfig {
            walks_per_decile: walks,
            max_len: 10,
            authoritative: Authoritative::Count(0),
            step_rule: StepRule::WeightProportional,
            rng_seed: 5,
        }
    }

    #[test]
    fn disconnected_blocks_never_cross() {
        // nodes 0..5 form a cycle in deciles 1..5, nodes 5..10 a cycle in 6..10
        let mut edges = Vec::new();
        for b in 0..2 {
            for i in 0..5 {
                edges.push((b * 5 + i, b * 5 + (i + 1) % 5, 1));
            }
        }
        let g = graph(10, &edges);
        let deciles: Vec<Option<u8>> = (0..10).map(|i| Some(i as u8 + 1)).collect();
        let m = rwc_with_assignment(&g, &deciles, &[false; 10], &cfg(500)).unwrap();
        for a in 1..=10u8 {
            for b in 1..=10u8 {
                if (a <= 5) != (b <= 5) {
                    assert_eq!(m.get(a, b), Some(0.0));
                }
            }
        }
        for b in 1..=10 {
            assert!((m.column_sum(b).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn self_absorbing_decile_has_unit_diagonal() {
        let g = graph(2, &[]);
        let deciles = vec![Some(3), Some(7)];
        let m = rwc_with_assignment(&g, &deciles, &[false, false], &cfg(100)).unwrap();
        assert_eq!(m.get(3, 3), Some(1.0));
        assert_eq!(m.get(7, 7), Some(1.0));
        assert_eq!(m.get(3, 7), Some(0.0));
        assert_eq!(m.get(1, 3), None);
        assert_eq!(m.get(3, 1), None);
    }

    #[test]
    fn walk_termination_rules() {
        let g = graph(4, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (2, 3, 0 + 1)]);
        let mut rng = rng_from_seed(1);
        // authoritative start stops immediately
        assert_eq!(walk_endpoint(&g, 0, &[true, false, false, false], 10, StepRule::Uniform, &mut rng), 0);
        // max length 1 stops on the first neighbor
        assert_eq!(walk_endpoint(&g, 0, &[false; 4], 1, StepRule::Uniform, &mut rng), 1);
        // authoritative interior node halts the walk
        assert_eq!(walk_endpoint(&g, 0, &[false, true, false, false], 10, StepRule::Uniform, &mut rng), 1);
        // dead end
        assert_eq!(walk_endpoint(&g, 3, &[false; 4], 10, StepRule::Uniform, &mut rng), 3);
        for _ in 0..50 {
            let end = walk_endpoint(&g, 0, &[false; 4], 10, StepRule::Uniform, &mut rng);
            assert!(end == 0 || end == 3);
        }
    }

    #[test]
    fn authoritative_by_in_degree_within_decile() {
        let g = graph(4, &[(1, 0, 1), (2, 0, 1), (3, 1, 1)]);
        let deciles = vec![Some(1), Some(1), Some(2), Some(2)];
        let auth = authoritative_nodes(&g, &deciles, Authoritative::Count(1));
        assert_eq!(auth, vec![true, false, true, false]);
        let auth = authoritative_nodes(&g, &deciles, Authoritative::Fraction(0.04));
        assert_eq!(auth.iter().filter(|&&x| x).count(), 2);
    }

    #[test]
    fn deterministic_across_runs() {
        let g = graph(5, &[(0, 1, 2), (1, 2, 1), (2, 3, 5), (3, 4, 1), (4, 0, 1), (1, 4, 3)]);
        let deciles = vec![Some(1), Some(2), Some(2), Some(9), Some(10)];
        let auth = vec![false; 5];
        let a = rwc_with_assignment(&g, &deciles, &auth, &cfg(2000)).unwrap();
        let b = rwc_with_assignment(&g, &deciles, &auth, &cfg(2000)).unwrap();
        assert_eq!(a, b);
    }
}
