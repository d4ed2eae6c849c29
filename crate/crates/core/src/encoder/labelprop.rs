// SPDX-License-Identifier: Apache-2.0

//! Label propagation baseline over the symmetrized weighted graph.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::InteractionGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    /// `None` for nodes with no path to any seed.
    pub values: Vec<Option<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Seeds stay clamped; every other reachable node repeatedly takes the
/// weighted mean of its neighbors (Jacobi sweeps, reachable non-seeds start
/// at 0.5) until the largest change drops below `tol`.
pub fn label_propagation(
    g: &InteractionGraph,
    seeds: &BTreeMap<usize, f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Propagation> {
    if seeds.is_empty() {
        return Err(invalid("label propagation needs at least one seed"));
    }
    let n = g.node_count();
    if let Some((&bad, _)) = seeds.iter().find(|(&v, _)| v >= n) {
        return Err(invalid(format!("seed node {bad} out of range")));
    }
    let nbrs: Vec<Vec<(usize, u64)>> = (0..n).map(|u| g.undirected_neighbors(u)).collect();

    let mut reachable = vec![false; n];
    let mut queue: VecDeque<usize> = seeds.keys().copied().collect();
    for &s in seeds.keys() {
        reachable[s] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &nbrs[u] {
            if !reachable[v] {
                reachable[v] = true;
                queue.push_back(v);
            }
        }
    }

    let mut values: Vec<f64> = (0..n).map(|u| seeds.get(&u).copied().unwrap_or(0.5)).collect();
    let free: Vec<usize> = (0..n).filter(|u| reachable[*u] && !seeds.contains_key(u)).collect();
    let mut iterations = 0;
    let mut converged = free.is_empty();
    let mut next = values.clone();
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for &u in &free {
            let (num, den) = nbrs[u]
                .iter()
                .fold((0.0, 0.0), |(num, den), &(v, w)| (num + w as f64 * values[v], den + w as f64));
            next[u] = num / den;
            delta = delta.max((next[u] - values[u]).abs());
        }
        std::mem::swap(&mut values, &mut next);
        next.copy_from_slice(&values);
        converged = delta < tol;
    }
    Ok(Propagation {
        values: (0..n).map(|u| reachable[u].then_some(values[u])).collect(),
        iterations,
        converged,
    })
}
