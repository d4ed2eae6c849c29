// SPDX-License-Identifier: Apache-2.0

//! Weighted directed interaction networks (retweet and mention), structural
//! filters, PageRank and edge-list CSV import/export.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ingest::{filter_users, top_bot_users, Gazetteer, RemovalReason, TweetRecord, UserRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Retweet,
    Mention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneMode {
    /// Remove a node only when both its in- and out-degree are below the threshold.
    #[default]
    BothBelow,
    /// Remove a node when either degree is below the threshold.
    EitherBelow,
}

/// Directed graph over dense node indices. Edge `(u, v)` with weight `w`
/// means `u` interacted with `v` (retweeted or mentioned) `w` times.
///
/// Adjacency lists are sorted by neighbor index; `in_adj` is the transpose of
/// `out_adj`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    kind: GraphKind,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    out_adj: Vec<Vec<(usize, u64)>>,
    in_adj: Vec<Vec<(usize, u64)>>,
    edge_count: usize,
    self_loops: usize,
}

/// Per-pair interaction tallies keyed by `(source user, target user)`.
pub type PairCounts = BTreeMap<(String, String), u64>;

/// Tallies interactions of one kind. Retweet edges come from retweets only;
/// mention edges come from every mentioned user id plus the retweeted or
/// quoted user when not already listed among the mentions.
pub fn interaction_counts<'a, I>(records: I, kind: GraphKind) -> PairCounts
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    use crate::ingest::TweetKind;
    let mut counts = PairCounts::new();
    for r in records {
        match kind {
            GraphKind::Retweet => {
                if r.kind == TweetKind::Retweet {
                    if let Some(target) = &r.retweeted_user_id {
                        *counts.entry((r.user_id.clone(), target.clone())).or_insert(0) += 1;
                    }
                }
            }
            GraphKind::Mention => {
                for m in &r.mentioned_user_ids {
                    *counts.entry((r.user_id.clone(), m.clone())).or_insert(0) += 1;
                }
                if let Some(target) = &r.retweeted_user_id {
                    if !r.mentioned_user_ids.contains(target) {
                        *counts.entry((r.user_id.clone(), target.clone())).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    counts
}

/// Builds the graph over `retained` users from raw records.
pub fn build_graph<'a, I>(
    records: I,
    retained: &BTreeSet<String>,
    kind: GraphKind,
    min_weight: u64,
) -> Result<InteractionGraph>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    build_from_counts(&interaction_counts(records, kind), retained, kind, min_weight)
}

/// Builds the graph over `retained` users from pre-tallied pair counts. Every
/// retained user becomes a node, even without edges; pairs touching a
/// non-retained user or weighing less than `min_weight` are dropped.
pub fn build_from_counts(
    counts: &PairCounts,
    retained: &BTreeSet<String>,
    kind: GraphKind,
    min_weight: u64,
) -> Result<InteractionGraph> {
    if min_weight < 1 {
        return Err(invalid("min_weight must be at least 1"));
    }
    let ids: Vec<String> = retained.iter().cloned().collect();
    let mut g = InteractionGraph::with_nodes(kind, ids);
    let mut edges = Vec::new();
    for ((src, dst), &w) in counts {
        if w < min_weight {
            continue;
        }
        if let (Some(&u), Some(&v)) = (g.index.get(src), g.index.get(dst)) {
            edges.push((u, v, w));
        }
    }
    g.set_edges(edges);
    Ok(g)
}

impl InteractionGraph {
    fn with_nodes(kind: GraphKind, ids: Vec<String>) -> InteractionGraph {
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = ids.len();
        InteractionGraph {
            kind,
            ids,
            index,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            edge_count: 0,
            self_loops: 0,
        }
    }

    /// Duplicate `(u, v)` entries have their weights summed.
    fn set_edges(&mut self, mut edges: Vec<(usize, usize, u64)>) {
        edges.sort_unstable();
        let n = self.ids.len();
        let mut out_adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            match out_adj[u].last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => out_adj[u].push((v, w)),
            }
        }
        let mut in_adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (u, nbrs) in out_adj.iter().enumerate() {
            for &(v, w) in nbrs {
                in_adj[v].push((u, w));
            }
        }
        self.edge_count = out_adj.iter().map(Vec::len).sum();
        self.self_loops = out_adj
            .iter()
            .enumerate()
            .filter(|(u, nbrs)| nbrs.iter().any(|&(v, _)| v == *u))
            .count();
        self.out_adj = out_adj;
        self.in_adj = in_adj;
    }

    /// Builds a graph directly from user ids and `(src, dst, weight)` edges.
    pub fn from_edges(
        kind: GraphKind,
        ids: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<InteractionGraph> {
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id) {
                return Err(invalid(format!("duplicate node `{id}`")));
            }
        }
        let n = ids.len();
        let edges: Vec<_> = edges.into_iter().collect();
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) out of range")));
            }
            if w == 0 {
                return Err(invalid("edge weight must be positive"));
            }
        }
        let mut g = InteractionGraph::with_nodes(kind, ids);
        g.set_edges(edges);
        Ok(g)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of nodes carrying a self-loop.
    pub fn self_loop_count(&self) -> usize {
        self.self_loops
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn out_edges(&self, node: usize) -> &[(usize, u64)] {
        &self.out_adj[node]
    }

    pub fn in_edges(&self, node: usize) -> &[(usize, u64)] {
        &self.in_adj[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().map(move |&(v, w)| (u, v, w)))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn degree_of(&self, node: usize, direction: Direction, weighted: bool) -> u64 {
        let adj = match direction {
            Direction::In => &self.in_adj[node],
            Direction::Out => &self.out_adj[node],
        };
        if weighted {
            adj.iter().map(|&(_, w)| w).sum()
        } else {
            adj.len() as u64
        }
    }

    /// Symmetrized weighted neighborhood: `w(u,v) + w(v,u)` per neighbor,
    /// self-loops excluded, sorted by neighbor index.
    pub fn undirected_neighbors(&self, node: usize) -> Vec<(usize, u64)> {
        let mut merged: Vec<(usize, u64)> = Vec::with_capacity(self.out_adj[node].len() + self.in_adj[node].len());
        let (mut a, mut b) = (self.out_adj[node].iter().peekable(), self.in_adj[node].iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(&&(x, wx)), Some(&&(y, wy))) => {
                    if x == y {
                        a.next();
                        b.next();
                        (x, wx + wy)
                    } else if x < y {
                        a.next();
                        (x, wx)
                    } else {
                        b.next();
                        (y, wy)
                    }
                }
                (Some(&&e), None) => {
                    a.next();
                    e
                }
                (None, Some(&&e)) => {
                    b.next();
                    e
                }
                (None, None) => break,
            };
            if next.0 != node {
                merged.push(next);
            }
        }
        merged
    }

    /// Subgraph induced by the nodes whose ids are in `keep`. Surviving nodes
    /// keep their relative order.
    pub fn induced(&self, keep: &BTreeSet<String>) -> InteractionGraph {
        let ids: Vec<String> = self.ids.iter().filter(|id| keep.contains(*id)).cloned().collect();
        let mut g = InteractionGraph::with_nodes(self.kind, ids);
        let edges: Vec<_> = self
            .edges()
            .filter_map(|(u, v, w)| {
                let nu = g.index.get(&self.ids[u])?;
                let nv = g.index.get(&self.ids[v])?;
                Some((*nu, *nv, w))
            })
            .collect();
        g.set_edges(edges);
        g
    }
}

/// Unweighted in/out degree (number of distinct neighbors) or weighted
/// degree (sum of edge weights) of the node named `id`.
pub fn degree(g: &InteractionGraph, id: &str, direction: Direction, weighted: bool) -> Result<u64> {
    let node = g.node(id).ok_or_else(|| Error::UnknownNode(id.to_string()))?;
    Ok(g.degree_of(node, direction, weighted))
}

/// Single pass: degrees are read off `g` once, then every flagged node and its
/// incident edges are removed together.
pub fn prune_low_degree(g: &InteractionGraph, threshold: u64, mode: PruneMode) -> InteractionGraph {
    let keep: BTreeSet<String> = (0..g.node_count())
        .filter(|&u| {
            let low_in = g.degree_of(u, Direction::In, false) < threshold;
            let low_out = g.degree_of(u, Direction::Out, false) < threshold;
            let remove = match mode {
                PruneMode::BothBelow => low_in && low_out,
                PruneMode::EitherBelow => low_in || low_out,
            };
            !remove
        })
        .map(|u| g.ids[u].clone())
        .collect();
    g.induced(&keep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub min_weight: u64,
    pub mention_min_weight: u64,
    pub degree_threshold: u64,
    pub prune_mode: PruneMode,
    pub bot_fraction: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_weight: 2,
            mention_min_weight: 1,
            degree_threshold: 10,
            prune_mode: PruneMode::BothBelow,
            bot_fraction: 0.10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub retweet: InteractionGraph,
    pub mention: InteractionGraph,
    pub removed: BTreeMap<String, RemovalReason>,
}

impl Preprocessed {
    pub fn retained(&self) -> BTreeSet<String> {
        self.retweet.ids().iter().cloned().collect()
    }
}

/// Applies the user and structural filters in order: location, edge weight,
/// empty profile, degree, then bot score among the users still present. The
/// mention graph is built over the final user set.
pub fn preprocess(
    records: &[TweetRecord],
    users: &BTreeMap<String, UserRecord>,
    gaz: &Gazetteer,
    cfg: &PreprocessConfig,
) -> Result<Preprocessed> {
    let base = filter_users(users.values(), gaz, 0.0)?;
    if !(0.0..1.0).contains(&cfg.bot_fraction) {
        return Err(invalid(format!("bot_fraction {} outside [0,1)", cfg.bot_fraction)));
    }
    let mut removed = base.removed;
    let full = build_graph(records, &base.retained, GraphKind::Retweet, cfg.min_weight)?;
    let pruned = prune_low_degree(&full, cfg.degree_threshold, cfg.prune_mode);
    for id in full.ids() {
        if pruned.node(id).is_none() {
            removed.insert(id.clone(), RemovalReason::LowDegree);
        }
    }
    let bots = top_bot_users(pruned.ids().iter().filter_map(|id| users.get(id)), cfg.bot_fraction);
    for id in &bots {
        removed.insert(id.clone(), RemovalReason::BotScore);
    }
    let keep: BTreeSet<String> = pruned.ids().iter().filter(|id| !bots.contains(*id)).cloned().collect();
    let retweet = pruned.induced(&keep);
    let mention = build_graph(records, &keep, GraphKind::Mention, cfg.mention_min_weight)?;
    Ok(Preprocessed {
        retweet,
        mention,
        removed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankVector {
    pub values: Vec<f64>,
    pub damping: f64,
    pub iterations: usize,
    /// L1 change of the final iteration.
    pub residual: f64,
    pub converged: bool,
}

/// Power iteration with weight-normalized out-edges, uniform teleport and
/// dangling mass spread uniformly.
pub fn pagerank(g: &InteractionGraph, damping: f64, tol: f64, max_iter: usize) -> Result<PageRankVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(invalid(format!("damping {damping} outside (0,1)")));
    }
    let out_weight: Vec<f64> = (0..n).map(|u| g.degree_of(u, Direction::Out, true) as f64).collect();
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&u| out_weight[u] == 0.0).map(|u| rank[u]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (u, &ow) in out_weight.iter().enumerate() {
            if ow == 0.0 {
                continue;
            }
            let share = damping * rank[u] / ow;
            for &(v, w) in g.out_edges(u) {
                next[v] += share * w as f64;
            }
        }
        // renormalize away floating drift
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < tol {
            break;
        }
    }
    Ok(PageRankVector {
        values: rank,
        damping,
        iterations,
        residual,
        converged: residual < tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub user_id: String,
    pub index: usize,
    pub verified: bool,
    pub followers: u64,
    pub bot_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeRow {
    src_user_id: String,
    dst_user_id: String,
    weight: u64,
}

/// Writes `src_user_id,dst_user_id,weight` rows in adjacency order.
pub fn write_edges_csv<W: Write>(g: &InteractionGraph, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for (u, v, weight) in g.edges() {
        wtr.serialize(EdgeRow {
            src_user_id: g.ids[u].clone(),
            dst_user_id: g.ids[v].clone(),
            weight,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `user_id,index,verified,followers,bot_score`; metadata for users
/// missing from `users` is written as defaults.
pub fn write_nodes_csv<W: Write>(g: &InteractionGraph, users: &BTreeMap<String, UserRecord>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for (index, id) in g.ids.iter().enumerate() {
        let u = users.get(id);
        wtr.serialize(NodeRow {
            user_id: id.clone(),
            index,
            verified: u.is_some_and(|u| u.verified),
            followers: u.map_or(0, |u| u.followers),
            bot_score: u.map_or(0.0, |u| u.bot_score),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a graph back from its node and edge CSVs. Node indices must be a
/// permutation of `0..n`.
pub fn read_graph_csv<R1: Read, R2: Read>(
    kind: GraphKind,
    nodes: R1,
    edges: R2,
) -> Result<(InteractionGraph, Vec<NodeRow>)> {
    let mut rows: Vec<NodeRow> = csv::Reader::from_reader(nodes)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.index);
    if rows.iter().enumerate().any(|(i, r)| r.index != i) {
        return Err(invalid("node indices are not a permutation of 0..n"));
    }
    let ids: Vec<String> = rows.iter().map(|r| r.user_id.clone()).collect();
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut edge_list = Vec::new();
    for row in csv::Reader::from_reader(edges).deserialize() {
        let row: EdgeRow = row?;
        let u = *index
            .get(row.src_user_id.as_str())
            .ok_or_else(|| Error::UnknownNode(row.src_user_id.clone()))?;
        let v = *index
            .get(row.dst_user_id.as_str())
            .ok_or_else(|| Error::UnknownNode(row.dst_user_id.clone()))?;
        edge_list.push((u, v, row.weight));
    }
    let g = InteractionGraph::from_edges(kind, ids, edge_list)?;
    Ok((g, rows))
}
