// SPDX-License-Identifier: Apache-2.0

//! Representation training: every retweet edge `(i, j)` is a positive pair
//! whose profile embeddings are pulled together, against negatives drawn
//! either uniformly from non-neighbors (one-neg) or from the other positives
//! of the same batch (mult-neg).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{mean_rows, EncoderModel};
use super::triplet::{euclidean, unit_diff};
use super::vocab::{tokenize, Vocabulary};
use super::{Sampling, TrainConfig};
use crate::error::{invalid, Result};
use crate::graph::InteractionGraph;
use crate::util::{derive_seed, rng_from_seed};

const MAX_NEGATIVE_TRIES: usize = 100;

/// One positive pair and the negatives it is contrasted against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchItem {
    pub anchor: usize,
    pub positive: usize,
    pub negatives: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean batch objective per epoch.
    pub epoch_losses: Vec<f64>,
    pub pairs_per_epoch: usize,
    /// Pairs dropped because no valid one-neg negative was found.
    pub skipped_pairs: usize,
}

/// Batch objective `(1/B) Σ_items Σ_negatives hinge` and its gradient with
/// respect to the embedding table, accumulated into `grad` (which must be
/// zeroed by the caller and have the table's length).
pub fn batch_objective(
    table: &[f64],
    dim: usize,
    node_tokens: &[Vec<usize>],
    batch: &[BatchItem],
    margin: f64,
    grad: &mut [f64],
) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let mut emb: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for item in batch {
        for &v in std::iter::once(&item.anchor)
            .chain(std::iter::once(&item.positive))
            .chain(&item.negatives)
        {
            emb.entry(v).or_insert_with(|| mean_rows(table, dim, &node_tokens[v]));
        }
    }
    let mut node_grad: BTreeMap<usize, Vec<f64>> = emb.keys().map(|&v| (v, vec![0.0; dim])).collect();
    let mut loss = 0.0;
    for item in batch {
        let a = &emb[&item.anchor];
        let p = &emb[&item.positive];
        let dp = euclidean(a, p);
        let up = unit_diff(a, p, dp);
        let mut ga = vec![0.0; dim];
        let mut active = 0usize;
        for &k in &item.negatives {
            let n = &emb[&k];
            let dn = euclidean(a, n);
            let raw = dp - dn + margin;
            if raw <= 0.0 {
                continue;
            }
            loss += raw;
            active += 1;
            let un = unit_diff(a, n, dn);
            for (g, u) in ga.iter_mut().zip(&un) {
                *g -= u;
            }
            let gk = node_grad.get_mut(&k).expect("negative embedded");
            for (g, u) in gk.iter_mut().zip(&un) {
                *g += u;
            }
        }
        if active > 0 {
            let c = active as f64;
            for (g, u) in ga.iter_mut().zip(&up) {
                *g += c * u;
            }
            let gp = node_grad.get_mut(&item.positive).expect("positive embedded");
            for (g, u) in gp.iter_mut().zip(&up) {
                *g -= c * u;
            }
        }
        let g_anchor = node_grad.get_mut(&item.anchor).expect("anchor embedded");
        for (g, x) in g_anchor.iter_mut().zip(&ga) {
            *g += x;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for (v, g) in &node_grad {
        let tokens = &node_tokens[*v];
        if tokens.is_empty() {
            continue;
        }
        let share = scale / tokens.len() as f64;
        for &t in tokens {
            for (dst, x) in grad[t * dim..(t + 1) * dim].iter_mut().zip(g) {
                *dst += share * x;
            }
        }
    }
    loss * scale
}

/// Encoded token lists for every graph node, in node-index order.
pub fn node_token_lists(g: &InteractionGraph, profiles: &BTreeMap<String, String>) -> Result<Vec<Vec<String>>> {
    g.ids()
        .iter()
        .map(|id| {
            profiles
                .get(id)
                .map(|p| tokenize(p))
                .ok_or_else(|| invalid(format!("no profile for node `{id}`")))
        })
        .collect()
}

/// Trains the embedding table. The head is left at zero.
pub fn train_retweet_bert(
    g: &InteractionGraph,
    profiles: &BTreeMap<String, String>,
    cfg: &TrainConfig,
) -> Result<(EncoderModel, TrainReport)> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(invalid("cannot train on an empty graph"));
    }
    let pairs: Vec<(usize, usize)> = g.edges().filter(|&(u, v, _)| u != v).map(|(u, v, _)| (u, v)).collect();
    if pairs.is_empty() {
        return Err(invalid("graph has no edges to train on"));
    }
    let token_lists = node_token_lists(g, profiles)?;
    let vocab = Vocabulary::build(token_lists.iter().map(Vec::as_slice), cfg.min_frequency);
    let node_tokens: Vec<Vec<usize>> = token_lists.iter().map(|t| vocab.encode(t)).collect();
    let mut model = EncoderModel::init(vocab, cfg.dim, derive_seed(cfg.rng_seed, 1))?;
    let neighbors: Vec<Vec<usize>> = (0..g.node_count())
        .map(|u| g.undirected_neighbors(u).into_iter().map(|(v, _)| v).collect())
        .collect();

    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, 2));
    let mut order = pairs;
    let mut report = TrainReport {
        pairs_per_epoch: order.len(),
        ..TrainReport::default()
    };
    let dim = cfg.dim;
    let mut grad = vec![0.0; model.table().len()];
    let n = g.node_count();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let items: Vec<BatchItem> = match cfg.sampling {
                Sampling::OneNeg => chunk
                    .iter()
                    .filter_map(|&(i, j)| {
                        let k = sample_negative(&mut rng, n, i, j, &neighbors[i]);
                        if k.is_none() {
                            report.skipped_pairs += 1;
                        }
                        k.map(|k| BatchItem {
                            anchor: i,
                            positive: j,
                            negatives: vec![k],
                        })
                    })
                    .collect(),
                Sampling::MultNeg => chunk
                    .iter()
                    .enumerate()
                    .map(|(t, &(i, j))| BatchItem {
                        anchor: i,
                        positive: j,
                        negatives: chunk
                            .iter()
                            .enumerate()
                            .filter(|&(t2, _)| t2 != t)
                            .map(|(_, &(_, j2))| j2)
                            .collect(),
                    })
                    .collect(),
            };
            grad.iter_mut().for_each(|x| *x = 0.0);
            epoch_loss += batch_objective(model.table(), dim, &node_tokens, &items, cfg.margin, &mut grad);
            batches += 1;
            for (w, gx) in model.table_mut().iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * gx;
            }
        }
        report.epoch_losses.push(epoch_loss / batches.max(1) as f64);
    }
    Ok((model, report))
}

/// Uniform node that is neither endpoint nor a neighbor of the anchor.
fn sample_negative<R: Rng>(rng: &mut R, n: usize, i: usize, j: usize, anchor_neighbors: &[usize]) -> Option<usize> {
    for _ in 0..MAX_NEGATIVE_TRIES {
        let k = rng.random_range(0..n);
        if k != i && k != j && anchor_neighbors.binary_search(&k).is_err() {
            return Some(k);
        }
    }
    None
}
