// SPDX-License-Identifier: Apache-2.0

//! Two-stage fitting (embedding table, then head) and the cross-validated
//! comparison against label propagation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::eval::{cross_validate_auc, CvResult};
use super::head::{train_head, HeadConfig};
use super::labelprop::label_propagation;
use super::model::EncoderModel;
use super::train::{train_retweet_bert, TrainReport};
use super::TrainConfig;
use crate::error::{invalid, Result};
use crate::graph::InteractionGraph;
use crate::seeding::SeedLabelTable;

pub const LP_TOLERANCE: f64 = 1e-9;
pub const LP_MAX_ITER: usize = 10_000;

/// Seed users present in `g`, as `(node, label)` with Left = 0, Right = 1,
/// in node order.
pub fn seed_nodes(g: &InteractionGraph, seeds: &SeedLabelTable) -> Vec<(usize, u8)> {
    (0..g.node_count())
        .filter_map(|u| seeds.get(g.id(u)).map(|s| (u, s.label.as_binary())))
        .collect()
}

fn embeddings(model: &EncoderModel, g: &InteractionGraph, profiles: &BTreeMap<String, String>) -> Vec<Vec<f64>> {
    g.ids()
        .iter()
        .map(|id| model.embed_text(profiles.get(id).map_or("", String::as_str)))
        .collect()
}

/// Trains the embedding table on retweet pairs, then fits the head on every
/// seed user in the graph.
pub fn fit_polarity_model(
    g: &InteractionGraph,
    profiles: &BTreeMap<String, String>,
    seeds: &SeedLabelTable,
    train_cfg: &TrainConfig,
    head_cfg: &HeadConfig,
) -> Result<(EncoderModel, TrainReport)> {
    let (mut model, report) = train_retweet_bert(g, profiles, train_cfg)?;
    let labelled = seed_nodes(g, seeds);
    if labelled.is_empty() {
        return Err(invalid("no seed users in the retweet graph"));
    }
    let emb = embeddings(&model, g, profiles);
    let xs: Vec<Vec<f64>> = labelled.iter().map(|&(u, _)| emb[u].clone()).collect();
    let ys: Vec<u8> = labelled.iter().map(|&(_, y)| y).collect();
    model.head = train_head(&xs, &ys, head_cfg)?.head;
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: usize,
    pub seeds_evaluated: usize,
    pub retweet_bert: CvResult,
    pub label_propagation: CvResult,
    /// Held-out seeds label propagation could not reach (scored 0.5).
    pub lp_unpredicted: usize,
    /// Nodes without a path to any seed when every seed is clamped.
    pub lp_unreachable: Vec<String>,
    pub train: TrainReport,
}

/// k-fold comparison on the seed users in `g`. The embedding table is
/// trained once without labels; each fold refits the head on its training
/// seeds. Label propagation is clamped on the same training seeds.
pub fn evaluate_methods(
    g: &InteractionGraph,
    profiles: &BTreeMap<String, String>,
    seeds: &SeedLabelTable,
    train_cfg: &TrainConfig,
    head_cfg: &HeadConfig,
    folds: usize,
    cv_seed: u64,
) -> Result<EvalReport> {
    let labelled = seed_nodes(g, seeds);
    let labels: Vec<u8> = labelled.iter().map(|&(_, y)| y).collect();
    let (model, train) = train_retweet_bert(g, profiles, train_cfg)?;
    let emb = embeddings(&model, g, profiles);

    let retweet_bert = cross_validate_auc(&labels, folds, cv_seed, |tr, te| {
        let xs: Vec<Vec<f64>> = tr.iter().map(|&i| emb[labelled[i].0].clone()).collect();
        let ys: Vec<u8> = tr.iter().map(|&i| labels[i]).collect();
        let head = train_head(&xs, &ys, head_cfg)?.head;
        Ok(te.iter().map(|&i| head.score(&emb[labelled[i].0])).collect())
    })?;

    let mut lp_unpredicted = 0;
    let lp_cv = cross_validate_auc(&labels, folds, cv_seed, |tr, te| {
        let clamp: BTreeMap<usize, f64> = tr.iter().map(|&i| (labelled[i].0, labels[i] as f64)).collect();
        let p = label_propagation(g, &clamp, LP_TOLERANCE, LP_MAX_ITER)?;
        Ok(te
            .iter()
            .map(|&i| {
                p.values[labelled[i].0].unwrap_or_else(|| {
                    lp_unpredicted += 1;
                    0.5
                })
            })
            .collect())
    })?;

    let all: BTreeMap<usize, f64> = labelled.iter().map(|&(u, y)| (u, y as f64)).collect();
    let full = label_propagation(g, &all, LP_TOLERANCE, LP_MAX_ITER)?;
    let lp_unreachable = (0..g.node_count())
        .filter(|&u| full.values[u].is_none())
        .map(|u| g.id(u).to_string())
        .collect();

    Ok(EvalReport {
        folds,
        seeds_evaluated: labelled.len(),
        retweet_bert,
        label_propagation: lp_cv,
        lp_unpredicted,
        lp_unreachable,
        train,
    })
}
