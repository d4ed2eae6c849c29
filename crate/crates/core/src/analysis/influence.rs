// SPDX-License-Identifier: Apache-2.0

//! Share of each polarity decile that is verified or among the globally most
//! influential users.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Direction, InteractionGraph, PageRankVector};
use crate::ingest::UserRecord;
use crate::polarity::PolarityTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRow {
    pub decile: u8,
    pub size: usize,
    pub verified: f64,
    pub followers: f64,
    pub retweet_in_degree: f64,
    pub mention_in_degree: f64,
    pub pagerank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub top_fraction: f64,
    pub top_k: usize,
    pub rows: Vec<InfluenceRow>,
}

/// The `k` users with the largest values, ties broken by ascending user id.
pub fn top_k_users(values: &BTreeMap<&str, f64>, k: usize) -> BTreeSet<String> {
    let mut v: Vec<(&str, f64)> = values.iter().map(|(id, x)| (*id, *x)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter().take(k).map(|(id, _)| id.to_string()).collect()
}

/// `k = ceil(top_fraction * n)` over the users in `polarity`. Degrees are
/// weighted in-degrees; `pagerank` must be indexed like `retweet`.
pub fn influence_report(
    users: &BTreeMap<String, UserRecord>,
    polarity: &PolarityTable,
    retweet: &InteractionGraph,
    mention: &InteractionGraph,
    pagerank: &PageRankVector,
    top_fraction: f64,
) -> Result<InfluenceReport> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(invalid(format!("top_fraction {top_fraction} outside (0,1)")));
    }
    if pagerank.values.len() != retweet.node_count() {
        return Err(invalid("PageRank vector does not match the retweet graph"));
    }
    let n = polarity.len();
    let k = (top_fraction * n as f64).ceil() as usize;
    let ids: Vec<&str> = polarity.entries().iter().map(|e| e.user_id.as_str()).collect();
    let in_degree = |g: &InteractionGraph, id: &str| {
        g.node(id).map_or(0.0, |u| g.degree_of(u, Direction::In, true) as f64)
    };
    let measure = |f: &dyn Fn(&str) -> f64| -> BTreeSet<String> {
        let values: BTreeMap<&str, f64> = ids.iter().map(|&id| (id, f(id))).collect();
        top_k_users(&values, k)
    };
    let top_followers = measure(&|id| users.get(id).map_or(0.0, |u| u.followers as f64));
    let top_rt = measure(&|id| in_degree(retweet, id));
    let top_mention = measure(&|id| in_degree(mention, id));
    let top_pr = measure(&|id| retweet.node(id).map_or(0.0, |u| pagerank.values[u]));

    let mut rows = Vec::with_capacity(10);
    for decile in 1..=10u8 {
        let members: Vec<&str> = polarity
            .entries()
            .iter()
            .filter(|e| e.decile == decile)
            .map(|e| e.user_id.as_str())
            .collect();
        let size = members.len();
        let share = |pred: &dyn Fn(&str) -> bool| {
            if size == 0 {
                0.0
            } else {
                members.iter().filter(|id| pred(id)).count() as f64 / size as f64
            }
        };
        rows.push(InfluenceRow {
            decile,
            size,
            verified: share(&|id| users.get(id).is_some_and(|u| u.verified)),
            followers: share(&|id| top_followers.contains(id)),
            retweet_in_degree: share(&|id| top_rt.contains(id)),
            mention_in_degree: share(&|id| top_mention.contains(id)),
            pagerank: share(&|id| top_pr.contains(id)),
        });
    }
    Ok(InfluenceReport {
        top_fraction,
        top_k: k,
        rows,
    })
}

impl InfluenceReport {
    /// Header: `decile,size,verified,followers,retweet_in_degree,mention_in_degree,pagerank`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
