// SPDX-License-Identifier: Apache-2.0

//! Users with the most unique retweeters from each partisan side.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::InteractionGraph;
use crate::polarity::{PartisanGroup, PolarityTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularUser {
    pub user_id: String,
    /// 1-based rank by total unique retweeters over the whole graph.
    pub global_rank: usize,
    pub retweeters: usize,
    pub left: usize,
    pub neutral: usize,
    pub right: usize,
    pub other: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularLists {
    pub k: usize,
    pub left: Vec<PopularUser>,
    pub right: Vec<PopularUser>,
}

/// Ranks users by their unique LeftGroup and, separately, RightGroup
/// retweeters. Users with no retweeters from a side are left out of that
/// side's list. Ties go to the smaller user id.
pub fn popular_users(retweet: &InteractionGraph, polarity: &PolarityTable, k: usize) -> Result<PopularLists> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let rows: Vec<PopularUser> = (0..retweet.node_count())
        .map(|v| {
            let retweeters: BTreeSet<usize> = retweet.in_edges(v).iter().map(|&(u, _)| u).collect();
            let mut row = PopularUser {
                user_id: retweet.id(v).to_string(),
                global_rank: 0,
                retweeters: retweeters.len(),
                left: 0,
                neutral: 0,
                right: 0,
                other: 0,
            };
            for u in retweeters {
                match polarity.group(retweet.id(u)).unwrap_or(PartisanGroup::Other) {
                    PartisanGroup::LeftGroup => row.left += 1,
                    PartisanGroup::NeutralGroup => row.neutral += 1,
                    PartisanGroup::RightGroup => row.right += 1,
                    PartisanGroup::Other => row.other += 1,
                }
            }
            row
        })
        .collect();

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[b].retweeters.cmp(&rows[a].retweeters).then_with(|| rows[a].user_id.cmp(&rows[b].user_id)));
    let mut rows = rows;
    for (rank, &i) in order.iter().enumerate() {
        rows[i].global_rank = rank + 1;
    }

    let top = |key: fn(&PopularUser) -> usize| -> Vec<PopularUser> {
        let mut side: Vec<&PopularUser> = rows.iter().filter(|r| key(r) > 0).collect();
        side.sort_by(|a, b| key(b).cmp(&key(a)).then_with(|| a.user_id.cmp(&b.user_id)));
        side.into_iter().take(k).cloned().collect()
    };
    Ok(PopularLists {
        k,
        left: top(|r| r.left),
        right: top(|r| r.right),
    })
}

impl PopularLists {
    /// Header: `side,rank,user_id,global_rank,retweeters,left,neutral,right,other`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["side", "rank", "user_id", "global_rank", "retweeters", "left", "neutral", "right", "other"])?;
        for (side, list) in [("left", &self.left), ("right", &self.right)] {
            for (i, u) in list.iter().enumerate() {
                wtr.write_record([
                    side.to_string(),
                    (i + 1).to_string(),
                    u.user_id.clone(),
                    u.global_rank.to_string(),
                    u.retweeters.to_string(),
                    u.left.to_string(),
                    u.neutral.to_string(),
                    u.right.to_string(),
                    u.other.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}
