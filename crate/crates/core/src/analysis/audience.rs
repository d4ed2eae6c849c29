// SPDX-License-Identifier: Apache-2.0

//! Partisan composition of the retweeters of each polarity decile.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::InteractionGraph;
use crate::ingest::UserRecord;
use crate::polarity::{PartisanGroup, PolarityTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifiedSplit {
    All,
    Verified,
    Unverified,
}

impl VerifiedSplit {
    fn admits(self, verified: bool) -> bool {
        match self {
            VerifiedSplit::All => true,
            VerifiedSplit::Verified => verified,
            VerifiedSplit::Unverified => !verified,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerifiedSplit::All => "all",
            VerifiedSplit::Verified => "verified",
            VerifiedSplit::Unverified => "unverified",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupShares {
    pub left: f64,
    pub neutral: f64,
    pub right: f64,
    pub other: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudienceCell {
    pub decile: u8,
    pub split: VerifiedSplit,
    /// Retweeter tally (unique users, or summed edge weights when weighted).
    pub total: f64,
    /// `None` when nobody retweeted users of this cell.
    pub shares: Option<GroupShares>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudienceReport {
    pub weighted: bool,
    pub cells: Vec<AudienceCell>,
}

/// Retweeters of `v` are its in-neighbors. For each decile the retweeters of
/// all its members are pooled (as a set, or with multiplicity by edge
/// weight when `weighted`) and split by their own partisan group.
///
/// With `by_verified`, cells are also computed for verified and unverified
/// retweeted users separately; `users` supplies the flag.
pub fn audience_distribution(
    retweet: &InteractionGraph,
    polarity: &PolarityTable,
    users: &BTreeMap<String, UserRecord>,
    by_verified: bool,
    weighted: bool,
) -> AudienceReport {
    let splits: &[VerifiedSplit] = if by_verified {
        &[VerifiedSplit::All, VerifiedSplit::Verified, VerifiedSplit::Unverified]
    } else {
        &[VerifiedSplit::All]
    };
    let group_of = |node: usize| polarity.group(retweet.id(node)).unwrap_or(PartisanGroup::Other);
    let mut cells = Vec::new();
    for &split in splits {
        for decile in 1..=10u8 {
            let members = polarity.entries().iter().filter(|e| {
                e.decile == decile && split.admits(users.get(&e.user_id).is_some_and(|u| u.verified))
            });
            let mut tally: BTreeMap<PartisanGroup, f64> = BTreeMap::new();
            if weighted {
                for e in members {
                    if let Some(v) = retweet.node(&e.user_id) {
                        for &(u, w) in retweet.in_edges(v) {
                            *tally.entry(group_of(u)).or_insert(0.0) += w as f64;
                        }
                    }
                }
            } else {
                let mut retweeters = BTreeSet::new();
                for e in members {
                    if let Some(v) = retweet.node(&e.user_id) {
                        retweeters.extend(retweet.in_edges(v).iter().map(|&(u, _)| u));
                    }
                }
                for u in retweeters {
                    *tally.entry(group_of(u)).or_insert(0.0) += 1.0;
                }
            }
            let total: f64 = tally.values().sum();
            let share = |g| tally.get(&g).copied().unwrap_or(0.0) / total;
            let shares = (total > 0.0).then(|| GroupShares {
                left: share(PartisanGroup::LeftGroup),
                neutral: share(PartisanGroup::NeutralGroup),
                right: share(PartisanGroup::RightGroup),
                other: share(PartisanGroup::Other),
            });
            cells.push(AudienceCell {
                decile,
                split,
                total,
                shares,
            });
        }
    }
    AudienceReport { weighted, cells }
}

impl AudienceReport {
    pub fn cell(&self, decile: u8, split: VerifiedSplit) -> Option<&AudienceCell> {
        self.cells.iter().find(|c| c.decile == decile && c.split == split)
    }

    /// Header: `decile,split,total,left,neutral,right,other`; empty cells
    /// leave the shares blank.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["decile", "split", "total", "left", "neutral", "right", "other"])?;
        for c in &self.cells {
            let mut row = vec![c.decile.to_string(), c.split.as_str().to_string(), c.total.to_string()];
            match c.shares {
                Some(s) => row.extend([s.left, s.neutral, s.right, s.other].map(|x| x.to_string())),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
