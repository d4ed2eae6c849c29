// SPDX-License-Identifier: Apache-2.0

//! Activity and reach statistics of partisan groups, split by verification.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::anova::{anova_f, AnovaResult};
use crate::error::Result;
use crate::graph::{Direction, InteractionGraph};
use crate::ingest::UserRecord;
use crate::polarity::{PartisanGroup, PolarityTable};
use crate::util::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleMetric {
    FractionOriginal,
    BotScore,
    OutDegree,
    InDegree,
    Followers,
}

impl RoleMetric {
    pub const ALL: [RoleMetric; 5] = [
        RoleMetric::FractionOriginal,
        RoleMetric::BotScore,
        RoleMetric::OutDegree,
        RoleMetric::InDegree,
        RoleMetric::Followers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoleMetric::FractionOriginal => "fraction_original",
            RoleMetric::BotScore => "bot_score",
            RoleMetric::OutDegree => "out_degree",
            RoleMetric::InDegree => "in_degree",
            RoleMetric::Followers => "followers",
        }
    }
}

const GROUPS: [PartisanGroup; 3] = [
    PartisanGroup::LeftGroup,
    PartisanGroup::NeutralGroup,
    PartisanGroup::RightGroup,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleCell {
    pub group: PartisanGroup,
    pub verified: bool,
    pub metric: RoleMetric,
    /// `None` when the cell is empty.
    pub summary: Option<Summary>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleAnova {
    pub metric: RoleMetric,
    pub verified: bool,
    /// `None` when the groups are too small to test.
    pub result: Option<AnovaResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleReport {
    pub cells: Vec<RoleCell>,
    pub anova: Vec<RoleAnova>,
    /// Users excluded from the original-content fraction for having no tweets.
    pub zero_tweet_users: Vec<String>,
}

/// Per (group, verified) distributions over users of the Left, Neutral and
/// Right groups. Degrees are unweighted and read from `retweet`.
pub fn role_statistics(
    users: &BTreeMap<String, UserRecord>,
    retweet: &InteractionGraph,
    polarity: &PolarityTable,
) -> RoleReport {
    let mut values: BTreeMap<(PartisanGroup, bool, RoleMetric), Vec<f64>> = BTreeMap::new();
    let mut zero_tweet_users = Vec::new();
    for entry in polarity.entries() {
        let group = entry.group();
        if group == PartisanGroup::Other {
            continue;
        }
        let Some(user) = users.get(&entry.user_id) else {
            continue;
        };
        let node = retweet.node(&entry.user_id);
        let mut push = |metric, x: f64| values.entry((group, user.verified, metric)).or_default().push(x);
        let total = user.counts.total();
        if total == 0 {
            zero_tweet_users.push(user.user_id.clone());
        } else {
            push(RoleMetric::FractionOriginal, user.counts.original as f64 / total as f64);
        }
        push(RoleMetric::BotScore, user.bot_score);
        push(RoleMetric::Followers, user.followers as f64);
        if let Some(u) = node {
            push(RoleMetric::OutDegree, retweet.degree_of(u, Direction::Out, false) as f64);
            push(RoleMetric::InDegree, retweet.degree_of(u, Direction::In, false) as f64);
        }
    }

    let mut cells = Vec::new();
    let mut anova = Vec::new();
    for verified in [false, true] {
        for metric in RoleMetric::ALL {
            let mut samples = Vec::new();
            for group in GROUPS {
                let v = values.get(&(group, verified, metric)).cloned().unwrap_or_default();
                samples.push(v.clone());
                cells.push(RoleCell {
                    group,
                    verified,
                    metric,
                    summary: Summary::of(&v),
                    values: v,
                });
            }
            let nonempty: Vec<Vec<f64>> = samples.into_iter().filter(|s| !s.is_empty()).collect();
            anova.push(RoleAnova {
                metric,
                verified,
                result: anova_f(&nonempty).ok(),
            });
        }
    }
    RoleReport {
        cells,
        anova,
        zero_tweet_users,
    }
}

impl RoleReport {
    pub fn cell(&self, group: PartisanGroup, verified: bool, metric: RoleMetric) -> Option<&RoleCell> {
        self.cells
            .iter()
            .find(|c| c.group == group && c.verified == verified && c.metric == metric)
    }

    /// Header: `group,verified,metric,count,mean,q1,median,q3,min,max`.
    /// Empty cells leave the statistics blank.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["group", "verified", "metric", "count", "mean", "q1", "median", "q3", "min", "max"])?;
        for c in &self.cells {
            let mut row = vec![
                c.group.as_str().to_string(),
                c.verified.to_string(),
                c.metric.as_str().to_string(),
                c.values.len().to_string(),
            ];
            match &c.summary {
                Some(s) => row.extend([s.mean, s.q1, s.median, s.q3, s.min, s.max].map(|x| x.to_string())),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
