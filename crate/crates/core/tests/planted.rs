// SPDX-License-Identifier: Apache-2.0

//! Analyses on hand-built populations with known answers, plus generator
//! statistics.

use std::collections::{BTreeMap, BTreeSet};

use echoscope::analysis::{
    audience_distribution, influence_report, popular_users, role_statistics, RoleMetric, VerifiedSplit,
};
use echoscope::graph::{pagerank, GraphKind, InteractionGraph};
use echoscope::ingest::{KindCounts, UserRecord};
use echoscope::polarity::{assign_deciles, PartisanGroup, PolarityTable};
use echoscope::synth::{generate_dataset, SynthConfig};
use proptest::prelude::*;

const N: usize = 40;

fn id(i: usize) -> String {
    format!("p{i:02}")
}

/// Scores rise with the index, so users 4d..4d+3 form decile d+1.
fn polarity() -> PolarityTable {
    assign_deciles(&(0..N).map(|i| (id(i), i as f64 / N as f64)).collect()).unwrap()
}

fn user(i: usize, verified: bool, counts: KindCounts) -> UserRecord {
    UserRecord {
        user_id: id(i),
        profile: String::new(),
        followers: i as u64 * 10,
        verified,
        location: "Texas".into(),
        bot_score: 0.0,
        counts,
    }
}

fn side(i: usize) -> usize {
    usize::from(i >= N / 2)
}

fn graph(edges: &[(usize, usize, u64)]) -> InteractionGraph {
    InteractionGraph::from_edges(GraphKind::Retweet, (0..N).map(id).collect(), edges.iter().copied()).unwrap()
}

/// Every user retweets the next three users of its own half.
fn two_chambers() -> Vec<(usize, usize, u64)> {
    let half = N / 2;
    (0..N)
        .flat_map(|u| {
            let base = side(u) * half;
            (1..=3).map(move |k| (u, base + (u - base + k) % half, 1))
        })
        .collect()
}

#[test]
fn right_users_who_only_retweet_have_no_original_content() {
    let users: BTreeMap<String, UserRecord> = (0..N)
        .map(|i| {
            let counts = if side(i) == 1 {
                KindCounts { retweet: 10, ..Default::default() }
            } else {
                KindCounts { original: 6, retweet: 2, ..Default::default() }
            };
            (id(i), user(i, false, counts))
        })
        .collect();
    let report = role_statistics(&users, &graph(&two_chambers()), &polarity());
    let mean = |g| report.cell(g, false, RoleMetric::FractionOriginal).unwrap().summary.as_ref().unwrap().mean;
    assert_eq!(mean(PartisanGroup::LeftGroup), 0.75);
    assert_eq!(mean(PartisanGroup::RightGroup), 0.0);
    // deciles 5 and 6 straddle the halves evenly
    assert_eq!(mean(PartisanGroup::NeutralGroup), 0.375);
    let left = report.cell(PartisanGroup::LeftGroup, false, RoleMetric::OutDegree).unwrap();
    assert_eq!(left.values, vec![3.0; 8]);
    assert!(report.cell(PartisanGroup::LeftGroup, true, RoleMetric::BotScore).unwrap().summary.is_none());
    let anova = report
        .anova
        .iter()
        .find(|a| a.metric == RoleMetric::Followers && !a.verified)
        .and_then(|a| a.result.as_ref())
        .unwrap();
    assert!(anova.p < 1e-6);
}

#[test]
fn influence_concentrates_at_both_extremes() {
    // verified users and the retweet hubs sit in deciles 1 and 10
    let extreme = |i: usize| i < 4 || i >= N - 4;
    let users: BTreeMap<String, UserRecord> = (0..N)
        .map(|i| {
            let mut u = user(i, extreme(i), KindCounts { original: 1, ..Default::default() });
            u.followers = if extreme(i) { 1000 } else { 1 };
            (id(i), u)
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..N {
        for hub in [0, 1, N - 2, N - 1] {
            if u != hub && side(u) == side(hub) {
                edges.push((u, hub, 2));
            }
        }
    }
    let g = graph(&edges);
    let pr = pagerank(&g, 0.85, 1e-12, 500).unwrap();
    let report = influence_report(&users, &polarity(), &g, &g, &pr, 0.1).unwrap();
    assert_eq!(report.top_k, 4);
    let rows = &report.rows;
    for (d, row) in rows.iter().enumerate() {
        let at_edge = d == 0 || d == 9;
        assert_eq!(row.verified, if at_edge { 1.0 } else { 0.0 }, "decile {}", d + 1);
        assert_eq!(row.retweet_in_degree, if at_edge { 0.5 } else { 0.0 }, "decile {}", d + 1);
        assert_eq!(row.pagerank, row.retweet_in_degree);
    }
    // followers tie at 1000 for eight users; the top four go by user id
    assert_eq!(rows[0].followers, 1.0);
    assert_eq!(rows[9].followers, 0.0);
    assert!(influence_report(&users, &polarity(), &g, &g, &pr, 1.0).is_err());
}

#[test]
fn audiences_stay_inside_their_chamber() {
    let users: BTreeMap<String, UserRecord> =
        (0..N).map(|i| (id(i), user(i, i % 2 == 0, KindCounts::default()))).collect();
    let g = graph(&two_chambers());
    let report = audience_distribution(&g, &polarity(), &users, true, false);
    for decile in [1u8, 2] {
        let s = report.cell(decile, VerifiedSplit::All).unwrap().shares.unwrap();
        assert!(s.right == 0.0 && s.left > 0.0, "decile {decile}: {s:?}");
    }
    for decile in [9u8, 10] {
        let s = report.cell(decile, VerifiedSplit::All).unwrap().shares.unwrap();
        assert!(s.left == 0.0 && s.right > 0.0, "decile {decile}: {s:?}");
    }
    for c in &report.cells {
        if let Some(s) = c.shares {
            assert!((s.left + s.neutral + s.right + s.other - 1.0).abs() < 1e-12);
        }
    }
    // decile 1 (p00..p03) is retweeted by p00..p02 and, around the ring,
    // by p17..p19
    let all = report.cell(1, VerifiedSplit::All).unwrap();
    assert_eq!(all.total, 6.0);
    let weighted = audience_distribution(&g, &polarity(), &users, false, true);
    assert_eq!(weighted.cells.len(), 10);
    assert_eq!(weighted.cell(1, VerifiedSplit::All).unwrap().total, 12.0);
}

#[test]
fn popular_lists_are_disjoint_between_chambers() {
    let g = graph(&two_chambers());
    let lists = popular_users(&g, &polarity(), 5).unwrap();
    let left: BTreeSet<&str> = lists.left.iter().map(|u| u.user_id.as_str()).collect();
    let right: BTreeSet<&str> = lists.right.iter().map(|u| u.user_id.as_str()).collect();
    assert!(!left.is_empty() && !right.is_empty());
    assert!(left.is_disjoint(&right));
    for u in &lists.left {
        assert!(u.left > 0 && u.right == 0, "{u:?}");
        assert_eq!(u.retweeters, u.left + u.neutral + u.right + u.other);
    }
    for w in lists.left.windows(2) {
        assert!(w[0].left > w[1].left || (w[0].left == w[1].left && w[0].user_id < w[1].user_id));
    }
    let ranks: BTreeSet<usize> = lists.left.iter().chain(&lists.right).map(|u| u.global_rank).collect();
    assert!(ranks.iter().all(|&r| (1..=N).contains(&r)));
    assert!(popular_users(&g, &polarity(), 0).is_err());

    let mut csv = Vec::new();
    lists.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("side,rank,user_id,global_rank,retweeters,left,neutral,right,other\n"));
    assert_eq!(text.lines().count(), 1 + lists.left.len() + lists.right.len());
}

#[test]
fn popular_global_rank_breaks_ties_by_id() {
    // p02 and p01 both have two retweeters; p00 has one
    let g = graph(&[(3, 1, 1), (4, 1, 1), (3, 2, 1), (5, 2, 9), (6, 0, 1)]);
    let lists = popular_users(&g, &polarity(), 3).unwrap();
    let rank = |who: &str| lists.left.iter().find(|u| u.user_id == who).unwrap().global_rank;
    assert_eq!((rank("p01"), rank("p02"), rank("p00")), (1, 2, 3));
    assert_eq!(lists.left[0].user_id, "p01");
}

#[test]
fn planted_edge_count_is_binomial() {
    let cfg = SynthConfig {
        isolated_users: 0,
        p_in: vec![0.02, 0.04],
        p_out: 0.002,
        ..SynthConfig::default().with_n(600)
    };
    for seed in [1u64, 2, 3] {
        let d = generate_dataset(&SynthConfig { rng_seed: seed, ..cfg.clone() }).unwrap();
        let block = |u: usize| usize::from(u >= 300);
        let mut counts = [[0usize; 2]; 2];
        for &(u, v, w) in &d.edges {
            assert_ne!(u, v);
            assert!(w >= 1 && w <= cfg.max_weight);
            counts[block(u)][block(v)] += 1;
        }
        let within: f64 = 300.0 * 299.0;
        let cross: f64 = 300.0 * 300.0;
        for (observed, trials, p) in [
            (counts[0][0], within, 0.02),
            (counts[1][1], within, 0.04),
            (counts[0][1] + counts[1][0], 2.0 * cross, 0.002),
        ] {
            let mean = trials * p;
            let sd = (trials * p * (1.0 - p)).sqrt();
            assert!((observed as f64 - mean).abs() < 4.0 * sd, "seed {seed}: {observed} vs {mean} ± {sd}");
        }
    }
}

#[test]
fn isolated_users_have_no_planted_edges() {
    let d = generate_dataset(&SynthConfig::default().with_n(300)).unwrap();
    let isolated: BTreeSet<usize> = d.isolated.iter().copied().collect();
    assert_eq!(isolated.len(), SynthConfig::default().isolated_users);
    assert!(d.edges.iter().all(|(u, v, _)| !isolated.contains(u) && !isolated.contains(v)));
}

#[test]
fn generator_is_deterministic_per_seed() {
    let cfg = SynthConfig::default().with_n(200);
    assert_eq!(generate_dataset(&cfg).unwrap(), generate_dataset(&cfg).unwrap());
    let other = generate_dataset(&SynthConfig { rng_seed: 43, ..cfg.clone() }).unwrap();
    assert_ne!(generate_dataset(&cfg).unwrap().edges, other.edges);
}

proptest! {
    #[test]
    fn deciles_partition_in_score_order(scores in prop::collection::vec(0u8..20, 10..200)) {
        let map: BTreeMap<String, f64> = scores.iter().enumerate().map(|(i, &s)| (format!("u{i:03}"), s as f64)).collect();
        let t = assign_deciles(&map).unwrap();
        let n = scores.len();
        let sizes = t.decile_sizes();
        for (b, &size) in sizes.iter().enumerate() {
            prop_assert_eq!(size, n / 10 + usize::from(b < n % 10));
        }
        let entries = t.entries();
        for w in entries.windows(2) {
            prop_assert!(w[0].decile <= w[1].decile);
            prop_assert!((w[0].score, &w[0].user_id) < (w[1].score, &w[1].user_id));
        }
    }
}
