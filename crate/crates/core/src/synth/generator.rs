// SPDX-License-Identifier: Apache-2.0

//! Planted-partition tweet corpora.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ingest::{Gazetteer, TweetKind, TweetRecord};
use crate::seeding::{HashtagLexicon, Leaning, MediaOutlet, MediaOutletTable};
use crate::util::{derive_seed, rng_from_seed};

pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const BOT_SCORES_FILE: &str = "bot_scores.csv";
pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const OUTLETS_FILE: &str = "outlets.tsv";
pub const GAZETTEER_FILE: &str = "gazetteer.txt";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

const US_PLACES: [&str; 8] = [
    "Austin, TX",
    "Columbus, Ohio",
    "Portland, OR",
    "Miami, FL",
    "Denver, CO",
    "Boise, Idaho",
    "Chicago, IL",
    "USA",
];
const FOREIGN_PLACES: [&str; 4] = ["Toronto, Canada", "London, England", "Berlin", "Sydney, Australia"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Users per block. Blocks in the first half lean Left, the rest Right.
    pub block_sizes: Vec<usize>,
    /// Within-block edge probability, one per block.
    pub p_in: Vec<f64>,
    pub p_out: f64,
    /// Retweet counts per edge: `P(w ≥ k+1 | w ≥ k) = weight_q`, capped.
    pub weight_q: f64,
    pub max_weight: u64,
    pub profile_len: usize,
    pub block_vocab: usize,
    pub shared_vocab: usize,
    /// Probability that a profile token comes from the shared vocabulary.
    pub shared_fraction: f64,
    pub seed_coverage: f64,
    pub label_noise: f64,
    /// Users who post but never retweet nor get retweeted.
    pub isolated_users: usize,
    /// Mean original tweets per user, one per block.
    pub original_rate: Vec<f64>,
    /// Chance that an edge also yields a reply mentioning the target.
    pub mention_rate: f64,
    /// Verified share, one per block.
    pub verified_rate: Vec<f64>,
    /// Follower multiplier for users given a partisan hashtag.
    pub seeded_follower_boost: f64,
    pub non_us_fraction: f64,
    pub empty_profile_fraction: f64,
    /// Share of users who link three block-aligned outlet articles.
    pub media_fraction: f64,
    pub bot_score_max: f64,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            block_sizes: vec![1000, 1000],
            p_in: vec![0.01, 0.01],
            p_out: 0.0005,
            weight_q: 0.8,
            max_weight: 20,
            profile_len: 8,
            block_vocab: 200,
            shared_vocab: 300,
            shared_fraction: 0.5,
            seed_coverage: 0.3,
            label_noise: 0.05,
            isolated_users: 10,
            original_rate: vec![2.0, 2.0],
            mention_rate: 0.3,
            verified_rate: vec![0.05, 0.05],
            seeded_follower_boost: 10.0,
            non_us_fraction: 0.02,
            empty_profile_fraction: 0.02,
            media_fraction: 0.0,
            bot_score_max: 0.3,
            rng_seed: 42,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} outside [0,1]")))
    }
}

impl SynthConfig {
    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Two equal blocks of `n / 2` users, the odd user going to the second.
    pub fn with_n(mut self, n: usize) -> SynthConfig {
        self.block_sizes = vec![n / 2, n - n / 2];
        self
    }

    pub fn block_leaning(&self, block: usize) -> Leaning {
        if 2 * block < self.block_sizes.len() {
            Leaning::Left
        } else {
            Leaning::Right
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.block_sizes.len();
        if k == 0 || self.block_sizes.contains(&0) {
            return Err(invalid("every block needs at least one user"));
        }
        for (name, v) in [("p_in", &self.p_in), ("original_rate", &self.original_rate), ("verified_rate", &self.verified_rate)] {
            if v.len() != k {
                return Err(invalid(format!("{name} has {} entries for {k} blocks", v.len())));
            }
        }
        for &p in &self.p_in {
            check_prob("p_in", p)?;
        }
        for &p in &self.verified_rate {
            check_prob("verified_rate", p)?;
        }
        for (name, p) in [
            ("p_out", self.p_out),
            ("weight_q", self.weight_q),
            ("shared_fraction", self.shared_fraction),
            ("seed_coverage", self.seed_coverage),
            ("label_noise", self.label_noise),
            ("mention_rate", self.mention_rate),
            ("non_us_fraction", self.non_us_fraction),
            ("empty_profile_fraction", self.empty_profile_fraction),
            ("media_fraction", self.media_fraction),
            ("bot_score_max", self.bot_score_max),
        ] {
            check_prob(name, p)?;
        }
        if self.original_rate.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("original_rate must be finite and non-negative"));
        }
        if !(self.seeded_follower_boost.is_finite() && self.seeded_follower_boost > 0.0) {
            return Err(invalid("seeded_follower_boost must be positive"));
        }
        if self.max_weight == 0 {
            return Err(invalid("max_weight must be at least 1"));
        }
        if self.profile_len == 0 {
            return Err(invalid("profile_len must be at least 1"));
        }
        if (self.shared_fraction < 1.0 && self.block_vocab == 0) || (self.shared_fraction > 0.0 && self.shared_vocab == 0) {
            return Err(invalid("vocabulary sizes cannot cover the shared_fraction mix"));
        }
        if self.isolated_users > self.n() {
            return Err(invalid("more isolated users than users"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub user_id: String,
    pub block: usize,
    pub seeded: bool,
    pub true_label: Leaning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub config: SynthConfig,
    pub records: Vec<TweetRecord>,
    pub bot_scores: Vec<(String, f64)>,
    pub ground_truth: Vec<GroundTruthRow>,
    /// Planted `(src, dst, weight)` retweet edges by user index.
    pub edges: Vec<(usize, usize, u64)>,
    pub isolated: Vec<usize>,
    pub lexicon: HashtagLexicon,
    pub outlets: MediaOutletTable,
}

pub fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

/// ISO-8601 timestamp `i` seconds after the start of 2020, using 28-day
/// months so every date is valid.
fn timestamp(i: u64) -> String {
    let (s, rest) = (i % 60, i / 60);
    let (m, rest) = (rest % 60, rest / 60);
    let (h, rest) = (rest % 24, rest / 24);
    let (d, rest) = (rest % 28, rest / 28);
    let (mo, y) = (rest % 12, rest / 12);
    format!("{:04}-{:02}-{:02}T{h:02}:{m:02}:{s:02}Z", 2020 + y, mo + 1, d + 1)
}

pub fn default_outlets() -> MediaOutletTable {
    let rows = [
        ("leftdaily", "leftdaily.example", 1),
        ("progressivewire", "progressivewire.example", 2),
        ("centerpost", "centerpost.example", 3),
        ("heartlandtimes", "heartlandtimes.example", 4),
        ("rightcurrent", "rightcurrent.example", 5),
    ];
    MediaOutletTable::new(rows.map(|(h, d, b)| MediaOutlet {
        handle: h.into(),
        domain: d.into(),
        bias: b,
    }))
    .expect("valid outlet table")
}

/// Draws the full corpus. The same config always yields the same dataset.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let n = cfg.n();
    let block: Vec<usize> = cfg
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let lexicon = HashtagLexicon::default_lexicon();
    let outlets = default_outlets();

    // isolated users
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(cfg.rng_seed, 1)));
    let mut is_isolated = vec![false; n];
    let mut isolated: Vec<usize> = order[..cfg.isolated_users].to_vec();
    isolated.sort_unstable();
    for &u in &isolated {
        is_isolated[u] = true;
    }

    // edges
    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, 2));
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = if block[u] == block[v] { cfg.p_in[block[u]] } else { cfg.p_out };
            if rng.random::<f64>() < p && !is_isolated[u] && !is_isolated[v] {
                let mut w = 1;
                while w < cfg.max_weight && rng.random::<f64>() < cfg.weight_q {
                    w += 1;
                }
                edges.push((u, v, w));
            }
        }
    }

    // seeds and noise
    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, 3));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_seeded = (cfg.seed_coverage * n as f64).round() as usize;
    let mut hashtag_side: Vec<Option<Leaning>> = vec![None; n];
    for &u in &order[..n_seeded] {
        let truth = cfg.block_leaning(block[u]);
        hashtag_side[u] = Some(if rng.random::<f64>() < cfg.label_noise { truth.flipped() } else { truth });
    }

    // profiles and metadata
    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, 4));
    let left_tags: Vec<String> = lexicon.tags(Leaning::Left).map(|t| format!("#{t}")).collect();
    let right_tags: Vec<String> = lexicon.tags(Leaning::Right).map(|t| format!("#{t}")).collect();
    let mut profile = Vec::with_capacity(n);
    let mut location = Vec::with_capacity(n);
    let mut followers = Vec::with_capacity(n);
    let mut verified = Vec::with_capacity(n);
    for u in 0..n {
        let b = block[u];
        let mut tokens: Vec<String> = (0..cfg.profile_len)
            .map(|_| {
                if rng.random::<f64>() < cfg.shared_fraction {
                    format!("w{}", rng.random_range(0..cfg.shared_vocab))
                } else {
                    format!("b{b}w{}", rng.random_range(0..cfg.block_vocab))
                }
            })
            .collect();
        if let Some(side) = hashtag_side[u] {
            let tags = if side == Leaning::Left { &left_tags } else { &right_tags };
            let at = rng.random_range(0..=tokens.len());
            tokens.insert(at, tags[rng.random_range(0..tags.len())].clone());
        }
        let empty = rng.random::<f64>() < cfg.empty_profile_fraction;
        profile.push(if empty { String::new() } else { tokens.join(" ") });
        location.push(if rng.random::<f64>() < cfg.non_us_fraction {
            FOREIGN_PLACES[rng.random_range(0..FOREIGN_PLACES.len())]
        } else {
            US_PLACES[rng.random_range(0..US_PLACES.len())]
        });
        let base = 10f64.powf(rng.random_range(1.0..3.5)).floor();
        let boost = if hashtag_side[u].is_some() { cfg.seeded_follower_boost } else { 1.0 };
        followers.push((base * boost) as u64);
        verified.push(rng.random::<f64>() < cfg.verified_rate[b]);
    }

    // tweets
    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, 5));
    let mut out_edges: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for &(u, v, w) in &edges {
        out_edges[u].push((v, w));
    }
    let outlet_rows = outlets.outlets().to_vec();
    let mut records = Vec::new();
    let mut clock = 0u64;
    for u in 0..n {
        let uid = user_id(u);
        let mut emit = |kind: TweetKind, target: Option<usize>, mentions: Vec<String>, urls: Vec<String>| {
            records.push(TweetRecord {
                tweet_id: format!("t{:08}", records.len()),
                user_id: uid.clone(),
                timestamp: timestamp(clock),
                kind,
                retweeted_user_id: target.map(user_id),
                mentioned_user_ids: mentions,
                urls,
                profile: profile[u].clone(),
                followers: followers[u],
                verified: verified[u],
                location: location[u].to_string(),
            });
            clock += 1;
        };
        let rate = cfg.original_rate[block[u]];
        let mut originals = rate.floor() as usize + usize::from(rng.random::<f64>() < rate.fract());
        if originals == 0 && out_edges[u].is_empty() {
            originals = 1;
        }
        let media = rng.random::<f64>() < cfg.media_fraction;
        for _ in 0..originals {
            emit(TweetKind::Original, None, Vec::new(), Vec::new());
        }
        if media {
            let aligned: Vec<&MediaOutlet> = outlet_rows
                .iter()
                .filter(|o| match cfg.block_leaning(block[u]) {
                    Leaning::Left => o.bias <= 2,
                    Leaning::Right => o.bias >= 5,
                })
                .collect();
            for k in 0..3 {
                let o = aligned[rng.random_range(0..aligned.len())];
                emit(
                    TweetKind::Original,
                    None,
                    Vec::new(),
                    vec![format!("https://www.{}/story/{u}-{k}", o.domain)],
                );
            }
        }
        for &(v, w) in &out_edges[u] {
            for _ in 0..w {
                emit(TweetKind::Retweet, Some(v), Vec::new(), Vec::new());
            }
            if rng.random::<f64>() < cfg.mention_rate {
                emit(TweetKind::Reply, None, vec![user_id(v)], Vec::new());
            }
        }
    }

    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, 6));
    let bot_scores = (0..n).map(|u| (user_id(u), rng.random::<f64>() * cfg.bot_score_max)).collect();
    let ground_truth = (0..n)
        .map(|u| GroundTruthRow {
            user_id: user_id(u),
            block: block[u],
            seeded: hashtag_side[u].is_some(),
            true_label: cfg.block_leaning(block[u]),
        })
        .collect();
    Ok(SynthDataset {
        config: cfg.clone(),
        records,
        bot_scores,
        ground_truth,
        edges,
        isolated,
        lexicon,
        outlets,
    })
}

impl SynthDataset {
    /// Writes the corpus and its side files into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(fs::File::create(dir.join(TWEETS_FILE))?);
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;

        let mut wtr = csv::Writer::from_path(dir.join(BOT_SCORES_FILE))?;
        wtr.write_record(["user_id", "bot_score"])?;
        for (id, s) in &self.bot_scores {
            wtr.write_record([id.as_str(), &s.to_string()])?;
        }
        wtr.flush()?;

        let mut wtr = csv::Writer::from_path(dir.join(GROUND_TRUTH_FILE))?;
        for row in &self.ground_truth {
            wtr.serialize(row)?;
        }
        wtr.flush()?;

        fs::write(dir.join(LEXICON_FILE), self.lexicon.to_tsv())?;
        fs::write(dir.join(OUTLETS_FILE), self.outlets.to_tsv())?;
        fs::write(dir.join(GAZETTEER_FILE), Gazetteer::us_default().to_config_text())?;
        Ok(())
    }
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthRow>> {
    let mut rows = Vec::new();
    for row in csv::Reader::from_path(path)?.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            isolated_users: 2,
            ..SynthConfig::default().with_n(200)
        }
    }

    #[test]
    fn timestamps_are_iso_and_ordered() {
        assert_eq!(timestamp(0), "2020-01-01T00:00:00Z");
        assert_eq!(timestamp(86_400 * 28), "2020-02-01T00:00:00Z");
        assert!(timestamp(59) < timestamp(60));
        assert!(timestamp(86_400 * 28 * 12 - 1) < timestamp(86_400 * 28 * 12));
    }

    #[test]
    fn no_cross_edges_without_p_out() {
        let cfg = SynthConfig { p_out: 0.0, ..small() };
        let d = generate_dataset(&cfg).unwrap();
        assert!(!d.edges.is_empty());
        for &(u, v, _) in &d.edges {
            assert_eq!(d.ground_truth[u].block, d.ground_truth[v].block);
        }
    }

    #[test]
    fn isolated_users_have_no_edges() {
        let d = generate_dataset(&small()).unwrap();
        assert_eq!(d.isolated.len(), 2);
        for &(u, v, _) in &d.edges {
            assert!(!d.isolated.contains(&u) && !d.isolated.contains(&v));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(generate_dataset(&SynthConfig { p_out: 1.5, ..small() }).is_err());
        assert!(generate_dataset(&SynthConfig { p_in: vec![0.1], ..small() }).is_err());
        assert!(generate_dataset(&SynthConfig { block_sizes: vec![], ..small() }).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_dataset(&small()).unwrap(), generate_dataset(&small()).unwrap());
    }
}
