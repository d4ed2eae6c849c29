// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Parser)]
#[command(name = "echoscope", version, about = "Retweet-network polarity estimation and echo-chamber analysis")]
pub struct Cli {
    /// Directory holding stage artifacts and manifests.
    #[arg(long, global = true, default_value = "work")]
    pub work: PathBuf,

    /// Settings file (`key = value` lines, or a stage manifest to replay).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-partition dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse tweets and aggregate per-user records.
    Ingest {
        #[arg(long)]
        tweets: PathBuf,
        /// CSV `user_id,bot_score`; users missing from it score 0.
        #[arg(long)]
        bot_scores: Option<PathBuf>,
    },
    /// Filter users and build the retweet and mention networks.
    Graph,
    /// Assign hashtag and media-outlet seed labels.
    Seed,
    /// Train the profile encoder and polarity head.
    Train,
    /// Score users and bin them into deciles.
    Score,
    /// Cross-validate against label propagation.
    Eval,
    /// Run one analysis over the scored population.
    Analyze {
        #[command(subcommand)]
        which: Analysis,
    },
    /// Run every analysis into one directory.
    Report {
        /// Defaults to `report` inside the work directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Analysis {
    Roles,
    Influence,
    Audience,
    Rwc,
    Popular,
}

impl Analysis {
    pub const ALL: [Analysis; 5] = [
        Analysis::Roles,
        Analysis::Influence,
        Analysis::Audience,
        Analysis::Rwc,
        Analysis::Popular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Roles => "roles",
            Analysis::Influence => "influence",
            Analysis::Audience => "audience",
            Analysis::Rwc => "rwc",
            Analysis::Popular => "popular",
        }
    }
}

/// Setting overrides. Each flag mirrors the config key of the same name.
#[derive(Debug, Default, Args, Serialize)]
pub struct Overrides {
    /// Global seed; every stage derives its own from it.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_in: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_in_right: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_out: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_q: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_coverage: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated_users: Option<usize>,
    #[arg(long, global = true, help_heading = "Synthetic data")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub media_fraction: Option<f64>,

    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gazetteer: Option<String>,
    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_weight: Option<u64>,
    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mention_min_weight: Option<u64>,
    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_threshold: Option<u64>,
    /// `both_below` or `either_below`.
    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prune_mode: Option<String>,
    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bot_fraction: Option<f64>,
    #[arg(long, global = true, help_heading = "Filtering")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,

    #[arg(long, global = true, help_heading = "Seeding")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<String>,
    #[arg(long, global = true, help_heading = "Seeding")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outlets: Option<String>,

    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// `one_neg` or `mult_neg`.
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<String>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_frequency: Option<u32>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head_learning_rate: Option<f64>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head_epochs: Option<usize>,
    /// Score seed users at their label (0 or 1) instead of the model output.
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pin_seeds: Option<bool>,
    #[arg(long, global = true, help_heading = "Training")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,

    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_fraction: Option<f64>,
    /// Random walks started per decile.
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walks: Option<usize>,
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub authoritative_fraction: Option<f64>,
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub authoritative_count: Option<usize>,
    /// `weight_proportional` or `uniform`.
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_rule: Option<String>,
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub popular_k: Option<usize>,
    #[arg(long, global = true, help_heading = "Analysis")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_audience: Option<bool>,
}

impl Overrides {
    pub fn to_map(&self) -> Map<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        }
    }
}
