// SPDX-License-Identifier: Apache-2.0

//! Synthetic planted-polarity corpora and an exact walk oracle.

pub mod generator;
pub mod oracle;

pub use generator::{
    default_outlets, generate_dataset, read_ground_truth, user_id, GroundTruthRow, SynthConfig, SynthDataset,
    BOT_SCORES_FILE, GAZETTEER_FILE, GROUND_TRUTH_FILE, LEXICON_FILE, OUTLETS_FILE, TWEETS_FILE,
};
pub use oracle::{rwc_bruteforce, ExactRwc, MAX_ORACLE_LEN, MAX_ORACLE_NODES};
