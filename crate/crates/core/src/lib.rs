// SPDX-License-Identifier: Apache-2.0

//! Polarity estimation and echo-chamber measurement over retweet networks.
//!
//! The pipeline runs in stages:
//!
//! 1. [`ingest`] parses line-delimited tweet records, aggregates per-user
//!    metadata and applies the location / empty-profile / bot filters.
//! 2. [`graph`] builds the weighted retweet and mention networks, prunes
//!    low-activity users and computes PageRank.
//! 3. [`seeding`] assigns weak Left/Right labels from profile hashtags and
//!    media-outlet endorsements.
//! 4. [`encoder`] trains profile embeddings with a triplet objective over
//!    retweet pairs, fits a logistic head on the seed users and evaluates
//!    against a label-propagation baseline.
//! 5. [`polarity`] scores every user and bins the population into deciles.
//! 6. [`analysis`] computes role statistics, influence proportions, audience
//!    composition, Random Walk Controversy and popular-user rankings.
//!
//! [`synth`] generates planted-partition datasets in the ingest formats and
//! holds the exact walk-enumeration oracle used by the test suites.

pub mod analysis;
pub mod encoder;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod polarity;
pub mod seeding;
pub mod synth;
pub mod util;

pub use error::{Error, Result};
