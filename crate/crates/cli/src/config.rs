// SPDX-License-Identifier: Apache-2.0

//! Resolved pipeline settings: built-in defaults, then a `key = value` file
//! (or the `config` object of a stage manifest), then command-line flags.

use std::collections::BTreeSet;
use std::path::Path;

use echoscope::analysis::{Authoritative, StepRule, WalkConfig};
use echoscope::encoder::{HeadConfig, Sampling, TrainConfig};
use echoscope::graph::{PreprocessConfig, PruneMode};
use echoscope::synth::SynthConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,

    // synth
    pub n: usize,
    pub p_in: f64,
    /// Within-block probability of the right block; `p_in` when unset.
    pub p_in_right: Option<f64>,
    pub p_out: f64,
    pub weight_q: f64,
    pub seed_coverage: f64,
    pub label_noise: f64,
    pub isolated_users: usize,
    pub media_fraction: f64,

    // ingest and graph
    pub gazetteer: Option<String>,
    pub min_weight: u64,
    pub mention_min_weight: u64,
    pub degree_threshold: u64,
    pub prune_mode: PruneMode,
    pub bot_fraction: f64,
    pub damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,

    // seed
    pub lexicon: Option<String>,
    pub outlets: Option<String>,

    // train, score, eval
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub dim: usize,
    pub sampling: Sampling,
    pub margin: f64,
    pub min_frequency: u32,
    pub head_learning_rate: f64,
    pub head_epochs: usize,
    pub pin_seeds: bool,
    pub folds: usize,

    // analyze
    pub top_fraction: f64,
    pub walks: usize,
    pub max_len: usize,
    pub authoritative_fraction: f64,
    pub authoritative_count: Option<usize>,
    pub step_rule: StepRule,
    pub popular_k: usize,
    pub weighted_audience: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        let pre = PreprocessConfig::default();
        let train = TrainConfig::default();
        let head = HeadConfig::default();
        let walk = WalkConfig::default();
        PipelineConfig {
            seed: 42,
            n: synth.n(),
            p_in: synth.p_in[0],
            p_in_right: None,
            p_out: synth.p_out,
            weight_q: synth.weight_q,
            seed_coverage: synth.seed_coverage,
            label_noise: synth.label_noise,
            isolated_users: synth.isolated_users,
            media_fraction: synth.media_fraction,
            gazetteer: None,
            min_weight: pre.min_weight,
            mention_min_weight: pre.mention_min_weight,
            degree_threshold: pre.degree_threshold,
            prune_mode: pre.prune_mode,
            bot_fraction: pre.bot_fraction,
            damping: 0.85,
            pagerank_tol: 1e-10,
            pagerank_max_iter: 200,
            lexicon: None,
            outlets: None,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            batch_size: train.batch_size,
            dim: train.dim,
            sampling: train.sampling,
            margin: train.margin,
            min_frequency: train.min_frequency,
            head_learning_rate: head.learning_rate,
            head_epochs: head.epochs,
            pin_seeds: false,
            folds: 5,
            top_fraction: 0.05,
            walks: walk.walks_per_decile,
            max_len: walk.max_len,
            authoritative_fraction: 0.04,
            authoritative_count: None,
            step_rule: walk.step_rule,
            popular_k: 10,
            weighted_audience: false,
        }
    }
}

/// First eight bytes (little-endian) of `SHA-256(seed as u64 LE ‖ stage)`.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// Parses `key = value` lines. `#` starts a comment; values that read as
/// JSON scalars keep their type, anything else is a string.
pub fn parse_key_values(text: &str) -> Result<Map<String, Value>, CliError> {
    let mut map = Map::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let parsed = serde_json::from_str::<Value>(value)
            .ok()
            .filter(|v| !v.is_object() && !v.is_array())
            .unwrap_or_else(|| Value::String(value.to_string()));
        if map.insert(key.clone(), parsed).is_some() {
            return Err(CliError::Usage(format!("config line {}: `{key}` set twice", i + 1)));
        }
    }
    Ok(map)
}

/// Reads a config file. A `.json` file is taken to be a stage manifest and
/// its recorded `config` object is used, which replays that run.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        match v.get("config") {
            Some(Value::Object(m)) => Ok(m.clone()),
            _ => Err(CliError::Usage(format!("{} has no `config` object", path.display()))),
        }
    } else {
        parse_key_values(&text)
    }
}

impl PipelineConfig {
    /// Overlays `layers` in order on the defaults and validates the result.
    pub fn resolve(layers: &[Map<String, Value>]) -> Result<PipelineConfig, CliError> {
        let mut base = match serde_json::to_value(PipelineConfig::default()) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("config serializes to an object"),
        };
        let mut explicit = BTreeSet::new();
        for layer in layers {
            for (k, v) in layer {
                if !base.contains_key(k) {
                    return Err(CliError::Usage(format!("unknown setting `{k}`")));
                }
                base.insert(k.clone(), v.clone());
                explicit.insert(k.clone());
            }
        }
        if explicit.contains("authoritative_count")
            && explicit.contains("authoritative_fraction")
            && !base["authoritative_count"].is_null()
        {
            return Err(CliError::Usage(
                "authoritative_count and authoritative_fraction are mutually exclusive".into(),
            ));
        }
        let cfg: PipelineConfig =
            serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("bad setting: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: echoscope::Error| CliError::Usage(e.to_string());
        self.synth_config().validate().map_err(usage)?;
        self.train_config(0).validate().map_err(usage)?;
        self.walk_config(0).validate().map_err(usage)?;
        if !(0.0..1.0).contains(&self.bot_fraction) {
            return Err(CliError::Usage(format!("bot_fraction {} outside [0,1)", self.bot_fraction)));
        }
        if self.min_weight == 0 || self.mention_min_weight == 0 {
            return Err(CliError::Usage("edge weight thresholds must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CliError::Usage(format!("damping {} outside (0,1)", self.damping)));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction < 1.0) {
            return Err(CliError::Usage(format!("top_fraction {} outside (0,1)", self.top_fraction)));
        }
        if self.folds < 2 {
            return Err(CliError::Usage("folds must be at least 2".into()));
        }
        if self.popular_k == 0 {
            return Err(CliError::Usage("popular_k must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(CliError::Usage("n must be at least 2".into()));
        }
        Ok(())
    }

    /// Generator settings. The dataset seed is the global seed itself.
    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            p_in: vec![self.p_in, self.p_in_right.unwrap_or(self.p_in)],
            p_out: self.p_out,
            weight_q: self.weight_q,
            seed_coverage: self.seed_coverage,
            label_noise: self.label_noise,
            isolated_users: self.isolated_users,
            media_fraction: self.media_fraction,
            rng_seed: self.seed,
            ..SynthConfig::default().with_n(self.n)
        }
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            min_weight: self.min_weight,
            mention_min_weight: self.mention_min_weight,
            degree_threshold: self.degree_threshold,
            prune_mode: self.prune_mode,
            bot_fraction: self.bot_fraction,
        }
    }

    pub fn train_config(&self, rng_seed: u64) -> TrainConfig {
        TrainConfig {
            margin: self.margin,
            sampling: self.sampling,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            rng_seed,
            dim: self.dim,
            min_frequency: self.min_frequency,
        }
    }

    pub fn head_config(&self) -> HeadConfig {
        HeadConfig {
            learning_rate: self.head_learning_rate,
            epochs: self.head_epochs,
        }
    }

    pub fn walk_config(&self, rng_seed: u64) -> WalkConfig {
        WalkConfig {
            walks_per_decile: self.walks,
            max_len: self.max_len,
            authoritative: match self.authoritative_count {
                Some(k) => Authoritative::Count(k),
                None => Authoritative::Fraction(self.authoritative_fraction),
            },
            step_rule: self.step_rule,
            rng_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering_and_types() {
        let file = parse_key_values("# comment\nwalks = 500\nprune-mode = either_below\nlexicon = tags.tsv # trailing\n").unwrap();
        let flags: Map<String, Value> = [("walks".to_string(), Value::from(800))].into_iter().collect();
        let cfg = PipelineConfig::resolve(&[file, flags]).unwrap();
        assert_eq!(cfg.walks, 800);
        assert_eq!(cfg.prune_mode, PruneMode::EitherBelow);
        assert_eq!(cfg.lexicon.as_deref(), Some("tags.tsv"));
    }

    #[test]
    fn rejects_unknown_and_conflicting_settings() {
        let unknown = parse_key_values("wlaks = 3").unwrap();
        assert!(matches!(PipelineConfig::resolve(&[unknown]), Err(CliError::Usage(_))));
        let both = parse_key_values("authoritative_count = 5\nauthoritative_fraction = 0.1").unwrap();
        assert!(matches!(PipelineConfig::resolve(&[both]), Err(CliError::Usage(_))));
        let bad = parse_key_values("walks = 0").unwrap();
        assert!(PipelineConfig::resolve(&[bad]).is_err());
        assert!(parse_key_values("walks").is_err());
    }

    #[test]
    fn stage_seeds_differ_and_repeat() {
        assert_eq!(stage_seed(42, "train"), stage_seed(42, "train"));
        assert_ne!(stage_seed(42, "train"), stage_seed(42, "eval"));
        assert_ne!(stage_seed(42, "train"), stage_seed(43, "train"));
    }

    #[test]
    fn defaults_round_trip_through_json() {
        let v = serde_json::to_value(PipelineConfig::default()).unwrap();
        let Value::Object(m) = v else { panic!() };
        assert_eq!(PipelineConfig::resolve(&[m]).unwrap(), PipelineConfig::default());
    }
}
