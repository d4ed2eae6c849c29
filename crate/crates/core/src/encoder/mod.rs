// SPDX-License-Identifier: Apache-2.0

//! Profile encoder trained on retweet pairs, polarity head, label
//! propagation baseline and cross-validated evaluation.

pub mod eval;
pub mod fit;
pub mod head;
pub mod labelprop;
pub mod model;
pub mod train;
pub mod triplet;
pub mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use eval::{auc, cross_validate_auc, stratified_folds, CvResult};
pub use fit::{evaluate_methods, fit_polarity_model, seed_nodes, EvalReport};
pub use head::{train_head, HeadConfig, HeadFit};
pub use labelprop::{label_propagation, Propagation};
pub use model::{EncoderModel, Head};
pub use train::{train_retweet_bert, TrainReport};
pub use triplet::{triplet_grad, triplet_loss};
pub use vocab::{tokenize, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// One uniformly drawn non-neighbor per positive pair.
    OneNeg,
    /// Every other positive in the batch serves as a negative.
    #[default]
    MultNeg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Triplet margin.
    pub margin: f64,
    pub sampling: Sampling,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub rng_seed: u64,
    pub dim: usize,
    /// Tokens seen fewer times than this map to the unknown row.
    pub min_frequency: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: 1.0,
            sampling: Sampling::MultNeg,
            batch_size: 256,
            learning_rate: 0.05,
            epochs: 5,
            rng_seed: 0,
            dim: 64,
            min_frequency: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.margin.is_nan() || self.margin <= 0.0 {
            return Err(invalid("margin must be positive"));
        }
        if self.batch_size == 0 || (self.sampling == Sampling::MultNeg && self.batch_size < 2) {
            return Err(invalid("mult_neg sampling needs batch_size >= 2"));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(invalid("learning rate must be positive"));
        }
        if self.dim < 2 {
            return Err(invalid("embedding dimension must be at least 2"));
        }
        Ok(())
    }
}
