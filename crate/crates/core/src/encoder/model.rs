// SPDX-License-Identifier: Apache-2.0

//! Mean-of-token-embeddings profile encoder with a logistic polarity head.
//!
//! # File layout
//!
//! All integers are little-endian `u32`, all reals little-endian IEEE-754 `f64`.
//!
//! | field            | encoding                                  |
//! |------------------|-------------------------------------------|
//! | magic            | 8 bytes, `ECHOENC\0`                      |
//! | version          | `u32`, currently 1                        |
//! | dim              | `u32`                                     |
//! | min_frequency    | `u32`                                     |
//! | vocab_len        | `u32`, including the unknown token        |
//! | tokens           | `vocab_len` × (`u32` byte length, UTF-8)  |
//! | embedding table  | `vocab_len × dim` reals, row-major        |
//! | head weights     | `dim` reals                               |
//! | head bias        | one real                                  |

use std::io::{Read, Write};

use rand::Rng;

use super::vocab::{tokenize, Vocabulary};
use crate::error::{invalid, Error, Result};
use crate::util::rng_from_seed;

pub const MAGIC: &[u8; 8] = b"ECHOENC\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Head {
    pub fn zeros(dim: usize) -> Head {
        Head {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderModel {
    vocab: Vocabulary,
    dim: usize,
    table: Vec<f64>,
    pub head: Head,
}

impl EncoderModel {
    /// Rows drawn uniformly from `[-0.5/dim, 0.5/dim]`, head at zero.
    pub fn init(vocab: Vocabulary, dim: usize, seed: u64) -> Result<EncoderModel> {
        if dim < 2 {
            return Err(invalid("embedding dimension must be at least 2"));
        }
        let mut rng = rng_from_seed(seed);
        let bound = 0.5 / dim as f64;
        let table = (0..vocab.len() * dim)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Ok(EncoderModel {
            vocab,
            dim,
            table,
            head: Head::zeros(dim),
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub(crate) fn table_mut(&mut self) -> &mut [f64] {
        &mut self.table
    }

    pub fn row(&self, token: usize) -> &[f64] {
        &self.table[token * self.dim..(token + 1) * self.dim]
    }

    /// Mean of the rows at `indices`; zero vector when empty.
    pub fn embed_indices(&self, indices: &[usize]) -> Vec<f64> {
        mean_rows(&self.table, self.dim, indices)
    }

    pub fn embed_profile(&self, tokens: &[String]) -> Vec<f64> {
        self.embed_indices(&self.vocab.encode(tokens))
    }

    pub fn embed_text(&self, profile: &str) -> Vec<f64> {
        self.embed_profile(&tokenize(profile))
    }

    pub fn predict_score(&self, profile: &str) -> f64 {
        self.head.score(&self.embed_text(profile))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let u32le = |x: usize| -> Result<[u8; 4]> {
            u32::try_from(x)
                .map(u32::to_le_bytes)
                .map_err(|_| Error::Format(format!("{x} does not fit in u32")))
        };
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&u32le(self.dim)?)?;
        w.write_all(&self.vocab.min_frequency().to_le_bytes())?;
        w.write_all(&u32le(self.vocab.len())?)?;
        for t in self.vocab.tokens() {
            w.write_all(&u32le(t.len())?)?;
            w.write_all(t.as_bytes())?;
        }
        for x in self.table.iter().chain(&self.head.weights) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&self.head.bias.to_le_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<EncoderModel> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic header".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let dim = read_u32(&mut r)? as usize;
        let min_frequency = read_u32(&mut r)?;
        let vocab_len = read_u32(&mut r)? as usize;
        if dim < 2 || vocab_len == 0 {
            return Err(Error::Format("invalid dimensions".into()));
        }
        let mut tokens = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            let len = read_u32(&mut r)? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            tokens.push(String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))?);
        }
        if tokens[0] != super::vocab::UNK {
            return Err(Error::Format("first token must be the unknown marker".into()));
        }
        let vocab = Vocabulary::from_tokens(tokens.into_iter().skip(1), min_frequency);
        if vocab.len() != vocab_len {
            return Err(Error::Format("duplicate tokens".into()));
        }
        let mut table = vec![0.0; vocab_len * dim];
        for x in table.iter_mut() {
            *x = read_f64(&mut r)?;
        }
        let mut weights = vec![0.0; dim];
        for x in weights.iter_mut() {
            *x = read_f64(&mut r)?;
        }
        let bias = read_f64(&mut r)?;
        Ok(EncoderModel {
            vocab,
            dim,
            table,
            head: Head { weights, bias },
        })
    }
}

pub(crate) fn mean_rows(table: &[f64], dim: usize, indices: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if indices.is_empty() {
        return out;
    }
    for &t in indices {
        for (o, x) in out.iter_mut().zip(&table[t * dim..(t + 1) * dim]) {
            *o += x;
        }
    }
    let inv = 1.0 / indices.len() as f64;
    out.iter_mut().for_each(|o| *o *= inv);
    out
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_model(seed: u64) -> EncoderModel {
        let vocab = Vocabulary::from_tokens(["a".to_string(), "b".to_string(), "#c".to_string()], 1);
        EncoderModel::init(vocab, 4, seed).unwrap()
    }

    #[test]
    fn init_bounds_and_zero_head() {
        let m = small_model(3);
        assert!(m.table().iter().all(|x| x.abs() <= 0.125));
        assert_eq!(m.predict_score("a b anything"), 0.5);
        assert!(EncoderModel::init(Vocabulary::from_tokens([], 1), 1, 0).is_err());
    }

    #[test]
    fn embedding_is_mean_of_rows() {
        let m = small_model(1);
        let one = m.embed_profile(&["a".to_string()]);
        assert_eq!(one, m.row(1));
        let two = m.embed_profile(&["a".to_string(), "b".to_string()]);
        for k in 0..4 {
            assert!((two[k] - (m.row(1)[k] + m.row(2)[k]) / 2.0).abs() < 1e-15);
        }
        assert_eq!(m.embed_profile(&[]), vec![0.0; 4]);
        // unknown tokens use the reserved row
        assert_eq!(m.embed_profile(&["zzz".to_string()]), m.row(0));
    }

    #[test]
    fn rejects_bad_magic() {
        let mut buf = Vec::new();
        small_model(0).write_to(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(EncoderModel::read_from(buf.as_slice()), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn serialization_round_trips_bit_exactly(seed in any::<u64>(), w in proptest::collection::vec(-10.0f64..10.0, 4), b in -5.0f64..5.0) {
            let mut m = small_model(seed);
            m.head = Head { weights: w, bias: b };
            let mut buf = Vec::new();
            m.write_to(&mut buf).unwrap();
            let back = EncoderModel::read_from(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &m);
            let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(back.table()), bits(m.table()));
        }
    }
}
