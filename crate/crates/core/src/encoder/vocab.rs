// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};

pub const UNK: &str = "<unk>";
pub const UNK_INDEX: usize = 0;

fn is_strippable(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '…' | '«' | '»')
}

/// Lowercases, splits on whitespace and strips surrounding punctuation while
/// keeping a leading `#` or `@`.
pub fn tokenize(profile: &str) -> Vec<String> {
    profile
        .split_whitespace()
        .filter_map(|raw| {
            let lower = raw.to_lowercase();
            let head = lower.trim_start_matches(|c: char| is_strippable(c) && c != '#' && c != '@');
            let (prefix, body) = match head.chars().next() {
                Some(p @ ('#' | '@')) => (Some(p), &head[p.len_utf8()..]),
                _ => (None, head),
            };
            let body = body.trim_matches(is_strippable);
            if body.is_empty() {
                return None;
            }
            Some(match prefix {
                Some(p) => format!("{p}{body}"),
                None => body.to_string(),
            })
        })
        .collect()
}

/// Token to dense index map. Index 0 is reserved for unknown tokens; the rest
/// are assigned in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    min_frequency: u32,
}

impl Vocabulary {
    pub fn build<'a, I>(token_lists: I, min_frequency: u32) -> Vocabulary
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut freq: BTreeMap<&str, u32> = BTreeMap::new();
        for list in token_lists {
            for t in list {
                *freq.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let kept = freq
            .into_iter()
            .filter(|&(_, f)| f >= min_frequency.max(1))
            .map(|(t, _)| t.to_string());
        Vocabulary::from_tokens(kept, min_frequency)
    }

    /// `tokens` excludes the unknown marker, which is always prepended.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>, min_frequency: u32) -> Vocabulary {
        let mut all = vec![UNK.to_string()];
        all.extend(tokens.into_iter().filter(|t| t != UNK));
        let index = all.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            tokens: all,
            index,
            min_frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_frequency(&self) -> u32 {
        self.min_frequency
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.lookup(t)).collect()
    }
}
