// SPDX-License-Identifier: Apache-2.0

//! Weak-supervision seed labels from profile hashtags and media-outlet
//! endorsements.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ingest::{TweetKind, TweetRecord, UserRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Leaning {
    Left,
    Right,
}

impl Leaning {
    /// 0 for Left, 1 for Right.
    pub fn as_binary(self) -> u8 {
        match self {
            Leaning::Left => 0,
            Leaning::Right => 1,
        }
    }

    pub fn flipped(self) -> Leaning {
        match self {
            Leaning::Left => Leaning::Right,
            Leaning::Right => Leaning::Left,
        }
    }
}

impl fmt::Display for Leaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leaning::Left => "Left",
            Leaning::Right => "Right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Hashtag,
    Media,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HashtagLexicon {
    left: BTreeSet<String>,
    right: BTreeSet<String>,
}

fn normalize_tag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

impl HashtagLexicon {
    pub fn new<L, R>(left: L, right: R) -> Result<HashtagLexicon>
    where
        L: IntoIterator,
        L::Item: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let left: BTreeSet<String> = left.into_iter().map(|t| normalize_tag(t.as_ref())).collect();
        let right: BTreeSet<String> = right.into_iter().map(|t| normalize_tag(t.as_ref())).collect();
        if let Some(both) = left.intersection(&right).next() {
            return Err(invalid(format!("hashtag `{both}` listed on both sides")));
        }
        Ok(HashtagLexicon { left, right })
    }

    /// Built-in placeholder lexicon; operators extend it through the TSV file.
    pub fn default_lexicon() -> HashtagLexicon {
        HashtagLexicon::new(["theresistance", "voteblue"], ["maga", "kag"]).expect("disjoint")
    }

    /// Parses `tag<TAB>L|R` lines. Blank lines, and `#` lines without a
    /// second column, are skipped.
    pub fn parse_tsv(text: &str) -> Result<HashtagLexicon> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let tag = cols.next().unwrap_or_default();
            match cols.next().map(str::trim) {
                Some("L") => left.push(tag.to_string()),
                Some("R") => right.push(tag.to_string()),
                None if tag.trim_start().starts_with('#') => {}
                other => {
                    return Err(invalid(format!("lexicon line {}: bad side {:?}", i + 1, other)));
                }
            }
        }
        HashtagLexicon::new(left, right)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.left {
            out.push_str(&format!("{t}\tL\n"));
        }
        for t in &self.right {
            out.push_str(&format!("{t}\tR\n"));
        }
        out
    }

    /// Tags of one side in lexicographic order.
    pub fn tags(&self, side: Leaning) -> impl Iterator<Item = &str> {
        match side {
            Leaning::Left => &self.left,
            Leaning::Right => &self.right,
        }
        .iter()
        .map(String::as_str)
    }

    pub fn side(&self, tag: &str) -> Option<Leaning> {
        if self.left.contains(tag) {
            Some(Leaning::Left)
        } else if self.right.contains(tag) {
            Some(Leaning::Right)
        } else {
            None
        }
    }
}

/// Lowercased hashtags in `text`, without the `#`. A tag runs over
/// alphanumerics and underscores.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    for token in text.split_whitespace() {
        if let Some(rest) = token.strip_prefix('#') {
            let tag: String = rest
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            if !tag.is_empty() {
                tags.push(tag.to_lowercase());
            }
        }
    }
    tags
}

/// Strict majority of lexicon hits in the profile; ties and no hits give `None`.
pub fn hashtag_label(profile: &str, lex: &HashtagLexicon) -> Option<Leaning> {
    let (mut left, mut right) = (0usize, 0usize);
    for tag in extract_hashtags(profile) {
        match lex.side(&tag) {
            Some(Leaning::Left) => left += 1,
            Some(Leaning::Right) => right += 1,
            None => {}
        }
    }
    match left.cmp(&right) {
        std::cmp::Ordering::Greater => Some(Leaning::Left),
        std::cmp::Ordering::Less => Some(Leaning::Right),
        std::cmp::Ordering::Equal => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaOutlet {
    pub handle: String,
    pub domain: String,
    pub bias: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MediaOutletTable {
    outlets: Vec<MediaOutlet>,
    by_handle: HashMap<String, u8>,
}

impl MediaOutletTable {
    pub fn new(rows: impl IntoIterator<Item = MediaOutlet>) -> Result<MediaOutletTable> {
        let mut table = MediaOutletTable::default();
        let mut domains = BTreeSet::new();
        for mut row in rows {
            row.handle = row.handle.trim().trim_start_matches('@').to_lowercase();
            row.domain = registrable_host(&row.domain.to_lowercase());
            if !(1..=5).contains(&row.bias) {
                return Err(invalid(format!("outlet `{}` bias {} outside 1..5", row.handle, row.bias)));
            }
            if table.by_handle.insert(row.handle.clone(), row.bias).is_some() {
                return Err(invalid(format!("duplicate outlet handle `{}`", row.handle)));
            }
            if !domains.insert(row.domain.clone()) {
                return Err(invalid(format!("duplicate outlet domain `{}`", row.domain)));
            }
            table.outlets.push(row);
        }
        Ok(table)
    }

    /// Parses `handle<TAB>domain<TAB>bias` lines.
    pub fn parse_tsv(text: &str) -> Result<MediaOutletTable> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(invalid(format!("outlet line {}: expected 3 columns", i + 1)));
            }
            let bias = cols[2]
                .trim()
                .parse::<u8>()
                .map_err(|e| invalid(format!("outlet line {}: {e}", i + 1)))?;
            rows.push(MediaOutlet {
                handle: cols[0].to_string(),
                domain: cols[1].to_string(),
                bias,
            });
        }
        MediaOutletTable::new(rows)
    }

    pub fn to_tsv(&self) -> String {
        self.outlets
            .iter()
            .map(|o| format!("{}\t{}\t{}\n", o.handle, o.domain, o.bias))
            .collect()
    }

    pub fn outlets(&self) -> &[MediaOutlet] {
        &self.outlets
    }

    pub fn bias_for_handle(&self, handle: &str) -> Option<u8> {
        self.by_handle.get(&handle.to_lowercase()).copied()
    }

    /// Bias of the outlet whose domain is the URL host or a parent of it.
    /// The longest matching domain wins.
    pub fn bias_for_url(&self, url: &str) -> Option<u8> {
        let host = registrable_host(&url.to_lowercase());
        self.outlets
            .iter()
            .filter(|o| host == o.domain || host.ends_with(&format!(".{}", o.domain)))
            .max_by_key(|o| o.domain.len())
            .map(|o| o.bias)
    }
}

/// Host part of a URL with scheme, credentials, port, path and a leading
/// `www.` removed.
pub fn registrable_host(url: &str) -> String {
    let rest = url.trim();
    let rest = rest.split_once("://").map_or(rest, |(_, r)| r);
    let rest = rest.split(['/', '?', '#']).next().unwrap_or_default();
    let rest = rest.rsplit_once('@').map_or(rest, |(_, r)| r);
    let rest = rest.split(':').next().unwrap_or_default();
    let rest = rest.trim_end_matches('.');
    rest.strip_prefix("www.").unwrap_or(rest).to_string()
}

/// One bias value per endorsement: each retweet of an outlet account and
/// each URL pointing at an outlet domain.
pub fn media_endorsements<'a, I>(records: I, outlets: &MediaOutletTable) -> Vec<u8>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    let mut out = Vec::new();
    for r in records {
        if r.kind == TweetKind::Retweet {
            if let Some(b) = r.retweeted_user_id.as_deref().and_then(|h| outlets.bias_for_handle(h)) {
                out.push(b);
            }
        }
        out.extend(r.urls.iter().filter_map(|u| outlets.bias_for_url(u)));
    }
    out
}

/// Needs at least two endorsements; mean ≤ 2 is Left, mean > 4 is Right.
pub fn media_label(biases: &[u8]) -> Option<Leaning> {
    if biases.len() < 2 {
        return None;
    }
    let sum: u32 = biases.iter().map(|&b| b as u32).sum();
    let n = biases.len() as u32;
    // compare sum against n*2 and n*4 to stay exact
    if sum <= 2 * n {
        Some(Leaning::Left)
    } else if sum > 4 * n {
        Some(Leaning::Right)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLabel {
    pub label: Leaning,
    pub source: SeedSource,
}

/// The hashtag rule takes precedence over the media rule.
pub fn combine_seed_labels(hashtag: Option<Leaning>, media: Option<Leaning>) -> Option<SeedLabel> {
    match (hashtag, media) {
        (Some(label), _) => Some(SeedLabel {
            label,
            source: SeedSource::Hashtag,
        }),
        (None, Some(label)) => Some(SeedLabel {
            label,
            source: SeedSource::Media,
        }),
        (None, None) => None,
    }
}

pub type SeedLabelTable = BTreeMap<String, SeedLabel>;

/// Seeds every user in `users` that either rule labels.
pub fn label_users<'a, U, R>(
    users: U,
    records: R,
    lex: &HashtagLexicon,
    outlets: &MediaOutletTable,
) -> SeedLabelTable
where
    U: IntoIterator<Item = &'a UserRecord>,
    R: IntoIterator<Item = &'a TweetRecord>,
{
    let mut by_user: HashMap<&str, Vec<&TweetRecord>> = HashMap::new();
    for r in records {
        by_user.entry(r.user_id.as_str()).or_default().push(r);
    }
    let mut table = SeedLabelTable::new();
    for u in users {
        let hashtag = hashtag_label(&u.profile, lex);
        let media = by_user
            .get(u.user_id.as_str())
            .map(|rs| media_label(&media_endorsements(rs.iter().copied(), outlets)))
            .unwrap_or(None);
        if let Some(seed) = combine_seed_labels(hashtag, media) {
            table.insert(u.user_id.clone(), seed);
        }
    }
    table
}

#[derive(Debug, Serialize, Deserialize)]
struct SeedRow {
    user_id: String,
    label: Leaning,
    source: SeedSource,
}

pub fn write_seeds_csv<W: Write>(seeds: &SeedLabelTable, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for (user_id, s) in seeds {
        wtr.serialize(SeedRow {
            user_id: user_id.clone(),
            label: s.label,
            source: s.source,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_seeds_csv<R: Read>(r: R) -> Result<SeedLabelTable> {
    let mut table = SeedLabelTable::new();
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: SeedRow = row?;
        table.insert(
            row.user_id,
            SeedLabel {
                label: row.label,
                source: row.source,
            },
        );
    }
    Ok(table)
}
