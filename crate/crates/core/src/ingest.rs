// SPDX-License-Identifier: Apache-2.0

//! Tweet record parsing, per-user aggregation and user-level filters.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetKind {
    Original,
    Retweet,
    Quote,
    Reply,
}

impl TweetKind {
    pub const ALL: [TweetKind; 4] = [
        TweetKind::Original,
        TweetKind::Retweet,
        TweetKind::Quote,
        TweetKind::Reply,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TweetKind::Original => "original",
            TweetKind::Retweet => "retweet",
            TweetKind::Quote => "quote",
            TweetKind::Reply => "reply",
        }
    }
}

impl fmt::Display for TweetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub timestamp: String,
    pub kind: TweetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_user_id: Option<String>,
    #[serde(default)]
    pub mentioned_user_ids: Vec<String>,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub profile: String,
    #[serde(default)]
    pub followers: u64,
    #[serde(default)]
    pub verified: bool,
    #[serde(default)]
    pub location: String,
}

/// Lenient mirror of [`TweetRecord`] so missing required keys can be named.
#[derive(Deserialize)]
struct RawTweet {
    tweet_id: Option<String>,
    user_id: Option<String>,
    timestamp: Option<String>,
    kind: Option<TweetKind>,
    #[serde(default)]
    retweeted_user_id: Option<String>,
    #[serde(default)]
    mentioned_user_ids: Vec<String>,
    #[serde(default)]
    urls: Vec<String>,
    #[serde(default)]
    profile: String,
    #[serde(default)]
    followers: u64,
    #[serde(default)]
    verified: bool,
    #[serde(default)]
    location: String,
}

/// Parses one JSONL record. `line_no` is 1-based and only used for errors.
pub fn parse_tweet_line(line: &str, line_no: usize) -> Result<TweetRecord> {
    let raw: RawTweet = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    let missing = |field| Error::MissingField {
        line: line_no,
        field,
    };
    let record = TweetRecord {
        tweet_id: raw.tweet_id.ok_or_else(|| missing("tweet_id"))?,
        user_id: raw.user_id.ok_or_else(|| missing("user_id"))?,
        timestamp: raw.timestamp.ok_or_else(|| missing("timestamp"))?,
        kind: raw.kind.ok_or_else(|| missing("kind"))?,
        retweeted_user_id: raw.retweeted_user_id,
        mentioned_user_ids: raw.mentioned_user_ids,
        urls: raw.urls,
        profile: raw.profile,
        followers: raw.followers,
        verified: raw.verified,
        location: raw.location,
    };
    if matches!(record.kind, TweetKind::Retweet | TweetKind::Quote)
        && record.retweeted_user_id.is_none()
    {
        return Err(missing("retweeted_user_id"));
    }
    Ok(record)
}

/// Parses a whole JSONL stream. Blank lines are skipped; lines are parsed in
/// parallel but returned in file order.
pub fn read_tweets<R: Read>(reader: R) -> Result<Vec<TweetRecord>> {
    let lines: Vec<String> = BufReader::new(reader).lines().collect::<std::io::Result<_>>()?;
    lines
        .par_iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_tweet_line(l, i + 1))
        .collect()
}

pub fn read_tweets_file(path: &Path) -> Result<Vec<TweetRecord>> {
    read_tweets(File::open(path)?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub original: u64,
    pub retweet: u64,
    pub quote: u64,
    pub reply: u64,
}

impl KindCounts {
    pub fn get(&self, kind: TweetKind) -> u64 {
        match kind {
            TweetKind::Original => self.original,
            TweetKind::Retweet => self.retweet,
            TweetKind::Quote => self.quote,
            TweetKind::Reply => self.reply,
        }
    }

    pub fn add(&mut self, kind: TweetKind, n: u64) {
        match kind {
            TweetKind::Original => self.original += n,
            TweetKind::Retweet => self.retweet += n,
            TweetKind::Quote => self.quote += n,
            TweetKind::Reply => self.reply += n,
        }
    }

    pub fn total(&self) -> u64 {
        self.original + self.retweet + self.quote + self.reply
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub profile: String,
    pub followers: u64,
    pub verified: bool,
    pub location: String,
    pub bot_score: f64,
    pub counts: KindCounts,
}

/// Running per-user state. Merging two partial aggregates is commutative:
/// counts add and the snapshot with the greatest `(timestamp, tweet_id)` wins.
#[derive(Debug, Clone)]
struct Partial {
    latest_key: (String, String),
    profile: String,
    followers: u64,
    verified: bool,
    location: String,
    counts: KindCounts,
}

impl Partial {
    fn from_record(r: &TweetRecord) -> Partial {
        let mut counts = KindCounts::default();
        counts.add(r.kind, 1);
        Partial {
            latest_key: (r.timestamp.clone(), r.tweet_id.clone()),
            profile: r.profile.clone(),
            followers: r.followers,
            verified: r.verified,
            location: r.location.clone(),
            counts,
        }
    }

    fn merge(&mut self, other: Partial) {
        let mut counts = self.counts;
        for k in TweetKind::ALL {
            counts.add(k, other.counts.get(k));
        }
        if other.latest_key > self.latest_key {
            *self = other;
        }
        self.counts = counts;
    }
}

/// Collapses tweet records into one [`UserRecord`] per author.
///
/// Timestamps are compared as strings, which orders ISO-8601 values correctly
/// as long as they share one UTC offset format.
pub fn aggregate_users<'a, I>(records: I, bot_scores: &HashMap<String, f64>) -> BTreeMap<String, UserRecord>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    let mut partials: BTreeMap<String, Partial> = BTreeMap::new();
    for r in records {
        let p = Partial::from_record(r);
        match partials.get_mut(&r.user_id) {
            Some(existing) => existing.merge(p),
            None => {
                partials.insert(r.user_id.clone(), p);
            }
        }
    }
    partials
        .into_iter()
        .map(|(user_id, p)| {
            let bot_score = bot_scores.get(&user_id).copied().unwrap_or(0.0);
            let rec = UserRecord {
                user_id: user_id.clone(),
                profile: p.profile,
                followers: p.followers,
                verified: p.verified,
                location: p.location,
                bot_score,
                counts: p.counts,
            };
            (user_id, rec)
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct BotRow {
    user_id: String,
    bot_score: f64,
}

/// Reads `user_id,bot_score` CSV (with header).
pub fn read_bot_scores<R: Read>(reader: R) -> Result<HashMap<String, f64>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = HashMap::new();
    for row in rdr.deserialize() {
        let row: BotRow = row?;
        if !(0.0..=1.0).contains(&row.bot_score) {
            return Err(invalid(format!(
                "bot score {} for `{}` outside [0,1]",
                row.bot_score, row.user_id
            )));
        }
        out.insert(row.user_id, row.bot_score);
    }
    Ok(out)
}

const US_STATES: [(&str, &str); 50] = [
    ("alabama", "AL"),
    ("alaska", "AK"),
    ("arizona", "AZ"),
    ("arkansas", "AR"),
    ("california", "CA"),
    ("colorado", "CO"),
    ("connecticut", "CT"),
    ("delaware", "DE"),
    ("florida", "FL"),
    ("georgia", "GA"),
    ("hawaii", "HI"),
    ("idaho", "ID"),
    ("illinois", "IL"),
    ("indiana", "IN"),
    ("iowa", "IA"),
    ("kansas", "KS"),
    ("kentucky", "KY"),
    ("louisiana", "LA"),
    ("maine", "ME"),
    ("maryland", "MD"),
    ("massachusetts", "MA"),
    ("michigan", "MI"),
    ("minnesota", "MN"),
    ("mississippi", "MS"),
    ("missouri", "MO"),
    ("montana", "MT"),
    ("nebraska", "NE"),
    ("nevada", "NV"),
    ("new hampshire", "NH"),
    ("new jersey", "NJ"),
    ("new mexico", "NM"),
    ("new york", "NY"),
    ("north carolina", "NC"),
    ("north dakota", "ND"),
    ("ohio", "OH"),
    ("oklahoma", "OK"),
    ("oregon", "OR"),
    ("pennsylvania", "PA"),
    ("rhode island", "RI"),
    ("south carolina", "SC"),
    ("south dakota", "SD"),
    ("tennessee", "TN"),
    ("texas", "TX"),
    ("utah", "UT"),
    ("vermont", "VT"),
    ("virginia", "VA"),
    ("washington", "WA"),
    ("west virginia", "WV"),
    ("wisconsin", "WI"),
    ("wyoming", "WY"),
];

/// Place names and abbreviations accepted as US locations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    /// Lowercase phrases, stored pre-tokenized.
    full_names: BTreeSet<Vec<String>>,
    abbreviations: BTreeSet<String>,
}

impl Gazetteer {
    pub fn new() -> Gazetteer {
        Gazetteer::default()
    }

    pub fn add_name(&mut self, name: &str) {
        let tokens = name_tokens(name);
        if !tokens.is_empty() {
            self.full_names.insert(tokens);
        }
    }

    pub fn add_abbreviation(&mut self, abbr: &str) {
        let abbr = abbr.trim();
        if !abbr.is_empty() {
            self.abbreviations.insert(abbr.to_string());
        }
    }

    /// The 50 states plus "USA", "United States", "US" and "America".
    pub fn us_default() -> Gazetteer {
        let mut g = Gazetteer::new();
        for (name, code) in US_STATES {
            g.add_name(name);
            g.add_abbreviation(code);
        }
        g.add_name("united states");
        g.add_name("america");
        g.add_abbreviation("USA");
        g.add_abbreviation("US");
        g
    }

    /// Parses the plain-text form: one entry per line, `ABBR:XX` for
    /// abbreviations and `NAME:phrase` (or a bare phrase) for full names.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Gazetteer {
        let mut g = Gazetteer::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("ABBR:") {
                g.add_abbreviation(rest);
            } else if let Some(rest) = line.strip_prefix("NAME:") {
                g.add_name(rest);
            } else {
                g.add_name(line);
            }
        }
        g
    }

    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for name in &self.full_names {
            out.push_str("NAME:");
            out.push_str(&name.join(" "));
            out.push('\n');
        }
        for abbr in &self.abbreviations {
            out.push_str("ABBR:");
            out.push_str(abbr);
            out.push('\n');
        }
        out
    }
}

fn name_tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

pub fn is_us_location(location: &str, gaz: &Gazetteer) -> bool {
    if location.trim().is_empty() {
        return false;
    }
    let abbr_hit = location
        .split(|c: char| c == ',' || c.is_whitespace())
        .any(|t| gaz.abbreviations.contains(t));
    if abbr_hit {
        return true;
    }
    let tokens = name_tokens(location);
    gaz.full_names
        .iter()
        .any(|phrase| tokens.windows(phrase.len()).any(|w| w == phrase.as_slice()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    NonUsLocation,
    EmptyProfile,
    LowDegree,
    BotScore,
}

impl RemovalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::NonUsLocation => "non_us_location",
            RemovalReason::EmptyProfile => "empty_profile",
            RemovalReason::LowDegree => "low_degree",
            RemovalReason::BotScore => "bot_score",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub retained: BTreeSet<String>,
    pub removed: BTreeMap<String, RemovalReason>,
}

/// The `ceil(fraction * n)` users with the highest bot scores; ties remove
/// the larger user id first.
pub fn top_bot_users<'a, I>(users: I, fraction: f64) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a UserRecord>,
{
    let mut ranked: Vec<&UserRecord> = users.into_iter().collect();
    let k = (fraction * ranked.len() as f64).ceil() as usize;
    ranked.sort_by(|a, b| b.bot_score.total_cmp(&a.bot_score).then_with(|| b.user_id.cmp(&a.user_id)));
    ranked.into_iter().take(k).map(|u| u.user_id.clone()).collect()
}

/// Removes non-US users, users with blank profiles, then the
/// `ceil(bot_fraction * n)` highest bot scores among the survivors.
///
/// Ties on bot score remove the larger user id first.
pub fn filter_users<'a, I>(users: I, gaz: &Gazetteer, bot_fraction: f64) -> Result<FilterOutcome>
where
    I: IntoIterator<Item = &'a UserRecord>,
{
    if !(0.0..1.0).contains(&bot_fraction) {
        return Err(invalid(format!("bot_fraction {bot_fraction} outside [0,1)")));
    }
    let mut out = FilterOutcome::default();
    let mut survivors: Vec<&UserRecord> = Vec::new();
    for u in users {
        if !is_us_location(&u.location, gaz) {
            out.removed.insert(u.user_id.clone(), RemovalReason::NonUsLocation);
        } else if u.profile.trim().is_empty() {
            out.removed.insert(u.user_id.clone(), RemovalReason::EmptyProfile);
        } else {
            survivors.push(u);
        }
    }
    let bots = top_bot_users(survivors.iter().copied(), bot_fraction);
    for u in survivors {
        if bots.contains(&u.user_id) {
            out.removed.insert(u.user_id.clone(), RemovalReason::BotScore);
        } else {
            out.retained.insert(u.user_id.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(extra: &str) -> String {
        format!(
            r#"{{"tweet_id":"t1","user_id":"u1","timestamp":"2020-03-01T00:00:00Z","kind":"retweet","retweeted_user_id":"u2"{extra}}}"#
        )
    }

    fn user(id: &str, profile: &str, location: &str, bot: f64) -> UserRecord {
        UserRecord {
            user_id: id.to_string(),
            profile: profile.to_string(),
            followers: 0,
            verified: false,
            location: location.to_string(),
            bot_score: bot,
            counts: KindCounts::default(),
        }
    }

    #[test]
    fn parses_retweet_with_defaults() {
        let r = parse_tweet_line(&line(r#","surprise":1"#), 1).unwrap();
        assert_eq!(r.kind, TweetKind::Retweet);
        assert_eq!(r.retweeted_user_id.as_deref(), Some("u2"));
        assert!(r.mentioned_user_ids.is_empty());
        assert!(r.urls.is_empty());
        assert_eq!(r.followers, 0);
    }

    #[test]
    fn missing_user_id_is_named() {
        let l = r#"{"tweet_id":"t1","timestamp":"x","kind":"original"}"#;
        match parse_tweet_line(l, 7) {
            Err(Error::MissingField { line, field }) => {
                assert_eq!(line, 7);
                assert_eq!(field, "user_id");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn retweet_requires_target() {
        let l = r#"{"tweet_id":"t1","user_id":"u","timestamp":"x","kind":"quote"}"#;
        assert!(matches!(
            parse_tweet_line(l, 1),
            Err(Error::MissingField { field: "retweeted_user_id", .. })
        ));
    }

    #[test]
    fn malformed_line_carries_line_number() {
        assert!(matches!(parse_tweet_line("{not json", 3), Err(Error::Parse { line: 3, .. })));
        let neg = r#"{"tweet_id":"t","user_id":"u","timestamp":"x","kind":"original","followers":-4}"#;
        assert!(matches!(parse_tweet_line(neg, 2), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn read_tweets_skips_blank_lines() {
        let text = format!("{}\n\n{}\n", line(""), line(""));
        assert_eq!(read_tweets(text.as_bytes()).unwrap().len(), 2);
        let bad = format!("{}\n{{oops\n", line(""));
        assert!(matches!(read_tweets(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn location_matching() {
        let g = Gazetteer::us_default();
        assert!(is_us_location("Los Angeles, CA", &g));
        assert!(is_us_location("somewhere in new york", &g));
        assert!(is_us_location("USA", &g));
        assert!(!is_us_location("Toronto, Canada", &g));
        assert!(!is_us_location("", &g));
        // abbreviations are case-sensitive standalone tokens
        assert!(!is_us_location("ca", &g));
        assert!(!is_us_location("CANADA", &g));
    }

    #[test]
    fn gazetteer_config_round_trip() {
        let g = Gazetteer::parse("# comment\nABBR:ZZ\nNAME:Far Land\nnear land\n");
        assert!(is_us_location("a ZZ b", &g));
        assert!(is_us_location("FAR LAND", &g));
        assert!(is_us_location("near land", &g));
        assert!(!is_us_location("far", &g));
        assert_eq!(Gazetteer::parse(&g.to_config_text()), g);
    }

    fn rec(user: &str, ts: &str, kind: TweetKind, profile: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: format!("{user}-{ts}"),
            user_id: user.into(),
            timestamp: ts.into(),
            kind,
            retweeted_user_id: None,
            mentioned_user_ids: vec![],
            urls: vec![],
            profile: profile.into(),
            followers: 1,
            verified: false,
            location: "TX".into(),
        }
    }

    #[test]
    fn aggregation_counts_and_recency() {
        let records = vec![
            rec("a", "2020-01-02", TweetKind::Retweet, "new"),
            rec("a", "2020-01-01", TweetKind::Retweet, "old"),
            rec("a", "2020-01-01T05", TweetKind::Original, "mid"),
        ];
        let users = aggregate_users(&records, &HashMap::new());
        let a = &users["a"];
        assert_eq!(a.counts.retweet, 2);
        assert_eq!(a.counts.original, 1);
        assert_eq!(a.counts.total(), 3);
        assert_eq!(a.profile, "new");
        assert_eq!(a.bot_score, 0.0);
    }

    #[test]
    fn bot_filter_removes_top_fraction() {
        let users: Vec<_> = (0..10)
            .map(|i| user(&format!("u{i}"), "hi", "CA", i as f64 / 10.0))
            .collect();
        let out = filter_users(&users, &Gazetteer::us_default(), 0.10).unwrap();
        assert_eq!(out.retained.len(), 9);
        assert_eq!(out.removed.get("u9"), Some(&RemovalReason::BotScore));
        let none = filter_users(&users, &Gazetteer::us_default(), 0.0).unwrap();
        assert_eq!(none.retained.len(), 10);
    }

    #[test]
    fn bot_ties_remove_higher_id_first() {
        let users = vec![user("a", "x", "CA", 0.5), user("b", "x", "CA", 0.5)];
        let out = filter_users(&users, &Gazetteer::us_default(), 0.1).unwrap();
        assert_eq!(out.removed.get("b"), Some(&RemovalReason::BotScore));
        assert!(out.retained.contains("a"));
    }

    #[test]
    fn blank_profile_and_location_removed() {
        let users = vec![user("a", "  ", "CA", 0.0), user("b", "x", "Paris", 0.0)];
        let out = filter_users(&users, &Gazetteer::us_default(), 0.0).unwrap();
        assert_eq!(out.removed["a"], RemovalReason::EmptyProfile);
        assert_eq!(out.removed["b"], RemovalReason::NonUsLocation);
        assert!(out.retained.is_empty());
        assert!(filter_users(&users, &Gazetteer::us_default(), 1.0).is_err());
    }
}
