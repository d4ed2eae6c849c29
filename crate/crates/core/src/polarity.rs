// SPDX-License-Identifier: Apache-2.0

//! Population scoring, decile binning and partisan groups.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::encoder::EncoderModel;
use crate::error::{invalid, Result};
use crate::seeding::{Leaning, SeedLabelTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PartisanGroup {
    #[serde(rename = "left")]
    LeftGroup,
    #[serde(rename = "neutral")]
    NeutralGroup,
    #[serde(rename = "right")]
    RightGroup,
    #[serde(rename = "other")]
    Other,
}

impl PartisanGroup {
    pub const ALL: [PartisanGroup; 4] = [
        PartisanGroup::LeftGroup,
        PartisanGroup::NeutralGroup,
        PartisanGroup::RightGroup,
        PartisanGroup::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PartisanGroup::LeftGroup => "left",
            PartisanGroup::NeutralGroup => "neutral",
            PartisanGroup::RightGroup => "right",
            PartisanGroup::Other => "other",
        }
    }
}

impl fmt::Display for PartisanGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Deciles 1–2 are Left, 5–6 Neutral, 9–10 Right.
pub fn partisan_group(decile: u8) -> Result<PartisanGroup> {
    match decile {
        1 | 2 => Ok(PartisanGroup::LeftGroup),
        5 | 6 => Ok(PartisanGroup::NeutralGroup),
        9 | 10 => Ok(PartisanGroup::RightGroup),
        3 | 4 | 7 | 8 => Ok(PartisanGroup::Other),
        _ => Err(invalid(format!("decile {decile} outside 1..10"))),
    }
}

/// Scores every user in `profiles`. Seeds are pinned to 0 (Left) or 1
/// (Right) when `pin_seeds` is set, otherwise scored by the model like
/// everyone else.
pub fn score_all_users<'a, I>(
    model: &EncoderModel,
    profiles: I,
    seeds: &SeedLabelTable,
    pin_seeds: bool,
) -> BTreeMap<String, f64>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    profiles
        .into_iter()
        .map(|(id, profile)| {
            let score = match seeds.get(id) {
                Some(seed) if pin_seeds => match seed.label {
                    Leaning::Left => 0.0,
                    Leaning::Right => 1.0,
                },
                _ => model.predict_score(profile),
            };
            (id.to_string(), score)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityEntry {
    pub user_id: String,
    pub score: f64,
    pub decile: u8,
}

impl PolarityEntry {
    pub fn group(&self) -> PartisanGroup {
        partisan_group(self.decile).expect("decile in range")
    }
}

/// Users in ascending `(score, user_id)` order with their deciles.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarityTable {
    entries: Vec<PolarityEntry>,
    index: HashMap<String, usize>,
}

/// Sorts by `(score, user_id)` and cuts ten contiguous bins; with `n mod 10
/// = r`, the first `r` bins get one extra user.
pub fn assign_deciles(scores: &BTreeMap<String, f64>) -> Result<PolarityTable> {
    let n = scores.len();
    if n < 10 {
        return Err(invalid(format!("need at least 10 users to form deciles, got {n}")));
    }
    if let Some((id, _)) = scores.iter().find(|(_, s)| s.is_nan()) {
        return Err(invalid(format!("NaN score for `{id}`")));
    }
    let mut ordered: Vec<(&String, f64)> = scores.iter().map(|(k, &v)| (k, v)).collect();
    ordered.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let base = n / 10;
    let extra = n % 10;
    let mut entries = Vec::with_capacity(n);
    let mut it = ordered.into_iter();
    for bin in 0..10 {
        let size = base + usize::from(bin < extra);
        for (id, score) in it.by_ref().take(size) {
            entries.push(PolarityEntry {
                user_id: id.clone(),
                score,
                decile: bin as u8 + 1,
            });
        }
    }
    Ok(PolarityTable::from_entries(entries))
}

impl PolarityTable {
    fn from_entries(entries: Vec<PolarityEntry>) -> PolarityTable {
        let index = entries.iter().enumerate().map(|(i, e)| (e.user_id.clone(), i)).collect();
        PolarityTable { entries, index }
    }

    pub fn entries(&self) -> &[PolarityEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, user_id: &str) -> Option<&PolarityEntry> {
        self.index.get(user_id).map(|&i| &self.entries[i])
    }

    pub fn decile(&self, user_id: &str) -> Option<u8> {
        self.get(user_id).map(|e| e.decile)
    }

    pub fn group(&self, user_id: &str) -> Option<PartisanGroup> {
        self.get(user_id).map(PolarityEntry::group)
    }

    pub fn decile_sizes(&self) -> [usize; 10] {
        let mut sizes = [0; 10];
        for e in &self.entries {
            sizes[e.decile as usize - 1] += 1;
        }
        sizes
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["user_id", "score", "decile", "group"])?;
        for e in &self.entries {
            wtr.write_record([
                e.user_id.as_str(),
                &e.score.to_string(),
                &e.decile.to_string(),
                e.group().as_str(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`PolarityTable::write_csv`]; the `group`
    /// column is recomputed from the decile.
    pub fn read_csv<R: Read>(r: R) -> Result<PolarityTable> {
        #[derive(Deserialize)]
        struct Row {
            user_id: String,
            score: f64,
            decile: u8,
        }
        let mut entries = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: Row = row?;
            partisan_group(row.decile)?;
            entries.push(PolarityEntry {
                user_id: row.user_id,
                score: row.score,
                decile: row.decile,
            });
        }
        Ok(PolarityTable::from_entries(entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::Vocabulary;
    use crate::seeding::{SeedLabel, SeedSource};
    use proptest::prelude::*;

    fn scores(n: usize) -> BTreeMap<String, f64> {
        (0..n).map(|i| (format!("u{i:03}"), (i * 7 % n) as f64 / n as f64)).collect()
    }

    #[test]
    fn remainder_rule() {
        assert_eq!(assign_deciles(&scores(20)).unwrap().decile_sizes(), [2; 10]);
        assert_eq!(
            assign_deciles(&scores(23)).unwrap().decile_sizes(),
            [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]
        );
        assert!(assign_deciles(&scores(9)).is_err());
    }

    #[test]
    fn ties_ordered_by_user_id() {
        let s: BTreeMap<String, f64> = (0..10).map(|i| (format!("u{i}"), 0.3)).collect();
        let t = assign_deciles(&s).unwrap();
        for i in 0..10 {
            assert_eq!(t.decile(&format!("u{i}")), Some(i as u8 + 1));
        }
    }

    #[test]
    fn groups() {
        assert_eq!(partisan_group(1).unwrap(), PartisanGroup::LeftGroup);
        assert_eq!(partisan_group(10).unwrap(), PartisanGroup::RightGroup);
        assert_eq!(partisan_group(4).unwrap(), PartisanGroup::Other);
        assert_eq!(partisan_group(6).unwrap(), PartisanGroup::NeutralGroup);
        assert!(partisan_group(0).is_err());
        assert!(partisan_group(11).is_err());
    }

    #[test]
    fn pinning() {
        let vocab = Vocabulary::from_tokens(["a".to_string()], 1);
        let model = EncoderModel::init(vocab, 2, 0).unwrap();
        let mut seeds = SeedLabelTable::new();
        seeds.insert("l".into(), SeedLabel { label: Leaning::Left, source: SeedSource::Hashtag });
        let profiles = [("l", "a"), ("x", "a")];
        let pinned = score_all_users(&model, profiles, &seeds, true);
        assert_eq!(pinned["l"], 0.0);
        assert_eq!(pinned["x"], 0.5);
        let free = score_all_users(&model, profiles, &seeds, false);
        assert!(free.values().all(|&s| s > 0.0 && s < 1.0));
        assert_eq!(free, score_all_users(&model, profiles, &seeds, false));
    }

    #[test]
    fn csv_round_trip() {
        let t = assign_deciles(&scores(12)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("user_id,score,decile,group\n"));
        assert_eq!(PolarityTable::read_csv(buf.as_slice()).unwrap(), t);
    }

    proptest! {
        #[test]
        fn deciles_are_monotone_and_balanced(raw in proptest::collection::vec(0u8..20, 10..200)) {
            let s: BTreeMap<String, f64> = raw.iter().enumerate().map(|(i, v)| (format!("u{i:04}"), *v as f64)).collect();
            let t = assign_deciles(&s).unwrap();
            let sizes = t.decile_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), s.len());
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for w in t.entries().windows(2) {
                prop_assert!(w[0].decile <= w[1].decile);
                prop_assert!(w[0].score <= w[1].score);
            }
        }
    }
}
