// SPDX-License-Identifier: Apache-2.0

//! Seed labelling end to end: profiles and tweet records in, labels out.

use echoscope::ingest::{aggregate_users, TweetKind, TweetRecord};
use echoscope::seeding::{
    label_users, read_seeds_csv, write_seeds_csv, HashtagLexicon, Leaning, MediaOutlet, MediaOutletTable, SeedSource,
};

fn outlets() -> MediaOutletTable {
    MediaOutletTable::new([
        ("leftwire", "leftwire.example", 1),
        ("centerleft", "centerleft.example", 2),
        ("middle", "middle.example", 3),
        ("rightish", "rightish.example", 4),
        ("rightwire", "rightwire.example", 5),
    ]
    .map(|(h, d, b)| MediaOutlet {
        handle: h.into(),
        domain: d.into(),
        bias: b,
    }))
    .unwrap()
}

fn lexicon() -> HashtagLexicon {
    HashtagLexicon::new(["resist", "bluewave"], ["maga", "kag"]).unwrap()
}

struct Fixture {
    user: &'static str,
    profile: &'static str,
    retweets_of: &'static [&'static str],
    urls: &'static [&'static str],
    want: Option<(Leaning, SeedSource)>,
}

const FIXTURES: &[Fixture] = &[
    Fixture { user: "a", profile: "#resist teacher", retweets_of: &[], urls: &[], want: Some((Leaning::Left, SeedSource::Hashtag)) },
    Fixture { user: "b", profile: "#maga #resist #kag", retweets_of: &[], urls: &[], want: Some((Leaning::Right, SeedSource::Hashtag)) },
    Fixture { user: "c", profile: "#maga #resist", retweets_of: &[], urls: &[], want: None },
    Fixture { user: "d", profile: "", retweets_of: &[], urls: &[], want: None },
    Fixture { user: "e", profile: "news junkie", retweets_of: &["leftwire", "centerleft"], urls: &[], want: Some((Leaning::Left, SeedSource::Media)) },
    Fixture { user: "f", profile: "", retweets_of: &[], urls: &["https://www.rightwire.example/a", "http://rightwire.example/b?x=1"], want: Some((Leaning::Right, SeedSource::Media)) },
    Fixture { user: "g", profile: "", retweets_of: &["rightish"], urls: &["https://rightwire.example/story"], want: Some((Leaning::Right, SeedSource::Media)) },
    Fixture { user: "h", profile: "", retweets_of: &["rightish", "rightish"], urls: &[], want: None },
    Fixture { user: "i", profile: "", retweets_of: &["middle", "centerleft"], urls: &[], want: None },
    Fixture { user: "j", profile: "", retweets_of: &["leftwire"], urls: &[], want: None },
    Fixture { user: "k", profile: "#maga", retweets_of: &["leftwire", "leftwire"], urls: &[], want: Some((Leaning::Right, SeedSource::Hashtag)) },
    Fixture { user: "l", profile: "#maga #bluewave", retweets_of: &["leftwire", "centerleft"], urls: &[], want: Some((Leaning::Left, SeedSource::Media)) },
    Fixture { user: "m", profile: "", retweets_of: &[], urls: &["https://unknown.example/x", "https://leftwire.example/y"], want: None },
    Fixture { user: "n", profile: "", retweets_of: &[], urls: &["https://video.leftwire.example/x", "https://leftwire.example/y"], want: Some((Leaning::Left, SeedSource::Media)) },
];

fn records() -> Vec<TweetRecord> {
    let mut out = Vec::new();
    for f in FIXTURES {
        let base = TweetRecord {
            tweet_id: String::new(),
            user_id: f.user.into(),
            timestamp: "2020-06-01T00:00:00Z".into(),
            kind: TweetKind::Original,
            retweeted_user_id: None,
            mentioned_user_ids: Vec::new(),
            urls: Vec::new(),
            profile: f.profile.into(),
            followers: 5,
            verified: false,
            location: "Ohio".into(),
        };
        out.push(TweetRecord {
            tweet_id: format!("{}-0", f.user),
            ..base.clone()
        });
        for (i, h) in f.retweets_of.iter().enumerate() {
            out.push(TweetRecord {
                tweet_id: format!("{}-rt{i}", f.user),
                kind: TweetKind::Retweet,
                retweeted_user_id: Some((*h).into()),
                ..base.clone()
            });
        }
        for (i, u) in f.urls.iter().enumerate() {
            out.push(TweetRecord {
                tweet_id: format!("{}-url{i}", f.user),
                urls: vec![(*u).into()],
                ..base.clone()
            });
        }
    }
    out
}

#[test]
fn every_fixture_gets_its_expected_label() {
    let records = records();
    let users = aggregate_users(&records, &Default::default());
    let seeds = label_users(users.values(), &records, &lexicon(), &outlets());
    for f in FIXTURES {
        let got = seeds.get(f.user).map(|s| (s.label, s.source));
        assert_eq!(got, f.want, "user {}", f.user);
    }
    assert_eq!(seeds.len(), FIXTURES.iter().filter(|f| f.want.is_some()).count());
}

#[test]
fn seeds_round_trip_through_csv() {
    let records = records();
    let users = aggregate_users(&records, &Default::default());
    let seeds = label_users(users.values(), &records, &lexicon(), &outlets());
    let mut buf = Vec::new();
    write_seeds_csv(&seeds, &mut buf).unwrap();
    assert_eq!(read_seeds_csv(buf.as_slice()).unwrap(), seeds);
}
