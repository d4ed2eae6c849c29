// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each reads its predecessors' artifacts from
//! the work directory and finishes by writing its own manifest.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use echoscope::analysis::{
    audience_distribution, influence_report, popular_users, role_statistics, rwc_heatmap_svg, rwc_matrix,
};
use echoscope::encoder::{evaluate_methods, fit_polarity_model, EncoderModel};
use echoscope::graph::{pagerank, preprocess, read_graph_csv, write_edges_csv, write_nodes_csv, GraphKind, InteractionGraph, PageRankVector};
use echoscope::ingest::{aggregate_users, read_bot_scores, read_tweets_file, Gazetteer, TweetRecord, UserRecord};
use echoscope::polarity::{assign_deciles, score_all_users, PolarityTable};
use echoscope::seeding::{label_users, read_seeds_csv, write_seeds_csv, HashtagLexicon, MediaOutletTable, SeedLabelTable};
use echoscope::synth::{
    generate_dataset, BOT_SCORES_FILE, GAZETTEER_FILE, GROUND_TRUTH_FILE, LEXICON_FILE, OUTLETS_FILE, TWEETS_FILE,
};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Analysis;
use crate::config::{stage_seed, PipelineConfig};
use crate::error::CliError;
use crate::manifest::{digest, manifest_file, FileDigest, Manifest};

pub const USERS: &str = "users.jsonl";
pub const RETWEET_EDGES: &str = "retweet_edges.csv";
pub const RETWEET_NODES: &str = "retweet_nodes.csv";
pub const MENTION_EDGES: &str = "mention_edges.csv";
pub const MENTION_NODES: &str = "mention_nodes.csv";
pub const REMOVED: &str = "removed.csv";
pub const PAGERANK: &str = "pagerank.csv";
pub const SEEDS: &str = "seeds.csv";
pub const MODEL: &str = "model.bin";
pub const TRAIN_REPORT: &str = "train_report.json";
pub const POLARITY: &str = "polarity.csv";
pub const EVAL: &str = "eval.json";
pub const ANALYSIS_DIR: &str = "analysis";
pub const REPORT_DIR: &str = "report";

pub struct Context {
    pub work: PathBuf,
    pub cfg: PipelineConfig,
}

fn data<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{what}: {e}"))
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.work.join(name)
    }

    /// The manifest of `stage`, or a usage error telling `command` to run it.
    fn require(&self, stage: &str, command: &str) -> Result<Manifest, CliError> {
        if !self.path(&manifest_file(stage)).exists() {
            return Err(CliError::Usage(format!(
                "`{command}` needs the output of `{stage}`; run `echoscope {stage}` first (work directory {})",
                self.work.display()
            )));
        }
        Manifest::read(&self.work, stage)
    }

    fn finish(
        &self,
        stage: &str,
        dir: &Path,
        inputs: Vec<FileDigest>,
        outputs: &[&str],
        summary: Map<String, Value>,
    ) -> Result<Manifest, CliError> {
        let outputs = outputs
            .iter()
            .map(|name| digest(name, name, &dir.join(name)))
            .collect::<Result<Vec<_>, _>>()?;
        let m = Manifest {
            stage: stage.to_string(),
            stage_seed: stage_seed(self.cfg.seed, stage),
            config: self.cfg.clone(),
            inputs,
            outputs,
            summary,
        };
        m.write(dir)?;
        Ok(m)
    }

    /// Work-directory artifacts of earlier stages, recorded as inputs.
    fn artifact_inputs(&self, names: &[&str]) -> Result<Vec<FileDigest>, CliError> {
        names.iter().map(|n| digest(n, n, &self.path(n))).collect()
    }

    fn tweets(&self, command: &str) -> Result<(Vec<TweetRecord>, FileDigest), CliError> {
        let ingest = self.require("ingest", command)?;
        let d = ingest
            .input("tweets")
            .cloned()
            .ok_or_else(|| CliError::Data("ingest manifest lists no tweets file".into()))?;
        let now = digest("tweets", &d.path, Path::new(&d.path))?;
        if now.sha256 != d.sha256 {
            return Err(CliError::Data(format!("{} changed since ingest; rerun `echoscope ingest`", d.path)));
        }
        let records = read_tweets_file(Path::new(&d.path)).map_err(data(&d.path))?;
        Ok((records, d))
    }

    fn users(&self) -> Result<BTreeMap<String, UserRecord>, CliError> {
        let text = fs::read_to_string(self.path(USERS))?;
        let mut users = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let u: UserRecord = serde_json::from_str(line).map_err(|e| CliError::Data(format!("{USERS} line {}: {e}", i + 1)))?;
            users.insert(u.user_id.clone(), u);
        }
        Ok(users)
    }

    fn graph(&self, kind: GraphKind) -> Result<InteractionGraph, CliError> {
        let (nodes, edges) = match kind {
            GraphKind::Retweet => (RETWEET_NODES, RETWEET_EDGES),
            GraphKind::Mention => (MENTION_NODES, MENTION_EDGES),
        };
        let (g, _) = read_graph_csv(kind, fs::File::open(self.path(nodes))?, fs::File::open(self.path(edges))?)?;
        Ok(g)
    }

    fn pagerank(&self, g: &InteractionGraph) -> Result<PageRankVector, CliError> {
        let mut values = vec![f64::NAN; g.node_count()];
        for row in csv::Reader::from_path(self.path(PAGERANK))?.deserialize() {
            let (id, value): (String, f64) = row?;
            let u = g.node(&id).ok_or_else(|| CliError::Data(format!("{PAGERANK}: unknown user `{id}`")))?;
            values[u] = value;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(CliError::Data(format!("{PAGERANK} does not cover the retweet graph")));
        }
        Ok(PageRankVector {
            values,
            damping: self.cfg.damping,
            iterations: 0,
            residual: 0.0,
            converged: true,
        })
    }

    fn seeds(&self) -> Result<SeedLabelTable, CliError> {
        Ok(read_seeds_csv(fs::File::open(self.path(SEEDS))?)?)
    }

    fn polarity(&self) -> Result<PolarityTable, CliError> {
        Ok(PolarityTable::read_csv(fs::File::open(self.path(POLARITY))?)?)
    }

    fn config_file(&self, key: &str, path: &Option<String>) -> Result<Option<(String, FileDigest)>, CliError> {
        match path {
            None => Ok(None),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Data(format!("{key} {p}: {e}")))?;
                Ok(Some((text, digest(key, p, Path::new(p))?)))
            }
        }
    }
}

fn profiles(users: &BTreeMap<String, UserRecord>) -> BTreeMap<String, String> {
    users.iter().map(|(k, u)| (k.clone(), u.profile.clone())).collect()
}

fn summary<const N: usize>(pairs: [(&str, Value); N]) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> echoscope::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

pub fn synth(cfg: &PipelineConfig, out: &Path) -> Result<(), CliError> {
    let scfg = cfg.synth_config();
    let data = generate_dataset(&scfg).map_err(|e| CliError::Usage(e.to_string()))?;
    data.write_to_dir(out)?;
    let ctx = Context {
        work: out.to_path_buf(),
        cfg: cfg.clone(),
    };
    let files = [TWEETS_FILE, BOT_SCORES_FILE, LEXICON_FILE, OUTLETS_FILE, GAZETTEER_FILE, GROUND_TRUTH_FILE];
    ctx.finish(
        "synth",
        out,
        Vec::new(),
        &files,
        summary([
            ("users", data.ground_truth.len().into()),
            ("records", data.records.len().into()),
            ("planted_edges", data.edges.len().into()),
        ]),
    )?;
    eprintln!("synth: {} users, {} records -> {}", data.ground_truth.len(), data.records.len(), out.display());
    Ok(())
}

pub fn ingest(ctx: &Context, tweets: &Path, bot_scores: Option<&Path>) -> Result<(), CliError> {
    let shown = tweets.to_string_lossy().to_string();
    let mut inputs = vec![digest("tweets", &shown, tweets)?];
    let records = read_tweets_file(tweets).map_err(data(&shown))?;
    let scores: HashMap<String, f64> = match bot_scores {
        Some(p) => {
            let shown = p.to_string_lossy().to_string();
            inputs.push(digest("bot_scores", &shown, p)?);
            read_bot_scores(fs::File::open(p)?).map_err(data(&shown))?
        }
        None => HashMap::new(),
    };
    let users = aggregate_users(&records, &scores);
    fs::create_dir_all(&ctx.work)?;
    let mut text = String::new();
    for u in users.values() {
        text.push_str(&serde_json::to_string(u)?);
        text.push('\n');
    }
    fs::write(ctx.path(USERS), text)?;
    ctx.finish(
        "ingest",
        &ctx.work,
        inputs,
        &[USERS],
        summary([("records", records.len().into()), ("users", users.len().into())]),
    )?;
    eprintln!("ingest: {} records from {} users", records.len(), users.len());
    Ok(())
}

pub fn graph(ctx: &Context) -> Result<(), CliError> {
    let (records, tweets) = ctx.tweets("graph")?;
    let users = ctx.users()?;
    let mut inputs = vec![tweets];
    inputs.extend(ctx.artifact_inputs(&[USERS])?);
    let gaz = match ctx.config_file("gazetteer", &ctx.cfg.gazetteer)? {
        Some((text, d)) => {
            inputs.push(d);
            Gazetteer::parse(&text)
        }
        None => Gazetteer::us_default(),
    };
    let pre = preprocess(&records, &users, &gaz, &ctx.cfg.preprocess_config())?;
    if pre.retweet.node_count() == 0 {
        return Err(CliError::Data("no users survive filtering".into()));
    }
    let pr = pagerank(&pre.retweet, ctx.cfg.damping, ctx.cfg.pagerank_tol, ctx.cfg.pagerank_max_iter)?;
    if !pr.converged {
        eprintln!("graph: PageRank stopped at residual {:e} after {} iterations", pr.residual, pr.iterations);
    }

    write_edges_csv(&pre.retweet, BufWriter::new(fs::File::create(ctx.path(RETWEET_EDGES))?))?;
    write_nodes_csv(&pre.retweet, &users, BufWriter::new(fs::File::create(ctx.path(RETWEET_NODES))?))?;
    write_edges_csv(&pre.mention, BufWriter::new(fs::File::create(ctx.path(MENTION_EDGES))?))?;
    write_nodes_csv(&pre.mention, &users, BufWriter::new(fs::File::create(ctx.path(MENTION_NODES))?))?;
    let mut wtr = csv::Writer::from_path(ctx.path(REMOVED))?;
    wtr.write_record(["user_id", "reason"])?;
    for (id, reason) in &pre.removed {
        wtr.write_record([id.as_str(), reason.as_str()])?;
    }
    wtr.flush()?;
    let mut wtr = csv::Writer::from_path(ctx.path(PAGERANK))?;
    wtr.write_record(["user_id", "pagerank"])?;
    for (u, v) in pr.values.iter().enumerate() {
        wtr.write_record([pre.retweet.id(u), &v.to_string()])?;
    }
    wtr.flush()?;

    ctx.finish(
        "graph",
        &ctx.work,
        inputs,
        &[RETWEET_EDGES, RETWEET_NODES, MENTION_EDGES, MENTION_NODES, REMOVED, PAGERANK],
        summary([
            ("users", pre.retweet.node_count().into()),
            ("retweet_edges", pre.retweet.edge_count().into()),
            ("mention_edges", pre.mention.edge_count().into()),
            ("removed", pre.removed.len().into()),
            ("pagerank_iterations", pr.iterations.into()),
        ]),
    )?;
    eprintln!(
        "graph: {} users, {} retweet edges, {} mention edges, {} users removed",
        pre.retweet.node_count(),
        pre.retweet.edge_count(),
        pre.mention.edge_count(),
        pre.removed.len()
    );
    Ok(())
}

pub fn seed(ctx: &Context) -> Result<(), CliError> {
    ctx.require("graph", "seed")?;
    let (records, tweets) = ctx.tweets("seed")?;
    let users = ctx.users()?;
    let g = ctx.graph(GraphKind::Retweet)?;
    let mut inputs = vec![tweets];
    inputs.extend(ctx.artifact_inputs(&[USERS, RETWEET_NODES])?);
    let lex = match ctx.config_file("lexicon", &ctx.cfg.lexicon)? {
        Some((text, d)) => {
            inputs.push(d);
            HashtagLexicon::parse_tsv(&text).map_err(|e| CliError::Data(format!("lexicon: {e}")))?
        }
        None => HashtagLexicon::default_lexicon(),
    };
    let outlets = match ctx.config_file("outlets", &ctx.cfg.outlets)? {
        Some((text, d)) => {
            inputs.push(d);
            MediaOutletTable::parse_tsv(&text).map_err(|e| CliError::Data(format!("outlets: {e}")))?
        }
        None => MediaOutletTable::default(),
    };
    let retained: Vec<&UserRecord> = g.ids().iter().filter_map(|id| users.get(id)).collect();
    let seeds = label_users(retained, &records, &lex, &outlets);
    write_seeds_csv(&seeds, fs::File::create(ctx.path(SEEDS))?)?;
    let left = seeds.values().filter(|s| s.label == echoscope::seeding::Leaning::Left).count();
    ctx.finish(
        "seed",
        &ctx.work,
        inputs,
        &[SEEDS],
        summary([
            ("seeds", seeds.len().into()),
            ("left", left.into()),
            ("right", (seeds.len() - left).into()),
        ]),
    )?;
    eprintln!("seed: {} seed users ({left} Left, {} Right)", seeds.len(), seeds.len() - left);
    Ok(())
}

pub fn train(ctx: &Context) -> Result<(), CliError> {
    ctx.require("graph", "train")?;
    ctx.require("seed", "train")?;
    let users = ctx.users()?;
    let g = ctx.graph(GraphKind::Retweet)?;
    let seeds = ctx.seeds()?;
    let inputs = ctx.artifact_inputs(&[USERS, RETWEET_EDGES, RETWEET_NODES, SEEDS])?;
    let tcfg = ctx.cfg.train_config(stage_seed(ctx.cfg.seed, "train"));
    let (model, report) = fit_polarity_model(&g, &profiles(&users), &seeds, &tcfg, &ctx.cfg.head_config())?;
    model.write_to(BufWriter::new(fs::File::create(ctx.path(MODEL))?))?;
    write_json(&ctx.path(TRAIN_REPORT), &report)?;
    ctx.finish(
        "train",
        &ctx.work,
        inputs,
        &[MODEL, TRAIN_REPORT],
        summary([
            ("vocabulary", model.vocab().len().into()),
            ("pairs_per_epoch", report.pairs_per_epoch.into()),
            ("final_loss", report.epoch_losses.last().copied().into()),
        ]),
    )?;
    eprintln!("train: {} epochs over {} pairs", report.epoch_losses.len(), report.pairs_per_epoch);
    Ok(())
}

pub fn score(ctx: &Context) -> Result<(), CliError> {
    ctx.require("train", "score")?;
    let users = ctx.users()?;
    let g = ctx.graph(GraphKind::Retweet)?;
    let seeds = ctx.seeds()?;
    let model = EncoderModel::read_from(fs::File::open(ctx.path(MODEL))?)?;
    let inputs = ctx.artifact_inputs(&[USERS, RETWEET_NODES, SEEDS, MODEL])?;
    let profiles = profiles(&users);
    let population = g.ids().iter().map(|id| (id.as_str(), profiles.get(id).map_or("", String::as_str)));
    let scores = score_all_users(&model, population, &seeds, ctx.cfg.pin_seeds);
    let table = assign_deciles(&scores)?;
    table.write_csv(BufWriter::new(fs::File::create(ctx.path(POLARITY))?))?;
    ctx.finish("score", &ctx.work, inputs, &[POLARITY], summary([("users", table.len().into())]))?;
    eprintln!("score: {} users binned into deciles", table.len());
    Ok(())
}

pub fn eval(ctx: &Context) -> Result<(), CliError> {
    ctx.require("graph", "eval")?;
    ctx.require("seed", "eval")?;
    let users = ctx.users()?;
    let g = ctx.graph(GraphKind::Retweet)?;
    let seeds = ctx.seeds()?;
    let inputs = ctx.artifact_inputs(&[USERS, RETWEET_EDGES, RETWEET_NODES, SEEDS])?;
    let tcfg = ctx.cfg.train_config(stage_seed(ctx.cfg.seed, "train"));
    let report = evaluate_methods(
        &g,
        &profiles(&users),
        &seeds,
        &tcfg,
        &ctx.cfg.head_config(),
        ctx.cfg.folds,
        stage_seed(ctx.cfg.seed, "eval"),
    )?;
    write_json(&ctx.path(EVAL), &report)?;
    ctx.finish(
        "eval",
        &ctx.work,
        inputs,
        &[EVAL],
        summary([
            ("retweet_bert_auc", report.retweet_bert.mean_auc.into()),
            ("label_propagation_auc", report.label_propagation.mean_auc.into()),
        ]),
    )?;
    eprintln!(
        "eval: {}-fold AUC retweet-bert {:.4}, label propagation {:.4}",
        report.folds, report.retweet_bert.mean_auc, report.label_propagation.mean_auc
    );
    Ok(())
}

struct AnalysisInputs {
    users: BTreeMap<String, UserRecord>,
    retweet: InteractionGraph,
    mention: InteractionGraph,
    pagerank: PageRankVector,
    polarity: PolarityTable,
    digests: Vec<FileDigest>,
}

fn analysis_inputs(ctx: &Context, command: &str) -> Result<AnalysisInputs, CliError> {
    ctx.require("graph", command)?;
    ctx.require("score", command)?;
    let retweet = ctx.graph(GraphKind::Retweet)?;
    Ok(AnalysisInputs {
        users: ctx.users()?,
        mention: ctx.graph(GraphKind::Mention)?,
        pagerank: ctx.pagerank(&retweet)?,
        retweet,
        polarity: ctx.polarity()?,
        digests: ctx.artifact_inputs(&[
            USERS,
            RETWEET_EDGES,
            RETWEET_NODES,
            MENTION_EDGES,
            MENTION_NODES,
            PAGERANK,
            POLARITY,
        ])?,
    })
}

/// Renders one analysis as `(file name, contents)` pairs.
fn render(ctx: &Context, which: Analysis, inp: &AnalysisInputs) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let name = which.name();
    let csv_name = format!("{name}.csv");
    let json_name = format!("{name}.json");
    Ok(match which {
        Analysis::Roles => {
            let r = role_statistics(&inp.users, &inp.retweet, &inp.polarity);
            vec![(csv_name, csv_bytes(|w| r.write_csv(w))?), (json_name, json_bytes(&r)?)]
        }
        Analysis::Influence => {
            let r = influence_report(
                &inp.users,
                &inp.polarity,
                &inp.retweet,
                &inp.mention,
                &inp.pagerank,
                ctx.cfg.top_fraction,
            )?;
            vec![(csv_name, csv_bytes(|w| r.write_csv(w))?), (json_name, json_bytes(&r)?)]
        }
        Analysis::Audience => {
            let r = audience_distribution(&inp.retweet, &inp.polarity, &inp.users, true, ctx.cfg.weighted_audience);
            vec![(csv_name, csv_bytes(|w| r.write_csv(w))?), (json_name, json_bytes(&r)?)]
        }
        Analysis::Rwc => {
            let m = rwc_matrix(&inp.retweet, &inp.polarity, &ctx.cfg.walk_config(stage_seed(ctx.cfg.seed, "rwc")))?;
            let svg = rwc_heatmap_svg(&m, "Random Walk Controversy: P(start decile | end decile)");
            vec![
                (csv_name, csv_bytes(|w| m.write_csv(w))?),
                (json_name, json_bytes(&m)?),
                (format!("{name}.svg"), svg.into_bytes()),
            ]
        }
        Analysis::Popular => {
            let r = popular_users(&inp.retweet, &inp.polarity, ctx.cfg.popular_k)?;
            vec![(csv_name, csv_bytes(|w| r.write_csv(w))?), (json_name, json_bytes(&r)?)]
        }
    })
}

fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

pub fn analyze(ctx: &Context, which: Analysis) -> Result<(), CliError> {
    let command = format!("analyze {}", which.name());
    let inp = analysis_inputs(ctx, &command)?;
    let files = render(ctx, which, &inp)?;
    let dir = ctx.path(ANALYSIS_DIR);
    write_files(&dir, &files)?;
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    ctx.finish(&format!("analyze_{}", which.name()), &dir, inp.digests, &names, Map::new())?;
    eprintln!("{command}: wrote {} into {}", names.join(", "), dir.display());
    Ok(())
}

pub fn report(ctx: &Context, out: Option<&Path>) -> Result<(), CliError> {
    let inp = analysis_inputs(ctx, "report")?;
    let dir = out.map_or_else(|| ctx.path(REPORT_DIR), Path::to_path_buf);
    let mut files = Vec::new();
    for which in Analysis::ALL {
        files.extend(render(ctx, which, &inp)?);
    }
    write_files(&dir, &files)?;
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    ctx.finish("report", &dir, inp.digests, &names, Map::new())?;
    eprintln!("report: {} files in {}", names.len(), dir.display());
    Ok(())
}
