//! The `cuesync` command line.
//!
//! Configuration comes from defaults, then `--config <file>`, then `--set
//! key=value`, then subcommand flags. Every text output starts with a
//! `# config_hash=<hex>` line, except JSON outputs, which carry a
//! `config_hash` field, and the TextGrid/EAF renderings, whose hash is
//! recorded in `manifest.txt` next to them.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::annot_io::{
    align_tiers, parse_eaf, parse_textgrid, read_corpus, read_landmarks, write_canonical, write_corpus,
    write_landmarks, AnnotationTier, Hearing, SentenceMeta, SentenceTimeline,
};
use crate::config::{parse_profiles, parse_split, RunConfig};
use crate::error::{Error, Result};
use crate::evaluate::{
    compare_predictors, mse_matrix, mse_matrix_to_csv, polar_samples, polar_to_csv, reports_to_csv,
    split_sentences, EvalOptions, NamedPredictor, PredictionSource, Split, TrackSet,
};
use crate::measures::{assemble_table, MeasureTable, SentenceKey};
use crate::normalize::{descriptive_stats, normalize_table, stats_to_csv, Grouping, NormContext};
use crate::regression::{fit_predictor, predict_hand_instant, HptPredictor, Subset, Variant};
use crate::synth::{gen_corpus, timeline_eaf, timeline_textgrid, truth_to_csv, SynthOptions};

#[derive(Debug, Parser)]
#[command(name = "cuesync", version, about = "Lip-hand timing analysis for Cued Speech corpora")]
pub struct Cli {
    /// Flat key = value config file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// TextGrid lip tier + EAF hand tier -> canonical sentence JSON.
    Parse(ParseArgs),
    /// Canonical sentences -> per-vowel measure table.
    Measure(MeasureArgs),
    /// Descriptive statistics per group.
    Stats(StatsArgs),
    /// Fit one HPT predictor.
    Fit(FitArgs),
    /// Apply a fitted predictor to a measure table.
    Predict(PredictArgs),
    /// Score predictors on held-out sentences.
    Eval(EvalArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Data behind the polar-position and MSE plots.
    PlotData(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub lip: PathBuf,
    #[arg(long)]
    pub hand: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub sentence_id: String,
    #[arg(long)]
    pub cuer_id: String,
    #[arg(long)]
    pub hearing: String,
    /// Needed when the TextGrid has several tiers.
    #[arg(long)]
    pub lip_tier: Option<String>,
    /// Needed when the EAF has several tiers.
    #[arg(long)]
    pub hand_tier: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// A canonical JSONL file, or a directory of them.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// per-cuer | normal-deaf | all; repeatable, default all three in that order.
    #[arg(long)]
    pub group: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// ALL | NORMAL | DEAF
    #[arg(long, default_value = "ALL")]
    pub subset: String,
    /// combined | lve | mean | audio
    #[arg(long, default_value = "combined")]
    pub variant: String,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Fit on the training sentences of the split only.
    #[arg(long)]
    pub holdout: bool,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Directory of `<cuer>__<sentence>.csv` landmark tracks.
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// ALL | NORMAL | DEAF rows to score.
    #[arg(long, default_value = "ALL")]
    pub subset: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the reports as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Profile config; defaults to the five built-in cuers.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write TextGrid and EAF renderings.
    #[arg(long)]
    pub annotations: bool,
    /// Round interval bounds to whole milliseconds; implied by `--annotations`.
    #[arg(long)]
    pub ms_grid: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// polar | mse
    #[arg(long)]
    pub kind: String,
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Needed for `polar`.
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the subcommand.
/// Help and version requests print and return `Ok`.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(Error::UsageError(e.to_string().trim_end().to_string()));
        }
    };
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&read(path)?)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::UsageError(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    match cli.command {
        Command::Parse(a) => cmd_parse(&cfg, a),
        Command::Measure(a) => cmd_measure(&cfg, a),
        Command::Stats(a) => cmd_stats(&cfg, a),
        Command::Fit(a) => cmd_fit(cfg, a),
        Command::Predict(a) => cmd_predict(&cfg, a),
        Command::Eval(a) => cmd_eval(cfg, a),
        Command::Synth(a) => cmd_synth(cfg, a),
        Command::PlotData(a) => cmd_plot(cfg, a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_with_hash(path: &Path, hash: &str, body: &str) -> Result<()> {
    write(path, &format!("# config_hash={hash}\n{body}"))
}

fn apply_split_seed(cfg: &mut RunConfig, split: &Option<String>, seed: Option<u64>) -> Result<()> {
    if let Some(s) = split {
        cfg.split_ratio = parse_split(s)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(())
}

fn pick_tier(tiers: Vec<AnnotationTier>, name: Option<&str>, file: &Path) -> Result<AnnotationTier> {
    match name {
        Some(n) => tiers
            .into_iter()
            .find(|t| t.tier_name == n)
            .ok_or_else(|| Error::MalformedFile(format!("{}: no tier named '{n}'", file.display()))),
        None if tiers.len() == 1 => Ok(tiers.into_iter().next().expect("one tier")),
        None => Err(Error::UsageError(format!(
            "{} has {} tiers; choose one with a tier flag",
            file.display(),
            tiers.len()
        ))),
    }
}

fn cmd_parse(cfg: &RunConfig, a: ParseArgs) -> Result<()> {
    let lip = pick_tier(parse_textgrid(&read(&a.lip)?)?, a.lip_tier.as_deref(), &a.lip)?;
    let hand = pick_tier(parse_eaf(&read(&a.hand)?)?, a.hand_tier.as_deref(), &a.hand)?;
    let (lip, dropped_lip) = cfg.vowel_labels.filter(&lip);
    let (hand, dropped_hand) = cfg.vowel_labels.filter(&hand);
    if dropped_lip + dropped_hand > 0 {
        eprintln!("warning: ignored {dropped_lip} lip and {dropped_hand} hand intervals with non-vowel labels");
    }
    let meta = SentenceMeta {
        sentence_id: a.sentence_id,
        cuer_id: a.cuer_id,
        hearing: a.hearing.parse::<Hearing>()?,
    };
    let timeline = align_tiers(&lip, &hand, &meta)?;
    if timeline.hand_overruns_end() {
        eprintln!("warning: hand intervals extend past the sentence end");
    }
    write_with_hash(&a.out, &cfg.hash(), &format!("{}\n", write_canonical(&timeline)))
}

fn load_timelines(path: &Path) -> Result<Vec<SentenceTimeline>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl" || x == "json"))
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            out.extend(read_corpus(&read(&f)?)?);
        }
        Ok(out)
    } else {
        read_corpus(&read(path)?)
    }
}

fn cmd_measure(cfg: &RunConfig, a: MeasureArgs) -> Result<()> {
    let timelines = load_timelines(&a.input)?;
    let overruns = timelines.iter().filter(|t| t.hand_overruns_end()).count();
    if overruns > 0 {
        eprintln!("warning: {overruns} sentences have hand intervals past the sentence end");
    }
    let table = assemble_table(&timelines, cfg.lvi_convention)?;
    write_with_hash(&a.out, &cfg.hash(), &table.to_csv())
}

fn load_table(path: &Path) -> Result<MeasureTable> {
    MeasureTable::from_csv(&read(path)?)
}

fn cmd_stats(cfg: &RunConfig, a: StatsArgs) -> Result<()> {
    let table = load_table(&a.input)?;
    let groups: Vec<Grouping> = if a.group.is_empty() {
        vec![Grouping::PerCuer, Grouping::NormalVsDeaf, Grouping::All]
    } else {
        a.group.iter().map(|g| g.parse()).collect::<Result<_>>()?
    };
    let mut stats = Vec::new();
    for g in groups {
        stats.extend(descriptive_stats(&table, g)?);
    }
    write_with_hash(&a.out, &cfg.hash(), &stats_to_csv(&stats))
}

fn cmd_fit(mut cfg: RunConfig, a: FitArgs) -> Result<()> {
    if let Some(g) = a.gamma {
        cfg.gamma = g;
    }
    apply_split_seed(&mut cfg, &a.split, a.seed)?;
    let subset: Subset = a.subset.parse()?;
    let variant: Variant = a.variant.parse()?;
    let table = load_table(&a.input)?;
    let train = if a.holdout {
        split_sentences(&table, cfg.split_ratio, cfg.seed)?.train_table(&table)
    } else {
        table
    };
    let ctx = NormContext::fit(&train, cfg.norm_policy)?;
    let normalized = normalize_table(&train, &ctx.groups, ctx.policy)?;
    let mut predictor = fit_predictor(&normalized, subset, variant, &cfg.fit_options())?;
    predictor.config_hash = Some(cfg.hash());
    write(&a.out, &format!("{}\n", predictor.to_json()))
}

fn load_predictor(path: &Path) -> Result<HptPredictor> {
    HptPredictor::from_json(&read(path)?)
}

fn cmd_predict(cfg: &RunConfig, a: PredictArgs) -> Result<()> {
    let predictor = load_predictor(&a.model)?;
    let table = load_table(&a.input)?;
    let means = table.sentence_means();
    let mut out = String::from("cuer_id,sentence_id,index,label,t_mid_s,hpt_pred_z,hpt_pred_s,T_pred_s\n");
    for row in &table.rows {
        let m = means[&(row.cuer_id.clone(), row.sentence_id.clone())];
        let z = predictor.predict_norm(row, m)?;
        let s = predictor.predict_seconds(row, m)?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.cuer_id,
            row.sentence_id,
            row.index,
            row.label,
            row.lip_mid,
            z,
            s,
            predict_hand_instant(row.lip_mid, s)
        ));
    }
    write_with_hash(&a.out, &cfg.hash(), &out)
}

/// File name of a sentence's landmark track.
pub fn track_file_name(cuer_id: &str, sentence_id: &str) -> String {
    format!("{cuer_id}__{sentence_id}.csv")
}

fn load_tracks(dir: &Path, keys: impl IntoIterator<Item = SentenceKey>) -> Result<TrackSet> {
    let mut tracks = TrackSet::new();
    for key in keys {
        let path = dir.join(track_file_name(&key.0, &key.1));
        if !path.exists() {
            return Err(Error::MissingTrack {
                cuer: key.0,
                sentence: key.1,
            });
        }
        let track = read_landmarks(&read(&path)?)?;
        tracks.insert(key, track);
    }
    Ok(tracks)
}

fn model_ids(predictors: &[HptPredictor]) -> Vec<String> {
    predictors.iter().map(HptPredictor::id).collect()
}

fn sentence_keys(table: &MeasureTable, keep: impl Fn(&SentenceKey) -> bool) -> Vec<SentenceKey> {
    table.sentences().into_iter().map(|(k, _)| k).filter(|k| keep(k)).collect()
}

fn cmd_eval(mut cfg: RunConfig, a: EvalArgs) -> Result<()> {
    apply_split_seed(&mut cfg, &a.split, a.seed)?;
    let subset: Subset = a.subset.parse()?;
    let table = load_table(&a.input)?;
    let predictors: Vec<HptPredictor> = a.models.iter().map(|p| load_predictor(p)).collect::<Result<_>>()?;
    let split = split_sentences(&table, cfg.split_ratio, cfg.seed)?;
    let keys = sentence_keys(&table, |_| true);
    let tracks = load_tracks(&a.tracks, keys)?;
    let ids = model_ids(&predictors);
    let mut named = vec![NamedPredictor {
        id: "GT",
        source: PredictionSource::GroundTruth,
    }];
    named.extend(predictors.iter().zip(&ids).map(|(p, id)| NamedPredictor {
        id,
        source: PredictionSource::Fitted(p),
    }));
    let opts = EvalOptions {
        sampling: cfg.sampling,
        positions: &cfg.position_map,
        eval_subset: subset,
    };
    let reports = compare_predictors(&table, &named, &tracks, &split, &opts)?;
    let hash = cfg.hash();
    write_with_hash(&a.out, &hash, &reports_to_csv(&reports))?;
    if let Some(json) = &a.json {
        let doc = serde_json::json!({ "config_hash": hash, "reports": reports });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::SchemaViolation(e.to_string()))?;
        write(json, &format!("{text}\n"))?;
    }
    Ok(())
}

fn synth_hash(cfg: &RunConfig, profiles_text: &str, a: &SynthArgs) -> String {
    let mut h = Sha256::new();
    h.update(cfg.to_canonical_string().as_bytes());
    h.update(format!("synth.n = {}\nsynth.ms_grid = {}\n", a.n, a.ms_grid || a.annotations).as_bytes());
    h.update(profiles_text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_synth(mut cfg: RunConfig, a: SynthArgs) -> Result<()> {
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let profiles_text = match &a.profiles {
        Some(p) => read(p)?,
        None => String::new(),
    };
    let synth_cfg = parse_profiles(&profiles_text)?;
    let opts = SynthOptions {
        ms_grid: a.ms_grid || a.annotations,
        positions: cfg.position_map.clone(),
        vowels: cfg.vowel_labels.labels().map(str::to_string).collect(),
        ..SynthOptions::default()
    };
    let corpus = gen_corpus(&synth_cfg.profiles, &synth_cfg.model, a.n, cfg.seed, &opts)?;
    let hash = synth_hash(&cfg, &profiles_text, &a);
    let out = &a.out;
    write_with_hash(&out.join("corpus.jsonl"), &hash, &write_corpus(&corpus.timelines))?;
    write_with_hash(&out.join("truth.csv"), &hash, &truth_to_csv(&corpus.truth))?;
    for (t, track) in corpus.timelines.iter().zip(&corpus.tracks) {
        let path = out.join("tracks").join(track_file_name(&t.cuer_id, &t.sentence_id));
        write_with_hash(&path, &hash, &write_landmarks(track))?;
    }
    if a.annotations {
        let mut manifest = String::new();
        for t in &corpus.timelines {
            let stem = format!("{}__{}", t.cuer_id, t.sentence_id);
            write(&out.join("textgrid").join(format!("{stem}.TextGrid")), &timeline_textgrid(t))?;
            write(&out.join("eaf").join(format!("{stem}.eaf")), &timeline_eaf(t))?;
            manifest.push_str(&format!("{stem},{},{},{}\n", t.cuer_id, t.sentence_id, t.hearing));
        }
        write_with_hash(
            &out.join("manifest.txt"),
            &hash,
            &format!("stem,cuer_id,sentence_id,hearing\n{manifest}"),
        )?;
    }
    if corpus.rejected > 0 {
        eprintln!("note: {} sentence draws were redrawn", corpus.rejected);
    }
    Ok(())
}

fn cmd_plot(mut cfg: RunConfig, a: PlotArgs) -> Result<()> {
    apply_split_seed(&mut cfg, &a.split, a.seed)?;
    let table = load_table(&a.input)?;
    let predictors: Vec<HptPredictor> = a.models.iter().map(|p| load_predictor(p)).collect::<Result<_>>()?;
    let split = split_sentences(&table, cfg.split_ratio, cfg.seed)?;
    let body = match a.kind.as_str() {
        "mse" => mse_matrix_to_csv(&mse_matrix(&table, &predictors, &split)?),
        "polar" => {
            let dir = a
                .tracks
                .as_ref()
                .ok_or_else(|| Error::UsageError("plot-data --kind polar needs --tracks".into()))?;
            polar_csv(&table, &predictors, dir, &split, &cfg)?
        }
        other => return Err(Error::UsageError(format!("unknown plot kind '{other}' (polar|mse)"))),
    };
    write_with_hash(&a.out, &cfg.hash(), &body)
}

fn polar_csv(
    table: &MeasureTable,
    predictors: &[HptPredictor],
    dir: &Path,
    split: &Split,
    cfg: &RunConfig,
) -> Result<String> {
    let tracks = load_tracks(dir, sentence_keys(table, |k| split.test.contains(k)))?;
    let ids = model_ids(predictors);
    let mut sources = vec![("GT".to_string(), PredictionSource::GroundTruth)];
    sources.extend(ids.iter().cloned().zip(predictors.iter().map(PredictionSource::Fitted)));
    let mut rows = Vec::new();
    for (id, source) in sources {
        for (cuer, s) in polar_samples(table, source, &tracks, |r| split.is_test(r), &cfg.position_map, cfg.sampling)? {
            rows.push((id.clone(), cuer, s));
        }
    }
    Ok(polar_to_csv(&rows))
}
