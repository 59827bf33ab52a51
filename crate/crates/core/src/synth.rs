//! Seeded synthetic Cued Speech corpora with known ground truth.
//!
//! Each sentence is laid out on the lip stream first (vowel durations,
//! consonant gaps, occasional pauses). Its measures are normalized with the
//! profile's true statistics, the ground-truth model plus residual noise
//! gives the z-scored HPT, and the hand interval is placed so that its
//! midpoint precedes the lip target by the denormalized HPT. Landmark tracks
//! move the hand linearly between five position anchors, arriving at each
//! anchor at the hand target instant and dwelling there until the hand
//! interval ends.
//!
//! Sentences whose hand targets would not be strictly ordered (or would
//! start before time zero) are redrawn and counted in
//! [`SynthCorpus::rejected`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::annot_io::{
    write_eaf, write_textgrid, AnnotationTier, Frame, HandTrack, Hearing, PhoneInterval, Point,
    SentenceTimeline, Stream, DEFAULT_VOWELS,
};
use crate::error::{Error, Result};
use crate::evaluate::PositionMap;
use crate::measures::LviSource;
use crate::normalize::GroupStats;
use crate::regression::{LinearModel, DEFAULT_GAMMA};

/// Shifted Poisson syllable count: `min + Poisson(mean - min)`, redrawn above `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyllableDist {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl Default for SyllableDist {
    fn default() -> Self {
        SyllableDist {
            min: 4,
            max: 27,
            mean: 10.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuerProfile {
    pub cuer_id: String,
    pub hearing: Hearing,
    /// Seconds.
    pub mu_hpt: f64,
    pub sigma_hpt: f64,
    pub mu_lvd: f64,
    pub sigma_lvd: f64,
    pub pause_prob: f64,
    /// Seconds.
    pub pause_range: (f64, f64),
    pub syllables: SyllableDist,
    /// Standard deviation of the noise added to the model's z-scored HPT.
    pub residual_sigma: f64,
    /// Lag-one autocorrelation of that noise within a sentence.
    pub residual_ar: f64,
    /// Per-profile model; falls back to the corpus model.
    pub model: Option<GroundTruthModel>,
    /// Per-profile sentence count; falls back to the corpus count.
    pub sentences: Option<usize>,
}

/// Descriptive statistics in milliseconds: (id, hearing, mu_hpt, sigma_hpt, mu_lvd, sigma_lvd).
pub const TABLE1_PROFILES: [(&str, Hearing, f64, f64, f64, f64); 5] = [
    ("NF1", Hearing::Normal, 242.0, 177.0, 338.0, 79.0),
    ("NF2", Hearing::Normal, 246.0, 150.0, 389.0, 94.0),
    ("NM1", Hearing::Normal, 352.0, 137.0, 464.0, 144.0),
    ("DF1", Hearing::Deaf, 154.0, 110.0, 365.0, 97.0),
    ("DM1", Hearing::Deaf, 164.0, 105.0, 397.0, 101.0),
];

impl CuerProfile {
    /// A profile with the given statistics (milliseconds) and default timing.
    pub fn with_stats_ms(
        cuer_id: &str,
        hearing: Hearing,
        mu_hpt: f64,
        sigma_hpt: f64,
        mu_lvd: f64,
        sigma_lvd: f64,
    ) -> Self {
        CuerProfile {
            cuer_id: cuer_id.to_string(),
            hearing,
            mu_hpt: mu_hpt / 1000.0,
            sigma_hpt: sigma_hpt / 1000.0,
            mu_lvd: mu_lvd / 1000.0,
            sigma_lvd: sigma_lvd / 1000.0,
            pause_prob: 0.08,
            pause_range: (0.15, 0.6),
            syllables: SyllableDist::default(),
            residual_sigma: 0.3,
            residual_ar: 0.0,
            model: None,
            sentences: None,
        }
    }

    /// The five cuers of the descriptive statistics table.
    pub fn table1() -> Vec<CuerProfile> {
        TABLE1_PROFILES
            .iter()
            .map(|&(id, h, a, b, c, d)| CuerProfile::with_stats_ms(id, h, a, b, c, d))
            .collect()
    }

    pub fn table1_by_id(id: &str) -> Option<CuerProfile> {
        CuerProfile::table1().into_iter().find(|p| p.cuer_id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(format!("{}: {msg}", self.cuer_id)));
        if self.cuer_id.trim().is_empty() {
            return Err(Error::InvalidProfile("empty cuer id".into()));
        }
        for (name, v) in [
            ("sigma_hpt", self.sigma_hpt),
            ("sigma_lvd", self.sigma_lvd),
            ("mu_lvd", self.mu_lvd),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.residual_sigma >= 0.0) {
            return bad(format!("residual_sigma must be non-negative, got {}", self.residual_sigma));
        }
        if !(0.0..1.0).contains(&self.residual_ar) {
            return bad(format!("residual_ar must lie in [0, 1), got {}", self.residual_ar));
        }
        if !(0.0..=1.0).contains(&self.pause_prob) {
            return bad(format!("pause_prob must lie in [0, 1], got {}", self.pause_prob));
        }
        if !(self.pause_range.0 >= 0.0 && self.pause_range.0 <= self.pause_range.1) {
            return bad(format!("invalid pause range {:?}", self.pause_range));
        }
        let s = self.syllables;
        if s.min < 1 || s.max > 40 || s.min > s.max || !(s.mean >= s.min as f64 && s.mean <= s.max as f64) {
            return bad(format!("invalid syllable distribution {s:?}"));
        }
        Ok(())
    }

    /// The generating statistics as a [`GroupStats`] keyed by cuer id.
    pub fn true_stats(&self) -> GroupStats {
        GroupStats {
            group_key: self.cuer_id.clone(),
            mu_hpt: self.mu_hpt,
            sigma_hpt: self.sigma_hpt,
            mu_lvd: self.mu_lvd,
            sigma_lvd: self.sigma_lvd,
            count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenerativeForm {
    /// `f0_left` below gamma, weighted `f1`/`f2` above.
    #[default]
    Combined,
    /// `f0_left` below gamma, `f0_right` above.
    LveOnly,
}

/// Coefficients the generator uses; implementer-chosen, in normalized space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthModel {
    pub gamma: f64,
    pub f0_left: LinearModel,
    pub f0_right: LinearModel,
    pub f1: LinearModel,
    pub f2: LinearModel,
    pub form: GenerativeForm,
}

impl GroundTruthModel {
    pub fn default_normal() -> Self {
        GroundTruthModel {
            gamma: DEFAULT_GAMMA,
            f0_left: LinearModel::line(1.8, 0.1),
            f0_right: LinearModel::line(0.3, 0.5),
            f1: LinearModel::line(1.2, 0.9),
            f2: LinearModel::line(0.5, 0.3),
            form: GenerativeForm::Combined,
        }
    }

    pub fn default_deaf() -> Self {
        GroundTruthModel {
            gamma: DEFAULT_GAMMA,
            f0_left: LinearModel::line(0.6, -0.2),
            f0_right: LinearModel::line(0.1, 0.2),
            f1: LinearModel::line(0.3, 0.2),
            f2: LinearModel::line(1.0, -0.3),
            form: GenerativeForm::Combined,
        }
    }

    /// All coefficients zero: the z-scored HPT is pure residual noise.
    pub fn null() -> Self {
        let zero = LinearModel::line(0.0, 0.0);
        GroundTruthModel {
            gamma: DEFAULT_GAMMA,
            f0_left: zero,
            f0_right: zero,
            f1: zero,
            f2: zero,
            form: GenerativeForm::Combined,
        }
    }

    /// Noise-free z-scored HPT.
    pub fn eval(&self, lve_log: f64, lvi_log: f64, lvd_z: f64, lambdas: (f64, f64)) -> f64 {
        if lve_log <= self.gamma {
            return self.f0_left.eval(lve_log);
        }
        match self.form {
            GenerativeForm::Combined => lambdas.0 * self.f1.eval(lvi_log) + lambdas.1 * self.f2.eval(lvd_z),
            GenerativeForm::LveOnly => self.f0_right.eval(lve_log),
        }
    }
}

/// Image-space offsets (x right, y down) of the five hand positions from
/// the lip center, in pixels.
pub const DEFAULT_ANCHORS: [(f64, f64); 5] = [
    (230.0, 10.0),
    (120.0, -70.0),
    (0.0, 110.0),
    (20.0, 250.0),
    (130.0, 60.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub fps: f64,
    /// Silence before the first vowel, seconds.
    pub lead_in: f64,
    /// Track length past the sentence end, seconds.
    pub tail: f64,
    /// Consonant gap between adjacent vowels, seconds.
    pub consonant_gap: (f64, f64),
    /// Minimum spacing of consecutive hand targets, seconds.
    pub min_hand_gap: f64,
    /// Round every interval bound to whole milliseconds.
    pub ms_grid: bool,
    pub lip_center: Point,
    pub anchors: [(f64, f64); 5],
    pub anchor_scale: f64,
    /// Per-frame Gaussian jitter of the hand point, pixels.
    pub hand_jitter_px: f64,
    pub vowels: Vec<String>,
    pub positions: PositionMap,
    /// Redraw budget per sentence.
    pub max_attempts: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            fps: 30.0,
            lead_in: 1.0,
            tail: 1.0,
            consonant_gap: (0.06, 0.18),
            min_hand_gap: 0.04,
            ms_grid: false,
            lip_center: Point::new(640.0, 360.0),
            anchors: DEFAULT_ANCHORS,
            anchor_scale: 1.0,
            hand_jitter_px: 4.0,
            vowels: DEFAULT_VOWELS.iter().map(|s| s.to_string()).collect(),
            positions: PositionMap::default(),
            max_attempts: 1000,
        }
    }
}

/// Everything the generator knows about one vowel.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub cuer_id: String,
    pub hearing: Hearing,
    pub sentence_id: String,
    pub index: usize,
    pub label: String,
    pub lip_mid: f64,
    pub hand_mid: f64,
    /// Realized `lip_mid - hand_mid`.
    pub hpt: f64,
    pub lve: f64,
    pub lvi: f64,
    pub lvd: f64,
    pub lvi_source: LviSource,
    /// Model output plus noise, before denormalization.
    pub hpt_z_model: f64,
    pub noise_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub timelines: Vec<SentenceTimeline>,
    /// `tracks[k]` belongs to `timelines[k]`.
    pub tracks: Vec<HandTrack>,
    pub truth: Vec<TruthRow>,
    pub rejected: usize,
}

fn truncated_normal(rng: &mut ChaCha8Rng, dist: &Normal<f64>, floor: f64) -> f64 {
    loop {
        let v = dist.sample(rng);
        if v >= floor {
            return v;
        }
    }
}

fn quantize(t: f64, ms_grid: bool) -> f64 {
    if ms_grid {
        (t * 1000.0).round() / 1000.0
    } else {
        t
    }
}

struct SentenceDraw {
    timeline: SentenceTimeline,
    track: HandTrack,
    truth: Vec<TruthRow>,
}

fn draw_sentence(
    rng: &mut ChaCha8Rng,
    profile: &CuerProfile,
    model: &GroundTruthModel,
    sentence_id: &str,
    opts: &SynthOptions,
) -> Result<Option<SentenceDraw>> {
    let lvd_dist = Normal::new(profile.mu_lvd, profile.sigma_lvd)
        .map_err(|e| Error::InvalidProfile(e.to_string()))?;
    let syl = profile.syllables;
    let n = if syl.mean > syl.min as f64 {
        let pois = Poisson::new(syl.mean - syl.min as f64).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        loop {
            let k = syl.min + pois.sample(rng) as usize;
            if k <= syl.max {
                break k;
            }
        }
    } else {
        syl.min
    };
    let labels: Vec<String> = (0..n)
        .map(|_| opts.vowels[rng.random_range(0..opts.vowels.len())].clone())
        .collect();

    // lip layout
    let mut lips = Vec::with_capacity(n);
    let mut cursor = opts.lead_in;
    for i in 0..n {
        if i > 0 {
            cursor += rng.random_range(opts.consonant_gap.0..=opts.consonant_gap.1);
            if rng.random_bool(profile.pause_prob) {
                cursor += rng.random_range(profile.pause_range.0..=profile.pause_range.1);
            }
        }
        let dur = truncated_normal(rng, &lvd_dist, 0.05);
        let (s, e) = (quantize(cursor, opts.ms_grid), quantize(cursor + dur, opts.ms_grid));
        lips.push((s, e));
        cursor += dur;
    }
    let sentence_end = lips[n - 1].1;

    // ground-truth measures, computed directly from the layout
    let t_mid: Vec<f64> = lips.iter().map(|&(s, e)| (s + e) / 2.0).collect();
    let lvd: Vec<f64> = lips.iter().map(|&(s, e)| e - s).collect();
    let lve: Vec<f64> = t_mid.iter().map(|&t| sentence_end - t).collect();
    let mut lvi = vec![0.0; n];
    let mut lvi_source = vec![LviSource::Measured; n];
    if n == 1 {
        lvi[0] = lvd[0];
        lvi_source[0] = LviSource::ImputedSingleton;
    } else {
        let mut max_gap = f64::NEG_INFINITY;
        for i in 1..n {
            lvi[i] = t_mid[i] - t_mid[i - 1];
            max_gap = max_gap.max(lvi[i]);
        }
        lvi[0] = max_gap;
        lvi_source[0] = LviSource::ImputedMax;
    }
    let alpha_bar = lvi.iter().sum::<f64>() / n as f64;
    let beta_bar = lvd.iter().sum::<f64>() / n as f64;

    // z-scored HPT from the model, with AR(1) residual noise
    let rho = profile.residual_ar;
    let innovation = profile.residual_sigma * (1.0 - rho * rho).sqrt();
    let mut noise = vec![0.0; n];
    let mut hpt_z = vec![0.0; n];
    for i in 0..n {
        let z: f64 = StandardNormal.sample(rng);
        noise[i] = if i == 0 {
            profile.residual_sigma * z
        } else {
            rho * noise[i - 1] + innovation * z
        };
        let lambdas = if lvi_source[i] == LviSource::ImputedSingleton {
            (0.0, 1.0)
        } else {
            let c = alpha_bar / beta_bar;
            (lvi[i] / (lvi[i] + c * lvd[i]), c * lvd[i] / (lvi[i] + c * lvd[i]))
        };
        let lvd_z = (lvd[i] - profile.mu_lvd) / profile.sigma_lvd;
        hpt_z[i] = model.eval(lve[i].log10(), lvi[i].log10(), lvd_z, lambdas) + noise[i];
    }
    let target: Vec<f64> = (0..n)
        .map(|i| t_mid[i] - (profile.mu_hpt + profile.sigma_hpt * hpt_z[i]))
        .collect();
    if target.windows(2).any(|w| w[1] - w[0] < opts.min_hand_gap) {
        return Ok(None);
    }

    // hand intervals centred on the targets, clipped to half the neighbour spacing
    let mut hands = Vec::with_capacity(n);
    for i in 0..n {
        let d = truncated_normal(rng, &lvd_dist, 0.05);
        let mut h = d / 2.0;
        if i > 0 {
            h = h.min((target[i] - target[i - 1]) / 2.0);
        }
        if i + 1 < n {
            h = h.min((target[i + 1] - target[i]) / 2.0);
        }
        let (s, e) = (quantize(target[i] - h, opts.ms_grid), quantize(target[i] + h, opts.ms_grid));
        if s < 0.0 {
            return Ok(None);
        }
        hands.push((s, e));
    }

    let mk = |v: &[(f64, f64)]| -> Result<Vec<PhoneInterval>> {
        v.iter()
            .zip(&labels)
            .map(|(&(s, e), l)| PhoneInterval::new(s, e, l.as_str()))
            .collect()
    };
    let timeline = SentenceTimeline {
        sentence_id: sentence_id.to_string(),
        cuer_id: profile.cuer_id.clone(),
        hearing: profile.hearing,
        lip_vowels: mk(&lips)?,
        hand_vowels: mk(&hands)?,
        sentence_end,
    };
    timeline.validate()?;

    let hand_mid: Vec<f64> = hands.iter().map(|&(s, e)| (s + e) / 2.0).collect();
    let truth = (0..n)
        .map(|i| TruthRow {
            cuer_id: profile.cuer_id.clone(),
            hearing: profile.hearing,
            sentence_id: sentence_id.to_string(),
            index: i,
            label: labels[i].clone(),
            lip_mid: t_mid[i],
            hand_mid: hand_mid[i],
            hpt: t_mid[i] - hand_mid[i],
            lve: lve[i],
            lvi: lvi[i],
            lvd: lvd[i],
            lvi_source: lvi_source[i],
            hpt_z_model: hpt_z[i],
            noise_z: noise[i],
        })
        .collect();

    let track = render_track(rng, &labels, &hand_mid, &hands, sentence_end, opts)?;
    Ok(Some(SentenceDraw { timeline, track, truth }))
}

fn render_track(
    rng: &mut ChaCha8Rng,
    labels: &[String],
    arrive: &[f64],
    hands: &[(f64, f64)],
    sentence_end: f64,
    opts: &SynthOptions,
) -> Result<HandTrack> {
    let anchors: Vec<Point> = labels
        .iter()
        .map(|l| {
            let class = opts
                .positions
                .class_of(l)
                .ok_or_else(|| Error::InvalidProfile(format!("vowel '{l}' has no hand position")))?;
            let (dx, dy) = opts.anchors[class as usize - 1];
            Ok(Point::new(
                opts.lip_center.x + dx * opts.anchor_scale,
                opts.lip_center.y + dy * opts.anchor_scale,
            ))
        })
        .collect::<Result<_>>()?;
    let shapes: Vec<u8> = labels.iter().map(|_| rng.random_range(1..=8)).collect();
    let jitter = Normal::new(0.0, opts.hand_jitter_px.max(0.0))
        .map_err(|e| Error::InvalidProfile(e.to_string()))?;
    let n = anchors.len();
    let end = sentence_end + opts.tail;
    let n_frames = (end * opts.fps).ceil() as usize + 1;
    let mut frames = Vec::with_capacity(n_frames);
    let mut seg = 0usize;
    for k in 0..n_frames {
        let t = k as f64 / opts.fps;
        // seg: first target not yet reached, or the last one
        while seg + 1 < n && t >= arrive[seg + 1] {
            seg += 1;
        }
        let (pos, shape) = if t <= arrive[0] {
            (anchors[0], shapes[0])
        } else if t <= hands[seg].1 || seg + 1 == n {
            (anchors[seg], shapes[seg])
        } else {
            let w = (t - hands[seg].1) / (arrive[seg + 1] - hands[seg].1);
            (anchors[seg].lerp(anchors[seg + 1], w), shapes[seg + 1])
        };
        let (jx, jy) = if opts.hand_jitter_px > 0.0 {
            (jitter.sample(rng), jitter.sample(rng))
        } else {
            (0.0, 0.0)
        };
        frames.push(Frame {
            time: t,
            lip_center: opts.lip_center,
            hand_point: Point::new(pos.x + jx, pos.y + jy),
            hand_shape: Some(shape),
        });
    }
    HandTrack::from_frames(frames)
}

/// Generates `n_sentences` per profile (or the profile's own count).
/// Output order is fixed by (profile, sentence index); each sentence draws
/// from its own substream of the seeded generator.
pub fn gen_corpus(
    profiles: &[CuerProfile],
    model: &GroundTruthModel,
    n_sentences: usize,
    seed: u64,
    opts: &SynthOptions,
) -> Result<SynthCorpus> {
    if n_sentences == 0 && profiles.iter().any(|p| p.sentences.is_none()) {
        return Err(Error::InvalidProfile("n_sentences must be at least 1".into()));
    }
    if opts.vowels.is_empty() || !(opts.fps > 0.0) {
        return Err(Error::InvalidProfile("synth options need vowels and a positive fps".into()));
    }
    let mut corpus = SynthCorpus {
        timelines: Vec::new(),
        tracks: Vec::new(),
        truth: Vec::new(),
        rejected: 0,
    };
    for (p, profile) in profiles.iter().enumerate() {
        profile.validate()?;
        let model = profile.model.as_ref().unwrap_or(model);
        let count = profile.sentences.unwrap_or(n_sentences);
        let width = count.to_string().len().max(4);
        for s in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((p as u64) << 32) | s as u64);
            let id = format!("s{s:0width$}");
            let mut attempts = 0;
            let draw = loop {
                if let Some(d) = draw_sentence(&mut rng, profile, model, &id, opts)? {
                    break d;
                }
                attempts += 1;
                corpus.rejected += 1;
                if attempts >= opts.max_attempts {
                    return Err(Error::InvalidProfile(format!(
                        "{}: could not place ordered hand targets after {attempts} attempts",
                        profile.cuer_id
                    )));
                }
            };
            corpus.timelines.push(draw.timeline);
            corpus.tracks.push(draw.track);
            corpus.truth.extend(draw.truth);
        }
    }
    Ok(corpus)
}

/// The truth table as CSV: the measure-table columns plus `hpt_z_model,noise_z`.
pub fn truth_to_csv(rows: &[TruthRow]) -> String {
    let mut out = String::from(
        "cuer_id,hearing,sentence_id,index,label,t_mid_s,T_mid_s,hpt_s,lve_s,lvi_s,lvd_s,lvi_source,hpt_z_model,noise_z\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.cuer_id,
            r.hearing,
            r.sentence_id,
            r.index,
            r.label,
            r.lip_mid,
            r.hand_mid,
            r.hpt,
            r.lve,
            r.lvi,
            r.lvd,
            r.lvi_source,
            r.hpt_z_model,
            r.noise_z
        ));
    }
    out
}

/// TextGrid rendering of a timeline's lip vowels (one tier named `lip`).
pub fn timeline_textgrid(timeline: &SentenceTimeline) -> String {
    let tier = AnnotationTier {
        tier_name: "lip".into(),
        stream: Stream::Lip,
        intervals: timeline.lip_vowels.clone(),
    };
    write_textgrid(&[tier], 0.0, timeline.sentence_end)
}

/// EAF rendering of a timeline's hand vowels (one tier named `hand`).
pub fn timeline_eaf(timeline: &SentenceTimeline) -> String {
    let tier = AnnotationTier {
        tier_name: "hand".into(),
        stream: Stream::Hand,
        intervals: timeline.hand_vowels.clone(),
    };
    write_eaf(&[tier])
}
