//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cuesync::annot_io::{
    parse_eaf, parse_textgrid, read_canonical, read_corpus, read_landmarks, write_canonical, Frame, HandTrack,
    Hearing, Point, Sampling,
};
use cuesync::evaluate::{
    compare_predictors, mhcd, mse_matrix, mse_norm, split_sentences, EvalOptions, EvalReport, MseCell,
    NamedPredictor, PositionMap, PredictionSource, TrackSet,
};
use cuesync::measures::{assemble_table, LviConvention, MeasureTable, SentenceKey};
use cuesync::normalize::{
    descriptive_stats, log_scale, normalize_table, zscore, GroupStats, Grouping, NormContext, NormPolicy,
    ALL_KEY, DEAF_KEY, NORMAL_KEY,
};
use cuesync::regression::{
    denormalize_hpt, fit_predictor, lambda_weights, F1F2Estimator, FitOptions, HptPredictor, LinearModel, Subset,
    Variant,
};
use cuesync::synth::{
    gen_corpus, timeline_eaf, timeline_textgrid, CuerProfile, GroundTruthModel, SynthCorpus, SynthOptions,
};
use cuesync::Error;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: cuesync::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture")
}

fn track_set(c: &SynthCorpus) -> TrackSet {
    c.timelines
        .iter()
        .zip(&c.tracks)
        .map(|(t, tr)| ((t.cuer_id.clone(), t.sentence_id.clone()), tr.clone()))
        .collect()
}

/// Standard errors of a mean and a population standard deviation when rows
/// are correlated within sentences: cluster-robust, one cluster per sentence.
fn cluster_se(values: &[(SentenceKey, f64)]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().map(|(_, x)| x).sum::<f64>() / n;
    let var = values.iter().map(|(_, x)| (x - mean).powi(2)).sum::<f64>() / n;
    let mut by_sentence: HashMap<&SentenceKey, (f64, f64)> = HashMap::new();
    for (k, x) in values {
        let e = by_sentence.entry(k).or_default();
        e.0 += x - mean;
        e.1 += (x - mean).powi(2) - var;
    }
    let g = by_sentence.len() as f64;
    let adj = g / (g - 1.0);
    let se_mean = (adj * by_sentence.values().map(|(a, _)| a * a).sum::<f64>()).sqrt() / n;
    let se_var = (adj * by_sentence.values().map(|(_, b)| b * b).sum::<f64>()).sqrt() / n;
    let sd = var.sqrt();
    (mean, se_mean, sd, se_var / (2.0 * sd))
}

fn criterion_1() -> Outcome {
    let mut profiles = CuerProfile::table1();
    for p in &mut profiles {
        p.residual_sigma = 1.0;
        p.residual_ar = 0.8;
    }
    let corpus = lib(gen_corpus(&profiles, &GroundTruthModel::null(), 1000, 101, &SynthOptions::default()))?;
    let table = lib(assemble_table(&corpus.timelines, LviConvention::Backward))?;
    let per_cuer = lib(descriptive_stats(&table, Grouping::PerCuer))?;
    let mut worst: f64 = 0.0;
    for p in &profiles {
        let s = per_cuer
            .iter()
            .find(|s| s.group_key == p.cuer_id)
            .ok_or_else(|| format!("no stats for {}", p.cuer_id))?;
        let rows: Vec<_> = table.rows.iter().filter(|r| r.cuer_id == p.cuer_id).collect();
        let key = |r: &&cuesync::measures::VowelMeasures| (r.cuer_id.clone(), r.sentence_id.clone());
        let hpt: Vec<_> = rows.iter().map(|r| (key(r), r.hpt)).collect();
        let lvd: Vec<_> = rows.iter().map(|r| (key(r), r.lvd)).collect();
        let (m_h, se_mh, s_h, se_sh) = cluster_se(&hpt);
        let (m_d, se_md, s_d, se_sd) = cluster_se(&lvd);
        // the library's statistics must equal the oracle's on the same rows
        for (lhs, rhs) in [(s.mu_hpt, m_h), (s.sigma_hpt, s_h), (s.mu_lvd, m_d), (s.sigma_lvd, s_d)] {
            check((lhs - rhs).abs() < 1e-9, || format!("{}: stats {lhs} vs oracle {rhs}", p.cuer_id))?;
        }
        for (name, est, se, truth) in [
            ("mu_hpt", m_h, se_mh, p.mu_hpt),
            ("sigma_hpt", s_h, se_sh, p.sigma_hpt),
            ("mu_lvd", m_d, se_md, p.mu_lvd),
            ("sigma_lvd", s_d, se_sd, p.sigma_lvd),
        ] {
            let z = (est - truth) / se;
            worst = worst.max(z.abs());
            check(z.abs() <= 3.0, || {
                format!("{} {name}: {:.1} ms vs {:.1} ms ({z:.2} SE)", p.cuer_id, est * 1e3, truth * 1e3)
            })?;
        }
    }
    // pooled rows from the per-cuer rows, count weighted
    let pooled = |keep: &dyn Fn(&GroupStats) -> bool| -> (f64, f64, f64, f64, usize) {
        let groups: Vec<&GroupStats> = per_cuer.iter().filter(|g| keep(g)).collect();
        let n: usize = groups.iter().map(|g| g.count).sum();
        let nf = n as f64;
        let mh = groups.iter().map(|g| g.count as f64 * g.mu_hpt).sum::<f64>() / nf;
        let md = groups.iter().map(|g| g.count as f64 * g.mu_lvd).sum::<f64>() / nf;
        let vh = groups
            .iter()
            .map(|g| g.count as f64 * (g.sigma_hpt.powi(2) + (g.mu_hpt - mh).powi(2)))
            .sum::<f64>()
            / nf;
        let vd = groups
            .iter()
            .map(|g| g.count as f64 * (g.sigma_lvd.powi(2) + (g.mu_lvd - md).powi(2)))
            .sum::<f64>()
            / nf;
        (mh, vh.sqrt(), md, vd.sqrt(), n)
    };
    let hearing_of: BTreeMap<&str, Hearing> = profiles.iter().map(|p| (p.cuer_id.as_str(), p.hearing)).collect();
    let mut pooled_rows = lib(descriptive_stats(&table, Grouping::NormalVsDeaf))?;
    pooled_rows.extend(lib(descriptive_stats(&table, Grouping::All))?);
    for row in &pooled_rows {
        let expected = match row.group_key.as_str() {
            NORMAL_KEY => pooled(&|g| hearing_of[g.group_key.as_str()] == Hearing::Normal),
            DEAF_KEY => pooled(&|g| hearing_of[g.group_key.as_str()] == Hearing::Deaf),
            ALL_KEY => pooled(&|_| true),
            other => return Err(format!("unexpected pooled group {other}")),
        };
        check(row.count == expected.4, || format!("{} count", row.group_key))?;
        for (lhs, rhs) in [
            (row.mu_hpt, expected.0),
            (row.sigma_hpt, expected.1),
            (row.mu_lvd, expected.2),
            (row.sigma_lvd, expected.3),
        ] {
            check((lhs - rhs).abs() <= 1e-9, || format!("{}: pooled {lhs} vs {rhs}", row.group_key))?;
        }
    }
    check(pooled_rows.len() == 3, || "expected NORMAL, DEAF and ALL rows".into())?;
    Ok(format!("{} rows, worst deviation {worst:.2} SE, pooled rows exact", table.len()))
}

/// The corpus shared by criteria 2, 3 and 9.
fn recovery_corpus(residual_sigma: f64) -> Result<(Vec<CuerProfile>, SynthCorpus, MeasureTable), String> {
    let mut profiles = CuerProfile::table1();
    for p in &mut profiles {
        p.residual_sigma = residual_sigma;
    }
    let corpus = lib(gen_corpus(
        &profiles,
        &GroundTruthModel::default_normal(),
        950,
        202,
        &SynthOptions::default(),
    ))?;
    let table = lib(assemble_table(&corpus.timelines, LviConvention::Backward))?;
    Ok((profiles, corpus, table))
}

fn recovery_fit(profiles: &[CuerProfile], table: &MeasureTable) -> Result<HptPredictor, String> {
    let truth: Vec<GroupStats> = profiles.iter().map(CuerProfile::true_stats).collect();
    let normalized = lib(normalize_table(table, &truth, NormPolicy::PerCuer))?;
    let opts = FitOptions {
        estimator: F1F2Estimator::Joint,
        ..FitOptions::default()
    };
    lib(fit_predictor(&normalized, Subset::All, Variant::Combined, &opts))
}

fn pieces(p: &HptPredictor) -> [(&'static str, LinearModel); 3] {
    [
        ("f0.left", p.f0.as_ref().expect("f0").left),
        ("f1", p.f1.expect("f1")),
        ("f2", p.f2.expect("f2")),
    ]
}

fn criterion_2() -> Outcome {
    let model = GroundTruthModel::default_normal();
    let truth = [("f0.left", model.f0_left), ("f1", model.f1), ("f2", model.f2)];

    let (profiles, _, table) = recovery_corpus(0.3)?;
    check((45_000..=55_000).contains(&table.len()), || format!("{} rows", table.len()))?;
    let fit = recovery_fit(&profiles, &table)?;
    let mut worst: f64 = 0.0;
    for ((name, m), (_, t)) in pieces(&fit).iter().zip(&truth) {
        for (what, est, se, tv) in [
            ("slope", m.slope, m.slope_se, t.slope),
            ("intercept", m.intercept, m.intercept_se, t.intercept),
        ] {
            let z = (est - tv) / se;
            worst = worst.max(z.abs());
            check(z.abs() <= 3.0, || format!("{name} {what}: {est:.4} vs {tv} ({z:.2} SE)"))?;
        }
    }

    let (profiles, _, table) = recovery_corpus(0.0)?;
    let fit = recovery_fit(&profiles, &table)?;
    let mut worst_rel: f64 = 0.0;
    for ((name, m), (_, t)) in pieces(&fit).iter().zip(&truth) {
        for (est, tv) in [(m.slope, t.slope), (m.intercept, t.intercept)] {
            let rel = ((est - tv) / tv).abs();
            worst_rel = worst_rel.max(rel);
            check(rel < 1e-6, || format!("noiseless {name}: {est} vs {tv}"))?;
        }
    }
    Ok(format!(
        "{} rows, worst {worst:.2} SE with noise, worst relative error {worst_rel:.1e} without",
        table.len()
    ))
}

const VARIANTS: [Variant; 4] = [Variant::Combined, Variant::LveOnly, Variant::MeanBased, Variant::AudioBased];

/// Default pipeline: per-cuer statistics of the training sentences, marginal
/// regressions, held-out scoring of ground truth and the four variants.
fn held_out_reports(corpus: &SynthCorpus, table: &MeasureTable) -> Result<Vec<EvalReport>, String> {
    let split = lib(split_sentences(table, (4, 1), 0))?;
    let train = split.train_table(table);
    let ctx = lib(NormContext::fit(&train, NormPolicy::PerCuer))?;
    let train = lib(normalize_table(&train, &ctx.groups, ctx.policy))?;
    let predictors: Vec<HptPredictor> = VARIANTS
        .iter()
        .map(|&v| lib(fit_predictor(&train, Subset::All, v, &FitOptions::default())))
        .collect::<Result<_, _>>()?;
    let ids: Vec<String> = predictors.iter().map(|p| format!("{:?}", p.variant)).collect();
    let mut named = vec![NamedPredictor {
        id: "GT",
        source: PredictionSource::GroundTruth,
    }];
    named.extend(predictors.iter().zip(&ids).map(|(p, id)| NamedPredictor {
        id,
        source: PredictionSource::Fitted(p),
    }));
    let positions = PositionMap::default();
    let opts = EvalOptions {
        sampling: Sampling::Nearest,
        positions: &positions,
        eval_subset: Subset::All,
    };
    lib(compare_predictors(table, &named, &track_set(corpus), &split, &opts))
}

fn report<'a>(reports: &'a [EvalReport], id: &str) -> &'a EvalReport {
    reports.iter().find(|r| r.predictor_id == id).expect("report")
}

fn criterion_3_and_9() -> (Outcome, Outcome) {
    let run = || -> Result<Vec<EvalReport>, String> {
        let (_, corpus, table) = recovery_corpus(0.3)?;
        held_out_reports(&corpus, &table)
    };
    let reports = match run() {
        Ok(r) => r,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let c3 = (|| {
        let again = run()?;
        check(again == reports, || "reports differ between two runs with the same seed".into())?;
        let [c, l, m, a] = ["Combined", "LveOnly", "MeanBased", "AudioBased"].map(|id| report(&reports, id));
        for (metric, get) in [
            ("e_hpt", (|r: &EvalReport| r.e_hpt) as fn(&EvalReport) -> f64),
            ("d_hpt", |r: &EvalReport| r.d_hpt_px),
        ] {
            check(get(c) < get(l) && get(l) < get(m) && get(c) < get(a), || {
                format!(
                    "{metric}: combined {:.4}, lve {:.4}, mean {:.4}, audio {:.4}",
                    get(c),
                    get(l),
                    get(m),
                    get(a)
                )
            })?;
        }
        Ok(format!(
            "e_hpt {:.3} < {:.3} < {:.3}, audio {:.3}; d_hpt {:.2} < {:.2} < {:.2}, audio {:.2} px; deterministic",
            c.e_hpt, l.e_hpt, m.e_hpt, a.e_hpt, c.d_hpt_px, l.d_hpt_px, m.d_hpt_px, a.d_hpt_px
        ))
    })();
    let c9 = (|| {
        let [gt, c, a] = ["GT", "Combined", "AudioBased"].map(|id| report(&reports, id).position_accuracy);
        check(gt >= c && c >= a, || format!("accuracy GT {gt:.4}, combined {c:.4}, audio {a:.4}"))?;
        check(gt >= 0.95, || format!("GT accuracy {gt:.4} < 0.95"))?;
        Ok(format!("accuracy GT {gt:.4} >= combined {c:.4} >= audio {a:.4}"))
    })();
    (c3, c9)
}

fn criterion_4() -> Outcome {
    let mut profiles = CuerProfile::table1();
    for p in &mut profiles {
        if p.hearing == Hearing::Deaf {
            p.model = Some(GroundTruthModel::default_deaf());
            p.sentences = Some(500);
        } else {
            p.sentences = Some(1000);
        }
    }
    let corpus = lib(gen_corpus(&profiles, &GroundTruthModel::default_normal(), 0, 303, &SynthOptions::default()))?;
    let table = lib(assemble_table(&corpus.timelines, LviConvention::Backward))?;
    let normal_share =
        table.rows.iter().filter(|r| r.hearing == Hearing::Normal).count() as f64 / table.len() as f64;
    check((0.72..0.78).contains(&normal_share), || format!("normal share {normal_share:.3}"))?;

    let split = lib(split_sentences(&table, (4, 1), 0))?;
    let train = split.train_table(&table);
    let ctx = lib(NormContext::fit(&train, NormPolicy::PerCuer))?;
    let train = lib(normalize_table(&train, &ctx.groups, ctx.policy))?;
    let predictors: Vec<HptPredictor> = [Subset::All, Subset::Normal, Subset::Deaf]
        .iter()
        .map(|&s| lib(fit_predictor(&train, s, Variant::Combined, &FitOptions::default())))
        .collect::<Result<_, _>>()?;
    let cells = lib(mse_matrix(&table, &predictors, &split))?;
    let cell = |eval: Subset, fit: Subset| -> f64 {
        cells
            .iter()
            .find(|c: &&MseCell| c.eval_subset == eval && c.lr_source == fit)
            .map(|c| c.e_hpt)
            .expect("cell")
    };
    let (deaf_a, deaf_d) = (cell(Subset::Deaf, Subset::All), cell(Subset::Deaf, Subset::Deaf));
    let (norm_a, norm_n) = (cell(Subset::Normal, Subset::All), cell(Subset::Normal, Subset::Normal));
    let deaf_gain = (deaf_a - deaf_d) / deaf_a;
    let normal_gain = (norm_a - norm_n) / norm_a;
    check(deaf_d < deaf_a, || format!("DEAF: D-LR {deaf_d:.4} vs A-LR {deaf_a:.4}"))?;
    check(deaf_gain > normal_gain, || {
        format!("reduction DEAF {deaf_gain:.3} vs NORMAL {normal_gain:.3}")
    })?;
    Ok(format!(
        "normal share {normal_share:.3}; DEAF {deaf_a:.3} -> {deaf_d:.3} ({:.1}%), NORMAL {norm_a:.3} -> {norm_n:.3} ({:.1}%)",
        100.0 * deaf_gain,
        100.0 * normal_gain
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draw = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-2.0..0.5));
    for _ in 0..100_000 {
        let (a, b, ab, bb) = (draw(&mut rng), draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let (l1, l2) = lib(lambda_weights(a, b, ab, bb))?;
        check((l1 + l2 - 1.0).abs() <= 1e-12, || format!("sum {} at {a},{b},{ab},{bb}", l1 + l2))?;
        check(l1 > 0.0 && l1 < 1.0 && l2 > 0.0 && l2 < 1.0, || format!("weights {l1},{l2}"))?;
    }
    for _ in 0..10_000 {
        let (a, b, ab, bb) = (draw(&mut rng), draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let bigger = 1.0 + rng.random_range(1e-3..1.0);
        let base = lib(lambda_weights(a, b, ab, bb))?.0;
        let more_alpha = lib(lambda_weights(a * bigger, b, ab, bb))?.0;
        let more_beta = lib(lambda_weights(a, b * bigger, ab, bb))?.0;
        check(more_alpha > base, || format!("lambda1 not increasing in alpha at {a}"))?;
        check(more_beta < base, || format!("lambda1 not decreasing in beta at {b}"))?;
    }
    Ok("1e5 closure draws, 1e4 ordered pairs per argument".into())
}

fn criterion_6() -> Outcome {
    let corpus = lib(gen_corpus(
        &CuerProfile::table1(),
        &GroundTruthModel::default_normal(),
        200,
        606,
        &SynthOptions::default(),
    ))?;
    let table = lib(assemble_table(&corpus.timelines, LviConvention::Backward))?;
    let mut groups_checked = 0;
    for policy in [NormPolicy::PerCuer, NormPolicy::PerGroup, NormPolicy::Global] {
        let ctx = lib(NormContext::fit(&table, policy))?;
        let norm = lib(normalize_table(&table, &ctx.groups, policy))?;
        let mut cols: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for r in &norm.rows {
            let n = r.norm.ok_or("row not normalized")?;
            let e = cols.entry(policy.key_for(r).to_string()).or_default();
            e.0.push(n.hpt_z);
            e.1.push(n.lvd_z);
        }
        for (key, (h, d)) in &cols {
            for (col, v) in [("hpt_z", h), ("lvd_z", d)] {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
                check(mean.abs() <= 1e-9 && (sd - 1.0).abs() <= 1e-9, || {
                    format!("{policy} {key} {col}: mean {mean:e}, sd {sd}")
                })?;
            }
            groups_checked += 1;
        }
    }
    let nf1 = CuerProfile::table1_by_id("NF1").unwrap().true_stats();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let x: f64 = rng.random_range(-0.5..1.5);
        let back = lib(denormalize_hpt(lib(zscore(x, nf1.mu_hpt, nf1.sigma_hpt))?, &nf1))?;
        check((back - x).abs() <= 1e-12, || format!("zscore round trip {x} -> {back}"))?;
        let y: f64 = rng.random_range(-3.0..2.0);
        let l = lib(log_scale(10f64.powf(y)))?;
        check((l - y).abs() <= 1e-12, || format!("log_scale(10^{y}) = {l}"))?;
    }
    Ok(format!("{groups_checked} groups over three policies, 1e4 round trips each"))
}

fn frames(points: &[(f64, f64, f64)]) -> Result<HandTrack, String> {
    lib(HandTrack::from_frames(
        points
            .iter()
            .map(|&(t, x, y)| Frame {
                time: t,
                lip_center: Point::new(0.0, 0.0),
                hand_point: Point::new(x, y),
                hand_shape: None,
            })
            .collect(),
    ))
}

fn criterion_7() -> Outcome {
    let mse = lib(mse_norm(&[0.5, -0.5], &[0.0, 0.0]))?;
    check(mse == 0.25, || format!("mse_norm = {mse}"))?;

    let pair = frames(&[(0.0, 0.0, 0.0), (1.0, 3.0, 4.0)])?;
    let d = lib(mhcd(&pair, &[0.0], &[1.0], Sampling::Nearest))?;
    check(d == 5.0, || format!("single pair distance {d}"))?;

    let fps = 30.0;
    let speed = 100.0;
    let line: Vec<(f64, f64, f64)> = (0..=300)
        .map(|k| {
            let t = k as f64 / fps;
            (t, speed * t, 50.0)
        })
        .collect();
    let line = frames(&line)?;
    let gt: Vec<f64> = (0..80).map(|i| 0.5 + i as f64 * 0.107).collect();
    let zero = lib(mhcd(&line, &gt, &gt, Sampling::Nearest))?;
    check(zero == 0.0, || format!("identical instants give {zero}"))?;
    let late: Vec<f64> = gt.iter().map(|t| t + 0.1).collect();
    let d = lib(mhcd(&line, &gt, &late, Sampling::Nearest))?;
    let frame_motion = speed / fps;
    check((d - 10.0).abs() <= frame_motion, || format!("constant velocity distance {d}"))?;
    Ok(format!("0.25, 5 px, 0 px, {d:.3} px (tolerance {frame_motion:.3})"))
}

fn criterion_8() -> Outcome {
    let lip = lib(parse_textgrid(&read_fixture("lip.TextGrid")))?;
    let got: Vec<(f64, f64, &str)> = lip[0].intervals.iter().map(|i| (i.start, i.end, i.label.as_str())).collect();
    check(got == [(0.35, 0.62, "a"), (0.8, 1.21, "ou"), (1.21, 1.9, "i")], || format!("TextGrid {got:?}"))?;
    check(lip[1].intervals[0].label == "ni \"hao\"", || "escaped quotes".into())?;
    let hand = lib(parse_eaf(&read_fixture("hand.eaf")))?;
    let got: Vec<(f64, f64, &str)> = hand[0].intervals.iter().map(|i| (i.start, i.end, i.label.as_str())).collect();
    check(got == [(0.12, 0.41, "a"), (0.53, 0.905, "ou"), (1.0, 1.65, "i")], || format!("EAF {got:?}"))?;

    let canonical = read_fixture("sentence.jsonl");
    let line = canonical.lines().next().ok_or("empty canonical fixture")?;
    let rewritten = write_canonical(&lib(read_canonical(line))?);
    check(rewritten == line, || format!("canonical rewrite differs:\n{line}\n{rewritten}"))?;

    let named = [
        ("bad_header.TextGrid", parse_textgrid(&read_fixture("bad_header.TextGrid")).err(), "MalformedFile"),
        ("reversed.TextGrid", parse_textgrid(&read_fixture("reversed.TextGrid")).err(), "NonmonotonicIntervals"),
        ("dangling.eaf", parse_eaf(&read_fixture("dangling.eaf")).err(), "DanglingTimeSlotRef"),
        ("missing_hearing.jsonl", read_corpus(&read_fixture("missing_hearing.jsonl")).err(), "SchemaViolation"),
        ("backwards.csv", read_landmarks(&read_fixture("backwards.csv")).err(), "NonmonotonicTime"),
    ];
    for (file, err, want) in &named {
        let name = err.as_ref().map(Error::name);
        check(name == Some(*want), || format!("{file}: expected {want}, got {err:?}"))?;
    }

    let opts = SynthOptions {
        ms_grid: true,
        ..SynthOptions::default()
    };
    let corpus = lib(gen_corpus(&CuerProfile::table1(), &GroundTruthModel::default_normal(), 40, 808, &opts))?;
    for t in &corpus.timelines {
        let lip = lib(parse_textgrid(&timeline_textgrid(t)))?;
        let hand = lib(parse_eaf(&timeline_eaf(t)))?;
        check(lip.len() == 1 && lip[0].intervals == t.lip_vowels, || format!("{} lip tier differs", t.sentence_id))?;
        check(hand.len() == 1 && hand[0].intervals == t.hand_vowels, || {
            format!("{} hand tier differs", t.sentence_id)
        })?;
        let line = write_canonical(t);
        check(write_canonical(&lib(read_canonical(&line))?) == line, || "synthetic canonical rewrite".into())?;
    }
    Ok(format!(
        "fixtures parsed, {} named errors, {} synthetic sentences re-parsed exactly",
        named.len(),
        corpus.timelines.len()
    ))
}

fn cuesync(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cuesync"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("cuesync {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn pipeline(dir: &Path) -> Result<(), String> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let profiles = data.join("profiles.cfg");
    let run_cfg = data.join("run.cfg");
    let (profiles, run_cfg) = (profiles.to_str().unwrap(), run_cfg.to_str().unwrap());
    let c = ["--config", run_cfg];
    let with = |rest: &[&str]| -> Vec<String> { c.iter().chain(rest).map(|s| s.to_string()).collect() };
    let go = |rest: &[&str]| -> Result<(), String> {
        let v = with(rest);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        cuesync(&refs, dir)
    };
    go(&["synth", "--profiles", profiles, "--n", "30", "--seed", "7", "--annotations", "--out", "synth"])?;
    go(&[
        "parse",
        "--lip",
        "synth/textgrid/DF1__s0003.TextGrid",
        "--hand",
        "synth/eaf/DF1__s0003.eaf",
        "--sentence-id",
        "s0003",
        "--cuer-id",
        "DF1",
        "--hearing",
        "deaf",
        "--out",
        "parsed/DF1__s0003.jsonl",
    ])?;
    go(&["measure", "--in", "synth/corpus.jsonl", "--out", "measures.csv"])?;
    go(&["measure", "--in", "parsed", "--out", "parsed_measures.csv"])?;
    go(&["stats", "--in", "measures.csv", "--out", "stats.csv"])?;
    let mut models = Vec::new();
    for subset in ["ALL", "NORMAL", "DEAF"] {
        for variant in ["combined", "lve", "mean", "audio"] {
            let out = format!("models/{subset}_{variant}.json");
            go(&["fit", "--in", "measures.csv", "--subset", subset, "--variant", variant, "--holdout", "--out", &out])?;
            models.push(out);
        }
    }
    go(&["predict", "--model", "models/ALL_combined.json", "--in", "measures.csv", "--out", "predictions.csv"])?;
    let m: Vec<&str> = models.iter().map(String::as_str).collect();
    let mut eval = vec!["eval", "--in", "measures.csv", "--tracks", "synth/tracks", "--out", "eval.csv", "--json", "eval.json", "--models"];
    eval.extend(&m[..4]);
    go(&eval)?;
    let mut mse = vec!["plot-data", "--kind", "mse", "--in", "measures.csv", "--out", "mse.csv", "--models"];
    mse.extend(m.iter().filter(|s| s.ends_with("_combined.json")));
    go(&mse)?;
    go(&[
        "plot-data", "--kind", "polar", "--in", "measures.csv", "--tracks", "synth/tracks", "--out", "polar.csv", "--models", m[0],
    ])?;
    Ok(())
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path)?);
        }
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(a.path())?;
    pipeline(b.path())?;
    let (mut fa, mut fb) = (BTreeMap::new(), BTreeMap::new());
    collect_files(a.path(), a.path(), &mut fa).map_err(|e| e.to_string())?;
    collect_files(b.path(), b.path(), &mut fb).map_err(|e| e.to_string())?;
    check(fa.keys().eq(fb.keys()), || "different file sets".into())?;
    for (path, bytes) in &fa {
        check(fb[path] == *bytes, || format!("{} differs", path.display()))?;
    }
    let bytes: usize = fa.values().map(Vec::len).sum();
    Ok(format!("{} files, {bytes} bytes identical", fa.len()))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |n: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let r = f();
        results.push((n, name, r, t.elapsed().as_secs_f64()));
    };
    timed(1, "descriptive statistics reproduction", &criterion_1);
    timed(2, "model recovery", &criterion_2);
    let t = Instant::now();
    let (c3, c9) = criterion_3_and_9();
    let shared = t.elapsed().as_secs_f64();
    timed(4, "subset regressions", &criterion_4);
    timed(5, "mixing weight properties", &criterion_5);
    timed(6, "normalization laws", &criterion_6);
    timed(7, "metric goldens", &criterion_7);
    timed(8, "parser suite", &criterion_8);
    timed(10, "end-to-end determinism", &criterion_10);
    results.push((3, "predictor ordering", c3, shared));
    results.push((9, "position classifier ordering", c9, shared));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, outcome, secs) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
