//! Parse a Praat TextGrid lip tier and an ELAN hand tier, align them and
//! print the canonical sentence record.
//!
//! ```bash
//! cargo run --example parse_annotations
//! ```

use cuesync::annot_io::{
    align_batch, align_tiers, parse_eaf, parse_textgrid, write_canonical, AnnotationTier, Hearing, SentenceMeta,
    VowelSet,
};

const TEXTGRID: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 1.6
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "lip"
        xmin = 0
        xmax = 1.6
        intervals: size = 5
        intervals [1]:
            xmin = 0
            xmax = 0.2
            text = ""
        intervals [2]:
            xmin = 0.2
            xmax = 0.5
            text = "a"
        intervals [3]:
            xmin = 0.5
            xmax = 0.7
            text = "sh"
        intervals [4]:
            xmin = 0.7
            xmax = 1.1
            text = "i"
        intervals [5]:
            xmin = 1.1
            xmax = 1.6
            text = "u"
"#;

const EAF: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<ANNOTATION_DOCUMENT>
  <HEADER TIME_UNITS="milliseconds"/>
  <TIME_ORDER>
    <TIME_SLOT TIME_SLOT_ID="ts1" TIME_VALUE="60"/>
    <TIME_SLOT TIME_SLOT_ID="ts2" TIME_VALUE="300"/>
    <TIME_SLOT TIME_SLOT_ID="ts3" TIME_VALUE="420"/>
    <TIME_SLOT TIME_SLOT_ID="ts4" TIME_VALUE="780"/>
    <TIME_SLOT TIME_SLOT_ID="ts5" TIME_VALUE="900"/>
    <TIME_SLOT TIME_SLOT_ID="ts6" TIME_VALUE="1300"/>
  </TIME_ORDER>
  <TIER TIER_ID="hand">
    <ANNOTATION><ALIGNABLE_ANNOTATION ANNOTATION_ID="a1" TIME_SLOT_REF1="ts1" TIME_SLOT_REF2="ts2"><ANNOTATION_VALUE>a</ANNOTATION_VALUE></ALIGNABLE_ANNOTATION></ANNOTATION>
    <ANNOTATION><ALIGNABLE_ANNOTATION ANNOTATION_ID="a2" TIME_SLOT_REF1="ts3" TIME_SLOT_REF2="ts4"><ANNOTATION_VALUE>i</ANNOTATION_VALUE></ALIGNABLE_ANNOTATION></ANNOTATION>
    <ANNOTATION><ALIGNABLE_ANNOTATION ANNOTATION_ID="a3" TIME_SLOT_REF1="ts5" TIME_SLOT_REF2="ts6"><ANNOTATION_VALUE>u</ANNOTATION_VALUE></ALIGNABLE_ANNOTATION></ANNOTATION>
  </TIER>
</ANNOTATION_DOCUMENT>
"#;

fn main() -> cuesync::Result<()> {
    let lip = parse_textgrid(TEXTGRID)?.remove(0);
    let hand = parse_eaf(EAF)?.remove(0);

    // "sh" is not a vowel and is dropped before alignment
    let vowels = VowelSet::default();
    let (lip, dropped) = vowels.filter(&lip);
    let (hand, _) = vowels.filter(&hand);
    println!("dropped {dropped} non-vowel lip interval(s)");

    let meta = SentenceMeta {
        sentence_id: "demo".into(),
        cuer_id: "NF1".into(),
        hearing: Hearing::Normal,
    };
    let timeline = align_tiers(&lip, &hand, &meta)?;
    println!("{}", write_canonical(&timeline));

    // in a batch, a hand tier missing a vowel drops that sentence only
    let short = AnnotationTier { intervals: hand.intervals[..2].to_vec(), ..hand.clone() };
    let second = SentenceMeta { sentence_id: "demo2".into(), ..meta.clone() };
    let (kept, report) = align_batch([(&lip, &hand, meta), (&lip, &short, second)])?;
    println!("kept {}, excluded {}", kept.len(), report.excluded_count());
    for (m, e) in &report.excluded {
        println!("  {}: {e}", m.sentence_id);
    }
    Ok(())
}
