//! ELAN EAF subset: `TIME_ORDER` time slots and tiers of
//! `ALIGNABLE_ANNOTATION`s. Reference annotations and controlled
//! vocabularies are not supported.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{check_ordered, AnnotationTier, PhoneInterval, Stream};
use crate::error::{Error, Result};

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str> {
    node.attribute(name).ok_or_else(|| {
        Error::MalformedFile(format!(
            "<{}> is missing attribute {name}",
            node.tag_name().name()
        ))
    })
}

/// Parses an EAF document into hand-stream tiers. Time slot values are
/// milliseconds; interval bounds are `value / 1000` seconds.
pub fn parse_eaf(xml: &str) -> Result<Vec<AnnotationTier>> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::MalformedFile(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("ANNOTATION_DOCUMENT") {
        return Err(Error::MalformedFile(format!(
            "root element is <{}>, expected <ANNOTATION_DOCUMENT>",
            root.tag_name().name()
        )));
    }
    let order = child(root, "TIME_ORDER")
        .ok_or_else(|| Error::MalformedFile("missing <TIME_ORDER>".into()))?;

    // Slots without TIME_VALUE are unaligned; referencing one is a dangling reference.
    let mut slots: HashMap<&str, f64> = HashMap::new();
    for slot in order.children().filter(|c| c.has_tag_name("TIME_SLOT")) {
        let id = attr(slot, "TIME_SLOT_ID")?;
        if let Some(v) = slot.attribute("TIME_VALUE") {
            let ms: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::MalformedFile(format!("time slot '{id}' has value '{v}'")))?;
            slots.insert(id, ms / 1000.0);
        }
    }

    let mut tiers = Vec::new();
    for tier in root.children().filter(|c| c.has_tag_name("TIER")) {
        let name = attr(tier, "TIER_ID")?.to_string();
        let mut intervals = Vec::new();
        for ann in tier.children().filter(|c| c.has_tag_name("ANNOTATION")) {
            let aligned = child(ann, "ALIGNABLE_ANNOTATION").ok_or_else(|| {
                Error::MalformedFile(format!(
                    "tier '{name}' contains a non-alignable annotation"
                ))
            })?;
            let ann_id = aligned.attribute("ANNOTATION_ID").unwrap_or("?");
            let resolve = |key: &str| -> Result<f64> {
                let slot = attr(aligned, key)?;
                slots.get(slot).copied().ok_or_else(|| Error::DanglingTimeSlotRef {
                    annotation: ann_id.to_string(),
                    slot: slot.to_string(),
                })
            };
            let start = resolve("TIME_SLOT_REF1")?;
            let end = resolve("TIME_SLOT_REF2")?;
            let label = child(aligned, "ANNOTATION_VALUE")
                .and_then(|v| v.text())
                .unwrap_or("")
                .trim()
                .to_string();
            if end <= start {
                return Err(Error::NonmonotonicIntervals {
                    tier: name.clone(),
                    index: intervals.len(),
                    detail: format!("annotation '{ann_id}' ends at {end} s, starts at {start} s"),
                });
            }
            if label.is_empty() {
                continue;
            }
            intervals.push(PhoneInterval { start, end, label });
        }
        intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
        check_ordered(&name, &intervals)?;
        tiers.push(AnnotationTier {
            tier_name: name,
            stream: Stream::Hand,
            intervals,
        });
    }
    Ok(tiers)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders tiers as a minimal EAF document. Bounds are rounded to whole
/// milliseconds, so times already on a millisecond grid round-trip exactly
/// through [`parse_eaf`].
pub fn write_eaf(tiers: &[AnnotationTier]) -> String {
    let mut slots = String::new();
    let mut body = String::new();
    let mut slot_id = 0usize;
    let mut ann_id = 0usize;
    for tier in tiers {
        let _ = writeln!(
            body,
            "    <TIER LINGUISTIC_TYPE_REF=\"default-lt\" TIER_ID=\"{}\">",
            escape(&tier.tier_name)
        );
        for iv in &tier.intervals {
            let mut refs = [String::new(), String::new()];
            for (r, t) in refs.iter_mut().zip([iv.start, iv.end]) {
                slot_id += 1;
                *r = format!("ts{slot_id}");
                let ms = (t * 1000.0).round() as i64;
                let _ = writeln!(slots, "        <TIME_SLOT TIME_SLOT_ID=\"{r}\" TIME_VALUE=\"{ms}\"/>");
            }
            ann_id += 1;
            let _ = writeln!(body, "        <ANNOTATION>");
            let _ = writeln!(
                body,
                "            <ALIGNABLE_ANNOTATION ANNOTATION_ID=\"a{ann_id}\" TIME_SLOT_REF1=\"{}\" TIME_SLOT_REF2=\"{}\">",
                refs[0], refs[1]
            );
            let _ = writeln!(
                body,
                "                <ANNOTATION_VALUE>{}</ANNOTATION_VALUE>",
                escape(&iv.label)
            );
            let _ = writeln!(body, "            </ALIGNABLE_ANNOTATION>");
            let _ = writeln!(body, "        </ANNOTATION>");
        }
        let _ = writeln!(body, "    </TIER>");
    }
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<ANNOTATION_DOCUMENT AUTHOR=\"\" FORMAT=\"3.0\" VERSION=\"3.0\">\n");
    out.push_str("    <HEADER MEDIA_FILE=\"\" TIME_UNITS=\"milliseconds\"/>\n");
    out.push_str("    <TIME_ORDER>\n");
    out.push_str(&slots);
    out.push_str("    </TIME_ORDER>\n");
    out.push_str(&body);
    out.push_str("    <LINGUISTIC_TYPE GRAPHIC_REFERENCES=\"false\" LINGUISTIC_TYPE_ID=\"default-lt\" TIME_ALIGNABLE=\"true\"/>\n");
    out.push_str("</ANNOTATION_DOCUMENT>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<ANNOTATION_DOCUMENT FORMAT="3.0" VERSION="3.0">
  <HEADER TIME_UNITS="milliseconds"/>
  <TIME_ORDER>
    <TIME_SLOT TIME_SLOT_ID="ts1" TIME_VALUE="0"/>
    <TIME_SLOT TIME_SLOT_ID="ts2" TIME_VALUE="350"/>
    <TIME_SLOT TIME_SLOT_ID="ts3" TIME_VALUE="500"/>
    <TIME_SLOT TIME_SLOT_ID="ts4" TIME_VALUE="910"/>
  </TIME_ORDER>
  <TIER TIER_ID="hand" LINGUISTIC_TYPE_REF="default">
    <ANNOTATION>
      <ALIGNABLE_ANNOTATION ANNOTATION_ID="a2" TIME_SLOT_REF1="ts3" TIME_SLOT_REF2="ts4">
        <ANNOTATION_VALUE>i</ANNOTATION_VALUE>
      </ALIGNABLE_ANNOTATION>
    </ANNOTATION>
    <ANNOTATION>
      <ALIGNABLE_ANNOTATION ANNOTATION_ID="a1" TIME_SLOT_REF1="ts1" TIME_SLOT_REF2="ts2">
        <ANNOTATION_VALUE>a</ANNOTATION_VALUE>
      </ALIGNABLE_ANNOTATION>
    </ANNOTATION>
  </TIER>
</ANNOTATION_DOCUMENT>
"#;

    #[test]
    fn resolves_slots_and_sorts() {
        let tiers = parse_eaf(FIXTURE).unwrap();
        assert_eq!(tiers.len(), 1);
        assert_eq!(tiers[0].stream, Stream::Hand);
        assert_eq!(
            tiers[0].intervals,
            vec![
                PhoneInterval { start: 0.0, end: 0.350, label: "a".into() },
                PhoneInterval { start: 0.5, end: 0.910, label: "i".into() },
            ]
        );
    }

    #[test]
    fn dangling_slot() {
        let xml = FIXTURE.replace("TIME_SLOT_REF2=\"ts4\"", "TIME_SLOT_REF2=\"ts9\"");
        match parse_eaf(&xml) {
            Err(Error::DanglingTimeSlotRef { slot, .. }) => assert_eq!(slot, "ts9"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reversed_slots_nonmonotonic() {
        let xml = FIXTURE.replace("TIME_VALUE=\"910\"", "TIME_VALUE=\"400\"");
        assert!(matches!(parse_eaf(&xml), Err(Error::NonmonotonicIntervals { .. })));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_eaf("<ANNOTATION_DOCUMENT>"), Err(Error::MalformedFile(_))));
        assert!(matches!(parse_eaf("<FOO/>"), Err(Error::MalformedFile(_))));
        let reference = FIXTURE.replace("ALIGNABLE_ANNOTATION", "REF_ANNOTATION");
        assert!(matches!(parse_eaf(&reference), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn unit_law_is_exact_division() {
        for ms in [1u32, 7, 333, 1234, 98765] {
            let xml = FIXTURE.replace("TIME_VALUE=\"0\"", &format!("TIME_VALUE=\"{ms}\""))
                .replace("TIME_VALUE=\"350\"", &format!("TIME_VALUE=\"{}\"", ms + 350))
                .replace("TIME_VALUE=\"500\"", &format!("TIME_VALUE=\"{}\"", ms + 500))
                .replace("TIME_VALUE=\"910\"", &format!("TIME_VALUE=\"{}\"", ms + 910));
            let t = parse_eaf(&xml).unwrap();
            assert_eq!(t[0].intervals[0].start, ms as f64 / 1000.0);
        }
    }

    #[test]
    fn writer_round_trip_on_ms_grid() {
        let tier = AnnotationTier {
            tier_name: "hand & shape".into(),
            stream: Stream::Hand,
            intervals: vec![
                PhoneInterval::new(0.123, 0.456, "ang").unwrap(),
                PhoneInterval::new(0.5, 1.001, "v").unwrap(),
            ],
        };
        assert_eq!(parse_eaf(&write_eaf(std::slice::from_ref(&tier))).unwrap(), vec![tier]);
    }
}
