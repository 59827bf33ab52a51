//! Long-format Praat TextGrid reader and writer (interval tiers only).

use std::fmt::Write as _;

use super::{check_ordered, AnnotationTier, PhoneInterval, Stream};
use crate::error::{Error, Result};

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Lines {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    fn next_nonempty(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].trim();
            self.pos += 1;
            if !line.is_empty() {
                return Some((self.pos, line));
            }
        }
        None
    }

    fn peek_nonempty(&self) -> Option<&'a str> {
        self.lines[self.pos..]
            .iter()
            .map(|l| l.trim())
            .find(|l| !l.is_empty())
    }

    /// Reads `key = value`, returning the raw value. Quoted values may span
    /// several lines.
    fn expect_kv(&mut self, key: &str) -> Result<String> {
        let (lineno, line) = self
            .next_nonempty()
            .ok_or_else(|| malformed(format!("unexpected end of file, expected '{key}'")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| malformed(format!("line {lineno}: expected '{key} = ...', got '{line}'")))?;
        if k.trim() != key {
            return Err(malformed(format!(
                "line {lineno}: expected '{key}', got '{}'",
                k.trim()
            )));
        }
        let mut value = v.trim().to_string();
        if value.starts_with('"') {
            while !quoted_complete(&value) {
                if self.pos >= self.lines.len() {
                    return Err(malformed(format!("line {lineno}: unterminated string")));
                }
                value.push('\n');
                value.push_str(self.lines[self.pos]);
                self.pos += 1;
                value = value.trim_end().to_string();
            }
        }
        Ok(value)
    }

    fn expect_line(&mut self, expected: &str) -> Result<()> {
        match self.next_nonempty() {
            Some((_, l)) if l == expected => Ok(()),
            Some((n, l)) => Err(malformed(format!("line {n}: expected '{expected}', got '{l}'"))),
            None => Err(malformed(format!("unexpected end of file, expected '{expected}'"))),
        }
    }
}

fn malformed(msg: String) -> Error {
    Error::MalformedFile(msg)
}

/// A Praat string is complete when it has an opening quote and a closing
/// quote not part of a doubled `""` escape.
fn quoted_complete(v: &str) -> bool {
    let body = &v[1..];
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '"' {
            if chars.peek() == Some(&'"') {
                chars.next();
            } else {
                return chars.all(char::is_whitespace);
            }
        }
    }
    false
}

fn unquote(v: &str) -> Result<String> {
    let v = v.trim();
    if v.len() < 2 || !v.starts_with('"') || !v.ends_with('"') {
        return Err(malformed(format!("expected quoted string, got {v}")));
    }
    Ok(v[1..v.len() - 1].replace("\"\"", "\""))
}

fn number(v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| malformed(format!("expected number, got '{v}'")))
}

fn count(v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| malformed(format!("expected count, got '{v}'")))
}

/// Parses a long-format TextGrid into one lip-stream tier per interval tier.
/// Intervals with empty or whitespace-only text are dropped as silence.
pub fn parse_textgrid(text: &str) -> Result<Vec<AnnotationTier>> {
    let mut lines = Lines::new(text);
    if unquote(&lines.expect_kv("File type")?)? != "ooTextFile" {
        return Err(malformed("not an ooTextFile".into()));
    }
    if unquote(&lines.expect_kv("Object class")?)? != "TextGrid" {
        return Err(malformed("object class is not TextGrid".into()));
    }
    number(&lines.expect_kv("xmin")?)?;
    number(&lines.expect_kv("xmax")?)?;
    match lines.next_nonempty() {
        Some((_, "tiers? <exists>")) => {}
        Some((n, l)) => return Err(malformed(format!("line {n}: expected 'tiers? <exists>', got '{l}'"))),
        None => return Err(malformed("missing tier list".into())),
    }
    let n_items = count(&lines.expect_kv("size")?)?;
    lines.expect_line("item []:")?;

    let mut tiers = Vec::with_capacity(n_items);
    for k in 1..=n_items {
        lines.expect_line(&format!("item [{k}]:"))?;
        let class = unquote(&lines.expect_kv("class")?)?;
        if class != "IntervalTier" {
            return Err(malformed(format!("item {k}: unsupported tier class '{class}'")));
        }
        let name = unquote(&lines.expect_kv("name")?)?;
        number(&lines.expect_kv("xmin")?)?;
        number(&lines.expect_kv("xmax")?)?;
        let n_intervals = count(&lines.expect_kv("intervals: size")?)?;
        let mut intervals = Vec::new();
        for j in 1..=n_intervals {
            lines.expect_line(&format!("intervals [{j}]:"))?;
            let xmin = number(&lines.expect_kv("xmin")?)?;
            let xmax = number(&lines.expect_kv("xmax")?)?;
            let label = unquote(&lines.expect_kv("text")?)?;
            if xmax <= xmin {
                return Err(Error::NonmonotonicIntervals {
                    tier: name.clone(),
                    index: j - 1,
                    detail: format!("xmax {xmax} <= xmin {xmin}"),
                });
            }
            if label.trim().is_empty() {
                continue;
            }
            intervals.push(PhoneInterval {
                start: xmin,
                end: xmax,
                label: label.trim().to_string(),
            });
        }
        check_ordered(&name, &intervals)?;
        tiers.push(AnnotationTier {
            tier_name: name,
            stream: Stream::Lip,
            intervals,
        });
    }
    if let Some(extra) = lines.peek_nonempty() {
        return Err(malformed(format!(
            "declared {n_items} tiers but found trailing content '{extra}'"
        )));
    }
    Ok(tiers)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Renders tiers as a long-format TextGrid. Gaps between intervals are
/// filled with empty-text intervals, so [`parse_textgrid`] returns exactly
/// the labelled input intervals.
pub fn write_textgrid(tiers: &[AnnotationTier], xmin: f64, xmax: f64) -> String {
    let lo = tiers
        .iter()
        .flat_map(|t| t.intervals.first().map(|i| i.start))
        .fold(xmin, f64::min);
    let hi = tiers
        .iter()
        .flat_map(|t| t.intervals.last().map(|i| i.end))
        .fold(xmax, f64::max);

    let mut out = String::new();
    let _ = writeln!(out, "File type = \"ooTextFile\"");
    let _ = writeln!(out, "Object class = \"TextGrid\"");
    let _ = writeln!(out);
    let _ = writeln!(out, "xmin = {lo}");
    let _ = writeln!(out, "xmax = {hi}");
    let _ = writeln!(out, "tiers? <exists>");
    let _ = writeln!(out, "size = {}", tiers.len());
    let _ = writeln!(out, "item []:");
    for (k, tier) in tiers.iter().enumerate() {
        let mut cells: Vec<(f64, f64, &str)> = Vec::new();
        let mut cursor = lo;
        for iv in &tier.intervals {
            if iv.start > cursor {
                cells.push((cursor, iv.start, ""));
            }
            cells.push((iv.start, iv.end, &iv.label));
            cursor = iv.end;
        }
        if hi > cursor || cells.is_empty() {
            cells.push((cursor, hi, ""));
        }
        let _ = writeln!(out, "    item [{}]:", k + 1);
        let _ = writeln!(out, "        class = \"IntervalTier\"");
        let _ = writeln!(out, "        name = {}", quote(&tier.tier_name));
        let _ = writeln!(out, "        xmin = {lo}");
        let _ = writeln!(out, "        xmax = {hi}");
        let _ = writeln!(out, "        intervals: size = {}", cells.len());
        for (j, (s, e, text)) in cells.iter().enumerate() {
            let _ = writeln!(out, "        intervals [{}]:", j + 1);
            let _ = writeln!(out, "            xmin = {s}");
            let _ = writeln!(out, "            xmax = {e}");
            let _ = writeln!(out, "            text = {}", quote(text));
        }
    }
    out
}
