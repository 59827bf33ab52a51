//! Per-frame lip-center and hand-point tracks (`time_s,lip_x,lip_y,hand_x,hand_y[,shape]`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, w: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * w, self.y + (other.y - self.y) * w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub lip_center: Point,
    pub hand_point: Point,
    pub hand_shape: Option<u8>,
}

/// How a track is read at an arbitrary instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Nearest,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandTrack {
    pub fps: f64,
    pub frames: Vec<Frame>,
}

impl HandTrack {
    /// Validates frame ordering and spacing, inferring fps from the median gap.
    pub fn from_frames(frames: Vec<Frame>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::MalformedFile(format!(
                "track needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        for (k, w) in frames.windows(2).enumerate() {
            if !(w[1].time > w[0].time) {
                return Err(Error::NonmonotonicTime {
                    row: k + 1,
                    time: w[1].time,
                    previous: w[0].time,
                });
            }
        }
        let mut gaps: Vec<f64> = frames.windows(2).map(|w| w[1].time - w[0].time).collect();
        gaps.sort_by(f64::total_cmp);
        let m = gaps.len();
        let median = if m % 2 == 1 {
            gaps[m / 2]
        } else {
            0.5 * (gaps[m / 2 - 1] + gaps[m / 2])
        };
        if gaps[0] < 0.9 * median || gaps[m - 1] > 1.1 * median {
            return Err(Error::MalformedFile(format!(
                "irregular frame spacing: gaps range over [{}, {}] s around median {median} s",
                gaps[0],
                gaps[m - 1]
            )));
        }
        Ok(HandTrack {
            fps: 1.0 / median,
            frames,
        })
    }

    pub fn start(&self) -> f64 {
        self.frames[0].time
    }

    pub fn end(&self) -> f64 {
        self.frames[self.frames.len() - 1].time
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if t.is_finite() && t >= self.start() && t <= self.end() {
            Ok(())
        } else {
            Err(Error::InstantOutOfRange {
                instant: t,
                start: self.start(),
                end: self.end(),
            })
        }
    }

    /// Index of the frame closest to `t`; ties go to the earlier frame.
    pub fn nearest_index(&self, t: f64) -> Result<usize> {
        self.check_range(t)?;
        let after = self.frames.partition_point(|f| f.time < t);
        if after == 0 {
            return Ok(0);
        }
        if after == self.frames.len() {
            return Ok(after - 1);
        }
        let before = after - 1;
        if t - self.frames[before].time <= self.frames[after].time - t {
            Ok(before)
        } else {
            Ok(after)
        }
    }

    /// Returns `(lip_center, hand_point)` at `t`.
    pub fn sample(&self, t: f64, sampling: Sampling) -> Result<(Point, Point)> {
        match sampling {
            Sampling::Nearest => {
                let f = &self.frames[self.nearest_index(t)?];
                Ok((f.lip_center, f.hand_point))
            }
            Sampling::Linear => {
                self.check_range(t)?;
                let after = self.frames.partition_point(|f| f.time < t);
                if after == 0 {
                    let f = &self.frames[0];
                    return Ok((f.lip_center, f.hand_point));
                }
                let (a, b) = (&self.frames[after - 1], &self.frames[after]);
                let w = (t - a.time) / (b.time - a.time);
                Ok((a.lip_center.lerp(b.lip_center, w), a.hand_point.lerp(b.hand_point, w)))
            }
        }
    }
}

/// Reads a landmark CSV. Lines starting with `#` are metadata and skipped.
pub fn read_landmarks(csv_text: &str) -> Result<HandTrack> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedFile(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = ["time_s", "lip_x", "lip_y", "hand_x", "hand_y"];
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(required) {
        *slot = col(name).ok_or_else(|| Error::MalformedFile(format!("missing column '{name}'")))?;
    }
    let shape_col = col("shape");

    let mut frames = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedFile(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                Error::MalformedFile(format!("row {}: '{field}' is not a number", row + 1))
            })
        };
        let hand_shape = match shape_col.and_then(|i| record.get(i)) {
            None | Some("") => None,
            Some(s) => {
                let v: u8 = s
                    .parse()
                    .map_err(|_| Error::MalformedFile(format!("row {}: bad shape '{s}'", row + 1)))?;
                if !(1..=8).contains(&v) {
                    return Err(Error::MalformedFile(format!(
                        "row {}: hand shape {v} outside 1..8",
                        row + 1
                    )));
                }
                Some(v)
            }
        };
        frames.push(Frame {
            time: num(idx[0])?,
            lip_center: Point::new(num(idx[1])?, num(idx[2])?),
            hand_point: Point::new(num(idx[3])?, num(idx[4])?),
            hand_shape,
        });
    }
    HandTrack::from_frames(frames)
}

/// Renders a track as CSV; the `shape` column is written only when some
/// frame carries a hand shape.
pub fn write_landmarks(track: &HandTrack) -> String {
    let with_shape = track.frames.iter().any(|f| f.hand_shape.is_some());
    let mut out = String::from("time_s,lip_x,lip_y,hand_x,hand_y");
    out.push_str(if with_shape { ",shape\n" } else { "\n" });
    for f in &track.frames {
        out.push_str(&format!(
            "{},{},{},{},{}",
            f.time, f.lip_center.x, f.lip_center.y, f.hand_point.x, f.hand_point.y
        ));
        if with_shape {
            out.push(',');
            if let Some(s) = f.hand_shape {
                out.push_str(&s.to_string());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_at(fps: f64, n: usize) -> String {
        let mut s = String::from("time_s,lip_x,lip_y,hand_x,hand_y\n");
        for k in 0..n {
            s.push_str(&format!("{},320,240,{},100\n", k as f64 / fps, k));
        }
        s
    }

    #[test]
    fn infers_fps() {
        let t = read_landmarks(&csv_at(30.0, 30)).unwrap();
        assert!((t.fps - 30.0).abs() / 30.0 < 0.01);
        assert_eq!(t.frames.len(), 30);
    }

    #[test]
    fn backwards_time_rejected() {
        let text = "time_s,lip_x,lip_y,hand_x,hand_y\n0.0,0,0,0,0\n0.0333,0,0,0,0\n0.02,0,0,0,0\n";
        assert!(matches!(read_landmarks(text), Err(Error::NonmonotonicTime { row: 2, .. })));
    }

    #[test]
    fn missing_column_and_bad_numbers() {
        assert!(matches!(read_landmarks("time_s,lip_x\n0,0\n"), Err(Error::MalformedFile(_))));
        let text = "time_s,lip_x,lip_y,hand_x,hand_y\n0.0,a,0,0,0\n0.1,0,0,0,0\n";
        assert!(matches!(read_landmarks(text), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn shape_column_and_comments() {
        let text = "# config_hash=abc\ntime_s,lip_x,lip_y,hand_x,hand_y,shape\n0,1,2,3,4,5\n0.5,1,2,3,4,\n1.0,1,2,3,4,3\n";
        let t = read_landmarks(text).unwrap();
        assert_eq!(t.frames[0].hand_shape, Some(5));
        assert_eq!(t.frames[1].hand_shape, None);
        assert_eq!(read_landmarks(&write_landmarks(&t)).unwrap(), t);
    }

    #[test]
    fn nearest_and_linear_sampling() {
        let t = read_landmarks(&csv_at(10.0, 11)).unwrap();
        assert_eq!(t.sample(0.26, Sampling::Nearest).unwrap().1.x, 3.0);
        assert_eq!(t.sample(0.24, Sampling::Nearest).unwrap().1.x, 2.0);
        let lin = t.sample(0.25, Sampling::Linear).unwrap().1.x;
        assert!((lin - 2.5).abs() < 1e-12);
        assert!(matches!(t.sample(1.5, Sampling::Nearest), Err(Error::InstantOutOfRange { .. })));
        assert!(matches!(t.sample(-0.1, Sampling::Linear), Err(Error::InstantOutOfRange { .. })));
    }
}
