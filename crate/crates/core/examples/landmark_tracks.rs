//! Read a landmark track, sample it between frames and measure the hand
//! distance caused by a timing error.
//!
//! ```bash
//! cargo run --example landmark_tracks
//! ```

use cuesync::annot_io::{read_landmarks, write_landmarks, Sampling};
use cuesync::evaluate::{mhcd, to_polar};

fn main() -> cuesync::Result<()> {
    // hand moves right at 100 px/s, sampled at 10 fps
    let mut csv = String::from("# constant velocity\ntime_s,lip_x,lip_y,hand_x,hand_y,shape\n");
    for k in 0..=20 {
        let t = k as f64 / 10.0;
        csv.push_str(&format!("{t},320,240,{},300,1\n", 400.0 + 100.0 * t));
    }
    let track = read_landmarks(&csv)?;
    println!("{} frames at {} fps, {}..{} s", track.frames.len(), track.fps, track.start(), track.end());

    for sampling in [Sampling::Nearest, Sampling::Linear] {
        let (lip, hand) = track.sample(0.73, sampling)?;
        let (r, theta) = to_polar(hand, lip);
        println!("{sampling:?} at 0.73 s: hand ({:.1}, {:.1}), r {r:.1} px, theta {theta:+.3} rad", hand.x, hand.y);
    }

    let truth = [0.5, 1.0, 1.5];
    let late = [0.6, 1.1, 1.6];
    println!("mean hand distance for a 0.1 s error: {:.2} px", mhcd(&track, &truth, &late, Sampling::Nearest)?);
    println!("round trip identical: {}", read_landmarks(&write_landmarks(&track))? == track);
    Ok(())
}
