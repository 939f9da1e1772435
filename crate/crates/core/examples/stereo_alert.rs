//! Lane alerts from depth: block-matched disparity on a shifted pair, then
//! the three-lane classification on a rendered multi-lane scene.

use blindspot::frame::Frame;
use blindspot::stereo::{classify_alert, compute_disparity, LaneBands, StereoParams};
use blindspot::synth::{preset, render_depth_sequence};

fn main() {
    let p = StereoParams::default();
    let left = Frame::from_fn(96, 64, |x, y| ((x * 37 + y * 91) % 17) as f64 / 16.0);
    let right = Frame::from_fn(96, 64, |x, y| left.get_clamped(x as isize + 6, y as isize));
    let d = compute_disparity(&left, &right, &p).unwrap();
    println!("proxy at center: {:.3} (expected {:.3})", d.get(48, 32), 1.0 - 6.0 / p.max_disparity as f64);

    let spec = preset("multi_lane").unwrap();
    let depth = render_depth_sequence(&spec).unwrap();
    let bands = LaneBands::default();
    for (i, map) in depth.iter().enumerate().step_by(10) {
        let (level, counts) = classify_alert(map, &bands, &p);
        println!("frame {i:2}: {:6} lanes {counts:?}", level.name());
    }
}
