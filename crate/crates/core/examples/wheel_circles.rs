//! A car holding speed beside us produces no relative flow; its wheels
//! still show up as circles.

use blindspot::shape::{default_region_mask, detect_edges, hits_to_csv, hough_circles, static_object_alert, HoughParams};
use blindspot::synth::{preset, render_sequence};

fn main() {
    let spec = preset("zero_relative_hold").unwrap();
    let (seq, truth) = render_sequence(&spec).unwrap();
    let frame = &seq.frames()[10];
    let p = HoughParams::default();
    let edges = detect_edges(frame, &p);
    let mask = default_region_mask(frame.width(), frame.height(), 0.2);
    let hits = hough_circles(&edges, &p, &mask);
    println!("{} edge pixels", edges.count());
    print!("{}", hits_to_csv(&hits));
    for w in &truth.frames[10].objects[0].wheels {
        println!("true wheel at ({:.1}, {:.1}) r {:.1}", w.cx, w.cy, w.r);
    }
    println!("vehicle present: {}", static_object_alert(&hits));
}
