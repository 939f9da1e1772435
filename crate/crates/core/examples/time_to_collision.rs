//! Focus of expansion, per-column time to collision and the heading
//! recommendation on an analytic expansion field.

use blindspot::flow::FlowField;
use blindspot::ttc::{analyze, TtcParams};

fn main() {
    // expansion about (60, 40) at 1/30 per frame, plus a slower left half
    let field = FlowField::from_fn(160, 90, |x, y| {
        let k = if x < 80 { 1.0 / 45.0 } else { 1.0 / 30.0 };
        (k * (x as f64 - 60.0), k * (y as f64 - 40.0))
    });
    let (foe, profile, heading) = analyze(&field, &TtcParams::default()).expect("expanding field");
    println!("FOE ({:.2}, {:.2}) residual {:.3}", foe.x, foe.y, foe.residual);
    print!("{}", profile.to_csv());
    println!("min TTC {:.2} frames, heading {:+.3} rad", profile.min(), heading.angle);
}
