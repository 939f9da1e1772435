//! Tracks a vehicle closing in from the rear with the flow path alone and
//! compares each box against the scene's ground truth.

use blindspot::config::ShapeMode;
use blindspot::synth::{preset, render_sequence};
use blindspot::{run, PipelineConfig};

fn main() {
    let spec = preset("approach").unwrap();
    let (seq, truth) = render_sequence(&spec).unwrap();
    let cfg = PipelineConfig { frame_skip: 2, shape_mode: ShapeMode::Off, ..PipelineConfig::default() };
    let out = run(&seq, None, &cfg).unwrap();
    for r in &out.records {
        let f = r.flow.as_ref().unwrap();
        let gt = &truth.frames[r.frame_index].objects[0];
        match f.emitted {
            Some(b) => println!(
                "frame {:2}: ratio {:.3}  box ({:.0}, {:.0}) side {:.0}  IoU {:.2}",
                r.frame_index,
                f.ratio,
                b.cx,
                b.cy,
                b.side(),
                b.iou(&gt.bbox)
            ),
            None => println!(
                "frame {:2}: ratio {:.3}  rejected by {}",
                r.frame_index,
                f.ratio,
                f.rejected_by.map_or("-", |g| g.name())
            ),
        }
    }
    println!("{} boxes in {:.1}s", out.report.boxes_emitted, out.report.elapsed_s);
}
