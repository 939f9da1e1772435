//! Renders every preset and summarizes its ground truth; writes one scene
//! to disk when given a directory.

use blindspot::frame::save_sequence;
use blindspot::synth::{preset, render_sequence, PRESET_NAMES};

fn main() {
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        let (seq, truth) = render_sequence(&spec).unwrap();
        let visible = truth.frames.iter().filter(|f| !f.objects.is_empty()).count();
        let ttc = truth.min_ttc.map_or("-".to_string(), |t| format!("{t:.1}"));
        println!("{name:22} {} frames, object visible in {visible:2}, min TTC {ttc}", seq.len());
    }
    if let Some(dir) = std::env::args().nth(1) {
        let spec = preset("approach").unwrap();
        let (seq, truth) = render_sequence(&spec).unwrap();
        save_sequence(std::path::Path::new(&dir), seq.frames()).unwrap();
        std::fs::write(std::path::Path::new(&dir).join("truth.jsonl"), truth.to_json_lines()).unwrap();
        println!("approach written to {dir}");
    }
}
