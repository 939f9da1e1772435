//! Full run on a preset with depth: flow, wheel fallback, lane alerts and
//! TTC fused into one record per processed frame.

use blindspot::synth::{preset, render_depth_sequence, render_sequence};
use blindspot::{run, PipelineConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "approach".into());
    let spec = preset(&name).unwrap_or_else(|e| panic!("{e}"));
    let (seq, _) = render_sequence(&spec).unwrap();
    let depth = render_depth_sequence(&spec).unwrap();
    let cfg = PipelineConfig { canonical_log: true, ..PipelineConfig::default() };
    let out = run(&seq, Some(&depth), &cfg).unwrap();
    print!("{}", out.json_lines());
    eprintln!("{}", serde_json::to_string_pretty(&out.report).unwrap());
}
