//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::flow::{estimate_derivatives, flow_energy, solve_horn_schunck_detailed, FlowField};
use crate::frame::{
    load_depth_pgm, load_depth_sequence, load_pgm, load_sequence, save_depth_sequence, save_sequence,
    DEFAULT_FRAME_PERIOD,
};
use crate::pipeline::{flow_pair, run};
use crate::stereo::{classify_alert, compute_disparity};
use crate::synth::{preset, render_depth_sequence, render_sequence, SceneSpec, PRESET_NAMES};
use crate::ttc::analyze;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "blindspot", version, about = "Blind-spot motion detection toolkit")]
struct Cli {
    /// TOML file overriding the default pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Horn-Schunck flow between two PGM frames.
    Flow(FlowArgs),
    /// Run the detection pipeline over a directory of frames.
    Detect(DetectArgs),
    /// Lane alert from a stereo pair or from depth maps.
    Stereo(StereoArgs),
    /// Time-to-collision profile and heading for one frame of a sequence.
    Ttc(TtcArgs),
    /// Render a synthetic scene with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct FlowArgs {
    first: PathBuf,
    second: PathBuf,
    /// Binary flow dump destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Directory of frame_NNNNNN.pgm files.
    dir: PathBuf,
    /// Directory of depth_NNNNNN.pgm files; defaults to the frame directory.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// JSON-lines output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run summary as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write overlay_NNNNNN.ppm files here.
    #[arg(long)]
    overlay_dir: Option<PathBuf>,
    #[arg(long)]
    frame_skip: Option<usize>,
    /// Omit timing fields.
    #[arg(long)]
    canonical: bool,
    /// Ignore depth maps even when present.
    #[arg(long)]
    no_stereo: bool,
}

#[derive(Debug, Args)]
struct StereoArgs {
    #[arg(long, requires = "right", conflicts_with = "depth")]
    left: Option<PathBuf>,
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    /// A 16-bit depth PGM or a directory of depth_NNNNNN.pgm files.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Write the computed depth map (stereo pair input only).
    #[arg(long)]
    depth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TtcArgs {
    dir: PathBuf,
    /// Frame index; flow uses this frame and the next.
    #[arg(long, default_value_t = 0)]
    frame: usize,
    /// Profile CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, conflicts_with = "spec", required_unless_present_any = ["spec", "list"])]
    preset: Option<String>,
    /// Scene description in TOML.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "list")]
    out: Option<PathBuf>,
    /// Override the frame count.
    #[arg(long)]
    frames: Option<usize>,
    /// Skip depth map output.
    #[arg(long)]
    no_depth: bool,
    /// Print preset names and exit.
    #[arg(long)]
    list: bool,
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn data<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure { code: EXIT_DATA, message: format!("{context}: {e}") }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, message }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(data(&path.display().to_string()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(data(&parent.display().to_string()))?;
    }
    fs::write(path, bytes).map_err(data(&path.display().to_string()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(data("stdout"))
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(data(&p.display().to_string()))?;
            PipelineConfig::from_toml(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn cmd_flow(args: &FlowArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let a = load_pgm(&read(&args.first)?).map_err(data(&args.first.display().to_string()))?;
    let b = load_pgm(&read(&args.second)?).map_err(data(&args.second.display().to_string()))?;
    let sol = solve_horn_schunck_detailed(&a, &b, &cfg.solver).map_err(data("flow"))?;
    let d = estimate_derivatives(&a, &b).map_err(data("flow"))?;
    let (w, h) = a.dimensions();
    let energy = flow_energy(&sol.flow, &d, cfg.solver.alpha).map_err(data("energy"))?;
    let zero = flow_energy(&FlowField::zeros(w, h), &d, cfg.solver.alpha).map_err(data("energy"))?;
    if let Some(out) = &args.out {
        write(out, &sol.flow.to_dump())?;
    }
    let (mu, mv) = sol.flow.interior_mean(0);
    let summary = serde_json::json!({
        "width": w,
        "height": h,
        "iterations": sol.iterations,
        "energy": energy,
        "zero_field_energy": zero,
        "mean_u": mu,
        "mean_v": mv,
        "zero_flow": sol.flow.is_zero(),
    });
    emit(None, &format!("{summary}\n"))
}

fn cmd_detect(args: &DetectArgs, mut cfg: PipelineConfig) -> Result<(), Failure> {
    if let Some(k) = args.frame_skip {
        cfg.frame_skip = k;
    }
    cfg.canonical_log |= args.canonical;
    cfg.overlay |= args.overlay_dir.is_some();
    cfg.validate().map_err(usage)?;
    let seq = load_sequence(&args.dir, DEFAULT_FRAME_PERIOD).map_err(data(&args.dir.display().to_string()))?;
    let depth = if args.no_stereo {
        Vec::new()
    } else {
        let dir = args.depth.as_ref().unwrap_or(&args.dir);
        load_depth_sequence(dir).map_err(data(&dir.display().to_string()))?
    };
    let out = run(&seq, (!depth.is_empty()).then_some(&depth[..]), &cfg).map_err(data("detect"))?;
    emit(args.out.as_deref(), &out.json_lines())?;
    if let Some(dir) = &args.overlay_dir {
        for (i, img) in &out.overlays {
            write(&dir.join(format!("overlay_{i:06}.ppm")), &img.to_ppm())?;
        }
    }
    let report = serde_json::to_string_pretty(&out.report).expect("report serializes");
    match &args.report {
        Some(p) => write(p, format!("{report}\n").as_bytes())?,
        None => eprintln!(
            "{} frames, {} processed, {} boxes, red {} yellow {} green {}",
            out.report.frames_total,
            out.report.frames_processed,
            out.report.boxes_emitted,
            out.report.alerts.red,
            out.report.alerts.yellow,
            out.report.alerts.green
        ),
    }
    Ok(())
}

fn cmd_stereo(args: &StereoArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let maps = match (&args.left, &args.right, &args.depth) {
        (Some(l), Some(r), None) => {
            let left = load_pgm(&read(l)?).map_err(data(&l.display().to_string()))?;
            let right = load_pgm(&read(r)?).map_err(data(&r.display().to_string()))?;
            let d = compute_disparity(&left, &right, &cfg.stereo).map_err(data("stereo"))?;
            if let Some(p) = &args.depth_out {
                write(p, &crate::frame::save_depth_pgm(&d))?;
            }
            vec![d]
        }
        (None, None, Some(p)) if p.is_dir() => {
            let maps = load_depth_sequence(p).map_err(data(&p.display().to_string()))?;
            if maps.is_empty() {
                return Err(Failure { code: EXIT_DATA, message: format!("{}: no depth frames", p.display()) });
            }
            maps
        }
        (None, None, Some(p)) => vec![load_depth_pgm(&read(p)?).map_err(data(&p.display().to_string()))?],
        _ => return Err(usage("stereo needs --left and --right, or --depth".into())),
    };
    let mut text = String::new();
    for (i, d) in maps.iter().enumerate() {
        let (level, counts) = classify_alert(d, &cfg.bands, &cfg.stereo);
        let line = serde_json::json!({ "frame_index": i, "level": level, "band_counts": counts });
        text.push_str(&format!("{line}\n"));
    }
    emit(None, &text)
}

fn cmd_ttc(args: &TtcArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let seq = load_sequence(&args.dir, DEFAULT_FRAME_PERIOD).map_err(data(&args.dir.display().to_string()))?;
    if args.frame >= seq.len() {
        return Err(usage(format!("--frame {} is past the last frame {}", args.frame, seq.len() - 1)));
    }
    let (a, b) = flow_pair(args.frame, seq.len());
    let flow = crate::flow::solve_horn_schunck(&seq.frames()[a], &seq.frames()[b], &cfg.solver).map_err(data("flow"))?;
    let (foe, profile, heading) = analyze(&flow, &cfg.ttc).map_err(data("ttc"))?;
    emit(args.out.as_deref(), &profile.to_csv())?;
    let min = profile.min();
    let summary = serde_json::json!({
        "frame_index": args.frame,
        "foe": [foe.x, foe.y],
        "foe_residual": foe.residual,
        "min_ttc_frames": if min.is_finite() { serde_json::json!(min) } else { serde_json::json!("inf") },
        "heading_rad": heading.angle,
    });
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    if args.list {
        for name in PRESET_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let mut spec = match (&args.preset, &args.spec) {
        (Some(name), _) => preset(name).map_err(|e| usage(e.to_string()))?,
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(data(&p.display().to_string()))?;
            SceneSpec::from_toml(&text).map_err(data(&p.display().to_string()))?
        }
        (None, None) => return Err(usage("synth needs --preset or --spec".into())),
    };
    if let Some(n) = args.frames {
        spec.n_frames = n;
    }
    let out = args.out.as_ref().expect("clap requires --out");
    let (seq, truth) = render_sequence(&spec).map_err(data("synth"))?;
    save_sequence(out, seq.frames()).map_err(data(&out.display().to_string()))?;
    if !args.no_depth {
        let depth = render_depth_sequence(&spec).map_err(data("synth"))?;
        save_depth_sequence(out, &depth).map_err(data(&out.display().to_string()))?;
    }
    write(&out.join("truth.jsonl"), truth.to_json_lines().as_bytes())?;
    write(&out.join("scene.toml"), spec.to_toml().as_bytes())?;
    Ok(())
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = load_config(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Flow(a) => cmd_flow(a, &cfg),
        Command::Detect(a) => cmd_detect(a, cfg),
        Command::Stereo(a) => cmd_stereo(a, &cfg),
        Command::Ttc(a) => cmd_ttc(a, &cfg),
        Command::Synth(a) => cmd_synth(a),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
