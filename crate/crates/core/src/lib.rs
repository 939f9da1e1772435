//! Blind-spot motion detection from monocular video and optional depth.
//!
//! Dense Horn-Schunck flow feeds a box-capture tracker; a circle Hough
//! transform finds wheels when the flow path sees nothing; depth maps give
//! a three-level lane alert; the flow field also yields time to collision.
//! [`synth`] renders scenes with ground truth for all of the above.

pub mod classify;
pub mod cli;
pub mod config;
pub mod flow;
pub mod frame;
pub mod overlay;
pub mod pipeline;
pub mod shape;
pub mod stereo;
pub mod synth;
pub mod track;
pub mod ttc;

pub use classify::{ClassifyParams, FlowVectorSample, VectorClass};
pub use config::{PipelineConfig, ShapeMode};
pub use flow::{solve_horn_schunck, FlowField, SolverParams};
pub use frame::{DepthFrame, Frame, FrameSequence};
pub use pipeline::{run, run_detection, DetectionRecord, RunReport};
pub use stereo::AlertLevel;
pub use track::{Box, TrackParams, TrackState};
