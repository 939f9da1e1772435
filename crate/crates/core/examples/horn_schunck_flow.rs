//! Dense flow between two shifted sinusoids, with the energy drop and an
//! angular histogram of the sampled vectors.

use std::f64::consts::PI;

use blindspot::classify::{classify_all, rose_histogram, sample_vectors, ClassifyParams};
use blindspot::flow::{estimate_derivatives, flow_energy, solve_horn_schunck_detailed, FlowField, SolverParams};
use blindspot::Frame;

fn pattern(shift: f64) -> Frame {
    Frame::from_fn(64, 64, |x, y| {
        let x = x as f64 - shift;
        0.5 + 0.25 * (2.0 * PI * x / 8.0).sin() + 0.2 * (2.0 * PI * y as f64 / 8.0).sin()
    })
}

fn main() {
    let (a, b) = (pattern(0.0), pattern(1.0));
    let params = SolverParams::default();
    let sol = solve_horn_schunck_detailed(&a, &b, &params).expect("same-size frames");
    let (mu, mv) = sol.flow.interior_mean(8);
    println!("{} iterations, last mean update {:.2e}", sol.iterations, sol.last_update);
    println!("mean interior flow: u = {mu:.3}, v = {mv:.3}");

    let d = estimate_derivatives(&a, &b).unwrap();
    let e = flow_energy(&sol.flow, &d, params.alpha).unwrap();
    let e0 = flow_energy(&FlowField::zeros(64, 64), &d, params.alpha).unwrap();
    println!("energy {e:.4} (zero field {e0:.4})");

    let samples = sample_vectors(&sol.flow, 8).unwrap();
    let classified = classify_all(&samples, &ClassifyParams::default());
    let rose = rose_histogram(&classified, 8).unwrap();
    print!("{}", rose.to_csv());
}
