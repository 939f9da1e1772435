use proptest::prelude::*;

use blindspot::classify::{class_counts, classify_all, rose_histogram, ClassifyParams, FlowVectorSample};
use blindspot::frame::{load_pgm, save_pgm, Frame};
use blindspot::solve_horn_schunck;
use blindspot::stereo::{component_areas, BinaryMask, Connectivity};
use blindspot::track::{Box, Viewport};
use blindspot::ttc::{estimate_foe_from_samples, heading_angle, TtcProfile};
use blindspot::SolverParams;

fn frame_strategy() -> impl Strategy<Value = Frame> {
    (4usize..20, 4usize..20).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |d| Frame::new(w, h, d).unwrap())
    })
}

fn samples_strategy() -> impl Strategy<Value = Vec<FlowVectorSample>> {
    prop::collection::vec((0.0f64..100.0, 0.0f64..100.0, -3.0f64..3.0, -3.0f64..3.0), 0..80)
        .prop_map(|v| v.into_iter().map(|(x, y, u, w)| FlowVectorSample::new(x, y, u, w)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identical_frames_never_move(f in frame_strategy()) {
        let flow = solve_horn_schunck(&f, &f, &SolverParams { max_iters: 20, ..SolverParams::default() }).unwrap();
        prop_assert!(flow.is_zero());
    }

    #[test]
    fn pgm_round_trip_is_quantization(f in frame_strategy()) {
        let back = load_pgm(&save_pgm(&f)).unwrap();
        prop_assert_eq!(back.dimensions(), f.dimensions());
        for (a, b) in f.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
        prop_assert_eq!(save_pgm(&back), save_pgm(&f));
    }

    #[test]
    fn every_sample_gets_one_class(s in samples_strategy(), bins in 4usize..40) {
        let c = classify_all(&s, &ClassifyParams::default());
        let counts = class_counts(&c);
        prop_assert_eq!(counts.object + counts.background + counts.stationary, s.len());
        let rose = rose_histogram(&c, bins).unwrap();
        prop_assert_eq!(rose.object_counts.iter().sum::<usize>(), counts.object);
        prop_assert_eq!(rose.background_counts.iter().sum::<usize>(), counts.background);
    }

    #[test]
    fn mirroring_swaps_object_side(s in samples_strategy()) {
        let p = ClassifyParams::default();
        let flipped: Vec<FlowVectorSample> = s.iter().map(|v| FlowVectorSample::new(v.x, v.y, -v.u, v.v)).collect();
        let a = class_counts(&classify_all(&s, &p));
        let b = class_counts(&classify_all(&flipped, &p.mirrored()));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn clipped_boxes_stay_inside(cx in -50.0f64..400.0, cy in -50.0f64..300.0, hw in 1.0f64..200.0, hh in 1.0f64..200.0) {
        let view = Viewport::new(320, 240);
        let b = Box { cx, cy, half_w: hw, half_h: hh }.clipped(&view);
        prop_assert!(b.x_min() >= -1e-9 && b.y_min() >= -1e-9);
        prop_assert!(b.x_max() <= 319.0 + 1e-9 && b.y_max() <= 239.0 + 1e-9);
    }

    #[test]
    fn component_areas_partition_the_mask(bits in prop::collection::vec(any::<bool>(), 12 * 9)) {
        let mask = BinaryMask::from_fn(12, 9, |x, y| bits[y * 12 + x]);
        let four = component_areas(&mask, Connectivity::Four);
        let eight = component_areas(&mask, Connectivity::Eight);
        prop_assert_eq!(four.iter().sum::<usize>(), mask.count());
        prop_assert_eq!(eight.iter().sum::<usize>(), mask.count());
        prop_assert!(eight.len() <= four.len());
    }

    #[test]
    fn foe_moves_with_the_field(fx in 10.0f64..70.0, fy in 10.0f64..50.0, k in 0.02f64..0.2, dx in -30.0f64..30.0, dy in -30.0f64..30.0) {
        let field: Vec<FlowVectorSample> = (0..80).step_by(4)
            .flat_map(|x| (0..60).step_by(4).map(move |y| (x as f64, y as f64)))
            .map(|(x, y)| FlowVectorSample::new(x, y, k * (x - fx), k * (y - fy)))
            .collect();
        let moved: Vec<FlowVectorSample> = field.iter().map(|s| FlowVectorSample::new(s.x + dx, s.y + dy, s.u, s.v)).collect();
        let a = estimate_foe_from_samples(&field, 0.0).unwrap();
        let b = estimate_foe_from_samples(&moved, 0.0).unwrap();
        prop_assert!((a.x - fx).abs() < 1e-6 && (a.y - fy).abs() < 1e-6);
        prop_assert!((b.x - a.x - dx).abs() < 1e-6 && (b.y - a.y - dy).abs() < 1e-6);
    }

    #[test]
    fn heading_ignores_scale(values in prop::collection::vec(prop_oneof![1.0f64..100.0, Just(f64::INFINITY)], 1..24), c in 0.1f64..10.0) {
        let p = TtcProfile { column_width: 8, values: values.clone() };
        let q = TtcProfile { column_width: 8, values: values.iter().map(|v| v * c).collect() };
        let (a, b) = (heading_angle(&p, 0.35).angle, heading_angle(&q, 0.35).angle);
        prop_assert_eq!(a, b);
        prop_assert!(a.abs() <= 0.35);
    }
}
