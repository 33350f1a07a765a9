use std::path::Path;

use fibrejoint::io::{self, RunConfig};
use fibrejoint::shape::{forward_kinematics, reconstruct_shape, ChainLink, JointChain, Pose2};
use fibrejoint::{fit_angle_model, predict_angle, Error, FiberSpec, ReflectorProfile, Sensor, SurfaceFinish};
use proptest::prelude::*;

const CONFIG: &str = r#"
[fibre]
diameter_mm = 0.9

[noise]
sigma_v = 0.0
adc_step_v = 0.0

[[profile]]
name = "A"
t_min_mm = 1.0
t_max_mm = 3.0
alpha_deg = 120.0

[[link]]
length_mm = 30.0
profile = "A"

[[link]]
length_mm = 20.0
profile = "A"
model = "a.toml"
"#;

#[test]
fn simulate_save_calibrate_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(CONFIG).unwrap();
    let profile = cfg.profile("A").unwrap();
    let sensor = cfg.sensor(profile).unwrap();
    let grid = cfg.angle_grid(profile, &sensor.mount).unwrap();

    // Zero-variance noise reproduces the clean pipeline exactly.
    let noisy = sensor.simulate(&grid.values(), cfg.noise.as_ref()).unwrap();
    let clean = sensor.simulate(&grid.values(), None).unwrap();
    assert_eq!(noisy.samples(), clean.samples());

    let csv = dir.path().join("a.csv");
    io::write_curve_csv(&clean, &csv).unwrap();
    let back = io::read_curve_csv(&csv).unwrap();
    assert_eq!(back, clean);

    let model = fit_angle_model(&back, 5).unwrap();
    io::save_model(&model, &dir.path().join("a.toml")).unwrap();
    let loaded = io::load_model(&dir.path().join("a.toml")).unwrap();
    assert_eq!(loaded, model);

    let worst = back
        .samples()
        .iter()
        .map(|s| (predict_angle(&loaded, s.voltage_v).unwrap() - s.angle_deg).abs())
        .fold(0.0, f64::max);
    assert!(worst <= model.rmse_deg() * (back.len() as f64).sqrt());

    // Second link loads the saved model, first one calibrates itself.
    let chain = cfg.build_chain(dir.path()).unwrap();
    assert_eq!(chain.links()[1].calibration, model);
    assert_eq!(chain.links()[0].calibration, model);
    let v = chain.sensor_voltages(&[30.0, 45.0], None).unwrap();
    let shape = reconstruct_shape(&chain, &v).unwrap();
    let exact = forward_kinematics(&chain, &[30.0, 45.0]).unwrap();
    assert!((shape.tip_pose.x - exact.tip_pose.x).hypot(shape.tip_pose.y - exact.tip_pose.y) < 0.05);
}

#[test]
fn missing_model_reports_link() {
    let cfg = RunConfig::parse(CONFIG).unwrap();
    let err = cfg.build_chain(Path::new("/nonexistent")).unwrap_err();
    assert!(matches!(err, Error::Link { index: 1, .. }), "{err}");
    assert_eq!(err.kind(), "io");
}

fn chain(n: usize) -> JointChain {
    let profile = ReflectorProfile::linear(1.0, 3.0, 120.0, SurfaceFinish::silver_tape()).unwrap();
    let sensor = Sensor::with_default_mount(FiberSpec::default(), profile).unwrap();
    let curve = sensor.simulate(&sensor.default_grid().values(), None).unwrap();
    let calibration = fit_angle_model(&curve, 5).unwrap();
    let links = (0..n)
        .map(|i| ChainLink {
            length_mm: 10.0 + 5.0 * i as f64,
            sensor: sensor.clone(),
            calibration: calibration.clone(),
        })
        .collect();
    JointChain::new(links, Pose2::ORIGIN).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heading_error_bounded_by_sum_of_joint_errors(angles in proptest::collection::vec(0.0f64..120.0, 1..5)) {
        let c = chain(angles.len());
        let v = c.sensor_voltages(&angles, None).unwrap();
        let est = reconstruct_shape(&c, &v).unwrap();
        let exact = forward_kinematics(&c, &angles).unwrap();
        let joint_err: f64 = est.angles.iter().zip(&angles).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!((est.tip_pose.heading_deg - exact.tip_pose.heading_deg).abs() <= joint_err + 1e-9);
        // Tip displacement is at most chain length times the largest heading error.
        let total: f64 = c.lengths().iter().sum();
        let tip = (est.tip_pose.x - exact.tip_pose.x).hypot(est.tip_pose.y - exact.tip_pose.y);
        prop_assert!(tip <= total * joint_err.to_radians() + 1e-9);
    }
}
