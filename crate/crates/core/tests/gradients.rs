use celebprof_core::neural::gradcheck::{check_all, check_model_loss, check_op, OPS};
use celebprof_core::neural::{gradient_check, relative_error, Architecture};

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

#[test]
fn relative_error_uses_floor() {
    assert_eq!(relative_error(0.0, 0.0), 0.0);
    assert!((relative_error(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-12);
}

#[test]
fn checker_catches_a_wrong_gradient() {
    // f(x) = x0^2 + 3 x1 with a deliberately wrong d/dx1
    let f = |x: &[f64]| Ok((x[0] * x[0] + 3.0 * x[1], vec![2.0 * x[0], 2.0]));
    let err = gradient_check(&[0.7, -1.2], EPS, f).unwrap();
    assert!(err > 0.3, "{err}");
    let g = |x: &[f64]| Ok((x[0] * x[0] + 3.0 * x[1], vec![2.0 * x[0], 3.0]));
    assert!(gradient_check(&[0.7, -1.2], EPS, g).unwrap() < 1e-8);
}

#[test]
fn every_op_matches_central_differences() {
    for (name, shapes, build) in OPS {
        let err = check_op(shapes, build, 10, EPS).unwrap();
        assert!(err < TOL, "{name}: relative error {err}");
    }
}

#[test]
fn cnn_loss_gradients() {
    for seed in 0..3 {
        let err = check_model_loss(Architecture::Cnn, seed, EPS).unwrap();
        assert!(err < TOL, "seed {seed}: relative error {err}");
    }
}

#[test]
fn lstm_loss_gradients() {
    for seed in 0..3 {
        let err = check_model_loss(Architecture::Lstm, seed, EPS).unwrap();
        assert!(err < TOL, "seed {seed}: relative error {err}");
    }
}

#[test]
fn suite_covers_ops_and_models() {
    let names: Vec<String> = check_all(1, 1, EPS).unwrap().into_iter().map(|c| c.name).collect();
    assert_eq!(names.len(), OPS.len() + 2);
    assert!(names.contains(&"cnn loss".to_string()) && names.contains(&"lstm loss".to_string()));
}
