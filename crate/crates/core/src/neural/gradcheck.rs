//! Central-difference gradient verification.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{Architecture, AutogradError, Graph, NeuralConfig, NeuralError, NeuralModel, TokenIndex, Var};
use crate::rng;

/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Largest relative error between the analytic gradient returned by `f` at
/// `point` and central differences `(f(x + eps) - f(x - eps)) / (2 eps)`,
/// taken over the coordinates in `indices` (all coordinates when `None`).
pub fn gradient_check_at<F>(point: &[f64], eps: f64, indices: Option<&[usize]>, mut f: F) -> Result<f64, AutogradError>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), AutogradError>,
{
    let (loss, analytic) = f(point)?;
    if !loss.is_finite() {
        return Err(AutogradError::NonFinite);
    }
    let all: Vec<usize>;
    let coords = match indices {
        Some(ix) => ix,
        None => {
            all = (0..point.len()).collect();
            &all
        }
    };
    let mut x = point.to_vec();
    let mut worst: f64 = 0.0;
    for &i in coords {
        let original = x[i];
        x[i] = original + eps;
        let plus = f(&x)?.0;
        x[i] = original - eps;
        let minus = f(&x)?.0;
        x[i] = original;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(AutogradError::NonFinite);
        }
        worst = worst.max(relative_error(analytic[i], (plus - minus) / (2.0 * eps)));
    }
    Ok(worst)
}

/// [`gradient_check_at`] over every coordinate.
pub fn gradient_check<F>(point: &[f64], eps: f64, f: F) -> Result<f64, AutogradError>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), AutogradError>,
{
    gradient_check_at(point, eps, None, f)
}

/// Worst relative error of one checked op or model.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_relative_error: f64,
}

fn random_values(rng: &mut rng::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Sums `out` against fixed weights so every output coordinate matters.
fn weighted_sum(g: &mut Graph<'_>, out: Var, weights: &[f64]) -> Result<Var, AutogradError> {
    let (r, c) = g.shape(out);
    let w = g.constant(r, c, weights[..r * c].to_vec())?;
    let prod = g.mul(out, w)?;
    let ones_r = g.constant(1, r, vec![1.0; r])?;
    let rows = g.matmul(ones_r, prod)?;
    let ones_c = g.constant(c, 1, vec![1.0; c])?;
    g.matmul(rows, ones_c)
}

type OpBuilder = fn(&mut Graph<'_>, &[Var]) -> Result<Var, AutogradError>;
type OpCase = (&'static str, &'static [(usize, usize)], OpBuilder);
type Batch = Vec<(Vec<usize>, usize)>;

/// Every differentiable op with the shapes of its tracked inputs.
pub const OPS: [OpCase; 14] = [
    ("matmul", &[(3, 4), (4, 2)], |g, v| g.matmul(v[0], v[1])),
    ("add", &[(2, 3), (2, 3)], |g, v| g.add(v[0], v[1])),
    ("mul", &[(2, 3), (2, 3)], |g, v| g.mul(v[0], v[1])),
    ("add_bias", &[(3, 4), (1, 4)], |g, v| g.add_bias(v[0], v[1])),
    ("sigmoid", &[(2, 5)], |g, v| Ok(g.sigmoid(v[0]))),
    ("tanh", &[(2, 5)], |g, v| Ok(g.tanh(v[0]))),
    ("relu", &[(2, 5)], |g, v| Ok(g.relu(v[0]))),
    ("conv1d", &[(6, 2), (6, 3)], |g, v| g.conv1d(v[0], v[1], 3)),
    ("max_pool_time", &[(5, 3)], |g, v| g.max_pool_time(v[0])),
    ("embedding", &[(5, 3)], |g, v| g.embedding(v[0], &[4, 1, 1, 3])),
    ("concat_rows", &[(2, 3), (1, 3)], |g, v| g.concat_rows(&[v[0], v[1]])),
    ("slice_row", &[(3, 4)], |g, v| g.slice_row(v[0], 1)),
    ("slice_cols", &[(3, 5)], |g, v| g.slice_cols(v[0], 1, 3)),
    ("softmax_cross_entropy", &[(3, 4)], |g, v| g.softmax_cross_entropy(v[0], &[0, 3, 1])),
];

/// Checks one op at `points` random points; returns the worst error.
pub fn check_op(shapes: &[(usize, usize)], build: OpBuilder, points: u64, eps: f64) -> Result<f64, AutogradError> {
    let total: usize = shapes.iter().map(|(r, c)| r * c).sum();
    let mut worst: f64 = 0.0;
    for point_seed in 0..points {
        let mut rng = rng::stream(17, point_seed);
        let point = random_values(&mut rng, total);
        let weights = random_values(&mut rng, 256);
        let eval = |x: &[f64]| {
            let mut g = Graph::new();
            let mut offset = 0;
            let mut vars = Vec::new();
            for &(r, c) in shapes {
                vars.push(g.leaf(r, c, x[offset..offset + r * c].to_vec(), true)?);
                offset += r * c;
            }
            let out = build(&mut g, &vars)?;
            let loss = if g.shape(out) == (1, 1) { out } else { weighted_sum(&mut g, out, &weights)? };
            g.backward(loss)?;
            let mut grad = Vec::with_capacity(total);
            for (&v, &(r, c)) in vars.iter().zip(shapes) {
                match g.grad(v) {
                    Some(d) => grad.extend_from_slice(d),
                    None => grad.extend(std::iter::repeat_n(0.0, r * c)),
                }
            }
            Ok((g.value(loss)[0], grad))
        };
        worst = worst.max(gradient_check(&point, eps, eval)?);
    }
    Ok(worst)
}

/// A small model and batch whose loss exercises every parameter.
fn small_model(arch: Architecture, seed: u64) -> Result<(NeuralModel, Batch), NeuralError> {
    let docs: Vec<Vec<String>> = (0..8).map(|i| (0..6).map(|j| format!("t{}", (i * 3 + j) % 9)).collect()).collect();
    let cfg = NeuralConfig {
        vocab_cap: 10,
        embed_dim: 3,
        max_seq_len: 6,
        cnn_filters: 4,
        cnn_kernel: 3,
        lstm_hidden: 3,
        seed,
        ..NeuralConfig::default()
    };
    let index = TokenIndex::build(&docs, cfg.vocab_cap, cfg.max_seq_len);
    let data = docs.iter().enumerate().map(|(i, d)| (index.encode(d), i % 3)).collect();
    let labels = vec!["a".into(), "b".into(), "c".into()];
    Ok((NeuralModel::init(arch, &cfg, labels, index)?, data))
}

/// Checks the full training loss of `arch` at a perturbed initialization.
pub fn check_model_loss(arch: Architecture, seed: u64, eps: f64) -> Result<f64, NeuralError> {
    let (mut model, data) = small_model(arch, seed)?;
    let batch: Vec<(&[usize], usize)> = data.iter().map(|(s, y)| (s.as_slice(), *y)).collect();
    let mut rng = rng::stream(seed, 99);
    // move off the zero padding row so every parameter is exercised
    let point: Vec<f64> = model.flat_parameters().iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect();
    let err =
        gradient_check(&point, eps, |x| model.flat_loss_and_gradient(x, &batch).map_err(|_| AutogradError::NonFinite))?;
    Ok(err)
}

/// Every op at `points` points, then both model losses at `model_seeds` seeds.
pub fn check_all(points: u64, model_seeds: u64, eps: f64) -> Result<Vec<CheckResult>, NeuralError> {
    let mut out = Vec::new();
    for (name, shapes, build) in OPS {
        let max_relative_error = check_op(shapes, build, points, eps)?;
        out.push(CheckResult { name: name.into(), max_relative_error });
    }
    for arch in [Architecture::Cnn, Architecture::Lstm] {
        let mut worst: f64 = 0.0;
        for seed in 0..model_seeds {
            worst = worst.max(check_model_loss(arch, seed, eps)?);
        }
        out.push(CheckResult { name: format!("{arch} loss"), max_relative_error: worst });
    }
    Ok(out)
}
