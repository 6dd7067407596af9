use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::autograd::{Graph, Var};
use super::{Architecture, AutogradError, NeuralConfig, NeuralError, Tensor, TokenIndex, PAD_ID};
use crate::linalg::argmax;
use crate::rng;

const EMBEDDING: usize = 0;
const EMBED_INIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralModel {
    pub architecture: Architecture,
    pub config: NeuralConfig,
    pub label_set: Vec<String>,
    pub token_index: TokenIndex,
    /// CNN: embedding, conv weight, conv bias, dense weight, dense bias.
    /// LSTM: embedding, input weight, recurrent weight, gate bias, dense weight, dense bias.
    /// Gate blocks are ordered input, forget, output, candidate.
    pub params: Vec<Tensor>,
    /// Mean training loss before training and after each epoch.
    pub loss_history: Vec<f64>,
}

fn xavier(rng: &mut rng::Rng, rows: usize, cols: usize) -> Tensor {
    let limit = libm::sqrt(6.0 / (rows + cols) as f64);
    let values = (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect();
    Tensor::new(vec![rows, cols], values).expect("sized").with_grad()
}

/// Trailing pads removed; padded back to `min_len` when shorter.
fn effective_ids(ids: &[usize], min_len: usize) -> Vec<usize> {
    let end = ids.iter().rposition(|&i| i != PAD_ID).map_or(0, |p| p + 1);
    let mut out = ids[..end].to_vec();
    if out.len() < min_len {
        out.resize(min_len, PAD_ID);
    }
    out
}

impl NeuralModel {
    /// Freshly initialized parameters. The padding row of the embedding is zero.
    pub fn init(
        architecture: Architecture,
        config: &NeuralConfig,
        label_set: Vec<String>,
        token_index: TokenIndex,
    ) -> Result<Self, NeuralError> {
        config.validate()?;
        if label_set.is_empty() {
            return Err(NeuralError::InvalidConfig("empty label set".into()));
        }
        let mut rng = rng::stream(config.seed, 0);
        let k = label_set.len();
        let d = config.embed_dim;
        let rows = config.vocab_cap + 2;
        let mut embedding = {
            let values = (0..rows * d).map(|_| rng.gen_range(-EMBED_INIT..EMBED_INIT)).collect();
            Tensor::new(vec![rows, d], values).expect("sized").with_grad()
        };
        embedding.values_mut()[..d].iter_mut().for_each(|v| *v = 0.0);
        let params = match architecture {
            Architecture::Cnn => {
                let f = config.cnn_filters;
                vec![
                    embedding,
                    xavier(&mut rng, config.cnn_kernel * d, f),
                    Tensor::zeros(vec![f]).with_grad(),
                    xavier(&mut rng, f, k),
                    Tensor::zeros(vec![k]).with_grad(),
                ]
            }
            Architecture::Lstm => {
                let h = config.lstm_hidden;
                let mut bias = Tensor::zeros(vec![4 * h]).with_grad();
                bias.values_mut()[h..2 * h].iter_mut().for_each(|v| *v = 1.0);
                vec![
                    embedding,
                    xavier(&mut rng, d, 4 * h),
                    xavier(&mut rng, h, 4 * h),
                    bias,
                    xavier(&mut rng, h, k),
                    Tensor::zeros(vec![k]).with_grad(),
                ]
            }
        };
        Ok(Self { architecture, config: config.clone(), label_set, token_index, params, loss_history: Vec::new() })
    }

    pub fn n_classes(&self) -> usize {
        self.label_set.len()
    }

    pub fn n_parameters(&self) -> usize {
        self.params.iter().map(Tensor::numel).sum()
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        self.params.iter().flat_map(|p| p.values().iter().copied()).collect()
    }

    pub fn set_flat_parameters(&mut self, values: &[f64]) -> Result<(), NeuralError> {
        if values.len() != self.n_parameters() {
            return Err(NeuralError::ParameterCount { expected: self.n_parameters(), found: values.len() });
        }
        let mut offset = 0;
        for p in &mut self.params {
            let n = p.numel();
            p.values_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Records the forward pass of one sequence and returns its `1 x K` logits.
    pub fn forward<'a>(&'a self, graph: &mut Graph<'a>, ids: &[usize]) -> Result<(Vec<Var>, Var), AutogradError> {
        let vars: Vec<Var> = self.params.iter().map(|p| graph.tensor(p)).collect();
        let logits = match self.architecture {
            Architecture::Cnn => self.cnn_logits(graph, &vars, ids)?,
            Architecture::Lstm => self.lstm_logits(graph, &vars, ids)?,
        };
        Ok((vars, logits))
    }

    fn cnn_logits(&self, g: &mut Graph<'_>, p: &[Var], ids: &[usize]) -> Result<Var, AutogradError> {
        let ids = effective_ids(ids, self.config.cnn_kernel);
        let emb = g.embedding(p[EMBEDDING], &ids)?;
        let conv = g.conv1d(emb, p[1], self.config.cnn_kernel)?;
        let conv = g.add_bias(conv, p[2])?;
        let act = g.relu(conv);
        let pooled = g.max_pool_time(act)?;
        let out = g.matmul(pooled, p[3])?;
        g.add_bias(out, p[4])
    }

    fn lstm_logits(&self, g: &mut Graph<'_>, p: &[Var], ids: &[usize]) -> Result<Var, AutogradError> {
        let ids = effective_ids(ids, 0);
        let h_dim = self.config.lstm_hidden;
        let mut h = g.constant(1, h_dim, vec![0.0; h_dim])?;
        let mut c = g.constant(1, h_dim, vec![0.0; h_dim])?;
        if !ids.is_empty() {
            let emb = g.embedding(p[EMBEDDING], &ids)?;
            let projected = g.matmul(emb, p[1])?;
            let projected = g.add_bias(projected, p[3])?;
            for t in 0..ids.len() {
                let x_t = g.slice_row(projected, t)?;
                let rec = g.matmul(h, p[2])?;
                let z = g.add(x_t, rec)?;
                let zi = g.slice_cols(z, 0, h_dim)?;
                let zf = g.slice_cols(z, h_dim, h_dim)?;
                let zo = g.slice_cols(z, 2 * h_dim, h_dim)?;
                let zg = g.slice_cols(z, 3 * h_dim, h_dim)?;
                let i = g.sigmoid(zi);
                let f = g.sigmoid(zf);
                let o = g.sigmoid(zo);
                let cand = g.tanh(zg);
                let keep = g.mul(f, c)?;
                let write = g.mul(i, cand)?;
                c = g.add(keep, write)?;
                let squashed = g.tanh(c);
                h = g.mul(o, squashed)?;
            }
        }
        let out = g.matmul(h, p[4])?;
        g.add_bias(out, p[5])
    }

    pub fn logits(&self, ids: &[usize]) -> Result<Vec<f64>, AutogradError> {
        let mut g = Graph::new();
        let (_, logits) = self.forward(&mut g, ids)?;
        Ok(g.value(logits).to_vec())
    }

    /// Mean cross-entropy over `batch` and its gradient, one buffer per parameter tensor.
    pub fn loss_and_gradients(&self, batch: &[(&[usize], usize)]) -> Result<(f64, Vec<Vec<f64>>), AutogradError> {
        let mut grads: Vec<Vec<f64>> = self.params.iter().map(|p| vec![0.0; p.numel()]).collect();
        let mut total = 0.0;
        let scale = 1.0 / batch.len().max(1) as f64;
        for &(ids, label) in batch {
            let mut g = Graph::new();
            let (vars, logits) = self.forward(&mut g, ids)?;
            let loss = g.softmax_cross_entropy(logits, &[label])?;
            total += g.value(loss)[0];
            g.backward(loss)?;
            for (acc, v) in grads.iter_mut().zip(&vars) {
                if let Some(d) = g.grad(*v) {
                    acc.iter_mut().zip(d).for_each(|(a, x)| *a += scale * x);
                }
            }
        }
        Ok((total * scale, grads))
    }

    /// Mean cross-entropy without gradients.
    pub fn mean_loss(&self, data: &[(&[usize], usize)]) -> Result<f64, AutogradError> {
        let mut total = 0.0;
        for &(ids, label) in data {
            let p = crate::linalg::softmax(&self.logits(ids)?);
            total -= libm::log(p[label].max(f64::MIN_POSITIVE));
        }
        Ok(total / data.len().max(1) as f64)
    }

    /// Flattened loss and gradient at parameter vector `point`, for gradient checks.
    pub fn flat_loss_and_gradient(
        &mut self,
        point: &[f64],
        batch: &[(&[usize], usize)],
    ) -> Result<(f64, Vec<f64>), NeuralError> {
        self.set_flat_parameters(point)?;
        let (loss, grads) = self.loss_and_gradients(batch)?;
        Ok((loss, grads.concat()))
    }

    fn apply_update(&mut self, mut grads: Vec<Vec<f64>>) {
        // the padding embedding stays zero
        let d = self.config.embed_dim;
        grads[EMBEDDING][..d].iter_mut().for_each(|v| *v = 0.0);
        let mut scale = self.config.learning_rate;
        if self.config.clip_norm > 0.0 {
            let norm = libm::sqrt(grads.iter().flatten().map(|v| v * v).sum());
            if norm > self.config.clip_norm {
                scale *= self.config.clip_norm / norm;
            }
        }
        for (p, g) in self.params.iter_mut().zip(&grads) {
            p.values_mut().iter_mut().zip(g).for_each(|(v, d)| *v -= scale * d);
        }
    }

    pub fn predict_ids(&self, ids: &[usize]) -> Result<usize, AutogradError> {
        Ok(argmax(&self.logits(ids)?).unwrap_or(0))
    }
}

fn check_labels(n_sequences: usize, y: &[usize], n_classes: usize) -> Result<(), NeuralError> {
    if n_sequences != y.len() {
        return Err(NeuralError::LengthMismatch { sequences: n_sequences, labels: y.len() });
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(NeuralError::LabelOutOfRange { label, n_classes });
    }
    let mut distinct = y.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(NeuralError::DegenerateLabels);
    }
    Ok(())
}

fn train(mut model: NeuralModel, sequences: &[Vec<usize>], y: &[usize]) -> Result<NeuralModel, NeuralError> {
    check_labels(sequences.len(), y, model.n_classes())?;
    let data: Vec<(&[usize], usize)> = sequences.iter().map(Vec::as_slice).zip(y.iter().copied()).collect();
    let mut rng = rng::stream(model.config.seed, 1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = vec![model.mean_loss(&data)?];
    for _ in 0..model.config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(model.config.batch_size) {
            let batch: Vec<(&[usize], usize)> = chunk.iter().map(|&i| data[i]).collect();
            let (_, grads) = model.loss_and_gradients(&batch)?;
            model.apply_update(grads);
        }
        let loss = model.mean_loss(&data)?;
        if !loss.is_finite() {
            return Err(AutogradError::NonFinite.into());
        }
        history.push(loss);
    }
    model.loss_history = history;
    Ok(model)
}

/// Trains a text CNN on encoded sequences.
pub fn fit_text_cnn(
    token_index: TokenIndex,
    sequences: &[Vec<usize>],
    y: &[usize],
    label_set: Vec<String>,
    config: &NeuralConfig,
) -> Result<NeuralModel, NeuralError> {
    train(NeuralModel::init(Architecture::Cnn, config, label_set, token_index)?, sequences, y)
}

/// Trains an LSTM classifier on encoded sequences.
pub fn fit_text_lstm(
    token_index: TokenIndex,
    sequences: &[Vec<usize>],
    y: &[usize],
    label_set: Vec<String>,
    config: &NeuralConfig,
) -> Result<NeuralModel, NeuralError> {
    train(NeuralModel::init(Architecture::Lstm, config, label_set, token_index)?, sequences, y)
}

/// Builds the token index from `documents`, encodes them and trains `architecture`.
pub fn fit_neural<D, S>(
    architecture: Architecture,
    documents: &[D],
    y: &[usize],
    label_set: Vec<String>,
    config: &NeuralConfig,
) -> Result<NeuralModel, NeuralError>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    config.validate()?;
    let index = TokenIndex::build(documents, config.vocab_cap, config.max_seq_len);
    let sequences: Vec<Vec<usize>> = documents.iter().map(|d| index.encode(d.as_ref())).collect();
    match architecture {
        Architecture::Cnn => fit_text_cnn(index, &sequences, y, label_set, config),
        Architecture::Lstm => fit_text_lstm(index, &sequences, y, label_set, config),
    }
}

/// Predicted class per document; unknown tokens map to the unknown id.
pub fn predict_neural<D, S>(model: &NeuralModel, documents: &[D]) -> Result<Vec<usize>, NeuralError>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    documents.iter().map(|d| Ok(model.predict_ids(&model.token_index.encode(d.as_ref()))?)).collect()
}
