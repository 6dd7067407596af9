//! Neural text classifiers on token-id sequences: a single-kernel text CNN
//! and a single-layer LSTM, built on a small reverse-mode autograd.

mod autograd;
pub mod gradcheck;
mod model;
mod tensor;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

pub use autograd::{sigmoid, Graph, Var};
pub use gradcheck::{gradient_check, gradient_check_at, relative_error};
pub use model::{fit_neural, fit_text_cnn, fit_text_lstm, predict_neural, NeuralModel};
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AutogradError {
    #[error("{op}: shape mismatch ({detail})")]
    Shape { op: &'static str, detail: String },
    #[error("non-finite loss")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error(transparent)]
    Autograd(#[from] AutogradError),
    #[error("training labels contain fewer than two classes")]
    DegenerateLabels,
    #[error("{sequences} sequences but {labels} labels")]
    LengthMismatch { sequences: usize, labels: usize },
    #[error("label {label} outside label set of size {n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("invalid neural config: {0}")]
    InvalidConfig(String),
    #[error("parameter vector has {found} values, model needs {expected}")]
    ParameterCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Cnn,
    Lstm,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Cnn => "cnn",
            Architecture::Lstm => "lstm",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuralConfig {
    pub vocab_cap: usize,
    pub embed_dim: usize,
    pub max_seq_len: usize,
    pub cnn_filters: usize,
    pub cnn_kernel: usize,
    pub lstm_hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Global gradient-norm cap per update; 0 disables clipping.
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        Self {
            vocab_cap: 5000,
            embed_dim: 32,
            max_seq_len: 100,
            cnn_filters: 64,
            cnn_kernel: 3,
            lstm_hidden: 64,
            epochs: 50,
            batch_size: 4,
            learning_rate: 0.1,
            clip_norm: 5.0,
            seed: 0,
        }
    }
}

impl NeuralConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::InvalidConfig(m.into()));
        if [
            self.vocab_cap,
            self.embed_dim,
            self.max_seq_len,
            self.cnn_filters,
            self.cnn_kernel,
            self.lstm_hidden,
            self.epochs,
            self.batch_size,
        ]
        .contains(&0)
        {
            return bad("all sizes must be positive");
        }
        if self.cnn_kernel > self.max_seq_len {
            return bad("cnn_kernel exceeds max_seq_len");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if !(self.clip_norm.is_finite() && self.clip_norm >= 0.0) {
            return bad("clip_norm must be >= 0");
        }
        Ok(())
    }

    pub fn canonical(&self, prefix: &str) -> String {
        alloc::format!(
            "{p}.vocab_cap={}\n{p}.embed_dim={}\n{p}.max_seq_len={}\n{p}.cnn_filters={}\n\
             {p}.cnn_kernel={}\n{p}.lstm_hidden={}\n{p}.epochs={}\n{p}.batch_size={}\n\
             {p}.learning_rate={:?}\n{p}.clip_norm={:?}\n{p}.seed={}\n",
            self.vocab_cap,
            self.embed_dim,
            self.max_seq_len,
            self.cnn_filters,
            self.cnn_kernel,
            self.lstm_hidden,
            self.epochs,
            self.batch_size,
            self.learning_rate,
            self.clip_norm,
            self.seed,
            p = prefix
        )
    }
}

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

/// Token to id mapping; ids 0 and 1 are reserved for padding and unknown tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenIndex {
    ids: BTreeMap<String, usize>,
    max_seq_len: usize,
}

impl TokenIndex {
    /// Keeps the `cap` most frequent tokens (ties in lexicographic order).
    pub fn build<D, S>(documents: &[D], cap: usize, max_seq_len: usize) -> Self
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in documents {
            for t in doc.as_ref() {
                *counts.entry(t.as_ref()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let ids = ranked.into_iter().take(cap).enumerate().map(|(i, (t, _))| (String::from(t), i + 2)).collect();
        Self { ids, max_seq_len }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn max_seq_len(&self) -> usize {
        self.max_seq_len
    }

    /// Ids of the first `max_seq_len` tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().take(self.max_seq_len).map(|t| self.id(t.as_ref())).collect()
    }
}
