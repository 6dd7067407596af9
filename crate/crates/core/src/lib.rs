//! Demographic profiling of celebrities from the Urdu tweets of their followers.
//!
//! The crate is `no_std` + `alloc`. It covers the whole modelling pipeline:
//!
//! * [`corpus`]: record types, label schemes and a seeded synthetic corpus generator
//! * [`preprocess`]: retweet/language filtering, cleaning, Urdu normalization, tokenization
//! * [`features`]: vocabulary, count vectors, TF-IDF and tweet-length statistics
//! * [`classical`]: KNN, softmax regression, decision tree, random forest, linear SVM
//! * [`neural`]: a small reverse-mode autograd plus text CNN and LSTM classifiers
//! * [`evaluation`]: confusion matrices, precision/recall/F1, cRank, splitting and the
//!   experiment grid
//!
//! File formats, persistence and the command line live in the `celebprof` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classical;
pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod fingerprint;
pub mod linalg;
pub mod neural;
pub mod preprocess;
pub mod rng;

pub use corpus::{
    AgeGroup, CelebrityLabels, CelebrityRecord, Corpus, Demographic, Fame, FollowerFeed, Gender, MediaType, Occupation,
    RawTweetRecord, SynthSpec,
};

pub use evaluation::{ConfusionMatrix, EvaluationReport, F1Variant, MetricsReport};
pub use features::{FeatureMatrix, TfidfModel, Vocabulary};
pub use preprocess::{CleanDocument, PreprocessConfig};

/// Version of the corpus archive layout produced by the companion crate.
pub const CORPUS_FORMAT_VERSION: u32 = 1;
