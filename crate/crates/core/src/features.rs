//! Count vectors, TF-IDF weighting and tweet-length statistics.
//!
//! TF-IDF uses the smoothed form `tf(t, d) * (ln(n / df(t)) + 1)` with `tf` the raw
//! count (or `1 + ln(count)` when sublinear), followed by L2 row normalization.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::preprocess::CleanDocument;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("no documents to build a vocabulary from")]
    NoDocuments,
    #[error("vocabulary is empty after applying min_df = {min_df}")]
    EmptyVocabulary { min_df: usize },
    #[error("column count mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("document `{0}` has no retained tweets")]
    NoTweets(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VocabularyParts {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

/// Terms in lexicographic order with their document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyParts", into = "VocabularyParts")]
pub struct Vocabulary {
    term_to_index: BTreeMap<String, usize>,
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

impl TryFrom<VocabularyParts> for Vocabulary {
    type Error = FeatureError;

    fn try_from(parts: VocabularyParts) -> Result<Self, Self::Error> {
        let invalid = |m: &str| Err(FeatureError::InvalidVocabulary(m.into()));
        if parts.terms.len() != parts.document_frequency.len() {
            return invalid("terms and frequencies differ in length");
        }
        if parts.document_frequency.iter().any(|&df| df == 0 || df > parts.n_documents) {
            return invalid("document frequency outside [1, n]");
        }
        let term_to_index: BTreeMap<String, usize> =
            parts.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if term_to_index.len() != parts.terms.len() {
            return invalid("duplicate term");
        }
        Ok(Self {
            term_to_index,
            terms: parts.terms,
            document_frequency: parts.document_frequency,
            n_documents: parts.n_documents,
        })
    }
}

impl From<Vocabulary> for VocabularyParts {
    fn from(v: Vocabulary) -> Self {
        Self { terms: v.terms, document_frequency: v.document_frequency, n_documents: v.n_documents }
    }
}

impl Vocabulary {
    /// Keeps terms whose document frequency is at least `min_df`.
    pub fn from_token_lists<D, S>(documents: &[D], min_df: usize) -> Result<Self, FeatureError>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        if documents.is_empty() {
            return Err(FeatureError::NoDocuments);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in documents {
            let unique: BTreeSet<&str> = doc.as_ref().iter().map(AsRef::as_ref).collect();
            for term in unique {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= min_df.max(1)).collect();
        if kept.is_empty() {
            return Err(FeatureError::EmptyVocabulary { min_df });
        }
        let terms: Vec<String> = kept.iter().map(|(t, _)| String::from(*t)).collect();
        let document_frequency = kept.iter().map(|&(_, n)| n).collect();
        Self::try_from(VocabularyParts { terms, document_frequency, n_documents: documents.len() })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }
}

pub fn build_vocabulary(documents: &[CleanDocument], min_df: usize) -> Result<Vocabulary, FeatureError> {
    let lists: Vec<&[String]> = documents.iter().map(|d| d.tokens.as_slice()).collect();
    Vocabulary::from_token_lists(&lists, min_df)
}

/// Sparse row with strictly increasing column indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseRow {
    pub entries: Vec<(usize, f64)>,
}

impl SparseRow {
    pub fn get(&self, column: usize) -> f64 {
        self.entries.binary_search_by_key(&column, |&(c, _)| c).map_or(0.0, |i| self.entries[i].1)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|(_, v)| v * v).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v == 0.0)
    }
}

/// Raw occurrence counts of in-vocabulary tokens.
pub fn count_vectorize<S: AsRef<str>>(tokens: &[S], vocabulary: &Vocabulary) -> SparseRow {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for token in tokens {
        if let Some(j) = vocabulary.index_of(token.as_ref()) {
            *counts.entry(j).or_insert(0.0) += 1.0;
        }
    }
    SparseRow { entries: counts.into_iter().collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<SparseRow>,
    pub n_columns: usize,
    pub row_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows.len(), self.n_columns);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in &row.entries {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Checks the column bound and finiteness of every stored value.
    pub fn is_well_formed(&self) -> bool {
        self.rows.len() == self.row_ids.len()
            && self.rows.iter().all(|r| {
                r.entries.windows(2).all(|w| w[0].0 < w[1].0)
                    && r.entries.iter().all(|&(j, v)| j < self.n_columns && v.is_finite())
            })
    }

    /// `row_id<TAB>col:value ...`, one line per row, zero values omitted.
    pub fn write_sparse_text<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        for (id, row) in self.row_ids.iter().zip(&self.rows) {
            out.write_str(id)?;
            out.write_char('\t')?;
            let mut first = true;
            for &(j, v) in row.entries.iter().filter(|(_, v)| *v != 0.0) {
                if !first {
                    out.write_char(' ')?;
                }
                first = false;
                write!(out, "{j}:{v:?}")?;
            }
            out.write_char('\n')?;
        }
        Ok(())
    }
}

/// Count matrix for a document list under `vocabulary`.
pub fn count_matrix(documents: &[CleanDocument], vocabulary: &Vocabulary) -> FeatureMatrix {
    FeatureMatrix {
        rows: documents.iter().map(|d| count_vectorize(&d.tokens, vocabulary)).collect(),
        n_columns: vocabulary.len(),
        row_ids: documents.iter().map(|d| d.celebrity_id.clone()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub sublinear_tf: bool,
}

impl TfidfModel {
    pub fn new(vocabulary: Vocabulary, sublinear_tf: bool) -> Self {
        Self { vocabulary, sublinear_tf }
    }

    pub fn idf(&self, column: usize) -> f64 {
        let n = self.vocabulary.n_documents() as f64;
        let df = self.vocabulary.document_frequency(column) as f64;
        libm::log(n / df) + 1.0
    }

    fn tf(&self, count: f64) -> f64 {
        if self.sublinear_tf && count > 0.0 {
            1.0 + libm::log(count)
        } else {
            count
        }
    }

    /// TF-IDF weights before row normalization.
    pub fn weigh(&self, counts: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if counts.n_columns != self.vocabulary.len() {
            return Err(FeatureError::Dimension { expected: self.vocabulary.len(), found: counts.n_columns });
        }
        let rows = counts
            .rows
            .iter()
            .map(|row| SparseRow { entries: row.entries.iter().map(|&(j, c)| (j, self.tf(c) * self.idf(j))).collect() })
            .collect();
        Ok(FeatureMatrix { rows, n_columns: counts.n_columns, row_ids: counts.row_ids.clone() })
    }
}

/// TF-IDF weighting followed by L2 normalization of each non-zero row.
pub fn tfidf_transform(counts: &FeatureMatrix, model: &TfidfModel) -> Result<FeatureMatrix, FeatureError> {
    let mut weighted = model.weigh(counts)?;
    for row in &mut weighted.rows {
        let norm = row.norm();
        if norm > 0.0 {
            for (_, v) in &mut row.entries {
                *v /= norm;
            }
        }
    }
    Ok(weighted)
}

/// Number of columns produced by [`tweet_length_features`].
pub const LENGTH_FEATURES: usize = 6;

/// `[mean, std, max]` of token counts then of character counts (population std).
pub fn tweet_length_features(document: &CleanDocument) -> Result<[f64; LENGTH_FEATURES], FeatureError> {
    let lengths = &document.per_tweet_lengths;
    if lengths.is_empty() {
        return Err(FeatureError::NoTweets(document.celebrity_id.clone()));
    }
    let stats = |values: &mut dyn Iterator<Item = f64>| {
        let values: Vec<f64> = values.collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (mean, libm::sqrt(var), max)
    };
    let (tm, ts, tx) = stats(&mut lengths.iter().map(|&(t, _)| t as f64));
    let (cm, cs, cx) = stats(&mut lengths.iter().map(|&(_, c)| c as f64));
    Ok([tm, ts, tx, cm, cs, cx])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Counts,
    Tfidf,
    #[default]
    #[serde(rename = "tfidf+length")]
    TfidfLength,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Counts => "counts",
            FeatureKind::Tfidf => "tfidf",
            FeatureKind::TfidfLength => "tfidf+length",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "counts" => Some(FeatureKind::Counts),
            "tfidf" => Some(FeatureKind::Tfidf),
            "tfidf+length" => Some(FeatureKind::TfidfLength),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub kind: FeatureKind,
    pub min_df: usize,
    pub sublinear_tf: bool,
    /// Multiplier on the z-scored length statistics, keeping them from
    /// swamping the unit-norm TF-IDF block in distance-based models.
    pub length_weight: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { kind: FeatureKind::TfidfLength, min_df: 2, sublinear_tf: false, length_weight: 0.05 }
    }
}

/// Z-scores of the six length statistics, fitted on training documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthScaler {
    pub mean: [f64; LENGTH_FEATURES],
    pub scale: [f64; LENGTH_FEATURES],
}

impl LengthScaler {
    pub fn fit(rows: &[[f64; LENGTH_FEATURES]]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; LENGTH_FEATURES];
        let mut scale = [0.0; LENGTH_FEATURES];
        for j in 0..LENGTH_FEATURES {
            mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean[j]) * (r[j] - mean[j])).sum::<f64>() / n;
            let sd = libm::sqrt(var);
            scale[j] = if sd > 0.0 { sd } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn apply(&self, row: &[f64; LENGTH_FEATURES]) -> [f64; LENGTH_FEATURES] {
        core::array::from_fn(|j| (row[j] - self.mean[j]) / self.scale[j])
    }
}

/// Fitted feature extraction: vocabulary, IDF and (optionally) length scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub config: FeatureConfig,
    pub tfidf: TfidfModel,
    pub length_scaler: Option<LengthScaler>,
}

impl FeaturePipeline {
    pub fn fit(documents: &[CleanDocument], config: &FeatureConfig) -> Result<Self, FeatureError> {
        let vocabulary = build_vocabulary(documents, config.min_df)?;
        let length_scaler = match config.kind {
            FeatureKind::TfidfLength => {
                let rows = documents.iter().map(tweet_length_features).collect::<Result<Vec<_>, _>>()?;
                Some(LengthScaler::fit(&rows))
            }
            _ => None,
        };
        Ok(Self { config: config.clone(), tfidf: TfidfModel::new(vocabulary, config.sublinear_tf), length_scaler })
    }

    pub fn n_columns(&self) -> usize {
        self.tfidf.vocabulary.len() + if self.length_scaler.is_some() { LENGTH_FEATURES } else { 0 }
    }

    pub fn transform(&self, documents: &[CleanDocument]) -> Result<FeatureMatrix, FeatureError> {
        let counts = count_matrix(documents, &self.tfidf.vocabulary);
        let mut matrix = match self.config.kind {
            FeatureKind::Counts => counts,
            FeatureKind::Tfidf | FeatureKind::TfidfLength => tfidf_transform(&counts, &self.tfidf)?,
        };
        if let Some(scaler) = &self.length_scaler {
            let offset = matrix.n_columns;
            for (row, doc) in matrix.rows.iter_mut().zip(documents) {
                let scaled = scaler.apply(&tweet_length_features(doc)?);
                let w = self.config.length_weight;
                row.entries.extend(scaled.iter().enumerate().map(|(j, &v)| (offset + j, w * v)));
            }
            matrix.n_columns += LENGTH_FEATURES;
        }
        Ok(matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn docs(lists: &[&[&str]]) -> Vec<Vec<String>> {
        lists.iter().map(|l| l.iter().map(|s| String::from(*s)).collect()).collect()
    }

    #[test]
    fn vocabulary_examples() {
        let d = docs(&[&["a", "b"], &["b"]]);
        let v = Vocabulary::from_token_lists(&d, 1).unwrap();
        assert_eq!(v.terms(), &["a", "b"]);
        assert_eq!((v.document_frequency(0), v.document_frequency(1), v.n_documents()), (1, 2, 2));
        let v = Vocabulary::from_token_lists(&d, 2).unwrap();
        assert_eq!(v.terms(), &["b"]);
        let d = docs(&[&["a", "a", "a"], &["b"]]);
        let v = Vocabulary::from_token_lists(&d, 1).unwrap();
        assert_eq!(v.document_frequency(0), 1);
        assert_eq!(Vocabulary::from_token_lists(&d, 3), Err(FeatureError::EmptyVocabulary { min_df: 3 }));
        assert_eq!(Vocabulary::from_token_lists::<Vec<String>, String>(&[], 1), Err(FeatureError::NoDocuments));
    }

    #[test]
    fn counting() {
        let v = Vocabulary::from_token_lists(&docs(&[&["a", "b"]]), 1).unwrap();
        assert_eq!(count_vectorize(&["b", "b", "a"], &v).entries, vec![(0, 1.0), (1, 2.0)]);
        assert!(count_vectorize(&["zzz"], &v).entries.is_empty());
        assert!(count_vectorize::<&str>(&[], &v).entries.is_empty());
    }

    #[test]
    fn idf_examples() {
        let d = docs(&[&["t"], &["u"], &["u"], &["u"]]);
        let v = Vocabulary::from_token_lists(&d, 1).unwrap();
        let model = TfidfModel::new(v, false);
        // n=4, DF(t)=1
        assert!((model.idf(0) - 2.386294361119891).abs() < 1e-12);
        let counts = count_matrix(
            &[CleanDocument { celebrity_id: "x".into(), tokens: vec!["t".into()], per_tweet_lengths: vec![] }],
            &model.vocabulary,
        );
        let w = model.weigh(&counts).unwrap();
        assert!((w.rows[0].get(0) - (4f64.ln() + 1.0)).abs() < 1e-12);
        let all = Vocabulary::from_token_lists(&docs(&[&["t"], &["t"]]), 1).unwrap();
        assert_eq!(TfidfModel::new(all, false).idf(0), 1.0);
    }

    #[test]
    fn tfidf_rows_have_unit_norm_and_dimension_check() {
        let d = docs(&[&["a", "b", "b"], &["b", "c"], &["zz"]]);
        let v = Vocabulary::from_token_lists(&d[..2], 1).unwrap();
        let model = TfidfModel::new(v, true);
        let counts = FeatureMatrix {
            rows: d.iter().map(|t| count_vectorize(t, &model.vocabulary)).collect(),
            n_columns: 3,
            row_ids: vec!["0".into(), "1".into(), "2".into()],
        };
        let m = tfidf_transform(&counts, &model).unwrap();
        assert!((m.rows[0].norm() - 1.0).abs() < 1e-12);
        assert!((m.rows[1].norm() - 1.0).abs() < 1e-12);
        assert!(m.rows[2].is_zero());
        let bad = FeatureMatrix { n_columns: 4, ..counts };
        assert_eq!(tfidf_transform(&bad, &model), Err(FeatureError::Dimension { expected: 3, found: 4 }));
    }

    fn doc_with_lengths(lengths: Vec<(usize, usize)>) -> CleanDocument {
        CleanDocument { celebrity_id: "d".into(), tokens: vec![], per_tweet_lengths: lengths }
    }

    #[test]
    fn length_statistics() {
        let f = tweet_length_features(&doc_with_lengths(vec![(10, 50), (20, 100)])).unwrap();
        assert_eq!(f, [15.0, 5.0, 20.0, 75.0, 25.0, 100.0]);
        let f = tweet_length_features(&doc_with_lengths(vec![(7, 30)])).unwrap();
        assert_eq!((f[1], f[4]), (0.0, 0.0));
        let f = tweet_length_features(&doc_with_lengths(vec![(4, 9); 5])).unwrap();
        assert_eq!(f, [4.0, 0.0, 4.0, 9.0, 0.0, 9.0]);
        assert!(matches!(tweet_length_features(&doc_with_lengths(vec![])), Err(FeatureError::NoTweets(_))));
    }

    #[test]
    fn sparse_text_dump() {
        let m = FeatureMatrix {
            rows: vec![SparseRow { entries: vec![(0, 0.5), (2, 0.0), (3, 1.0)] }],
            n_columns: 4,
            row_ids: vec!["c1".into()],
        };
        let mut s = String::new();
        m.write_sparse_text(&mut s).unwrap();
        assert_eq!(s, "c1\t0:0.5 3:1.0\n");
    }
}
