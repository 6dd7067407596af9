//! Seeded train/test partitioning, stratified on one demographic.

use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvaluationError;
use crate::corpus::Demographic;
use crate::rng;

/// Which labels the split preserves. `Target` stratifies each demographic's
/// split on that demographic itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StratifyOn {
    #[default]
    Target,
    Fixed(Demographic),
}

impl StratifyOn {
    pub fn name(self) -> &'static str {
        match self {
            StratifyOn::Target => "target",
            StratifyOn::Fixed(d) => d.name(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "target" {
            return Some(StratifyOn::Target);
        }
        s.parse::<Demographic>().ok().map(StratifyOn::Fixed)
    }

    /// The demographic whose classes form the strata when predicting `target`.
    pub fn resolve(self, target: Demographic) -> Demographic {
        match self {
            StratifyOn::Target => target,
            StratifyOn::Fixed(d) => d,
        }
    }
}

impl From<StratifyOn> for String {
    fn from(s: StratifyOn) -> String {
        String::from(s.name())
    }
}

impl TryFrom<String> for StratifyOn {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        StratifyOn::parse(&s).ok_or_else(|| alloc::format!("unknown stratification `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratify_on: StratifyOn,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { test_fraction: 0.2, stratify_on: StratifyOn::Target, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), EvaluationError> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(EvaluationError::InvalidSplit(alloc::format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }

    pub fn canonical(&self, prefix: &str) -> String {
        alloc::format!(
            "{p}.test_fraction={:?}\n{p}.stratify_on={}\n{p}.seed={}\n",
            self.test_fraction,
            self.stratify_on.name(),
            self.seed,
            p = prefix
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// Sorted identifiers.
    pub train: Vec<String>,
    /// Sorted identifiers.
    pub test: Vec<String>,
    /// False when some stratum had fewer than two members and the split fell
    /// back to a plain shuffle.
    pub stratified: bool,
}

/// Splits `(id, class)` items. Each class contributes `test_fraction` of its
/// members to the test side, within one sample; leftover test slots go to
/// the classes with the largest fractional remainders.
pub fn stratified_split<S: AsRef<str>>(items: &[(S, usize)], spec: &SplitSpec) -> Result<Split, EvaluationError> {
    spec.validate()?;
    let n = items.len();
    let n_test = libm::round(spec.test_fraction * n as f64) as usize;
    if n_test == 0 || n_test >= n {
        return Err(EvaluationError::InvalidSplit(alloc::format!(
            "test_fraction {} of {n} items leaves an empty side",
            spec.test_fraction
        )));
    }
    let mut rng = rng::stream(spec.seed, 0);
    let mut ids: Vec<(String, usize)> = items.iter().map(|(id, c)| (String::from(id.as_ref()), *c)).collect();
    ids.sort();

    let n_classes = ids.iter().map(|(_, c)| c + 1).max().unwrap_or(0);
    let mut strata: Vec<Vec<String>> = (0..n_classes).map(|_| Vec::new()).collect();
    for (id, c) in &ids {
        strata[*c].push(id.clone());
    }
    strata.retain(|s| !s.is_empty());
    let stratified = strata.iter().all(|s| s.len() >= 2);

    let mut test = Vec::with_capacity(n_test);
    let mut train = Vec::with_capacity(n - n_test);
    if stratified {
        let exact: Vec<f64> = strata.iter().map(|s| spec.test_fraction * s.len() as f64).collect();
        let mut quota: Vec<usize> = exact.iter().map(|&e| libm::floor(e) as usize).collect();
        let mut order: Vec<usize> = (0..strata.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - quota[a] as f64, exact[b] - quota[b] as f64);
            rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        let assigned: usize = quota.iter().sum();
        for &s in order.iter().take(n_test.saturating_sub(assigned)) {
            quota[s] += 1;
        }
        for (stratum, q) in strata.iter_mut().zip(quota) {
            stratum.shuffle(&mut rng);
            test.extend_from_slice(&stratum[..q]);
            train.extend_from_slice(&stratum[q..]);
        }
    } else {
        let mut all: Vec<String> = ids.into_iter().map(|(id, _)| id).collect();
        all.shuffle(&mut rng);
        test.extend_from_slice(&all[..n_test]);
        train.extend_from_slice(&all[n_test..]);
    }
    train.sort();
    test.sort();
    Ok(Split { train, test, stratified })
}
