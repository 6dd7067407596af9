//! Corpus data model: raw tweets, follower feeds, labelled celebrity records.

mod labels;
pub mod synth;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use labels::{
    age_group_for_age, fame_follower_range, map_age_group, map_fame, AgeBoundary, AgeGroup, Demographic, Fame, Gender,
    Occupation, MAX_AGE, MIN_AGE, RISING_MAX_FOLLOWERS, STAR_MAX_FOLLOWERS,
};
pub use synth::{generate_synthetic_corpus, marker_token, LabelDistributions, SynthSpec};

use crate::fingerprint::fingerprint;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("expected {expected} follower feeds for `{celebrity}`, found {found}")]
    Cardinality { celebrity: String, expected: usize, found: usize },
    #[error("inconsistent labels for `{celebrity}`: {detail}")]
    LabelConsistency { celebrity: String, detail: String },
    #[error("age {age} outside the supported range [20, 80]")]
    AgeOutOfRange { age: i32 },
    #[error("unknown {scheme} label `{value}`")]
    UnknownLabel { scheme: &'static str, value: String },
    #[error("duplicate celebrity id `{0}`")]
    DuplicateCelebrity(String),
    #[error("duplicate tweet id `{tweet_id}` in feed of `{follower}`")]
    DuplicateTweet { follower: String, tweet_id: String },
    #[error("invalid tweet record: {0}")]
    InvalidTweet(String),
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSynthSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaType {
    #[default]
    Text,
    Audio,
    Video,
}

impl MediaType {
    pub fn name(self) -> &'static str {
        match self {
            MediaType::Text => "text",
            MediaType::Audio => "audio",
            MediaType::Video => "video",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "text" => Some(MediaType::Text),
            "audio" => Some(MediaType::Audio),
            "video" => Some(MediaType::Video),
            _ => None,
        }
    }
}

/// One row of a follower export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweetRecord {
    pub tweet_id: String,
    pub tweet_text: String,
    pub author_handle: String,
    pub timestamp: Option<String>,
    pub is_retweet: bool,
    pub language_tag: Option<String>,
    pub urls: Vec<String>,
    pub hashtags: Vec<String>,
    pub media_type: MediaType,
}

impl RawTweetRecord {
    /// A plain text tweet with no optional metadata.
    pub fn text(tweet_id: impl Into<String>, author: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            tweet_id: tweet_id.into(),
            tweet_text: text.into(),
            author_handle: author.into(),
            timestamp: None,
            is_retweet: false,
            language_tag: None,
            urls: Vec::new(),
            hashtags: Vec::new(),
            media_type: MediaType::Text,
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.tweet_id.trim().is_empty() {
            return Err(CorpusError::InvalidTweet("empty tweet_id".into()));
        }
        if self.tweet_text.trim().is_empty() {
            return Err(CorpusError::InvalidTweet(format!("empty tweet_text for id {}", self.tweet_id)));
        }
        Ok(())
    }
}

/// The collected tweets of one follower, in export order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerFeed {
    pub follower_handle: String,
    pub records: Vec<RawTweetRecord>,
}

impl FollowerFeed {
    /// Builds a feed, checking that every record is valid and tweet ids are unique.
    pub fn new(follower_handle: impl Into<String>, records: Vec<RawTweetRecord>) -> Result<Self, CorpusError> {
        let follower_handle = follower_handle.into();
        let mut seen = BTreeSet::new();
        for record in &records {
            record.validate()?;
            if !seen.insert(record.tweet_id.as_str()) {
                return Err(CorpusError::DuplicateTweet {
                    follower: follower_handle.clone(),
                    tweet_id: record.tweet_id.clone(),
                });
            }
        }
        Ok(Self { follower_handle, records })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CelebrityLabels {
    pub age_group: AgeGroup,
    pub gender: Gender,
    pub occupation: Occupation,
    pub fame: Fame,
    pub birth_year: Option<i32>,
    pub follower_count: Option<u64>,
}

impl CelebrityLabels {
    /// Labels derived from raw attributes through [`age_group_for_age`] and [`map_fame`].
    pub fn from_attributes(
        birth_year: i32,
        follower_count: u64,
        gender: Gender,
        occupation: Occupation,
        config: &LabelConfig,
    ) -> Result<Self, CorpusError> {
        Ok(Self {
            age_group: age_group_for_age(config.reference_year - birth_year, config.age_boundary)?,
            gender,
            occupation,
            fame: map_fame(follower_count),
            birth_year: Some(birth_year),
            follower_count: Some(follower_count),
        })
    }

    /// Class index of this celebrity for `demographic`.
    pub fn class_of(&self, demographic: Demographic) -> usize {
        match demographic {
            Demographic::Occupation => self.occupation.index(),
            Demographic::Age => self.age_group.index(),
            Demographic::Gender => self.gender.index(),
            Demographic::Fame => self.fame.index(),
        }
    }

    pub fn class_name(&self, demographic: Demographic) -> &'static str {
        demographic.class_names()[self.class_of(demographic)]
    }

    /// Checks birth year and follower count (when present) against the derived labels.
    pub fn check_consistency(&self, celebrity: &str, config: &LabelConfig) -> Result<(), CorpusError> {
        let inconsistent = |detail: String| CorpusError::LabelConsistency { celebrity: celebrity.into(), detail };
        if let Some(year) = self.birth_year {
            let age = config.reference_year - year;
            let group = age_group_for_age(age, config.age_boundary)
                .map_err(|e| inconsistent(format!("birth year {year}: {e}")))?;
            if group != self.age_group {
                return Err(inconsistent(format!(
                    "birth year {year} (age {age}) maps to {group}, labelled {}",
                    self.age_group
                )));
            }
        }
        if let Some(count) = self.follower_count {
            let fame = map_fame(count);
            if fame != self.fame {
                return Err(inconsistent(format!("follower count {count} maps to {fame}, labelled {}", self.fame)));
            }
        }
        Ok(())
    }
}

/// Settings that govern record assembly and label derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub reference_year: i32,
    pub age_boundary: AgeBoundary,
    pub followers_per_celebrity: usize,
}

impl LabelConfig {
    pub fn new(reference_year: i32) -> Self {
        Self { reference_year, age_boundary: AgeBoundary::Lower, followers_per_celebrity: 10 }
    }

    pub fn canonical(&self) -> String {
        format!(
            "labels.reference_year={}\nlabels.age_boundary={}\nlabels.followers_per_celebrity={}\n",
            self.reference_year,
            self.age_boundary.name(),
            self.followers_per_celebrity
        )
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.canonical())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CelebrityRecord {
    pub celebrity_id: String,
    pub labels: CelebrityLabels,
    pub feeds: Vec<FollowerFeed>,
}

impl CelebrityRecord {
    pub fn tweet_count(&self) -> usize {
        self.feeds.iter().map(|f| f.records.len()).sum()
    }
}

/// Combines labels and follower feeds into one record, keeping feed order.
pub fn assemble_celebrity(
    id: impl Into<String>,
    labels: CelebrityLabels,
    feeds: Vec<FollowerFeed>,
    config: &LabelConfig,
) -> Result<CelebrityRecord, CorpusError> {
    let celebrity_id = id.into();
    if feeds.len() != config.followers_per_celebrity {
        return Err(CorpusError::Cardinality {
            celebrity: celebrity_id,
            expected: config.followers_per_celebrity,
            found: feeds.len(),
        });
    }
    labels.check_consistency(&celebrity_id, config)?;
    Ok(CelebrityRecord { celebrity_id, labels, feeds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    records: Vec<CelebrityRecord>,
    config_fingerprint: String,
}

impl Corpus {
    pub fn new(records: Vec<CelebrityRecord>, config_fingerprint: impl Into<String>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for record in &records {
            if !seen.insert(record.celebrity_id.as_str()) {
                return Err(CorpusError::DuplicateCelebrity(record.celebrity_id.clone()));
            }
        }
        Ok(Self { records, config_fingerprint: config_fingerprint.into() })
    }

    pub fn records(&self) -> &[CelebrityRecord] {
        &self.records
    }

    pub fn config_fingerprint(&self) -> &str {
        &self.config_fingerprint
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tweet_count(&self) -> usize {
        self.records.iter().map(CelebrityRecord::tweet_count).sum()
    }

    pub fn get(&self, celebrity_id: &str) -> Option<&CelebrityRecord> {
        self.records.iter().find(|r| r.celebrity_id == celebrity_id)
    }

    pub fn into_records(self) -> Vec<CelebrityRecord> {
        self.records
    }
}
