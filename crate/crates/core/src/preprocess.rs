//! Tweet cleaning pipeline: retweet filter → language filter → clean →
//! normalize → tokenize, then one concatenated document per celebrity.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::{CelebrityRecord, FollowerFeed, RawTweetRecord};
use crate::fingerprint::fingerprint;

/// Inclusive code-point interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRange {
    pub start: u32,
    pub end: u32,
}

impl CodeRange {
    pub const fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, c: char) -> bool {
        (self.start..=self.end).contains(&(c as u32))
    }
}

/// Arabic, Arabic Presentation Forms-A and Presentation Forms-B.
pub const DEFAULT_URDU_RANGES: [CodeRange; 3] =
    [CodeRange::new(0x0600, 0x06FF), CodeRange::new(0xFB50, 0xFDFF), CodeRange::new(0xFE70, 0xFEFF)];

/// Urdu full stop, Arabic comma, Arabic question mark.
pub const URDU_PUNCTUATION: [char; 3] = ['\u{06D4}', '\u{060C}', '\u{061F}'];

const EMOJI_RANGES: [CodeRange; 3] =
    [CodeRange::new(0x1F300, 0x1FAFF), CodeRange::new(0x2600, 0x27BF), CodeRange::new(0xFE00, 0xFE0F)];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreprocessError {
    #[error("urdu_ratio_threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("urdu ranges must be sorted, non-overlapping and non-empty")]
    Ranges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub urdu_ratio_threshold: f64,
    pub urdu_ranges: Vec<CodeRange>,
    pub strip_diacritics: bool,
    pub keep_digits: bool,
    pub min_tweets: usize,
    /// Keep celebrities whose document ends up with zero tokens.
    pub keep_empty_documents: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            urdu_ratio_threshold: 0.5,
            urdu_ranges: DEFAULT_URDU_RANGES.to_vec(),
            strip_diacritics: true,
            keep_digits: false,
            min_tweets: 20,
            keep_empty_documents: false,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if !(0.0..=1.0).contains(&self.urdu_ratio_threshold) {
            return Err(PreprocessError::Threshold(self.urdu_ratio_threshold));
        }
        let sorted = self.urdu_ranges.windows(2).all(|w| w[0].end < w[1].start);
        if self.urdu_ranges.is_empty() || !sorted || self.urdu_ranges.iter().any(|r| r.start > r.end) {
            return Err(PreprocessError::Ranges);
        }
        Ok(())
    }

    fn in_urdu(&self, c: char) -> bool {
        self.urdu_ranges.iter().any(|r| r.contains(c))
    }

    pub fn canonical(&self) -> String {
        let mut ranges = String::new();
        for (i, r) in self.urdu_ranges.iter().enumerate() {
            if i > 0 {
                ranges.push(',');
            }
            ranges.push_str(&alloc::format!("{:04X}-{:04X}", r.start, r.end));
        }
        alloc::format!(
            "preprocess.urdu_ratio_threshold={:?}\npreprocess.urdu_ranges={}\n\
             preprocess.strip_diacritics={}\npreprocess.keep_digits={}\npreprocess.min_tweets={}\n\
             preprocess.keep_empty_documents={}\n",
            self.urdu_ratio_threshold,
            ranges,
            self.strip_diacritics,
            self.keep_digits,
            self.min_tweets,
            self.keep_empty_documents
        )
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.canonical())
    }
}

/// Cleaned, normalized token stream of one celebrity's followers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanDocument {
    pub celebrity_id: String,
    pub tokens: Vec<String>,
    /// `(token_count, char_count)` per retained tweet.
    pub per_tweet_lengths: Vec<(usize, usize)>,
}

/// True if the flag is set or the text starts with `RT @`.
pub fn is_retweet(record: &RawTweetRecord) -> bool {
    record.is_retweet || record.tweet_text.trim_start().starts_with("RT @")
}

/// Share of letters that fall inside the default Urdu ranges.
pub fn urdu_ratio(text: &str) -> f64 {
    urdu_ratio_in(text, &DEFAULT_URDU_RANGES)
}

/// Share of letters that fall inside `ranges`; 0 when there are no letters.
pub fn urdu_ratio_in(text: &str, ranges: &[CodeRange]) -> f64 {
    let (mut urdu, mut letters) = (0usize, 0usize);
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        letters += 1;
        if ranges.iter().any(|r| r.contains(c)) {
            urdu += 1;
        }
    }
    if letters == 0 {
        0.0
    } else {
        urdu as f64 / letters as f64
    }
}

fn is_link(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Drops URLs and @mentions and strips `#` from hashtags, word by word.
pub fn strip_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if is_link(word) || word.starts_with('@') {
            continue;
        }
        let word = word.trim_start_matches('#');
        if word.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_emoji(c: char) -> bool {
    EMOJI_RANGES.iter().any(|r| r.contains(c))
}

fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{0660}'..='\u{0669}').contains(&c) || ('\u{06F0}'..='\u{06F9}').contains(&c)
}

/// Removes links, mentions, hashtag marks, emoji and every character outside the
/// Urdu alphabet, Urdu punctuation and (optionally) digits; collapses whitespace.
pub fn clean_tweet(text: &str, config: &PreprocessConfig) -> String {
    let stripped = strip_links(text);
    let mut out = String::with_capacity(stripped.len());
    let mut pending_space = false;
    for c in stripped.chars() {
        let keep = if is_digit(c) {
            config.keep_digits
        } else {
            URDU_PUNCTUATION.contains(&c) || (config.in_urdu(c) && c.is_alphabetic())
        };
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else if is_emoji(c) || matches!(c, '\u{200C}' | '\u{200D}') {
            // joiners and emoji vanish without splitting the surrounding word
        } else {
            pending_space = true;
        }
    }
    out
}

fn is_diacritic(c: char) -> bool {
    ('\u{064B}'..='\u{0652}').contains(&c) || c == '\u{0670}'
}

/// Canonical Urdu letter forms: Farsi yeh, keheh, word-final heh goal; optional
/// diacritic stripping. Idempotent.
pub fn normalize_urdu(text: &str, strip_diacritics: bool) -> String {
    let chars: Vec<char> = text.chars().filter(|&c| !(strip_diacritics && is_diacritic(c))).collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        let mapped = match c {
            '\u{064A}' | '\u{0649}' => '\u{06CC}',
            '\u{0643}' => '\u{06A9}',
            '\u{0647}' => {
                // diacritics attached to the heh do not end the word
                let next = chars[i + 1..].iter().find(|&&n| !is_diacritic(n));
                if next.is_none_or(|n| !n.is_alphabetic()) {
                    '\u{06C1}'
                } else {
                    c
                }
            }
            _ => c,
        };
        out.push(mapped);
    }
    out
}

/// Whitespace split with Urdu punctuation emitted as separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if URDU_PUNCTUATION.contains(&c) {
                if !current.is_empty() {
                    tokens.push(core::mem::take(&mut current));
                }
                tokens.push(String::from(c));
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Why a tweet was or was not kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TweetFate {
    Retweet,
    ForeignLanguageTag,
    LowUrduRatio,
    Retained,
}

/// Runs the per-tweet pipeline. Returns the tokens of a retained tweet.
pub fn process_tweet(record: &RawTweetRecord, config: &PreprocessConfig) -> Result<Vec<String>, TweetFate> {
    if is_retweet(record) {
        return Err(TweetFate::Retweet);
    }
    if let Some(tag) = &record.language_tag {
        if !tag.trim().eq_ignore_ascii_case("ur") {
            return Err(TweetFate::ForeignLanguageTag);
        }
    }
    process_text(&record.tweet_text, config).ok_or(TweetFate::LowUrduRatio)
}

/// Language filter, cleaning, normalization and tokenization of raw text.
/// `None` when the text fails the Urdu-ratio test.
pub fn process_text(text: &str, config: &PreprocessConfig) -> Option<Vec<String>> {
    // ratio is measured once links and mentions are gone, before the alphabet filter
    if urdu_ratio_in(&strip_links(text), &config.urdu_ranges) < config.urdu_ratio_threshold {
        return None;
    }
    let cleaned = clean_tweet(text, config);
    let tokens = tokenize(&normalize_urdu(&cleaned, config.strip_diacritics));
    (!tokens.is_empty()).then_some(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeedRetention {
    pub follower_handle: String,
    pub total: usize,
    pub retweets: usize,
    pub foreign_language: usize,
    pub low_urdu_ratio: usize,
    pub retained: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CelebrityRetention {
    pub celebrity_id: String,
    pub feeds: Vec<FeedRetention>,
    /// Some feed retained fewer than `min_tweets` tweets.
    pub below_min_tweets: bool,
    /// The concatenated document has no tokens.
    pub empty_document: bool,
    /// Left out of the document list handed to modelling.
    pub excluded: bool,
}

impl CelebrityRetention {
    pub fn flagged(&self) -> bool {
        self.below_min_tweets || self.empty_document
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RetentionReport {
    /// One entry per celebrity, ordered by celebrity id.
    pub celebrities: Vec<CelebrityRetention>,
}

impl RetentionReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CelebrityRetention> {
        self.celebrities.iter().filter(|c| c.flagged())
    }

    pub fn excluded_ids(&self) -> Vec<&str> {
        self.celebrities.iter().filter(|c| c.excluded).map(|c| c.celebrity_id.as_str()).collect()
    }
}

/// Cleans one celebrity. Returns the document and its retention entry.
pub fn preprocess_celebrity(
    record: &CelebrityRecord,
    config: &PreprocessConfig,
) -> (CleanDocument, CelebrityRetention) {
    preprocess_feeds(&record.celebrity_id, &record.feeds, config)
}

/// Cleans the feeds of one (possibly unlabelled) celebrity.
pub fn preprocess_feeds(
    celebrity_id: &str,
    follower_feeds: &[FollowerFeed],
    config: &PreprocessConfig,
) -> (CleanDocument, CelebrityRetention) {
    let mut tokens = Vec::new();
    let mut lengths = Vec::new();
    let mut feeds = Vec::with_capacity(follower_feeds.len());
    for feed in follower_feeds {
        let mut stats = FeedRetention {
            follower_handle: feed.follower_handle.clone(),
            total: feed.records.len(),
            ..FeedRetention::default()
        };
        for tweet in &feed.records {
            match process_tweet(tweet, config) {
                Ok(tweet_tokens) => {
                    stats.retained += 1;
                    let chars = tweet_tokens.iter().map(|t| t.chars().count()).sum();
                    lengths.push((tweet_tokens.len(), chars));
                    tokens.extend(tweet_tokens);
                }
                Err(TweetFate::Retweet) => stats.retweets += 1,
                Err(TweetFate::ForeignLanguageTag) => stats.foreign_language += 1,
                Err(TweetFate::LowUrduRatio | TweetFate::Retained) => stats.low_urdu_ratio += 1,
            }
        }
        feeds.push(stats);
    }
    let below_min_tweets = feeds.iter().any(|f| f.retained < config.min_tweets);
    let empty_document = tokens.is_empty();
    let retention = CelebrityRetention {
        celebrity_id: celebrity_id.into(),
        feeds,
        below_min_tweets,
        empty_document,
        excluded: empty_document && !config.keep_empty_documents,
    };
    let doc = CleanDocument { celebrity_id: celebrity_id.into(), tokens, per_tweet_lengths: lengths };
    (doc, retention)
}

/// Cleans every celebrity. Documents and report entries come back in
/// celebrity-id order; excluded celebrities have no document.
pub fn preprocess_corpus(
    records: &[CelebrityRecord],
    config: &PreprocessConfig,
) -> (Vec<CleanDocument>, RetentionReport) {
    let mut pairs: Vec<_> = records.iter().map(|r| preprocess_celebrity(r, config)).collect();
    pairs.sort_by(|a, b| a.0.celebrity_id.cmp(&b.0.celebrity_id));
    let mut docs = Vec::with_capacity(pairs.len());
    let mut report = RetentionReport::default();
    for (doc, retention) in pairs {
        if !retention.excluded {
            docs.push(doc);
        }
        report.celebrities.push(retention);
    }
    (docs, report)
}
