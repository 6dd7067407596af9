//! Seeded synthetic corpora shaped like the real collection: 100 celebrities,
//! ten followers each, at least twenty Urdu tweets per follower.
//!
//! Each demographic class owns one marker token. With signal strength `s`, every
//! tweet carries the marker of each of its celebrity's classes independently with
//! probability `s`; everything else in the tweet is drawn from a Zipf-distributed
//! filler vocabulary that does not depend on the labels.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use serde::{Deserialize, Serialize};

use super::labels::{fame_follower_range, AgeBoundary};
use super::{
    assemble_celebrity, AgeGroup, CelebrityLabels, Corpus, CorpusError, Demographic, Fame, FollowerFeed, Gender,
    LabelConfig, MediaType, Occupation, RawTweetRecord,
};
use crate::fingerprint::fingerprint;
use crate::rng;

/// Urdu letters left unchanged by normalization, so generated words stay distinct.
const LETTERS: &[char] = &[
    '\u{0627}', '\u{0628}', '\u{067E}', '\u{062A}', '\u{0679}', '\u{062B}', '\u{062C}', '\u{0686}', '\u{062D}',
    '\u{062E}', '\u{062F}', '\u{0688}', '\u{0630}', '\u{0631}', '\u{0691}', '\u{0632}', '\u{0698}', '\u{0633}',
    '\u{0634}', '\u{0635}', '\u{0636}', '\u{0637}', '\u{0638}', '\u{0639}', '\u{063A}', '\u{0641}', '\u{0642}',
    '\u{06A9}', '\u{06AF}', '\u{0644}', '\u{0645}', '\u{0646}', '\u{0648}', '\u{06CC}', '\u{06C1}', '\u{06D2}',
];

const MARKER_STEMS: [&str; 4] = ["نشانا", "نشانب", "نشانپ", "نشانت"];
const MARKER_SUFFIXES: [char; 4] = ['ج', 'چ', 'ح', 'خ'];
const EMOJI: &[&str] = &["😀", "🎉", "❤", "👍", "🔥"];
const ENGLISH: &[&str] = &["great match today", "watch the new show", "breaking news now", "thank you all"];

/// Total number of marker tokens (one per class of every demographic).
pub const MARKER_COUNT: usize = 3 + 2 + 4 + 3;

/// The marker token of class `class` of `demographic`.
pub fn marker_token(demographic: Demographic, class: usize) -> String {
    format!("{}{}", MARKER_STEMS[demographic.index()], MARKER_SUFFIXES[class])
}

/// Per-demographic class weights, in canonical class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistributions {
    pub age: Vec<f64>,
    pub gender: Vec<f64>,
    pub occupation: Vec<f64>,
    pub fame: Vec<f64>,
}

impl Default for LabelDistributions {
    fn default() -> Self {
        Self { age: vec![1.0; 3], gender: vec![1.0; 2], occupation: vec![1.0; 4], fame: vec![1.0; 3] }
    }
}

impl LabelDistributions {
    pub fn weights(&self, demographic: Demographic) -> &[f64] {
        match demographic {
            Demographic::Occupation => &self.occupation,
            Demographic::Age => &self.age,
            Demographic::Gender => &self.gender,
            Demographic::Fame => &self.fame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_celebrities: usize,
    pub followers_per_celebrity: usize,
    pub min_tweets: usize,
    pub vocab_size: usize,
    pub class_signal_strength: f64,
    pub seed: u64,
    /// Year against which synthetic birth years are generated.
    pub reference_year: i32,
    pub label_distributions: LabelDistributions,
}

impl SynthSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            n_celebrities: 100,
            followers_per_celebrity: 10,
            min_tweets: 20,
            vocab_size: 2000,
            class_signal_strength: 0.5,
            seed,
            reference_year: 2022,
            label_distributions: LabelDistributions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |msg: String| Err(CorpusError::InvalidSynthSpec(msg));
        if self.n_celebrities == 0 || self.followers_per_celebrity == 0 || self.min_tweets == 0 {
            return bad("counts must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.class_signal_strength) {
            return bad(format!("class_signal_strength {} outside [0, 1]", self.class_signal_strength));
        }
        if self.vocab_size <= MARKER_COUNT {
            return bad(format!("vocab_size {} must exceed the {MARKER_COUNT} marker tokens", self.vocab_size));
        }
        for d in Demographic::ALL {
            let w = self.label_distributions.weights(d);
            if w.len() != d.n_classes() {
                return bad(format!("{d} distribution needs {} weights, got {}", d.n_classes(), w.len()));
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                return bad(format!("{d} distribution must be non-negative with positive sum"));
            }
        }
        Ok(())
    }

    pub fn canonical(&self) -> String {
        let d = &self.label_distributions;
        format!(
            "synth.n_celebrities={}\nsynth.followers_per_celebrity={}\nsynth.min_tweets={}\n\
             synth.vocab_size={}\nsynth.class_signal_strength={:?}\nsynth.seed={}\n\
             synth.reference_year={}\nsynth.dist.age={:?}\nsynth.dist.gender={:?}\n\
             synth.dist.occupation={:?}\nsynth.dist.fame={:?}\n",
            self.n_celebrities,
            self.followers_per_celebrity,
            self.min_tweets,
            self.vocab_size,
            self.class_signal_strength,
            self.seed,
            self.reference_year,
            d.age,
            d.gender,
            d.occupation,
            d.fame
        )
    }

    pub fn label_config(&self) -> LabelConfig {
        LabelConfig {
            reference_year: self.reference_year,
            age_boundary: AgeBoundary::Lower,
            followers_per_celebrity: self.followers_per_celebrity,
        }
    }
}

fn filler_words(rng: &mut rng::Rng, count: usize) -> Vec<String> {
    let mut reserved: BTreeSet<String> = BTreeSet::new();
    for d in Demographic::ALL {
        for c in 0..d.n_classes() {
            reserved.insert(marker_token(d, c));
        }
    }
    let mut words = Vec::with_capacity(count);
    while words.len() < count {
        let len = rng.gen_range(2..=6);
        let word: String = (0..len).map(|_| LETTERS[rng.gen_range(0..LETTERS.len())]).collect();
        if reserved.insert(word.clone()) {
            words.push(word);
        }
    }
    words
}

struct TweetWriter<'a> {
    fillers: &'a [String],
    zipf: WeightedIndex<f64>,
    signal: f64,
}

impl TweetWriter<'_> {
    fn urdu_tweet(&self, rng: &mut rng::Rng, labels: &CelebrityLabels) -> String {
        let n_words = rng.gen_range(6..=14);
        let mut words: Vec<String> = (0..n_words).map(|_| self.fillers[self.zipf.sample(rng)].clone()).collect();
        for d in Demographic::ALL {
            if rng.gen_bool(self.signal) {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, marker_token(d, labels.class_of(d)));
            }
        }
        if rng.gen_bool(0.15) {
            let at = rng.gen_range(0..words.len());
            words[at] = format!("#{}", words[at]);
        }
        if rng.gen_bool(0.1) {
            words.insert(0, format!("@user{}", rng.gen_range(0..1000)));
        }
        if rng.gen_bool(0.1) {
            words.push(format!("https://t.co/{}", rng.gen_range(10_000..99_999)));
        }
        if rng.gen_bool(0.15) {
            words.push(String::from(EMOJI[rng.gen_range(0..EMOJI.len())]));
        }
        let mut text = words.join(" ");
        match rng.gen_range(0..10) {
            0..=1 => text.push('۔'),
            2 => text.push('؟'),
            _ => {}
        }
        text
    }
}

/// Generates a labelled corpus. The output is a pure function of `spec`.
pub fn generate_synthetic_corpus(spec: &SynthSpec) -> Result<Corpus, CorpusError> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let fillers = filler_words(&mut rng, spec.vocab_size - MARKER_COUNT);
    let zipf = WeightedIndex::new((0..fillers.len()).map(|r| 1.0 / (r as f64 + 1.0))).expect("positive zipf weights");
    let writer = TweetWriter { fillers: &fillers, zipf, signal: spec.class_signal_strength };
    let label_config = spec.label_config();

    let pickers: Vec<WeightedIndex<f64>> = Demographic::ALL
        .iter()
        .map(|&d| WeightedIndex::new(spec.label_distributions.weights(d)).expect("validated weights"))
        .collect();

    let mut records = Vec::with_capacity(spec.n_celebrities);
    for ci in 0..spec.n_celebrities {
        let mut draw = |d: Demographic| pickers[d.index()].sample(&mut rng);
        let occupation = Occupation::ALL[draw(Demographic::Occupation)];
        let age_group = AgeGroup::ALL[draw(Demographic::Age)];
        let gender = Gender::ALL[draw(Demographic::Gender)];
        let fame = Fame::ALL[draw(Demographic::Fame)];
        let (lo, hi) = label_config.age_boundary.range(age_group);
        let birth_year = spec.reference_year - rng.gen_range(lo..=hi);
        let (flo, fhi) = fame_follower_range(fame);
        let follower_count = rng.gen_range(flo..=fhi);
        let labels = CelebrityLabels {
            age_group,
            gender,
            occupation,
            fame,
            birth_year: Some(birth_year),
            follower_count: Some(follower_count),
        };

        let celebrity_id = format!("celeb-{ci:04}");
        let mut feeds = Vec::with_capacity(spec.followers_per_celebrity);
        for fi in 0..spec.followers_per_celebrity {
            let handle = format!("c{ci:04}_f{fi:02}");
            let originals = spec.min_tweets + rng.gen_range(0..=5);
            let retweets = rng.gen_range(0..=3);
            let english = rng.gen_range(0..=2);
            let mut texts: Vec<(String, bool, &str)> = Vec::new();
            for _ in 0..originals {
                texts.push((writer.urdu_tweet(&mut rng, &labels), false, "ur"));
            }
            for _ in 0..retweets {
                let inner = writer.urdu_tweet(&mut rng, &labels);
                texts.push((format!("RT @user{}: {inner}", rng.gen_range(0..1000)), true, "ur"));
            }
            for _ in 0..english {
                texts.push((String::from(ENGLISH[rng.gen_range(0..ENGLISH.len())]), false, "en"));
            }
            texts.shuffle(&mut rng);
            let tweets = texts
                .into_iter()
                .enumerate()
                .map(|(ti, (text, is_retweet, lang))| RawTweetRecord {
                    tweet_id: format!("{ci}{fi:02}{ti:04}"),
                    tweet_text: text,
                    author_handle: handle.clone(),
                    timestamp: Some(format!(
                        "2022-{:02}-{:02}T{:02}:{:02}:00Z",
                        1 + ti % 12,
                        1 + (ti * 7 + fi) % 28,
                        (ti * 5 + ci) % 24,
                        (ti * 13) % 60
                    )),
                    is_retweet,
                    language_tag: Some(String::from(lang)),
                    urls: Vec::new(),
                    hashtags: Vec::new(),
                    media_type: MediaType::Text,
                })
                .collect();
            feeds.push(FollowerFeed::new(handle, tweets)?);
        }
        records.push(assemble_celebrity(celebrity_id, labels, feeds, &label_config)?);
    }
    Corpus::new(records, fingerprint(&spec.canonical()))
}
