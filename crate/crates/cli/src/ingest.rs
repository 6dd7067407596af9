//! Follower exports and labels CSV parsing, and directory ingestion.
//!
//! Layout: `FEEDS/<celebrity_id>/<follower_handle>.csv`, one export per
//! follower, plus a labels CSV with one row per celebrity.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use celebprof_core::corpus::{assemble_celebrity, CelebrityRecord, Corpus, FollowerFeed, LabelConfig};
use celebprof_core::{CelebrityLabels, Gender, MediaType, Occupation, RawTweetRecord};

use crate::error::{io_error, CliError, Result};

/// Columns of a follower export, in canonical order.
pub const TWEET_COLUMNS: [&str; 9] = [
    "tweet_id",
    "tweet_text",
    "author_handle",
    "timestamp",
    "is_retweet",
    "language_tag",
    "urls",
    "hashtags",
    "media_type",
];

/// Columns of the labels file.
pub const LABEL_COLUMNS: [&str; 5] = ["celebrity_id", "birth_year", "gender", "occupation", "follower_count"];

/// Share of failing rows above which a whole export is rejected.
pub const MAX_ROW_FAILURE_RATE: f64 = 0.10;

/// A data row that could not be parsed. `row` counts data rows from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedExport {
    pub records: Vec<RawTweetRecord>,
    pub row_errors: Vec<RowError>,
}

fn column_positions(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}') == *name)
                .ok_or_else(|| CliError::data(format!("schema error: missing column `{name}`")))
        })
        .collect()
}

fn optional(field: &str) -> Option<String> {
    let f = field.trim();
    (!f.is_empty()).then(|| f.to_string())
}

fn split_list(field: &str) -> Vec<String> {
    field.split('|').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn parse_bool(field: &str) -> std::result::Result<bool, String> {
    match field.trim().to_ascii_lowercase().as_str() {
        "" | "false" | "0" | "no" => Ok(false),
        "true" | "1" | "yes" => Ok(true),
        other => Err(format!("is_retweet: `{other}` is not a boolean")),
    }
}

fn parse_tweet(row: &csv::StringRecord, cols: &[usize]) -> std::result::Result<RawTweetRecord, String> {
    let get = |i: usize| row.get(cols[i]).ok_or_else(|| format!("missing field `{}`", TWEET_COLUMNS[i]));
    let media = get(8)?;
    let record = RawTweetRecord {
        tweet_id: get(0)?.trim().to_string(),
        tweet_text: get(1)?.to_string(),
        author_handle: get(2)?.trim().to_string(),
        timestamp: optional(get(3)?),
        is_retweet: parse_bool(get(4)?)?,
        language_tag: optional(get(5)?),
        urls: split_list(get(6)?),
        hashtags: split_list(get(7)?),
        media_type: MediaType::parse(media).ok_or_else(|| format!("media_type: unknown value `{media}`"))?,
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

/// Parses one follower export. Bad rows are collected; the export fails
/// only when more than [`MAX_ROW_FAILURE_RATE`] of its rows are bad.
pub fn parse_follower_export<R: Read>(input: R) -> Result<ParsedExport> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers().map_err(|e| CliError::data(format!("unreadable header: {e}")))?.clone();
    let cols = column_positions(&headers, &TWEET_COLUMNS)?;
    let mut records = Vec::new();
    let mut row_errors = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let parsed = row.map_err(|e| e.to_string()).and_then(|r| parse_tweet(&r, &cols));
        match parsed {
            Ok(r) => records.push(r),
            Err(message) => row_errors.push(RowError { row: i + 1, message }),
        }
    }
    let total = records.len() + row_errors.len();
    if total > 0 && row_errors.len() as f64 > MAX_ROW_FAILURE_RATE * total as f64 {
        let first = &row_errors[0];
        return Err(CliError::data(format!(
            "{} of {total} rows failed to parse (first: row {}: {})",
            row_errors.len(),
            first.row,
            first.message
        )));
    }
    Ok(ParsedExport { records, row_errors })
}

/// One row of the labels file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub celebrity_id: String,
    pub birth_year: i32,
    pub gender: Gender,
    pub occupation: Occupation,
    pub follower_count: u64,
}

/// Parses the labels file. Every row must be valid.
pub fn parse_labels<R: Read>(input: R) -> Result<Vec<LabelRow>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers().map_err(|e| CliError::data(format!("unreadable header: {e}")))?.clone();
    let cols = column_positions(&headers, &LABEL_COLUMNS)?;
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let at = |m: String| CliError::data(format!("labels row {}: {m}", i + 1));
        let row = row.map_err(|e| at(e.to_string()))?;
        let get = |c: usize| {
            row.get(cols[c]).map(str::trim).ok_or_else(|| at(format!("missing field `{}`", LABEL_COLUMNS[c])))
        };
        let celebrity_id = get(0)?.to_string();
        if celebrity_id.is_empty() {
            return Err(at("empty celebrity_id".into()));
        }
        rows.push(LabelRow {
            celebrity_id,
            birth_year: get(1)?.parse().map_err(|_| at(format!("bad birth_year `{}`", get(1).unwrap_or(""))))?,
            gender: get(2)?.parse().map_err(|e| at(format!("{e}")))?,
            occupation: get(3)?.parse().map_err(|e| at(format!("{e}")))?,
            follower_count: get(4)?
                .parse()
                .map_err(|_| at(format!("bad follower_count `{}`", get(4).unwrap_or(""))))?,
        });
    }
    Ok(rows)
}

/// Row errors tolerated while ingesting, with the file they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub file: PathBuf,
    pub row: usize,
    pub message: String,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| io_error(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    Ok(entries)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| io_error(path, e))
}

/// Reads the follower exports of one celebrity directory, in file-name order.
pub fn read_feeds(dir: &Path, warnings: &mut Vec<IngestWarning>) -> Result<Vec<FollowerFeed>> {
    let mut feeds = Vec::new();
    for path in sorted_entries(dir)? {
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let handle = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let parsed = parse_follower_export(open(&path)?).map_err(|e| e.at(&path))?;
        warnings.extend(parsed.row_errors.into_iter().map(|r| IngestWarning {
            file: path.clone(),
            row: r.row,
            message: r.message,
        }));
        let feed = FollowerFeed::new(handle, parsed.records).map_err(|e| CliError::data(e.to_string()).at(&path))?;
        feeds.push(feed);
    }
    Ok(feeds)
}

/// Builds a corpus from a feeds directory and a labels file.
pub fn ingest_directory(
    feeds_dir: &Path,
    labels_path: &Path,
    config: &LabelConfig,
) -> Result<(Corpus, Vec<IngestWarning>)> {
    let labels = parse_labels(open(labels_path)?).map_err(|e| e.at(labels_path))?;
    if !feeds_dir.is_dir() {
        return Err(CliError::config(format!("feeds directory {} does not exist", feeds_dir.display())).at(feeds_dir));
    }
    let mut by_id = BTreeMap::new();
    for row in labels {
        let id = row.celebrity_id.clone();
        if by_id.insert(id.clone(), row).is_some() {
            return Err(CliError::data(format!("duplicate celebrity `{id}` in labels")).at(labels_path));
        }
    }
    for path in sorted_entries(feeds_dir)? {
        if path.is_dir() {
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
            if !by_id.contains_key(name) {
                return Err(CliError::data(format!("feeds for `{name}` have no labels row")).at(&path));
            }
        }
    }
    let mut warnings = Vec::new();
    let mut records: Vec<CelebrityRecord> = Vec::with_capacity(by_id.len());
    for (id, row) in &by_id {
        let dir = feeds_dir.join(id);
        if !dir.is_dir() {
            return Err(CliError::data(format!("no feeds directory for `{id}`")).at(&dir));
        }
        let feeds = read_feeds(&dir, &mut warnings)?;
        let labels =
            CelebrityLabels::from_attributes(row.birth_year, row.follower_count, row.gender, row.occupation, config)
                .map_err(|e| CliError::data(format!("`{id}`: {e}")).at(labels_path))?;
        let record = assemble_celebrity(id.clone(), labels, feeds, config)
            .map_err(|e| CliError::data(e.to_string()).at(&dir))?;
        records.push(record);
    }
    let corpus = Corpus::new(records, config.fingerprint()).map_err(|e| CliError::data(e.to_string()))?;
    Ok((corpus, warnings))
}

/// Writes one follower export in canonical column order.
pub fn write_follower_export<W: std::io::Write>(out: W, records: &[RawTweetRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::data(format!("cannot write export: {e}"));
    writer.write_record(TWEET_COLUMNS).map_err(fail)?;
    for r in records {
        writer
            .write_record([
                r.tweet_id.as_str(),
                r.tweet_text.as_str(),
                r.author_handle.as_str(),
                r.timestamp.as_deref().unwrap_or(""),
                if r.is_retweet { "true" } else { "false" },
                r.language_tag.as_deref().unwrap_or(""),
                &r.urls.join("|"),
                &r.hashtags.join("|"),
                r.media_type.name(),
            ])
            .map_err(fail)?;
    }
    writer.flush().map_err(|e| CliError::data(format!("cannot write export: {e}")))
}

/// Writes a corpus out as a feeds directory plus labels file.
pub fn export_corpus(corpus: &Corpus, feeds_dir: &Path, labels_path: &Path) -> Result<()> {
    use crate::error::write_error;
    let mut labels = csv::Writer::from_path(labels_path)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", labels_path.display())))?;
    let fail = |e: csv::Error| CliError::data(format!("cannot write labels: {e}"));
    labels.write_record(LABEL_COLUMNS).map_err(fail)?;
    for record in corpus.records() {
        let l = &record.labels;
        let (Some(year), Some(count)) = (l.birth_year, l.follower_count) else {
            return Err(CliError::data(format!("`{}` lacks birth year or follower count", record.celebrity_id)));
        };
        labels
            .write_record([
                record.celebrity_id.clone(),
                year.to_string(),
                l.gender.name().to_string(),
                l.occupation.name().to_string(),
                count.to_string(),
            ])
            .map_err(fail)?;
        let dir = feeds_dir.join(&record.celebrity_id);
        std::fs::create_dir_all(&dir).map_err(|e| write_error(&dir, e))?;
        for feed in &record.feeds {
            let path = dir.join(format!("{}.csv", feed.follower_handle));
            let file = std::fs::File::create(&path).map_err(|e| write_error(&path, e))?;
            write_follower_export(file, &feed.records)?;
        }
    }
    labels.flush().map_err(|e| write_error(labels_path, e))
}
