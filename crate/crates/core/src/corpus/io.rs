use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::record::{TweetRecord, UserProfile};
use crate::error::{Error, Result};

/// What to do with a line that fails to parse or validate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalformedPolicy {
    #[default]
    SkipAndLog,
    Abort,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub policy: MalformedPolicy,
    /// When set, tweets must have `day < window_length`.
    pub window_length: Option<u32>,
}

impl LoadOptions {
    pub fn strict() -> Self {
        LoadOptions {
            policy: MalformedPolicy::Abort,
            window_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejected {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub rejected: Vec<Rejected>,
}

/// A record type that can be read from a JSON-lines file.
pub trait CorpusRecord: DeserializeOwned {
    fn key(&self) -> &str;
    fn check(&self, opts: &LoadOptions) -> std::result::Result<(), String>;
}

impl CorpusRecord for TweetRecord {
    fn key(&self) -> &str {
        &self.id
    }

    fn check(&self, opts: &LoadOptions) -> std::result::Result<(), String> {
        self.validate(opts.window_length)
    }
}

impl CorpusRecord for UserProfile {
    fn key(&self) -> &str {
        &self.user_id
    }

    fn check(&self, _: &LoadOptions) -> std::result::Result<(), String> {
        if self.user_id.is_empty() {
            Err("empty user_id".into())
        } else {
            Ok(())
        }
    }
}

/// Reads one JSON object per line. Blank lines are ignored, duplicate keys
/// always abort, and other bad lines follow `opts.policy`.
pub fn read_jsonl<T: CorpusRecord>(reader: impl BufRead, opts: &LoadOptions) -> Result<Loaded<T>> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            context: format!("line {lineno}"),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.check(opts).map(|_| r));
        match parsed {
            Ok(rec) => {
                if !seen.insert(rec.key().to_string()) {
                    return Err(Error::DuplicateId {
                        id: rec.key().to_string(),
                        line: lineno,
                    });
                }
                records.push(rec);
            }
            Err(message) => match opts.policy {
                MalformedPolicy::Abort => return Err(Error::Record { line: lineno, message }),
                MalformedPolicy::SkipAndLog => {
                    warn!("skipping line {lineno}: {message}");
                    rejected.push(Rejected { line: lineno, message });
                }
            },
        }
    }
    if !rejected.is_empty() {
        warn!("{} malformed record(s) skipped", rejected.len());
    }
    Ok(Loaded { records, rejected })
}

pub fn load_tweets(path: &Path, opts: &LoadOptions) -> Result<Loaded<TweetRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(f), opts)
}

pub fn load_users(path: &Path, opts: &LoadOptions) -> Result<Loaded<UserProfile>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(f), opts)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One keyword per line; blank lines and `#` comments skipped.
pub fn load_keywords(path: &Path) -> Result<Vec<String>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_lines(&src))
}

pub(crate) fn parse_lines(src: &str) -> Vec<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}
