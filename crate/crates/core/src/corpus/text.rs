//! Tweet and bio text normalization.
//!
//! The base pipeline lowercases, drops `@mentions` and URLs, then replaces
//! every non-alphabetic character with a separator. The lexical variant also
//! applies a lemma dictionary and drops tokens shorter than three characters.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tweet_id: String,
    pub tokens: Vec<String>,
}

/// Token to lemma lookup, loaded from a `token<TAB>lemma` file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDict {
    map: HashMap<String, String>,
}

impl LemmaDict {
    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let map = pairs
            .into_iter()
            .map(|(k, v)| (k.as_ref().to_lowercase(), v.as_ref().to_lowercase()))
            .collect();
        LemmaDict { map }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (token, lemma) = line.split_once('\t').ok_or_else(|| Error::Parse {
                context: "lemmas".into(),
                message: format!("line {}: expected token<TAB>lemma", i + 1),
            })?;
            map.insert(token.trim().to_lowercase(), lemma.trim().to_lowercase());
        }
        Ok(LemmaDict { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src)
    }

    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.map.get(token).map(String::as_str).unwrap_or(token)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Which normalization a [`Preprocessor`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessMode {
    /// Lowercase, strip mentions, URLs and non-alphabetic characters.
    Tweet,
    /// `Tweet` plus lemmatization and a three-character floor. Used for
    /// log-odds comparisons of tweets and bios alike.
    Lexical,
}

#[derive(Debug, Clone)]
pub struct Preprocessor {
    mode: PreprocessMode,
    lemmas: LemmaDict,
    min_len: usize,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self::tweet()
    }
}

impl Preprocessor {
    pub fn tweet() -> Self {
        Preprocessor {
            mode: PreprocessMode::Tweet,
            lemmas: LemmaDict::default(),
            min_len: 0,
        }
    }

    pub fn lexical(lemmas: LemmaDict) -> Self {
        Preprocessor {
            mode: PreprocessMode::Lexical,
            lemmas,
            min_len: 3,
        }
    }

    pub fn mode(&self) -> PreprocessMode {
        self.mode
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        let base = tokenize(text);
        match self.mode {
            PreprocessMode::Tweet => base,
            PreprocessMode::Lexical => base
                .iter()
                .map(|t| self.lemmas.lemma(t).to_string())
                .filter(|t| t.chars().count() >= self.min_len)
                .collect(),
        }
    }

    pub fn stream(&self, tweet_id: &str, text: &str) -> TokenStream {
        TokenStream {
            tweet_id: tweet_id.to_string(),
            tokens: self.tokens(text),
        }
    }
}

fn is_url(word: &str) -> bool {
    let w = word.to_ascii_lowercase();
    w.starts_with("http://") || w.starts_with("https://") || w.starts_with("www.")
}

/// Base tokenization shared by every mode.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        if word.starts_with('@') || is_url(word) {
            continue;
        }
        let mut cur = String::new();
        for ch in word.chars() {
            if ch.is_alphabetic() {
                // some lowercase mappings emit combining marks; keep letters only
                cur.extend(ch.to_lowercase().filter(|c| c.is_alphabetic()));
            } else if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}
