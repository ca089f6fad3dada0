//! Tweet and user ingestion, validation, keyword/hate selection and tokenization.

mod filter;
mod io;
mod record;
mod text;

pub use filter::{
    fallback_scorer, hate_threshold_filter, key_contributors, keyword_filter, KeywordSet, DEFAULT_HATE_THRESHOLD,
    DEFAULT_MIN_HATEFUL,
};
pub use io::{
    load_keywords, load_tweets, load_users, read_jsonl, write_jsonl, CorpusRecord, LoadOptions, Loaded,
    MalformedPolicy, Rejected,
};
pub use record::{AnalysisWindow, Category, TweetKind, TweetRecord, UserProfile};
pub use text::{tokenize, LemmaDict, PreprocessMode, Preprocessor, TokenStream};
