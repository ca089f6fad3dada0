//! Analytics for measuring how hateful content and its interaction network
//! change around a platform moderation-policy change.
//!
//! The crate is organised by analysis stage:
//!
//! * [`corpus`] ingests tweets and profiles and applies the selection rules.
//! * [`lexshift`] compares word usage between two corpora with log-odds ratios.
//! * [`embedshift`] trains skip-gram embeddings per period and compares cosines.
//! * [`tempograph`] builds the day-by-day retweet network and its growth metrics.
//! * [`influence`] runs PageRank on every snapshot and Moving PageRank scoring.
//! * [`earlydetect`] asks whether profile and text features predict MPR rank.
//! * [`synth`] generates two-regime synthetic corpora with planted ground truth.
//! * [`pipeline`] wires the stages together from a config file.

// Negated comparisons below reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod earlydetect;
pub mod embedshift;
pub mod error;
pub mod influence;
pub mod lexshift;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod tempograph;

pub use corpus::{AnalysisWindow, TweetKind, TweetRecord, UserProfile};
pub use error::{Error, Result};
