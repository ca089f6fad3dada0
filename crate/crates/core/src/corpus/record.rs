use std::fmt;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetKind {
    Original,
    Retweet,
    Reply,
    Quote,
}

impl TweetKind {
    /// Kinds that point at another tweet through `ref_id`.
    pub fn is_interaction(self) -> bool {
        !matches!(self, TweetKind::Original)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Sexism,
    Racism,
    Disability,
    SexualOrientation,
    Religion,
    OtherHate,
    NotHate,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Sexism,
        Category::Racism,
        Category::Disability,
        Category::SexualOrientation,
        Category::Religion,
        Category::OtherHate,
        Category::NotHate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Sexism => "sexism",
            Category::Racism => "racism",
            Category::Disability => "disability",
            Category::SexualOrientation => "sexual_orientation",
            Category::Religion => "religion",
            Category::OtherHate => "other_hate",
            Category::NotHate => "not_hate",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One post in the corpus. `day` counts calendar days (UTC) from the window start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub user_id: String,
    pub day: u32,
    pub kind: TweetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_id: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hate_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

impl TweetRecord {
    pub fn validate(&self, window_length: Option<u32>) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.user_id.is_empty() {
            return Err("empty user_id".into());
        }
        if let Some(len) = window_length {
            if self.day >= len {
                return Err(format!("day {} outside window of {} days", self.day, len));
            }
        }
        if self.kind == TweetKind::Retweet && self.ref_id.as_deref().is_none_or(str::is_empty) {
            return Err("missing ref_id".into());
        }
        if let Some(score) = self.hate_score {
            if !(0.0..=1.0).contains(&score) {
                return Err(format!("hate_score {score} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserProfile {
    pub user_id: String,
    pub followers: u64,
    pub following: u64,
    pub tweet_count: u64,
    pub account_age_days: u64,
    pub bio: String,
    pub bio_length: u64,
}

impl UserProfile {
    pub fn new(
        user_id: impl Into<String>,
        followers: u64,
        following: u64,
        tweet_count: u64,
        account_age_days: u64,
        bio: impl Into<String>,
    ) -> Self {
        let bio = bio.into();
        UserProfile {
            user_id: user_id.into(),
            followers,
            following,
            tweet_count,
            account_age_days,
            bio_length: bio.chars().count() as u64,
            bio,
        }
    }
}

// `bio_length` may be omitted on input; when present it has to agree with the bio.
#[derive(Deserialize)]
struct RawUserProfile {
    user_id: String,
    followers: u64,
    following: u64,
    tweet_count: u64,
    account_age_days: u64,
    #[serde(default)]
    bio: String,
    #[serde(default)]
    bio_length: Option<u64>,
}

impl<'de> Deserialize<'de> for UserProfile {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawUserProfile::deserialize(de)?;
        let chars = raw.bio.chars().count() as u64;
        if let Some(declared) = raw.bio_length {
            if declared != chars {
                return Err(serde::de::Error::custom(format!(
                    "bio_length {declared} does not match bio of {chars} characters"
                )));
            }
        }
        Ok(UserProfile {
            user_id: raw.user_id,
            followers: raw.followers,
            following: raw.following,
            tweet_count: raw.tweet_count,
            account_age_days: raw.account_age_days,
            bio: raw.bio,
            bio_length: chars,
        })
    }
}

/// The observation window: day 0 is `start_day`, the takeover happens on
/// `takeover_day_index` and the last observed day is `end_day_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisWindow {
    pub start_day: NaiveDate,
    pub takeover_day_index: u32,
    pub end_day_index: u32,
    pub keywords: Vec<String>,
}

impl AnalysisWindow {
    pub fn new(
        start_day: NaiveDate,
        takeover_day_index: u32,
        end_day_index: u32,
        keywords: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        if takeover_day_index == 0 || takeover_day_index >= end_day_index {
            return Err(Error::invalid(format!(
                "takeover day {takeover_day_index} must lie strictly inside (0, {end_day_index})"
            )));
        }
        let mut kw: Vec<String> = keywords
            .into_iter()
            .map(|k| k.into().trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        kw.sort();
        kw.dedup();
        if kw.is_empty() {
            return Err(Error::invalid("keyword list is empty"));
        }
        Ok(AnalysisWindow {
            start_day,
            takeover_day_index,
            end_day_index,
            keywords: kw,
        })
    }

    /// Number of days in the window, `end_day_index + 1`.
    pub fn len(&self) -> u32 {
        self.end_day_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn day_index(&self, date: NaiveDate) -> Option<u32> {
        let delta = (date - self.start_day).num_days();
        (0..=self.end_day_index as i64).contains(&delta).then_some(delta as u32)
    }

    pub fn date_of(&self, day: u32) -> NaiveDate {
        self.start_day + Duration::days(day as i64)
    }

    pub fn is_pre(&self, day: u32) -> bool {
        day < self.takeover_day_index
    }
}
