//! Core vocabulary: domains, choices, keywords, timestamped action sequences,
//! and model hyperparameters.
//!
//! All types here are immutable values after construction and safe to share
//! across threads. An [`Action`] is one timestamped consumption event (e.g. a
//! comment on a movie); a [`Choice`] is a catalog item carrying the context
//! keywords that are the only vocabulary shared across domains.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized context token: lowercased, trimmed, internal whitespace
/// collapsed to a single underscore.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Keyword(String);

impl Keyword {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Normalize a raw token into a [`Keyword`].
///
/// Rejects tokens that are empty after normalization: a keyword that carries
/// no text carries no novelty signal.
pub fn normalize_keyword(raw: &str) -> Result<Keyword> {
    let lowered = raw.trim().to_lowercase();
    let parts: Vec<&str> = lowered.split_whitespace().collect();
    if parts.is_empty() {
        return Err(Error::RejectedKeyword(raw.to_string()));
    }
    Ok(Keyword(parts.join("_")))
}

/// One candidate item in a domain catalog with its context keywords.
///
/// Keywords behave as a set (duplicates dropped) but keep first-seen order so
/// all downstream counting is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub id: String,
    pub keywords: Vec<Keyword>,
}

impl Choice {
    pub fn new(id: impl Into<String>, keywords: Vec<Keyword>) -> Result<Self> {
        let id = id.into();
        let mut seen = HashSet::new();
        let keywords: Vec<Keyword> = keywords
            .into_iter()
            .filter(|k| seen.insert(k.clone()))
            .collect();
        if keywords.is_empty() {
            return Err(Error::ChoiceWithoutKeywords {
                domain_id: String::new(),
                choice_id: id,
            });
        }
        Ok(Choice { id, keywords })
    }
}

/// The choice universe of one domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainCatalog {
    pub domain_id: String,
    choices: Vec<Choice>,
    #[serde(skip)]
    by_id: HashMap<String, usize>,
}

impl DomainCatalog {
    /// Build a catalog, enforcing unique choice ids and M >= 2.
    pub fn new(domain_id: impl Into<String>, choices: Vec<Choice>) -> Result<Self> {
        let domain_id = domain_id.into();
        if choices.len() < 2 {
            return Err(Error::CatalogTooSmall {
                domain_id,
                m: choices.len(),
            });
        }
        let mut by_id = HashMap::with_capacity(choices.len());
        for (i, c) in choices.iter().enumerate() {
            if by_id.insert(c.id.clone(), i).is_some() {
                return Err(Error::DuplicateChoice {
                    domain_id,
                    choice_id: c.id.clone(),
                });
            }
        }
        Ok(DomainCatalog {
            domain_id,
            choices,
            by_id,
        })
    }

    /// Number of optional choices M.
    pub fn m(&self) -> usize {
        self.choices.len()
    }

    pub fn choice(&self, index: usize) -> &Choice {
        &self.choices[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn choices(&self) -> &[Choice] {
        &self.choices
    }

    /// Rebuild the id index after deserialization.
    pub fn reindex(&mut self) {
        self.by_id = self
            .choices
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();
    }
}

/// A single consumption event: which choice, and when (epoch seconds, UTC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub choice_index: usize,
    pub timestamp: i64,
}

/// One user's chronologically ordered actions in one domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSequence {
    pub user_id: String,
    pub domain_id: String,
    pub actions: Vec<Action>,
}

impl ActionSequence {
    pub fn new(
        user_id: impl Into<String>,
        domain_id: impl Into<String>,
        actions: Vec<Action>,
    ) -> Self {
        ActionSequence {
            user_id: user_id.into(),
            domain_id: domain_id.into(),
            actions,
        }
    }

    /// Sequence length N.
    pub fn n(&self) -> usize {
        self.actions.len()
    }

    /// Model fitting needs a predecessor, hence at least two actions.
    pub fn is_fittable(&self) -> bool {
        self.actions.len() >= 2
    }

    pub fn choice_indices(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.choice_index).collect()
    }

    pub fn require_fittable(&self) -> Result<()> {
        if self.is_fittable() {
            Ok(())
        } else {
            Err(Error::Unfittable {
                user_id: self.user_id.clone(),
                domain_id: self.domain_id.clone(),
                n: self.actions.len(),
            })
        }
    }
}

/// Sort a sequence stably by timestamp and bounds-check every action against
/// the catalog. Ties keep input order; re-validating is the identity.
pub fn validate_sequence(mut seq: ActionSequence, catalog: &DomainCatalog) -> Result<ActionSequence> {
    for a in &seq.actions {
        if a.choice_index >= catalog.m() {
            return Err(Error::ChoiceIndexOutOfRange {
                domain_id: catalog.domain_id.clone(),
                index: a.choice_index,
                m: catalog.m(),
            });
        }
    }
    seq.actions.sort_by_key(|a| a.timestamp);
    Ok(seq)
}

/// Model hyperparameters: level count K, Dirichlet concentrations, and the
/// temporal window tau used by relatedness and shifting.
///
/// K = 1 is accepted as an explicit degenerate mode (a single level makes the
/// trait trivially 1) even though real runs use K >= 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub k: usize,
    pub alpha_s: Vec<f64>,
    pub alpha_t: Vec<f64>,
    pub beta: Vec<f64>,
    pub tau_seconds: i64,
}

/// Default temporal window: two months, in seconds.
pub const DEFAULT_TAU_SECONDS: i64 = 60 * 86_400;

/// Default symmetric concentration for per-domain choice utilities.
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Default symmetric concentration for the shared level distribution.
pub const DEFAULT_BETA: f64 = 1.0;

/// Default number of novelty-seeking levels.
pub const DEFAULT_K: usize = 9;

impl Hyperparams {
    /// Symmetric concentrations: alpha for both domains, beta over K levels.
    pub fn symmetric(k: usize, m_s: usize, m_t: usize, alpha: f64, beta: f64) -> Result<Self> {
        let hp = Hyperparams {
            k,
            alpha_s: vec![alpha; m_s],
            alpha_t: vec![alpha; m_t],
            beta: vec![beta; k],
            tau_seconds: DEFAULT_TAU_SECONDS,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.beta.len() != self.k {
            return Err(Error::InvalidConfig(format!(
                "beta has length {}, expected K = {}",
                self.beta.len(),
                self.k
            )));
        }
        for (name, v) in [
            ("alpha_s", &self.alpha_s),
            ("alpha_t", &self.alpha_t),
            ("beta", &self.beta),
        ] {
            if v.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} is empty")));
            }
            if v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be strictly positive and finite"
                )));
            }
        }
        if self.tau_seconds <= 0 {
            return Err(Error::InvalidConfig("tau_seconds must be positive".into()));
        }
        Ok(())
    }
}

/// One parsed row of a tab-separated action log:
/// `user_id  domain_id  choice_id  timestamp  keyword;keyword;...`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRow {
    pub user_id: String,
    pub domain_id: String,
    pub choice_id: String,
    pub timestamp: i64,
    pub keywords: Vec<Keyword>,
}

/// Accept either integer epoch seconds or `YYYY-MM-DD` (midnight UTC).
pub fn parse_timestamp(s: &str) -> std::result::Result<i64, String> {
    let s = s.trim();
    if let Ok(epoch) = s.parse::<i64>() {
        return Ok(epoch);
    }
    let date = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| format!("invalid timestamp {s:?}: expected epoch seconds or YYYY-MM-DD"))?;
    Ok(date
        .and_hms_opt(0, 0, 0)
        .expect("midnight is valid")
        .and_utc()
        .timestamp())
}

/// Parse one log line; `line_no` is 1-based and used for error reporting.
pub fn parse_log_line(line: &str, line_no: usize) -> Result<LogRow> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(Error::LogParse {
            line: line_no,
            message: format!("expected 5 tab-separated fields, found {}", fields.len()),
        });
    }
    let timestamp = parse_timestamp(fields[3]).map_err(|message| Error::LogParse {
        line: line_no,
        message,
    })?;
    let mut keywords = Vec::new();
    for raw in fields[4].split(';') {
        if raw.trim().is_empty() {
            continue;
        }
        let kw = normalize_keyword(raw).map_err(|e| Error::LogParse {
            line: line_no,
            message: e.to_string(),
        })?;
        keywords.push(kw);
    }
    if fields[0].trim().is_empty() || fields[1].trim().is_empty() || fields[2].trim().is_empty() {
        return Err(Error::LogParse {
            line: line_no,
            message: "user_id, domain_id and choice_id must be non-empty".into(),
        });
    }
    Ok(LogRow {
        user_id: fields[0].trim().to_string(),
        domain_id: fields[1].trim().to_string(),
        choice_id: fields[2].trim().to_string(),
        timestamp,
        keywords,
    })
}
