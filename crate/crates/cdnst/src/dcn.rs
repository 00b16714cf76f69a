//! Dynamic choice novelty: a per-user N x M dense-rank matrix.
//!
//! At each sequence position every candidate choice gets a raw novelty score
//! `1 / ((F + 1) * (T + 1))` where `F` is the mean count, over the candidate's
//! keywords, of keyword occurrences strictly before the position, and `T` is
//! the mean count over (previous-choice keyword, candidate keyword) pairs of
//! adjacent-action keyword transitions strictly before the position. Scores
//! are then converted to dense ranks per row: rank 1 is the least novel
//! (most popular) group, ties share a rank, and the distinct ranks in a row
//! are exactly `{1, ..., row_max}`.
//!
//! Counts are integers, so scores are exact rationals; ties are decided by
//! cross-multiplied integer comparison, never by float tolerance.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::domain::{ActionSequence, Choice, DomainCatalog, Keyword};

/// Raw novelty score as the exact rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoveltyScore {
    num: u64,
    den: u64,
}

impl NoveltyScore {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn cmp_exact(&self, other: &NoveltyScore) -> std::cmp::Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for NoveltyScore {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp_exact(other))
    }
}

/// Keyword occurrence and transition counts for the history seen so far.
///
/// `observe` advances the history by one action; counts always reflect
/// actions strictly before the next position to be scored.
#[derive(Debug, Clone, Default)]
pub struct KeywordStats {
    freq: HashMap<Keyword, u64>,
    trans: HashMap<(Keyword, Keyword), u64>,
    prev_keywords: Option<Vec<Keyword>>,
}

impl KeywordStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one consumed choice: bumps keyword frequencies and, when a
    /// predecessor exists, all adjacent keyword-pair transitions.
    pub fn observe(&mut self, choice: &Choice) {
        if let Some(prev) = &self.prev_keywords {
            for a in prev {
                for b in &choice.keywords {
                    *self.trans.entry((a.clone(), b.clone())).or_insert(0) += 1;
                }
            }
        }
        for kw in &choice.keywords {
            *self.freq.entry(kw.clone()).or_insert(0) += 1;
        }
        self.prev_keywords = Some(choice.keywords.clone());
    }

    pub fn freq_count(&self, kw: &Keyword) -> u64 {
        self.freq.get(kw).copied().unwrap_or(0)
    }

    pub fn trans_count(&self, from: &Keyword, to: &Keyword) -> u64 {
        self.trans
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn freq_map(&self) -> &HashMap<Keyword, u64> {
        &self.freq
    }
}

/// Score one candidate against the accumulated history.
///
/// `prev` is the immediately preceding choice; `None` at position 1, where
/// the transition factor is defined as zero.
pub fn raw_novelty_score(
    stats: &KeywordStats,
    prev: Option<&Choice>,
    cand: &Choice,
) -> NoveltyScore {
    let n_kw = cand.keywords.len() as u64;
    let sum_f: u64 = cand.keywords.iter().map(|k| stats.freq_count(k)).sum();
    let (sum_t, n_pairs) = match prev {
        Some(p) => {
            let mut s = 0u64;
            for a in &p.keywords {
                for b in &cand.keywords {
                    s += stats.trans_count(a, b);
                }
            }
            (s, p.keywords.len() as u64 * n_kw)
        }
        None => (0, 1),
    };
    // 1 / ((sum_f/n_kw + 1) * (sum_t/n_pairs + 1)) as an exact rational.
    NoveltyScore {
        num: n_kw * n_pairs,
        den: (sum_f + n_kw) * (sum_t + n_pairs),
    }
}

/// One row of the matrix: dense ranks over all M candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcnRow {
    pub ranks: Vec<u32>,
    pub row_max: u32,
}

/// The full N x M dense-rank matrix for one user in one domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcnMatrix {
    rows: Vec<DcnRow>,
    m: usize,
}

impl DcnMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &DcnRow {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[DcnRow] {
        &self.rows
    }

    /// Rank of candidate `j` at position `i` (both 0-based).
    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.rows[i].ranks[j]
    }

    /// Debug/oracle dump: one tab-separated row of integer ranks per position.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut first = true;
            for r in &row.ranks {
                if !first {
                    out.push('\t');
                }
                let _ = write!(out, "{r}");
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Incremental row builder: scores the "next" position given the history
/// pushed so far. Used by matrix construction, forward generation, and
/// next-item scoring so all three share one counting path.
pub struct DcnBuilder<'a> {
    catalog: &'a DomainCatalog,
    stats: KeywordStats,
    prev: Option<usize>,
}

impl<'a> DcnBuilder<'a> {
    pub fn new(catalog: &'a DomainCatalog) -> Self {
        DcnBuilder {
            catalog,
            stats: KeywordStats::new(),
            prev: None,
        }
    }

    /// Advance the history by one consumed choice.
    pub fn push(&mut self, choice_index: usize) {
        self.stats.observe(self.catalog.choice(choice_index));
        self.prev = Some(choice_index);
    }

    /// Dense-rank row for the position following the pushed history.
    pub fn current_row(&self) -> DcnRow {
        let prev_choice = self.prev.map(|i| self.catalog.choice(i));
        let scores: Vec<NoveltyScore> = (0..self.catalog.m())
            .map(|j| raw_novelty_score(&self.stats, prev_choice, self.catalog.choice(j)))
            .collect();
        dense_rank(&scores)
    }

    pub fn stats(&self) -> &KeywordStats {
        &self.stats
    }
}

/// Dense-rank scores ascending: rank 1 = lowest score group (least novel).
fn dense_rank(scores: &[NoveltyScore]) -> DcnRow {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].cmp_exact(&scores[b]));
    let mut ranks = vec![0u32; scores.len()];
    let mut rank = 0u32;
    let mut prev: Option<NoveltyScore> = None;
    for &idx in &order {
        let s = scores[idx];
        if prev.map_or(true, |p| p.cmp_exact(&s) == std::cmp::Ordering::Less) {
            rank += 1;
            prev = Some(s);
        }
        ranks[idx] = rank;
    }
    DcnRow {
        ranks,
        row_max: rank,
    }
}

/// Build the full matrix for a validated sequence.
///
/// Row `i` (1-based) is computed from actions `1..i-1`; the first row is
/// always all ones. The matrix is treated as observed constants by the
/// sampler, so it is built once per user per domain.
pub fn build_dcn(seq: &ActionSequence, catalog: &DomainCatalog) -> DcnMatrix {
    let mut builder = DcnBuilder::new(catalog);
    let mut rows = Vec::with_capacity(seq.n());
    for action in &seq.actions {
        rows.push(builder.current_row());
        builder.push(action.choice_index);
    }
    DcnMatrix {
        rows,
        m: catalog.m(),
    }
}
