//! Bradley-Terry scores from pairwise preference records.
//!
//! `P(a beats b) = exp(p_a) / (exp(p_a) + exp(p_b))`. Scores are fitted by
//! the minorization-maximization update on strengths `exp(p)`, which never
//! increases the negative log-likelihood, and gauge-fixed to sum to zero.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{exp, ln, ln_1p};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreferenceError {
    #[error("no preference records")]
    NoRecords,
    #[error("record {index} has identical winner and loser {id:?}")]
    SelfComparison { index: usize, id: String },
    #[error("pseudo count must be finite and non-negative, got {0}")]
    InvalidPseudoCount(f64),
    #[error("comparison graph has {components} disconnected components")]
    NotConnected { components: usize },
    #[error("scores diverge: undefeated {undefeated:?}, winless {winless:?}")]
    SeparatedGraph { undefeated: Vec<String>, winless: Vec<String> },
    #[error("no convergence after {iterations} iterations (last change {last_change})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("unknown method id {0:?}")]
    UnknownId(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceRecord {
    pub winner: String,
    pub loser: String,
}

impl PreferenceRecord {
    pub fn new(winner: impl Into<String>, loser: impl Into<String>) -> Self {
        PreferenceRecord { winner: winner.into(), loser: loser.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtConfig {
    pub tolerance: f64,
    pub max_iter: usize,
    /// Added to both directions of every pair that was compared at least once.
    pub pseudo_count: f64,
}

impl Default for BtConfig {
    fn default() -> Self {
        BtConfig { tolerance: 1e-8, max_iter: 10_000, pseudo_count: 0.0 }
    }
}

/// Method scores, gauge-fixed to `sum(p) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: BTreeMap<String, f64>,
}

impl ScoreVector {
    pub fn scores(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }

    pub fn get(&self, id: &str) -> Result<f64, PreferenceError> {
        self.scores.get(id).copied().ok_or_else(|| PreferenceError::UnknownId(id.into()))
    }

    /// Probability that `a` is preferred over `b`.
    pub fn predict_prob(&self, a: &str, b: &str) -> Result<f64, PreferenceError> {
        let d = self.get(a)? - self.get(b)?;
        Ok(logistic(d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtFit {
    pub scores: ScoreVector,
    pub iterations: usize,
    /// Negative log-likelihood of the (pseudo-count augmented) data before
    /// the first update and after each update.
    pub nll_trace: Vec<f64>,
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// `-ln(logistic(x))` without overflow.
#[inline]
fn neg_log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        ln_1p(exp(-x))
    } else {
        -x + ln_1p(exp(x))
    }
}

struct Counts {
    ids: Vec<String>,
    /// `wins[i][j]`: times `i` beat `j`, pseudo counts included.
    wins: Vec<Vec<f64>>,
}

fn tally(records: &[PreferenceRecord], pseudo: f64) -> Result<Counts, PreferenceError> {
    if records.is_empty() {
        return Err(PreferenceError::NoRecords);
    }
    let mut set = BTreeSet::new();
    for (index, r) in records.iter().enumerate() {
        if r.winner == r.loser {
            return Err(PreferenceError::SelfComparison { index, id: r.winner.clone() });
        }
        set.insert(r.winner.as_str());
        set.insert(r.loser.as_str());
    }
    let ids: Vec<String> = set.into_iter().map(String::from).collect();
    let pos = |id: &str| ids.binary_search_by(|x| x.as_str().cmp(id)).expect("id collected above");
    let n = ids.len();
    let mut wins = alloc::vec![alloc::vec![0.0; n]; n];
    for r in records {
        wins[pos(&r.winner)][pos(&r.loser)] += 1.0;
    }
    if pseudo > 0.0 {
        for i in 0..n {
            for j in i + 1..n {
                if wins[i][j] + wins[j][i] > 0.0 {
                    wins[i][j] += pseudo;
                    wins[j][i] += pseudo;
                }
            }
        }
    }
    Ok(Counts { ids, wins })
}

/// Vertices reachable from 0 along edges where `edge(u, v)` holds.
fn reachable(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = alloc::vec![false; n];
    let mut stack = alloc::vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && edge(u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn check_graph(c: &Counts) -> Result<(), PreferenceError> {
    let n = c.ids.len();
    let w = &c.wins;
    // Connected components of the undirected comparison graph.
    let mut comp = alloc::vec![usize::MAX; n];
    let mut components = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = alloc::vec![s];
        comp[s] = components;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if comp[v] == usize::MAX && w[u][v] + w[v][u] > 0.0 {
                    comp[v] = components;
                    stack.push(v);
                }
            }
        }
        components += 1;
    }
    if components > 1 {
        return Err(PreferenceError::NotConnected { components });
    }
    // The maximum-likelihood scores exist iff the win digraph is strongly
    // connected.
    let forward = reachable(n, |u, v| w[u][v] > 0.0);
    let backward = reachable(n, |u, v| w[v][u] > 0.0);
    if forward.iter().chain(&backward).all(|&b| b) {
        return Ok(());
    }
    let undefeated = (0..n).filter(|&i| (0..n).all(|j| w[j][i] == 0.0)).map(|i| c.ids[i].clone()).collect();
    let winless = (0..n).filter(|&i| (0..n).all(|j| w[i][j] == 0.0)).map(|i| c.ids[i].clone()).collect();
    Err(PreferenceError::SeparatedGraph { undefeated, winless })
}

fn nll(w: &[Vec<f64>], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            if w[i][j] > 0.0 {
                s += w[i][j] * neg_log_logistic(p[i] - p[j]);
            }
        }
    }
    s
}

fn center(p: &mut [f64]) {
    let m = p.iter().sum::<f64>() / p.len() as f64;
    p.iter_mut().for_each(|v| *v -= m);
}

/// Maximum-likelihood Bradley-Terry scores.
pub fn fit_bt(records: &[PreferenceRecord], config: &BtConfig) -> Result<BtFit, PreferenceError> {
    if !(config.pseudo_count >= 0.0) || !config.pseudo_count.is_finite() {
        return Err(PreferenceError::InvalidPseudoCount(config.pseudo_count));
    }
    let c = tally(records, config.pseudo_count)?;
    check_graph(&c)?;
    let n = c.ids.len();
    let w = &c.wins;
    let total_wins: Vec<f64> = (0..n).map(|i| w[i].iter().sum()).collect();

    let mut p = alloc::vec![0.0; n];
    let mut trace = alloc::vec![nll(w, &p)];
    let mut last_change = f64::INFINITY;
    for it in 1..=config.max_iter {
        let mut next = alloc::vec![0.0; n];
        for i in 0..n {
            // Denominator of the MM step in strengths pi = exp(p), written
            // relative to pi_i: sum_j n_ij / (1 + exp(p_j - p_i)).
            let mut denom = 0.0;
            for j in 0..n {
                let games = w[i][j] + w[j][i];
                if j != i && games > 0.0 {
                    denom += games * logistic(p[i] - p[j]);
                }
            }
            next[i] = ln(total_wins[i]) - ln(denom) + p[i];
        }
        center(&mut next);
        last_change = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        trace.push(nll(w, &p));
        if last_change < config.tolerance {
            let scores = c.ids.iter().cloned().zip(p.iter().copied()).collect();
            return Ok(BtFit { scores: ScoreVector { scores }, iterations: it, nll_trace: trace });
        }
    }
    Err(PreferenceError::NoConvergence { iterations: config.max_iter, last_change })
}
