//! Descriptive statistics over a family of trajectories.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::model::{DssSequence, StateSymbol, Trajectory, ALPHABET_SIZE};

/// Basic properties of one trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrajectorySummary {
    pub release_id: String,
    pub distinct_states: BTreeSet<StateSymbol>,
    pub transitions: usize,
    /// Total time (seconds or commits) spent in each state.
    pub durations: BTreeMap<StateSymbol, i64>,
}

pub fn summarize(t: &Trajectory) -> TrajectorySummary {
    let mut durations = BTreeMap::new();
    for s in t.segments() {
        *durations.entry(s.state).or_insert(0) += s.len();
    }
    TrajectorySummary {
        release_id: t.release_id.clone(),
        distinct_states: durations.keys().copied().collect(),
        transitions: t.transition_count(),
        durations,
    }
}

/// Estimated probabilities of moving from one state to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    /// Observed states, canonical order; labels both rows and columns.
    pub alphabet: Vec<StateSymbol>,
    /// `rates[i][j]` estimates `p(alphabet[j] | alphabet[i])`.
    pub rates: Vec<Vec<f64>>,
    pub support: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    pub fn position(&self, s: StateSymbol) -> Option<usize> {
        self.alphabet.binary_search(&s).ok()
    }

    /// `p(to | from)`, zero for states never observed.
    pub fn rate(&self, from: StateSymbol, to: StateSymbol) -> f64 {
        match (self.position(from), self.position(to)) {
            (Some(i), Some(j)) => self.rates[i][j],
            _ => 0.0,
        }
    }
}

/// Counts adjacent pairs across all sequences and normalizes each row.
/// Rows of states that are never followed by anything stay all-zero.
pub fn transition_rates(seqs: &[DssSequence]) -> Result<TransitionMatrix, StatsError> {
    if seqs.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let alphabet: Vec<StateSymbol> = seqs
        .iter()
        .flat_map(|s| s.states.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut slot = [usize::MAX; ALPHABET_SIZE];
    for (i, s) in alphabet.iter().enumerate() {
        slot[s.index()] = i;
    }
    let n = alphabet.len();
    let mut support = vec![vec![0u64; n]; n];
    for seq in seqs {
        for w in seq.states.windows(2) {
            support[slot[w[0].index()]][slot[w[1].index()]] += 1;
        }
    }
    let rates = support
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                .collect()
        })
        .collect();
    Ok(TransitionMatrix {
        alphabet,
        rates,
        support,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalPosition {
    pub state: StateSymbol,
    /// `support / denominator`.
    pub frequency: f64,
    pub support: usize,
    /// Sequences long enough to have this position.
    pub denominator: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalTrajectory {
    pub corpus_size: usize,
    pub positions: Vec<ModalPosition>,
}

impl ModalTrajectory {
    pub fn states(&self) -> Vec<StateSymbol> {
        self.positions.iter().map(|p| p.state).collect()
    }
}

/// Most frequent state at each position.
///
/// Sequences may be ragged (DSS form); each position only counts the
/// sequences that reach it. Ties go to the state that sorts first in
/// canonical order.
pub fn modal_trajectory<S: AsRef<[StateSymbol]>>(seqs: &[S]) -> Result<ModalTrajectory, StatsError> {
    if seqs.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let longest = seqs.iter().map(|s| s.as_ref().len()).max().unwrap_or(0);
    let positions = (0..longest)
        .map(|p| {
            let mut counts = [0usize; ALPHABET_SIZE];
            let mut denominator = 0;
            for s in seqs.iter().filter_map(|s| s.as_ref().get(p)) {
                counts[s.index()] += 1;
                denominator += 1;
            }
            let (state, support) = StateSymbol::all()
                .into_iter()
                .map(|s| (s, counts[s.index()]))
                .fold((StateSymbol::Z, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
            ModalPosition {
                state,
                frequency: support as f64 / denominator as f64,
                support,
                denominator,
            }
        })
        .collect();
    Ok(ModalTrajectory {
        corpus_size: seqs.len(),
        positions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DssFrequency {
    pub pattern: Vec<StateSymbol>,
    pub count: usize,
    pub cumulative_ratio: f64,
}

/// Groups identical DSS sequences, most frequent first; equal counts are
/// ordered by pattern.
pub fn dss_frequency(seqs: &[DssSequence]) -> Vec<DssFrequency> {
    let mut counts: BTreeMap<&[StateSymbol], usize> = BTreeMap::new();
    for s in seqs {
        *counts.entry(s.states.as_slice()).or_insert(0) += 1;
    }
    let mut rows: Vec<(&[StateSymbol], usize)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let total = seqs.len() as f64;
    let mut running = 0;
    rows.into_iter()
        .map(|(pattern, count)| {
            running += count;
            DssFrequency {
                pattern: pattern.to_vec(),
                count,
                cumulative_ratio: running as f64 / total,
            }
        })
        .collect()
}
