//! Substitution costs derived from transition rates, and Optimal Matching
//! distances between state sequences.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::DistanceError;
use crate::model::{StateSymbol, ALPHABET_SIZE};
use crate::seqstats::TransitionMatrix;

pub const DEFAULT_INDEL: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstitutionCostMatrix {
    pub alphabet: Vec<StateSymbol>,
    pub costs: Vec<Vec<f64>>,
    pub indel: f64,
    #[serde(skip)]
    slot: [Option<usize>; ALPHABET_SIZE],
}

impl SubstitutionCostMatrix {
    /// Checks symmetry, a zero diagonal and off-diagonal costs in `[0, 2]`.
    pub fn new(alphabet: Vec<StateSymbol>, costs: Vec<Vec<f64>>, indel: f64) -> Result<Self, DistanceError> {
        let invalid = |m: String| Err(DistanceError::InvalidMatrix(m));
        let n = alphabet.len();
        if costs.len() != n || costs.iter().any(|r| r.len() != n) {
            return invalid(format!("expected a {n}x{n} matrix"));
        }
        if !(indel.is_finite() && indel >= 0.0) {
            return invalid(format!("indel cost {indel} must be a non-negative number"));
        }
        let mut slot = [None; ALPHABET_SIZE];
        for (i, s) in alphabet.iter().enumerate() {
            if slot[s.index()].replace(i).is_some() {
                return invalid(format!("state {s} appears twice"));
            }
        }
        for i in 0..n {
            if costs[i][i] != 0.0 {
                return invalid(format!("cost({0},{0}) must be 0", alphabet[i]));
            }
            for j in 0..n {
                let c = costs[i][j];
                if !(0.0..=2.0).contains(&c) || c != costs[j][i] {
                    return invalid(format!(
                        "cost({},{}) = {c} must be symmetric and within [0, 2]",
                        alphabet[i], alphabet[j]
                    ));
                }
            }
        }
        Ok(SubstitutionCostMatrix {
            alphabet,
            costs,
            indel,
            slot,
        })
    }

    pub fn position(&self, s: StateSymbol) -> Option<usize> {
        self.slot[s.index()]
    }

    pub fn cost(&self, a: StateSymbol, b: StateSymbol) -> Result<f64, DistanceError> {
        let i = self.position(a).ok_or(DistanceError::UnknownSymbol(a))?;
        let j = self.position(b).ok_or(DistanceError::UnknownSymbol(b))?;
        Ok(self.costs[i][j])
    }

    /// Whether substitution and indel costs together form a metric, which
    /// makes Optimal Matching itself satisfy the triangle inequality.
    pub fn is_metric(&self) -> bool {
        const EPS: f64 = 1e-12;
        let n = self.alphabet.len();
        for i in 0..n {
            for j in 0..n {
                if self.costs[i][j] > 2.0 * self.indel + EPS {
                    return false;
                }
                for k in 0..n {
                    if self.costs[i][k] > self.costs[i][j] + self.costs[j][k] + EPS {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Substitution costs `2 - p(a|b) - p(b|a)`.
///
/// The matrix covers `alphabet` plus every state observed in `tm`; states
/// without observed transitions cost 2 against everything else.
pub fn scm_from_rates(
    tm: &TransitionMatrix,
    alphabet: &[StateSymbol],
    indel: f64,
) -> Result<SubstitutionCostMatrix, DistanceError> {
    let mut states: Vec<StateSymbol> = alphabet.iter().chain(&tm.alphabet).copied().collect();
    states.sort();
    states.dedup();
    let costs = states
        .iter()
        .map(|&a| {
            states
                .iter()
                .map(|&b| {
                    if a == b {
                        0.0
                    } else {
                        // Sum first: float addition commutes, chained subtraction does not.
                        (2.0 - (tm.rate(b, a) + tm.rate(a, b))).max(0.0)
                    }
                })
                .collect()
        })
        .collect();
    SubstitutionCostMatrix::new(states, costs, indel)
}

/// Optimal Matching: the cheapest sequence of insertions, deletions and
/// substitutions turning `a` into `b`.
pub fn om_distance(
    a: &[StateSymbol],
    b: &[StateSymbol],
    scm: &SubstitutionCostMatrix,
) -> Result<f64, DistanceError> {
    let lookup = |s: &StateSymbol| scm.position(*s).ok_or(DistanceError::UnknownSymbol(*s));
    let a: Vec<usize> = a.iter().map(lookup).collect::<Result<_, _>>()?;
    let b: Vec<usize> = b.iter().map(lookup).collect::<Result<_, _>>()?;
    let indel = scm.indel;

    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64 * indel).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, &ai) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64 * indel;
        let row = &scm.costs[ai];
        for (j, &bj) in b.iter().enumerate() {
            cur[j + 1] = (prev[j + 1] + indel)
                .min(cur[j] + indel)
                .min(prev[j] + row[bj]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[b.len()])
}

/// Symmetric pairwise distances between releases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    pub release_ids: Vec<String>,
    pub distances: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.release_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.release_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    /// Full matrix with a header row and column of release ids, six
    /// decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("release_id");
        for id in &self.release_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (id, row) in self.release_ids.iter().zip(&self.distances) {
            out.push_str(&csv_field(id));
            for d in row {
                let _ = write!(out, ",{d:.6}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Evaluates `dist` once per unordered pair (upper triangle, in parallel)
/// and mirrors the result.
pub fn pairwise_matrix<T, F, E>(
    items: &[(String, T)],
    dist: F,
) -> Result<DistanceMatrix, E>
where
    T: Sync,
    E: Send,
    F: Fn(&T, &T) -> Result<f64, E> + Sync,
{
    let n = items.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| dist(&items[i].1, &items[j].1))
        .collect::<Result<_, E>>()?;
    let mut distances = vec![vec![0.0; n]; n];
    for (&(i, j), d) in pairs.iter().zip(values) {
        distances[i][j] = d;
        distances[j][i] = d;
    }
    Ok(DistanceMatrix {
        release_ids: items.iter().map(|(id, _)| id.clone()).collect(),
        distances,
    })
}

/// Pairwise Optimal Matching distances.
pub fn distance_matrix(
    seqs: &[(String, Vec<StateSymbol>)],
    scm: &SubstitutionCostMatrix,
) -> Result<DistanceMatrix, DistanceError> {
    pairwise_matrix(seqs, |a, b| om_distance(a, b, scm))
}
