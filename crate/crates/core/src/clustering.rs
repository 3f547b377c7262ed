//! Agglomerative clustering of releases over a distance matrix, and the
//! extraction of recurrent trajectory patterns from the resulting groups.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMatrix;
use crate::error::ClusterError;
use crate::model::{DssSequence, StateSymbol};
use crate::seqstats::modal_trajectory;

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_MIN_PATTERN_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    /// Ward's criterion, run through the Lance-Williams update on squared
    /// dissimilarities.
    #[default]
    Ward,
}

impl std::str::FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(format!("unknown linkage {other:?}")),
        }
    }
}

impl Linkage {
    /// Lance-Williams update: dissimilarity between `k` and the union of
    /// `a` and `b`.
    fn update(self, d_ak: f64, d_bk: f64, d_ab: f64, n_a: usize, n_b: usize, n_k: usize) -> f64 {
        let (na, nb, nk) = (n_a as f64, n_b as f64, n_k as f64);
        match self {
            Linkage::Single => d_ak.min(d_bk),
            Linkage::Complete => d_ak.max(d_bk),
            Linkage::Average => (na * d_ak + nb * d_bk) / (na + nb),
            Linkage::Ward => ((na + nk) * d_ak + (nb + nk) * d_bk - nk * d_ab) / (na + nb + nk),
        }
    }
}

/// One agglomeration step, in terms of observation indices: the clusters
/// containing `a` and `b` are joined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub release_ids: Vec<String>,
    pub merges: Vec<Merge>,
}

struct Cluster {
    members: Vec<usize>,
    /// Smallest member release id, used to break ties.
    key: usize,
}

/// Builds the full merge tree.
///
/// At every step the closest pair of clusters is merged; ties within a
/// relative `1e-12` go to the pair whose smallest member ids sort first.
pub fn linkage(dm: &DistanceMatrix, method: Linkage) -> Dendrogram {
    let n = dm.len();
    // Rank of each observation's id, so ties compare ids without string work.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dm.release_ids[i].cmp(&dm.release_ids[j]).then(i.cmp(&j)));
    let mut id_rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        id_rank[i] = r;
    }

    let square = method == Linkage::Ward;
    let mut d: Vec<Vec<f64>> = dm
        .distances
        .iter()
        .map(|row| row.iter().map(|&x| if square { x * x } else { x }).collect())
        .collect();
    let mut clusters: Vec<Option<Cluster>> = (0..n)
        .map(|i| Some(Cluster { members: vec![i], key: id_rank[i] }))
        .collect();

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let active: Vec<usize> = (0..n).filter(|&i| clusters[i].is_some()).collect();
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let (ki, kj) = (clusters[i].as_ref().unwrap().key, clusters[j].as_ref().unwrap().key);
                let keys = (ki.min(kj), ki.max(kj));
                let dij = d[i][j];
                let better = match best {
                    None => true,
                    Some((bd, bkeys, _, _)) => {
                        let tol = 1e-12 * bd.abs().max(1.0);
                        dij < bd - tol || (dij <= bd + tol && keys < bkeys)
                    }
                };
                if better {
                    best = Some((dij, keys, i, j));
                }
            }
        }
        let (dij, _, i, j) = best.expect("at least two active clusters");
        let (n_i, n_j) = (
            clusters[i].as_ref().unwrap().members.len(),
            clusters[j].as_ref().unwrap().members.len(),
        );
        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let n_k = clusters[k].as_ref().unwrap().members.len();
            let updated = method.update(d[i][k], d[j][k], dij, n_i, n_j, n_k);
            d[i][k] = updated;
            d[k][i] = updated;
        }
        let absorbed = clusters[j].take().unwrap();
        let target = clusters[i].as_mut().unwrap();
        merges.push(Merge {
            a: target.members[0],
            b: absorbed.members[0],
            height: if square { dij.max(0.0).sqrt() } else { dij },
            size: n_i + n_j,
        });
        target.key = target.key.min(absorbed.key);
        target.members.extend(absorbed.members);
    }
    Dendrogram {
        release_ids: dm.release_ids.clone(),
        merges,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Dendrogram {
    /// Cluster label (1-based) of every observation after applying the
    /// first `n - k` merges. Labels follow the order in which clusters
    /// first appear in `release_ids`.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>, ClusterError> {
        let n = self.release_ids.len();
        if k == 0 || k > n {
            return Err(ClusterError::InvalidK { k, n });
        }
        let mut parent: Vec<usize> = (0..n).collect();
        for m in &self.merges[..n - k] {
            let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
            parent[rb] = ra;
        }
        let mut label_of_root = HashMap::new();
        Ok((0..n)
            .map(|i| {
                let root = find(&mut parent, i);
                let next = label_of_root.len() + 1;
                *label_of_root.entry(root).or_insert(next)
            })
            .collect())
    }
}

/// A partition of releases into `k` clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub release_ids: Vec<String>,
    /// `labels[i]` in `1..=k` is the cluster of `release_ids[i]`.
    pub labels: Vec<usize>,
    /// `sizes[c - 1]` is the size of cluster `c`.
    pub sizes: Vec<usize>,
    /// Member of each cluster with the smallest summed distance to the
    /// other members; ties go to the earliest release.
    pub medoids: Vec<String>,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, label: usize) -> Vec<&str> {
        self.release_ids
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| **l == label)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("release_id,cluster\n");
        for (id, label) in self.release_ids.iter().zip(&self.labels) {
            out.push_str(&crate::distance::csv_field(id));
            out.push(',');
            out.push_str(&label.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn assignment_from_labels(dm: &DistanceMatrix, labels: Vec<usize>) -> ClusterAssignment {
    let k = labels.iter().copied().max().unwrap_or(0);
    let mut sizes = vec![0; k];
    let mut medoids = Vec::with_capacity(k);
    for &l in &labels {
        sizes[l - 1] += 1;
    }
    for c in 1..=k {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        let medoid = members
            .iter()
            .map(|&i| (i, members.iter().map(|&j| dm.get(i, j)).sum::<f64>()))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            })
            .map(|(i, _)| dm.release_ids[i].clone())
            .unwrap_or_default();
        medoids.push(medoid);
    }
    ClusterAssignment {
        release_ids: dm.release_ids.clone(),
        labels,
        sizes,
        medoids,
    }
}

/// Agglomerative clustering cut at `k` clusters.
pub fn hierarchical_cluster(
    dm: &DistanceMatrix,
    k: usize,
    method: Linkage,
) -> Result<ClusterAssignment, ClusterError> {
    let n = dm.len();
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let labels = linkage(dm, method).cut(k)?;
    Ok(assignment_from_labels(dm, labels))
}

/// A cluster large enough to count as a recurrent trajectory pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    /// 1-based rank by size.
    pub rank: usize,
    pub cluster: usize,
    pub size: usize,
    pub members: Vec<String>,
    pub medoid: String,
    pub medoid_dss: Vec<StateSymbol>,
    /// Most frequent state at each DSS position among the members.
    pub modal_dss: Vec<StateSymbol>,
    /// DSS length -> number of members.
    pub length_distribution: BTreeMap<usize, usize>,
    pub first_states: BTreeMap<StateSymbol, usize>,
    pub last_states: BTreeMap<StateSymbol, usize>,
}

/// Clusters with at least `min_size` members, largest first.
pub fn extract_patterns(
    assignment: &ClusterAssignment,
    seqs: &[DssSequence],
    min_size: usize,
) -> Vec<PatternReport> {
    let by_id: HashMap<&str, &DssSequence> = seqs.iter().map(|s| (s.release_id.as_str(), s)).collect();
    let mut clusters: Vec<usize> = (1..=assignment.k())
        .filter(|&c| assignment.sizes[c - 1] >= min_size)
        .collect();
    clusters.sort_by(|a, b| assignment.sizes[b - 1].cmp(&assignment.sizes[a - 1]).then(a.cmp(b)));
    clusters
        .into_iter()
        .enumerate()
        .map(|(rank, c)| {
            let members: Vec<String> = assignment.members(c).into_iter().map(str::to_string).collect();
            let member_seqs: Vec<&[StateSymbol]> = members
                .iter()
                .filter_map(|m| by_id.get(m.as_str()))
                .map(|s| s.states.as_slice())
                .collect();
            let mut length_distribution = BTreeMap::new();
            let mut first_states = BTreeMap::new();
            let mut last_states = BTreeMap::new();
            for s in &member_seqs {
                *length_distribution.entry(s.len()).or_insert(0) += 1;
                if let (Some(first), Some(last)) = (s.first(), s.last()) {
                    *first_states.entry(*first).or_insert(0) += 1;
                    *last_states.entry(*last).or_insert(0) += 1;
                }
            }
            let medoid = assignment.medoids[c - 1].clone();
            PatternReport {
                rank: rank + 1,
                cluster: c,
                size: members.len(),
                medoid_dss: by_id.get(medoid.as_str()).map(|s| s.states.clone()).unwrap_or_default(),
                modal_dss: modal_trajectory(&member_seqs).map(|m| m.states()).unwrap_or_default(),
                medoid,
                members,
                length_distribution,
                first_states,
                last_states,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(ids: &[&str], points: &[f64]) -> DistanceMatrix {
        DistanceMatrix {
            release_ids: ids.iter().map(|s| s.to_string()).collect(),
            distances: points
                .iter()
                .map(|a| points.iter().map(|b| (a - b).abs()).collect())
                .collect(),
        }
    }

    fn dss(id: &str, states: &[&str]) -> DssSequence {
        DssSequence {
            release_id: id.into(),
            states: states.iter().map(|s| s.parse().unwrap()).collect(),
        }
    }

    #[test]
    fn separated_groups_are_recovered() {
        let dm = matrix(&["a", "b", "c", "d", "e"], &[0.0, 0.0, 10.0, 10.0, 0.0]);
        for method in [Linkage::Ward, Linkage::Single, Linkage::Complete, Linkage::Average] {
            let a = hierarchical_cluster(&dm, 2, method).unwrap();
            assert_eq!(a.labels, [1, 1, 2, 2, 1], "{method:?}");
            assert_eq!(a.sizes, [3, 2]);
        }
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let dm = matrix(&["a", "b", "c"], &[0.0, 1.0, 2.0]);
        let a = hierarchical_cluster(&dm, 3, Linkage::Ward).unwrap();
        assert_eq!(a.labels, [1, 2, 3]);
        assert_eq!(a.medoids, ["a", "b", "c"]);
    }

    #[test]
    fn invalid_k() {
        let dm = matrix(&["a", "b"], &[0.0, 1.0]);
        assert_eq!(
            hierarchical_cluster(&dm, 0, Linkage::Ward),
            Err(ClusterError::InvalidK { k: 0, n: 2 })
        );
        assert!(hierarchical_cluster(&dm, 3, Linkage::Ward).is_err());
    }

    #[test]
    fn ward_heights_match_centroid_geometry() {
        // On 1-D points Ward's merge cost is sqrt(2 * n_a * n_b / (n_a + n_b)) * |centroid gap|.
        let dm = matrix(&["a", "b", "c"], &[0.0, 2.0, 10.0]);
        let tree = linkage(&dm, Linkage::Ward);
        assert!((tree.merges[0].height - 2.0).abs() < 1e-12);
        let expected = (2.0f64 * 2.0 * 1.0 / 3.0).sqrt() * 9.0;
        assert!((tree.merges[1].height - expected).abs() < 1e-9);
    }

    #[test]
    fn ties_break_on_smallest_ids() {
        let dm = matrix(&["d", "c", "b", "a"], &[0.0, 1.0, 2.0, 3.0]);
        let tree = linkage(&dm, Linkage::Single);
        // Three equal gaps of 1: the pair containing "a" and "b" goes first.
        let first = tree.merges[0];
        let ids = [&tree.release_ids[first.a], &tree.release_ids[first.b]];
        assert!(ids.contains(&&"a".to_string()) && ids.contains(&&"b".to_string()));
    }

    #[test]
    fn medoid_minimizes_within_distance() {
        let dm = matrix(&["a", "b", "c", "far"], &[0.0, 1.0, 3.0, 100.0]);
        let a = hierarchical_cluster(&dm, 2, Linkage::Average).unwrap();
        assert_eq!(a.medoids[0], "b");
        assert_eq!(a.medoids[1], "far");
    }

    #[test]
    fn patterns_respect_min_size_and_order() {
        let ids: Vec<String> = (0..11).map(|i| format!("r{i:02}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let mut points = vec![0.0; 3];
        points.extend(vec![50.0; 8]);
        let dm = matrix(&id_refs, &points);
        let a = hierarchical_cluster(&dm, 2, Linkage::Ward).unwrap();
        let seqs: Vec<DssSequence> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| if i < 3 { dss(id, &["Z"]) } else if i % 2 == 0 { dss(id, &["BIF", "B"]) } else { dss(id, &["BI", "I"]) })
            .collect();
        let p = extract_patterns(&a, &seqs, 5);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].size, 8);
        assert_eq!(p[0].rank, 1);
        assert_eq!(p[0].length_distribution[&2], 8);
        assert_eq!(p[0].last_states.values().sum::<usize>(), 8);
        assert!(p.iter().map(|r| r.size).sum::<usize>() <= ids.len());

        let all = extract_patterns(&a, &seqs, 1);
        assert_eq!(all.iter().map(|r| r.size).collect::<Vec<_>>(), [8, 3]);
    }

    #[test]
    fn assignment_csv() {
        let dm = matrix(&["a", "b"], &[0.0, 5.0]);
        let a = hierarchical_cluster(&dm, 2, Linkage::Ward).unwrap();
        assert_eq!(a.to_csv(), "release_id,cluster\na,1\nb,2\n");
    }
}
