//! Independent reference routines used by the integration and acceptance
//! tests. Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use chrono::Duration;
use rand::Rng;
use reltraj::model::{parse_timestamp, IssueRecord, IssueType, ReleaseWindow, StateSymbol, Timestamp};
use reltraj::SubstitutionCostMatrix;

pub fn t0() -> Timestamp {
    parse_timestamp("2015-01-01T00:00:00Z").unwrap()
}

pub fn st(s: &str) -> StateSymbol {
    s.parse().unwrap()
}

pub fn states(xs: &[&str]) -> Vec<StateSymbol> {
    xs.iter().map(|s| st(s)).collect()
}

pub fn issue(id: &str, ty: IssueType, created: Timestamp, resolved: Timestamp) -> IssueRecord {
    IssueRecord {
        id: id.into(),
        issue_type: ty,
        created,
        resolved: Some(resolved),
        resolution: "Fixed".into(),
        status: "Closed".into(),
        parent_id: None,
    }
}

/// The lifecycle narrative of a release suffering from bugs from its
/// inception: improvements join (BI), then features (BIF); bugs and
/// improvements are sorted out leaving F; a non-relevant issue overlaps F
/// and later T but only shows on its own in between; bugs reappear, then
/// improvements, and the release ends on improvements only.
///
/// Day offsets from inception: tr1=10, tr2=20, tr3=30, tr4=40, tr5=50,
/// tr6=60, end=100.
pub fn lifecycle_fixture() -> (Vec<IssueRecord>, ReleaseWindow) {
    let d = |n: i64| t0() + Duration::days(n);
    let window = ReleaseWindow::new("fixture-1.0", d(0), d(100)).unwrap();
    let wish = || IssueType::Other("Wish".into());
    let issues = vec![
        issue("FIX-1", IssueType::Bug, d(-40), d(18)),
        issue("FIX-2", IssueType::Bug, d(12), d(30)),
        issue("FIX-3", IssueType::Improvement, d(10), d(30)),
        issue("FIX-4", IssueType::NewFeature, d(20), d(40)),
        issue("FIX-5", wish(), d(33), d(46)),
        issue("FIX-6", wish(), d(44), d(55)),
        issue("FIX-7", IssueType::Task, d(50), d(60)),
        issue("FIX-8", IssueType::Bug, d(60), d(90)),
        issue("FIX-9", IssueType::Improvement, d(75), d(100)),
        // Excluded or invisible.
        IssueRecord {
            parent_id: Some("FIX-4".into()),
            ..issue("FIX-10", IssueType::SubTask, d(35), d(80))
        },
    ];
    (issues, window)
}

/// Random issue set: up to `max_issues` issues of up to four distinct
/// types (drawn from the four recurrent types and a pooled non-recurrent
/// type), endpoints on whole minutes, some straddling inception.
pub fn random_issue_set<R: Rng>(rng: &mut R, window_minutes: i64, max_issues: usize) -> (Vec<IssueRecord>, ReleaseWindow) {
    let window = ReleaseWindow::new("rand", t0(), t0() + Duration::minutes(window_minutes)).unwrap();
    let mut pool = vec![
        IssueType::Bug,
        IssueType::Improvement,
        IssueType::NewFeature,
        IssueType::Task,
        IssueType::Other("Wish".into()),
    ];
    let n_types = rng.gen_range(1..=4);
    while pool.len() > n_types {
        pool.remove(rng.gen_range(0..pool.len()));
    }
    let n = rng.gen_range(0..=max_issues);
    let issues = (0..n)
        .map(|k| {
            let ty = pool[rng.gen_range(0..pool.len())].clone();
            let ty = match ty {
                IssueType::Other(_) if rng.gen_bool(0.5) => IssueType::Other("Documentation".into()),
                t => t,
            };
            let created = rng.gen_range(-window_minutes / 4..window_minutes);
            let resolved = rng.gen_range(created.max(0)..=window_minutes);
            issue(
                &format!("R-{k}"),
                ty,
                t0() + Duration::minutes(created),
                t0() + Duration::minutes(resolved),
            )
        })
        .collect();
    (issues, window)
}

/// Atomic states covering instant `t`, straight from the issue list.
pub fn covering_types(issues: &[IssueRecord], window: &ReleaseWindow, t: Timestamp) -> BTreeSet<StateSymbol> {
    issues
        .iter()
        .filter_map(|i| {
            let s = match &i.issue_type {
                IssueType::Bug => st("B"),
                IssueType::Improvement => st("I"),
                IssueType::NewFeature => st("F"),
                IssueType::Task => st("T"),
                IssueType::SubTask => return None,
                IssueType::Other(_) => StateSymbol::X,
            };
            let open = i.created.max(window.inception);
            let close = i.resolved?.min(window.ending);
            (open <= t && t <= close).then_some(s)
        })
        .collect()
}

/// Global state implied by a set of covering atomic types.
pub fn expected_global(types: &BTreeSet<StateSymbol>) -> String {
    let letters: String = ["B", "I", "F", "T"]
        .iter()
        .filter(|l| types.contains(&st(l)))
        .copied()
        .collect();
    if !letters.is_empty() {
        letters
    } else if types.contains(&StateSymbol::X) {
        "X".into()
    } else {
        "Z".into()
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Optimal Matching by exhaustive enumeration of edit scripts.
///
/// Every edit script corresponds to an order-preserving matching between
/// some positions of `a` and some positions of `b`: matched pairs are
/// substituted, everything else is deleted or inserted. The cheapest over
/// all matchings is the distance.
pub fn om_exhaustive(a: &[StateSymbol], b: &[StateSymbol], scm: &SubstitutionCostMatrix) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..=a.len().min(b.len()) {
        let indel = (a.len() + b.len() - 2 * k) as f64 * scm.indel;
        for ia in combinations(a.len(), k) {
            for ib in combinations(b.len(), k) {
                let subs: f64 = ia.iter().zip(&ib).map(|(&i, &j)| scm.cost(a[i], b[j]).unwrap()).sum();
                best = best.min(indel + subs);
            }
        }
    }
    best
}

/// Random symmetric substitution costs in `[0, 2]` over `alphabet`.
pub fn random_scm<R: Rng>(rng: &mut R, alphabet: &[StateSymbol], indel: f64) -> SubstitutionCostMatrix {
    let n = alphabet.len();
    let mut upper = vec![vec![0.0; n]; n];
    for (i, row) in upper.iter_mut().enumerate() {
        for c in row.iter_mut().skip(i + 1) {
            *c = rng.gen_range(0.0..=2.0);
        }
    }
    let costs = (0..n).map(|i| (0..n).map(|j| upper[i.min(j)][i.max(j)]).collect()).collect();
    SubstitutionCostMatrix::new(alphabet.to_vec(), costs, indel).unwrap()
}

/// Adjacent-pair tally, keyed by `(from, to)`.
pub fn pair_counts(seqs: &[Vec<StateSymbol>]) -> HashMap<(StateSymbol, StateSymbol), u64> {
    let mut out = HashMap::new();
    for s in seqs {
        for i in 1..s.len() {
            *out.entry((s[i - 1], s[i])).or_insert(0) += 1;
        }
    }
    out
}

/// Rand index between two labelings of the same items.
pub fn rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut agree = 0u64;
    let mut total = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

/// Random maximal-run state sequence with integer durations, as
/// `(state, start, end)` from 0.
pub fn random_runs<R: Rng>(rng: &mut R, max_segments: usize, max_len: i64) -> Vec<(StateSymbol, i64, i64)> {
    let alphabet = StateSymbol::all();
    let n = rng.gen_range(1..=max_segments);
    let mut out: Vec<(StateSymbol, i64, i64)> = Vec::new();
    let mut t = 0;
    while out.len() < n {
        let s = alphabet[rng.gen_range(0..alphabet.len())];
        if out.last().is_some_and(|l| l.0 == s) {
            continue;
        }
        let len = rng.gen_range(1..=max_len);
        out.push((s, t, t + len));
        t += len;
    }
    out
}
