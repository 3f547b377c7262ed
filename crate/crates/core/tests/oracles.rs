//! Implementation-vs-oracle comparisons on randomized inputs.

mod support;

use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reltraj::clustering::{linkage, Linkage};
use reltraj::distance::{distance_matrix, om_distance, scm_from_rates};
use reltraj::ingest::{select_resolved_issues, SelectionConfig};
use reltraj::model::{DssSequence, Flavor, ReleaseWindow, Segment, Trajectory};
use reltraj::seqstats::transition_rates;
use reltraj::synth::{generate, SynthConfig};
use reltraj::trajectory::{build_atomic_states, build_trajectory, normalize, to_dss};
use reltraj::StateSymbol;
use support::*;

#[test]
fn atomic_coverage_matches_pointwise_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (issues, window) = random_issue_set(&mut rng, 600, 30);
        let atoms = build_atomic_states(&issues, &window);
        let trajectory = build_trajectory(&atoms, &window);
        for m in 0..600 {
            let t = window.inception + Duration::seconds(m * 60 + 30);
            let expected = covering_types(&issues, &window, t);
            let got: std::collections::BTreeSet<StateSymbol> = atoms
                .iter()
                .filter(|(_, list)| list.iter().any(|a| a.open_t <= t && t <= a.close_t))
                .map(|(s, _)| *s)
                .collect();
            assert_eq!(got, expected, "minute {m}");
            assert_eq!(
                trajectory.state_at(t.timestamp()).unwrap().to_string(),
                expected_global(&expected),
                "minute {m}"
            );
        }
    }
}

#[test]
fn atomic_states_are_disjoint_and_sorted() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let (issues, window) = random_issue_set(&mut rng, 2000, 50);
        for list in build_atomic_states(&issues, &window).values() {
            for a in list {
                assert!(a.close_t > a.open_t);
                assert!(window.inception <= a.open_t && a.close_t <= window.ending);
            }
            for w in list.windows(2) {
                // Touching intervals would have been merged.
                assert!(w[0].close_t < w[1].open_t);
            }
        }
    }
}

#[test]
fn om_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let alphabet = states(&["B", "I", "F", "BI", "X", "Z"]);
    for _ in 0..300 {
        let indel = rng.gen_range(0.1..=1.5);
        let scm = random_scm(&mut rng, &alphabet, indel);
        let pick = |rng: &mut ChaCha8Rng| -> Vec<StateSymbol> {
            let n = rng.gen_range(0..=5);
            (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
        };
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        let dp = om_distance(&a, &b, &scm).unwrap();
        let brute = om_exhaustive(&a, &b, &scm);
        assert!((dp - brute).abs() < 1e-9, "{a:?} {b:?}: {dp} vs {brute}");
    }
}

#[test]
fn transition_counts_match_pair_tally() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let seqs: Vec<Vec<StateSymbol>> = (0..10)
            .map(|_| random_runs(&mut rng, 8, 3).into_iter().map(|r| r.0).collect())
            .collect();
        let dss: Vec<DssSequence> = seqs
            .iter()
            .map(|s| DssSequence { release_id: String::new(), states: s.clone() })
            .collect();
        let tm = transition_rates(&dss).unwrap();
        let tally = pair_counts(&seqs);
        for (i, &from) in tm.alphabet.iter().enumerate() {
            let row_total: u64 = tally.iter().filter(|((f, _), _)| *f == from).map(|(_, c)| c).sum();
            for (j, &to) in tm.alphabet.iter().enumerate() {
                let c = tally.get(&(from, to)).copied().unwrap_or(0);
                assert_eq!(tm.support[i][j], c);
                let expected = if row_total == 0 { 0.0 } else { c as f64 / row_total as f64 };
                assert!((tm.rates[i][j] - expected).abs() < 1e-12);
            }
            assert_eq!(tm.support[i][i], 0);
        }
    }
}

#[test]
fn scm_matches_recount_from_raw_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let seqs: Vec<Vec<StateSymbol>> = (0..12)
        .map(|_| random_runs(&mut rng, 6, 2).into_iter().map(|r| r.0).collect())
        .collect();
    let dss: Vec<DssSequence> = seqs
        .iter()
        .map(|s| DssSequence { release_id: String::new(), states: s.clone() })
        .collect();
    let tm = transition_rates(&dss).unwrap();
    let scm = scm_from_rates(&tm, &StateSymbol::all(), 1.0).unwrap();
    let tally = pair_counts(&seqs);
    let p = |from: StateSymbol, to: StateSymbol| {
        let total: u64 = tally.iter().filter(|((f, _), _)| *f == from).map(|(_, c)| c).sum();
        if total == 0 { 0.0 } else { tally.get(&(from, to)).copied().unwrap_or(0) as f64 / total as f64 }
    };
    for a in StateSymbol::all() {
        for b in StateSymbol::all() {
            let expected = if a == b { 0.0 } else { 2.0 - p(a, b) - p(b, a) };
            assert!((scm.cost(a, b).unwrap() - expected).abs() < 1e-12);
        }
    }
}

fn runs_to_trajectory(runs: &[(StateSymbol, i64, i64)]) -> Trajectory {
    let w = ReleaseWindow::new("n", t0(), t0() + Duration::days(1)).unwrap();
    let segments = runs.iter().map(|&(state, start, end)| Segment { state, start, end }).collect();
    Trajectory::new(Flavor::CommitsBased, w, segments).unwrap()
}

#[test]
fn normalization_is_proportional_per_segment() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let runs = random_runs(&mut rng, 12, 500);
        let t = runs_to_trajectory(&runs);
        let total = t.duration() as i128;
        for positions in [100usize, 1000] {
            let sampled = normalize(&t, positions);
            assert_eq!(sampled.len(), positions);
            // Reference: sample time of each position by float midpoint, matched by linear scan.
            let mut counts = vec![0i128; runs.len()];
            for (k, state) in sampled.iter().enumerate() {
                let at = (k as f64 + 0.5) * total as f64 / positions as f64;
                let seg = runs.iter().position(|r| (r.1 as f64) <= at && at < r.2 as f64).unwrap_or(runs.len() - 1);
                assert_eq!(*state, runs[seg].0);
                counts[seg] += 1;
            }
            for (r, &c) in runs.iter().zip(&counts) {
                let len = (r.2 - r.1) as i128;
                assert!((c * total - len * positions as i128).abs() <= total, "count {c} for len {len}/{total}");
            }
        }
    }
}

#[test]
fn synthetic_releases_rebuild_their_planted_trajectories() {
    let corpus = generate(&SynthConfig::default());
    let cfg = SelectionConfig::default();
    for planted in &corpus.planted {
        let selected = select_resolved_issues(&corpus.issues, &planted.window, &cfg);
        let t = build_trajectory(&build_atomic_states(&selected, &planted.window), &planted.window);
        let got: Vec<(StateSymbol, i64, i64)> = t.segments().iter().map(|s| (s.state, s.start, s.end)).collect();
        assert_eq!(got, planted.segments, "{}", planted.window.release_id);
        assert_eq!(to_dss(&t).states, planted.dss());
    }
}

#[test]
fn om_triangle_inequality_when_costs_are_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let alphabet = states(&["B", "I", "F", "Z"]);
    let mut checked = 0;
    for _ in 0..200 {
        let scm = random_scm(&mut rng, &alphabet, 1.0);
        if !scm.is_metric() {
            continue;
        }
        checked += 1;
        let seqs: Vec<(String, Vec<StateSymbol>)> = (0..3)
            .map(|k| {
                let n = rng.gen_range(0..8);
                (k.to_string(), (0..n).map(|_| alphabet[rng.gen_range(0..4)]).collect())
            })
            .collect();
        let dm = distance_matrix(&seqs, &scm).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert!(dm.get(a, c) <= dm.get(a, b) + dm.get(b, c) + 1e-9);
                }
            }
        }
    }
    assert!(checked > 10);
}

#[test]
fn larger_k_refines_smaller_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for method in [Linkage::Ward, Linkage::Average, Linkage::Single, Linkage::Complete] {
        let n = 25;
        let points: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let dm = reltraj::DistanceMatrix {
            release_ids: (0..n).map(|i| format!("r{i}")).collect(),
            distances: points.iter().map(|a| points.iter().map(|b| (a - b).abs()).collect()).collect(),
        };
        let tree = linkage(&dm, method);
        for k in 1..n {
            let coarse = tree.cut(k).unwrap();
            let fine = tree.cut(k + 1).unwrap();
            for i in 0..n {
                for j in 0..n {
                    if fine[i] == fine[j] {
                        assert_eq!(coarse[i], coarse[j]);
                    }
                }
            }
        }
    }
}
