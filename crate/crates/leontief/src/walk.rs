//! Monte-Carlo random walks over absorbing chains: an independent oracle for
//! expected visits, absorption probabilities and absorption times.

use crate::matrix::Matrix;
use crate::table::AugmentedChain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default walk-length cap guarding against near-unit spectral radii.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;
/// Fixed partition count; each partition draws its stream from
/// `(seed, partition index)` so results are reproducible.
pub const PARTITIONS: u32 = 1;

const ABSORBING_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("start state {start} is not transient")]
    NotTransientStart { start: usize },
    #[error("state {state} out of range for {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("chain has no absorbing state")]
    NoAbsorbingState,
    #[error("need at least one walk")]
    NoWalks,
}

/// Empirical statistics of a batch of absorbing random walks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub start_state: usize,
    pub n_walks: u64,
    pub mean_steps: f64,
    pub stderr_steps: f64,
    /// Mean visits per transient state, starting visit included, indexed like
    /// `transient_states`.
    pub mean_visits: Vec<f64>,
    pub stderr_visits: Vec<f64>,
    /// Absorption frequencies over completed walks, indexed like
    /// `absorbing_states`; sums to one whenever any walk completed.
    pub absorb_freq: Vec<f64>,
    pub transient_states: Vec<usize>,
    pub absorbing_states: Vec<usize>,
    /// Walks cut off at the step cap; censoring biases `mean_steps` downward.
    pub censored: u64,
    pub seed: u64,
    pub partitions: u32,
}

/// Runs `n_walks` random walks from `start` until absorption or the step
/// cap. Deterministic for a fixed seed within one build.
pub fn simulate(
    chain: &AugmentedChain,
    start: usize,
    n_walks: u64,
    seed: u64,
    step_cap: u64,
) -> Result<WalkStats, WalkError> {
    simulate_transition(&chain.transition, start, n_walks, seed, step_cap)
}

/// Core simulator over any row-stochastic transition matrix with at least
/// one absorbing state.
pub fn simulate_transition(
    transition: &Matrix,
    start: usize,
    n_walks: u64,
    seed: u64,
    step_cap: u64,
) -> Result<WalkStats, WalkError> {
    let n = transition.rows();
    if start >= n {
        return Err(WalkError::StateOutOfRange { state: start, n });
    }
    if n_walks == 0 {
        return Err(WalkError::NoWalks);
    }
    let absorbing: Vec<usize> = (0..n)
        .filter(|&i| transition.get(i, i) >= 1.0 - ABSORBING_TOL)
        .collect();
    if absorbing.is_empty() {
        return Err(WalkError::NoAbsorbingState);
    }
    let transient: Vec<usize> = (0..n).filter(|i| !absorbing.contains(i)).collect();
    let mut transient_index = vec![usize::MAX; n];
    for (k, &s) in transient.iter().enumerate() {
        transient_index[s] = k;
    }
    let mut absorbing_index = vec![usize::MAX; n];
    for (k, &s) in absorbing.iter().enumerate() {
        absorbing_index[s] = k;
    }
    if transient_index[start] == usize::MAX {
        return Err(WalkError::NotTransientStart { start });
    }

    // Cumulative rows once, sampled by linear scan.
    let cumulative: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            transition
                .row(i)
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();

    let p = transient.len();
    let mut steps_sum = 0.0;
    let mut steps_sq = 0.0;
    let mut visit_sum = vec![0.0; p];
    let mut visit_sq = vec![0.0; p];
    let mut absorb_counts = vec![0u64; absorbing.len()];
    let mut censored = 0u64;
    let mut walk_visits = vec![0u64; p];

    let step_cap = step_cap.max(1);
    for partition in 0..PARTITIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(partition as u64);
        let walks_here = walks_in_partition(n_walks, partition);
        for _ in 0..walks_here {
            walk_visits.iter_mut().for_each(|v| *v = 0);
            let mut state = start;
            walk_visits[transient_index[start]] += 1;
            let mut steps = 0u64;
            loop {
                let u: f64 = rng.random();
                let row = &cumulative[state];
                let mut next = row.len() - 1;
                for (j, &c) in row.iter().enumerate() {
                    if u < c {
                        next = j;
                        break;
                    }
                }
                steps += 1;
                if absorbing_index[next] != usize::MAX {
                    absorb_counts[absorbing_index[next]] += 1;
                    break;
                }
                walk_visits[transient_index[next]] += 1;
                if steps >= step_cap {
                    censored += 1;
                    break;
                }
                state = next;
            }
            let s = steps as f64;
            steps_sum += s;
            steps_sq += s * s;
            for k in 0..p {
                let v = walk_visits[k] as f64;
                visit_sum[k] += v;
                visit_sq[k] += v * v;
            }
        }
    }

    let nw = n_walks as f64;
    let stderr = |sum: f64, sq: f64| -> f64 {
        if n_walks < 2 {
            return 0.0;
        }
        let mean = sum / nw;
        let var = ((sq - nw * mean * mean) / (nw - 1.0)).max(0.0);
        (var / nw).sqrt()
    };
    let completed: u64 = absorb_counts.iter().sum();
    let mut absorb_freq = vec![0.0; absorb_counts.len()];
    if completed > 0 {
        // Last frequency closes the sum to exactly one.
        let mut partial = 0.0;
        for (k, &c) in absorb_counts.iter().enumerate() {
            if k + 1 == absorb_counts.len() {
                absorb_freq[k] = 1.0 - partial;
            } else {
                absorb_freq[k] = c as f64 / completed as f64;
                partial += absorb_freq[k];
            }
        }
    }

    Ok(WalkStats {
        start_state: start,
        n_walks,
        mean_steps: steps_sum / nw,
        stderr_steps: stderr(steps_sum, steps_sq),
        mean_visits: visit_sum.iter().map(|v| v / nw).collect(),
        stderr_visits: visit_sum
            .iter()
            .zip(&visit_sq)
            .map(|(&s, &sq)| stderr(s, sq))
            .collect(),
        absorb_freq,
        transient_states: transient,
        absorbing_states: absorbing,
        censored,
        seed,
        partitions: PARTITIONS,
    })
}

fn walks_in_partition(n_walks: u64, partition: u32) -> u64 {
    let base = n_walks / PARTITIONS as u64;
    let extra = n_walks % PARTITIONS as u64;
    base + u64::from((partition as u64) < extra)
}

/// One z-scored comparison between an empirical and an analytic quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub quantity: String,
    pub empirical: f64,
    pub analytic: f64,
    pub stderr: f64,
    pub z: f64,
    pub flagged: bool,
}

/// Oracle verdict: analytic values against the simulated batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub scores: Vec<ZScore>,
    /// Any `|z| > 3`.
    pub flagged: bool,
    pub censored_walks: u64,
    /// False when censoring occurred or any score is flagged.
    pub certified: bool,
}

fn z_score(quantity: String, empirical: f64, analytic: f64, stderr: f64) -> ZScore {
    let diff = empirical - analytic;
    let z = if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY * diff.signum()
    };
    ZScore {
        quantity,
        empirical,
        analytic,
        stderr,
        z,
        flagged: z.abs() > 3.0,
    }
}

/// Compares a simulated batch against the analytic chain quantities.
pub fn compare(
    stats: &WalkStats,
    analysis: &crate::chain::ChainAnalysis,
    labels: &[String],
) -> CompareReport {
    compare_to_fundamental(stats, &analysis.n_mat, &analysis.t, labels)
}

/// Compares simulated steps and visit counts against an analytic fundamental
/// matrix and absorption-time vector (indexed over the same transient
/// states).
pub fn compare_to_fundamental(
    stats: &WalkStats,
    n_mat: &Matrix,
    t: &[f64],
    labels: &[String],
) -> CompareReport {
    let start_row = stats
        .transient_states
        .iter()
        .position(|&s| s == stats.start_state)
        .expect("start state is transient");
    let mut scores = vec![z_score(
        "steps".to_string(),
        stats.mean_steps,
        t[start_row],
        stats.stderr_steps,
    )];
    for (k, &state) in stats.transient_states.iter().enumerate() {
        let name = labels
            .get(state)
            .cloned()
            .unwrap_or_else(|| format!("s{state}"));
        scores.push(z_score(
            format!("visits[{name}]"),
            stats.mean_visits[k],
            n_mat.get(start_row, k),
            stats.stderr_visits[k],
        ));
    }
    let flagged = scores.iter().any(|s| s.flagged);
    CompareReport {
        flagged,
        censored_walks: stats.censored,
        certified: !flagged && stats.censored == 0,
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainAnalysis;
    use crate::table::{augment, coefficients, parse_flow_table, Orientation, ParseOptions};

    const TWO_POLE_CSV: &str = "pole,P1,P2,Y\nP1,0.1,0.4,0.5\nP2,0.2,0.8,1.0\n";

    fn two_pole_chain() -> AugmentedChain {
        let t = parse_flow_table(TWO_POLE_CSV.as_bytes(), ParseOptions::default()).unwrap();
        augment(&coefficients(&t), Orientation::Indirect)
    }

    #[test]
    fn immediate_absorption_is_exact() {
        let csv = "pole,A,B,Y\nA,0,0,3.0\nB,0,0,2.0\n";
        let t = parse_flow_table(csv.as_bytes(), ParseOptions::default()).unwrap();
        let chain = augment(&coefficients(&t), Orientation::Indirect);
        let stats = simulate(&chain, 0, 5_000, 42, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(stats.mean_steps, 1.0);
        assert_eq!(stats.stderr_steps, 0.0);
        assert_eq!(stats.censored, 0);
        assert_eq!(stats.absorb_freq, vec![1.0]);
    }

    #[test]
    fn two_pole_matches_analytic_time() {
        let chain = two_pole_chain();
        let stats = simulate(&chain, 0, 200_000, 7, DEFAULT_STEP_CAP).unwrap();
        // Analytic t_1 = 2.0.
        assert!((stats.mean_steps - 2.0).abs() <= 3.0 * stats.stderr_steps);
        let total_visits: f64 = stats.mean_visits.iter().sum();
        assert!((total_visits - stats.mean_steps).abs() < 1e-12);
        let freq_sum: f64 = stats.absorb_freq.iter().sum();
        assert_eq!(freq_sum, 1.0);
    }

    #[test]
    fn absorbing_start_is_rejected() {
        let chain = two_pole_chain();
        assert!(matches!(
            simulate(&chain, 2, 100, 0, DEFAULT_STEP_CAP),
            Err(WalkError::NotTransientStart { start: 2 })
        ));
        assert!(matches!(
            simulate(&chain, 9, 100, 0, DEFAULT_STEP_CAP),
            Err(WalkError::StateOutOfRange { .. })
        ));
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let chain = two_pole_chain();
        let a = simulate(&chain, 0, 10_000, 123, DEFAULT_STEP_CAP).unwrap();
        let b = simulate(&chain, 0, 10_000, 123, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(a, b);
        let c = simulate(&chain, 0, 10_000, 124, DEFAULT_STEP_CAP).unwrap();
        assert_ne!(a.mean_steps, c.mean_steps);
    }

    #[test]
    fn comparer_accepts_truth_and_flags_perturbation() {
        let t = parse_flow_table(TWO_POLE_CSV.as_bytes(), ParseOptions::default()).unwrap();
        let c = coefficients(&t);
        let chain = augment(&c, Orientation::Indirect);
        let analysis = ChainAnalysis::from_coefficients(&c).unwrap();
        let stats = simulate(&chain, 0, 200_000, 99, DEFAULT_STEP_CAP).unwrap();

        let report =
            compare_to_fundamental(&stats, &analysis.n_mat, &analysis.t, &chain.labels);
        assert!(!report.flagged, "scores: {:?}", report.scores);
        assert!(report.certified);

        let mut shifted = analysis.t.clone();
        shifted[0] += 0.5;
        let report = compare_to_fundamental(&stats, &analysis.n_mat, &shifted, &chain.labels);
        assert!(report.flagged);
        assert!(!report.certified);
    }

    #[test]
    fn exact_match_degenerate_chain_has_zero_z() {
        let csv = "pole,A,Y\nA,0,5.0\n";
        let t = parse_flow_table(csv.as_bytes(), ParseOptions::default()).unwrap();
        let c = coefficients(&t);
        let chain = augment(&c, Orientation::Indirect);
        let analysis = ChainAnalysis::from_coefficients(&c).unwrap();
        let stats = simulate(&chain, 0, 1_000, 5, DEFAULT_STEP_CAP).unwrap();
        let report =
            compare_to_fundamental(&stats, &analysis.n_mat, &analysis.t, &chain.labels);
        assert!(report.scores.iter().all(|s| s.z == 0.0));
        assert!(report.certified);
    }

    #[test]
    fn censoring_is_reported_and_blocks_certification() {
        let chain = two_pole_chain();
        let stats = simulate(&chain, 0, 2_000, 11, 1).unwrap();
        assert!(stats.censored > 0);
        let t = parse_flow_table(TWO_POLE_CSV.as_bytes(), ParseOptions::default()).unwrap();
        let analysis = ChainAnalysis::from_coefficients(&coefficients(&t)).unwrap();
        let report =
            compare_to_fundamental(&stats, &analysis.n_mat, &analysis.t, &chain.labels);
        assert!(!report.certified);
    }

    #[test]
    fn compare_adapter_matches_fundamental_route() {
        let t = parse_flow_table(TWO_POLE_CSV.as_bytes(), ParseOptions::default()).unwrap();
        let c = coefficients(&t);
        let chain = augment(&c, Orientation::Indirect);
        let analysis = ChainAnalysis::from_coefficients(&c).unwrap();
        let stats = simulate(&chain, 1, 20_000, 17, DEFAULT_STEP_CAP).unwrap();
        let a = compare(&stats, &analysis, &chain.labels);
        let b = compare_to_fundamental(&stats, &analysis.n_mat, &analysis.t, &chain.labels);
        assert_eq!(a, b);
    }

    #[test]
    fn absorption_frequencies_match_analytic_probabilities() {
        use crate::chain::absorption_analysis;
        use crate::matrix::Matrix;
        // Random-looking 4-state chain with two absorbing states.
        let p = Matrix::from_rows(&[
            vec![0.3, 0.3, 0.25, 0.15],
            vec![0.2, 0.1, 0.1, 0.6],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let split = absorption_analysis(&p).unwrap();
        let stats = simulate_transition(&p, 0, 100_000, 31, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(stats.absorbing_states, split.absorbing_states);
        let n = stats.n_walks as f64;
        for (k, &freq) in stats.absorb_freq.iter().enumerate() {
            let prob = split.absorb_probs.get(0, k);
            let stderr = (prob * (1.0 - prob) / n).sqrt();
            assert!(
                (freq - prob).abs() <= 3.0 * stderr,
                "absorbing state {k}: freq {freq} vs prob {prob}"
            );
        }
        let total: f64 = stats.absorb_freq.iter().sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn stderr_shrinks_with_more_walks() {
        let chain = two_pole_chain();
        let small = simulate(&chain, 0, 2_000, 3, DEFAULT_STEP_CAP).unwrap();
        let big = simulate(&chain, 0, 128_000, 3, DEFAULT_STEP_CAP).unwrap();
        // 64x the walks should shrink the standard error by about 8.
        let ratio = small.stderr_steps / big.stderr_steps;
        assert!(ratio > 4.0 && ratio < 16.0, "ratio {ratio}");
    }
}
