//! Fundamental-matrix analytics: expected visits, absorption probabilities,
//! absorption times with their theoretical bounds and relative-duration
//! ratios, and the marginal-effect accessors.

use crate::graph::{adjacency_from_matrix, classify_states, GraphError};
use crate::matrix::{lu_invert, perron_root, Matrix, MatrixError, PERRON_MAX_ITER, PERRON_TOL};
use crate::table::{AugmentedChain, CoefficientSet};
use thiserror::Error;

/// Spectral-radius margin below one required of a transient block.
pub const PRODUCTIVITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(
        "non-productive economy: spectral radius {rho} leaves no effective final demand"
    )]
    NonProductive { rho: f64 },
    #[error("chain has no absorbing state")]
    NoAbsorbingState,
    #[error("chain has no transient state to split off")]
    NoTransientState,
    #[error("index ({i}, {j}) out of range for {n} poles")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Fundamental matrix `(I - sub)^{-1}` of a substochastic block.
///
/// Checks `rho(sub) <= 1 - 1e-9` first and reports `NonProductive` otherwise.
/// Entrywise non-negative; negative floating-point residue within `1e-9` of
/// zero is clamped.
pub fn fundamental(sub: &Matrix) -> Result<Matrix, ChainError> {
    let perron = perron_root(sub, PERRON_TOL, PERRON_MAX_ITER)?;
    if perron.root > 1.0 - PRODUCTIVITY_MARGIN {
        return Err(ChainError::NonProductive { rho: perron.root });
    }
    let n = sub.rows();
    let mut inv = lu_invert(&Matrix::identity(n).sub(sub))?;
    // Negative residue scales with the inverse itself near rho = 1.
    let floor = -1e-9 * inv.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            let v = inv.get(i, j);
            if v < 0.0 {
                debug_assert!(v > floor, "fundamental matrix entry {v} at ({i}, {j})");
                inv.set(i, j, 0.0);
            }
        }
    }
    Ok(inv)
}

/// Expected steps before absorption: row sums `t = N 1` of a fundamental
/// matrix. Every component is at least one (the initial visit counts).
pub fn absorption_times(n_mat: &Matrix) -> Vec<f64> {
    n_mat.row_sums()
}

/// Theoretical absorption-time envelope derived from the final-demand rates.
///
/// The transformation pole holds the minimal rate, the outlet pole the
/// maximal one. A zero rate at the transformation pole pushes the upper
/// bounds of every pole still feeding intermediation to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBounds {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// Index of the minimal final-demand rate (`argmax` of `1 - y`).
    pub transformation_pole: usize,
    /// Index of the maximal final-demand rate (`argmin` of `1 - y`).
    pub outlet_pole: usize,
}

/// Bounds `1 + (1 - y_i) / y_star` per pole, where `y_star` is the
/// transformation-pole rate for the upper bound and the outlet-pole rate for
/// the lower. At the extremal pole itself the formula collapses to
/// `1 / y_star`.
pub fn absorption_time_bounds(y_rates: &[f64]) -> TimeBounds {
    assert!(!y_rates.is_empty(), "bounds need at least one pole");
    let mut transformation_pole = 0;
    let mut outlet_pole = 0;
    for (i, &y) in y_rates.iter().enumerate() {
        if y < y_rates[transformation_pole] {
            transformation_pole = i;
        }
        if y > y_rates[outlet_pole] {
            outlet_pole = i;
        }
    }
    let bound_against = |y_i: f64, y_ref: f64| -> f64 {
        let held = 1.0 - y_i;
        if held <= 0.0 {
            // Everything leaves for the absorbing state in one step.
            1.0
        } else if y_ref <= 0.0 {
            f64::INFINITY
        } else {
            1.0 + held / y_ref
        }
    };
    let y_transformation = y_rates[transformation_pole];
    let y_outlet = y_rates[outlet_pole];
    TimeBounds {
        upper: y_rates
            .iter()
            .map(|&y| bound_against(y, y_transformation))
            .collect(),
        lower: y_rates.iter().map(|&y| bound_against(y, y_outlet)).collect(),
        transformation_pole,
        outlet_pole,
    }
}

/// Relative duration `(t - lower) / (upper - lower)`, clamped to `[0, 1]`;
/// `None` where the envelope is degenerate or unbounded.
pub fn relative_duration(t: &[f64], upper: &[f64], lower: &[f64]) -> Vec<Option<f64>> {
    t.iter()
        .zip(upper)
        .zip(lower)
        .map(|((&ti, &ui), &li)| {
            let span = ui - li;
            if !ui.is_finite() || span <= 0.0 {
                None
            } else {
                Some(((ti - li) / span).clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// Which marginal-effect family a sensitivity query addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityKind {
    /// `dX_i / dY_j = O_ij`
    OutputWrtFinalDemand,
    /// `dX_j / dW_i = N_ij`
    OutputWrtValueAdded,
    /// `dM_j / dY_i = Q_ij`
    MoneyWrtFinalDemand,
}

/// One extracted sensitivity entry with its matrix coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEntry {
    pub value: f64,
    pub row: usize,
    pub col: usize,
}

/// Fundamental matrices and duration diagnostics of one economy.
///
/// Immutable after construction; all accessors are constant-time reads over
/// the precomputed inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAnalysis {
    /// Output multiplier matrix `O = (I - Theta)^{-1}`.
    pub o: Matrix,
    /// Supply-side fundamental matrix `N = (I - A)^{-1}`.
    pub n_mat: Matrix,
    /// Monetary fundamental matrix `Q = (I - G)^{-1} = O^T`.
    pub q: Matrix,
    /// Expected absorption steps `t = N 1`.
    pub t: Vec<f64>,
    pub t_upper: Vec<f64>,
    pub t_lower: Vec<f64>,
    pub dt_ratio: Vec<Option<f64>>,
    pub bounds: TimeBounds,
}

impl ChainAnalysis {
    /// Runs the full analytics over a coefficient set.
    pub fn from_coefficients(c: &CoefficientSet) -> Result<Self, ChainError> {
        let o = fundamental(&c.theta)?;
        let n_mat = fundamental(&c.alpha)?;
        // Q = (I - G)^{-1} = O^T since G = Theta^T; transposing shares the
        // computation path, so the duality holds entrywise exactly.
        let q = o.transpose();
        let t = absorption_times(&n_mat);
        let bounds = absorption_time_bounds(&c.y_rates);
        let dt_ratio = relative_duration(&t, &bounds.upper, &bounds.lower);
        Ok(ChainAnalysis {
            o,
            n_mat,
            q,
            t,
            t_upper: bounds.upper.clone(),
            t_lower: bounds.lower.clone(),
            dt_ratio,
            bounds,
        })
    }

    pub fn pole_count(&self) -> usize {
        self.t.len()
    }

    fn matrix_for(&self, kind: SensitivityKind) -> &Matrix {
        match kind {
            SensitivityKind::OutputWrtFinalDemand => &self.o,
            SensitivityKind::OutputWrtValueAdded => &self.n_mat,
            SensitivityKind::MoneyWrtFinalDemand => &self.q,
        }
    }

    /// Single marginal effect `O_ij`, `N_ij` or `Q_ij` (zero-based indices).
    pub fn sensitivity(
        &self,
        kind: SensitivityKind,
        i: usize,
        j: usize,
    ) -> Result<f64, ChainError> {
        let n = self.pole_count();
        if i >= n || j >= n {
            return Err(ChainError::IndexOutOfRange { i, j, n });
        }
        Ok(self.matrix_for(kind).get(i, j))
    }

    fn sorted_entries(&self, kind: SensitivityKind) -> Vec<SensitivityEntry> {
        let m = self.matrix_for(kind);
        let n = self.pole_count();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(SensitivityEntry {
                    value: m.get(i, j),
                    row: i,
                    col: j,
                });
            }
        }
        // Deterministic order: value, then coordinates.
        entries.sort_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap()
                .then(a.row.cmp(&b.row))
                .then(a.col.cmp(&b.col))
        });
        entries
    }

    /// The `k` largest marginal effects, descending.
    pub fn top_sensitivities(&self, kind: SensitivityKind, k: usize) -> Vec<SensitivityEntry> {
        let mut entries = self.sorted_entries(kind);
        entries.reverse();
        entries.truncate(k);
        entries
    }

    /// The `k` smallest marginal effects, ascending.
    pub fn bottom_sensitivities(&self, kind: SensitivityKind, k: usize) -> Vec<SensitivityEntry> {
        let mut entries = self.sorted_entries(kind);
        entries.truncate(k);
        entries
    }
}

/// Canonical-form split of an absorbing chain and its absorption
/// probabilities `N R`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionSplit {
    /// Transient-to-transient block `B`.
    pub transient_block: Matrix,
    /// Transient-to-absorbing block `R`.
    pub absorption_block: Matrix,
    /// Fundamental matrix `(I - B)^{-1}` of the transient block.
    pub fundamental: Matrix,
    /// Absorption probabilities `N R`; rows sum to one.
    pub absorb_probs: Matrix,
    pub transient_states: Vec<usize>,
    pub absorbing_states: Vec<usize>,
}

/// Splits a row-stochastic transition matrix into canonical blocks and
/// computes the absorption probabilities.
pub fn absorption_analysis(transition: &Matrix) -> Result<AbsorptionSplit, ChainError> {
    let n = transition.rows();
    let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let g = adjacency_from_matrix(transition, &labels, 0.0)?;
    let classification = classify_states(&g)?;
    let absorbing_states = classification.absorbing_states();
    if absorbing_states.is_empty() {
        return Err(ChainError::NoAbsorbingState);
    }
    let transient_states: Vec<usize> = (0..n)
        .filter(|i| !absorbing_states.contains(i))
        .collect();
    let p = transient_states.len();
    let q = absorbing_states.len();
    if p == 0 {
        return Err(ChainError::NoTransientState);
    }
    let mut b = Matrix::zeros(p, p);
    let mut r = Matrix::zeros(p, q);
    for (a, &i) in transient_states.iter().enumerate() {
        for (bb, &j) in transient_states.iter().enumerate() {
            b.set(a, bb, transition.get(i, j));
        }
        for (c, &j) in absorbing_states.iter().enumerate() {
            r.set(a, c, transition.get(i, j));
        }
    }
    let n_mat = fundamental(&b)?;
    let absorb_probs = n_mat.mul(&r);
    Ok(AbsorptionSplit {
        transient_block: b,
        absorption_block: r,
        fundamental: n_mat,
        absorb_probs,
        transient_states,
        absorbing_states,
    })
}

impl AugmentedChain {
    /// Canonical split of this chain.
    pub fn absorption_analysis(&self) -> Result<AbsorptionSplit, ChainError> {
        absorption_analysis(&self.transition)
    }
}

/// Theoretical extremes of the marginal effects given the final-demand rates:
/// the self-effect ceiling `1 / y_i` and the cross-effect ceiling
/// `(1 - y_i) / y_j`; the floor is the identity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEnvelope {
    y_rates: Vec<f64>,
    /// Per-pole ceiling `1 / y_i` on the self-effect `O_ii`.
    pub max_self: Vec<f64>,
}

impl MarginalEnvelope {
    pub fn max_cross(&self, i: usize, j: usize) -> f64 {
        let held = 1.0 - self.y_rates[i];
        if self.y_rates[j] <= 0.0 {
            if held <= 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            held / self.y_rates[j]
        }
    }

    /// Largest self-effect ceiling and the pole attaining it.
    pub fn global_max_self(&self) -> (f64, usize) {
        let mut best = (self.max_self[0], 0);
        for (i, &v) in self.max_self.iter().enumerate() {
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Largest cross-effect ceiling over all ordered pairs `i != j`.
    pub fn global_max_cross(&self) -> Option<(f64, usize, usize)> {
        let n = self.y_rates.len();
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = self.max_cross(i, j);
                if best.is_none() || v > best.unwrap().0 {
                    best = Some((v, i, j));
                }
            }
        }
        best
    }

    /// Off-diagonal floor of the marginal effect.
    pub const MIN_CROSS: f64 = 0.0;
    /// Diagonal floor of the marginal effect.
    pub const MIN_SELF: f64 = 1.0;
}

/// Builds the marginal-effect envelope for the given rates.
pub fn marginal_extremes(y_rates: &[f64]) -> MarginalEnvelope {
    let max_self = y_rates
        .iter()
        .map(|&y| if y > 0.0 { 1.0 / y } else { f64::INFINITY })
        .collect();
    MarginalEnvelope {
        y_rates: y_rates.to_vec(),
        max_self,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{augment, coefficients, parse_flow_table, Orientation, ParseOptions};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TWO_POLE_CSV: &str = "pole,P1,P2,Y\nP1,0.1,0.4,0.5\nP2,0.2,0.8,1.0\n";

    fn two_pole_analysis() -> ChainAnalysis {
        let t = parse_flow_table(TWO_POLE_CSV.as_bytes(), ParseOptions::default()).unwrap();
        ChainAnalysis::from_coefficients(&coefficients(&t)).unwrap()
    }

    #[test]
    fn fundamental_of_zero_is_identity() {
        let f = fundamental(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(f, Matrix::identity(3));
    }

    #[test]
    fn fundamental_two_pole_alpha() {
        let alpha = Matrix::from_rows(&[vec![0.1, 0.4], vec![0.1, 0.4]]).unwrap();
        let f = fundamental(&alpha).unwrap();
        let expected = Matrix::from_rows(&[vec![1.2, 0.8], vec![0.2, 1.8]]).unwrap();
        assert!(f.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn fundamental_rejects_stochastic_block() {
        // Every y_i = 0: the block is stochastic and rho = 1.
        let alpha = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.6, 0.4]]).unwrap();
        assert!(matches!(
            fundamental(&alpha),
            Err(ChainError::NonProductive { .. })
        ));
    }

    #[test]
    fn absorption_times_examples() {
        assert_eq!(absorption_times(&Matrix::identity(3)), vec![1.0, 1.0, 1.0]);
        let analysis = two_pole_analysis();
        assert_abs_diff_eq!(analysis.t[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(analysis.t[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pure_final_demand_pole_absorbs_in_one_step() {
        let csv = "pole,A,B,Y\nA,0.2,0.3,0.5\nB,0,0,4.0\n";
        let t = parse_flow_table(csv.as_bytes(), ParseOptions::default()).unwrap();
        let analysis = ChainAnalysis::from_coefficients(&coefficients(&t)).unwrap();
        assert_abs_diff_eq!(analysis.t[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bounds_collapse_for_uniform_rates() {
        let b = absorption_time_bounds(&[0.5, 0.5]);
        assert_eq!(b.upper, vec![2.0, 2.0]);
        assert_eq!(b.lower, vec![2.0, 2.0]);
    }

    #[test]
    fn bounds_reproduce_printed_morocco_rows() {
        // Rates recovered from the published duration table: the
        // transformation pole holds y = 0.088774, the outlet pole y = 1.
        let y = vec![1.0 - 0.42593988, 0.088774216, 1.0];
        let b = absorption_time_bounds(&y);
        assert_eq!(b.transformation_pole, 1);
        assert_eq!(b.outlet_pole, 2);
        assert!((b.upper[0] - 5.798013421).abs() < 1e-4);
        assert!((b.lower[0] - 1.42593988).abs() < 1e-9);
        assert!((b.upper[1] - 11.26453202).abs() < 1e-4);
        assert!((b.lower[1] - 1.911225784).abs() < 1e-9);
        assert_eq!(b.upper[2], 1.0);
        assert_eq!(b.lower[2], 1.0);
    }

    #[test]
    fn zero_rate_pushes_upper_bounds_to_infinity() {
        let b = absorption_time_bounds(&[0.0, 0.5, 0.8]);
        assert!(b.upper[1].is_infinite());
        assert!(b.upper[2].is_infinite());
        assert!(b.upper[0].is_infinite());
        assert!(b.lower.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn relative_duration_examples() {
        let dt = relative_duration(&[1.42593988], &[5.798013421], &[1.42593988]);
        assert_eq!(dt, vec![Some(0.0)]);
        let dt = relative_duration(&[1.59156], &[5.798013421], &[1.42593988]);
        assert!((dt[0].unwrap() - 0.037881366).abs() < 1e-5);
        // Degenerate envelope like the pure final-demand pole row.
        let dt = relative_duration(&[1.0], &[1.0], &[1.0]);
        assert_eq!(dt, vec![None]);
        let dt = relative_duration(&[2.0], &[f64::INFINITY], &[1.5]);
        assert_eq!(dt, vec![None]);
    }

    #[test]
    fn sensitivity_accessors() {
        let analysis = two_pole_analysis();
        // O = (I - Theta)^{-1} = [[1.2, 0.4], [0.4, 1.8]].
        let v = analysis
            .sensitivity(SensitivityKind::OutputWrtFinalDemand, 0, 1)
            .unwrap();
        assert_abs_diff_eq!(v, 0.4, epsilon = 1e-12);
        // Q = O^T entrywise, exactly.
        for i in 0..2 {
            for j in 0..2 {
                let q = analysis
                    .sensitivity(SensitivityKind::MoneyWrtFinalDemand, i, j)
                    .unwrap();
                let o = analysis
                    .sensitivity(SensitivityKind::OutputWrtFinalDemand, j, i)
                    .unwrap();
                assert_eq!(q, o);
            }
        }
        assert!(matches!(
            analysis.sensitivity(SensitivityKind::OutputWrtFinalDemand, 2, 0),
            Err(ChainError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn top_and_bottom_extraction() {
        let analysis = two_pole_analysis();
        let top = analysis.top_sensitivities(SensitivityKind::OutputWrtFinalDemand, 2);
        assert_eq!(top.len(), 2);
        assert_abs_diff_eq!(top[0].value, 1.8, epsilon = 1e-12);
        assert_eq!((top[0].row, top[0].col), (1, 1));
        let bottom = analysis.bottom_sensitivities(SensitivityKind::OutputWrtFinalDemand, 1);
        assert_abs_diff_eq!(bottom[0].value, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn absorption_split_two_pole() {
        let t = parse_flow_table(TWO_POLE_CSV.as_bytes(), ParseOptions::default()).unwrap();
        let chain = augment(&coefficients(&t), Orientation::Indirect);
        let split = chain.absorption_analysis().unwrap();
        assert_eq!(split.transient_states, vec![0, 1]);
        assert_eq!(split.absorbing_states, vec![2]);
        for i in 0..2 {
            assert_abs_diff_eq!(split.absorb_probs.get(i, 0), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn absorption_split_two_absorbing_states() {
        let p = Matrix::from_rows(&[
            vec![0.0, 0.5, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let split = absorption_analysis(&p).unwrap();
        assert_eq!(split.absorbing_states, vec![1, 2]);
        assert_abs_diff_eq!(split.absorb_probs.get(0, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(split.absorb_probs.get(0, 1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn absorption_split_requires_absorbing_state() {
        let p = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            absorption_analysis(&p),
            Err(ChainError::NoAbsorbingState)
        ));
    }

    #[test]
    fn marginal_envelope_uniform_rates() {
        let env = marginal_extremes(&[0.5, 0.5]);
        assert_eq!(env.global_max_self(), (2.0, 0));
        assert_eq!(env.global_max_cross().unwrap().0, 1.0);
        assert_eq!(MarginalEnvelope::MIN_SELF, 1.0);
        assert_eq!(MarginalEnvelope::MIN_CROSS, 0.0);
    }

    #[test]
    fn autarkic_pole_attains_self_ceiling() {
        // Single pole keeping 0.8 of its output: O = [1 / y] = [5].
        let theta = Matrix::from_rows(&[vec![0.8]]).unwrap();
        let o = fundamental(&theta).unwrap();
        assert_abs_diff_eq!(o.get(0, 0), 5.0, epsilon = 1e-12);
        let env = marginal_extremes(&[0.2]);
        assert_abs_diff_eq!(env.max_self[0], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_pair_attains_cross_ceiling() {
        // Pole 0 ships everything retained into pole 1, which is autarkic:
        // the geometric series gives O_01 = (1 - y_0) / y_1.
        let theta = Matrix::from_rows(&[vec![0.0, 0.3], vec![0.0, 0.4]]).unwrap();
        let o = fundamental(&theta).unwrap();
        let env = marginal_extremes(&[0.7, 0.6]);
        assert_abs_diff_eq!(o.get(0, 1), env.max_cross(0, 1), epsilon = 1e-12);
        assert_abs_diff_eq!(o.get(0, 1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn similarity_transport_and_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.random_range(2..=7);
            let table = crate::table::tests::random_economy(&mut rng, n);
            let c = coefficients(&table);
            let analysis = ChainAnalysis::from_coefficients(&c).unwrap();

            // Q = O^T exactly.
            assert_eq!(analysis.q, analysis.o.transpose());

            // N = X^{-1} O X with X = diag(output).
            for i in 0..n {
                for j in 0..n {
                    let transported =
                        analysis.o.get(i, j) * table.output[j] / table.output[i];
                    let diff = (analysis.n_mat.get(i, j) - transported).abs();
                    assert!(
                        diff <= 1e-8 * transported.abs().max(1.0),
                        "similarity transport failed at ({i}, {j}): {diff}"
                    );
                }
            }

            // Envelope: lower <= t <= upper, entries non-negative, diag >= 1.
            for i in 0..n {
                assert!(analysis.t[i] >= 1.0 - 1e-12);
                assert!(analysis.t_lower[i] <= analysis.t[i] + 1e-9);
                assert!(analysis.t[i] <= analysis.t_upper[i] + 1e-9);
                assert!(analysis.n_mat.get(i, i) >= 1.0 - 1e-12);
                for j in 0..n {
                    assert!(analysis.o.get(i, j) >= 0.0);
                    assert!(analysis.n_mat.get(i, j) >= 0.0);
                }
            }
        }
    }
}
