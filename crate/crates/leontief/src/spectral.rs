//! Global dominance diagnostics: Perron root, spectral gap and relaxation
//! time, the interpolated dominance measure `f`, structure classification,
//! and the canonical structure generators used as fixtures.

use crate::matrix::{lu_invert, perron_root, Matrix, MatrixError, PERRON_MAX_ITER, PERRON_TOL};
use crate::table::CoefficientSet;
use thiserror::Error;

/// Half-width of the fair-division band around `f = 1/2`. Chosen because it
/// reproduces the three-way benchmark grouping; exposed as a CLI flag.
pub const DEFAULT_BAND: f64 = 0.01;
/// Two interpolation nodes closer than this are degenerate.
pub const NODE_COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("interpolation nodes ({min}, {mean}, {max}) are not strictly increasing")]
    DegenerateNodes { min: f64, mean: f64, max: f64 },
    #[error("invalid rate vector: {0}")]
    InvalidRates(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Interpolation nodes `(min, mean, max)` of the retained shares `1 - y_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nodes {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Nodes {
    pub fn from_final_demand_rates(y_rates: &[f64]) -> Nodes {
        let held: Vec<f64> = y_rates.iter().map(|y| 1.0 - y).collect();
        let min = held.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = held.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = held.iter().sum::<f64>() / held.len() as f64;
        Nodes { min, mean, max }
    }

    fn degenerate(&self) -> bool {
        self.mean - self.min < NODE_COINCIDENCE_TOL || self.max - self.mean < NODE_COINCIDENCE_TOL
    }
}

/// Arrangement class read off the dominance measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureClass {
    AlmostPyramidal,
    FairDivision,
    AlmostLoop,
}

impl StructureClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StructureClass::AlmostPyramidal => "almost_pyramidal",
            StructureClass::FairDivision => "fair_division",
            StructureClass::AlmostLoop => "almost_loop",
        }
    }
}

/// Spectral diagnostics of one economy.
///
/// `f_value` and `structure` are absent when the interpolation nodes
/// coincide (an economy with uniform final-demand rates has no dominance
/// scale to read off).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Perron root of the trade matrix.
    pub lambda_star: f64,
    /// Absolute spectral gap `1 - lambda_star`.
    pub gap: f64,
    /// Relaxation time `1 / gap`.
    pub t_rel: f64,
    pub nodes: Nodes,
    pub f_value: Option<f64>,
    pub structure: Option<StructureClass>,
}

/// Quadratic interpolant fixed by `f(min) = 0`, `f(mean) = 1/2`,
/// `f(max) = 1`, evaluated at `x`.
///
/// The maximal node maps to one (the loop end of the scale) and the minimal
/// node to zero (the pyramid end).
pub fn f_measure(x: f64, nodes: &Nodes) -> Result<f64, SpectralError> {
    if nodes.degenerate() || !(nodes.min < nodes.mean && nodes.mean < nodes.max) {
        return Err(SpectralError::DegenerateNodes {
            min: nodes.min,
            mean: nodes.mean,
            max: nodes.max,
        });
    }
    let (a, b, c) = (nodes.max, nodes.min, nodes.mean);
    let half_term = 0.5 * (x - b) * (x - a) / ((c - b) * (c - a));
    let unit_term = (x - b) * (x - c) / ((a - b) * (a - c));
    Ok(half_term + unit_term)
}

/// Places an `f` value on the pyramid / fair / loop scale with the given
/// band half-width around `1/2`.
pub fn classify_structure(f_value: f64, band: f64) -> StructureClass {
    if (f_value - 0.5).abs() <= band {
        StructureClass::FairDivision
    } else if f_value < 0.5 {
        StructureClass::AlmostPyramidal
    } else {
        StructureClass::AlmostLoop
    }
}

/// Computes the spectral diagnostics of a coefficient set.
pub fn spectral_summary(c: &CoefficientSet) -> Result<SpectralSummary, SpectralError> {
    let lambda_star = perron_root(&c.alpha, PERRON_TOL, PERRON_MAX_ITER)?.root;
    let gap = 1.0 - lambda_star;
    let t_rel = if gap > 0.0 { 1.0 / gap } else { f64::INFINITY };
    let nodes = Nodes::from_final_demand_rates(&c.y_rates);
    let (f_value, structure) = match f_measure(lambda_star, &nodes) {
        Ok(f) => (Some(f), Some(classify_structure(f, DEFAULT_BAND))),
        Err(SpectralError::DegenerateNodes { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(SpectralSummary {
        lambda_star,
        gap,
        t_rel,
        nodes,
        f_value,
        structure,
    })
}

/// Canonical arrangement kind for the structure generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    /// Pivot pole with the largest retained share in autarky; every other
    /// pole routes its retained output into the pivot. Spectral radius
    /// `max(1 - y)`.
    AlmostLoop,
    /// Outlet pole with the smallest retained share in autarky, fed by all
    /// other poles. Spectral radius `min(1 - y)`.
    AlmostPyramidal,
    /// Every pole shares `( 1 - y_i) / n` with each pole. Rank one, spectral
    /// radius `mean(1 - y)`.
    FairDivision,
}

/// Builds the canonical trade structure of the requested kind and wraps it in
/// a balanced coefficient set.
///
/// Output levels are chosen as `X^T = 1^T (I - A)^{-1}` so every pole carries
/// one unit of value added; that keeps the technical coefficients and rate
/// vectors consistent. Rates implying a non-productive structure (a loop
/// pivot holding everything) are rejected.
pub fn synthesize_structure(
    kind: StructureKind,
    n: usize,
    y_rates: &[f64],
) -> Result<CoefficientSet, SpectralError> {
    if n == 0 || y_rates.len() != n {
        return Err(SpectralError::InvalidRates(format!(
            "need {n} rates, got {}",
            y_rates.len()
        )));
    }
    if y_rates.iter().any(|y| !(0.0..=1.0).contains(y)) {
        return Err(SpectralError::InvalidRates(
            "rates must lie in [0, 1]".into(),
        ));
    }
    let held: Vec<f64> = y_rates.iter().map(|y| 1.0 - y).collect();
    let pivot = match kind {
        StructureKind::AlmostLoop => held
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0,
        StructureKind::AlmostPyramidal => held
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0,
        StructureKind::FairDivision => 0,
    };

    let mut alpha = Matrix::zeros(n, n);
    match kind {
        StructureKind::FairDivision => {
            for i in 0..n {
                for j in 0..n {
                    alpha.set(i, j, held[i] / n as f64);
                }
            }
        }
        StructureKind::AlmostLoop | StructureKind::AlmostPyramidal => {
            for i in 0..n {
                alpha.set(i, pivot, held[i]);
            }
        }
    }

    // Balance the dual: X^T = 1^T N gives W = 1 per pole.
    let n_mat = match lu_invert(&Matrix::identity(n).sub(&alpha)) {
        Ok(m) => m,
        Err(MatrixError::SingularMatrix { .. }) => {
            return Err(SpectralError::InvalidRates(
                "rates imply a non-productive structure (spectral radius 1)".into(),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let output = n_mat.col_sums();
    if output.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(SpectralError::InvalidRates(
            "rates imply a non-productive structure".into(),
        ));
    }
    let mut theta = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            theta.set(i, j, alpha.get(i, j) * output[i] / output[j]);
        }
    }
    let g = theta.transpose();
    let w_rates = output.iter().map(|x| 1.0 / x).collect();
    Ok(CoefficientSet {
        poles: (0..n).map(|i| format!("P{}", i + 1)).collect(),
        theta,
        alpha,
        g,
        w_rates,
        y_rates: y_rates.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{absorption_time_bounds, absorption_times, fundamental};
    use crate::table::{coefficients, parse_flow_table, ParseOptions};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn f_measure_reproduces_published_values() {
        let morocco = Nodes {
            min: 0.0,
            mean: 0.308206,
            max: 0.911226,
        };
        let f = f_measure(0.293934, &morocco).unwrap();
        assert!((f - 0.480498).abs() < 1e-4);

        let usa = Nodes {
            min: 0.0,
            mean: 0.4552,
            max: 0.8848,
        };
        let f = f_measure(0.3860, &usa).unwrap();
        assert!((f - 0.422013).abs() < 1e-4);
    }

    #[test]
    fn f_measure_is_half_at_mean_node() {
        let nodes = Nodes {
            min: 0.0,
            mean: 0.3,
            max: 0.9,
        };
        assert_abs_diff_eq!(f_measure(0.3, &nodes).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn f_measure_rejects_coincident_nodes() {
        let nodes = Nodes {
            min: 0.5,
            mean: 0.5,
            max: 0.5,
        };
        assert!(matches!(
            f_measure(0.5, &nodes),
            Err(SpectralError::DegenerateNodes { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_structure(0.480498, DEFAULT_BAND),
            StructureClass::AlmostPyramidal
        );
        assert_eq!(
            classify_structure(0.503008, DEFAULT_BAND),
            StructureClass::FairDivision
        );
        assert_eq!(
            classify_structure(0.591679, DEFAULT_BAND),
            StructureClass::AlmostLoop
        );
    }

    #[test]
    fn summary_of_two_pole_fixture() {
        let csv = "pole,P1,P2,Y\nP1,0.1,0.4,0.5\nP2,0.2,0.8,1.0\n";
        let t = parse_flow_table(csv.as_bytes(), ParseOptions::default()).unwrap();
        let s = spectral_summary(&coefficients(&t)).unwrap();
        assert_abs_diff_eq!(s.lambda_star, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(s.t_rel, 2.0, epsilon = 1e-9);
        // Uniform rates leave no dominance scale.
        assert_eq!(s.f_value, None);
        assert_eq!(s.structure, None);
    }

    #[test]
    fn fair_generator_spectrum() {
        let c = synthesize_structure(StructureKind::FairDivision, 3, &[0.4, 0.5, 0.6]).unwrap();
        let root = perron_root(&c.alpha, PERRON_TOL, PERRON_MAX_ITER)
            .unwrap()
            .root;
        assert_abs_diff_eq!(root, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn loop_generator_spectrum_and_vector() {
        let y = [0.2, 0.5, 0.7];
        let c = synthesize_structure(StructureKind::AlmostLoop, 3, &y).unwrap();
        let r = perron_root(&c.alpha, PERRON_TOL, PERRON_MAX_ITER).unwrap();
        assert_abs_diff_eq!(r.root, 0.8, epsilon = 1e-10);
        let pivot_weight = r.vector[0];
        assert!(r.vector.iter().all(|&v| v <= pivot_weight + 1e-12));
        // Pivot row is pure autarky.
        assert_abs_diff_eq!(c.alpha.get(0, 0), 0.8, epsilon = 1e-15);
        assert_eq!(c.alpha.get(0, 1), 0.0);
    }

    #[test]
    fn pyramid_generator_spectrum() {
        let y = [0.9, 0.5, 0.3];
        let c = synthesize_structure(StructureKind::AlmostPyramidal, 3, &y).unwrap();
        let r = perron_root(&c.alpha, PERRON_TOL, PERRON_MAX_ITER).unwrap();
        assert_abs_diff_eq!(r.root, 0.1, epsilon = 1e-10);
    }

    #[test]
    fn loop_generator_attains_upper_bounds() {
        let y = [0.15, 0.4, 0.8, 0.6];
        let c = synthesize_structure(StructureKind::AlmostLoop, 4, &y).unwrap();
        let t = absorption_times(&fundamental(&c.alpha).unwrap());
        let bounds = absorption_time_bounds(&y);
        for i in 0..4 {
            assert_abs_diff_eq!(t[i], bounds.upper[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn pyramid_generator_attains_lower_bounds() {
        let y = [0.15, 0.4, 0.8, 0.6];
        let c = synthesize_structure(StructureKind::AlmostPyramidal, 4, &y).unwrap();
        let t = absorption_times(&fundamental(&c.alpha).unwrap());
        let bounds = absorption_time_bounds(&y);
        for i in 0..4 {
            assert_abs_diff_eq!(t[i], bounds.lower[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn generators_produce_valid_coefficient_sets() {
        use crate::matrix::{classify_stochasticity, Axis, STOCHASTIC_TOL};
        for kind in [
            StructureKind::AlmostLoop,
            StructureKind::AlmostPyramidal,
            StructureKind::FairDivision,
        ] {
            let c = synthesize_structure(kind, 4, &[0.3, 0.5, 0.7, 0.9]).unwrap();
            assert!(
                classify_stochasticity(&c.alpha, STOCHASTIC_TOL, Axis::Rows).is_substochastic()
            );
            assert!(
                classify_stochasticity(&c.theta, STOCHASTIC_TOL, Axis::Cols).is_substochastic()
            );
            let cols = c.theta.col_sums();
            for j in 0..4 {
                assert_abs_diff_eq!(cols[j] + c.w_rates[j], 1.0, epsilon = 1e-9);
                assert!(c.w_rates[j] > 0.0 && c.w_rates[j] <= 1.0);
            }
        }
    }

    #[test]
    fn loop_generator_rejects_non_productive_rates() {
        assert!(matches!(
            synthesize_structure(StructureKind::AlmostLoop, 2, &[0.0, 0.5]),
            Err(SpectralError::InvalidRates(_))
        ));
    }

    #[test]
    fn generator_rejects_bad_input() {
        assert!(synthesize_structure(StructureKind::FairDivision, 2, &[0.5]).is_err());
        assert!(synthesize_structure(StructureKind::FairDivision, 2, &[0.5, 1.5]).is_err());
    }

    proptest! {
        #[test]
        fn f_hits_its_nodes(
            min in 0.0f64..0.3,
            mean_gap in 0.05f64..0.3,
            max_gap in 0.05f64..0.4,
        ) {
            let nodes = Nodes {
                min,
                mean: min + mean_gap,
                max: min + mean_gap + max_gap,
            };
            prop_assert!(f_measure(nodes.min, &nodes).unwrap().abs() <= 1e-12);
            prop_assert!((f_measure(nodes.mean, &nodes).unwrap() - 0.5).abs() <= 1e-12);
            prop_assert!((f_measure(nodes.max, &nodes).unwrap() - 1.0).abs() <= 1e-12);
        }
    }
}
