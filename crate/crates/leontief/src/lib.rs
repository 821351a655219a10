#![forbid(unsafe_code)]

//! Input-output tables read as absorbing Markov chains.
//!
//! A validated flow table yields technical and trade coefficient matrices,
//! which embed into an `(n+1)`-state absorbing chain whose fundamental
//! matrices carry the structural story: marginal effects, expected
//! absorption times with theoretical bounds, the Perron root with its
//! relaxation time, and a quadratic dominance measure separating pyramidal,
//! fair-division and loop arrangements. A Monte-Carlo walker provides an
//! independent oracle, and the panel module reproduces cross-country
//! correlation studies.
//!
//! ```
//! use leontief::table::{parse_flow_table, coefficients, ParseOptions};
//! use leontief::chain::ChainAnalysis;
//!
//! let csv = "pole,P1,P2,Y\nP1,0.1,0.4,0.5\nP2,0.2,0.8,1.0\n";
//! let table = parse_flow_table(csv.as_bytes(), ParseOptions::default()).unwrap();
//! let analysis = ChainAnalysis::from_coefficients(&coefficients(&table)).unwrap();
//! assert!((analysis.t[0] - 2.0).abs() < 1e-12);
//! ```
//!
//! The `examples/` directory walks through each capability; the `leontief`
//! binary exposes the same pipelines as `analyze`, `graph`, `simulate` and
//! `bench` subcommands.

pub mod chain;
pub mod graph;
pub mod matrix;
pub mod report;
pub mod spectral;
pub mod stats;
pub mod table;
pub mod walk;

pub use chain::{ChainAnalysis, ChainError, SensitivityKind};
pub use graph::{Digraph, GraphError, StateKind};
pub use matrix::{Matrix, MatrixError, PerronResult};
pub use report::{AnalysisReport, PipelineError};
pub use spectral::{SpectralSummary, StructureClass, StructureKind};
pub use stats::{CorrelationMatrix, PanelField, PanelRow, StatsError};
pub use table::{AugmentedChain, CoefficientSet, FlowTable, Orientation, TableError};
pub use walk::{WalkError, WalkStats};

#[cfg(test)]
mod thread_safety {
    // Analysis values are immutable after construction and shared freely.
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn analysis_types_are_send_and_sync() {
        assert_send_sync::<super::Matrix>();
        assert_send_sync::<super::Digraph>();
        assert_send_sync::<super::FlowTable>();
        assert_send_sync::<super::CoefficientSet>();
        assert_send_sync::<super::AugmentedChain>();
        assert_send_sync::<super::ChainAnalysis>();
        assert_send_sync::<super::SpectralSummary>();
        assert_send_sync::<super::WalkStats>();
        assert_send_sync::<super::PanelRow>();
        assert_send_sync::<super::AnalysisReport>();
    }
}
