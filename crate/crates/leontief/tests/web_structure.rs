//! Structural facts of a 36-pole web shaped like the 2015 Moroccan table:
//! a dense block of mutually trading poles, one pure final-demand pole
//! (private households) and the absorbing expenditure state.

use leontief::chain::ChainAnalysis;
use leontief::graph::{adjacency_from_matrix, classify_states, strong_components, StateKind};
use leontief::matrix::Matrix;
use leontief::table::{
    augment, coefficients, FlowTable, Orientation, ParseOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POLE_CODES: [&str; 36] = [
    "D01T03", "D05T06", "D07T08", "D09", "D10T12", "D13T15", "D16", "D17T18", "D19", "D20T21",
    "D22", "D23", "D24", "D25", "D26", "D27", "D28", "D29", "D30", "D31T33", "D35T39", "D41T43",
    "D45T47", "D49T53", "D55T56", "D58T60", "D61", "D62T63", "D64T66", "D68", "D69T82", "D84",
    "D85", "D86T88", "D90T96", "D97T98",
];

/// Dense trading among the first 35 poles; D97T98 neither buys nor sells
/// intermediates and sends its whole output to final expenditure.
fn morocco_shaped_table() -> FlowTable {
    let n = POLE_CODES.len();
    let households = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(2015);
    let mut flows = Matrix::zeros(n, n);
    for i in 0..households {
        for j in 0..households {
            if i == j || rng.random::<f64>() < 0.4 {
                flows.set(i, j, rng.random_range(0.1..5.0));
            }
        }
    }
    let row_sums = flows.row_sums();
    let col_sums = flows.col_sums();
    let mut final_demand = vec![0.0; n];
    for i in 0..n {
        let base = row_sums[i].max(col_sums[i]).max(1.0);
        final_demand[i] = base / (1.0 - 0.4) - row_sums[i];
    }
    FlowTable::from_parts(
        POLE_CODES.iter().map(|c| c.to_string()).collect(),
        flows,
        final_demand,
        None,
        ParseOptions::default(),
    )
    .unwrap()
}

#[test]
fn web_has_three_strong_components() {
    let table = morocco_shaped_table();
    let chain = augment(&coefficients(&table), Orientation::Indirect);
    let g = adjacency_from_matrix(&chain.transition, &chain.labels, 0.0).unwrap();
    let partition = strong_components(&g);

    assert_eq!(partition.components.len(), 3);
    // The trading block, the household pole, and the expenditure state.
    let block: Vec<usize> = (0..35).collect();
    assert_eq!(partition.components[0], block);
    assert_eq!(partition.components[1], vec![35]);
    assert_eq!(partition.components[2], vec![36]);
    assert_eq!(g.labels()[35], "D97T98");
    assert_eq!(g.labels()[36], "FE");
}

#[test]
fn exactly_one_absorbing_state() {
    let table = morocco_shaped_table();
    let chain = augment(&coefficients(&table), Orientation::Indirect);
    let g = adjacency_from_matrix(&chain.transition, &chain.labels, 0.0).unwrap();
    let states = classify_states(&g).unwrap();

    let absorbing = states.absorbing_states();
    assert_eq!(absorbing, vec![chain.absorbing_index]);
    for i in 0..36 {
        assert_eq!(states.kinds[i], StateKind::Transient, "pole {i}");
    }
    assert_eq!(states.closed_sets, vec![vec![36]]);
}

#[test]
fn household_pole_absorbs_in_one_step() {
    let table = morocco_shaped_table();
    let idx = table.pole_index("D97T98").unwrap();
    assert_eq!(table.final_demand[idx], table.output[idx]);
    let analysis = ChainAnalysis::from_coefficients(&coefficients(&table)).unwrap();
    assert!((analysis.t[idx] - 1.0).abs() <= 1e-12);
    assert_eq!(analysis.t_upper[idx], 1.0);
    assert_eq!(analysis.t_lower[idx], 1.0);
    assert_eq!(analysis.dt_ratio[idx], None);

    // The household pole trades no intermediates, so the marginal effects
    // between it and every other pole vanish in both directions.
    use leontief::chain::SensitivityKind::OutputWrtFinalDemand;
    for i in 0..table.pole_count() {
        if i != idx {
            assert_eq!(
                analysis.sensitivity(OutputWrtFinalDemand, i, idx).unwrap(),
                0.0
            );
            assert_eq!(
                analysis.sensitivity(OutputWrtFinalDemand, idx, i).unwrap(),
                0.0
            );
        }
    }

    // Both orientations agree on the component structure.
    let direct = augment(&coefficients(&table), Orientation::Direct);
    let g = adjacency_from_matrix(&direct.transition, &direct.labels, 0.0).unwrap();
    assert_eq!(strong_components(&g).components.len(), 3);
}
