//! Marginal effects from the fundamental matrices: single queries, top-k
//! extraction and the theoretical envelope.
//!
//! ```sh
//! cargo run --example sensitivity_effects
//! ```

use leontief::chain::{marginal_extremes, ChainAnalysis, SensitivityKind};
use leontief::table::{coefficients, parse_flow_table, ParseOptions};
use std::fs::File;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel/ccc.csv");
    let table = parse_flow_table(File::open(path).unwrap(), ParseOptions::default()).unwrap();
    let c = coefficients(&table);
    let analysis = ChainAnalysis::from_coefficients(&c).unwrap();

    let kind = SensitivityKind::OutputWrtFinalDemand;
    println!("largest output responses to a final-demand shock:");
    for e in analysis.top_sensitivities(kind, 3) {
        println!(
            "  dX[{}] / dY[{}] = {:.6}",
            table.poles[e.row], table.poles[e.col], e.value
        );
    }
    println!("smallest:");
    for e in analysis.bottom_sensitivities(kind, 3) {
        println!(
            "  dX[{}] / dY[{}] = {:.6}",
            table.poles[e.row], table.poles[e.col], e.value
        );
    }

    // The monetary dual answers the transposed question exactly.
    let q = analysis
        .sensitivity(SensitivityKind::MoneyWrtFinalDemand, 0, 1)
        .unwrap();
    let o = analysis.sensitivity(kind, 1, 0).unwrap();
    println!("\nmonetary dual: dM[{}]/dY[{}] = {q:.6} = dX/dY transposed ({o:.6})",
        table.poles[1], table.poles[0]);

    let envelope = marginal_extremes(&c.y_rates);
    let (ceiling, pole) = envelope.global_max_self();
    println!(
        "self-effect ceiling 1/y: {ceiling:.4} at {}",
        table.poles[pole]
    );
}
