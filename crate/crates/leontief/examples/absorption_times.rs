//! Expected production-process durations: absorption times of the augmented
//! chain together with their theoretical envelope and relative-duration
//! ratios.
//!
//! ```sh
//! cargo run --example absorption_times
//! ```

use leontief::chain::ChainAnalysis;
use leontief::table::{coefficients, parse_flow_table, ParseOptions};
use std::fs::File;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel/aaa.csv");
    let table = parse_flow_table(File::open(path).unwrap(), ParseOptions::default()).unwrap();
    let analysis = ChainAnalysis::from_coefficients(&coefficients(&table)).unwrap();

    println!("pole     t        lower    upper    relative");
    for i in 0..table.pole_count() {
        let dt = analysis.dt_ratio[i]
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:<6}  {:>7.4}  {:>7.4}  {:>7.4}  {}",
            table.poles[i], analysis.t[i], analysis.t_lower[i], analysis.t_upper[i], dt
        );
    }
    println!(
        "\ntransformation pole (slowest ceiling): {}",
        table.poles[analysis.bounds.transformation_pole]
    );
    println!(
        "outlet pole (fastest floor):           {}",
        table.poles[analysis.bounds.outlet_pole]
    );
}
