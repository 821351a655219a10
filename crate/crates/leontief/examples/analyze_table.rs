//! Parse a flow table and inspect the derived accounting quantities and
//! coefficient matrices.
//!
//! ```sh
//! cargo run --example analyze_table
//! ```

use leontief::table::{coefficients, parse_flow_table, ParseOptions};
use std::fs::File;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/two_pole.csv");
    let table = parse_flow_table(File::open(path).unwrap(), ParseOptions::default()).unwrap();

    println!("poles: {:?}", table.poles);
    for i in 0..table.pole_count() {
        println!(
            "{}: output {:>6.3}  final demand {:>6.3}  value added {:>6.3}",
            table.poles[i], table.output[i], table.final_demand[i], table.value_added[i]
        );
    }

    let c = coefficients(&table);
    println!("\ntechnical coefficients (theta, column shares of inputs):");
    for i in 0..c.pole_count() {
        println!("  {:?}", c.theta.row(i));
    }
    println!("trade coefficients (alpha, row shares of deliveries):");
    for i in 0..c.pole_count() {
        println!("  {:?}", c.alpha.row(i));
    }
    println!("final-demand rates y: {:?}", c.y_rates);
    println!("value-added rates  w: {:?}", c.w_rates);
}
