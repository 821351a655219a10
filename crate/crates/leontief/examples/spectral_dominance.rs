//! Global dominance diagnostics: Perron root, relaxation time, and the
//! quadratic dominance measure placing an economy between the pyramidal and
//! loop extremes.
//!
//! ```sh
//! cargo run --example spectral_dominance
//! ```

use leontief::spectral::{classify_structure, f_measure, spectral_summary, Nodes, DEFAULT_BAND};
use leontief::table::{coefficients, parse_flow_table, ParseOptions};
use std::fs::File;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel/bbb.csv");
    let table = parse_flow_table(File::open(path).unwrap(), ParseOptions::default()).unwrap();
    let summary = spectral_summary(&coefficients(&table)).unwrap();
    println!("synthetic table:");
    println!("  lambda* = {:.6}", summary.lambda_star);
    println!("  spectral gap = {:.6}", summary.gap);
    println!("  relaxation time = {:.6}", summary.t_rel);
    println!(
        "  nodes (min, mean, max of 1 - y) = ({:.4}, {:.4}, {:.4})",
        summary.nodes.min, summary.nodes.mean, summary.nodes.max
    );
    if let (Some(f), Some(s)) = (summary.f_value, summary.structure) {
        println!("  f = {f:.6} -> {}", s.as_str());
    }

    // The 2015 Moroccan table's published spectral summary.
    let nodes = Nodes {
        min: 0.0,
        mean: 0.308206,
        max: 0.911226,
    };
    let lambda = 0.293934;
    let f = f_measure(lambda, &nodes).unwrap();
    println!("\nMorocco 2015:");
    println!("  lambda* = {lambda}");
    println!("  relaxation time = {:.4}", 1.0 / (1.0 - lambda));
    println!(
        "  f = {f:.6} -> {}",
        classify_structure(f, DEFAULT_BAND).as_str()
    );
}
