//! The flow web as a graph: accessibility, strong components, state
//! classification and the essential-flow DOT export.
//!
//! ```sh
//! cargo run --example flow_web
//! ```

use leontief::graph::{
    accessibility, adjacency_from_matrix, classify_states, essential_flows, strong_components,
};
use leontief::report::render_dot;
use leontief::table::{augment, coefficients, parse_flow_table, Orientation, ParseOptions};
use std::fs::File;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel/aaa.csv");
    let table = parse_flow_table(File::open(path).unwrap(), ParseOptions::default()).unwrap();
    let chain = augment(&coefficients(&table), Orientation::Indirect);
    let g = adjacency_from_matrix(&chain.transition, &chain.labels, 0.0).unwrap();

    let partition = strong_components(&g);
    println!("strong components:");
    for (id, comp) in partition.components.iter().enumerate() {
        let names: Vec<&str> = comp.iter().map(|&v| g.labels()[v].as_str()).collect();
        println!("  {id}: {names:?}");
    }

    let states = classify_states(&g).unwrap();
    println!("\nstate classification:");
    for (i, kind) in states.kinds.iter().enumerate() {
        println!("  {}: {kind:?}", g.labels()[i]);
    }

    let r = accessibility(&g);
    println!(
        "\ndistance {} -> FE: {:?} steps",
        g.labels()[0],
        r.distance(0, chain.absorbing_index)
    );

    // Keep only the connections exceeding the fair-division share.
    let threshold = 1.0 / chain.transition.rows() as f64;
    let essential = essential_flows(&g, threshold);
    println!(
        "\nessential flows above 1/{} = {threshold:.4}:",
        chain.transition.rows()
    );
    print!("{}", render_dot(&essential, chain.absorbing_index, false));
}
