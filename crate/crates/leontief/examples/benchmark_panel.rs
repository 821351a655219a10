//! Cross-country panel study: load the bundled 12-country summary, classify
//! every economy, and correlate growth, spectral radius and the longest
//! production duration with the outlier excluded.
//!
//! ```sh
//! cargo run --example benchmark_panel
//! ```

use leontief::report::{parse_summary_rows, BENCH_FIELDS};
use leontief::spectral::{classify_structure, DEFAULT_BAND};
use leontief::stats::panel_correlate;
use std::fs;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/benchmark_summary.csv");
    let rows = parse_summary_rows(fs::read(path).unwrap().as_slice()).unwrap();

    println!("country  growth  lambda*   t_rel    f        structure");
    for r in &rows {
        println!(
            "{:<7} {:>7.3} {:>8.4} {:>7.4} {:>9.6}  {}",
            r.country,
            r.growth_rate,
            r.lambda_star,
            r.t_rel,
            r.f_value,
            classify_structure(r.f_value, DEFAULT_BAND).as_str()
        );
    }

    let matrix = panel_correlate(&rows, &BENCH_FIELDS, &["BRA".to_string()]).unwrap();
    println!("\ncorrelations over the {} non-outlier rows:", matrix.cell(0, 1).n);
    for i in 0..BENCH_FIELDS.len() {
        for j in (i + 1)..BENCH_FIELDS.len() {
            let cell = matrix.cell(i, j);
            println!(
                "  {} ~ {}: r = {:.6} (p = {:.4})",
                BENCH_FIELDS[i].name(),
                BENCH_FIELDS[j].name(),
                cell.r,
                cell.p_value
            );
        }
    }
}
