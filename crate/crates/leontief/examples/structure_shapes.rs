//! Canonical arrangement generators: the almost-infinite loop, the
//! almost-pyramidal structure and fair division, with their predicted
//! spectral radii and the loop's extremal absorption times.
//!
//! ```sh
//! cargo run --example structure_shapes
//! ```

use leontief::chain::{absorption_time_bounds, absorption_times, fundamental};
use leontief::matrix::{perron_root, PERRON_MAX_ITER, PERRON_TOL};
use leontief::spectral::{synthesize_structure, StructureKind};

fn main() {
    let y = [0.2, 0.45, 0.7, 0.9];
    let held: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    println!("final-demand rates: {y:?}");
    println!("retained shares 1-y: {held:?}\n");

    for (kind, label, predicted) in [
        (
            StructureKind::AlmostLoop,
            "almost-infinite loop",
            held.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ),
        (
            StructureKind::AlmostPyramidal,
            "almost-pyramidal",
            held.iter().cloned().fold(f64::INFINITY, f64::min),
        ),
        (
            StructureKind::FairDivision,
            "fair division",
            held.iter().sum::<f64>() / held.len() as f64,
        ),
    ] {
        let c = synthesize_structure(kind, y.len(), &y).unwrap();
        let root = perron_root(&c.alpha, PERRON_TOL, PERRON_MAX_ITER)
            .unwrap()
            .root;
        println!("{label:<22} lambda* = {root:.10} (predicted {predicted:.10})");
    }

    // In the loop arrangement every pole sits exactly on its duration
    // ceiling: production cycles through the transformation pole.
    let loop_c = synthesize_structure(StructureKind::AlmostLoop, y.len(), &y).unwrap();
    let t = absorption_times(&fundamental(&loop_c.alpha).unwrap());
    let bounds = absorption_time_bounds(&y);
    println!("\nloop absorption times against their upper bounds:");
    for i in 0..y.len() {
        println!(
            "  pole {}: t = {:.6}, upper bound = {:.6}",
            i + 1,
            t[i],
            bounds.upper[i]
        );
    }
}
