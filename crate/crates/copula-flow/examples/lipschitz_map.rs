//! Lipschitz surfaces of a trained transform and its inverse: the local
//! expansion factor of T and T⁻¹ over [-10, 10]², estimated from random
//! perturbation directions. Large inverse values mean the flow is hard to
//! invert numerically.
//!
//! ```bash
//! cargo run --release --example lipschitz_map
//! ```

use copula_flow::coupling::{target_distribution, BasePreset};
use copula_flow::evaluation::GridSpec;
use copula_flow::flow::Flow;
use copula_flow::harness::surface::surfaces_for_flow;
use copula_flow::numerics::Rng;
use copula_flow::training::{train, TrainConfig};

fn main() {
    let target = target_distribution();
    let mut data_rng = Rng::seed_from(70);
    let train_data = target.sample(&mut data_rng, 10_000);
    let test_data = target.sample(&mut data_rng, 10_000);
    let grid = GridSpec {
        nx: 40,
        ny: 40,
        ..GridSpec::default()
    };

    println!(
        "{:<16} {:>9} {:>14} {:>14} {:>14}",
        "preset", "test nll", "fwd max log10", "inv max log10", "inv mean log10"
    );
    for preset in BasePreset::ALL {
        let base = preset.build();
        let mut flow = Flow::standard(2, &mut Rng::seed_from(71));
        let out = train(
            &mut flow,
            &base,
            &train_data,
            &test_data,
            &TrainConfig::default(),
            &mut Rng::seed_from(72),
        )
        .unwrap();
        let (fwd, inv) = surfaces_for_flow(&flow, &grid, 99);
        let (fwd_max, _, _) = fwd.log10_summary();
        let (inv_max, inv_mean, _) = inv.log10_summary();
        println!(
            "{:<16} {:>9.4} {:>14.3} {:>14.3} {:>14.3}",
            preset.name(),
            out.history.final_test_nll(),
            fwd_max,
            inv_max,
            inv_mean
        );
    }
    println!();
    println!("the normal base needs violent contractions to cram t2 tails into a");
    println!("Gaussian, so its inverse transform carries the largest local Lipschitz");
    println!("constants; the matched-tail bases keep both directions well-behaved.");
}
