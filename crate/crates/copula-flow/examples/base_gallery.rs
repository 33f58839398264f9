//! Samples from the four base distributions of the study: the vanilla
//! isotropic normal and the three heavy-tailed alternatives built from
//! the independence copula.
//!
//! ```bash
//! cargo run --release --example base_gallery
//! ```

use copula_flow::coupling::BasePreset;
use copula_flow::numerics::Rng;

fn main() {
    let n = 200_000;
    println!(
        "{:<16} {:>10} {:>10} {:>12} {:>12}",
        "preset", "med |x1|", "med |x2|", "P(|x1|>10)", "P(|x2|>10)"
    );
    for preset in BasePreset::ALL {
        let base = preset.build();
        let mut rng = Rng::seed_from(7);
        let draws = base.sample(&mut rng, n);
        let mut stats = Vec::new();
        for j in 0..2 {
            let mut abs: Vec<f64> = draws.column(j).iter().map(|v| v.abs()).collect();
            abs.sort_by(f64::total_cmp);
            let med = abs[n / 2];
            let tail = abs.iter().filter(|v| **v > 10.0).count() as f64 / n as f64;
            stats.push((med, tail));
        }
        println!(
            "{:<16} {:>10.4} {:>10.4} {:>12.5} {:>12.5}",
            preset.name(),
            stats[0].0,
            stats[1].0,
            stats[0].1,
            stats[1].1
        );
    }
    println!();
    println!("the normal preset has essentially no mass past |x| = 10, while");
    println!("the heavy-tailed bases keep visible tail probability there —");
    println!("that difference is what lets the flow keep its transform tame.");
}
