//! Train one flow on the heavy-tailed target and watch the loss: the
//! vanilla normal base against the exact-marginals base, same data, same
//! seeds, same budget.
//!
//! ```bash
//! cargo run --release --example train_single
//! ```

use copula_flow::coupling::{target_distribution, BasePreset};
use copula_flow::flow::Flow;
use copula_flow::numerics::Rng;
use copula_flow::training::{train, TrainConfig};

fn main() {
    let target = target_distribution();
    let mut data_rng = Rng::seed_from(55);
    let train_data = target.sample(&mut data_rng, 10_000);
    let test_data = target.sample(&mut data_rng, 10_000);
    let config = TrainConfig::default();

    for preset in [BasePreset::Normal, BasePreset::ExactMarginals] {
        let base = preset.build();
        let mut flow = Flow::standard(2, &mut Rng::seed_from(56));
        let out = train(
            &mut flow,
            &base,
            &train_data,
            &test_data,
            &config,
            &mut Rng::seed_from(57),
        )
        .unwrap();
        println!("base = {preset}");
        println!("{:>6} {:>12} {:>12}", "epoch", "train nll", "test nll");
        for (i, &e) in out.history.epochs.iter().enumerate() {
            if e % 10 == 0 || i + 1 == out.history.epochs.len() {
                println!(
                    "{e:>6} {:>12.4} {:>12.4}",
                    out.history.train_nll[i], out.history.test_nll[i]
                );
            }
        }
        println!(
            "final test nll {:.4}{}\n",
            out.history.final_test_nll(),
            if out.diverged { " (diverged)" } else { "" }
        );
    }
}
