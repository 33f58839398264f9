//! Surrogate-marginal estimation: fit each parametric family to the
//! target's coordinates by maximum likelihood and compare log-likelihoods.
//! This is the first stage of the inference-functions-for-margins recipe;
//! the fitted marginals are exactly what a copula base would be built from.
//!
//! ```bash
//! cargo run --release --example fit_marginals
//! ```

use copula_flow::harness::generate_target;
use copula_flow::marginals::{fit_marginal_mle, FitFamily};
use copula_flow::numerics::Rng;

fn main() {
    let mut rng = Rng::seed_from(2024);
    let data = generate_target(&mut rng, 100_000);

    for j in 0..2 {
        let col = data.column(j);
        println!("coordinate {} (true law: t with df 2, loc 0, scale 1)", j + 1);
        for family in [FitFamily::Normal, FitFamily::Laplace, FitFamily::StudentT] {
            let fit = fit_marginal_mle(family, &col).unwrap();
            let ll: f64 =
                col.iter().map(|&x| fit.marginal.log_pdf(x)).sum::<f64>() / col.len() as f64;
            println!(
                "  {:<28} mean log-lik {:>8.4}{}",
                format!("{:?}", fit.marginal),
                ll,
                if fit.converged { "" } else { "  (not converged)" }
            );
        }
        println!();
    }
    println!("the Student-t fit recovers df ≈ 2 and dominates the light-tailed");
    println!("families in likelihood — a Normal surrogate pays heavily for the tails.");
}
