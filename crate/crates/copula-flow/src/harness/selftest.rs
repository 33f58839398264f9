//! Quick cross-module invariant suite behind the `selftest` subcommand.
//! Each check prints one line; the suite passes only if every check does.

use crate::copulas::Copula;
use crate::coupling::{target_distribution, BasePreset};
use crate::evaluation::{empirical_quantile, ks_distance, lipschitz_surface, GridSpec};
use crate::flow::Flow;
use crate::marginals::Marginal1D;
use crate::numerics::{reg_inc_beta, std_normal_cdf, std_normal_quantile, Rng};
use crate::training::{bootstrap_ci, loss_and_grad, AdamState};
use crate::Dataset;

/// Run every check, printing a pass/fail line per invariant.
pub fn run_selftest() -> bool {
    let checks: Vec<(&str, Box<dyn Fn() -> bool>)> = vec![
        ("rng determinism", Box::new(rng_determinism)),
        ("incomplete beta reflection", Box::new(beta_reflection)),
        ("normal cdf/quantile inverse", Box::new(normal_inverse)),
        ("marginal quantile round trip", Box::new(marginal_round_trip)),
        ("marginal sampling KS", Box::new(marginal_sampling)),
        ("copula uniform marginals", Box::new(copula_uniform_marginals)),
        ("gumbel density vs cdf", Box::new(gumbel_density_consistency)),
        ("independence decomposition", Box::new(independence_decomposition)),
        ("flow round trip", Box::new(flow_round_trip)),
        ("flow logdet vs jacobian", Box::new(flow_logdet)),
        ("gradient finite differences", Box::new(gradient_check)),
        ("adam fixed point", Box::new(adam_zero_grad)),
        ("lipschitz identity/rotation", Box::new(lipschitz_reference)),
        ("bootstrap degenerate interval", Box::new(bootstrap_degenerate)),
        ("target joint probability", Box::new(target_probability)),
    ];
    let mut ok = true;
    for (name, check) in checks {
        let passed = check();
        println!("selftest {name}: {}", if passed { "ok" } else { "FAILED" });
        ok &= passed;
    }
    ok
}

fn rng_determinism() -> bool {
    let mut a = Rng::seed_from(7);
    let mut b = Rng::seed_from(7);
    (0..256).all(|_| a.next_u64() == b.next_u64())
}

fn beta_reflection() -> bool {
    let mut rng = Rng::seed_from(8);
    (0..200).all(|_| {
        let a = 0.2 + 10.0 * rng.uniform();
        let b = 0.2 + 10.0 * rng.uniform();
        let x = rng.uniform();
        let lhs = reg_inc_beta(a, b, x).unwrap();
        let rhs = reg_inc_beta(b, a, 1.0 - x).unwrap();
        (lhs + rhs - 1.0).abs() < 1e-9
    })
}

fn normal_inverse() -> bool {
    (-60..=60).all(|i| {
        let x = i as f64 / 10.0;
        (std_normal_quantile(std_normal_cdf(x)).unwrap() - x).abs() <= 1e-8
    })
}

fn marginal_round_trip() -> bool {
    let marginals = [
        Marginal1D::normal(0.3, 1.5),
        Marginal1D::student_t(2.0, 0.0, 1.0),
        Marginal1D::student_t(5.0, -1.0, 2.0),
        Marginal1D::laplace(0.0, 4.0),
    ];
    marginals.iter().all(|m| {
        (1..100).all(|i| {
            let p = i as f64 / 100.0;
            (m.cdf(m.quantile(p).unwrap()) - p).abs() < 1e-6
        })
    })
}

fn marginal_sampling() -> bool {
    let mut rng = Rng::seed_from(9);
    let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
    let mut draws = t2.sample(&mut rng, 100_000);
    ks_distance(&mut draws, |x| t2.cdf(x)) < 0.006
}

fn copula_uniform_marginals() -> bool {
    let copulas = [
        Copula::independence(2),
        Copula::gaussian_bivariate(0.7).unwrap(),
        Copula::gumbel(2.5),
    ];
    copulas.iter().all(|c| {
        (1..20).all(|i| {
            let u = i as f64 / 20.0;
            (c.cdf(&[u, 1.0]).unwrap() - u).abs() <= 1e-8
                && (c.cdf(&[1.0, u]).unwrap() - u).abs() <= 1e-8
        })
    })
}

fn gumbel_density_consistency() -> bool {
    let g = Copula::gumbel(2.5);
    let h = 1e-4;
    [(0.5, 0.5), (0.25, 0.7), (0.85, 0.9)].iter().all(|&(a, b)| {
        let c = |u: f64, v: f64| g.cdf(&[u, v]).unwrap();
        let fd = (c(a + h, b + h) - c(a + h, b - h) - c(a - h, b + h) + c(a - h, b - h))
            / (4.0 * h * h);
        ((g.log_density(&[a, b]).exp() - fd) / fd).abs() <= 1e-3
    })
}

fn independence_decomposition() -> bool {
    let base = BasePreset::ExactMarginals.build();
    let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
    [(0.0, 0.0), (1.5, -2.0), (30.0, 4.0)]
        .iter()
        .all(|&(x, y)| base.log_pdf(&[x, y]) == t2.log_pdf(x) + t2.log_pdf(y))
}

fn perturbed_flow(rng: &mut Rng) -> Flow {
    let mut flow = Flow::standard(2, rng);
    for l in 0..flow.n_layers() {
        let net = flow.layers()[l].conditioner().clone();
        for idx in net.w_mu_offset()..net.block_end() {
            flow.params_mut()[idx] = 0.3 * (2.0 * rng.uniform() - 1.0);
        }
        net.zero_masked(flow.params_mut());
    }
    flow
}

fn flow_round_trip() -> bool {
    let mut rng = Rng::seed_from(10);
    let flow = perturbed_flow(&mut rng);
    (0..2000).all(|_| {
        let x = [8.0 * (rng.uniform() - 0.5), 8.0 * (rng.uniform() - 0.5)];
        let z = flow.forward(&x);
        let back = flow.inverse(&z.z);
        (back.z[0] - x[0]).abs() <= 1e-9 && (back.z[1] - x[1]).abs() <= 1e-9
    })
}

fn flow_logdet() -> bool {
    let mut rng = Rng::seed_from(11);
    let flow = perturbed_flow(&mut rng);
    let h = 1e-6;
    (0..50).all(|_| {
        let x = [3.0 * (rng.uniform() - 0.5), 3.0 * (rng.uniform() - 0.5)];
        let mut jac = [[0.0f64; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            xp[j] += h;
            let up = flow.forward(&xp);
            xp[j] -= 2.0 * h;
            let dn = flow.forward(&xp);
            for i in 0..2 {
                jac[i][j] = (up.z[i] - dn.z[i]) / (2.0 * h);
            }
        }
        let det = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]).abs();
        let analytic = flow.forward(&x).log_det;
        (analytic - det.ln()).abs() / analytic.abs().max(1e-8) <= 1e-4
    })
}

fn gradient_check() -> bool {
    let mut rng = Rng::seed_from(12);
    let flow = perturbed_flow(&mut rng);
    let base = BasePreset::ExactMarginals.build();
    let mut batch = Dataset::with_capacity(2, 8);
    for _ in 0..8 {
        batch.push_row(&[2.0 * (rng.uniform() - 0.5), 2.0 * (rng.uniform() - 0.5)]);
    }
    let lg = loss_and_grad(&flow, &base, &batch);
    let h = 1e-5;
    (0..flow.n_params()).all(|idx| {
        let mut plus = flow.clone();
        plus.params_mut()[idx] += h;
        let mut minus = flow.clone();
        minus.params_mut()[idx] -= h;
        let fd = (loss_and_grad(&plus, &base, &batch).nll
            - loss_and_grad(&minus, &base, &batch).nll)
            / (2.0 * h);
        (lg.grad[idx] - fd).abs() / (lg.grad[idx].abs() + 1e-8) <= 1e-3
    })
}

fn adam_zero_grad() -> bool {
    let mut adam = AdamState::new(3);
    let mut params = vec![0.5, -1.0, 2.0];
    let before = params.clone();
    adam.step(&mut params, &[0.0; 3]);
    params == before
}

fn lipschitz_reference() -> bool {
    let grid = GridSpec {
        nx: 4,
        ny: 4,
        ..GridSpec::default()
    };
    let ident = lipschitz_surface(|p| p, &grid, 1e-3, 20, 1);
    let (s, c) = (0.5f64.sin(), 0.5f64.cos());
    let rot = lipschitz_surface(
        |p| [c * p[0] - s * p[1], s * p[0] + c * p[1]],
        &grid,
        1e-3,
        20,
        2,
    );
    ident.values.iter().all(|v| (v - 1.0).abs() <= 1e-9)
        && rot.values.iter().all(|v| (v - 1.0).abs() <= 1e-6)
}

fn bootstrap_degenerate() -> bool {
    let mut rng = Rng::seed_from(13);
    bootstrap_ci(&[2.5; 20], 0.95, 500, &mut rng) == (2.5, 2.5)
}

fn target_probability() -> bool {
    let mut rng = Rng::seed_from(14);
    let draws = target_distribution().sample(&mut rng, 200_000);
    let frac = draws.rows().filter(|r| r[0] <= 0.0 && r[1] <= 0.0).count() as f64
        / draws.len() as f64;
    // quantile sanity on the same draws
    let q = empirical_quantile(&draws.column(0), &[0.5], "t2");
    (frac - 0.40067).abs() < 0.01 && q.values[0].abs() < 0.05
}
