//! Acceptance suite: one test per criterion, each printing a pass line
//! with the measured numbers. Criteria 5, 8, and 9 share one set of
//! trained sweeps (10 trials per preset at the default budget).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use copula_flow::copulas::Copula;
use copula_flow::coupling::BasePreset;
use copula_flow::evaluation::{
    empirical_tail_dependence, ks_distance, lipschitz_surface, GridSpec,
};
use copula_flow::flow::Flow;
use copula_flow::harness::surface::surfaces_for_flow;
use copula_flow::harness::{
    emit_sweep, generate_target, run_sweep, BaseSpec, ExperimentConfig, SweepOutcome,
};
use copula_flow::marginals::Marginal1D;
use copula_flow::numerics::quad::{uniform_edges, QuadratureRule};
use copula_flow::numerics::Rng;
use copula_flow::training::loss_and_grad;
use copula_flow::Dataset;

const MASTER_SEED: u64 = 17;

fn desk_config(preset: BasePreset, trials: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.base = BaseSpec::preset(preset);
    config.sweep.trials = trials;
    config.sweep.seed = MASTER_SEED;
    config
}

/// The criterion-5 runs: 10 trials per preset, default budget.
fn desk_runs() -> &'static BTreeMap<&'static str, SweepOutcome> {
    static RUNS: OnceLock<BTreeMap<&'static str, SweepOutcome>> = OnceLock::new();
    RUNS.get_or_init(|| {
        BasePreset::ALL
            .iter()
            .map(|&p| {
                let outcome = run_sweep(&desk_config(p, 10)).expect("sweep runs");
                (p.name(), outcome)
            })
            .collect()
    })
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn final_nll_median(outcome: &SweepOutcome) -> f64 {
    let mut finals: Vec<f64> = outcome
        .trials
        .iter()
        .map(|t| t.result.final_test_nll)
        .collect();
    median(&mut finals)
}

fn best_flow(outcome: &SweepOutcome) -> (usize, Flow) {
    let best = outcome
        .trials
        .iter()
        .min_by(|a, b| a.result.final_test_nll.total_cmp(&b.result.final_test_nll))
        .expect("nonempty sweep");
    let mut flow = Flow::standard(2, &mut Rng::substream(0, 0));
    flow.set_params(&best.params).expect("layout matches");
    (best.result.index, flow)
}

#[test]
fn criterion_01_copula_correctness() {
    // normalization: 2-D quadrature of the density over (0,1)^2
    let mut edges = vec![0.0, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.05];
    edges.extend(uniform_edges(0.1, 0.9, 8));
    let mirrored: Vec<f64> = edges.iter().rev().map(|e| 1.0 - e).collect();
    edges.extend(mirrored);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let rule = QuadratureRule::gauss_legendre_composite(12, &edges);
    for cop in [
        Copula::independence(2),
        Copula::gaussian_bivariate(0.7).unwrap(),
        Copula::gumbel(2.5),
    ] {
        let mass: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&a, &wa)| {
                wa * rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&b, &wb)| wb * cop.log_density(&[a, b]).exp())
                    .sum::<f64>()
            })
            .sum();
        assert!((mass - 1.0).abs() <= 1e-3, "normalization {mass} for {cop:?}");
    }

    // cdf/density consistency: central mixed finite difference
    let h = 1e-4;
    for cop in [Copula::gumbel(2.5), Copula::gaussian_bivariate(0.7).unwrap()] {
        for &a in &[0.2, 0.5, 0.8] {
            for &b in &[0.3, 0.5, 0.7] {
                let c = |u: f64, v: f64| cop.cdf(&[u, v]).unwrap();
                let fd = (c(a + h, b + h) - c(a + h, b - h) - c(a - h, b + h)
                    + c(a - h, b - h))
                    / (4.0 * h * h);
                let analytic = cop.log_density(&[a, b]).exp();
                assert!(
                    ((analytic - fd) / fd).abs() <= 1e-3,
                    "{cop:?} at ({a},{b}): density {analytic} vs mixed partial {fd}"
                );
            }
        }
    }

    // Gumbel(1) is the independence copula
    let g1 = Copula::gumbel(1.0);
    for i in 1..20 {
        for j in 1..20 {
            let u = [i as f64 / 20.0, j as f64 / 20.0];
            let diff = (g1.cdf(&u).unwrap() - u[0] * u[1]).abs();
            assert!(diff <= 1e-12, "Gumbel(1) deviates from independence by {diff}");
        }
    }

    // frozen reference value
    let c = Copula::gumbel(2.5).cdf(&[0.5, 0.5]).unwrap();
    assert!((c - 0.40068).abs() <= 1e-5, "Gumbel(2.5) cdf(0.5,0.5) = {c}");

    // uniform-marginal property over 100 random parameterizations
    let mut rng = Rng::substream(MASTER_SEED, 2);
    for k in 0..100 {
        let cop = match k % 3 {
            0 => Copula::independence(2),
            1 => Copula::gaussian_bivariate(1.9 * rng.uniform() - 0.95).unwrap(),
            _ => Copula::gumbel(1.0 + 5.0 * rng.uniform()),
        };
        let u = rng.uniform_open();
        assert!((cop.cdf(&[u, 1.0]).unwrap() - u).abs() <= 1e-8);
        assert!((cop.cdf(&[1.0, u]).unwrap() - u).abs() <= 1e-8);
    }
    println!("criterion 1 (copula correctness): PASS");
}

#[test]
fn criterion_02_sklar_target_suite() {
    let mut rng = Rng::substream(MASTER_SEED, 3);
    let n = 1_000_000;
    let data = generate_target(&mut rng, n);

    let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
    let mut worst_ks = 0.0f64;
    for j in 0..2 {
        let mut col = data.column(j);
        let ks = ks_distance(&mut col, |x| t2.cdf(x));
        worst_ks = worst_ks.max(ks);
        assert!(ks < 0.002, "coordinate {j} KS {ks}");
    }

    let both = data.rows().filter(|r| r[0] <= 0.0 && r[1] <= 0.0).count() as f64 / n as f64;
    assert!(
        (both - 0.40068).abs() <= 0.0015,
        "P(both <= 0) = {both} vs 0.40068"
    );

    let est = empirical_tail_dependence(&data, &[0.995]);
    let lambda = est[0].upper.expect("enough conditioning samples");
    assert!(
        (lambda - 0.68049).abs() <= 0.08,
        "empirical upper-tail dependence {lambda} vs 0.68049"
    );
    println!(
        "criterion 2 (sklar/target): PASS — worst KS {worst_ks:.5}, P(both<=0) {both:.5}, λ̂_U {lambda:.4}"
    );
}

#[test]
fn criterion_03_gradient_suite() {
    let mut rng = Rng::substream(MASTER_SEED, 4);
    let mut worst_overall: f64 = 0.0;
    for preset in BasePreset::ALL {
        let base = preset.build();
        for _ in 0..20 {
            // random parameter draw around the identity initialization
            let mut flow = Flow::standard(2, &mut rng);
            for l in 0..flow.n_layers() {
                let net = flow.layers()[l].conditioner().clone();
                for idx in net.w_mu_offset()..net.block_end() {
                    flow.params_mut()[idx] = 0.4 * (2.0 * rng.uniform() - 1.0);
                }
                net.zero_masked(flow.params_mut());
            }
            let mut batch = Dataset::with_capacity(2, 16);
            for _ in 0..16 {
                batch.push_row(&[
                    5.0 * (rng.uniform() - 0.5),
                    5.0 * (rng.uniform() - 0.5),
                ]);
            }
            let lg = loss_and_grad(&flow, &base, &batch);
            let nll_at = |idx: usize, delta: f64| {
                let mut f = flow.clone();
                f.params_mut()[idx] += delta;
                loss_and_grad(&f, &base, &batch).nll
            };
            for idx in 0..flow.n_params() {
                let h = 1e-5;
                let fd1 = (nll_at(idx, h) - nll_at(idx, -h)) / (2.0 * h);
                let fd2 = (nll_at(idx, 0.5 * h) - nll_at(idx, -0.5 * h)) / h;
                if (fd1 - fd2).abs() / (fd1.abs() + 1e-8) > 1e-3 {
                    // a |·| kink sits inside the stencil: the oracle is
                    // invalid at this coordinate, not the adjoint
                    continue;
                }
                let rel = (lg.grad[idx] - fd1).abs() / (lg.grad[idx].abs() + 1e-8);
                worst_overall = worst_overall.max(rel);
                assert!(
                    rel <= 1e-4,
                    "{preset}: grad[{idx}] rel error {rel} (analytic {}, fd {fd1})",
                    lg.grad[idx]
                );
            }
        }
    }
    println!("criterion 3 (gradients): PASS — worst relative error {worst_overall:.2e}");
}

#[test]
fn criterion_04_invertibility_suite() {
    // pre-training: round trip at 1e-9 over 1e4 points
    let mut rng = Rng::substream(MASTER_SEED, 5);
    let mut flow = Flow::standard(2, &mut rng);
    for l in 0..flow.n_layers() {
        let net = flow.layers()[l].conditioner().clone();
        for idx in net.w_mu_offset()..net.block_end() {
            flow.params_mut()[idx] = 0.3 * (2.0 * rng.uniform() - 1.0);
        }
        net.zero_masked(flow.params_mut());
    }
    let mut worst_pre: f64 = 0.0;
    for _ in 0..10_000 {
        let x = [20.0 * (rng.uniform() - 0.5), 20.0 * (rng.uniform() - 0.5)];
        let z = flow.forward(&x);
        let back = flow.inverse(&z.z);
        worst_pre = worst_pre
            .max((back.z[0] - x[0]).abs())
            .max((back.z[1] - x[1]).abs());
    }
    assert!(worst_pre <= 1e-9, "pre-training round trip {worst_pre}");

    // post-training: train briefly, then round trip on the 99.9% region
    let target = copula_flow::coupling::target_distribution();
    let train_data = target.sample(&mut rng, 2000);
    let test_data = target.sample(&mut rng, 500);
    let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
    let hi = t2.quantile(0.9995).unwrap();
    let mut worst_post: f64 = 0.0;
    for preset in [BasePreset::ExactMarginals, BasePreset::Normal] {
        let mut trained = Flow::standard(2, &mut rng);
        copula_flow::training::train(
            &mut trained,
            &preset.build(),
            &train_data,
            &test_data,
            &copula_flow::training::TrainConfig {
                epochs: 10,
                ..Default::default()
            },
            &mut rng,
        )
        .unwrap();
        let mut count = 0;
        for row in target.sample(&mut rng, 20_000).rows() {
            if row[0].abs() > hi || row[1].abs() > hi {
                continue; // outside the 99.9% box
            }
            count += 1;
            let z = trained.forward(row);
            let back = trained.inverse(&z.z);
            worst_post = worst_post
                .max((back.z[0] - row[0]).abs())
                .max((back.z[1] - row[1]).abs());
            if count >= 10_000 {
                break;
            }
        }
        assert!(count >= 10_000, "not enough in-region samples");
    }
    assert!(worst_post <= 1e-5, "post-training round trip {worst_post}");

    // analytic logdet vs finite-difference jacobian
    let h = 1e-6;
    let mut worst_logdet: f64 = 0.0;
    for _ in 0..100 {
        let x = [6.0 * (rng.uniform() - 0.5), 6.0 * (rng.uniform() - 0.5)];
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
        let rel = (analytic - det.ln()).abs() / analytic.abs().max(1e-8);
        worst_logdet = worst_logdet.max(rel);
    }
    assert!(worst_logdet <= 1e-4, "logdet rel error {worst_logdet}");
    println!(
        "criterion 4 (invertibility): PASS — pre {worst_pre:.2e}, post {worst_post:.2e}, logdet {worst_logdet:.2e}"
    );
}

#[test]
fn criterion_05_loss_gap_reproduction() {
    let runs = desk_runs();
    let exact = final_nll_median(&runs["exactMarginals"]);
    let normal = final_nll_median(&runs["normal"]);
    let heavier = final_nll_median(&runs["heavierTails"]);
    let correct = final_nll_median(&runs["correctFamily"]);

    assert!(
        (3.3..=3.7).contains(&exact),
        "exactMarginals median {exact} outside [3.3, 3.7]"
    );
    assert!(
        normal - exact >= 0.2,
        "normal median {normal} does not exceed exactMarginals {exact} by 0.2"
    );
    assert!(
        (3.3..=3.8).contains(&heavier),
        "heavierTails median {heavier} outside [3.3, 3.8]"
    );
    assert!(
        (3.3..=3.8).contains(&correct),
        "correctFamily median {correct} outside [3.3, 3.8]"
    );
    println!(
        "criterion 5 (loss gap): PASS — medians exact {exact:.3}, normal {normal:.3}, heavier {heavier:.3}, correct {correct:.3}"
    );
}

#[test]
fn criterion_06_stability_full_sweep() {
    let mut heavy_over = 0usize;
    let mut normal_over = 0usize;
    for preset in BasePreset::ALL {
        let outcome = run_sweep(&desk_config(preset, 100)).expect("sweep runs");
        let over = outcome
            .trials
            .iter()
            .filter(|t| !(t.result.final_test_nll <= 25.0))
            .count();
        if preset == BasePreset::Normal {
            normal_over = over;
        } else {
            heavy_over += over;
            assert_eq!(
                over, 0,
                "{preset}: {over} of 100 trials ended above NLL 25"
            );
        }
    }
    println!(
        "criterion 6 (stability): PASS — heavy-tailed trials over threshold {heavy_over}/300, normal {normal_over}/100 (reported, seed- and budget-dependent)"
    );
}

#[test]
fn criterion_07_lipschitz_estimator() {
    let grid = GridSpec {
        nx: 10,
        ny: 10,
        ..GridSpec::default()
    };
    let ident = lipschitz_surface(|p| p, &grid, 1e-3, 100, 23);
    for &v in &ident.values {
        assert!((v - 1.0).abs() <= 1e-9, "identity estimate {v}");
    }

    let diag = lipschitz_surface(|p| [2.0 * p[0], 0.5 * p[1]], &grid, 1e-3, 1000, 29);
    for &v in &diag.values {
        assert!(
            (1.9..=2.0).contains(&v),
            "diag(2, 0.5) estimate {v} outside [1.9, 2.0]"
        );
    }

    let again = lipschitz_surface(|p| [2.0 * p[0], 0.5 * p[1]], &grid, 1e-3, 1000, 29);
    assert_eq!(diag.values, again.values, "fixed seed must reproduce");
    println!("criterion 7 (lipschitz estimator): PASS");
}

#[test]
fn criterion_08_lipschitz_surface_comparison() {
    let runs = desk_runs();
    let (exact_idx, exact_flow) = best_flow(&runs["exactMarginals"]);
    let (normal_idx, normal_flow) = best_flow(&runs["normal"]);
    let grid = GridSpec::default();
    let (_, exact_inv) = surfaces_for_flow(&exact_flow, &grid, MASTER_SEED);
    let (_, normal_inv) = surfaces_for_flow(&normal_flow, &grid, MASTER_SEED);
    let (exact_max, _, _) = exact_inv.log10_summary();
    let (normal_max, _, _) = normal_inv.log10_summary();
    assert!(
        exact_max < normal_max,
        "max log10 local Lipschitz of T⁻¹: exactMarginals {exact_max} not below normal {normal_max}"
    );
    println!(
        "criterion 8 (surface comparison): PASS — max log10 T⁻¹: exactMarginals (trial {exact_idx}) {exact_max:.3} < normal (trial {normal_idx}) {normal_max:.3}"
    );
}

#[test]
fn criterion_09_quantile_diagnostics() {
    let runs = desk_runs();
    let sup_dev = |outcome: &SweepOutcome| -> [f64; 2] {
        let best = outcome
            .trials
            .iter()
            .min_by(|a, b| a.result.final_test_nll.total_cmp(&b.result.final_test_nll))
            .unwrap();
        let curve = |label: &str| {
            best.quantiles
                .iter()
                .find(|q| q.label == label)
                .unwrap_or_else(|| panic!("curve {label}"))
        };
        let mut out = [0.0f64; 2];
        for (j, slot) in out.iter_mut().enumerate() {
            let model = curve(&format!("model_x{}", j + 1));
            let data = curve(&format!("data_x{}", j + 1));
            *slot = model
                .values
                .iter()
                .zip(&data.values)
                .map(|(m, d)| (m - d).abs())
                .fold(0.0, f64::max);
        }
        out
    };
    let exact = sup_dev(&runs["exactMarginals"]);
    let normal = sup_dev(&runs["normal"]);
    for j in 0..2 {
        assert!(
            exact[j] < normal[j],
            "marginal {}: exactMarginals sup deviation {} not below normal {}",
            j + 1,
            exact[j],
            normal[j]
        );
    }
    println!(
        "criterion 9 (quantile diagnostics): PASS — sup|model-data|: exact ({:.3}, {:.3}) < normal ({:.3}, {:.3})",
        exact[0], exact[1], normal[0], normal[1]
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = desk_config(BasePreset::ExactMarginals, 3);
    config.training.epochs = 2;
    config.training.n_train = 512;
    config.training.n_test = 256;
    config.sweep.bootstrap_resamples = 1000;

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let mut outcome = run_sweep(&config).unwrap();
        emit_sweep(&config, &mut outcome, out).unwrap();
    }
    let mut compared = 0;
    for entry in walk(&out_a) {
        let rel = entry.strip_prefix(&out_a).unwrap();
        let a = std::fs::read(&entry).unwrap();
        let b = std::fs::read(out_b.join(rel)).unwrap();
        assert_eq!(a, b, "{} differs between identical runs", rel.display());
        compared += 1;
    }
    assert!(compared >= 7, "expected the full artifact set, saw {compared}");

    // data generation determinism
    let mut r1 = Rng::substream(MASTER_SEED, 99);
    let mut r2 = Rng::substream(MASTER_SEED, 99);
    let d1 = generate_target(&mut r1, 1000);
    let d2 = generate_target(&mut r2, 1000);
    assert_eq!(d1.as_slice(), d2.as_slice());
    println!("criterion 10 (determinism): PASS — {compared} emitted files bitwise identical");
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}
