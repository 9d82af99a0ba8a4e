use std::fs;

use spde_bayes::harness::{emit_plot_data, run_config, ExperimentConfig, ParameterSet};
use spde_bayes::mle::mle_endpoints;
use spde_bayes::simulate::{simulate_modes, SimulationGrid};
use spde_bayes::spectral::heat_model_1d;
use spde_bayes::Route;

fn quick(set: ParameterSet) -> ExperimentConfig {
    let mut cfg = set.config();
    cfg.experiment.dt = 2e-3;
    cfg.experiment.n_list = vec![1, 2, 5, 10];
    cfg.seeds.replicates = 4;
    cfg
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn fisher_information_of_the_parameter_sets() {
    // Σ k⁴ and Σ k² by the closed power-sum formulas
    let set_i = heat_model_1d(0.0, 20, 1.0, 1.0).unwrap();
    assert_eq!(set_i.fisher_info(20).unwrap(), 722_666.0);
    assert_eq!(set_i.fisher_info(10).unwrap(), 25_333.0);
    let set_ii = heat_model_1d(1.0, 20, 1.0, 1.0).unwrap();
    for (n, want) in [(5, 55.0), (10, 385.0), (20, 2870.0)] {
        assert_eq!(set_ii.fisher_info(n).unwrap(), want);
    }
}

#[test]
fn archived_statistics_reproduce_the_estimates() {
    let cfg = quick(ParameterSet::SetIAlpha0);
    let out = run_config(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_plot_data(&out, dir.path()).unwrap();

    let (header, stats) = parse_csv(&fs::read_to_string(dir.path().join("statistics.csv")).unwrap());
    assert_eq!(header, ["k", "u0", "ito_sum", "log_endpoint"]);
    let (_, est) = parse_csv(&fs::read_to_string(dir.path().join("estimators_uniform.csv")).unwrap());
    for row in est {
        let n = row[0] as usize;
        // θ̂ = −Σ k²(L_k + 1/2) / Σ k⁴ for μ = k², q = 1, σ = T = 1
        let num: f64 = stats[..n].iter().map(|s| s[0] * s[0] * (s[3] + 0.5)).sum();
        let den: f64 = stats[..n].iter().map(|s| s[0].powi(4)).sum();
        let want = -num / den;
        assert!(
            (row[1] - want).abs() <= 1e-12 * want.abs().max(1.0),
            "N={n}: {} vs {want}",
            row[1]
        );
        assert_eq!(row[4], den);
    }
}

#[test]
fn posterior_tables_are_densities() {
    let cfg = quick(ParameterSet::SetII);
    let out = run_config(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_plot_data(&out, dir.path()).unwrap();
    assert!(written.iter().all(|p| p.exists()));
    for n in [2, 4, 8] {
        let (header, rows) = parse_csv(&fs::read_to_string(dir.path().join(format!("posterior_N{n}.csv"))).unwrap());
        assert_eq!(header, ["theta", "density_uniform", "density_tnormal"]);
        assert_eq!(rows.len(), 401);
        assert_eq!(rows[0][0], 0.0);
        for col in 1..3 {
            let mass: f64 = rows
                .windows(2)
                .map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][col] + w[1][col]))
                .sum();
            assert!((mass - 1.0).abs() < 2e-3, "N={n} column {col}: {mass}");
        }
    }
}

#[test]
fn written_configuration_round_trips() {
    let cfg = quick(ParameterSet::SetIAlpha0999);
    let out = run_config(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_plot_data(&out, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(text.starts_with("# initial modes lifted"));
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
}

#[test]
fn report_lists_every_estimator() {
    let cfg = quick(ParameterSet::SetII);
    let out = run_config(&cfg).unwrap();
    assert_eq!(out.report.replicates, 4);
    for &n in &cfg.experiment.n_list {
        assert!(out.report.find(n, &format!("mle:{}", Route::Endpoints), "-").is_some());
        for prior in ["uniform", "tnormal"] {
            for est in ["beta_tilde", "beta_hat"] {
                let row = out.report.find(n, est, prior).unwrap();
                assert_eq!(row.count, 4);
                assert!(row.sqrt_i_gap.is_some());
            }
        }
    }
    let csv = out.report.to_csv();
    assert_eq!(csv.lines().count(), 1 + cfg.experiment.n_list.len() * 5);
}

#[test]
fn per_mode_estimate_is_stable_under_extra_modes() {
    let model = heat_model_1d(0.0, 20, 1.0, 1.0).unwrap();
    let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
    let few = simulate_modes(&model, 0.3, &[1.0; 5], grid, 11).unwrap();
    let many = simulate_modes(&model, 0.3, &[1.0; 20], grid, 11).unwrap();
    assert_eq!(
        mle_endpoints(&model, &few, 5).unwrap().theta_hat,
        mle_endpoints(&model, &many, 5).unwrap().theta_hat
    );
}
