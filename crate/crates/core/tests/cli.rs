use std::process::{Command, Output};

fn spde_bayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spde-bayes"))
        .args(args)
        .env_remove("SPDE_BAYES_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn estimate_prints_one_row() {
    let out = spde_bayes(&[
        "estimate",
        "--route",
        "oracle",
        "--n-modes",
        "10",
        "--seed",
        "42",
        "--dt",
        "0.01",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines, [lines[0], lines[1]]);
    assert_eq!(lines[0], "seed,route,N,theta_hat,theta_hat_mle,fisher,pivot");
    let cols: Vec<_> = lines[1].split(',').collect();
    assert_eq!(&cols[..3], ["42", "oracle", "10"]);
    assert_eq!(cols[5].parse::<f64>().unwrap(), 25_333.0);
    let theta: f64 = cols[3].parse().unwrap();
    let pivot: f64 = cols[6].parse().unwrap();
    assert!((pivot - 25_333f64.sqrt() * (theta - 0.3)).abs() < 1e-9);
}

#[test]
fn endpoints_and_oracle_agree_from_the_command_line() {
    let row = |route| {
        let text = stdout(&spde_bayes(&[
            "estimate",
            "--route",
            route,
            "--n-modes",
            "20",
            "--seed",
            "7",
            "--dt",
            "0.01",
        ]));
        text.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(3)
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    let (a, b) = (row("endpoints"), row("oracle"));
    assert!(((a - b) / b).abs() < 1e-10);
}

#[test]
fn repeated_runs_are_identical() {
    let args = [
        "bayes",
        "--set",
        "II",
        "--loss",
        "exp-power:1.5",
        "--prior",
        "tnormal:1,0.1",
        "--dt",
        "0.01",
        "--n-modes",
        "8",
    ];
    let a = spde_bayes(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, spde_bayes(&args).stdout);
}

#[test]
fn bvm_and_posterior_tables() {
    let out = spde_bayes(&["bvm", "--set", "II", "--dt", "0.01"]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("N,distance"));
    assert_eq!(text.lines().count(), 21);

    let out = spde_bayes(&[
        "posterior",
        "--set",
        "II",
        "--dt",
        "0.01",
        "--n-modes",
        "4",
        "--points",
        "11",
    ]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("theta,density"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn simulate_statistics_table() {
    let out = spde_bayes(&[
        "simulate",
        "--retention",
        "statistics",
        "--n-modes",
        "3",
        "--dt",
        "0.01",
    ]);
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "k,u0,ito_sum,log_endpoint");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("2,1.0000000000000000e-3,"));
}

#[test]
fn exit_codes() {
    assert_eq!(spde_bayes(&["estimate", "--n-modes", "30"]).status.code(), Some(2));
    assert_eq!(spde_bayes(&["estimate", "--set", "III"]).status.code(), Some(2));
    assert_eq!(
        spde_bayes(&["mc", "--suite", "pivot", "--replicates", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        spde_bayes(&["estimate", "--config", "/nonexistent/spde.toml"])
            .status
            .code(),
        Some(4)
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.toml");
    let text = spde_bayes_config_with_sigma(0.0);
    std::fs::write(&path, text).unwrap();
    let out = spde_bayes(&["estimate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

fn spde_bayes_config_with_sigma(sigma: f64) -> String {
    format!(
        "[model]\nfamily = \"heat\"\nalpha = 0.0\nk_max = 4\nsigma = {sigma}\nT = 1.0\n\n\
[experiment]\ntheta_true = 0.3\nu0 = 1.0\ndt = 0.01\nn_list = [1, 2]\nposterior_n = [2]\n\
priors = [\"uniform\"]\nlosses = [\"quadratic\"]\n\n[seeds]\nmaster = 1\nreplicates = 2\n"
    )
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_spde-bayes"))
        .args([
            "mc",
            "--suite",
            "consistency",
            "--replicates",
            "8",
            "--dt",
            "0.01",
            "--n-modes",
            "5",
        ])
        .env("SPDE_BAYES_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("mc_consistency.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("5,mle:endpoints,"));
}
