use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spde_bayes::bayes::{bayes_estimator, bvm_distance, posterior_from_mle, LossFunction, Prior, Weight};
use spde_bayes::harness::report::fmt_f64;
use spde_bayes::harness::{
    emit_plot_data, mc_consistency_suite, mc_gap_suite, mc_pivot_suite, replicate_seeds, run_config, ExperimentConfig,
    ParameterSet, Setup,
};
use spde_bayes::mle::{estimate, pivot};
use spde_bayes::simulate::Retention;
use spde_bayes::{Error, Result, Route};

#[derive(Parser)]
#[command(
    name = "spde-bayes",
    version,
    about = "MLE and Bayesian drift estimation for diagonal parabolic SPDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in parameter set.
    #[arg(long, default_value = "I-a0")]
    set: String,
    /// Configuration file; replaces --set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    /// Simulation seed [default: replicate 0 of the configured master seed].
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_modes: Option<usize>,
    /// Output directory [default: $SPDE_BAYES_OUT, then the config's own].
    #[arg(long, env = "SPDE_BAYES_OUT")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetentionArg {
    Full,
    Statistics,
    Terminal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Pivot,
    Consistency,
    Gap,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the modes and print paths (`t,u_1,...`) or per-mode statistics.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "full")]
        retention: RetentionArg,
    },
    /// Print `seed,route,N,theta_hat,theta_hat_mle,fisher,pivot`.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        route: Option<Route>,
    },
    /// Print the posterior density table `theta,density`.
    Posterior {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "uniform")]
        prior: String,
        #[arg(long)]
        route: Option<Route>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Compute a Bayes estimator.
    Bayes {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "quadratic")]
        loss: String,
        #[arg(long, default_value = "uniform")]
        prior: String,
        /// Use the scaled loss `ℓ(√I_N(θ − β))`.
        #[arg(long)]
        scaled: bool,
        #[arg(long)]
        route: Option<Route>,
    },
    /// Print `N,distance` along the configured mode counts.
    Bvm {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "uniform")]
        prior: String,
        /// Weight by this loss instead of `f ≡ 1`.
        #[arg(long)]
        weight_loss: Option<String>,
        #[arg(long)]
        route: Option<Route>,
    },
    /// Run a parameter set and write its CSV tables.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// Run a Monte Carlo suite and write its report.
    Mc {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        route: Option<Route>,
    },
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ParameterSet::parse(&self.set)?.config(),
        };
        if let Some(dt) = self.dt {
            cfg.experiment.dt = dt;
        }
        if let Some(n) = self.n_modes {
            cfg.experiment.n_list = vec![n];
            cfg.experiment.posterior_n = vec![n];
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or_else(|| replicate_seeds(cfg.seeds.master, 1)[0])
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn stdout_error(e: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn emit(text: &str) -> Result<()> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(stdout_error)
}

fn write_report(dir: &Path, name: &str, csv: &str) -> Result<()> {
    let io = |e| Error::Io {
        path: dir.join(name).display().to_string(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), csv).map_err(io)?;
    println!("{}", dir.join(name).display());
    Ok(())
}

fn single_mle(common: &Common, route: Option<Route>) -> Result<(ExperimentConfig, u64, Vec<spde_bayes::MleResult>)> {
    let cfg = common.config()?;
    let route = route.unwrap_or(cfg.experiment.route);
    let setup = Setup::new(&cfg)?;
    let seed = common.seed(&cfg);
    let retention = if route == Route::Increments {
        Retention::Statistics
    } else {
        Retention::TerminalOnly
    };
    let set = setup.simulate(seed, retention)?;
    let results = cfg
        .experiment
        .n_list
        .iter()
        .map(|&n| estimate(route, &setup.model, &set, n))
        .collect::<Result<_>>()?;
    Ok((cfg, seed, results))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, retention } => {
            let cfg = common.config()?;
            let setup = Setup::new(&cfg)?;
            let seed = common.seed(&cfg);
            let retention = match retention {
                RetentionArg::Full => Retention::FullPaths,
                RetentionArg::Statistics => Retention::Statistics,
                RetentionArg::Terminal => Retention::TerminalOnly,
            };
            let set = setup.simulate(seed, retention)?;
            if set.paths().is_some() {
                let mut buf = Vec::new();
                set.write_csv(&mut buf).map_err(stdout_error)?;
                std::io::stdout().lock().write_all(&buf).map_err(stdout_error)
            } else {
                let mut csv = String::from("k,u0,ito_sum,log_endpoint\n");
                for (k, s) in set.statistics().iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        k + 1,
                        fmt_f64(set.u0()[k]),
                        s.ito_sum.map(fmt_f64).unwrap_or_default(),
                        fmt_f64(s.log_endpoint)
                    ));
                }
                emit(&csv)
            }
        }
        Command::Estimate { common, route } => {
            let (cfg, seed, results) = single_mle(&common, route)?;
            let mut csv = String::from("seed,route,N,theta_hat,theta_hat_mle,fisher,pivot\n");
            for r in results {
                csv.push_str(&format!(
                    "{seed},{},{},{},{},{},{}\n",
                    r.route,
                    r.n_modes,
                    fmt_f64(r.theta_hat),
                    fmt_f64(r.theta_hat_mle),
                    fmt_f64(r.fisher),
                    fmt_f64(pivot(&r, cfg.experiment.theta_true))
                ));
            }
            emit(&csv)
        }
        Command::Posterior {
            common,
            prior,
            route,
            points,
        } => {
            if points < 2 {
                return Err(Error::Config("--points must be at least 2".into()));
            }
            let prior = Prior::parse(&prior)?;
            let (_, _, results) = single_mle(&common, route)?;
            let mut csv = String::from("theta,density\n");
            for r in &results {
                let post = posterior_from_mle(r, prior.clone())?;
                let (c, s) = post.center_and_scale();
                let hi = c + 8.0 * s;
                for i in 0..points {
                    let theta = hi * i as f64 / (points - 1) as f64;
                    csv.push_str(&format!(
                        "{},{}\n",
                        fmt_f64(theta),
                        fmt_f64(post.density(theta.max(f64::MIN_POSITIVE)))
                    ));
                }
            }
            emit(&csv)
        }
        Command::Bayes {
            common,
            loss,
            prior,
            scaled,
            route,
        } => {
            let loss = LossFunction::parse(&loss)?;
            let prior = Prior::parse(&prior)?;
            let (_, seed, results) = single_mle(&common, route)?;
            let mut csv = String::from("seed,N,prior,loss,scaled,theta_hat,beta,risk,at_boundary\n");
            for r in &results {
                let post = posterior_from_mle(r, prior.clone())?;
                let est = bayes_estimator(&post, &loss, scaled)?;
                csv.push_str(&format!(
                    "{seed},{},{},{loss},{scaled},{},{},{},{}\n",
                    r.n_modes,
                    prior.label(),
                    fmt_f64(r.theta_hat),
                    fmt_f64(est.beta),
                    fmt_f64(est.risk_at_min),
                    est.at_boundary
                ));
            }
            emit(&csv)
        }
        Command::Bvm {
            common,
            prior,
            weight_loss,
            route,
        } => {
            let prior = Prior::parse(&prior)?;
            let weight = match weight_loss {
                Some(l) => Weight::from_loss(&LossFunction::parse(&l)?),
                None => Weight::one(),
            };
            let (_, _, results) = single_mle(&common, route)?;
            let mut csv = String::from("N,distance\n");
            for r in &results {
                let post = posterior_from_mle(r, prior.clone())?;
                csv.push_str(&format!("{},{}\n", r.n_modes, fmt_f64(bvm_distance(&post, &weight)?)));
            }
            emit(&csv)
        }
        Command::Experiment { common } => {
            let cfg = common.config()?;
            let output = run_config(&cfg)?;
            for path in emit_plot_data(&output, &common.out_dir(&cfg))? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Mc {
            common,
            suite,
            replicates,
            route,
        } => {
            let cfg = common.config()?;
            let route = route.unwrap_or(cfg.experiment.route);
            let replicates = replicates.unwrap_or(cfg.seeds.replicates);
            let (name, report) = match suite {
                Suite::Pivot => ("mc_pivot.csv", mc_pivot_suite(&cfg, route, replicates)?),
                Suite::Consistency => ("mc_consistency.csv", mc_consistency_suite(&cfg, route, replicates)?),
                Suite::Gap => ("mc_gap.csv", mc_gap_suite(&cfg, replicates)?),
            };
            write_report(&common.out_dir(&cfg), name, &report.to_csv())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spde-bayes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
