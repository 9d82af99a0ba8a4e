//! Seeded experiments over the configured parameter sets.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ParameterSet};
use super::report::{fmt_f64, MonteCarloReport, ReportRow};
use crate::bayes::{bayes_estimator, posterior_from_mle, LossFunction, Posterior, Prior};
use crate::error::{Error, Result};
use crate::mle::{estimate, MleResult, Route};
use crate::simulate::{replicate_seed, simulate_modes_with, ModePathSet, Retention, SimulationGrid, SimulationOptions};
use crate::spectral::SpectralModel;

/// Minimum replicate count for the pivot suite's KS test.
pub const MIN_PIVOT_REPLICATES: usize = 500;
const PILOT_SALT: u64 = 0x7069_6c6f_745f_7631;
const POSTERIOR_GRID_POINTS: usize = 401;

/// Everything derived from a configuration that the replicates share.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: ExperimentConfig,
    pub model: SpectralModel,
    pub u0: Vec<f64>,
    pub grid: SimulationGrid,
    pub priors: Vec<Prior>,
    pub losses: Vec<LossFunction>,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let n_max = config.max_modes();
        let model = config.spectral_model()?;
        let u0 = config.initial_modes()?[..n_max].to_vec();
        Ok(Self {
            grid: config.grid()?,
            priors: config.priors()?,
            losses: config.losses()?,
            model,
            u0,
            config: config.clone(),
        })
    }

    pub fn theta_true(&self) -> f64 {
        self.config.experiment.theta_true
    }

    /// Simulates replicate `seed` with the modes needed by the configuration.
    pub fn simulate(&self, seed: u64, retention: Retention) -> Result<ModePathSet> {
        let options = SimulationOptions {
            retention,
            pinned_terminal: None,
        };
        simulate_modes_with(&self.model, self.theta_true(), &self.u0, self.grid, seed, &options)
    }
}

fn retention_for(route: Route) -> Retention {
    match route {
        Route::Increments => Retention::Statistics,
        Route::Endpoints | Route::Oracle => Retention::TerminalOnly,
    }
}

/// Both Bayes estimators for one (prior, loss) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesPair {
    pub prior: String,
    pub loss: String,
    pub beta_tilde: f64,
    pub beta_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCountResult {
    pub n: usize,
    pub mle: MleResult,
    /// Prior-major, loss-minor.
    pub bayes: Vec<BayesPair>,
}

fn analyze(
    setup: &Setup,
    pathset: &ModePathSet,
    route: Route,
    n_list: &[usize],
    with_bayes: bool,
) -> Result<Vec<ModeCountResult>> {
    n_list
        .iter()
        .map(|&n| {
            let mle = estimate(route, &setup.model, pathset, n)?;
            let mut bayes = Vec::new();
            if with_bayes {
                for prior in &setup.priors {
                    let post = posterior_from_mle(&mle, prior.clone())?;
                    for loss in &setup.losses {
                        bayes.push(BayesPair {
                            prior: prior.label().to_string(),
                            loss: loss.to_string(),
                            beta_tilde: bayes_estimator(&post, loss, true)?.beta,
                            beta_hat: bayes_estimator(&post, loss, false)?.beta,
                        });
                    }
                }
            }
            Ok(ModeCountResult { n, mle, bayes })
        })
        .collect()
}

/// Replicate seeds `hash(master, i)`, `i = 0..count`.
pub fn replicate_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| replicate_seed(master, i)).collect()
}

/// Seeds of the calibration pilot, disjoint from the replicate stream.
pub fn pilot_seeds(master: u64, count: usize) -> Vec<u64> {
    replicate_seeds(master ^ PILOT_SALT, count)
}

fn run_replicates(
    setup: &Setup,
    seeds: &[u64],
    route: Route,
    n_list: &[usize],
    with_bayes: bool,
) -> Result<Vec<Vec<ModeCountResult>>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let set = setup.simulate(seed, retention_for(route))?;
            analyze(setup, &set, route, n_list, with_bayes)
        })
        .collect()
}

fn summarize(setup: &Setup, n_list: &[usize], results: &[Vec<ModeCountResult>]) -> MonteCarloReport {
    let theta0 = setup.theta_true();
    let mut rows = Vec::new();
    for (j, &n) in n_list.iter().enumerate() {
        let at_n: Vec<&ModeCountResult> = results.iter().map(|r| &r[j]).collect();
        let fisher = at_n[0].mle.fisher;
        let route = at_n[0].mle.route;
        let theta_hat: Vec<f64> = at_n.iter().map(|r| r.mle.theta_hat).collect();
        rows.push(ReportRow::summarize(
            n,
            &format!("mle:{route}"),
            "-",
            "-",
            fisher,
            theta0,
            &theta_hat,
            None,
        ));
        for (b, pair) in at_n[0].bayes.iter().enumerate() {
            for (name, pick) in [
                ("beta_tilde", (|p: &BayesPair| p.beta_tilde) as fn(&BayesPair) -> f64),
                ("beta_hat", |p: &BayesPair| p.beta_hat),
            ] {
                let values: Vec<f64> = at_n.iter().map(|r| pick(&r.bayes[b])).collect();
                rows.push(ReportRow::summarize(
                    n,
                    name,
                    &pair.prior,
                    &pair.loss,
                    fisher,
                    theta0,
                    &values,
                    Some(&theta_hat),
                ));
            }
        }
    }
    MonteCarloReport {
        master_seed: setup.config.seeds.master,
        replicates: results.len(),
        rows,
    }
}

/// Density table of the posterior under each configured prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub n: usize,
    pub theta_hat: f64,
    pub fisher: f64,
    pub priors: Vec<String>,
    /// `(θ, density per prior)`.
    pub rows: Vec<(f64, Vec<f64>)>,
}

fn posterior_table(setup: &Setup, pathset: &ModePathSet, route: Route, n: usize) -> Result<PosteriorTable> {
    let mle = estimate(route, &setup.model, pathset, n)?;
    let posts: Vec<Posterior> = setup
        .priors
        .iter()
        .map(|p| posterior_from_mle(&mle, p.clone()))
        .collect::<Result<_>>()?;
    let hi = posts
        .iter()
        .map(|p| {
            let (c, s) = p.center_and_scale();
            c + 8.0 * s
        })
        .fold(0.0, f64::max);
    let rows = (0..POSTERIOR_GRID_POINTS)
        .map(|i| {
            let theta = hi * i as f64 / (POSTERIOR_GRID_POINTS - 1) as f64;
            // the support is open at 0; tabulate the right limit there
            let at = theta.max(f64::MIN_POSITIVE);
            (theta, posts.iter().map(|p| p.density(at)).collect())
        })
        .collect();
    Ok(PosteriorTable {
        n,
        theta_hat: mle.theta_hat,
        fisher: mle.fisher,
        priors: setup.priors.iter().map(|p| p.label().to_string()).collect(),
        rows,
    })
}

/// Result of a parameter-set run: Monte Carlo summary over all replicates,
/// plus single-path tables from replicate 0.
#[derive(Debug, Clone)]
pub struct ParameterSetOutput {
    pub config: ExperimentConfig,
    pub report: MonteCarloReport,
    pub posterior_tables: Vec<PosteriorTable>,
    pub single_path: Vec<ModeCountResult>,
    /// Statistics of replicate 0, from which `single_path` was computed.
    pub archive: ModePathSet,
}

pub fn run_parameter_set(which: ParameterSet) -> Result<ParameterSetOutput> {
    run_config(&which.config())
}

pub fn run_config(config: &ExperimentConfig) -> Result<ParameterSetOutput> {
    let setup = Setup::new(config)?;
    let route = config.experiment.route;
    let n_list = &config.experiment.n_list;
    let seeds = replicate_seeds(config.seeds.master, config.seeds.replicates);

    let archive = setup.simulate(seeds[0], Retention::Statistics)?;
    let single_path = analyze(&setup, &archive, route, n_list, true)?;
    let posterior_tables = config
        .experiment
        .posterior_n
        .iter()
        .map(|&n| posterior_table(&setup, &archive, route, n))
        .collect::<Result<_>>()?;

    let mut results = vec![single_path.clone()];
    results.extend(run_replicates(&setup, &seeds[1..], route, n_list, true)?);
    Ok(ParameterSetOutput {
        config: config.clone(),
        report: summarize(&setup, n_list, &results),
        posterior_tables,
        single_path,
        archive,
    })
}

/// Pivot suite: `√I_N(θ̂_N − θ₀)` over `replicates` seeds for every `N` of
/// the configuration. The KS column is an exact-law test for the oracle
/// and endpoint routes, diagnostic for increments.
pub fn mc_pivot_suite(config: &ExperimentConfig, route: Route, replicates: usize) -> Result<MonteCarloReport> {
    if replicates < MIN_PIVOT_REPLICATES {
        return Err(Error::Config(format!(
            "the pivot suite needs at least {MIN_PIVOT_REPLICATES} replicates, got {replicates}"
        )));
    }
    mle_suite(config, route, replicates)
}

/// Consistency suite: spread of `θ̂_N − θ₀` along `N`.
pub fn mc_consistency_suite(config: &ExperimentConfig, route: Route, replicates: usize) -> Result<MonteCarloReport> {
    mle_suite(config, route, replicates)
}

fn mle_suite(config: &ExperimentConfig, route: Route, replicates: usize) -> Result<MonteCarloReport> {
    if replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    let setup = Setup::new(config)?;
    let n_list = &config.experiment.n_list;
    let seeds = replicate_seeds(config.seeds.master, replicates);
    let results = run_replicates(&setup, &seeds, route, n_list, false)?;
    Ok(summarize(&setup, n_list, &results))
}

/// Gap suite: `√I_N |β − θ̂_N|` for both Bayes estimators, every prior and
/// loss of the configuration.
pub fn mc_gap_suite(config: &ExperimentConfig, replicates: usize) -> Result<MonteCarloReport> {
    if replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    let setup = Setup::new(config)?;
    let n_list = &config.experiment.n_list;
    let seeds = replicate_seeds(config.seeds.master, replicates);
    let results = run_replicates(&setup, &seeds, config.experiment.route, n_list, true)?;
    Ok(summarize(&setup, n_list, &results))
}

/// `|θ̂_N^{increments} − θ̂_N^{oracle}|` for each seed at time step `dt`.
pub fn increment_oracle_gaps(config: &ExperimentConfig, n: usize, dt: f64, seeds: &[u64]) -> Result<Vec<f64>> {
    let mut config = config.clone();
    config.experiment.dt = dt;
    let setup = Setup::new(&config)?;
    seeds
        .par_iter()
        .map(|&seed| {
            let set = setup.simulate(seed, Retention::Statistics)?;
            let inc = estimate(Route::Increments, &setup.model, &set, n)?;
            let ora = estimate(Route::Oracle, &setup.model, &set, n)?;
            Ok((inc.theta_hat - ora.theta_hat).abs())
        })
        .collect()
}

fn slug(loss: &str) -> String {
    loss.replace(':', "-")
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes the figure-analog tables, the Monte Carlo report, the archived
/// statistics of replicate 0 and the configuration used.
pub fn emit_plot_data(output: &ParameterSetOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    for table in &output.posterior_tables {
        let mut csv = String::from("theta");
        for p in &table.priors {
            csv.push_str(&format!(",density_{p}"));
        }
        csv.push('\n');
        for (theta, dens) in &table.rows {
            csv.push_str(&fmt_f64(*theta));
            for d in dens {
                csv.push(',');
                csv.push_str(&fmt_f64(*d));
            }
            csv.push('\n');
        }
        write_file(dir, &format!("posterior_N{}.csv", table.n), &csv, &mut written)?;
    }

    let pairs: Vec<(String, String)> = output
        .single_path
        .first()
        .map(|r| r.bayes.iter().map(|b| (b.prior.clone(), b.loss.clone())).collect())
        .unwrap_or_default();
    let multi_loss = output.config.experiment.losses.len() > 1;
    for (idx, (prior, loss)) in pairs.iter().enumerate() {
        let suffix = if multi_loss {
            format!("{prior}_{}", slug(loss))
        } else {
            prior.clone()
        };
        let mut est = String::from("N,theta_hat,beta_tilde,beta_hat,fisher\n");
        let mut gap = String::from("N,sqrtI_gap_tilde,sqrtI_gap_hat\n");
        for r in &output.single_path {
            let b = &r.bayes[idx];
            let sqrt_i = r.mle.fisher.sqrt();
            est.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                fmt_f64(r.mle.theta_hat),
                fmt_f64(b.beta_tilde),
                fmt_f64(b.beta_hat),
                fmt_f64(r.mle.fisher)
            ));
            gap.push_str(&format!(
                "{},{},{}\n",
                r.n,
                fmt_f64(sqrt_i * (b.beta_tilde - r.mle.theta_hat).abs()),
                fmt_f64(sqrt_i * (b.beta_hat - r.mle.theta_hat).abs())
            ));
        }
        write_file(dir, &format!("estimators_{suffix}.csv"), &est, &mut written)?;
        write_file(dir, &format!("gaps_{suffix}.csv"), &gap, &mut written)?;
    }

    write_file(dir, "report.csv", &output.report.to_csv(), &mut written)?;

    let mut stats = String::from("k,u0,ito_sum,log_endpoint\n");
    for (k, s) in output.archive.statistics().iter().enumerate() {
        stats.push_str(&format!(
            "{},{},{},{}\n",
            k + 1,
            fmt_f64(output.archive.u0()[k]),
            s.ito_sum.map(fmt_f64).unwrap_or_default(),
            fmt_f64(s.log_endpoint)
        ));
    }
    write_file(dir, "statistics.csv", &stats, &mut written)?;

    let floored = output.config.floored_modes()?;
    let mut cfg = String::new();
    if !floored.is_empty() {
        let list: Vec<String> = floored.iter().map(|k| k.to_string()).collect();
        cfg.push_str(&format!(
            "# initial modes lifted to u0_floor = {}: k = {}\n",
            output.config.experiment.u0_floor,
            list.join(",")
        ));
    }
    cfg.push_str(&output.config.to_toml());
    write_file(dir, "config.toml", &cfg, &mut written)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut cfg = ParameterSet::SetII.config();
        cfg.experiment.dt = 1e-3;
        cfg.experiment.n_list = vec![2, 4];
        cfg.experiment.posterior_n = vec![2];
        cfg.seeds.replicates = 3;
        cfg
    }

    #[test]
    fn run_is_reproducible_and_fisher_increases() {
        let cfg = small_config();
        let a = run_config(&cfg).unwrap();
        let b = run_config(&cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.single_path, b.single_path);
        let fisher: Vec<f64> = a.single_path.iter().map(|r| r.mle.fisher).collect();
        assert!(fisher.windows(2).all(|w| w[1] > w[0]));
        // one mle row plus two Bayes rows per prior and loss, per N
        assert_eq!(a.report.rows.len(), 2 * (1 + 2 * 2));
    }

    #[test]
    fn single_path_matches_replicate_zero() {
        let cfg = small_config();
        let out = run_config(&cfg).unwrap();
        let setup = Setup::new(&cfg).unwrap();
        let seed = replicate_seeds(cfg.seeds.master, 1)[0];
        let set = setup.simulate(seed, Retention::TerminalOnly).unwrap();
        let again = estimate(Route::Endpoints, &setup.model, &set, 4).unwrap();
        assert_eq!(again.theta_hat, out.single_path[1].mle.theta_hat);
    }

    #[test]
    fn pivot_suite_needs_enough_replicates() {
        let cfg = small_config();
        assert!(matches!(mc_pivot_suite(&cfg, Route::Oracle, 10), Err(Error::Config(_))));
    }

    #[test]
    fn pilot_and_replicate_streams_are_disjoint() {
        let a = replicate_seeds(5, 100);
        let b = pilot_seeds(5, 100);
        assert!(a.iter().all(|s| !b.contains(s)));
    }
}
