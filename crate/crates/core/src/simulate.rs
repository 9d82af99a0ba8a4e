//! Exact simulation of the Fourier modes.
//!
//! Each mode is a geometric Brownian motion
//! `u_k(t) = u_k(0)·exp(−(θμ_k + σ²q_k²/2)t + σq_k w_k(t))`, so the simulator
//! samples Brownian motion and evaluates the closed form on the grid. Each
//! mode's stream yields `w_k(T)` first and the grid increments after it,
//! as a bridge to that endpoint, so terminal-only runs stop after one draw.
//! The only time-discretization error in the whole pipeline is the one in the
//! Itô-sum statistic.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::SpectralModel;
use crate::sum::CompensatedSum;

/// Uniform time grid `t_i = i·T/n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationGrid {
    dt: f64,
    n_steps: usize,
    horizon: f64,
}

impl SimulationGrid {
    /// Grid with step as close to `dt` as possible while landing on `T`
    /// exactly: `n = round(T/dt)`, actual step `T/n`.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let n_steps = (horizon / dt).round().max(1.0) as usize;
        Ok(Self::with_steps(horizon, n_steps))
    }

    pub fn with_steps(horizon: f64, n_steps: usize) -> Self {
        assert!(n_steps >= 1 && horizon > 0.0);
        Self {
            dt: horizon / n_steps as f64,
            n_steps,
            horizon,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `t_i`; `time(n_steps)` is `T` exactly.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.horizon
        } else {
            self.horizon * (i as f64 / self.n_steps as f64)
        }
    }
}

/// How much of each trajectory is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    /// Full trajectories plus statistics.
    #[default]
    FullPaths,
    /// Itô sum, endpoint log and Brownian endpoint only.
    Statistics,
    /// Endpoint log and Brownian endpoint; no Itô sum. Same random stream.
    TerminalOnly,
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOptions {
    pub retention: Retention,
    /// Test hook: pins `w_k(T)` to the given per-mode values in place of
    /// the sampled endpoints.
    pub pinned_terminal: Option<Vec<f64>>,
}

impl SimulationOptions {
    pub fn statistics_only() -> Self {
        Self {
            retention: Retention::Statistics,
            pinned_terminal: None,
        }
    }

    pub fn terminal_only() -> Self {
        Self {
            retention: Retention::TerminalOnly,
            pinned_terminal: None,
        }
    }
}

/// Per-mode observation statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStatistics {
    /// `Σ_i (u(t_{i+1}) − u(t_i))/u(t_i)`.
    pub ito_sum: Option<f64>,
    /// `log(u(T)/u(0))`.
    pub log_endpoint: f64,
}

/// Non-observable quantities kept for exact tests.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleChannel {
    pub theta_true: f64,
    pub w_terminal: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ModePathSet {
    grid: SimulationGrid,
    u0: Vec<f64>,
    stats: Vec<ModeStatistics>,
    paths: Option<Vec<Vec<f64>>>,
    oracle: Option<OracleChannel>,
    seed: Option<u64>,
}

impl ModePathSet {
    /// Observed trajectories, one row per mode, each of length
    /// `grid.n_steps() + 1`. No oracle channel is attached.
    pub fn from_paths(grid: SimulationGrid, paths: Vec<Vec<f64>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Domain("no mode trajectories supplied".into()));
        }
        let mut stats = Vec::with_capacity(paths.len());
        for (k, path) in paths.iter().enumerate() {
            if path.len() != grid.n_steps() + 1 {
                return Err(Error::Domain(format!(
                    "mode {} has {} samples, grid needs {}",
                    k + 1,
                    path.len(),
                    grid.n_steps() + 1
                )));
            }
            let sign = path[0].signum();
            if path.iter().any(|&v| v == 0.0 || v.signum() != sign || !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "mode {} vanishes or changes sign along the path",
                    k + 1
                )));
            }
            let ito: f64 = path
                .windows(2)
                .map(|w| (w[1] - w[0]) / w[0])
                .collect::<CompensatedSum>()
                .value();
            let log_endpoint = path[path.len() - 1].abs().ln() - path[0].abs().ln();
            stats.push(ModeStatistics {
                ito_sum: Some(ito),
                log_endpoint,
            });
        }
        Ok(Self {
            grid,
            u0: paths.iter().map(|p| p[0]).collect(),
            stats,
            paths: Some(paths),
            oracle: None,
            seed: None,
        })
    }

    pub fn grid(&self) -> &SimulationGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.u0.len()
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn statistics(&self) -> &[ModeStatistics] {
        &self.stats
    }

    /// Trajectories, if they were retained.
    pub fn paths(&self) -> Option<&[Vec<f64>]> {
        self.paths.as_deref()
    }

    pub fn oracle(&self) -> Option<&OracleChannel> {
        self.oracle.as_ref()
    }

    /// Drops the oracle channel, leaving only observable data.
    pub fn without_oracle(mut self) -> Self {
        self.oracle = None;
        self
    }

    fn mode(&self, k: usize) -> Result<&ModeStatistics> {
        if k == 0 || k > self.stats.len() {
            return Err(Error::ModeRange {
                n: k,
                max: self.stats.len(),
            });
        }
        Ok(&self.stats[k - 1])
    }

    /// Writes `t,u_1,...,u_N` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let paths = self
            .paths
            .as_ref()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "trajectories were not retained"))?;
        write!(out, "t")?;
        for k in 1..=paths.len() {
            write!(out, ",u_{k}")?;
        }
        writeln!(out)?;
        for i in 0..=self.grid.n_steps() {
            write!(out, "{:.16e}", self.grid.time(i))?;
            for path in paths {
                write!(out, ",{:.16e}", path[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Left-point Itô sum `Σ_i (u_k(t_{i+1}) − u_k(t_i))/u_k(t_i)` for mode `k`
/// (1-based).
pub fn ito_log_integral(pathset: &ModePathSet, k: usize) -> Result<f64> {
    pathset
        .mode(k)?
        .ito_sum
        .ok_or_else(|| Error::Capability(format!("Itô sum of mode {k} was not retained by the simulation")))
}

/// `log(u_k(T)/u_k(0))` for mode `k` (1-based).
pub fn log_endpoint_statistic(pathset: &ModePathSet, k: usize) -> Result<f64> {
    Ok(pathset.mode(k)?.log_endpoint)
}

/// Simulates `u0.len()` modes with full trajectories.
pub fn simulate_modes(
    model: &SpectralModel,
    theta: f64,
    u0: &[f64],
    grid: SimulationGrid,
    seed: u64,
) -> Result<ModePathSet> {
    simulate_modes_with(model, theta, u0, grid, seed, &SimulationOptions::default())
}

pub fn simulate_modes_with(
    model: &SpectralModel,
    theta: f64,
    u0: &[f64],
    grid: SimulationGrid,
    seed: u64,
    options: &SimulationOptions,
) -> Result<ModePathSet> {
    let n_modes = u0.len();
    model.check_modes(n_modes)?;
    if let Some(k) = u0.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "initial value of mode {} must be nonzero",
            k + 1
        )));
    }
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be finite, got {theta}")));
    }
    if let Some(pins) = &options.pinned_terminal {
        if pins.len() < n_modes {
            return Err(Error::Domain("pinned terminal values must cover every mode".into()));
        }
    }

    let mut stats = Vec::with_capacity(n_modes);
    let mut w_terminal = Vec::with_capacity(n_modes);
    let mut paths = (options.retention == Retention::FullPaths).then(|| Vec::with_capacity(n_modes));
    let mut increments = vec![0.0; grid.n_steps()];
    for k in 1..=n_modes {
        let mut rng = mode_stream(seed, k);
        let drawn = grid.horizon().sqrt() * rng.sample::<f64, _>(StandardNormal);
        let w_t = options.pinned_terminal.as_ref().map_or(drawn, |p| p[k - 1]);
        let out = if options.retention == Retention::TerminalOnly {
            terminal_mode(model, theta, k, grid, w_t)
        } else {
            bridge_increments(&mut rng, grid, w_t, &mut increments);
            advance_mode(model, theta, u0[k - 1], k, grid, &increments, w_t, options.retention)
        };
        stats.push(out.stats);
        w_terminal.push(w_t);
        if let (Some(paths), Some(path)) = (paths.as_mut(), out.path) {
            paths.push(path);
        }
    }
    Ok(ModePathSet {
        grid,
        u0: u0.to_vec(),
        stats,
        paths,
        oracle: Some(OracleChannel {
            theta_true: theta,
            w_terminal,
        }),
        seed: Some(seed),
    })
}

/// Stream of mode `k`; depends only on `(seed, k)`.
fn mode_stream(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Brownian increments conditioned on `Σ dw = w_t`: a free walk
/// `W_i` becomes `W_i − (t_i/T)(W_n − w_t)`, which on a uniform grid shifts
/// every increment by the same amount.
fn bridge_increments(rng: &mut ChaCha8Rng, grid: SimulationGrid, w_t: f64, out: &mut [f64]) {
    let sd = grid.dt().sqrt();
    for dw in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *dw = sd * z;
    }
    let shift = (crate::sum::sum(out.iter().copied()) - w_t) / out.len() as f64;
    for dw in out.iter_mut() {
        *dw -= shift;
    }
}

struct ModeOutput {
    stats: ModeStatistics,
    path: Option<Vec<f64>>,
}

fn exponents(model: &SpectralModel, theta: f64, k: usize) -> (f64, f64) {
    let s = model.sigma() * model.q()[k - 1];
    (s, theta * model.mu()[k - 1] + 0.5 * s * s)
}

fn terminal_mode(model: &SpectralModel, theta: f64, k: usize, grid: SimulationGrid, w_t: f64) -> ModeOutput {
    let (s, drift) = exponents(model, theta, k);
    ModeOutput {
        stats: ModeStatistics {
            ito_sum: None,
            log_endpoint: s * w_t - drift * grid.horizon(),
        },
        path: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn advance_mode(
    model: &SpectralModel,
    theta: f64,
    u0: f64,
    k: usize,
    grid: SimulationGrid,
    increments: &[f64],
    w_t: f64,
    retention: Retention,
) -> ModeOutput {
    let (s, drift) = exponents(model, theta, k);
    let n = grid.n_steps();
    let log_endpoint = s * w_t - drift * grid.horizon();

    let mut w = CompensatedSum::new();
    let mut ito = CompensatedSum::new();
    let mut path = (retention == Retention::FullPaths).then(|| {
        let mut p = Vec::with_capacity(n + 1);
        p.push(u0);
        p
    });
    let step_drift = drift * grid.dt();
    for (i, &dw) in increments.iter().enumerate() {
        ito.add((s * dw - step_drift).exp_m1());
        if let Some(p) = path.as_mut() {
            w.add(dw);
            p.push(u0 * (s * w.value() - drift * grid.time(i + 1)).exp());
        }
    }
    if let Some(p) = path.as_mut() {
        // the bridge sums to w_t up to rounding; pin the endpoint exactly
        p[n] = u0 * log_endpoint.exp();
    }
    ModeOutput {
        stats: ModeStatistics {
            ito_sum: Some(ito.value()),
            log_endpoint,
        },
        path,
    }
}

/// Seed of replicate `index` under `master`; replicates never share streams
/// and adding replicates leaves existing ones unchanged.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::heat_model_1d;

    /// The model requires σ > 0; a subnormal-scale σ leaves every rounded
    /// quantity identical to the noise-free limit.
    fn noise_free_mode() -> SpectralModel {
        SpectralModel::new(vec![1.0], vec![1.0], 1e-300, 1.0).unwrap()
    }

    #[test]
    fn grid_hits_horizon() {
        let g = SimulationGrid::new(1.0, 5e-5).unwrap();
        assert_eq!(g.n_steps(), 20_000);
        assert_eq!(g.time(g.n_steps()), 1.0);
        assert!((g.n_steps() as f64 * g.dt() - 1.0).abs() <= 1e-12);
        assert!(SimulationGrid::new(1.0, 0.0).is_err());
    }

    #[test]
    fn noise_free_path_is_deterministic_decay() {
        let model = noise_free_mode();
        let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
        let set = simulate_modes(&model, 0.3, &[2.0], grid, 7).unwrap();
        let path = &set.paths().unwrap()[0];
        assert_eq!(path[0], 2.0);
        for (i, &u) in path.iter().enumerate() {
            assert_eq!(u, 2.0 * (-0.3 * grid.time(i)).exp());
        }
        assert!((path[grid.n_steps()] - 2.0 * (-0.3f64).exp()).abs() < 1e-15);
        assert_eq!(log_endpoint_statistic(&set, 1).unwrap(), -0.3);
    }

    #[test]
    fn noise_free_ito_sum_matches_geometric_decay() {
        let model = noise_free_mode();
        let theta = 1e-2;
        let grid = SimulationGrid::new(1.0, 1e-4).unwrap();
        let set = simulate_modes(&model, theta, &[1.0], grid, 1).unwrap();
        let ito = ito_log_integral(&set, 1).unwrap();
        let exact = grid.n_steps() as f64 * (-theta * grid.dt()).exp_m1();
        assert!((ito - exact).abs() < 1e-14);
        assert!(((ito + theta) / theta).abs() < 1e-6);
    }

    #[test]
    fn pinned_terminal_gives_deterministic_endpoint() {
        let model = heat_model_1d(0.0, 3, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
        let options = SimulationOptions {
            retention: Retention::FullPaths,
            pinned_terminal: Some(vec![0.0; 3]),
        };
        let u0 = [1.0, -0.5, 0.25];
        let set = simulate_modes_with(&model, 0.3, &u0, grid, 11, &options).unwrap();
        for k in 1..=3 {
            let mu = model.mu()[k - 1];
            let want = u0[k - 1] * (-(0.3 * mu + 0.5)).exp();
            let got = set.paths().unwrap()[k - 1][grid.n_steps()];
            assert!(((got - want) / want).abs() < 1e-12, "mode {k}: {got} vs {want}");
            assert!(set.oracle().unwrap().w_terminal[k - 1].abs() < 1e-14);
        }
    }

    #[test]
    fn signs_are_preserved() {
        let model = heat_model_1d(0.0, 2, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 1e-2).unwrap();
        let set = simulate_modes(&model, 0.3, &[-1.0, 1e-3], grid, 3).unwrap();
        let paths = set.paths().unwrap();
        assert!(paths[0].iter().all(|&u| u < 0.0));
        assert!(paths[1].iter().all(|&u| u > 0.0));
    }

    #[test]
    fn zero_initial_value_rejected() {
        let model = heat_model_1d(0.0, 2, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 1e-2).unwrap();
        let err = simulate_modes(&model, 0.3, &[1.0, 0.0], grid, 3).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn endpoint_statistic_matches_oracle_identity() {
        let model = heat_model_1d(1.0, 5, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
        let u0 = [1.0, 0.2, 0.1, 0.05, 0.03];
        let set = simulate_modes(&model, 0.505, &u0, grid, 99).unwrap();
        let w = &set.oracle().unwrap().w_terminal;
        for k in 1..=5 {
            let mu = model.mu()[k - 1];
            let q = model.q()[k - 1];
            let want = -(0.505 * mu + 0.5 * q * q) + q * w[k - 1];
            let got = log_endpoint_statistic(&set, k).unwrap();
            assert!(((got - want) / want).abs() < 1e-12);
            // the stored path agrees with the statistic
            let path = &set.paths().unwrap()[k - 1];
            let from_path = path[grid.n_steps()].abs().ln() - path[0].abs().ln();
            assert!((from_path - got).abs() < 1e-12 * got.abs().max(1.0));
        }
    }

    #[test]
    fn retention_modes_share_the_stream() {
        let model = heat_model_1d(0.0, 4, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
        let u0 = [1.0; 4];
        let full = simulate_modes(&model, 0.3, &u0, grid, 5).unwrap();
        let stats = simulate_modes_with(&model, 0.3, &u0, grid, 5, &SimulationOptions::statistics_only()).unwrap();
        let term = simulate_modes_with(&model, 0.3, &u0, grid, 5, &SimulationOptions::terminal_only()).unwrap();
        assert_eq!(full.oracle(), stats.oracle());
        assert_eq!(full.oracle(), term.oracle());
        assert_eq!(full.statistics(), stats.statistics());
        assert!(stats.paths().is_none());
        assert!(matches!(ito_log_integral(&term, 1), Err(Error::Capability(_))));
    }

    #[test]
    fn bridged_path_has_brownian_covariance() {
        // W(1/2) and W(1) recovered from the log path: Var = 1/2, 1 and Cov = 1/2
        let model = SpectralModel::new(vec![1.0], vec![1.0], 1.0, 1.0).unwrap();
        let grid = SimulationGrid::with_steps(1.0, 4);
        let m = 8000;
        let (mut v_half, mut v_one, mut cov) = (0.0, 0.0, 0.0);
        for seed in 0..m {
            let set = simulate_modes(&model, 0.3, &[1.0], grid, seed).unwrap();
            let p = &set.paths().unwrap()[0];
            let w = |i: usize| p[i].ln() + 0.8 * grid.time(i);
            let (a, b) = (w(2), w(4));
            v_half += a * a;
            v_one += b * b;
            cov += a * b;
        }
        let m = m as f64;
        assert!((v_half / m - 0.5).abs() < 0.04, "{}", v_half / m);
        assert!((v_one / m - 1.0).abs() < 0.08, "{}", v_one / m);
        assert!((cov / m - 0.5).abs() < 0.04, "{}", cov / m);
    }

    #[test]
    fn per_mode_streams_do_not_depend_on_mode_count() {
        let grid = SimulationGrid::new(1.0, 1e-2).unwrap();
        let small = heat_model_1d(0.0, 3, 1.0, 1.0).unwrap();
        let large = heat_model_1d(0.0, 8, 1.0, 1.0).unwrap();
        let a = simulate_modes(&small, 0.3, &[1.0; 3], grid, 42).unwrap();
        let b = simulate_modes(&large, 0.3, &[1.0; 8], grid, 42).unwrap();
        for k in 0..3 {
            assert_eq!(a.paths().unwrap()[k], b.paths().unwrap()[k]);
        }
    }

    #[test]
    fn from_paths_recomputes_statistics() {
        let model = heat_model_1d(0.0, 2, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
        let set = simulate_modes(&model, 0.3, &[1.0, 0.5], grid, 8).unwrap();
        let observed = ModePathSet::from_paths(grid, set.paths().unwrap().to_vec()).unwrap();
        assert!(observed.oracle().is_none());
        for k in 1..=2 {
            let a = ito_log_integral(&set, k).unwrap();
            let b = ito_log_integral(&observed, k).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
            let a = log_endpoint_statistic(&set, k).unwrap();
            let b = log_endpoint_statistic(&observed, k).unwrap();
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let model = heat_model_1d(0.0, 2, 1.0, 1.0).unwrap();
        let grid = SimulationGrid::with_steps(1.0, 4);
        let set = simulate_modes(&model, 0.3, &[1.0, 0.5], grid, 8).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,u_1,u_2");
        assert_eq!(lines.len(), 6);
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn replicate_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| replicate_seed(7, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(replicate_seed(7, 0), replicate_seed(8, 0));
    }
}
