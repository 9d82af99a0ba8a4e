use std::fmt::Write as _;

use super::ks::{ks_statistic, mean_variance, quantile_sorted};

/// Quantile levels reported for absolute errors and scaled gaps.
pub const QUANTILE_LEVELS: [f64; 3] = [0.5, 0.9, 0.99];

/// Summary of one estimator over the replicates at one mode count.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub estimator: String,
    pub prior: String,
    pub loss: String,
    pub fisher: f64,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    /// KS distance of `√I_N(estimate − θ₀)` from `N(0, 1)`.
    pub ks_pivot: Option<f64>,
    /// Quantiles of `|estimate − θ₀|`.
    pub abs_err: [f64; 3],
    /// Fraction of replicates with `√I_N |estimate − θ₀| < 5`.
    pub within_5sd: f64,
    /// Quantiles of `√I_N |β − θ̂_N|`, for Bayes estimators.
    pub sqrt_i_gap: Option<[f64; 3]>,
}

impl ReportRow {
    /// Summarizes `estimates` (and optionally their MLE centers) at `n`.
    #[allow(clippy::too_many_arguments)]
    pub fn summarize(
        n: usize,
        estimator: &str,
        prior: &str,
        loss: &str,
        fisher: f64,
        theta0: f64,
        estimates: &[f64],
        centers: Option<&[f64]>,
    ) -> Self {
        let sqrt_i = fisher.sqrt();
        let (mean, var) = mean_variance(estimates);
        let pivots: Vec<f64> = estimates.iter().map(|b| sqrt_i * (b - theta0)).collect();
        let ks_pivot = ks_statistic(&pivots).ok();
        let mut abs: Vec<f64> = estimates.iter().map(|b| (b - theta0).abs()).collect();
        abs.sort_by(f64::total_cmp);
        let within = pivots.iter().filter(|p| p.abs() < 5.0).count() as f64 / estimates.len() as f64;
        let sqrt_i_gap = centers.map(|c| {
            let mut g: Vec<f64> = estimates.iter().zip(c).map(|(b, t)| sqrt_i * (b - t).abs()).collect();
            g.sort_by(f64::total_cmp);
            QUANTILE_LEVELS.map(|p| quantile_sorted(&g, p))
        });
        Self {
            n,
            estimator: estimator.to_string(),
            prior: prior.to_string(),
            loss: loss.to_string(),
            fisher,
            count: estimates.len(),
            mean,
            sd: var.sqrt(),
            ks_pivot,
            abs_err: QUANTILE_LEVELS.map(|p| quantile_sorted(&abs, p)),
            within_5sd: within,
            sqrt_i_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub master_seed: u64,
    pub replicates: usize,
    pub rows: Vec<ReportRow>,
}

impl MonteCarloReport {
    pub fn find(&self, n: usize, estimator: &str, prior: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.estimator == estimator && r.prior == prior)
    }

    pub const HEADER: &'static str = "N,estimator,prior,loss,fisher,replicates,mean,sd,ks_pivot,\
abs_err_q50,abs_err_q90,abs_err_q99,within_5sd,sqrtI_gap_q50,sqrtI_gap_q90,sqrtI_gap_q99";

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},",
                r.n,
                r.estimator,
                r.prior,
                r.loss,
                fmt_f64(r.fisher),
                r.count,
                fmt_f64(r.mean),
                fmt_f64(r.sd),
                r.ks_pivot.map(fmt_f64).unwrap_or_default(),
            );
            for q in r.abs_err {
                let _ = write!(out, "{},", fmt_f64(q));
            }
            let _ = write!(out, "{}", fmt_f64(r.within_5sd));
            match r.sqrt_i_gap {
                Some(g) => {
                    for q in g {
                        let _ = write!(out, ",{}", fmt_f64(q));
                    }
                }
                None => out.push_str(",,,"),
            }
            out.push('\n');
        }
        out
    }
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, 722_666.0, 1e-300, -2.5e-7] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_shape() {
        let row = ReportRow::summarize(3, "mle", "-", "-", 4.0, 1.0, &[0.5, 1.0, 1.5], None);
        assert_eq!(row.mean, 1.0);
        assert_eq!(row.abs_err[0], 0.5);
        let report = MonteCarloReport {
            master_seed: 1,
            replicates: 3,
            rows: vec![row],
        };
        let csv = report.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let cols = MonteCarloReport::HEADER.split(',').count();
        assert_eq!(lines[1].split(',').count(), cols);
    }
}
