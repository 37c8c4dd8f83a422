use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::special::normal_sf;

use super::config::Scheme;

/// Exact binomial confidence interval for `errors` out of `trials`.
pub fn clopper_pearson(errors: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || errors > trials {
        return Err(Error::domain(format!("invalid counts: {errors} errors out of {trials} trials")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let alpha = 1.0 - level;
    let (x, n) = (errors as f64, trials as f64);
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::domain(e.to_string()));
    let lo = if errors == 0 { 0.0 } else { beta(x, n - x + 1.0)?.inverse_cdf(alpha / 2.0) };
    let hi = if errors == trials { 1.0 } else { beta(x + 1.0, n - x)?.inverse_cdf(1.0 - alpha / 2.0) };
    Ok((lo, hi))
}

/// One row of the results table; the field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "A")]
    pub a: f64,
    pub sigma2: f64,
    pub beta: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub seed: u64,
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `-ln(p_hat)/n`; empty when no errors were observed.
    pub exponent_hat: Option<f64>,
    pub k2_freq: f64,
    pub k3_freq: f64,
    pub k4_freq: f64,
    pub coord_fail_freq: f64,
}

/// Aggregated outcome of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunStats {
    #[serde(flatten)]
    pub row: ResultRow,
    pub per_message_trials: Vec<u64>,
    pub per_message_errors: Vec<u64>,
    /// Sessions that selected a group of size 2, 3, 4.
    pub selection_counts: [u64; 3],
    pub coordination_failures: u64,
    pub wall_clock_secs: f64,
}

/// Equality ignores wall-clock time.
impl PartialEq for RunStats {
    fn eq(&self, other: &Self) -> bool {
        self.row == other.row
            && self.per_message_trials == other.per_message_trials
            && self.per_message_errors == other.per_message_errors
            && self.selection_counts == other.selection_counts
            && self.coordination_failures == other.coordination_failures
    }
}

impl RunStats {
    /// Interval at a level other than the reported 95%.
    pub fn interval(&self, level: f64) -> Result<(f64, f64)> {
        clopper_pearson(self.row.errors, self.row.trials, level)
    }

    /// Worst per-message error rate among messages that were sent.
    pub fn max_message_error(&self) -> f64 {
        self.per_message_trials
            .iter()
            .zip(&self.per_message_errors)
            .filter(|(t, _)| **t > 0)
            .map(|(t, e)| *e as f64 / *t as f64)
            .fold(0.0, f64::max)
    }
}

/// Verdict of a two-arm comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoDifference,
    FirstLower,
    SecondLower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub p_a: f64,
    pub p_b: f64,
    /// Pooled two-proportion z statistic for `p_a - p_b`.
    pub z: f64,
    pub p_value: f64,
    pub z_significant: bool,
    pub ci_overlap: bool,
    /// Based on the 95% Clopper-Pearson intervals: a difference is declared
    /// only when they do not overlap.
    pub verdict: Verdict,
}

/// Compares two arms run with the same `n`, `A` and `M`.
pub fn compare_arms(a: &ResultRow, b: &ResultRow) -> Result<Comparison> {
    if a.n != b.n || a.m != b.m || a.a != b.a {
        return Err(Error::MismatchedArms(format!(
            "(n, M, A) = ({}, {}, {}) vs ({}, {}, {})",
            a.n, a.m, a.a, b.n, b.m, b.a
        )));
    }
    let (na, nb) = (a.trials as f64, b.trials as f64);
    let (pa, pb) = (a.errors as f64 / na, b.errors as f64 / nb);
    let pooled = (a.errors + b.errors) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    let z = if se > 0.0 { (pa - pb) / se } else { 0.0 };
    let p_value = (2.0 * normal_sf(z.abs())).min(1.0);
    let ci_overlap = a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
    let verdict = if ci_overlap {
        Verdict::NoDifference
    } else if a.ci_high < b.ci_low {
        Verdict::FirstLower
    } else {
        Verdict::SecondLower
    };
    Ok(Comparison { p_a: pa, p_b: pb, z, p_value, z_significant: p_value < 0.05, ci_overlap, verdict })
}

/// One cell of an exponent fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub p_hat: f64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Slope of `-ln p_hat` against `n`.
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub used: usize,
    /// Indices of zero-error cells left out of the fit.
    pub excluded: Vec<usize>,
    pub dof: usize,
}

/// Weighted least squares of `-ln p_hat` on `n` with delta-method variances
/// `(1 - p) / (N p)`.
pub fn exponent_fit(points: &[FitPoint]) -> Result<ExponentFit> {
    let mut lengths: Vec<usize> = points.iter().map(|p| p.n).collect();
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.len() < 3 {
        return Err(Error::domain("exponent fit needs at least three block lengths"));
    }
    let mut excluded = Vec::new();
    let mut cells = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.p_hat <= 0.0 || p.trials == 0 {
            excluded.push(i);
        } else {
            let var = ((1.0 - p.p_hat) / (p.trials as f64 * p.p_hat)).max(f64::MIN_POSITIVE);
            cells.push((p.n as f64, -p.p_hat.ln(), 1.0 / var));
        }
    }
    if cells.len() < 2 {
        return Err(Error::domain("fewer than two cells with observed errors"));
    }
    let sw: f64 = cells.iter().map(|c| c.2).sum();
    let mx = cells.iter().map(|c| c.2 * c.0).sum::<f64>() / sw;
    let my = cells.iter().map(|c| c.2 * c.1).sum::<f64>() / sw;
    let sxx: f64 = cells.iter().map(|c| c.2 * (c.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::domain("cells with observed errors share a single block length"));
    }
    let sxy: f64 = cells.iter().map(|c| c.2 * (c.0 - mx) * (c.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = (1.0 / sxx).sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        slope_se,
        ci_low: slope - 1.96 * slope_se,
        ci_high: slope + 1.96 * slope_se,
        used: cells.len(),
        excluded,
        dof: cells.len() - 2,
    })
}
