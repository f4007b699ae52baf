//! Analysis pipeline: cluster-robust OLS, Wald tests on means, round trends,
//! the Jonckheere–Terpstra trend test and per-treatment summary tables.
//!
//! Conventions:
//! - Cluster-robust covariance is `(X'X)⁻¹ (Σ_g X_g'u_g u_g'X_g) (X'X)⁻¹`
//!   scaled by `G/(G−1) · (N−1)/(N−K)`.
//! - Wald p-values use χ²(1).
//! - Jonckheere–Terpstra p-values use the tie-corrected normal approximation;
//!   exact enumeration is available for small samples.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::contest::{ContestSpec, MoveSequence};
use crate::equilibrium::solve_spne;
use crate::simulate::SessionLog;

/// Largest pooled sample for [`jonckheere_terpstra_exact`].
pub const MAX_EXACT_JT: usize = 10;

/// With a zero standard error, estimates this close (relative) to the
/// hypothesis count as equal rather than infinitely far.
pub const DEGENERATE_WALD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("design matrix is rank deficient")]
    RankDeficientDesign,
    #[error("clustered inference needs at least 2 clusters, got {0}")]
    TooFewClusters(usize),
    #[error("need at least 3 ordered groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("exact enumeration limited to {MAX_EXACT_JT} observations, got {0}")]
    TooLargeForExact(usize),
    #[error("log has no records{0}")]
    EmptyLog(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("need observations from at least 2 rounds")]
    TooFewRounds,
}

/// Values tagged with the cluster (matching group) they came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusteredSample {
    pub values: Vec<f64>,
    pub clusters: Vec<usize>,
}

impl ClusteredSample {
    pub fn new(values: Vec<f64>, clusters: Vec<usize>) -> Self {
        Self { values, clusters }
    }

    pub fn push(&mut self, value: f64, cluster: usize) {
        self.values.push(value);
        self.clusters.push(cluster);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        count_clusters(&self.clusters)
    }
}

fn count_clusters(clusters: &[usize]) -> usize {
    let mut ids = clusters.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    /// Cluster-robust covariance, row major.
    pub covariance: Vec<Vec<f64>>,
    pub r_squared: f64,
    pub n: usize,
    pub clusters: usize,
}

impl OlsFit {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.coefficients.len())
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
            .collect()
    }

    /// Wald test of `coefficient[index] = value`.
    pub fn wald(&self, index: usize, value: f64) -> WaldTest {
        wald_test(self.coefficients[index], self.std_errors()[index], value)
    }
}

/// Pooled OLS with cluster-robust covariance. `design` holds one row per
/// observation, including any intercept column.
pub fn cluster_ols(
    y: &[f64],
    design: &[Vec<f64>],
    clusters: &[usize],
) -> Result<OlsFit, StatsError> {
    let n = y.len();
    if design.len() != n || clusters.len() != n {
        return Err(StatsError::Dimension(format!(
            "{} responses, {} design rows, {} cluster ids",
            n,
            design.len(),
            clusters.len()
        )));
    }
    let k = design.first().map_or(0, |r| r.len());
    if k == 0 || design.iter().any(|r| r.len() != k) {
        return Err(StatsError::Dimension("ragged or empty design".into()));
    }
    let g = count_clusters(clusters);
    if g < 2 {
        return Err(StatsError::TooFewClusters(g));
    }
    if n <= k {
        return Err(StatsError::RankDeficientDesign);
    }
    let x = DMatrix::from_fn(n, k, |i, j| design[i][j]);
    // With an intercept column, fit y − y₀ and add y₀ back to the intercept:
    // constant responses then leave exactly zero residuals.
    let intercept = (0..k).find(|&j| design.iter().all(|r| r[j] == 1.0));
    let origin = if intercept.is_some() { y[0] } else { 0.0 };
    let yv = DVector::from_iterator(n, y.iter().map(|v| v - origin));

    let sv = x.clone().svd(false, false).singular_values;
    let max_sv = sv.max();
    if max_sv.is_nan() || max_sv <= 0.0 || sv.min() <= 1e-10 * max_sv {
        return Err(StatsError::RankDeficientDesign);
    }
    let xtx = x.transpose() * &x;
    let bread = xtx
        .cholesky()
        .ok_or(StatsError::RankDeficientDesign)?
        .inverse();
    let mut beta = &bread * (x.transpose() * &yv);
    let residuals = &yv - &x * &beta;
    if let Some(j) = intercept {
        beta[j] += origin;
    }

    let mut scores: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
    for i in 0..n {
        let s = scores.entry(clusters[i]).or_insert_with(|| DVector::zeros(k));
        for j in 0..k {
            s[j] += x[(i, j)] * residuals[i];
        }
    }
    let mut meat = DMatrix::zeros(k, k);
    for s in scores.values() {
        meat += s * s.transpose();
    }
    let correction = small_sample_factor(n, k, g);
    let cov = (&bread * meat * &bread) * correction;
    let cov = (&cov + cov.transpose()) * 0.5;

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|u| u * u).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };

    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        covariance: (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect(),
        r_squared,
        n,
        clusters: g,
    })
}

fn small_sample_factor(n: usize, k: usize, g: usize) -> f64 {
    let (n, k, g) = (n as f64, k as f64, g as f64);
    g / (g - 1.0) * (n - 1.0) / (n - k)
}

/// Mean with cluster-robust standard error; identical to the intercept-only
/// [`cluster_ols`] fit, but a constant sample yields exactly zero residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteredMean {
    pub mean: f64,
    /// `None` with fewer than two clusters.
    pub se: Option<f64>,
    pub n: usize,
    pub clusters: usize,
}

pub fn clustered_mean(sample: &ClusteredSample) -> Result<ClusteredMean, StatsError> {
    let n = sample.len();
    if n == 0 || sample.clusters.len() != n {
        return Err(StatsError::Dimension(format!(
            "{} values, {} cluster ids",
            n,
            sample.clusters.len()
        )));
    }
    let origin = sample.values[0];
    let mean = origin + sample.values.iter().map(|v| v - origin).sum::<f64>() / n as f64;
    let g = sample.cluster_count();
    let se = (g >= 2).then(|| {
        let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
        for (v, c) in sample.values.iter().zip(&sample.clusters) {
            *sums.entry(*c).or_default() += v - mean;
        }
        let meat: f64 = sums.values().map(|s| s * s).sum();
        let var = small_sample_factor(n, 1, g) * meat / (n as f64 * n as f64);
        var.sqrt()
    });
    Ok(ClusteredMean {
        mean,
        se,
        n,
        clusters: g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldTest {
    pub estimate: f64,
    pub se: f64,
    pub hypothesized: f64,
    pub statistic: f64,
    pub p_value: f64,
    /// Zero standard error: the statistic is 0 or infinite.
    pub degenerate: bool,
}

/// Wald test of `estimate = hypothesized` given its standard error.
pub fn wald_test(estimate: f64, se: f64, hypothesized: f64) -> WaldTest {
    let diff = estimate - hypothesized;
    let (statistic, p_value, degenerate) = if se > 0.0 {
        let stat = (diff / se).powi(2);
        let chi2 = ChiSquared::new(1.0).expect("valid dof");
        (stat, chi2.sf(stat).clamp(0.0, 1.0), false)
    } else if diff.abs() <= DEGENERATE_WALD_TOLERANCE * hypothesized.abs().max(1.0) {
        (0.0, 1.0, true)
    } else {
        (f64::INFINITY, 0.0, true)
    };
    WaldTest {
        estimate,
        se,
        hypothesized,
        statistic,
        p_value,
        degenerate,
    }
}

/// Wald test that the population mean equals `hypothesized`.
pub fn wald_mean(sample: &ClusteredSample, hypothesized: f64) -> Result<WaldTest, StatsError> {
    let m = clustered_mean(sample)?;
    let se = m.se.ok_or(StatsError::TooFewClusters(m.clusters))?;
    Ok(wald_test(m.mean, se, hypothesized))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JtTest {
    pub statistic: f64,
    pub null_mean: f64,
    pub null_variance: f64,
    pub z: f64,
    /// Two-sided, normal approximation.
    pub p_value: f64,
}

fn check_groups(groups: &[Vec<f64>]) -> Result<usize, StatsError> {
    if groups.len() < 3 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(i));
    }
    Ok(groups.iter().map(Vec::len).sum())
}

/// `Σ_{i<j}` Mann–Whitney counts of group `j` exceeding group `i`, ties ½.
pub fn jt_statistic(groups: &[Vec<f64>]) -> f64 {
    let mut twice = 0u64;
    for (i, gi) in groups.iter().enumerate() {
        for gj in &groups[i + 1..] {
            for a in gi {
                for b in gj {
                    twice += match b.partial_cmp(a) {
                        Some(std::cmp::Ordering::Greater) => 2,
                        Some(std::cmp::Ordering::Equal) => 1,
                        _ => 0,
                    };
                }
            }
        }
    }
    twice as f64 / 2.0
}

/// Null mean and tie-corrected null variance of the JT statistic.
pub fn jt_null_moments(groups: &[Vec<f64>]) -> (f64, f64) {
    let sizes: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let n: f64 = sizes.iter().sum();
    let mut pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    pooled.sort_by(|a, b| a.total_cmp(b));
    let mut ties = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let j = pooled[i..].iter().take_while(|&&v| v == pooled[i]).count();
        ties.push(j as f64);
        i += j;
    }
    let mean = (n * n - sizes.iter().map(|m| m * m).sum::<f64>()) / 4.0;
    let a = |v: &[f64]| v.iter().map(|m| m * (m - 1.0) * (2.0 * m + 5.0)).sum::<f64>();
    let b = |v: &[f64]| v.iter().map(|m| m * (m - 1.0) * (m - 2.0)).sum::<f64>();
    let c = |v: &[f64]| v.iter().map(|m| m * (m - 1.0)).sum::<f64>();
    let mut var = (n * (n - 1.0) * (2.0 * n + 5.0) - a(&sizes) - a(&ties)) / 72.0;
    if n > 2.0 {
        var += b(&sizes) * b(&ties) / (36.0 * n * (n - 1.0) * (n - 2.0));
    }
    if n > 1.0 {
        var += c(&sizes) * c(&ties) / (8.0 * n * (n - 1.0));
    }
    (mean, var.max(0.0))
}

/// Jonckheere–Terpstra test for an increasing trend across ordered groups.
/// A decreasing trend gives a negative `z`.
pub fn jonckheere_terpstra(groups: &[Vec<f64>]) -> Result<JtTest, StatsError> {
    check_groups(groups)?;
    let statistic = jt_statistic(groups);
    let (null_mean, null_variance) = jt_null_moments(groups);
    let z = if null_variance > 0.0 {
        (statistic - null_mean) / null_variance.sqrt()
    } else {
        0.0
    };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * normal.sf(z.abs())).clamp(0.0, 1.0);
    Ok(JtTest {
        statistic,
        null_mean,
        null_variance,
        z,
        p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JtExact {
    pub statistic: f64,
    /// `P(J ≥ observed)` under the permutation null.
    pub p_upper: f64,
    /// `P(J ≤ observed)`.
    pub p_lower: f64,
    pub p_two_sided: f64,
    pub arrangements: u64,
}

/// Exact permutation distribution of the JT statistic: every assignment of the
/// pooled observations to groups of the given sizes is equally likely.
pub fn jonckheere_terpstra_exact(groups: &[Vec<f64>]) -> Result<JtExact, StatsError> {
    let total = check_groups(groups)?;
    if total > MAX_EXACT_JT {
        return Err(StatsError::TooLargeForExact(total));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let observed = jt_statistic(groups);
    let mut remaining = sizes.clone();
    let mut current: Vec<Vec<f64>> = sizes.iter().map(|&m| Vec::with_capacity(m)).collect();
    let (mut upper, mut lower, mut count) = (0u64, 0u64, 0u64);
    enumerate_assignments(&pooled, 0, &mut remaining, &mut current, &mut |assigned| {
        let j = jt_statistic(assigned);
        count += 1;
        if j >= observed - 1e-9 {
            upper += 1;
        }
        if j <= observed + 1e-9 {
            lower += 1;
        }
    });
    let p_upper = upper as f64 / count as f64;
    let p_lower = lower as f64 / count as f64;
    Ok(JtExact {
        statistic: observed,
        p_upper,
        p_lower,
        p_two_sided: (2.0 * p_upper.min(p_lower)).min(1.0),
        arrangements: count,
    })
}

fn enumerate_assignments(
    pooled: &[f64],
    next: usize,
    remaining: &mut [usize],
    current: &mut Vec<Vec<f64>>,
    visit: &mut impl FnMut(&[Vec<f64>]),
) {
    if next == pooled.len() {
        visit(current);
        return;
    }
    for g in 0..remaining.len() {
        if remaining[g] == 0 {
            continue;
        }
        remaining[g] -= 1;
        current[g].push(pooled[next]);
        enumerate_assignments(pooled, next + 1, remaining, current, visit);
        current[g].pop();
        remaining[g] += 1;
    }
}

/// What [`trend_by_round`] regresses on the round index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrendTarget {
    /// Contest-level aggregate investment.
    Aggregate,
    /// Individual investments of every subject.
    Individual,
    /// Individual investments of movers at one stage (1-based).
    Stage(usize),
}

/// Pooled OLS of investment on round, clustered by matching group.
pub fn trend_by_round(log: &SessionLog, target: TrendTarget) -> Result<OlsFit, StatsError> {
    let mut y = Vec::new();
    let mut rounds = Vec::new();
    let mut clusters = Vec::new();
    match target {
        TrendTarget::Aggregate => {
            for ((group, round, _), rows) in log.contests() {
                y.push(rows.iter().map(|r| r.investment).sum());
                rounds.push(round as f64);
                clusters.push(group);
            }
        }
        TrendTarget::Individual | TrendTarget::Stage(_) => {
            for r in &log.records {
                if let TrendTarget::Stage(s) = target {
                    if r.stage != s {
                        continue;
                    }
                }
                y.push(r.investment);
                rounds.push(r.round as f64);
                clusters.push(r.group);
            }
        }
    }
    if y.is_empty() {
        return Err(StatsError::EmptyLog(String::new()));
    }
    if rounds.iter().all(|&r| r == rounds[0]) {
        return Err(StatsError::TooFewRounds);
    }
    let design: Vec<Vec<f64>> = rounds.iter().map(|&r| vec![1.0, r]).collect();
    cluster_ols(&y, &design, &clusters)
}

/// Keeps the last `k` rounds of a log.
pub fn last_rounds(log: &SessionLog, k: usize) -> SessionLog {
    let last = log.rounds();
    let first_kept = last.saturating_sub(k) + 1;
    SessionLog {
        records: log
            .records
            .iter()
            .filter(|r| r.round >= first_kept)
            .cloned()
            .collect(),
        ..log.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// `x1`, `x2`, ... or `X`.
    pub variable: String,
    pub stage: Option<usize>,
    pub mean: f64,
    pub se: Option<f64>,
    /// Risk-neutral equilibrium prediction at the log's prize.
    pub spne: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentSummary {
    pub treatment: MoveSequence,
    pub label: Option<String>,
    pub clusters: usize,
    pub first_round: usize,
    pub last_round: usize,
    /// Subject-round observations.
    pub n: usize,
    /// One row per player (pooled within stage), then the aggregate `X`.
    pub rows: Vec<SummaryRow>,
}

impl TreatmentSummary {
    pub fn row(&self, variable: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.variable == variable)
    }

    pub fn aggregate(&self) -> &SummaryRow {
        self.rows.last().expect("aggregate row")
    }
}

/// Role and aggregate means with cluster-robust SEs. Player means pool all
/// movers of the same stage. The aggregate is the per-contest total averaged.
pub fn treatment_summary(
    log: &SessionLog,
    last_k_rounds: Option<usize>,
) -> Result<TreatmentSummary, StatsError> {
    let filtered;
    let log = match last_k_rounds {
        Some(k) => {
            filtered = last_rounds(log, k);
            &filtered
        }
        None => log,
    };
    if log.records.is_empty() {
        return Err(StatsError::EmptyLog(format!(" for treatment {}", log.treatment)));
    }
    let seq = &log.treatment;
    let spne = {
        let spec = log
            .spec
            .clone()
            .map(|s| s.with_joy_of_winning(0.0))
            .unwrap_or_else(|| ContestSpec::lab(seq.clone()));
        solve_spne(&spec).ok()
    };
    let mut by_stage: BTreeMap<usize, ClusteredSample> = BTreeMap::new();
    for r in &log.records {
        by_stage.entry(r.stage).or_default().push(r.investment, r.group);
    }
    let mut rows = Vec::new();
    for player in 0..seq.players() {
        let stage = seq.stage_of_player(player);
        let Some(sample) = by_stage.get(&stage) else {
            continue;
        };
        let m = clustered_mean(sample)?;
        rows.push(SummaryRow {
            variable: format!("x{}", player + 1),
            stage: Some(stage),
            mean: m.mean,
            se: m.se,
            spne: spne.as_ref().map(|s| s.stage_investment(stage)),
            n: m.n,
        });
    }
    let mut aggregate = ClusteredSample::default();
    for ((group, _, _), rows) in log.contests() {
        aggregate.push(rows.iter().map(|r| r.investment).sum(), group);
    }
    let m = clustered_mean(&aggregate)?;
    rows.push(SummaryRow {
        variable: "X".into(),
        stage: None,
        mean: m.mean,
        se: m.se,
        spne: spne.as_ref().map(|s| s.scaled_aggregate),
        n: m.n,
    });
    Ok(TreatmentSummary {
        treatment: seq.clone(),
        label: log.label.clone(),
        clusters: log.groups(),
        first_round: log.records.iter().map(|r| r.round).min().unwrap_or(0),
        last_round: log.rounds(),
        n: log.records.len(),
        rows,
    })
}

/// Long-format CSV: one line per treatment and variable.
pub fn summaries_to_csv(summaries: &[TreatmentSummary]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "treatment", "variable", "mean", "se", "spne", "n", "clusters", "first_round", "last_round",
    ])
    .expect("in-memory csv");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in summaries {
        for r in &s.rows {
            w.write_record([
                s.treatment.to_string(),
                r.variable.clone(),
                r.mean.to_string(),
                opt(r.se),
                opt(r.spne),
                r.n.to_string(),
                s.clusters.to_string(),
                s.first_round.to_string(),
                s.last_round.to_string(),
            ])
            .expect("in-memory csv");
        }
    }
    w.into_inner().expect("in-memory csv")
}

/// Side-by-side table: SPNE and observed columns per treatment, SEs in
/// parentheses underneath.
pub fn render_summary_table(summaries: &[TreatmentSummary]) -> String {
    let width = 12;
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "");
    for s in summaries {
        let _ = write!(out, "{:>w$}", s.treatment.to_string(), w = 2 * width);
    }
    out.push('\n');
    let _ = write!(out, "{:<10}", "");
    for _ in summaries {
        let _ = write!(out, "{:>width$}{:>width$}", "SPNE", "Observed");
    }
    out.push('\n');
    let max_players = summaries.iter().map(|s| s.treatment.players()).max().unwrap_or(0);
    let mut variables: Vec<String> = (1..=max_players).map(|i| format!("x{i}")).collect();
    variables.push("X".into());
    for var in &variables {
        let _ = write!(out, "{var:<10}");
        for s in summaries {
            match s.row(var) {
                Some(r) => {
                    let spne = r.spne.map(|v| format!("{v:.2}")).unwrap_or_default();
                    let _ = write!(out, "{spne:>width$}{:>width$.2}", r.mean);
                }
                None => {
                    let _ = write!(out, "{:>w$}", "", w = 2 * width);
                }
            }
        }
        out.push('\n');
        let _ = write!(out, "{:<10}", "");
        for s in summaries {
            let se = s
                .row(var)
                .and_then(|r| r.se)
                .map(|v| format!("({v:.2})"))
                .unwrap_or_default();
            let _ = write!(out, "{:>width$}{se:>width$}", "");
        }
        out.push('\n');
    }
    for (name, value) in [
        ("Clusters", Box::new(|s: &TreatmentSummary| s.clusters.to_string()) as Box<dyn Fn(&TreatmentSummary) -> String>),
        ("Rounds", Box::new(|s: &TreatmentSummary| (s.last_round + 1 - s.first_round).to_string())),
        ("N", Box::new(|s: &TreatmentSummary| s.n.to_string())),
    ] {
        let _ = write!(out, "{name:<10}");
        for s in summaries {
            let _ = write!(out, "{:>width$}{:>width$}", "", value(s));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intercept(n: usize) -> Vec<Vec<f64>> {
        vec![vec![1.0]; n]
    }

    #[test]
    fn two_cluster_fixture() {
        // Hand-computed in exact rationals:
        //   β = (13/10, 4/5), V = [[3/8, −3/20], [−3/20, 3/50]], R² = 16/25.
        let y = [1.0, 2.0, 4.0, 3.0];
        let design: Vec<Vec<f64>> = (0..4).map(|i| vec![1.0, i as f64]).collect();
        let fit = cluster_ols(&y, &design, &[1, 1, 2, 2]).unwrap();
        assert!((fit.coefficients[0] - 1.3).abs() < 1e-10);
        assert!((fit.coefficients[1] - 0.8).abs() < 1e-10);
        assert!((fit.covariance[0][0] - 0.375).abs() < 1e-10);
        assert!((fit.covariance[0][1] + 0.15).abs() < 1e-10);
        assert!((fit.covariance[1][1] - 0.06).abs() < 1e-10);
        let se = fit.std_errors();
        assert!((se[0] - 0.375f64.sqrt()).abs() < 1e-10);
        assert!((se[1] - 0.06f64.sqrt()).abs() < 1e-10);
        assert!((fit.r_squared - 0.64).abs() < 1e-12);
        assert_eq!((fit.n, fit.clusters), (4, 2));
    }

    #[test]
    fn constant_response_has_exactly_zero_slope() {
        let y = vec![189.282_014_358_133_4; 60];
        let design: Vec<Vec<f64>> = (0..60).map(|i| vec![1.0, (i % 25 + 1) as f64]).collect();
        let clusters: Vec<usize> = (0..60).map(|i| i % 4).collect();
        let fit = cluster_ols(&y, &design, &clusters).unwrap();
        assert_eq!(fit.coefficients[1], 0.0);
        assert_eq!(fit.std_errors()[1], 0.0);
        let w = fit.wald(1, 0.0);
        assert!(w.degenerate && w.p_value == 1.0);
    }

    #[test]
    fn exact_line_has_no_residual() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let design: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
        let clusters: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let fit = cluster_ols(&y, &design, &clusters).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-10);
        assert!((fit.coefficients[1] + 2.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.std_errors().iter().all(|&s| s < 1e-6));
    }

    #[test]
    fn ols_errors() {
        let y = [1.0, 2.0, 3.0];
        let collinear: Vec<Vec<f64>> = (0..3).map(|i| vec![1.0, i as f64, 2.0 * i as f64]).collect();
        let design: Vec<Vec<f64>> = (0..3).map(|i| vec![1.0, i as f64]).collect();
        assert_eq!(
            cluster_ols(&y, &design, &[1, 1, 1]),
            Err(StatsError::TooFewClusters(1))
        );
        assert_eq!(
            cluster_ols(&[1.0, 2.0, 3.0, 4.0], &[collinear.clone(), vec![vec![1.0, 3.0, 6.0]]].concat(), &[1, 1, 2, 2]),
            Err(StatsError::RankDeficientDesign)
        );
        assert!(matches!(
            cluster_ols(&y, &design[..2], &[1, 2, 3]),
            Err(StatsError::Dimension(_))
        ));
    }

    #[test]
    fn singleton_clusters_give_hc1() {
        let x = [0.5, 1.0, 2.0, 3.5, 4.0, 6.0, 7.5];
        let y = [1.0, 1.7, 2.1, 4.4, 3.9, 6.8, 7.0];
        let design: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
        let clusters: Vec<usize> = (0..x.len()).collect();
        let fit = cluster_ols(&y, &design, &clusters).unwrap();

        // HC1 by hand for simple regression.
        let n = x.len() as f64;
        let (sx, sxx) = (x.iter().sum::<f64>(), x.iter().map(|v| v * v).sum::<f64>());
        let (sy, sxy) = (y.iter().sum::<f64>(), x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>());
        let det = n * sxx - sx * sx;
        let b1 = (n * sxy - sx * sy) / det;
        let b0 = (sy - b1 * sx) / n;
        let inv = [[sxx / det, -sx / det], [-sx / det, n / det]];
        let mut meat = [[0.0; 2]; 2];
        for (&xi, &yi) in x.iter().zip(&y) {
            let u2 = (yi - b0 - b1 * xi).powi(2);
            let row = [1.0, xi];
            for a in 0..2 {
                for b in 0..2 {
                    meat[a][b] += u2 * row[a] * row[b];
                }
            }
        }
        let mut hc1 = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        hc1[a][d] += inv[a][b] * meat[b][c] * inv[c][d];
                    }
                }
            }
        }
        for row in hc1.iter_mut() {
            for v in row.iter_mut() {
                *v *= n / (n - 2.0);
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                assert!((fit.covariance[a][b] - hc1[a][b]).abs() < 1e-12 * hc1[a][b].abs().max(1.0));
            }
        }
    }

    #[test]
    fn clustered_mean_equals_intercept_only_ols() {
        let values = vec![3.0, 5.0, 4.0, 9.0, 1.0, 2.0, 8.0];
        let clusters = vec![1, 1, 2, 2, 2, 3, 3];
        let fit = cluster_ols(&values, &intercept(7), &clusters).unwrap();
        let m = clustered_mean(&ClusteredSample::new(values, clusters)).unwrap();
        assert!((m.mean - fit.coefficients[0]).abs() < 1e-12);
        assert!((m.se.unwrap() - fit.std_errors()[0]).abs() < 1e-12);
    }

    #[test]
    fn wald_tests() {
        let sample = ClusteredSample::new(vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0], vec![1, 1, 2, 2, 3, 3]);
        // Mean 2; SE² = 3/2 · 8 / 36 = 1/3.
        let t = wald_mean(&sample, 2.0).unwrap();
        assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
        let t = wald_mean(&sample, 0.0).unwrap();
        assert!((t.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((t.statistic - 12.0).abs() < 1e-10);
        assert!((t.p_value - 5.320_055_051_392_497e-4).abs() < 1e-9);

        let constant = ClusteredSample::new(vec![160.0 / 3.0; 9], (0..9).collect());
        let t = wald_mean(&constant, 160.0 / 3.0).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.p_value, 1.0);
        let one = ClusteredSample::new(vec![1.0, 2.0], vec![4, 4]);
        assert_eq!(wald_mean(&one, 0.0), Err(StatsError::TooFewClusters(1)));
    }

    #[test]
    fn jt_maximal_ordering() {
        let groups = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let t = jonckheere_terpstra(&groups).unwrap();
        assert_eq!(t.statistic, 12.0);
        assert_eq!(t.null_mean, 6.0);
        let exact = jonckheere_terpstra_exact(&groups).unwrap();
        assert_eq!(exact.arrangements, 90);
        assert!((exact.p_upper - 1.0 / 90.0).abs() < 1e-15);
        assert!((exact.p_two_sided - 2.0 / 90.0).abs() < 1e-15);
        assert!(t.p_value > 0.0 && t.p_value < 0.05);
    }

    #[test]
    fn jt_identical_observations() {
        let t = jonckheere_terpstra(&[vec![5.0; 3], vec![5.0; 2], vec![5.0; 4]]).unwrap();
        assert_eq!((t.z, t.p_value), (0.0, 1.0));
    }

    #[test]
    fn jt_errors() {
        assert_eq!(
            jonckheere_terpstra(&[vec![1.0], vec![2.0]]),
            Err(StatsError::TooFewGroups(2))
        );
        assert_eq!(
            jonckheere_terpstra(&[vec![1.0], vec![], vec![2.0]]),
            Err(StatsError::EmptyGroup(1))
        );
        assert_eq!(
            jonckheere_terpstra_exact(&[vec![0.0; 4], vec![0.0; 4], vec![0.0; 3]]),
            Err(StatsError::TooLargeForExact(11))
        );
    }

    #[test]
    fn jt_invariant_under_monotone_transform() {
        let groups = vec![vec![3.0, 1.0, 4.0], vec![1.0, 5.0], vec![9.0, 2.0, 6.0, 5.0]];
        let transformed: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|v: &f64| v.exp() + 3.0 * v).collect())
            .collect();
        let a = jonckheere_terpstra(&groups).unwrap();
        let b = jonckheere_terpstra(&transformed).unwrap();
        assert_eq!(a, b);
    }
}
