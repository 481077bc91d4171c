//! Monte Carlo experiment harness.
//!
//! Each replicate owns a ChaCha8 stream derived from (master seed, grid
//! index, replicate index), so results are a pure function of the
//! configuration: reruns reproduce byte-identical CSV regardless of worker
//! count. Replicates run data-parallel (see [`crate::parallel`]) and records
//! are assembled in replicate order.

use crate::blobify::{comb_leaf_count, greedy_comb_scaffold, matched_blob_pairs};
use crate::bounds::{lemma_floor, mast_lower_bound, mast_upper_bound};
use crate::error::{Error, Result};
use crate::mast::mast;
use crate::parallel::par_map_indexed;
use crate::random::{relabel_uniform_with, uniform_tree_with, RngSeed};

/// How k is chosen per leaf count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    Explicit(usize),
    /// k = ceil(sqrt(n)), so blob sizes are at least sqrt(n).
    CeilSqrt,
}

impl KRule {
    pub fn k_for(&self, n: usize) -> usize {
        match self {
            KRule::Explicit(k) => *k,
            KRule::CeilSqrt => (n as f64).sqrt().ceil() as usize,
        }
    }
}

/// Configuration shared by the experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    /// Leaf counts, strictly increasing.
    pub ns: Vec<usize>,
    pub replicates: usize,
    pub k_rule: KRule,
    pub master_seed: u64,
    /// Reporting constant for the upper bound; must exceed e*sqrt(2).
    pub lambda: f64,
}

impl ExperimentConfig {
    pub fn comb_slope(seed: u64, replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "comb-slope".into(),
            ns: (4..=11).map(|e| 1usize << e).collect(),
            replicates,
            k_rule: KRule::CeilSqrt,
            master_seed: seed,
            lambda: 4.0,
        }
    }

    pub fn mast_sandwich(seed: u64, replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "mast-sandwich".into(),
            ns: vec![64, 256, 1024],
            replicates,
            k_rule: KRule::CeilSqrt,
            master_seed: seed,
            lambda: 4.0,
        }
    }

    pub fn blob_intersect(seed: u64, replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "blob-intersect".into(),
            ns: vec![1024],
            replicates,
            k_rule: KRule::CeilSqrt,
            master_seed: seed,
            lambda: 4.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be >= 1".into()));
        }
        if self.ns.is_empty() {
            return Err(Error::InvalidConfig("n values must be non-empty".into()));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "n values must be strictly increasing".into(),
            ));
        }
        if self.ns.iter().any(|n| *n < 2) {
            return Err(Error::InvalidConfig("n values must be >= 2".into()));
        }
        Ok(())
    }

    /// The stream for replicate `rep` of grid entry `n_idx`.
    fn stream(&self, n_idx: usize, rep: usize) -> u64 {
        ((n_idx as u64) << 32) | rep as u64
    }
}

/// One statistic of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub n: usize,
    pub replicate: usize,
    pub stream_seed: u64,
    pub statistic: String,
    pub value: f64,
}

/// One aggregated row of the summary file.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub n: usize,
    pub statistic: String,
    pub mean: f64,
    pub stderr: f64,
    /// Number of replicate rows behind the mean; 0 marks derived rows
    /// (bounds, pooled frequencies) that have no replicate rows.
    pub count: usize,
}

/// Ordinary least squares fit of y on x.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares line through `points`; errors on fewer than two points or a
/// vertical line.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        points: points.len(),
    })
}

fn record(
    cfg: &ExperimentConfig,
    n: usize,
    replicate: usize,
    stream_seed: u64,
    statistic: &str,
    value: f64,
) -> ExperimentRecord {
    ExperimentRecord {
        experiment: cfg.name.clone(),
        n,
        replicate,
        stream_seed,
        statistic: statistic.to_string(),
        value,
    }
}

/// Greedy comb scaffold sizes on uniformly random trees across the grid,
/// with an OLS fit of log2(mean conservative count) against log2(n).
pub fn run_comb_slope(cfg: &ExperimentConfig) -> Result<(Vec<ExperimentRecord>, FitResult)> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut points = Vec::new();
    for (n_idx, &n) in cfg.ns.iter().enumerate() {
        let k = cfg.k_rule.k_for(n);
        let per_rep = par_map_indexed(cfg.replicates, |rep| {
            let stream = cfg.stream(n_idx, rep);
            let mut rng = RngSeed::new(cfg.master_seed, stream).rng();
            let tree = uniform_tree_with(n, &mut rng).expect("n >= 2");
            let v = greedy_comb_scaffold(&tree, k);
            let (full, conservative) = comb_leaf_count(&v, k);
            (stream, conservative as f64, full as f64)
        });
        let mut sum = 0.0;
        for (rep, (stream, conservative, full)) in per_rep.into_iter().enumerate() {
            records.push(record(cfg, n, rep, stream, "comb_conservative", conservative));
            records.push(record(cfg, n, rep, stream, "comb_full", full));
            sum += conservative;
        }
        let mean = sum / cfg.replicates as f64;
        points.push(((n as f64).log2(), mean.log2()));
    }
    let fit = linear_fit(&points)?;
    Ok((records, fit))
}

/// Per replicate: a fresh uniformly random base shape, two independent
/// relabelings, the exact MAST size, and the matched-blob witness size.
pub fn run_mast_sandwich(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    mast_upper_bound(2, cfg.lambda)?; // reject bad lambda up front
    let mut records = Vec::new();
    for (n_idx, &n) in cfg.ns.iter().enumerate() {
        let k = cfg.k_rule.k_for(n);
        let per_rep = par_map_indexed(cfg.replicates, |rep| {
            let stream = cfg.stream(n_idx, rep);
            let mut rng = RngSeed::new(cfg.master_seed, stream).rng();
            let base = uniform_tree_with(n, &mut rng).expect("n >= 2");
            let t1 = relabel_uniform_with(&base, &mut rng);
            let t2 = relabel_uniform_with(&base, &mut rng);
            let mast_size = mast(&t1, &t2).expect("equal label sets").size;
            let witness = crate::blobify::matched_blob_agreement(&t1, &t2, k)
                .expect("equal shapes")
                .len();
            (stream, mast_size as f64, witness as f64)
        });
        for (rep, (stream, mast_size, witness)) in per_rep.into_iter().enumerate() {
            records.push(record(cfg, n, rep, stream, "mast", mast_size));
            records.push(record(cfg, n, rep, stream, "witness", witness));
        }
    }
    Ok(records)
}

/// Per replicate: blobify both trees of a same-shape pair and record how many
/// aligned blob pairs intersect.
pub fn run_blob_intersect(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for (n_idx, &n) in cfg.ns.iter().enumerate() {
        let k = cfg.k_rule.k_for(n);
        let per_rep = par_map_indexed(cfg.replicates, |rep| {
            let stream = cfg.stream(n_idx, rep);
            let mut rng = RngSeed::new(cfg.master_seed, stream).rng();
            let base = uniform_tree_with(n, &mut rng).expect("n >= 2");
            let t1 = relabel_uniform_with(&base, &mut rng);
            let t2 = relabel_uniform_with(&base, &mut rng);
            let (pairs, _) = matched_blob_pairs(&t1, &t2, k).expect("equal shapes");
            let total = pairs.len();
            let hits = pairs
                .iter()
                .filter(|(a, b)| a.intersection(b).next().is_some())
                .count();
            (stream, total, hits)
        });
        for (rep, (stream, total, hits)) in per_rep.into_iter().enumerate() {
            records.push(record(cfg, n, rep, stream, "blob_pairs", total as f64));
            records.push(record(
                cfg,
                n,
                rep,
                stream,
                "blob_pairs_intersecting",
                hits as f64,
            ));
            let fraction = if total == 0 {
                1.0
            } else {
                hits as f64 / total as f64
            };
            records.push(record(cfg, n, rep, stream, "intersect_fraction", fraction));
        }
    }
    Ok(records)
}

/// Per-(experiment, n, statistic) means and standard errors, in first
/// appearance order. Means are plain sequential sums over the recorded
/// values, so they are recomputable exactly from the CSV.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, usize, String)> = Vec::new();
    let mut groups: std::collections::HashMap<(String, usize, String), Vec<f64>> =
        std::collections::HashMap::new();
    for r in records {
        let key = (r.experiment.clone(), r.n, r.statistic.clone());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key.clone());
                Vec::new()
            })
            .push(r.value);
    }
    order
        .into_iter()
        .map(|key| {
            let values = &groups[&key];
            let count = values.len();
            let mean = values.iter().sum::<f64>() / count as f64;
            let stderr = if count >= 2 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (count - 1) as f64;
                (var / count as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                experiment: key.0,
                n: key.1,
                statistic: key.2,
                mean,
                stderr,
                count,
            }
        })
        .collect()
}

/// Sandwich summary: empirical means plus the theorem bounds per n.
pub fn sandwich_summary(
    cfg: &ExperimentConfig,
    records: &[ExperimentRecord],
) -> Result<Vec<SummaryRow>> {
    let mut rows = summarize(records);
    for &n in &cfg.ns {
        rows.push(SummaryRow {
            experiment: cfg.name.clone(),
            n,
            statistic: "lower_bound".into(),
            mean: mast_lower_bound(n),
            stderr: 0.0,
            count: 0,
        });
        rows.push(SummaryRow {
            experiment: cfg.name.clone(),
            n,
            statistic: "upper_bound".into(),
            mean: mast_upper_bound(n, cfg.lambda)?,
            stderr: 0.0,
            count: 0,
        });
    }
    Ok(rows)
}

/// Intersection summary: empirical means plus the pooled frequency and the
/// 1 - 1/e floor per n.
pub fn intersect_summary(
    cfg: &ExperimentConfig,
    records: &[ExperimentRecord],
) -> Vec<SummaryRow> {
    let mut rows = summarize(records);
    for &n in &cfg.ns {
        let total: f64 = records
            .iter()
            .filter(|r| r.n == n && r.statistic == "blob_pairs")
            .map(|r| r.value)
            .sum();
        let hits: f64 = records
            .iter()
            .filter(|r| r.n == n && r.statistic == "blob_pairs_intersecting")
            .map(|r| r.value)
            .sum();
        let pooled = if total == 0.0 { 1.0 } else { hits / total };
        let stderr = if total > 0.0 {
            (pooled * (1.0 - pooled) / total).sqrt()
        } else {
            0.0
        };
        rows.push(SummaryRow {
            experiment: cfg.name.clone(),
            n,
            statistic: "pooled_intersect_frequency".into(),
            mean: pooled,
            stderr,
            count: total as usize,
        });
        rows.push(SummaryRow {
            experiment: cfg.name.clone(),
            n,
            statistic: "lemma_floor".into(),
            mean: lemma_floor(),
            stderr: 0.0,
            count: 0,
        });
    }
    rows
}

/// Records CSV: `experiment,n,replicate,stream_seed,statistic,value`, LF
/// line endings, floats in shortest round-trip form.
pub fn records_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("experiment,n,replicate,stream_seed,statistic,value\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.experiment, r.n, r.replicate, r.stream_seed, r.statistic, r.value
        ));
    }
    out
}

/// Summary CSV: `experiment,n,statistic,mean,stderr,count`.
pub fn summaries_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("experiment,n,statistic,mean,stderr,count\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.experiment, r.n, r.statistic, r.mean, r.stderr, r.count
        ));
    }
    out
}
