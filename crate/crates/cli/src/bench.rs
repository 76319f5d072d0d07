//! Batch query benchmarking: timed index build, timed workload execution
//! (optionally sharded across threads against the shared read-only index),
//! and tabular/CSV reporting.

use std::time::Instant;

use ferrari_core::graph::LoadedGraph;
use ferrari_core::index::{build_index, BudgetMode, BuildError, CoverAlgo, IndexParams};
use ferrari_core::query::{QueryContext, QueryError, QueryStats};
use thiserror::Error;

use crate::format::serialize_index_to_vec;
use crate::workload::Workload;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Aggregated query counters over a whole workload.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatTotals {
    pub expanded: u64,
    pub probes: u64,
    pub pruned_tau: u64,
    pub pruned_level: u64,
    pub pruned_seed: u64,
    pub pruned_interval: u64,
    pub positives: u64,
}

impl StatTotals {
    pub fn add(&mut self, s: &QueryStats) {
        self.expanded += s.expanded;
        self.probes += s.probes;
        self.pruned_tau += s.pruned_tau;
        self.pruned_level += s.pruned_level;
        self.pruned_seed += s.pruned_seed;
        self.pruned_interval += s.pruned_interval;
        self.positives += u64::from(s.answer);
    }

    pub fn merge(&mut self, other: &StatTotals) {
        self.expanded += other.expanded;
        self.probes += other.probes;
        self.pruned_tau += other.pruned_tau;
        self.pruned_level += other.pruned_level;
        self.pruned_seed += other.pruned_seed;
        self.pruned_interval += other.pruned_interval;
        self.positives += other.positives;
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub dataset: String,
    pub params: IndexParams,
    pub build_ms: f64,
    pub index_bytes: u64,
    pub interval_count: u64,
    pub queries: usize,
    pub kind: String,
    /// Wall time of the query phase, excluding the build.
    pub total_ms: f64,
    pub mean_us: f64,
    pub median_us: f64,
    pub totals: StatTotals,
    /// Per-shard query wall times when the workload was split across threads.
    pub shard_ms: Vec<f64>,
}

/// Builds the index (timed), runs the workload (timed separately), and
/// collects per-query latencies and counters. `kind_label` names the
/// workload in the report (pair files do not record how they were made).
pub fn run_bench(
    input: &LoadedGraph,
    params: IndexParams,
    workload: &Workload,
    kind_label: &str,
    threads: usize,
    dataset: &str,
) -> Result<BenchReport, BenchError> {
    let threads = threads.max(1);
    let build_start = Instant::now();
    let idx = build_index(input, params)?;
    let build_ms = build_start.elapsed().as_secs_f64() * 1e3;
    let index_bytes = serialize_index_to_vec(&idx).len() as u64;

    let shards: Vec<&[(u64, u64)]> = if workload.pairs.is_empty() {
        Vec::new()
    } else {
        let chunk = workload.pairs.len().div_ceil(threads);
        workload.pairs.chunks(chunk).collect()
    };

    let query_start = Instant::now();
    let mut shard_results: Vec<(Vec<u64>, StatTotals, f64)> = Vec::new();
    std::thread::scope(|scope| -> Result<(), QueryError> {
        let handles: Vec<_> = shards
            .iter()
            .map(|pairs| {
                let idx = &idx;
                scope.spawn(move || -> Result<(Vec<u64>, StatTotals, f64), QueryError> {
                    let mut ctx = QueryContext::new(idx);
                    let mut latencies_ns = Vec::with_capacity(pairs.len());
                    let mut totals = StatTotals::default();
                    let shard_start = Instant::now();
                    for &(u, v) in *pairs {
                        let t = Instant::now();
                        let (_, stats) = ctx.query(u, v)?;
                        latencies_ns.push(t.elapsed().as_nanos() as u64);
                        totals.add(&stats);
                    }
                    Ok((latencies_ns, totals, shard_start.elapsed().as_secs_f64() * 1e3))
                })
            })
            .collect();
        for h in handles {
            shard_results.push(h.join().expect("bench worker panicked")?);
        }
        Ok(())
    })?;
    let total_ms = query_start.elapsed().as_secs_f64() * 1e3;

    let mut latencies: Vec<u64> = Vec::with_capacity(workload.pairs.len());
    let mut totals = StatTotals::default();
    let mut shard_ms = Vec::new();
    for (lat, t, ms) in shard_results {
        latencies.extend(lat);
        totals.merge(&t);
        shard_ms.push(ms);
    }
    latencies.sort_unstable();
    let mean_us = if latencies.is_empty() {
        0.0
    } else {
        latencies.iter().sum::<u64>() as f64 / latencies.len() as f64 / 1e3
    };
    let median_us =
        if latencies.is_empty() { 0.0 } else { latencies[latencies.len() / 2] as f64 / 1e3 };

    Ok(BenchReport {
        dataset: dataset.to_string(),
        params,
        build_ms,
        index_bytes,
        interval_count: idx.interval_count(),
        queries: workload.pairs.len(),
        kind: kind_label.to_string(),
        total_ms,
        mean_us,
        median_us,
        totals,
        shard_ms,
    })
}

pub fn mode_str(mode: BudgetMode) -> &'static str {
    match mode {
        BudgetMode::Local => "local",
        BudgetMode::Global => "global",
    }
}

pub fn cover_str(cover: CoverAlgo) -> &'static str {
    match cover {
        CoverAlgo::Greedy => "greedy",
        CoverAlgo::Dp => "dp",
    }
}

pub const CSV_HEADER: &str = "dataset,mode,k,c,s,build_ms,index_bytes,intervals,queries,kind,\
                              total_ms,mean_us,median_us,expanded_total";

impl BenchReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{},{},{},{},{:.3},{:.3},{:.3},{}",
            self.dataset,
            mode_str(self.params.mode),
            self.params.k,
            self.params.c,
            self.params.seeds,
            self.build_ms,
            self.index_bytes,
            self.interval_count,
            self.queries,
            self.kind,
            self.total_ms,
            self.mean_us,
            self.median_us,
            self.totals.expanded,
        )
    }
}

/// Renders reports as an aligned text table.
pub fn format_table(reports: &[BenchReport]) -> String {
    let headers = [
        "dataset",
        "mode",
        "k",
        "c",
        "s",
        "build_ms",
        "bytes",
        "intervals",
        "queries",
        "kind",
        "total_ms",
        "mean_us",
        "median_us",
        "expanded",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.dataset.clone(),
                mode_str(r.params.mode).to_string(),
                r.params.k.to_string(),
                r.params.c.to_string(),
                r.params.seeds.to_string(),
                format!("{:.2}", r.build_ms),
                r.index_bytes.to_string(),
                r.interval_count.to_string(),
                r.queries.to_string(),
                r.kind.clone(),
                format!("{:.2}", r.total_ms),
                format!("{:.3}", r.mean_us),
                format!("{:.3}", r.median_us),
                r.totals.expanded.to_string(),
            ]
        })
        .collect();

    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render = |cells: &[String], widths: &[usize], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:>width$}", cell, width = widths[i]));
        }
        out.push('\n');
    };
    render(&headers.iter().map(|h| h.to_string()).collect::<Vec<_>>(), &widths, &mut out);
    for row in &rows {
        render(row, &widths, &mut out);
    }
    out
}
