use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ferrari_cli::bench::{cover_str, format_table, mode_str, run_bench, BenchReport, CSV_HEADER};
use ferrari_cli::format::{deserialize_index, serialize_index};
use ferrari_cli::workload::{
    gen_positive_workload, gen_random_workload, read_pairs, write_pairs, Workload, WorkloadKind,
};
use ferrari_core::graph::{load_edge_list, LoadedGraph};
use ferrari_core::index::{build_index, BudgetMode, CoverAlgo, IndexParams, ReachIndex};
use ferrari_core::query::QueryContext;

#[derive(Parser)]
#[command(name = "ferrari", version, about = "Budgeted interval reachability index")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Local,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverArg {
    Greedy,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Random,
    Positive,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Interval budget per node (local) or per-node average (global)
    #[arg(long, default_value_t = 5)]
    k: u32,
    #[arg(long, value_enum, default_value = "local")]
    mode: ModeArg,
    /// Global-mode slack factor: nodes may temporarily hold c·k intervals
    #[arg(long, default_value_t = 4)]
    c: u32,
    /// Number of seed nodes (0..=64)
    #[arg(long, default_value_t = 32)]
    seeds: u32,
    #[arg(long, value_enum, default_value = "greedy")]
    cover: CoverArg,
}

impl ParamArgs {
    fn to_params(self) -> IndexParams {
        IndexParams {
            k: self.k,
            mode: match self.mode {
                ModeArg::Local => BudgetMode::Local,
                ModeArg::Global => BudgetMode::Global,
            },
            c: self.c,
            seeds: self.seeds,
            cover: match self.cover {
                CoverArg::Greedy => CoverAlgo::Greedy,
                CoverArg::Dp => CoverAlgo::Dp,
            },
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index from an edge list and write it to disk
    Build {
        /// Edge-list file ("SRC DST" per line, # and % comments)
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Output index file
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer reachability queries against a stored index
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Pair-list file of queries
        #[arg(long, conflicts_with = "pair")]
        pairs: Option<PathBuf>,
        /// A single SRC DST query
        #[arg(long, num_args = 2, value_names = ["SRC", "DST"])]
        pair: Option<Vec<u64>>,
    },
    /// Generate a query workload
    Gen {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, value_enum, default_value = "random")]
        kind: KindArg,
        /// RNG seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Visit cap of the forward BFS used for positive sampling
        #[arg(long, default_value_t = ferrari_cli::workload::DEFAULT_BFS_CAP)]
        bfs_cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an index and time a workload against it
    Bench {
        #[arg(long)]
        graph: PathBuf,
        /// Pair-list file with the queries to run
        #[arg(long)]
        workload: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated list of budgets; one report row per value
        #[arg(long, value_delimiter = ',')]
        sweep_k: Option<Vec<u32>>,
        /// Worker threads sharing the read-only index
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Workload label recorded in the report (pair files carry no kind)
        #[arg(long, default_value = "file")]
        kind: String,
        /// Append rows to this CSV file (header written if missing)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print summary information about a stored index
    Stats {
        #[arg(long)]
        index: PathBuf,
    },
}

fn load_graph(path: &Path) -> Result<LoadedGraph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_edge_list(BufReader::new(file))
        .with_context(|| format!("parsing edge list {}", path.display()))
}

fn load_index(path: &Path) -> Result<ReachIndex> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    deserialize_index(BufReader::new(file))
        .with_context(|| format!("reading index {}", path.display()))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Build { graph, params, out } => {
            let input = load_graph(&graph)?;
            let start = std::time::Instant::now();
            let idx = build_index(&input, params.to_params())?;
            let build_ms = start.elapsed().as_secs_f64() * 1e3;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut sink = BufWriter::new(file);
            serialize_index(&idx, &mut sink)?;
            sink.flush()?;
            let bytes = std::fs::metadata(&out)?.len();
            println!(
                "built {}: {} nodes, {} edges, {} components, {} intervals, {} seeds, \
                 {} bytes, {:.2} ms",
                out.display(),
                idx.original_node_count(),
                idx.original_edge_count(),
                idx.scc().comp_count(),
                idx.interval_count(),
                idx.seeds().seed_count(),
                bytes,
                build_ms,
            );
        }
        Cmd::Query { index, pairs, pair } => {
            let idx = load_index(&index)?;
            let mut ctx = QueryContext::new(&idx);
            match (pairs, pair) {
                (Some(path), None) => {
                    let file =
                        File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                    let pairs = read_pairs(BufReader::new(file))?;
                    let stdout = std::io::stdout().lock();
                    let mut out = BufWriter::new(stdout);
                    for (u, v) in pairs {
                        let (ans, _) = ctx.query(u, v)?;
                        writeln!(out, "{u}\t{v}\t{ans}")?;
                    }
                    out.flush()?;
                }
                (None, Some(pair)) => {
                    let (u, v) = (pair[0], pair[1]);
                    let (ans, stats) = ctx.query(u, v)?;
                    println!("{u}\t{v}\t{ans}");
                    eprintln!(
                        "expanded={} probes={} pruned_tau={} pruned_level={} pruned_seed={} \
                         pruned_interval={}",
                        stats.expanded,
                        stats.probes,
                        stats.pruned_tau,
                        stats.pruned_level,
                        stats.pruned_seed,
                        stats.pruned_interval,
                    );
                }
                _ => bail!("pass either --pairs FILE or --pair SRC DST"),
            }
        }
        Cmd::Gen { graph, count, kind, seed, bfs_cap, out } => {
            let input = load_graph(&graph)?;
            let workload = match kind {
                KindArg::Random => gen_random_workload(&input, count, seed)?,
                KindArg::Positive => gen_positive_workload(&input, count, seed, bfs_cap)?,
            };
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut sink = BufWriter::new(file);
            write_pairs(&mut sink, &workload.pairs)?;
            sink.flush()?;
            println!(
                "wrote {} {} pairs to {}",
                workload.pairs.len(),
                workload.kind.as_str(),
                out.display()
            );
        }
        Cmd::Bench { graph, workload, params, sweep_k, threads, kind, csv } => {
            let input = load_graph(&graph)?;
            let file =
                File::open(&workload).with_context(|| format!("opening {}", workload.display()))?;
            let pairs = read_pairs(BufReader::new(file))?;
            let name = dataset_name(&graph);
            let w = Workload { pairs, kind: WorkloadKind::Random };

            let base = params.to_params();
            let ks = sweep_k.unwrap_or_else(|| vec![base.k]);
            let mut reports: Vec<BenchReport> = Vec::new();
            for k in ks {
                let params = IndexParams { k, ..base };
                let report = run_bench(&input, params, &w, &kind, threads, &name)?;
                if threads > 1 {
                    let shards: Vec<String> =
                        report.shard_ms.iter().map(|ms| format!("{ms:.2}")).collect();
                    eprintln!("k={k}: per-shard query ms: [{}]", shards.join(", "));
                }
                reports.push(report);
            }
            print!("{}", format_table(&reports));
            if let Some(path) = csv {
                let exists = path.exists();
                let file = std::fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&path)
                    .with_context(|| format!("opening {}", path.display()))?;
                let mut sink = BufWriter::new(file);
                if !exists {
                    writeln!(sink, "{CSV_HEADER}")?;
                }
                for report in &reports {
                    writeln!(sink, "{}", report.csv_row())?;
                }
                sink.flush()?;
            }
        }
        Cmd::Stats { index } => {
            let bytes = std::fs::metadata(&index)?.len();
            let idx = load_index(&index)?;
            let p = idx.params();
            let labels = idx.labels();
            let max_label = labels.iter().map(|l| l.len()).max().unwrap_or(0);
            let exact: u64 =
                labels.iter().flat_map(|l| l.intervals()).filter(|iv| iv.exact).count() as u64;
            let total = idx.interval_count();
            println!("index {}", index.display());
            println!("  file bytes        {bytes}");
            println!(
                "  parameters        k={} mode={} c={} seeds={} cover={}",
                p.k,
                mode_str(p.mode),
                p.c,
                p.seeds,
                cover_str(p.cover)
            );
            println!(
                "  original graph    {} nodes, {} edges",
                idx.original_node_count(),
                idx.original_edge_count()
            );
            println!(
                "  condensed DAG     {} components (+1 virtual root), {} edges",
                idx.scc().comp_count(),
                idx.dag().edge_count()
            );
            println!(
                "  intervals         {} total ({} exact, {} approximate), max {} per node, \
                 {:.3} avg",
                total,
                exact,
                total - exact,
                max_label,
                total as f64 / idx.dag().node_count() as f64
            );
            println!("  seeds             {}", idx.seeds().seed_count());
        }
    }
    Ok(())
}
