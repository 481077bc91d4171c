//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on data errors (bad files, violated
//! preconditions, failed verification), 2 on usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::blobify::{comb_leaf_count, greedy_blobification, greedy_comb_scaffold};
use crate::bounds::{bound_report, exact_sweep};
use crate::error::{Error, Result};
use crate::mast::mast;
use crate::newick::{parse_newick, write_newick};
use crate::random::{relabel_uniform, uniform_tree, yule_tree, RngSeed};
use crate::sim::{
    intersect_summary, records_csv, run_blob_intersect, run_comb_slope,
    run_mast_sandwich, sandwich_summary, summaries_csv, summarize, ExperimentConfig,
};
use crate::tree::Tree;

#[derive(Parser)]
#[command(
    name = "mastlab",
    version,
    about = "Maximum agreement subtrees of rooted binary trees: blobification, exact MAST, random models, tail bounds, and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Uniform,
    Yule,
    SameShape,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExperimentArg {
    CombSlope,
    MastSandwich,
    BlobIntersect,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    /// Exhaustive exact checks of the tail bounds for n <= 6.
    SmallN,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit random trees as Newick lines.
    Gen {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Leaf count (uniform and yule models).
        #[arg(long)]
        n: Option<usize>,
        /// Newick file with the base tree (same-shape model).
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Exact maximum agreement subtree of two Newick files.
    Mast {
        file1: PathBuf,
        file2: PathBuf,
        /// Also print the witness leaf set.
        #[arg(long)]
        witness: bool,
    },
    /// Greedy k-blobification report for a Newick file.
    Blobify {
        #[arg(long)]
        k: usize,
        file: PathBuf,
    },
    /// Greedy comb scaffold vector for a Newick file.
    Comb {
        #[arg(long)]
        k: usize,
        file: PathBuf,
    },
    /// Tail-bound report for (n, s).
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        /// Upper-bound constant; must exceed e*sqrt(2) = 3.8442...
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        /// Emit a CSV row instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Run a Monte Carlo experiment; prints the summary CSV.
    Exp {
        #[arg(value_enum)]
        experiment: ExperimentArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replicates per n (defaults: 1000 comb-slope, 500 otherwise).
        #[arg(long)]
        reps: Option<usize>,
        /// Write replicate records here; the summary goes to
        /// `<stem>.summary.csv` next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the n grid, comma separated.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Run an exhaustive verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
    },
}

/// Parses and runs; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn read_tree(path: &Path) -> Result<Tree> {
    parse_newick(&std::fs::read_to_string(path)?)
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Gen {
            model,
            n,
            base,
            seed,
            count,
        } => {
            let base_tree = base.as_deref().map(read_tree).transpose()?;
            for stream in 0..count as u64 {
                let tree = match model {
                    ModelArg::Uniform => {
                        let n = n.ok_or_else(|| {
                            Error::InvalidConfig("--n is required for uniform".into())
                        })?;
                        uniform_tree(n, RngSeed::new(seed, stream))?
                    }
                    ModelArg::Yule => {
                        let n = n.ok_or_else(|| {
                            Error::InvalidConfig("--n is required for yule".into())
                        })?;
                        yule_tree(n, RngSeed::new(seed, stream))?
                    }
                    ModelArg::SameShape => {
                        let base = base_tree.as_ref().ok_or_else(|| {
                            Error::InvalidConfig(
                                "--base is required for same-shape".into(),
                            )
                        })?;
                        relabel_uniform(base, RngSeed::new(seed, stream))
                    }
                };
                println!("{}", write_newick(&tree));
            }
            Ok(0)
        }
        Cmd::Mast {
            file1,
            file2,
            witness,
        } => {
            let t1 = read_tree(&file1)?;
            let t2 = read_tree(&file2)?;
            let result = mast(&t1, &t2)?;
            println!("{}", result.size);
            if witness {
                let labels: Vec<String> =
                    result.witness.iter().map(|l| l.to_string()).collect();
                println!("{}", labels.join(","));
            }
            Ok(0)
        }
        Cmd::Blobify { k, file } => {
            let tree = read_tree(&file)?;
            let b = greedy_blobification(&tree, k)?;
            print!("{b}");
            Ok(0)
        }
        Cmd::Comb { k, file } => {
            let tree = read_tree(&file)?;
            let v = greedy_comb_scaffold(&tree, k);
            let (full, conservative) = comb_leaf_count(&v, k);
            let values: Vec<String> = v.values.iter().map(|x| x.to_string()).collect();
            println!("v={}", values.join(","));
            println!("full={full} conservative={conservative}");
            Ok(0)
        }
        Cmd::Bounds { n, s, lambda, csv } => {
            let report = bound_report(n, s, lambda)?;
            let psi_text = report
                .psi
                .map(|p| p.to_string())
                .unwrap_or_else(|| "".to_string());
            if csv {
                println!("n,s,phi,psi,lower,upper_lambda");
                println!(
                    "{},{},{},{},{},{}",
                    report.n, report.s, report.phi, psi_text, report.lower,
                    report.upper_lambda
                );
            } else {
                println!("n      = {}", report.n);
                println!("s      = {}", report.s);
                println!("phi    = {}", report.phi);
                match report.psi {
                    Some(p) => println!("psi    = {p} (uniform model, exact)"),
                    None => println!("psi    = unavailable (n too large to enumerate)"),
                }
                println!("lower  = {}", report.lower);
                println!("upper  = {} (lambda = {})", report.upper_lambda, lambda);
            }
            Ok(0)
        }
        Cmd::Exp {
            experiment,
            seed,
            reps,
            out,
            ns,
        } => run_experiment(experiment, seed, reps, out, ns),
        Cmd::Verify { suite } => match suite {
            SuiteArg::SmallN => {
                let lines = exact_sweep(6)?;
                let mut failed = false;
                for line in &lines {
                    if line.violations.is_empty() {
                        println!("PASS {}", line.label);
                    } else {
                        failed = true;
                        println!("FAIL {}: {}", line.label, line.violations.join("; "));
                    }
                }
                Ok(if failed { 1 } else { 0 })
            }
        },
    }
}

fn run_experiment(
    experiment: ExperimentArg,
    seed: u64,
    reps: Option<usize>,
    out: Option<PathBuf>,
    ns: Option<Vec<usize>>,
) -> Result<i32> {
    let mut cfg = match experiment {
        ExperimentArg::CombSlope => ExperimentConfig::comb_slope(seed, reps.unwrap_or(1000)),
        ExperimentArg::MastSandwich => {
            ExperimentConfig::mast_sandwich(seed, reps.unwrap_or(500))
        }
        ExperimentArg::BlobIntersect => {
            ExperimentConfig::blob_intersect(seed, reps.unwrap_or(500))
        }
    };
    if let Some(ns) = ns {
        cfg.ns = ns;
    }
    let (records, summary, fit) = match experiment {
        ExperimentArg::CombSlope => {
            let (records, fit) = run_comb_slope(&cfg)?;
            let summary = summarize(&records);
            (records, summary, Some(fit))
        }
        ExperimentArg::MastSandwich => {
            let records = run_mast_sandwich(&cfg)?;
            let summary = sandwich_summary(&cfg, &records)?;
            (records, summary, None)
        }
        ExperimentArg::BlobIntersect => {
            let records = run_blob_intersect(&cfg)?;
            let summary = intersect_summary(&cfg, &records);
            (records, summary, None)
        }
    };
    if let Some(path) = &out {
        std::fs::write(path, records_csv(&records))?;
        std::fs::write(&summary_path(path), summaries_csv(&summary))?;
    }
    print!("{}", summaries_csv(&summary));
    if let Some(fit) = fit {
        println!(
            "slope={} intercept={} r_squared={}",
            fit.slope, fit.intercept, fit.r_squared
        );
    }
    Ok(0)
}

/// `slope.csv` -> `slope.summary.csv`, next to the records file.
pub fn summary_path(records_path: &Path) -> PathBuf {
    let stem = records_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    records_path.with_file_name(format!("{stem}.summary.csv"))
}
