//! Command-line interface and the end-to-end pipeline:
//! parse -> e-graph -> saturate -> extract -> code generation -> verified
//! proof certificate.

pub mod corpus;
mod pipeline;

pub use pipeline::{
    all_rules_for_verification, bench, bench_config, chain_costs, cost_of_terms,
    optimize_design, saturate_with, BenchRow, ExtractMode, PipelineError, PipelineResult,
    RunConfig, RunSummary,
};

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "dpopt", about = "Datapath RTL optimizer over typed e-graph rewriting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize a combinational Verilog module.
    Optimize {
        input: PathBuf,
        /// Rule selection: default | all | mcm (adds constant-expansion
        /// extensions and 1*x -> 2*x - x).
        #[arg(long, default_value = "default")]
        rules: String,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
        /// greedy | ilp
        #[arg(long, default_value = "ilp")]
        extract: String,
        /// ILP solve timeout in seconds.
        #[arg(long)]
        ilp_timeout: Option<f64>,
        /// Skip chain verification (the certificate is still produced).
        #[arg(long)]
        no_verify: bool,
        /// JSON file overriding gate-cost constants.
        #[arg(long)]
        cost_config: Option<PathBuf>,
        /// Write the proof certificate into this directory.
        #[arg(long)]
        emit_cert: Option<PathBuf>,
        /// Dump the final e-graph (JSON + DOT) to this path prefix.
        #[arg(long)]
        dump_egraph: Option<PathBuf>,
        /// Run configuration file (JSON); flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path for the optimized module (default: stdout).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the benchmark corpus and print the summary table.
    Bench {
        /// Directory of .v files; the built-in corpus runs when omitted.
        dir: Option<PathBuf>,
        /// Also write machine-readable results.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Synthesize a rewrite condition for a pattern pair.
    SynthCond {
        #[arg(long)]
        lhs: Option<String>,
        #[arg(long)]
        rhs: Option<String>,
        #[arg(long, default_value_t = 8)]
        wmax: u32,
        /// Label through generated Verilog (IEEE context coercion) instead
        /// of the annotation-exact semantics.
        #[arg(long)]
        verilog_semantics: bool,
        /// Regenerate the whole shipped condition store.
        #[arg(long)]
        regen_store: bool,
    },
    /// Re-verify a proof certificate directory.
    Verify { dir: PathBuf },
}

pub fn main() {
    let code = run(Cli::parse());
    std::process::exit(code);
}

fn run(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::Optimize {
            input,
            rules,
            iters,
            max_nodes,
            extract,
            ilp_timeout,
            no_verify,
            cost_config,
            emit_cert,
            dump_egraph,
            config,
            out,
        } => {
            let mut cfg = match config {
                Some(p) => match std::fs::read_to_string(&p)
                    .ok()
                    .and_then(|s| serde_json::from_str::<RunConfig>(&s).ok())
                {
                    Some(c) => c,
                    None => {
                        eprintln!("error: cannot read config {}", p.display());
                        return 2;
                    }
                },
                None => RunConfig::default(),
            };
            cfg.rules = rules;
            if let Some(i) = iters {
                cfg.max_iters = i;
            }
            if let Some(n) = max_nodes {
                cfg.max_nodes = n;
            }
            cfg.extract = match extract.as_str() {
                "greedy" => ExtractMode::Greedy,
                _ => ExtractMode::Ilp,
            };
            if let Some(t) = ilp_timeout {
                cfg.ilp_timeout_s = t;
            }
            cfg.verify = !no_verify;
            if let Some(p) = cost_config {
                match std::fs::read_to_string(&p)
                    .ok()
                    .and_then(|s| serde_json::from_str(&s).ok())
                {
                    Some(c) => cfg.cost = c,
                    None => {
                        eprintln!("error: cannot read cost config {}", p.display());
                        return 2;
                    }
                }
            }
            let src = match std::fs::read_to_string(&input) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            match optimize_design(&src, &cfg) {
                Ok(res) => {
                    if let Some(dir) = emit_cert {
                        if let Some(cert) = &res.cert {
                            if let Err(e) = crate::backend::write_certificate(cert, &dir) {
                                eprintln!("error writing certificate: {e}");
                                return 4;
                            }
                        }
                    }
                    if let Some(prefix) = dump_egraph {
                        let _ = std::fs::write(
                            prefix.with_extension("json"),
                            serde_json::to_string_pretty(&res.egraph_json).unwrap(),
                        );
                        let _ = std::fs::write(prefix.with_extension("dot"), &res.egraph_dot);
                    }
                    eprintln!("{}", serde_json::to_string_pretty(&res.summary).unwrap());
                    match out {
                        Some(p) => {
                            if std::fs::write(&p, &res.optimized).is_err() {
                                eprintln!("error: cannot write {}", p.display());
                                return 2;
                            }
                        }
                        None => println!("{}", res.optimized),
                    }
                    if res.summary.stop_reason != crate::engine::StopReason::Saturated
                        && res.summary.cost_after >= res.summary.cost_before
                    {
                        3
                    } else {
                        0
                    }
                }
                Err(PipelineError::Parse(e)) => {
                    eprintln!("parse error: {e}");
                    2
                }
                Err(PipelineError::Verify(e)) => {
                    eprintln!("verification failed: {e}");
                    4
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Cmd::Bench { dir, json } => {
            let entries: Vec<(String, String)> = match dir {
                Some(d) => {
                    let mut files: Vec<_> = std::fs::read_dir(&d)
                        .map(|rd| {
                            rd.filter_map(|e| e.ok())
                                .map(|e| e.path())
                                .filter(|p| p.extension().map(|x| x == "v").unwrap_or(false))
                                .collect::<Vec<_>>()
                        })
                        .unwrap_or_default();
                    files.sort();
                    files
                        .into_iter()
                        .filter_map(|p| {
                            let name = p.file_stem()?.to_string_lossy().to_string();
                            let src = std::fs::read_to_string(&p).ok()?;
                            Some((name, src))
                        })
                        .collect()
                }
                None => corpus::corpus()
                    .into_iter()
                    .map(|(n, s)| (n.to_string(), s))
                    .collect(),
            };
            let rows = bench(&entries);
            println!(
                "{:<14} {:>10} {:>11} {:>8} {:>9} {:>11} {:>10} {:>8} {}",
                "benchmark", "init nodes", "final nodes", "extract", "status", "cost before",
                "cost after", "time(s)", "verified"
            );
            for r in &rows {
                println!(
                    "{:<14} {:>10} {:>11} {:>8} {:>9} {:>11} {:>10} {:>8.2} {}",
                    r.name,
                    r.init_nodes,
                    r.final_nodes,
                    r.extract,
                    r.status,
                    r.cost_before,
                    r.cost_after,
                    r.runtime_s,
                    r.verified
                );
            }
            if let Some(p) = json {
                let _ = std::fs::write(p, serde_json::to_string_pretty(&rows).unwrap());
            }
            if rows.iter().any(|r| r.status == "error") {
                1
            } else {
                0
            }
        }
        Cmd::SynthCond {
            lhs,
            rhs,
            wmax,
            verilog_semantics,
            regen_store,
        } => {
            if regen_store {
                let mut progress = |s: &str| eprintln!("{s}");
                match crate::condsynth::regenerate_store(&mut progress) {
                    Ok(store) => {
                        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/conditions.sop");
                        if std::fs::write(path, store.render()).is_err() {
                            eprintln!("error: cannot write {path}");
                            return 2;
                        }
                        eprintln!("store written to {path}");
                        return 0;
                    }
                    Err(e) => {
                        eprintln!("synthesis failed: {e}");
                        return 2;
                    }
                }
            }
            let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
                eprintln!("--lhs and --rhs are required (or --regen-store)");
                return 2;
            };
            let (l, r) = match (
                crate::frontend::parse_vlng(&lhs),
                crate::frontend::parse_vlng(&rhs),
            ) {
                (Ok(l), Ok(r)) => (l, r),
                (e1, e2) => {
                    eprintln!("pattern parse error: {e1:?} {e2:?}");
                    return 2;
                }
            };
            let mode = if verilog_semantics {
                crate::condsynth::LabelMode::VerilogContext
            } else {
                crate::condsynth::LabelMode::AnnotationExact
            };
            match crate::condsynth::synthesize_mode(
                &l,
                &crate::rules::Rhs::Pattern(r),
                wmax,
                crate::condsynth::DEFAULT_MAP_CAP,
                &|_| None,
                mode,
            ) {
                Ok(rep) => {
                    println!("cond {}", rep.cond);
                    println!(
                        "{}",
                        serde_json::json!({
                            "maps": rep.maps,
                            "true_maps": rep.true_maps,
                            "false_maps": rep.maps - rep.true_maps,
                            "tree_depth": rep.depth,
                            "wmax": rep.wmax,
                            "label_ms": rep.label_ms,
                            "fit_ms": rep.fit_ms,
                        })
                    );
                    0
                }
                Err(e) => {
                    eprintln!("synthesis failed: {e}");
                    2
                }
            }
        }
        Cmd::Verify { dir } => {
            let cert = match crate::backend::read_certificate(&dir) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("cannot read certificate: {e}");
                    return 2;
                }
            };
            let rules = all_rules_for_verification();
            match crate::backend::verify_chain(&cert, 5, &rules) {
                Ok(rep) if rep.pass => {
                    println!("certificate verified: {} steps", cert.steps.len());
                    0
                }
                Ok(rep) => {
                    println!("certificate has unverified steps: {rep:?}");
                    4
                }
                Err(e) => {
                    eprintln!("verification failed: {e}");
                    4
                }
            }
        }
    }
}
