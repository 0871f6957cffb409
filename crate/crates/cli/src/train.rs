use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use slpinn::metrics::ERROR_CSV_HEADER;
use slpinn::train::{run_experiment_with, train_chain, ChainResult, SeedRecord, TrainReport};
use slpinn::{ExperimentConfig, Method, ModelFile, Target, Viscosity};

use crate::{CliResult, Failure, TrainArgs};

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn write_manifest(path: &Path, mut manifest: Value) -> CliResult {
    manifest["version"] = json!(env!("CARGO_PKG_VERSION"));
    manifest["finished_unix"] = json!(unix_now());
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Other(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Builds the experiment from the optional config file and the command-line overrides.
pub fn load_config(args: &TrainArgs) -> CliResult<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(t) = args.targets {
        config.targets = t.into();
    }
    if let Some(m) = args.method {
        config.methods = m.methods();
    }
    if let Some(eps) = &args.eps {
        config.eps_list = eps.clone();
    }
    if let Some(seeds) = &args.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(n) = args.max_iter {
        config.lbfgs.max_iter = n;
    }
    config.validate()?;
    if args.jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    Ok(config)
}

/// Runs chains on `jobs` workers; results come back in job order.
fn run_pool(config: &ExperimentConfig, jobs: usize, list: &[(Viscosity, Method, u64)]) -> Vec<ChainResult> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<ChainResult>>> = list.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..jobs.min(list.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(v, method, seed)) = list.get(i) else { break };
                let result = train_chain(config, v, method, seed);
                match &result {
                    Ok(chain) => {
                        for (r, _) in chain {
                            eprintln!(
                                "eps={:e} {method} {} seed={seed}: loss {:.3e} after {} iterations ({}), rel_l2 {:.3e}",
                                r.eps, r.target, r.final_loss, r.iterations, r.termination, r.errors.rel_l2
                            );
                        }
                    }
                    Err(e) => eprintln!("eps={:e} {method} seed={seed}: {e}", v.eps()),
                }
                *slots[i].lock().expect("no worker panics while holding a slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("unpoisoned").expect("every job ran"))
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"))
}

fn stem(eps: f64, method: Method, target: Target, seed: u64) -> String {
    format!("{method}_{target}_eps{eps:e}_seed{seed}")
}

/// Long-format best-seed errors, one row per (ε, method, target) cell.
pub fn errors_csv(report: &TrainReport) -> String {
    let mut out = format!("{ERROR_CSV_HEADER}\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{:e},{},{},{},{}",
            c.eps,
            c.target,
            c.method,
            fmt_opt(c.errors.map(|e| e.rel_l2)),
            fmt_opt(c.errors.map(|e| e.rel_linf))
        );
    }
    out
}

/// Rows are viscosities, columns are method × {rel_l2, rel_linf}.
pub fn wide_table(report: &TrainReport, config: &ExperimentConfig, target: Target) -> String {
    let mut out = String::from("eps");
    for m in &config.methods {
        let _ = write!(out, ",{m}_rel_l2,{m}_rel_linf");
    }
    out.push('\n');
    for &eps in &config.eps_list {
        let _ = write!(out, "{eps:e}");
        for &m in &config.methods {
            let e = report.cell(eps, m, target).and_then(|c| c.errors);
            let _ = write!(out, ",{},{}", fmt_opt(e.map(|e| e.rel_l2)), fmt_opt(e.map(|e| e.rel_linf)));
        }
        out.push('\n');
    }
    out
}

pub fn seeds_csv(records: &[SeedRecord]) -> String {
    let mut out = String::from(
        "eps,target,method,seed,initial_loss,final_loss,iterations,evaluations,termination,rel_l2,rel_linf\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{:e},{},{},{},{:e},{:e},{},{},{},{:e},{:e}",
            r.eps,
            r.target,
            r.method,
            r.seed,
            r.initial_loss,
            r.final_loss,
            r.iterations,
            r.evaluations,
            r.termination,
            r.errors.rel_l2,
            r.errors.rel_linf
        );
    }
    out
}

pub fn run(args: TrainArgs) -> CliResult {
    let config = load_config(&args)?;
    let started = unix_now();
    eprintln!(
        "{} trainings on {} worker(s), writing to {}",
        config.training_count(),
        args.jobs,
        args.out.display()
    );
    let report = run_experiment_with(&config, |list| run_pool(&config, args.jobs, list), None)?;

    let out = &args.out;
    fs::create_dir_all(out.join("traces"))?;
    fs::create_dir_all(out.join("models"))?;
    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut write = |rel: String, body: &str| -> CliResult {
        let path = out.join(&rel);
        fs::write(&path, body)?;
        outputs.push(path);
        Ok(())
    };

    write("errors.csv".into(), &errors_csv(&report))?;
    for target in config.targets.targets() {
        write(format!("table_{target}.csv"), &wide_table(&report, &config, target))?;
    }
    write("seeds.csv".into(), &seeds_csv(&report.records))?;
    for r in &report.records {
        let name = stem(r.eps, r.method, r.target, r.seed);
        if let Some(trace) = &r.trace {
            write(format!("traces/{name}.csv"), &trace.to_csv())?;
        }
        if let Some(model) = report.model(r.eps, r.method, r.target, r.seed) {
            write(format!("models/{name}.json"), &ModelFile::from_ansatz(model).to_json()?)?;
        }
    }

    let failed: Vec<Value> = report
        .failed_cells()
        .map(|c| json!({"eps": c.eps, "method": c.method, "target": c.target}))
        .collect();
    let timings: Vec<Value> = report
        .records
        .iter()
        .map(|r| json!({"eps": r.eps, "method": r.method, "target": r.target, "seed": r.seed, "wall_seconds": r.wall_seconds}))
        .collect();
    let manifest_path = out.join("train_manifest.json");
    outputs.push(manifest_path.clone());
    write_manifest(
        &manifest_path,
        json!({
            "command": "train",
            "config": config,
            "algorithms": {
                "prng": "splitmix64",
                "activation": "tanh",
                "initialization": "glorot_uniform, zero biases",
                "corrector_seed_offsets": slpinn::ansatz::CORRECTOR_SEED_OFFSETS,
                "optimizer": "lbfgs, strong wolfe line search",
                "u1_exact_form": "corrected, with z(1-z)",
                "best_seed_metric": "rel_l2",
            },
            "cells": report.cells,
            "records": report.records,
            "timings": timings,
            "failed_cells": failed,
            "outputs": outputs,
            "started_unix": started,
        }),
    )?;

    if failed.is_empty() {
        println!("{}", errors_csv(&report).trim_end());
        Ok(())
    } else {
        Err(Failure::Training(format!("{} cell(s) failed every seed", failed.len())))
    }
}
