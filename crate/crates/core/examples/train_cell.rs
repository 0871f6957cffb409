//! Trains the targets of one chain for a single viscosity, method and seed, printing
//! each result as it completes.
//!
//! `cargo run --release --example train_cell -- velocity sl 1e-6 0 [max_iter]`

use std::time::Instant;

use slpinn::train::build_training_sets;
use slpinn::{error_row, train_target, ExperimentConfig, Field, Method, Target, TargetSet, Upstream, Viscosity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let targets: TargetSet = args.first().map_or("velocity", String::as_str).parse()?;
    let method: Method = args.get(1).map_or("sl", String::as_str).parse()?;
    let v = Viscosity::new(args.get(2).map_or("1e-6", String::as_str).parse()?)?;
    let seed: u64 = args.get(3).map_or("0", String::as_str).parse()?;
    let mut config = ExperimentConfig::default();
    if let Some(m) = args.get(4) {
        config.lbfgs.max_iter = m.parse()?;
    }
    let mut trained = Vec::new();
    for target in targets.targets() {
        let find = |t: Target| {
            trained
                .iter()
                .find(|(tt, _)| *tt == t)
                .map(|(_, a)| a as &dyn Field)
        };
        let upstream = Upstream {
            u1: find(Target::U1),
            w2: find(Target::W2),
            w3: find(Target::W3),
        };
        let sets = build_training_sets(target, method, &config)?;
        let start = Instant::now();
        let (ansatz, trace) = train_target(target, method, v, seed, &upstream, &sets, config.n_hidden, &config.lbfgs)?;
        let row = error_row(&ansatz, target, method, v)?;
        println!(
            "{method} {target} eps={:e} seed={seed} loss {:.3e} -> {:.3e} iters={} evals={} ({}) {:.1}s rel_l2={:.3e} rel_linf={:.3e}",
            v.eps(),
            trace.initial_loss(),
            trace.final_loss(),
            trace.iterations(),
            trace.evaluations,
            trace.termination,
            start.elapsed().as_secs_f64(),
            row.rel_l2,
            row.rel_linf
        );
        trained.push((target, ansatz));
    }
    Ok(())
}
