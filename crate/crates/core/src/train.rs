//! Sequential training: u1 then u2, and ω2, ω3 then ω1, each over several seeds.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{invalid, Result};
use crate::field::{Field, Method, Target, Upstream};
use crate::loss::{CompiledLoss, LossSpec, TrainingSets};
use crate::metrics::{error_row, ErrorRow, EPS_SWEEP};
use crate::optim::{minimize, LbfgsConfig, LossTrace, Termination};
use crate::problem::Viscosity;

/// Which family of components to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSet {
    Velocity,
    Vorticity,
    Both,
}

impl TargetSet {
    /// Targets in dependency order. The vorticity chain also trains u1, which the
    /// ω3 and ω1 equations transport with.
    pub fn targets(self) -> Vec<Target> {
        match self {
            TargetSet::Velocity => Target::VELOCITY.to_vec(),
            TargetSet::Vorticity => [&[Target::U1][..], Target::VORTICITY.as_slice()].concat(),
            TargetSet::Both => [Target::VELOCITY.as_slice(), Target::VORTICITY.as_slice()].concat(),
        }
    }
}

impl std::str::FromStr for TargetSet {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "velocity" => Ok(TargetSet::Velocity),
            "vorticity" => Ok(TargetSet::Vorticity),
            "both" => Ok(TargetSet::Both),
            other => Err(invalid(format!("unknown target set `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub eps_list: Vec<f64>,
    pub methods: Vec<Method>,
    pub targets: TargetSet,
    pub n_interior_1d: usize,
    pub n_interior_2d_per_axis: usize,
    pub n_gamma: usize,
    pub n_periodic: usize,
    pub n_hidden: usize,
    pub seeds: Vec<u64>,
    pub lbfgs: LbfgsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            eps_list: EPS_SWEEP.to_vec(),
            methods: Method::BOTH.to_vec(),
            targets: TargetSet::Both,
            n_interior_1d: 25,
            n_interior_2d_per_axis: 50,
            n_gamma: 50,
            n_periodic: 50,
            n_hidden: 20,
            seeds: (0..5).collect(),
            lbfgs: LbfgsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: &str| crate::Error::Config(m.to_string());
        if self.eps_list.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(cfg("eps_list, methods and seeds must be non-empty"));
        }
        for &e in &self.eps_list {
            Viscosity::new(e).map_err(|_| cfg(&format!("viscosity {e} is outside (0, 1]")))?;
        }
        if [
            self.n_interior_1d,
            self.n_interior_2d_per_axis,
            self.n_gamma,
            self.n_periodic,
        ]
        .iter()
        .any(|&n| n < 2)
        {
            return Err(cfg("every training-point count must be at least 2"));
        }
        if self.n_hidden == 0 {
            return Err(cfg("hidden width must be at least 1"));
        }
        self.lbfgs.validate().map_err(|e| cfg(&e.to_string()))
    }

    /// Number of single-target trainings a full run performs.
    pub fn training_count(&self) -> usize {
        self.eps_list.len() * self.methods.len() * self.seeds.len() * self.targets.targets().len()
    }
}

pub fn build_training_sets(target: Target, method: Method, config: &ExperimentConfig) -> Result<TrainingSets> {
    TrainingSets::uniform(
        target,
        method,
        config.n_interior_1d,
        config.n_interior_2d_per_axis,
        config.n_gamma,
        config.n_periodic,
    )
}

/// Initializes the networks of one target from `seed` and minimizes its loss.
#[allow(clippy::too_many_arguments)]
pub fn train_target(
    target: Target,
    method: Method,
    viscosity: Viscosity,
    seed: u64,
    upstream: &Upstream<'_>,
    sets: &TrainingSets,
    n_hidden: usize,
    lbfgs: &LbfgsConfig,
) -> Result<(Ansatz, LossTrace)> {
    let mut ansatz = Ansatz::init(target, method, viscosity, n_hidden, seed)?;
    let spec = LossSpec::new(target, method, viscosity, upstream, sets)?;
    let loss = CompiledLoss::new(&ansatz, &spec)?;
    let objective = |x: &[f64], g: &mut [f64]| loss.value_and_gradient(x, g).unwrap_or(f64::NAN);
    let (best, trace) = minimize(objective, &ansatz.params(), lbfgs)?;
    ansatz.set_params(best.as_slice())?;
    Ok((ansatz, trace))
}

/// Outcome of one (ε, method, target, seed) training.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub eps: f64,
    pub method: Method,
    pub target: Target,
    pub seed: u64,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub wall_seconds: f64,
    pub errors: ErrorRow,
    #[serde(skip)]
    pub trace: Option<LossTrace>,
}

/// Best seed of one (ε, method, target) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub eps: f64,
    pub method: Method,
    pub target: Target,
    pub best_seed: Option<u64>,
    pub errors: Option<ErrorRow>,
    pub failed: bool,
}

/// Trained models kept per cell and seed.
pub type ModelKey = (u64, Method, Target, u64);

fn eps_key(eps: f64) -> u64 {
    eps.to_bits()
}

#[derive(Debug, Default)]
pub struct TrainReport {
    pub records: Vec<SeedRecord>,
    pub cells: Vec<CellSummary>,
    pub models: BTreeMap<ModelKey, Ansatz>,
}

impl TrainReport {
    pub fn failed_cells(&self) -> impl Iterator<Item = &CellSummary> {
        self.cells.iter().filter(|c| c.failed)
    }

    pub fn cell(&self, eps: f64, method: Method, target: Target) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.eps == eps && c.method == method && c.target == target)
    }

    pub fn model(&self, eps: f64, method: Method, target: Target, seed: u64) -> Option<&Ansatz> {
        self.models.get(&(eps_key(eps), method, target, seed))
    }

    /// Best model of a cell.
    pub fn best_model(&self, eps: f64, method: Method, target: Target) -> Option<&Ansatz> {
        let cell = self.cell(eps, method, target)?;
        self.model(eps, method, target, cell.best_seed?)
    }
}

/// Trained targets of one chain, or the error that stopped it.
pub type ChainResult = Result<Vec<(SeedRecord, Ansatz)>>;

/// Per-training progress callback: receives each record as it completes.
pub type Progress<'a> = &'a mut dyn FnMut(&SeedRecord);

/// Trains one seed of one (ε, method) chain: every target in dependency order, each
/// downstream target using this seed's upstream models.
pub fn train_chain(
    config: &ExperimentConfig,
    viscosity: Viscosity,
    method: Method,
    seed: u64,
) -> ChainResult {
    let mut out: Vec<(SeedRecord, Ansatz)> = Vec::new();
    for target in config.targets.targets() {
        let find = |t: Target| -> Option<&dyn Field> {
            out.iter().find(|(r, _)| r.target == t).map(|(_, a)| a as &dyn Field)
        };
        let upstream = Upstream {
            u1: find(Target::U1),
            w2: find(Target::W2),
            w3: find(Target::W3),
        };
        let sets = build_training_sets(target, method, config)?;
        let start = Instant::now();
        let (ansatz, trace) = train_target(
            target,
            method,
            viscosity,
            seed,
            &upstream,
            &sets,
            config.n_hidden,
            &config.lbfgs,
        )?;
        let wall_seconds = start.elapsed().as_secs_f64();
        let errors = error_row(&ansatz, target, method, viscosity)?;
        let record = SeedRecord {
            eps: viscosity.eps(),
            method,
            target,
            seed,
            initial_loss: trace.initial_loss(),
            final_loss: trace.final_loss(),
            iterations: trace.iterations(),
            evaluations: trace.evaluations,
            termination: trace.termination,
            wall_seconds,
            errors,
            trace: Some(trace),
        };
        out.push((record, ansatz));
    }
    Ok(out)
}

/// Runs every (ε, method, seed) chain and selects the best seed per cell by relative L² error.
///
/// `run_chain` lets callers fan chains out to workers; results are assembled in
/// configuration order, so the report does not depend on scheduling.
pub fn run_experiment_with<F>(config: &ExperimentConfig, run_chain: F, progress: Option<Progress<'_>>) -> Result<TrainReport>
where
    F: Fn(&[(Viscosity, Method, u64)]) -> Vec<ChainResult>,
{
    config.validate()?;
    let mut jobs = Vec::new();
    for &eps in &config.eps_list {
        let v = Viscosity::new(eps)?;
        for &method in &config.methods {
            for &seed in &config.seeds {
                jobs.push((v, method, seed));
            }
        }
    }
    let results = run_chain(&jobs);
    let mut report = TrainReport::default();
    let mut progress = progress;
    for ((v, method, seed), result) in jobs.iter().zip(results) {
        match result {
            Ok(chain) => {
                for (record, ansatz) in chain {
                    if let Some(p) = progress.as_mut() {
                        p(&record);
                    }
                    report
                        .models
                        .insert((eps_key(v.eps()), *method, record.target, *seed), ansatz);
                    report.records.push(record);
                }
            }
            Err(e) => {
                eprintln!("chain eps={:e} method={method} seed={seed} failed: {e}", v.eps());
            }
        }
    }
    for &eps in &config.eps_list {
        for &method in &config.methods {
            for target in config.targets.targets() {
                let best = report
                    .records
                    .iter()
                    .filter(|r| r.eps == eps && r.method == method && r.target == target)
                    .filter(|r| r.errors.rel_l2.is_finite())
                    .min_by(|a, b| {
                        a.errors
                            .rel_l2
                            .total_cmp(&b.errors.rel_l2)
                            .then(a.seed.cmp(&b.seed))
                    });
                report.cells.push(CellSummary {
                    eps,
                    method,
                    target,
                    best_seed: best.map(|r| r.seed),
                    errors: best.map(|r| r.errors),
                    failed: best.is_none(),
                });
            }
        }
    }
    Ok(report)
}

/// Sequential [`run_experiment_with`].
pub fn run_experiment(config: &ExperimentConfig, progress: Option<Progress<'_>>) -> Result<TrainReport> {
    run_experiment_with(
        config,
        |jobs| {
            jobs.iter()
                .map(|&(v, method, seed)| train_chain(config, v, method, seed))
                .collect()
        },
        progress,
    )
}
