use slpinn::field::{Method, Target, Upstream};
use slpinn::train::{build_training_sets, run_experiment, train_chain, ExperimentConfig, TargetSet};
use slpinn::{train_target, LbfgsConfig, Viscosity};

fn quick_config() -> ExperimentConfig {
    ExperimentConfig {
        eps_list: vec![1e-4],
        methods: vec![Method::SingularLayer],
        targets: TargetSet::Velocity,
        n_interior_2d_per_axis: 8,
        n_gamma: 8,
        n_periodic: 8,
        seeds: vec![0],
        lbfgs: LbfgsConfig {
            max_iter: 20,
            ..LbfgsConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn default_sets_follow_protocol() {
    let c = ExperimentConfig::default();
    let s = build_training_sets(Target::U1, Method::SingularLayer, &c).unwrap();
    assert_eq!(s.interior.len(), 25);
    assert!(s.gamma.is_empty() && s.periodic.is_empty());
    let s = build_training_sets(Target::U2, Method::SingularLayer, &c).unwrap();
    assert_eq!(s.interior.len(), 2500);
    assert_eq!(s.periodic.len(), 50);
    assert!(s.gamma.is_empty());
    let s = build_training_sets(Target::W3, Method::Plain, &c).unwrap();
    assert_eq!(s.gamma.len(), 50);
    assert_eq!(c.training_count(), 300);
}

#[test]
fn counting_one_seed_one_eps() {
    let c = ExperimentConfig {
        methods: vec![Method::Plain, Method::SingularLayer],
        ..quick_config()
    };
    assert_eq!(c.training_count(), 4);
    let report = run_experiment(&c, None).unwrap();
    assert_eq!(report.records.len(), 4);
    assert_eq!(report.cells.len(), 4);
    let rows = report.cells.iter().filter(|c| c.target == Target::U2).count();
    assert_eq!(rows, 2);
}

#[test]
fn training_is_deterministic() {
    let c = quick_config();
    let v = Viscosity::new(1e-4).unwrap();
    let sets = build_training_sets(Target::U1, Method::Plain, &c).unwrap();
    let run = || train_target(Target::U1, Method::Plain, v, 7, &Upstream::none(), &sets, 20, &c.lbfgs).unwrap();
    let (a, ta) = run();
    let (b, tb) = run();
    assert_eq!(a, b);
    assert_eq!(ta.to_csv(), tb.to_csv());
}

#[test]
fn chain_respects_dependency_order() {
    let c = ExperimentConfig {
        targets: TargetSet::Vorticity,
        lbfgs: LbfgsConfig {
            max_iter: 3,
            ..LbfgsConfig::default()
        },
        ..quick_config()
    };
    let v = Viscosity::new(1e-4).unwrap();
    let chain = train_chain(&c, v, Method::SingularLayer, 0).unwrap();
    let order: Vec<Target> = chain.iter().map(|(r, _)| r.target).collect();
    assert_eq!(order, vec![Target::U1, Target::W2, Target::W3, Target::W1]);
}

#[test]
fn downstream_needs_upstream() {
    let c = quick_config();
    let v = Viscosity::new(1e-4).unwrap();
    let sets = build_training_sets(Target::U2, Method::SingularLayer, &c).unwrap();
    let r = train_target(Target::U2, Method::SingularLayer, v, 0, &Upstream::none(), &sets, 20, &c.lbfgs);
    assert!(matches!(r, Err(slpinn::Error::Config(_))));
}

#[test]
fn best_seed_is_permutation_invariant() {
    let base = ExperimentConfig {
        targets: TargetSet::Velocity,
        seeds: vec![0, 1, 2],
        lbfgs: LbfgsConfig {
            max_iter: 5,
            ..LbfgsConfig::default()
        },
        ..quick_config()
    };
    let flipped = ExperimentConfig {
        seeds: vec![2, 0, 1],
        ..base.clone()
    };
    let a = run_experiment(&base, None).unwrap();
    let b = run_experiment(&flipped, None).unwrap();
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.best_seed, y.best_seed);
        assert_eq!(x.errors, y.errors);
    }
}

#[test]
fn invalid_configs_rejected() {
    let mut c = quick_config();
    c.eps_list = vec![2.0];
    assert!(matches!(c.validate(), Err(slpinn::Error::Config(_))));
    let mut c = quick_config();
    c.n_gamma = 1;
    assert!(c.validate().is_err());
    let bad: Result<ExperimentConfig, _> = serde_json::from_str(r#"{"bogus": 1}"#);
    assert!(bad.is_err());
}
