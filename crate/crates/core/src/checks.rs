//! Verification suites shared by the command line and the test harness.
//!
//! Each suite returns [`CheckOutcome`]s: a measured quantity, the limit it is held to,
//! and whether it passed.

use std::fmt;

use serde::Serialize;

use crate::ansatz::{net_shapes, Ansatz};
use crate::error::Result;
use crate::field::{Field, Method, Target, Upstream};
use crate::loss::{CompiledLoss, LossSpec, TrainingSets};
use crate::metrics::{
    corrector_norm_check, expected_corrector_slope, inviscid_rate_check, weak_vorticity_limit_check, NormExponent,
};
use crate::net::{fd_gradient, parameter_count, ShallowNet};
use crate::problem::{f1, manufactured_report, verification_grid, FlowData, Manufactured, U1Form, Viscosity};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn at_most(name: String, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn at_least(name: String, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            passed: value >= limit,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {:.3e} (limit {:.1e})", self.name, self.value, self.limit)
    }
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|c| c.passed)
}

/// An ansatz whose parameters are drawn uniformly from `(-1, 1)`.
pub fn random_ansatz(target: Target, method: Method, viscosity: Viscosity, rng: &mut SplitMix64) -> Ansatz {
    let nets = net_shapes(target, method, 20)
        .into_iter()
        .map(|(n_in, h)| {
            let params: Vec<f64> = (0..parameter_count(n_in, h)).map(|_| rng.uniform(-1.0, 1.0)).collect();
            ShallowNet::from_params(n_in, h, &params).expect("finite parameters")
        })
        .collect();
    Ansatz::from_nets(target, method, viscosity, nets).expect("shapes follow the target")
}

/// Worst relative residual of the exact fields, one outcome per viscosity.
pub fn manufactured_checks(eps_list: &[f64], form: U1Form) -> Result<Vec<CheckOutcome>> {
    eps_list
        .iter()
        .map(|&eps| {
            let v = Viscosity::new(eps)?;
            let data = Manufactured::with_form(v, form);
            let report = manufactured_report(&data, &verification_grid(v, 41))?;
            let worst = report
                .checks
                .iter()
                .max_by(|a, b| a.max_rel.total_cmp(&b.max_rel))
                .expect("report has checks");
            Ok(CheckOutcome::at_most(
                format!("manufactured eps={eps:e} worst={}", worst.name),
                worst.max_rel,
                report.tolerance,
            ))
        })
        .collect()
}

/// Analytic loss gradients against central differences with step `1e-5`.
///
/// The error of one draw is `max_k |g_k - fd_k| / max_k |fd_k|`; the outcome keeps the
/// worst draw per loss. Training sets are reduced (8 × 8 interior, 6 wall, 5 periodic
/// points) so that the difference quotients stay cheap; the loss structure is unchanged.
pub fn gradient_checks(eps: f64, draws: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let v = Viscosity::new(eps)?;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    for method in Method::BOTH {
        for target in Target::ALL {
            let sets = TrainingSets::uniform(target, method, 25, 8, 6, 5)?;
            let mut worst: f64 = 0.0;
            for _ in 0..draws {
                let u1 = random_ansatz(Target::U1, method, v, &mut rng);
                let w2 = random_ansatz(Target::W2, method, v, &mut rng);
                let w3 = random_ansatz(Target::W3, method, v, &mut rng);
                let up = Upstream {
                    u1: Some(&u1),
                    w2: Some(&w2),
                    w3: Some(&w3),
                };
                let a = random_ansatz(target, method, v, &mut rng);
                let spec = LossSpec::new(target, method, v, &up, &sets)?;
                let loss = CompiledLoss::new(&a, &spec)?;
                let params = a.params();
                let mut grad = vec![0.0; params.len()];
                loss.value_and_gradient(params.as_slice(), &mut grad)?;
                let fd = fd_gradient(|p| loss.value(p.as_slice()).unwrap_or(f64::NAN), &params, 1e-5)?;
                let scale = fd.inf_norm().max(f64::MIN_POSITIVE);
                let err = grad.iter().zip(&fd.0).map(|(g, f)| (g - f).abs()).fold(0.0, f64::max) / scale;
                worst = worst.max(err);
            }
            out.push(CheckOutcome::at_most(
                format!("gradient {method} {target} eps={eps:e}"),
                worst,
                1e-6,
            ));
        }
    }
    Ok(out)
}

/// The corrected u1 loss against the plain interior loss of its bare network.
pub fn cancellation_check(eps_list: &[f64], draws: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SplitMix64::new(seed);
    let sets = TrainingSets::uniform(Target::U1, Method::SingularLayer, 25, 50, 50, 50)?;
    let mut out = Vec::new();
    for &eps in eps_list {
        let v = Viscosity::new(eps)?;
        let mut worst: f64 = 0.0;
        for _ in 0..draws {
            let a = random_ansatz(Target::U1, Method::SingularLayer, v, &mut rng);
            let spec = LossSpec::new(Target::U1, Method::SingularLayer, v, &Upstream::none(), &sets)?;
            let sl = CompiledLoss::new(&a, &spec)?.value(a.params().as_slice())?;
            let net = &a.nets()[0];
            let bare = sets
                .interior
                .iter()
                .map(|&p| {
                    let j = net.eval_jet(p, 2).expect("order 2 is supported");
                    (j.value() - eps * j.d(0, 2) - f1(p[1])).powi(2)
                })
                .sum::<f64>()
                / sets.interior.len() as f64;
            worst = worst.max((sl - bare).abs() / bare.abs().max(f64::MIN_POSITIVE));
        }
        out.push(CheckOutcome::at_most(format!("cancellation sl u1 eps={eps:e}"), worst, 1e-12));
    }
    Ok(out)
}

/// Initial losses of the vorticity components at `eps` and `eps / 100`, same parameters.
///
/// Upstream fields are the exact ones at each viscosity, so only the target's own
/// structure changes between the two evaluations.
pub fn loss_scaling_checks(eps: f64, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for target in [Target::W2, Target::W1] {
        for method in Method::BOTH {
            let mut losses = [0.0; 2];
            for (k, e) in [eps, eps / 100.0].into_iter().enumerate() {
                let v = Viscosity::new(e)?;
                let data = Manufactured::new(v);
                let (u1, w2, w3) = (data.field(Target::U1), data.field(Target::W2), data.field(Target::W3));
                let up = Upstream {
                    u1: Some(&u1),
                    w2: Some(&w2),
                    w3: Some(&w3),
                };
                let a = Ansatz::init(target, method, v, 20, seed)?;
                let sets = TrainingSets::uniform(target, method, 25, 50, 50, 50)?;
                let spec = LossSpec::new(target, method, v, &up, &sets)?;
                losses[k] = CompiledLoss::new(&a, &spec)?.value(a.params().as_slice())?;
            }
            let ratio = losses[1] / losses[0];
            let name = format!("loss growth {method} {target} eps={eps:e}->{:e}", eps / 100.0);
            out.push(match method {
                Method::Plain => CheckOutcome::at_least(name, ratio, 1e3),
                Method::SingularLayer => CheckOutcome::at_most(name, ratio.max(1.0 / ratio), 10.0),
            });
        }
    }
    Ok(out)
}

/// Wall conditions of the corrected structures over random parameter draws.
///
/// The value reported is the worst violation divided by its allowance: the
/// exponentially small size `e^{-1/√ε}` times the anchors involved, plus rounding
/// (`1e-9` relative) on the `1/ε` Neumann data.
pub fn structural_wall_checks(eps_list: &[f64], draws: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    for &eps in eps_list {
        let v = Viscosity::new(eps)?;
        let est = (-1.0 / v.sqrt_eps()).exp();
        let problem = Manufactured::new(v);
        let mut worst = [0.0f64; 5];
        let mut record = |slot: usize, violation: f64, allowance: f64| {
            worst[slot] = worst[slot].max(violation / allowance);
        };
        for _ in 0..draws {
            let x = rng.next_f64();
            let u1 = random_ansatz(Target::U1, Method::SingularLayer, v, &mut rng);
            let n = &u1.nets()[0];
            let allowance = est * (n.value([0.0, 0.0]).abs() + n.value([0.0, 1.0]).abs()) + 1e-15;
            for z in [0.0, 1.0] {
                record(0, u1.value([x, z]).abs(), allowance);
            }
            for (slot, target) in [(1, Target::U2), (2, Target::W3)] {
                let a = random_ansatz(target, Method::SingularLayer, v, &mut rng);
                let [n, l, r] = a.nets() else { unreachable!("three networks") };
                let allowance = est
                    * (n.value([x, 0.0]).abs()
                        + n.value([x, 1.0]).abs()
                        + l.value([x, 1.0]).abs()
                        + r.value([x, 0.0]).abs())
                    + 1e-15;
                for z in [0.0, 1.0] {
                    record(slot, a.value([x, z]).abs(), allowance);
                }
            }
            let w2 = random_ansatz(Target::W2, Method::SingularLayer, v, &mut rng);
            let w1 = random_ansatz(Target::W1, Method::SingularLayer, v, &mut rng);
            for z in [0.0, 1.0] {
                let want = -problem.f1(z) / eps;
                let got = w2.predict([x, z], 1)?.d(0, 1);
                record(3, (got - want).abs(), 1e-9 * want.abs() + 1e3 * est / eps);
                let want = problem.f2(x, z) / eps;
                let got = w1.predict([x, z], 1)?.d(0, 1);
                record(4, (got - want).abs(), 1e-9 * want.abs() + 1e3 * est / eps);
            }
        }
        let labels = ["u1 dirichlet", "u2 dirichlet", "w3 dirichlet", "w2 neumann", "w1 neumann"];
        for (label, w) in labels.iter().zip(worst) {
            out.push(CheckOutcome::at_most(format!("wall {label} eps={eps:e}"), w, 1.0));
        }
    }
    Ok(out)
}

/// One fitted rate of the asymptotic suite.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeRow {
    pub check: &'static str,
    pub parameter: String,
    /// `None` when the measured quantity is zero to rounding and has no decay to fit.
    pub slope: Option<f64>,
    pub low: f64,
    pub high: f64,
    /// Measured quantity shrinks strictly along decreasing ε.
    pub decreasing: bool,
    pub passed: bool,
}

pub const SLOPE_CSV_HEADER: &str = "check,parameter,slope,low,high,decreasing,passed";

impl SlopeRow {
    pub fn csv_line(&self) -> String {
        let slope = self.slope.map_or("nan".to_string(), |s| format!("{s:.6}"));
        format!(
            "{},{},{slope},{},{},{},{}",
            self.check, self.parameter, self.low, self.high, self.decreasing, self.passed
        )
    }
}

fn strictly_decreasing(eps: &[f64], values: &[f64]) -> bool {
    let mut pairs: Vec<(f64, f64)> = eps.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.windows(2).all(|w| w[1].1 < w[0].1)
}

/// A labelled test function of `z`.
pub type TestFunction = (&'static str, fn(f64) -> f64);

/// Test functions of the weak vorticity limit, with labels.
pub const WEAK_LIMIT_PSI: [TestFunction; 3] = [("1", |_| 1.0), ("z", |z| z), ("z^2", |z| z * z)];

/// Inviscid rate, weak vorticity limit and corrector norm scaling over `eps_list`.
///
/// For `ψ ≡ 1` the limit is attained up to rounding, so that row passes when every
/// Δ is at most `3ε`; the other test functions must decay with slope in `[0.4, 0.6]`.
pub fn rate_suite(eps_list: &[f64]) -> Result<Vec<SlopeRow>> {
    let mut rows = Vec::new();
    let fit = inviscid_rate_check(eps_list)?;
    rows.push(SlopeRow {
        check: "inviscid_l2",
        parameter: "u1".into(),
        slope: Some(fit.slope),
        low: 0.2,
        high: 0.3,
        decreasing: strictly_decreasing(&fit.eps, &fit.values),
        passed: (0.2..=0.3).contains(&fit.slope),
    });
    for (label, psi) in WEAK_LIMIT_PSI {
        let w = weak_vorticity_limit_check(&psi, eps_list)?;
        let passed = if label == "1" {
            w.eps.iter().zip(&w.delta).all(|(e, d)| *d <= 3.0 * e)
        } else {
            w.decreasing() && w.slope.is_some_and(|s| (0.4..=0.6).contains(&s))
        };
        let (low, high) = if label == "1" { (f64::NAN, f64::NAN) } else { (0.4, 0.6) };
        rows.push(SlopeRow {
            check: "weak_vorticity",
            parameter: format!("psi={label}"),
            slope: w.slope,
            low,
            high,
            decreasing: w.decreasing(),
            passed,
        });
    }
    for m in 0..=2 {
        for p in [NormExponent::Finite(1), NormExponent::Finite(2), NormExponent::Infinity] {
            let fit = corrector_norm_check(m, p, eps_list)?;
            let want = expected_corrector_slope(m, p);
            rows.push(SlopeRow {
                check: "corrector_norm",
                parameter: format!("m={m} p={}", p.label()),
                slope: Some(fit.slope),
                low: want - 0.02,
                high: want + 0.02,
                decreasing: strictly_decreasing(&fit.eps, &fit.values),
                passed: (fit.slope - want).abs() <= 0.02,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_u1_fails_gate() {
        let good = manufactured_checks(&[1e-3], U1Form::Corrected).unwrap();
        assert!(all_passed(&good));
        let bad = manufactured_checks(&[1e-3], U1Form::Printed).unwrap();
        assert!(!all_passed(&bad));
    }

    #[test]
    fn loss_scaling_dichotomy() {
        let checks = loss_scaling_checks(1e-4, 0).unwrap();
        assert_eq!(checks.len(), 4);
        assert!(all_passed(&checks), "{checks:#?}");
    }

    #[test]
    fn rate_suite_passes_on_sweep() {
        let rows = rate_suite(&crate::metrics::EPS_SWEEP).unwrap();
        assert_eq!(rows.len(), 1 + 3 + 9);
        for r in &rows {
            assert!(r.passed, "{}", r.csv_line());
        }
        assert_eq!(SLOPE_CSV_HEADER.split(',').count(), rows[0].csv_line().split(',').count());
    }

    #[test]
    fn outcome_display() {
        let c = CheckOutcome::at_most("x".into(), 0.5, 1.0);
        assert_eq!(c.to_string(), "PASS x: 5.000e-1 (limit 1.0e0)");
    }
}
