//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::net::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbfgsConfig {
    /// Stored curvature pairs.
    pub history: usize,
    pub max_iter: usize,
    /// Stop once both the loss change and the gradient infinity-norm fall below this.
    pub tol: f64,
    /// Scale of the first trial step, `t = init_step · min(1, 1/‖g‖₁)`.
    pub init_step: f64,
    pub c1: f64,
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_ls: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 10,
            max_iter: 50_000,
            tol: 1e-8,
            init_step: 0.1,
            c1: 1e-4,
            c2: 0.9,
            max_ls: 25,
        }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(invalid("line-search constants must satisfy 0 < c1 < c2 < 1"));
        }
        if self.history == 0 || self.max_iter == 0 || self.max_ls == 0 {
            return Err(invalid("history, max_iter and max_ls must be at least 1"));
        }
        if !(self.init_step > 0.0 && self.init_step.is_finite()) {
            return Err(invalid("init_step must be positive"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(invalid("tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tolerance,
    MaxIter,
    LineSearchFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIter => "max_iter",
            Termination::LineSearchFailure => "line_search_failure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub loss: f64,
    pub grad_inf_norm: f64,
    /// Accepted step length along the search direction (0 for the initial record).
    pub step: f64,
    /// Directional derivative at the start of the step.
    pub slope_start: f64,
    /// Directional derivative at the accepted point.
    pub slope_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTrace {
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    pub evaluations: usize,
}

impl LossTrace {
    /// Accepted iterations, excluding the initial record.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.loss)
    }

    pub fn initial_loss(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.loss)
    }

    /// CSV with columns `iter,loss,grad_inf_norm,step`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,loss,grad_inf_norm,step\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e}",
                r.iter, r.loss, r.grad_inf_norm, r.step
            );
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

struct Evaluator<F> {
    objective: F,
    count: usize,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Evaluator<F> {
    fn eval(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        self.count += 1;
        let f = (self.objective)(x, g);
        if f.is_finite() && all_finite(g) {
            f
        } else {
            f64::INFINITY
        }
    }
}

struct Accepted {
    t: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Minimizer of the cubic through `(x1, f1, g1)` and `(x2, f2, g2)`, clamped to `bounds`.
fn cubic_interpolate(
    (x1, f1, g1): (f64, f64, f64),
    (x2, f2, g2): (f64, f64, f64),
    bounds: Option<(f64, f64)>,
) -> f64 {
    let (lo, hi) = bounds.unwrap_or(if x1 <= x2 { (x1, x2) } else { (x2, x1) });
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq >= 0.0 {
        let d2 = d2_sq.sqrt();
        let t = if x1 <= x2 {
            x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if t.is_finite() {
            return t.clamp(lo, hi);
        }
    }
    0.5 * (lo + hi)
}

/// Strong-Wolfe search along `d` from `x`; `None` when no acceptable step was found.
fn strong_wolfe<F: FnMut(&[f64], &mut [f64]) -> f64>(
    ev: &mut Evaluator<F>,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    t_init: f64,
    cfg: &LbfgsConfig,
) -> Option<Accepted> {
    let n = x.len();
    let d_norm = inf_norm(d);
    let mut trial = vec![0.0; n];
    let mut eval_at = |ev: &mut Evaluator<F>, t: f64| {
        for i in 0..n {
            trial[i] = x[i] + t * d[i];
        }
        let mut g = vec![0.0; n];
        let f = ev.eval(&trial, &mut g);
        let s = if f.is_finite() { dot(&g, d) } else { f64::NAN };
        (f, g, s)
    };
    let armijo = |t: f64, f: f64| f.is_finite() && f <= f0 + cfg.c1 * t * slope0;
    let curvature = |s: f64| s.abs() <= -cfg.c2 * slope0;

    let mut t = t_init;
    let (mut f_new, mut g_new, mut s_new) = eval_at(ev, t);
    let mut evals = 1;
    let (mut t_prev, mut f_prev, mut s_prev) = (0.0, f0, slope0);
    let mut g_prev: Option<Vec<f64>> = None;

    // Bracketing: [(t, f, g, slope); 2]
    let mut bracket: [(f64, f64, Option<Vec<f64>>, f64); 2];
    loop {
        if !armijo(t, f_new) || (evals > 1 && f_new >= f_prev) {
            bracket = [(t_prev, f_prev, g_prev, s_prev), (t, f_new, Some(g_new), s_new)];
            break;
        }
        if curvature(s_new) {
            return Some(Accepted {
                t,
                f: f_new,
                g: g_new,
                slope: s_new,
            });
        }
        if s_new >= 0.0 {
            bracket = [(t_prev, f_prev, g_prev, s_prev), (t, f_new, Some(g_new), s_new)];
            break;
        }
        if evals >= cfg.max_ls {
            return None;
        }
        let lo = t + 0.01 * (t - t_prev);
        let hi = 10.0 * t;
        let next = cubic_interpolate((t_prev, f_prev, s_prev), (t, f_new, s_new), Some((lo, hi)));
        t_prev = t;
        f_prev = f_new;
        s_prev = s_new;
        g_prev = Some(g_new);
        t = next;
        (f_new, g_new, s_new) = eval_at(ev, t);
        evals += 1;
    }

    // Zoom. `lo` indexes the endpoint with the lower loss.
    let mut insufficient_progress = false;
    while evals < cfg.max_ls {
        let width = (bracket[1].0 - bracket[0].0).abs();
        if width * d_norm < 1e-300 || width < f64::EPSILON * bracket[0].0.abs().max(bracket[1].0.abs()) {
            return None;
        }
        let (lo_i, hi_i) = if bracket[0].1 <= bracket[1].1 { (0, 1) } else { (1, 0) };
        let (a, b) = (bracket[0].0, bracket[1].0);
        let (bmin, bmax) = (a.min(b), a.max(b));
        let mut t_new = if bracket.iter().all(|e| e.1.is_finite() && e.3.is_finite()) {
            cubic_interpolate(
                (bracket[0].0, bracket[0].1, bracket[0].3),
                (bracket[1].0, bracket[1].1, bracket[1].3),
                None,
            )
        } else {
            0.5 * (a + b)
        };
        let eps = 0.1 * (bmax - bmin);
        if (bmax - t_new).min(t_new - bmin) < eps {
            if insufficient_progress || t_new >= bmax || t_new <= bmin {
                t_new = if (t_new - bmax).abs() < (t_new - bmin).abs() {
                    bmax - eps
                } else {
                    bmin + eps
                };
                insufficient_progress = false;
            } else {
                insufficient_progress = true;
            }
        } else {
            insufficient_progress = false;
        }
        let (f_t, g_t, s_t) = eval_at(ev, t_new);
        evals += 1;
        if !armijo(t_new, f_t) || f_t >= bracket[lo_i].1 {
            bracket[hi_i] = (t_new, f_t, Some(g_t), s_t);
        } else {
            if curvature(s_t) {
                return Some(Accepted {
                    t: t_new,
                    f: f_t,
                    g: g_t,
                    slope: s_t,
                });
            }
            if s_t * (bracket[hi_i].0 - bracket[lo_i].0) >= 0.0 {
                bracket[hi_i] = bracket[lo_i].clone();
            }
            bracket[lo_i] = (t_new, f_t, Some(g_t), s_t);
        }
    }
    None
}

/// Two-loop recursion: `-H g` from the stored pairs `(s, y, 1/sᵀy)`.
fn direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimizes `objective`, which returns the loss and writes the gradient into its second argument.
///
/// Returns the best parameters seen and the per-iteration trace.
pub fn minimize<F>(mut objective: F, x0: &ParamVector, cfg: &LbfgsConfig) -> Result<(ParamVector, LossTrace)>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    cfg.validate()?;
    let n = x0.len();
    let mut x = x0.0.clone();
    let mut g = vec![0.0; n];
    let f_start = objective(&x, &mut g);
    if !(f_start.is_finite() && all_finite(&g)) {
        return Err(Error::InvalidInput(
            "objective is not finite at the starting point".into(),
        ));
    }
    let mut ev = Evaluator {
        objective,
        count: 1,
    };
    let mut f = f_start;
    let mut records = vec![IterRecord {
        iter: 0,
        loss: f,
        grad_inf_norm: inf_norm(&g),
        step: 0.0,
        slope_start: 0.0,
        slope_end: 0.0,
    }];
    if inf_norm(&g) < cfg.tol {
        return Ok((
            ParamVector(x),
            LossTrace {
                records,
                termination: Termination::Tolerance,
                evaluations: ev.count,
            },
        ));
    }

    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.history.min(64));
    let mut termination = Termination::MaxIter;
    for iter in 1..=cfg.max_iter {
        let mut accepted = None;
        // One retry along steepest descent after a failed search with curvature memory.
        for attempt in 0..2 {
            let mut d = direction(&g, &memory);
            let mut slope = dot(&g, &d);
            if slope.is_nan() || slope >= 0.0 || !all_finite(&d) {
                memory.clear();
                d = g.iter().map(|v| -v).collect();
                slope = dot(&g, &d);
            }
            let t_init = if iter == 1 && attempt == 0 {
                let g1: f64 = g.iter().map(|v| v.abs()).sum();
                cfg.init_step * (1.0 / g1).min(1.0)
            } else {
                1.0
            };
            if let Some(acc) = strong_wolfe(&mut ev, &x, f, slope, &d, t_init, cfg) {
                accepted = Some((acc, d, slope));
                break;
            }
            if memory.is_empty() {
                break;
            }
            memory.clear();
        }
        let Some((acc, d, slope0)) = accepted else {
            // No step means no loss change; with a small gradient this is convergence.
            termination = if inf_norm(&g) < cfg.tol {
                Termination::Tolerance
            } else {
                Termination::LineSearchFailure
            };
            break;
        };

        let s: Vec<f64> = d.iter().map(|di| acc.t * di).collect();
        let y: Vec<f64> = acc.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 0.0 && sy.is_finite() {
            if memory.len() == cfg.history {
                memory.pop_front();
            }
            memory.push_back((s.clone(), y, 1.0 / sy));
        }
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let f_change = (f - acc.f).abs();
        f = acc.f;
        g = acc.g;
        let g_inf = inf_norm(&g);
        records.push(IterRecord {
            iter,
            loss: f,
            grad_inf_norm: g_inf,
            step: acc.t,
            slope_start: slope0,
            slope_end: acc.slope,
        });
        if f_change < cfg.tol && g_inf < cfg.tol {
            termination = Termination::Tolerance;
            break;
        }
    }
    Ok((
        ParamVector(x),
        LossTrace {
            records,
            termination,
            evaluations: ev.count,
        },
    ))
}
