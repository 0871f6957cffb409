//! Training losses: mean squared PDE residuals plus wall and periodicity penalties.
//!
//! With upstream predictions frozen, every residual is affine in the partials of the
//! trainable networks. A [`LossSpec`] lists the residuals as weighted linear
//! combinations of prediction partials; [`CompiledLoss`] turns them into network probes
//! once and then evaluates the loss and its exact gradient by reverse accumulation.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::ansatz::{AffineForm, Ansatz, ORDER2_LEN};
use crate::error::{invalid, Error, Result};
use crate::field::{Field, Method, Target, Upstream};
use crate::net::{Kernel, Point, ShallowNet, JET_LEN, MULTI_INDICES};
use crate::problem::{FlowData, Manufactured, Viscosity};

/// Collocation points of one target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSets {
    pub interior: Vec<Point>,
    /// `x` positions of the wall penalties; each is applied at `z = 0` and `z = 1`.
    pub gamma: Vec<f64>,
    /// `z` positions pairing `x = 0` with `x = 1`.
    pub periodic: Vec<f64>,
}

fn uniform(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

impl TrainingSets {
    /// Uniform grids including endpoints: `n_1d` points for one-input targets, an
    /// `n_2d × n_2d` tensor grid otherwise.
    pub fn uniform(
        target: Target,
        method: Method,
        n_1d: usize,
        n_2d: usize,
        n_gamma: usize,
        n_periodic: usize,
    ) -> Result<Self> {
        if n_1d < 2 || n_2d < 2 || n_gamma < 2 || n_periodic < 2 {
            return Err(invalid("every training set needs at least two points"));
        }
        if target.dims() == 1 {
            return Ok(Self {
                interior: uniform(n_1d).into_iter().map(|z| [0.0, z]).collect(),
                ..Self::default()
            });
        }
        let axis = uniform(n_2d);
        let interior = axis
            .iter()
            .flat_map(|&x| axis.iter().map(move |&z| [x, z]))
            .collect();
        Ok(Self {
            interior,
            gamma: if method == Method::Plain {
                uniform(n_gamma)
            } else {
                Vec::new()
            },
            periodic: uniform(n_periodic),
        })
    }
}

/// One squared term `weight · (constant + Σ mult · Σ_β w_β ∂^β P(point))²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTerm {
    pub weight: f64,
    pub constant: f64,
    pub parts: Vec<(Point, [f64; ORDER2_LEN], f64)>,
}

impl ResidualTerm {
    fn location(&self) -> Point {
        self.parts.first().map_or([f64::NAN; 2], |p| p.0)
    }
}

const VALUE: [f64; ORDER2_LEN] = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
const DZ: [f64; ORDER2_LEN] = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];

/// The residual terms of one target's loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub target: Target,
    pub method: Method,
    pub terms: Vec<ResidualTerm>,
}

impl LossSpec {
    pub fn new(
        target: Target,
        method: Method,
        viscosity: Viscosity,
        upstream: &Upstream<'_>,
        sets: &TrainingSets,
    ) -> Result<Self> {
        upstream.require(target)?;
        if sets.interior.is_empty() {
            return Err(invalid("interior training set is empty"));
        }
        let two_d = target.dims() == 2;
        if !two_d && !(sets.gamma.is_empty() && sets.periodic.is_empty()) {
            return Err(invalid(format!("{target} takes no wall or periodic sets")));
        }
        if two_d && sets.periodic.is_empty() {
            return Err(invalid(format!("{target} needs a periodic set")));
        }
        if two_d && (method == Method::Plain) == sets.gamma.is_empty() {
            return Err(invalid(format!(
                "wall set must be given exactly for the plain method, got {} points for {method}",
                sets.gamma.len()
            )));
        }
        let data = Manufactured::new(viscosity);
        let eps = viscosity.eps();
        let mut terms = Vec::new();

        let w_int = 1.0 / sets.interior.len() as f64;
        for &p in &sets.interior {
            let [x, z] = p;
            let (weights, constant) = if two_d {
                let u1 = upstream.u1.expect("checked by require").value(p);
                let constant = match target {
                    Target::U2 => -data.f2(x, z),
                    Target::W3 => -data.dx_f2(x, z),
                    _ => {
                        let w2 = upstream.w2.expect("checked by require").value(p);
                        let w3 = upstream.w3.expect("checked by require").value(p);
                        -w2 * w3 + data.dz_f2(x, z)
                    }
                };
                ([1.0, u1, 0.0, -eps, 0.0, -eps], constant)
            } else {
                let constant = match target {
                    Target::U1 => -data.f1(z),
                    _ => -data.d_z_f1(z),
                };
                ([1.0, 0.0, 0.0, 0.0, 0.0, -eps], constant)
            };
            terms.push(ResidualTerm {
                weight: w_int,
                constant,
                parts: vec![(p, weights, 1.0)],
            });
        }

        if method == Method::Plain {
            match target {
                Target::U1 => {
                    for z in [0.0, 1.0] {
                        terms.push(ResidualTerm {
                            weight: 1.0,
                            constant: 0.0,
                            parts: vec![([0.0, z], VALUE, 1.0)],
                        });
                    }
                }
                Target::W2 => {
                    for z in [0.0, 1.0] {
                        terms.push(ResidualTerm {
                            weight: 1.0,
                            constant: data.f1(z) / eps,
                            parts: vec![([0.0, z], DZ, 1.0)],
                        });
                    }
                }
                _ => {
                    let w = 1.0 / sets.gamma.len() as f64;
                    for &x in &sets.gamma {
                        for z in [0.0, 1.0] {
                            let term = if target == Target::W1 {
                                ResidualTerm {
                                    weight: w,
                                    constant: -data.f2(x, z) / eps,
                                    parts: vec![([x, z], DZ, 1.0)],
                                }
                            } else {
                                ResidualTerm {
                                    weight: w,
                                    constant: 0.0,
                                    parts: vec![([x, z], VALUE, 1.0)],
                                }
                            };
                            terms.push(term);
                        }
                    }
                }
            }
        }

        if two_d {
            let w = 1.0 / sets.periodic.len() as f64;
            for &z in &sets.periodic {
                terms.push(ResidualTerm {
                    weight: w,
                    constant: 0.0,
                    parts: vec![([0.0, z], VALUE, 1.0), ([1.0, z], VALUE, -1.0)],
                });
            }
        }
        Ok(Self {
            target,
            method,
            terms,
        })
    }
}

fn non_finite(context: &str, p: Point, value: f64) -> Error {
    Error::NonFinite {
        context: context.to_string(),
        x: p[0],
        z: p[1],
        value,
    }
}

/// Loss of an arbitrary prediction, evaluated point by point.
pub fn field_loss(prediction: &dyn Field, spec: &LossSpec) -> Result<f64> {
    let mut total = 0.0;
    for term in &spec.terms {
        let mut r = term.constant;
        for (p, weights, mult) in &term.parts {
            let order = weights
                .iter()
                .rposition(|&w| w != 0.0)
                .map_or(0, |i| MULTI_INDICES[i].0 + MULTI_INDICES[i].1);
            let jet = prediction.jet(*p, order);
            for (i, &(dx, dz)) in MULTI_INDICES[..ORDER2_LEN].iter().enumerate() {
                if weights[i] != 0.0 {
                    r += mult * weights[i] * jet.d(dx, dz);
                }
            }
        }
        if !r.is_finite() {
            return Err(non_finite(&format!("{} residual", spec.target), term.location(), r));
        }
        total += term.weight * r * r;
    }
    Ok(total)
}

struct UniqueProbe {
    slot: usize,
    point: Point,
    order: usize,
}

struct CompiledTerm {
    weight: f64,
    constant: f64,
    entries: Vec<(usize, [f64; JET_LEN])>,
}

/// A loss whose residuals are precompiled into network probes.
pub struct CompiledLoss {
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    n_params: usize,
    probes: Vec<UniqueProbe>,
    terms: Vec<CompiledTerm>,
    locations: Vec<Point>,
    target: Target,
    scratch: RefCell<Vec<[f64; 5]>>,
}

fn coeff_order(c: &[f64; JET_LEN]) -> usize {
    c.iter()
        .rposition(|&v| v != 0.0)
        .map_or(0, |i| MULTI_INDICES[i].0 + MULTI_INDICES[i].1)
}

impl CompiledLoss {
    pub fn new(ansatz: &Ansatz, spec: &LossSpec) -> Result<Self> {
        if ansatz.target() != spec.target || ansatz.method() != spec.method {
            return Err(invalid(format!(
                "loss for {} {} does not match ansatz {} {}",
                spec.method,
                spec.target,
                ansatz.method(),
                ansatz.target()
            )));
        }
        let mut index: HashMap<(usize, u64, u64), usize> = HashMap::new();
        let mut probes: Vec<UniqueProbe> = Vec::new();
        let mut terms = Vec::with_capacity(spec.terms.len());
        let mut locations = Vec::with_capacity(spec.terms.len());
        for term in &spec.terms {
            let mut form = AffineForm::default();
            for (p, weights, mult) in &term.parts {
                ansatz.add_linear_form(*p, weights, *mult, &mut form);
            }
            let entries = form
                .probes
                .iter()
                .map(|pr| {
                    let key = (pr.slot, pr.point[0].to_bits(), pr.point[1].to_bits());
                    let order = coeff_order(&pr.coeffs);
                    let u = *index.entry(key).or_insert_with(|| {
                        probes.push(UniqueProbe {
                            slot: pr.slot,
                            point: pr.point,
                            order,
                        });
                        probes.len() - 1
                    });
                    probes[u].order = probes[u].order.max(order);
                    (u, pr.coeffs)
                })
                .collect();
            terms.push(CompiledTerm {
                weight: term.weight,
                constant: term.constant + form.constant,
                entries,
            });
            locations.push(term.location());
        }
        let shapes = ansatz.shapes();
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut n_params = 0;
        for net in ansatz.nets() {
            offsets.push(n_params);
            n_params += net.parameter_count();
        }
        Ok(Self {
            shapes,
            offsets,
            n_params,
            probes,
            terms,
            locations,
            target: spec.target,
            scratch: RefCell::new(Vec::new()),
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.n_params
    }

    /// Number of distinct network evaluations per loss evaluation.
    pub fn probe_count(&self) -> usize {
        self.probes.len()
    }

    fn nets(&self, params: &[f64]) -> Result<Vec<ShallowNet>> {
        if params.len() != self.n_params {
            return Err(invalid(format!(
                "expected {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        self.shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(n_in, h), &off)| {
                let n = crate::net::parameter_count(n_in, h);
                ShallowNet::from_params(n_in, h, &params[off..off + n])
            })
            .collect()
    }

    /// Network partials at every probe, keeping the activations for a backward pass.
    fn forward(&self, kernels: &[Kernel<'_>], act: &mut Vec<[f64; 5]>) -> Vec<f64> {
        let h_max = kernels.iter().map(|k| k.n_hidden()).max().unwrap_or(0);
        act.resize(self.probes.len() * h_max, [0.0; 5]);
        let jets: Vec<[f64; JET_LEN]> = self
            .probes
            .iter()
            .enumerate()
            .map(|(i, u)| kernels[u.slot].forward(u.point, u.order, &mut act[i * h_max..(i + 1) * h_max]))
            .collect();
        self.terms
            .iter()
            .map(|t| {
                t.constant
                    + t.entries
                        .iter()
                        .map(|(u, c)| c.iter().zip(&jets[*u]).map(|(a, b)| a * b).sum::<f64>())
                        .sum::<f64>()
            })
            .collect()
    }

    fn total(&self, residuals: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (k, (t, r)) in self.terms.iter().zip(residuals).enumerate() {
            if !r.is_finite() {
                return Err(non_finite(
                    &format!("{} residual", self.target),
                    self.locations[k],
                    *r,
                ));
            }
            total += t.weight * r * r;
        }
        Ok(total)
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        let nets = self.nets(params)?;
        let kernels: Vec<Kernel<'_>> = nets.iter().map(Kernel::new).collect();
        let mut act = self.scratch.borrow_mut();
        let residuals = self.forward(&kernels, &mut act);
        self.total(&residuals)
    }

    /// Loss value, with its gradient written into `grad`.
    pub fn value_and_gradient(&self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        if grad.len() != self.n_params {
            return Err(invalid("gradient buffer has the wrong length"));
        }
        let nets = self.nets(params)?;
        let kernels: Vec<Kernel<'_>> = nets.iter().map(Kernel::new).collect();
        let mut act = self.scratch.borrow_mut();
        let residuals = self.forward(&kernels, &mut act);
        let total = self.total(&residuals)?;
        let mut adjoint = vec![[0.0; JET_LEN]; self.probes.len()];
        for (t, r) in self.terms.iter().zip(&residuals) {
            let s = 2.0 * t.weight * r;
            for (u, c) in &t.entries {
                for (a, b) in adjoint[*u].iter_mut().zip(c) {
                    *a += s * b;
                }
            }
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let h_max = act.len() / self.probes.len().max(1);
        for (i, (u, coeffs)) in self.probes.iter().zip(&adjoint).enumerate() {
            let off = self.offsets[u.slot];
            let n = nets[u.slot].parameter_count();
            kernels[u.slot].backward(u.point, &act[i * h_max..(i + 1) * h_max], coeffs, &mut grad[off..off + n]);
        }
        Ok(total)
    }
}

/// Loss of `ansatz` with its current parameters.
pub fn loss_value(ansatz: &Ansatz, upstream: &Upstream<'_>, sets: &TrainingSets) -> Result<f64> {
    let spec = LossSpec::new(ansatz.target(), ansatz.method(), ansatz.viscosity(), upstream, sets)?;
    CompiledLoss::new(ansatz, &spec)?.value(ansatz.params().as_slice())
}

/// Gradient of [`loss_value`] with respect to every trainable parameter of `ansatz`.
pub fn loss_gradient(
    ansatz: &Ansatz,
    upstream: &Upstream<'_>,
    sets: &TrainingSets,
) -> Result<crate::net::ParamVector> {
    let spec = LossSpec::new(ansatz.target(), ansatz.method(), ansatz.viscosity(), upstream, sets)?;
    let loss = CompiledLoss::new(ansatz, &spec)?;
    let mut grad = vec![0.0; loss.parameter_count()];
    loss.value_and_gradient(ansatz.params().as_slice(), &mut grad)?;
    Ok(crate::net::ParamVector(grad))
}
