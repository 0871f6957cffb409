//! Predicted-solution structures for plain and singular-layer networks.
//!
//! A singular-layer prediction is the main network plus boundary-layer terms. Each term
//! is a network quantity multiplied by an envelope `s · q^p · e^{-q/√ε}` with `q = z`
//! (left wall) or `q = 1 - z` (right wall):
//!
//! | target | layer terms per wall |
//! |--------|----------------------|
//! | u1     | `-û(wall) e^{-q/√ε}` |
//! | u2, w3 | `-û(x, wall) e^{-q/√ε} + q e^{-q/√ε} φ̂(x, z)` |
//! | w2     | `±(f1(wall) + ε ω̂'(wall)) ε^{-1/2} e^{-q/√ε}` |
//! | w1     | `∓(f2(x, wall) - ε ∂z ω̂(x, wall)) ε^{-1/2} e^{-q/√ε} + q² e^{-q/√ε} ψ̂(x, z)` |
//!
//! The corrector networks `φ̂`, `ψ̂` take raw `(x, z)` inputs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{Field, Method, Target};
use crate::net::{init_net, jet_index, Jet, ParamVector, Point, ShallowNet, JET_LEN, MULTI_INDICES};
use crate::problem::{FlowData, Manufactured, Viscosity};

/// Seed offsets of the left and right corrector networks.
pub const CORRECTOR_SEED_OFFSETS: [u64; 2] = [1000, 2000];

/// Number of multi-indices of total order at most 2.
pub const ORDER2_LEN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn wall(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }

    /// Distance from this side's wall.
    pub fn distance(self, z: f64) -> f64 {
        match self {
            Side::Left => z,
            Side::Right => 1.0 - z,
        }
    }
}

/// `s · q^power · e^{-q/√ε}` with `s = ε^{-1/2}` when `scaled`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub side: Side,
    pub power: u32,
    pub scaled: bool,
}

impl Envelope {
    pub fn new(side: Side, power: u32, scaled: bool) -> Self {
        Self { side, power, scaled }
    }

    /// The envelope and its first two `z` derivatives.
    pub fn derivs(&self, v: Viscosity, z: f64) -> [f64; 3] {
        let delta = v.sqrt_eps();
        let q = self.side.distance(z);
        let e = (-q / delta).exp();
        if e == 0.0 {
            return [0.0; 3];
        }
        let s = if self.scaled { 1.0 / delta } else { 1.0 };
        let p = self.power as i32;
        // Derivatives of q^p.
        let mono = |k: i32| -> f64 {
            if k > p {
                0.0
            } else {
                let falling: f64 = (0..k).map(|i| (p - i) as f64).product();
                falling * q.powi(p - k)
            }
        };
        let r = -1.0 / delta;
        let h0 = mono(0);
        let h1 = mono(1) + r * mono(0);
        let h2 = mono(2) + 2.0 * r * mono(1) + r * r * mono(0);
        let sign = match self.side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        };
        [s * e * h0, s * e * sign * h1, s * e * h2]
    }
}

/// One additive term of a prediction, in terms of a network slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `N(x, z)`.
    Direct { slot: usize },
    /// `scale · ∂z^dz N(x, wall) · S(z)`.
    Trace {
        slot: usize,
        side: Side,
        dz: usize,
        scale: f64,
        envelope: Envelope,
    },
    /// `S(z) · N(x, z)`.
    Modulated { slot: usize, envelope: Envelope },
}

fn pieces_for(target: Target, method: Method, v: Viscosity) -> Vec<Piece> {
    let mut out = vec![Piece::Direct { slot: 0 }];
    if method == Method::Plain {
        return out;
    }
    let eps = v.eps();
    for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
        let sign = if side == Side::Left { 1.0 } else { -1.0 };
        let corrector = k + 1;
        match target {
            Target::U1 => out.push(Piece::Trace {
                slot: 0,
                side,
                dz: 0,
                scale: -1.0,
                envelope: Envelope::new(side, 0, false),
            }),
            Target::U2 | Target::W3 => {
                out.push(Piece::Trace {
                    slot: 0,
                    side,
                    dz: 0,
                    scale: -1.0,
                    envelope: Envelope::new(side, 0, false),
                });
                out.push(Piece::Modulated {
                    slot: corrector,
                    envelope: Envelope::new(side, 1, false),
                });
            }
            Target::W2 => out.push(Piece::Trace {
                slot: 0,
                side,
                dz: 1,
                scale: sign * eps,
                envelope: Envelope::new(side, 0, true),
            }),
            Target::W1 => {
                out.push(Piece::Trace {
                    slot: 0,
                    side,
                    dz: 1,
                    scale: sign * eps,
                    envelope: Envelope::new(side, 0, true),
                });
                out.push(Piece::Modulated {
                    slot: corrector,
                    envelope: Envelope::new(side, 2, false),
                });
            }
        }
    }
    out
}

/// Number of trainable networks: the main one plus any correctors.
pub fn net_count(target: Target, method: Method) -> usize {
    match (method, target) {
        (Method::SingularLayer, Target::U2 | Target::W3 | Target::W1) => 3,
        _ => 1,
    }
}

/// `(n_in, n_hidden)` of every trainable network.
pub fn net_shapes(target: Target, method: Method, n_hidden: usize) -> Vec<(usize, usize)> {
    (0..net_count(target, method))
        .map(|k| (if k == 0 { target.dims() } else { 2 }, n_hidden))
        .collect()
}

/// `Σ_α c_α ∂^α N(point)` for the network in `slot`.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub slot: usize,
    pub point: Point,
    pub coeffs: [f64; JET_LEN],
}

/// A quantity that is affine in the network outputs: `constant + Σ probes`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineForm {
    pub constant: f64,
    pub probes: Vec<Probe>,
}

impl AffineForm {
    fn probe_mut(&mut self, slot: usize, point: Point) -> &mut [f64; JET_LEN] {
        let pos = self
            .probes
            .iter()
            .position(|p| p.slot == slot && p.point == point);
        let idx = match pos {
            Some(i) => i,
            None => {
                self.probes.push(Probe {
                    slot,
                    point,
                    coeffs: [0.0; JET_LEN],
                });
                self.probes.len() - 1
            }
        };
        &mut self.probes[idx].coeffs
    }

    /// Evaluates the form with the given networks.
    pub fn eval(&self, nets: &[ShallowNet]) -> f64 {
        self.constant
            + self
                .probes
                .iter()
                .map(|p| nets[p.slot].probe_value(p.point, &p.coeffs))
                .sum::<f64>()
    }
}

/// Prediction of one target by one method at one viscosity.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    target: Target,
    method: Method,
    problem: Manufactured,
    nets: Vec<ShallowNet>,
    pieces: Vec<Piece>,
}

impl Ansatz {
    /// Fresh networks: main from `seed`, correctors from the documented offsets.
    pub fn init(target: Target, method: Method, viscosity: Viscosity, n_hidden: usize, seed: u64) -> Result<Self> {
        let nets = net_shapes(target, method, n_hidden)
            .into_iter()
            .enumerate()
            .map(|(k, (n_in, h))| {
                let s = if k == 0 {
                    seed
                } else {
                    seed.wrapping_add(CORRECTOR_SEED_OFFSETS[k - 1])
                };
                init_net(n_in, h, s)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_nets(target, method, viscosity, nets)
    }

    pub fn from_nets(target: Target, method: Method, viscosity: Viscosity, nets: Vec<ShallowNet>) -> Result<Self> {
        let expected = net_count(target, method);
        if nets.len() != expected {
            return Err(invalid(format!(
                "{method} {target} needs {expected} networks, got {}",
                nets.len()
            )));
        }
        for (k, net) in nets.iter().enumerate() {
            let n_in = if k == 0 { target.dims() } else { 2 };
            if net.n_in() != n_in {
                return Err(invalid(format!(
                    "network {k} of {method} {target} must take {n_in} inputs"
                )));
            }
        }
        Ok(Self {
            target,
            method,
            problem: Manufactured::new(viscosity),
            nets,
            pieces: pieces_for(target, method, viscosity),
        })
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn viscosity(&self) -> Viscosity {
        self.problem.viscosity
    }

    pub fn nets(&self) -> &[ShallowNet] {
        &self.nets
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.nets.iter().map(|n| (n.n_in(), n.n_hidden())).collect()
    }

    pub fn params(&self) -> ParamVector {
        ParamVector::flatten(&self.nets.iter().collect::<Vec<_>>())
    }

    /// Same structure with new trainable parameters.
    pub fn with_params(&self, params: &ParamVector) -> Result<Self> {
        let nets = params.unflatten(&self.shapes())?;
        Ok(Self {
            nets,
            ..self.clone()
        })
    }

    /// Overwrites the trainable parameters in place.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let total: usize = self.nets.iter().map(|n| n.parameter_count()).sum();
        if params.len() != total {
            return Err(invalid(format!(
                "expected {total} parameters, got {}",
                params.len()
            )));
        }
        let mut offset = 0;
        for net in &mut self.nets {
            let n = net.parameter_count();
            net.load_params(&params[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    fn max_dx(&self, order: usize) -> usize {
        if self.target.dims() == 2 {
            order
        } else {
            0
        }
    }

    /// Parameter-independent part of the prediction: the forcing anchors of w2 and w1.
    fn constant_jet(&self, p: Point, order: usize) -> [f64; ORDER2_LEN] {
        let mut out = [0.0; ORDER2_LEN];
        if self.method == Method::Plain {
            return out;
        }
        let v = self.viscosity();
        let [x, z] = p;
        for side in [Side::Left, Side::Right] {
            let sign = if side == Side::Left { 1.0 } else { -1.0 };
            let env = Envelope::new(side, 0, true).derivs(v, z);
            if env == [0.0; 3] {
                continue;
            }
            let w = side.wall();
            let data: [f64; 3] = match self.target {
                Target::W2 => [sign * self.problem.f1(w), 0.0, 0.0],
                Target::W1 => [
                    -sign * self.problem.f2(x, w),
                    -sign * self.problem.dx_f2(x, w),
                    -sign * self.problem.dxx_f2(x, w),
                ],
                _ => continue,
            };
            for (i, &(dx, dz)) in MULTI_INDICES.iter().enumerate().take(ORDER2_LEN) {
                if dx + dz <= order && dx <= self.max_dx(order) {
                    out[i] += data[dx] * env[dz];
                }
            }
        }
        out
    }

    /// The prediction and its partials up to `order` (at most 2).
    pub fn predict(&self, p: Point, order: usize) -> Result<Jet> {
        if order > 2 {
            return Err(invalid(format!("prediction order {order} exceeds 2")));
        }
        Ok(self.predict_unchecked(p, order))
    }

    fn predict_unchecked(&self, p: Point, order: usize) -> Jet {
        let v = self.viscosity();
        let dims = self.target.dims();
        let max_dx = self.max_dx(order);
        let mut acc = self.constant_jet(p, order);
        let betas = || {
            MULTI_INDICES[..ORDER2_LEN]
                .iter()
                .enumerate()
                .filter(move |(_, &(dx, dz))| dx + dz <= order && dx <= max_dx)
        };
        for piece in &self.pieces {
            match *piece {
                Piece::Direct { slot } => {
                    let jet = self.nets[slot].jet_unchecked(p, order);
                    for (i, &(dx, dz)) in betas() {
                        acc[i] += jet.d(dx, dz);
                    }
                }
                Piece::Trace {
                    slot,
                    side,
                    dz: k,
                    scale,
                    envelope,
                } => {
                    let env = envelope.derivs(v, p[1]);
                    if env == [0.0; 3] {
                        continue;
                    }
                    let jet = self.nets[slot].jet_unchecked([p[0], side.wall()], order + k);
                    for (i, &(dx, dz)) in betas() {
                        acc[i] += scale * env[dz] * jet.d(dx, k);
                    }
                }
                Piece::Modulated { slot, envelope } => {
                    let env = envelope.derivs(v, p[1]);
                    if env == [0.0; 3] {
                        continue;
                    }
                    let jet = self.nets[slot].jet_unchecked(p, order);
                    for (i, &(dx, dz)) in betas() {
                        acc[i] += (0..=dz)
                            .map(|l| binomial(dz, l) * env[dz - l] * jet.d(dx, l))
                            .sum::<f64>();
                    }
                }
            }
        }
        let mut d = [0.0; JET_LEN];
        d[..ORDER2_LEN].copy_from_slice(&acc);
        Jet::from_raw(dims, order, d)
    }

    /// Adds `mult · Σ_β weights[β] ∂^β P(p)` to `form`, with `β` indexed like the jet.
    ///
    /// Weights on partials the target does not carry must be zero.
    pub fn add_linear_form(&self, p: Point, weights: &[f64; ORDER2_LEN], mult: f64, form: &mut AffineForm) {
        let v = self.viscosity();
        let order = weights
            .iter()
            .rposition(|&w| w != 0.0)
            .map_or(0, |i| MULTI_INDICES[i].0 + MULTI_INDICES[i].1);
        let max_dx = self.max_dx(order);
        let constant = self.constant_jet(p, order);
        form.constant += mult * weights.iter().zip(&constant).map(|(w, c)| w * c).sum::<f64>();
        let betas: Vec<(usize, usize, f64)> = MULTI_INDICES[..ORDER2_LEN]
            .iter()
            .enumerate()
            .filter(|&(i, &(dx, _))| weights[i] != 0.0 && dx <= max_dx)
            .map(|(i, &(dx, dz))| (dx, dz, mult * weights[i]))
            .collect();
        for piece in &self.pieces {
            match *piece {
                Piece::Direct { slot } => {
                    let c = form.probe_mut(slot, p);
                    for &(dx, dz, w) in &betas {
                        c[jet_index(dx, dz)] += w;
                    }
                }
                Piece::Trace {
                    slot,
                    side,
                    dz: k,
                    scale,
                    envelope,
                } => {
                    let env = envelope.derivs(v, p[1]);
                    if env == [0.0; 3] {
                        continue;
                    }
                    let c = form.probe_mut(slot, [p[0], side.wall()]);
                    for &(dx, dz, w) in &betas {
                        c[jet_index(dx, k)] += w * scale * env[dz];
                    }
                }
                Piece::Modulated { slot, envelope } => {
                    let env = envelope.derivs(v, p[1]);
                    if env == [0.0; 3] {
                        continue;
                    }
                    let c = form.probe_mut(slot, p);
                    for &(dx, dz, w) in &betas {
                        for l in 0..=dz {
                            c[jet_index(dx, l)] += w * binomial(dz, l) * env[dz - l];
                        }
                    }
                }
            }
        }
        form.probes
            .retain(|pr| pr.coeffs.iter().any(|&c| c != 0.0));
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    match (n, k) {
        (_, 0) => 1.0,
        (n, k) if k == n => 1.0,
        (2, 1) => 2.0,
        _ => unreachable!("binomial only needed up to n = 2"),
    }
}

impl Field for Ansatz {
    fn dims(&self) -> usize {
        self.target.dims()
    }

    fn jet(&self, p: Point, order: usize) -> Jet {
        self.predict_unchecked(p, order.min(2))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    pub(crate) fn random_ansatz(target: Target, method: Method, eps: f64, rng: &mut SplitMix64) -> Ansatz {
        crate::checks::random_ansatz(target, method, Viscosity::new(eps).unwrap(), rng)
    }

    fn zero_nets(target: Target, method: Method, eps: f64) -> Ansatz {
        let v = Viscosity::new(eps).unwrap();
        let nets = net_shapes(target, method, 20)
            .into_iter()
            .map(|(n_in, h)| ShallowNet::from_params(n_in, h, &vec![0.0; crate::net::parameter_count(n_in, h)]).unwrap())
            .collect();
        Ansatz::from_nets(target, method, v, nets).unwrap()
    }

    #[test]
    fn envelope_matches_closed_form() {
        let v = Viscosity::new(1e-2).unwrap();
        let d: f64 = 0.1;
        let z: f64 = 0.03;
        let e = (-z / d).exp();
        let got = Envelope::new(Side::Left, 2, true).derivs(v, z);
        let want = [
            z * z * e / d,
            (2.0 * z - z * z / d) * e / d,
            (2.0 - 4.0 * z / d + z * z / (d * d)) * e / d,
        ];
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() < 1e-12 * want[k].abs().max(1.0));
        }
        let r = Envelope::new(Side::Right, 1, false).derivs(v, 1.0 - z);
        let l = Envelope::new(Side::Left, 1, false).derivs(v, z);
        for k in 0..3 {
            let sign = if k == 1 { -1.0 } else { 1.0 };
            assert!((r[k] - sign * l[k]).abs() < 1e-12 * l[k].abs().max(1.0));
        }
    }

    #[test]
    fn envelope_decays_away_from_its_wall() {
        for eps in [1e-3, 1e-5, 1e-8] {
            let v = Viscosity::new(eps).unwrap();
            let d = v.sqrt_eps();
            for power in 0..=2 {
                for scaled in [false, true] {
                    let env = Envelope::new(Side::Left, power, scaled);
                    let s = if scaled { 1.0 / d } else { 1.0 };
                    let bound = (-10.0f64).exp() * s * (1.0 + 1e-12);
                    for z in [10.0 * d, 0.4, 0.7, 1.0] {
                        assert!(env.derivs(v, z)[0].abs() <= bound);
                        let right = Envelope::new(Side::Right, power, scaled);
                        assert!(right.derivs(v, 1.0 - z)[0].abs() <= bound);
                    }
                }
            }
        }
    }

    #[test]
    fn net_counts_follow_method() {
        assert_eq!(net_shapes(Target::U1, Method::SingularLayer, 20), vec![(1, 20)]);
        assert_eq!(net_shapes(Target::W1, Method::SingularLayer, 20).len(), 3);
        assert_eq!(net_shapes(Target::W1, Method::Plain, 20), vec![(2, 20)]);
        let a = Ansatz::init(Target::U2, Method::SingularLayer, Viscosity::new(1e-3).unwrap(), 20, 7).unwrap();
        assert_eq!(a.params().len(), 3 * 81);
        assert!(Ansatz::from_nets(
            Target::U2,
            Method::Plain,
            Viscosity::new(1e-3).unwrap(),
            vec![init_net(1, 20, 0).unwrap()]
        )
        .is_err());
    }

    #[test]
    fn zero_networks_give_zero_prediction() {
        for target in [Target::U1, Target::U2, Target::W3] {
            let a = zero_nets(target, Method::SingularLayer, 1e-4);
            for p in [[0.2, 0.0], [0.5, 0.003], [0.9, 1.0]] {
                let jet = a.predict(p, 2).unwrap();
                assert!(jet.partials().all(|(_, v)| v == 0.0), "{target}");
            }
        }
        // Only the forcing anchors survive for the vorticity targets.
        let a = zero_nets(Target::W2, Method::SingularLayer, 1e-4);
        let jet = a.predict([0.0, 0.0], 1).unwrap();
        assert!((jet.value() - 100.0).abs() < 1e-9);
        assert!((jet.d(0, 1) + 1e4).abs() < 1e-6);
    }

    #[test]
    fn structural_wall_conditions() {
        let mut rng = SplitMix64::new(11);
        for eps in [1e-3, 1e-4, 1e-6, 1e-8] {
            let v = Viscosity::new(eps).unwrap();
            let est = (-1.0 / v.sqrt_eps()).exp();
            let problem = Manufactured::new(v);
            for _ in 0..100 {
                let x = rng.next_f64();
                let u1 = random_ansatz(Target::U1, Method::SingularLayer, eps, &mut rng);
                let bound = est * (u1.nets()[0].value([0.0, 0.0]).abs() + u1.nets()[0].value([0.0, 1.0]).abs());
                for z in [0.0, 1.0] {
                    assert!(u1.value([x, z]).abs() <= bound + 1e-15);
                }
                for target in [Target::U2, Target::W3] {
                    let a = random_ansatz(target, Method::SingularLayer, eps, &mut rng);
                    let [n, l, r] = a.nets() else { unreachable!() };
                    let bound = est
                        * (n.value([x, 0.0]).abs()
                            + n.value([x, 1.0]).abs()
                            + l.value([x, 1.0]).abs()
                            + r.value([x, 0.0]).abs());
                    for z in [0.0, 1.0] {
                        assert!(a.value([x, z]).abs() <= bound + 1e-15, "{target} {eps}");
                    }
                }
                let w2 = random_ansatz(Target::W2, Method::SingularLayer, eps, &mut rng);
                for z in [0.0, 1.0] {
                    let dz = w2.predict([x, z], 1).unwrap().d(0, 1);
                    let target = -problem.f1(z) / eps;
                    assert!((dz - target).abs() <= 1e-9 * target.abs() + est / eps * 1e3);
                }
                let w1 = random_ansatz(Target::W1, Method::SingularLayer, eps, &mut rng);
                for z in [0.0, 1.0] {
                    let dz = w1.predict([x, z], 1).unwrap().d(0, 1);
                    let target = problem.f2(x, z) / eps;
                    assert!((dz - target).abs() <= 1e-9 * target.abs() + est / eps * 1e3);
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = SplitMix64::new(3);
        for eps in [1e-2, 1e-4] {
            let d = Viscosity::new(eps).unwrap().sqrt_eps();
            for target in Target::ALL {
                for method in Method::BOTH {
                    let a = random_ansatz(target, method, eps, &mut rng);
                    for p in [[0.31, 0.4 * d], [0.77, 0.5], [0.12, 1.0 - 1.5 * d]] {
                        let h = d / 1000.0;
                        let jet = a.predict(p, 2).unwrap();
                        let f = |x: f64, z: f64| a.value([x, z]);
                        let [x, z] = p;
                        let dz = (f(x, z + h) - f(x, z - h)) / (2.0 * h);
                        let dzz = (f(x, z + h) - 2.0 * f(x, z) + f(x, z - h)) / (h * h);
                        let scale = jet.d(0, 2).abs().max(1.0) * 1e-5;
                        assert!((jet.d(0, 1) - dz).abs() <= 1e-5 * jet.d(0, 1).abs().max(1.0), "{target} {method} {eps} {p:?} {} {dz}", jet.d(0, 1));
                        assert!((jet.d(0, 2) - dzz).abs() <= scale * 100.0, "{target} {method} {} {}", jet.d(0, 2), dzz);
                        if target.dims() == 2 {
                            let hx = 1e-4;
                            let dx = (f(x + hx, z) - f(x - hx, z)) / (2.0 * hx);
                            let dxx = (f(x + hx, z) - 2.0 * f(x, z) + f(x - hx, z)) / (hx * hx);
                            let dxz = (f(x + hx, z + h) - f(x + hx, z - h) - f(x - hx, z + h) + f(x - hx, z - h))
                                / (4.0 * hx * h);
                            assert!((jet.d(1, 0) - dx).abs() <= 1e-5 * jet.d(1, 0).abs().max(1.0));
                            assert!((jet.d(2, 0) - dxx).abs() <= 1e-4 * jet.d(2, 0).abs().max(1.0));
                            assert!((jet.d(1, 1) - dxz).abs() <= 1e-4 * jet.d(1, 1).abs().max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn linear_form_reproduces_prediction() {
        let mut rng = SplitMix64::new(5);
        for target in Target::ALL {
            for method in Method::BOTH {
                let a = random_ansatz(target, method, 1e-3, &mut rng);
                for p in [[0.2, 0.0], [0.4, 0.02], [0.9, 0.99], [0.0, 0.5]] {
                    let mut w = [0.0; ORDER2_LEN];
                    for (i, &(dx, _)) in MULTI_INDICES[..ORDER2_LEN].iter().enumerate() {
                        if target.dims() == 2 || dx == 0 {
                            w[i] = rng.uniform(-1.0, 1.0);
                        }
                    }
                    let mut form = AffineForm::default();
                    a.add_linear_form(p, &w, 1.0, &mut form);
                    let jet = a.predict(p, 2).unwrap();
                    let want: f64 = MULTI_INDICES[..ORDER2_LEN]
                        .iter()
                        .enumerate()
                        .map(|(i, &(dx, dz))| w[i] * jet.d(dx, dz))
                        .sum();
                    let got = form.eval(a.nets());
                    assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "{target} {method}");
                }
            }
        }
    }

    #[test]
    fn params_round_trip() {
        let a = Ansatz::init(Target::W1, Method::SingularLayer, Viscosity::new(1e-5).unwrap(), 20, 1).unwrap();
        let p = a.params();
        let b = a.with_params(&p).unwrap();
        assert_eq!(a, b);
        let mut c = a.clone();
        let shifted: Vec<f64> = p.0.iter().map(|v| v + 1.0).collect();
        c.set_params(&shifted).unwrap();
        assert_eq!(c.params().0, shifted);
        assert!(c.set_params(&shifted[1..]).is_err());
    }
}
