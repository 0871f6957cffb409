//! One-hidden-layer tanh networks with closed-form input derivatives.
//!
//! Every network sees points of the `(x, z)` plane. A one-input network reads
//! only `z` and is constant in `x`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SplitMix64;

/// A point `(x, z)` of the channel cross-section.
pub type Point = [f64; 2];

/// Highest input-derivative order a [`Jet`] can carry.
pub const MAX_ORDER: usize = 3;

/// Number of multi-indices `(dx, dz)` with `dx + dz <= MAX_ORDER`.
pub const JET_LEN: usize = 10;

/// Multi-indices in storage order: by total order, then by increasing `dz`.
pub const MULTI_INDICES: [(usize, usize); JET_LEN] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// Storage slot of the multi-index `(dx, dz)`.
#[inline]
pub const fn jet_index(dx: usize, dz: usize) -> usize {
    let n = dx + dz;
    n * (n + 1) / 2 + dz
}

/// A scalar value with its partial derivatives in `(x, z)` up to some order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    n_in: usize,
    order: usize,
    d: [f64; JET_LEN],
}

impl Jet {
    pub fn zero(n_in: usize, order: usize) -> Self {
        debug_assert!(order <= MAX_ORDER);
        Self {
            n_in,
            order,
            d: [0.0; JET_LEN],
        }
    }

    pub(crate) fn from_raw(n_in: usize, order: usize, d: [f64; JET_LEN]) -> Self {
        Self { n_in, order, d }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// Partial `∂x^dx ∂z^dz`, if this jet carries it.
    ///
    /// One-input jets only carry pure `z` derivatives.
    pub fn partial(&self, dx: usize, dz: usize) -> Option<f64> {
        if dx + dz > self.order || (self.n_in == 1 && dx > 0) {
            None
        } else {
            Some(self.d[jet_index(dx, dz)])
        }
    }

    /// Partial in the `(x, z)` plane: zero for `x` derivatives of a one-input jet.
    ///
    /// Panics if `dx + dz` exceeds the jet's order.
    pub fn d(&self, dx: usize, dz: usize) -> f64 {
        assert!(
            dx + dz <= self.order,
            "partial ({dx},{dz}) beyond jet order {}",
            self.order
        );
        self.d[jet_index(dx, dz)]
    }

    pub(crate) fn d_mut(&mut self, dx: usize, dz: usize) -> &mut f64 {
        &mut self.d[jet_index(dx, dz)]
    }

    /// Iterates over `((dx, dz), value)` for every partial the jet carries.
    pub fn partials(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        MULTI_INDICES
            .iter()
            .copied()
            .filter(move |&(dx, dz)| self.partial(dx, dz).is_some())
            .map(move |(dx, dz)| ((dx, dz), self.d[jet_index(dx, dz)]))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = *self;
        out.d.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn raw(&self) -> &[f64; JET_LEN] {
        &self.d
    }
}

/// `tanh` and its first four derivatives at `a`.
#[inline]
pub fn tanh_derivatives(a: f64) -> [f64; 5] {
    let t = fast_tanh(a);
    let s = 1.0 - t * t;
    let t2 = t * t;
    [
        t,
        s,
        -2.0 * t * s,
        s * (6.0 * t2 - 2.0),
        8.0 * t * s * (2.0 - 3.0 * t2),
    ]
}

/// Scalar network `N(p) = Σ_j w2_j tanh(w1_j · p + b1_j) + b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowNet {
    n_in: usize,
    n_hidden: usize,
    /// `n_hidden × n_in`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

pub fn parameter_count(n_in: usize, n_hidden: usize) -> usize {
    n_hidden * (n_in + 2) + 1
}

fn check_shape(n_in: usize, n_hidden: usize) -> Result<()> {
    if !(1..=2).contains(&n_in) {
        return Err(invalid(format!("input dimension must be 1 or 2, got {n_in}")));
    }
    if n_hidden == 0 {
        return Err(invalid("hidden width must be at least 1"));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn init_net(n_in: usize, n_hidden: usize, seed: u64) -> Result<ShallowNet> {
    check_shape(n_in, n_hidden)?;
    let mut rng = SplitMix64::new(seed);
    let lim1 = (6.0 / (n_in + n_hidden) as f64).sqrt();
    let lim2 = (6.0 / (n_hidden + 1) as f64).sqrt();
    let w1 = (0..n_hidden * n_in)
        .map(|_| rng.uniform(-lim1, lim1))
        .collect();
    let w2 = (0..n_hidden).map(|_| rng.uniform(-lim2, lim2)).collect();
    Ok(ShallowNet {
        n_in,
        n_hidden,
        w1,
        b1: vec![0.0; n_hidden],
        w2,
        b2: 0.0,
    })
}

impl ShallowNet {
    pub fn from_parts(
        n_in: usize,
        n_hidden: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    ) -> Result<Self> {
        check_shape(n_in, n_hidden)?;
        if w1.len() != n_hidden * n_in || b1.len() != n_hidden || w2.len() != n_hidden {
            return Err(invalid("parameter block lengths do not match the shape"));
        }
        let net = Self {
            n_in,
            n_hidden,
            w1,
            b1,
            w2,
            b2,
        };
        if !net.params().iter().all(|v| v.is_finite()) {
            return Err(invalid("network parameters must be finite"));
        }
        Ok(net)
    }

    /// Rebuilds a network from its flattened parameters.
    pub fn from_params(n_in: usize, n_hidden: usize, params: &[f64]) -> Result<Self> {
        check_shape(n_in, n_hidden)?;
        if params.len() != parameter_count(n_in, n_hidden) {
            return Err(invalid(format!(
                "expected {} parameters, got {}",
                parameter_count(n_in, n_hidden),
                params.len()
            )));
        }
        let (w1, rest) = params.split_at(n_hidden * n_in);
        let (b1, rest) = rest.split_at(n_hidden);
        let (w2, rest) = rest.split_at(n_hidden);
        Self::from_parts(n_in, n_hidden, w1.to_vec(), b1.to_vec(), w2.to_vec(), rest[0])
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn parameter_count(&self) -> usize {
        parameter_count(self.n_in, self.n_hidden)
    }

    /// Flattened parameters: `w1` row-major, then `b1`, `w2`, `b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        self.write_params(&mut out);
        out
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
    }

    /// Overwrites the parameters in place from a flattened slice of the right length.
    pub(crate) fn load_params(&mut self, params: &[f64]) {
        debug_assert_eq!(params.len(), self.parameter_count());
        let h = self.n_hidden;
        let k = h * self.n_in;
        self.w1.copy_from_slice(&params[..k]);
        self.b1.copy_from_slice(&params[k..k + h]);
        self.w2.copy_from_slice(&params[k + h..k + 2 * h]);
        self.b2 = params[k + 2 * h];
    }

    /// Multiplies the output layer by `c`.
    pub fn scale_output(&mut self, c: f64) {
        self.w2.iter_mut().for_each(|v| *v *= c);
        self.b2 *= c;
    }

    #[inline]
    fn weights(&self, j: usize) -> (f64, f64) {
        if self.n_in == 1 {
            (0.0, self.w1[j])
        } else {
            (self.w1[2 * j], self.w1[2 * j + 1])
        }
    }

    #[inline]
    fn preactivation(&self, j: usize, p: Point) -> f64 {
        let (wx, wz) = self.weights(j);
        if self.n_in == 1 {
            wz * p[1] + self.b1[j]
        } else {
            wx * p[0] + wz * p[1] + self.b1[j]
        }
    }

    /// Output value only.
    pub fn value(&self, p: Point) -> f64 {
        (0..self.n_hidden)
            .map(|j| self.w2[j] * self.preactivation(j, p).tanh())
            .sum::<f64>()
            + self.b2
    }

    /// Value and all input partials up to `order` (at most 3).
    pub fn eval_jet(&self, p: Point, order: usize) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(invalid(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        Ok(self.jet_unchecked(p, order))
    }

    pub(crate) fn jet_unchecked(&self, p: Point, order: usize) -> Jet {
        let mut d = [0.0; JET_LEN];
        let count = (order + 1) * (order + 2) / 2;
        for j in 0..self.n_hidden {
            let tk = tanh_derivatives(self.preactivation(j, p));
            let (wx, wz) = self.weights(j);
            let px = powers(wx);
            let pz = powers(wz);
            let v = self.w2[j];
            for (slot, &(dx, dz)) in MULTI_INDICES[..count].iter().enumerate() {
                if self.n_in == 1 && dx > 0 {
                    continue;
                }
                d[slot] += v * tk[dx + dz] * px[dx] * pz[dz];
            }
        }
        d[0] += self.b2;
        Jet::from_raw(self.n_in, order, d)
    }

    /// `Σ_α c_α ∂^α N(p)` for a coefficient vector over [`MULTI_INDICES`].
    pub fn probe_value(&self, p: Point, coeffs: &[f64; JET_LEN]) -> f64 {
        let top = top_order(coeffs);
        let mut acc = 0.0;
        for j in 0..self.n_hidden {
            let tk = tanh_derivatives(self.preactivation(j, p));
            let (wx, wz) = self.weights(j);
            let px = powers(wx);
            let pz = powers(wz);
            let mut g = 0.0;
            for (slot, &(dx, dz)) in MULTI_INDICES[..top].iter().enumerate() {
                let c = coeffs[slot];
                if c != 0.0 {
                    g += c * tk[dx + dz] * px[dx] * pz[dz];
                }
            }
            acc += self.w2[j] * g;
        }
        acc + coeffs[0] * self.b2
    }

    /// Adds `scale · ∇θ (Σ_α c_α ∂^α N(p))` to `grad` (laid out like [`Self::params`]).
    pub fn probe_gradient(&self, p: Point, coeffs: &[f64; JET_LEN], scale: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.parameter_count());
        let h = self.n_hidden;
        let n_in = self.n_in;
        let top = top_order(coeffs);
        let (gw1, rest) = grad.split_at_mut(h * n_in);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        for j in 0..h {
            let tk = tanh_derivatives(self.preactivation(j, p));
            let (wx, wz) = self.weights(j);
            let px = powers(wx);
            let pz = powers(wz);
            // g: d/dw2, hh: d/db1 (before w2), kx/kz: monomial derivatives.
            let (mut g, mut hh, mut kx, mut kz) = (0.0, 0.0, 0.0, 0.0);
            for (slot, &(dx, dz)) in MULTI_INDICES[..top].iter().enumerate() {
                let c = coeffs[slot];
                if c == 0.0 {
                    continue;
                }
                let n = dx + dz;
                let m = px[dx] * pz[dz];
                g += c * tk[n] * m;
                hh += c * tk[n + 1] * m;
                if dx > 0 {
                    kx += c * tk[n] * dx as f64 * px[dx - 1] * pz[dz];
                }
                if dz > 0 {
                    kz += c * tk[n] * dz as f64 * px[dx] * pz[dz - 1];
                }
            }
            let v = self.w2[j] * scale;
            gw2[j] += scale * g;
            gb1[j] += v * hh;
            if n_in == 1 {
                gw1[j] += v * (hh * p[1] + kz);
            } else {
                gw1[2 * j] += v * (hh * p[0] + kx);
                gw1[2 * j + 1] += v * (hh * p[1] + kz);
            }
        }
        gb2[0] += scale * coeffs[0];
    }
}

/// Per-evaluation cache of hidden-unit monomials for repeated probes of one network.
pub(crate) struct Kernel<'a> {
    net: &'a ShallowNet,
    /// `wx^dx wz^dz` per hidden unit and multi-index (zero for `x` partials of one-input nets).
    mono: Vec<[f64; JET_LEN]>,
    /// `dx wx^(dx-1) wz^dz` and `dz wx^dx wz^(dz-1)`.
    dmono: Vec<([f64; JET_LEN], [f64; JET_LEN])>,
}

impl<'a> Kernel<'a> {
    pub(crate) fn new(net: &'a ShallowNet) -> Self {
        let mut mono = Vec::with_capacity(net.n_hidden);
        let mut dmono = Vec::with_capacity(net.n_hidden);
        for j in 0..net.n_hidden {
            let (wx, wz) = net.weights(j);
            let px = powers(wx);
            let pz = powers(wz);
            let mut m = [0.0; JET_LEN];
            let mut mx = [0.0; JET_LEN];
            let mut mz = [0.0; JET_LEN];
            for (slot, &(dx, dz)) in MULTI_INDICES.iter().enumerate() {
                if net.n_in == 1 && dx > 0 {
                    continue;
                }
                m[slot] = px[dx] * pz[dz];
                if dx > 0 {
                    mx[slot] = dx as f64 * px[dx - 1] * pz[dz];
                }
                if dz > 0 {
                    mz[slot] = dz as f64 * px[dx] * pz[dz - 1];
                }
            }
            mono.push(m);
            dmono.push((mx, mz));
        }
        Self { net, mono, dmono }
    }

    pub(crate) fn n_hidden(&self) -> usize {
        self.net.n_hidden
    }

    /// Partials up to `order` at `p`; tanh derivatives are stored in `act` (one row per hidden unit).
    pub(crate) fn forward(&self, p: Point, order: usize, act: &mut [[f64; 5]]) -> [f64; JET_LEN] {
        let count = (order + 1) * (order + 2) / 2;
        let mut d = [0.0; JET_LEN];
        for (j, slot_act) in act.iter_mut().enumerate().take(self.net.n_hidden) {
            let tk = tanh_derivatives(self.net.preactivation(j, p));
            *slot_act = tk;
            let v = self.net.w2[j];
            let m = &self.mono[j];
            for slot in 0..count {
                d[slot] += v * tk[ORDER_OF[slot]] * m[slot];
            }
        }
        d[0] += self.net.b2;
        d
    }

    /// Adds `∇θ Σ_α c_α ∂^α N(p)` to `grad`, reusing the activations from [`Self::forward`].
    pub(crate) fn backward(&self, p: Point, act: &[[f64; 5]], coeffs: &[f64; JET_LEN], grad: &mut [f64]) {
        let net = self.net;
        let h = net.n_hidden;
        let top = top_order(coeffs);
        let (gw1, rest) = grad.split_at_mut(h * net.n_in);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        for j in 0..h {
            let tk = &act[j];
            let m = &self.mono[j];
            let (mx, mz) = &self.dmono[j];
            let (mut g, mut hh, mut kx, mut kz) = (0.0, 0.0, 0.0, 0.0);
            for slot in 0..top {
                let c = coeffs[slot];
                let n = ORDER_OF[slot];
                let ct = c * tk[n];
                g += ct * m[slot];
                hh += c * tk[n + 1] * m[slot];
                kx += ct * mx[slot];
                kz += ct * mz[slot];
            }
            let v = net.w2[j];
            gw2[j] += g;
            gb1[j] += v * hh;
            if net.n_in == 1 {
                gw1[j] += v * (hh * p[1] + kz);
            } else {
                gw1[2 * j] += v * (hh * p[0] + kx);
                gw1[2 * j + 1] += v * (hh * p[1] + kz);
            }
        }
        gb2[0] += coeffs[0];
    }
}

/// `tanh` through one `exp_m1`, accurate to a few ulps and cheaper than the libm routine.
#[inline]
fn fast_tanh(a: f64) -> f64 {
    if a.abs() > 20.0 {
        return a.signum();
    }
    let e = (2.0 * a).exp_m1();
    e / (e + 2.0)
}

/// Total order of each multi-index slot.
const ORDER_OF: [usize; JET_LEN] = [0, 1, 1, 2, 2, 2, 3, 3, 3, 3];

#[inline]
fn powers(w: f64) -> [f64; 4] {
    [1.0, w, w * w, w * w * w]
}

/// Number of leading multi-index slots needed to cover the non-zero coefficients.
#[inline]
fn top_order(coeffs: &[f64; JET_LEN]) -> usize {
    coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .map_or(0, |i| i + 1)
}

/// Trainable scalars of one or more networks, concatenated in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn flatten(nets: &[&ShallowNet]) -> Self {
        let mut out = Vec::new();
        for net in nets {
            net.write_params(&mut out);
        }
        Self(out)
    }

    /// Splits into networks with the given `(n_in, n_hidden)` shapes.
    pub fn unflatten(&self, shapes: &[(usize, usize)]) -> Result<Vec<ShallowNet>> {
        let total: usize = shapes.iter().map(|&(i, h)| parameter_count(i, h)).sum();
        if total != self.0.len() {
            return Err(invalid(format!(
                "parameter vector has {} entries, shapes need {total}",
                self.0.len()
            )));
        }
        let mut offset = 0;
        shapes
            .iter()
            .map(|&(n_in, h)| {
                let n = parameter_count(n_in, h);
                let net = ShallowNet::from_params(n_in, h, &self.0[offset..offset + n]);
                offset += n;
                net
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn inf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Central-difference gradient `(f(p + h e_k) - f(p - h e_k)) / 2h`.
pub fn fd_gradient<F>(mut objective: F, params: &ParamVector, step: f64) -> Result<ParamVector>
where
    F: FnMut(&ParamVector) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let mut probe = params.clone();
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let base = params.0[k];
        probe.0[k] = base + step;
        let fp = objective(&probe);
        probe.0[k] = base - step;
        let fm = objective(&probe);
        probe.0[k] = base;
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(crate::Error::Verification(format!(
                "objective is not finite around parameter {k}"
            )));
        }
        grad.push((fp - fm) / (2.0 * step));
    }
    Ok(ParamVector(grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_net() -> ShallowNet {
        ShallowNet::from_parts(1, 1, vec![1.0], vec![0.0], vec![1.0], 0.0).unwrap()
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(init_net(1, 20, 0).unwrap().parameter_count(), 61);
        assert_eq!(init_net(2, 20, 0).unwrap().parameter_count(), 81);
        assert_eq!(init_net(1, 20, 0).unwrap().params().len(), 61);
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_net(2, 20, 7).unwrap().params();
        let b = init_net(2, 20, 7).unwrap().params();
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_ne!(a, init_net(2, 20, 8).unwrap().params());
    }

    #[test]
    fn init_respects_glorot_bounds_and_zero_biases() {
        let net = init_net(2, 20, 3).unwrap();
        let lim1 = (6.0f64 / 22.0).sqrt();
        let lim2 = (6.0f64 / 21.0).sqrt();
        assert!(net.w1.iter().all(|w| w.abs() <= lim1));
        assert!(net.w2.iter().all(|w| w.abs() <= lim2));
        assert!(net.b1.iter().all(|&b| b == 0.0));
        assert_eq!(net.b2, 0.0);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(init_net(3, 20, 0).is_err());
        assert!(init_net(0, 20, 0).is_err());
        assert!(init_net(1, 0, 0).is_err());
    }

    #[test]
    fn rejects_order_above_three() {
        let net = init_net(2, 4, 0).unwrap();
        assert!(net.eval_jet([0.1, 0.2], 4).is_err());
    }

    #[test]
    fn zero_output_layer_gives_zero_jet() {
        let mut net = init_net(2, 5, 1).unwrap();
        net.scale_output(0.0);
        let jet = net.eval_jet([0.3, 0.7], 3).unwrap();
        assert!(jet.partials().all(|(_, v)| v == 0.0));
    }

    #[test]
    fn single_unit_at_origin() {
        let jet = unit_net().eval_jet([0.0, 0.0], 2).unwrap();
        assert_eq!(jet.value(), 0.0);
        assert_eq!(jet.partial(0, 1), Some(1.0));
        assert_eq!(jet.partial(0, 2), Some(0.0));
    }

    #[test]
    fn jet_carries_exactly_requested_partials() {
        let net2 = init_net(2, 3, 0).unwrap();
        for order in 0..=3 {
            let jet = net2.eval_jet([0.2, 0.4], order).unwrap();
            assert_eq!(jet.partials().count(), (order + 1) * (order + 2) / 2);
            assert!(jet.partials().all(|((dx, dz), _)| dx + dz <= order));
        }
        let net1 = init_net(1, 3, 0).unwrap();
        let jet = net1.eval_jet([0.2, 0.4], 3).unwrap();
        assert_eq!(jet.partials().count(), 4);
        assert_eq!(jet.partial(1, 0), None);
        assert_eq!(jet.d(1, 0), 0.0);
    }

    #[test]
    fn one_input_net_ignores_x() {
        let net = init_net(1, 6, 2).unwrap();
        assert_eq!(net.value([0.1, 0.5]), net.value([0.9, 0.5]));
    }

    #[test]
    fn tanh_derivatives_match_finite_differences() {
        let h = 1e-5;
        for &a in &[-1.3, -0.2, 0.0, 0.4, 2.1] {
            let d = tanh_derivatives(a);
            let dp = tanh_derivatives(a + h);
            let dm = tanh_derivatives(a - h);
            for k in 0..4 {
                let fd = (dp[k] - dm[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-8, "order {} at {a}", k + 1);
            }
        }
    }

    #[test]
    fn params_roundtrip() {
        let a = init_net(1, 4, 0).unwrap();
        let b = init_net(2, 3, 1).unwrap();
        let flat = ParamVector::flatten(&[&a, &b]);
        assert_eq!(flat.len(), 13 + 13);
        let nets = flat.unflatten(&[(1, 4), (2, 3)]).unwrap();
        assert_eq!(nets, vec![a, b]);
        assert!(flat.unflatten(&[(1, 4)]).is_err());
    }

    #[test]
    fn fd_gradient_of_quadratic() {
        let g = fd_gradient(
            |p| p.0.iter().map(|v| v * v).sum(),
            &ParamVector(vec![1.0, 2.0]),
            1e-4,
        )
        .unwrap();
        assert!((g.0[0] - 2.0).abs() < 1e-8);
        assert!((g.0[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn fd_gradient_of_constant_is_zero() {
        let g = fd_gradient(|_| 3.5, &ParamVector(vec![0.1, -4.0, 2.0]), 1e-3).unwrap();
        assert!(g.0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fd_gradient_reports_non_finite() {
        let r = fd_gradient(|p| 1.0 / p.0[0], &ParamVector(vec![0.0]), 1e-3);
        assert!(r.is_ok());
        let r = fd_gradient(|p| (p.0[0] - 1.0).ln(), &ParamVector(vec![0.0]), 1e-3);
        assert!(r.is_err());
        assert!(fd_gradient(|_| 0.0, &ParamVector(vec![0.0]), 0.0).is_err());
    }

    #[test]
    fn probe_gradient_matches_finite_differences() {
        let net = init_net(2, 5, 11).unwrap();
        let mut perturbed = net.clone();
        let mut rng = SplitMix64::new(5);
        let mut coeffs = [0.0; JET_LEN];
        coeffs.iter_mut().for_each(|c| *c = rng.uniform(-1.0, 1.0));
        let p = [0.37, 0.61];
        let mut grad = vec![0.0; net.parameter_count()];
        net.probe_gradient(p, &coeffs, 1.0, &mut grad);
        let base = ParamVector(net.params());
        let fd = fd_gradient(
            |q| {
                perturbed.load_params(&q.0);
                perturbed.probe_value(p, &coeffs)
            },
            &base,
            1e-6,
        )
        .unwrap();
        for (a, b) in grad.iter().zip(&fd.0) {
            assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}
