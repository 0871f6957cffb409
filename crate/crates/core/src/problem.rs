//! Manufactured plane-parallel flow: forcing terms, exact viscous fields and
//! inviscid limits.
//!
//! With `f1(z) = 1 + z(1 - z)` the first velocity component is
//!
//! ```text
//! u1(z) = z(1 - z) + (1 - 2ε) (1 - c(ε) (e^{-z/√ε} + e^{-(1-z)/√ε})),   c(ε) = 1 / (1 + e^{-1/√ε})
//! ```
//!
//! and `u2(x, z) = u1(z) (1 + sin 2πx)` solves the second equation with the matching `f2`.
//! Vorticity is the curl `(-∂z u2, u1', ∂x u2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Target};
use crate::net::{Jet, Point};

const TWO_PI: f64 = 2.0 * PI;

/// Viscosity `ε` with its cached square root (the boundary-layer thickness).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Viscosity {
    eps: f64,
    sqrt_eps: f64,
}

impl Viscosity {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(invalid(format!("viscosity must lie in (0, 1], got {eps}")));
        }
        Ok(Self {
            eps,
            sqrt_eps: eps.sqrt(),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sqrt_eps(&self) -> f64 {
        self.sqrt_eps
    }

    /// Left and right layer exponentials `e^{-z/√ε}`, `e^{-(1-z)/√ε}`.
    pub fn layers(&self, z: f64) -> (f64, f64) {
        (
            (-z / self.sqrt_eps).exp(),
            (-(1.0 - z) / self.sqrt_eps).exp(),
        )
    }

    /// `(1 - e^{-1/√ε}) / (1 - e^{-2/√ε})` in cancellation-free form.
    pub fn layer_amplitude(&self) -> f64 {
        1.0 / (1.0 + (-1.0 / self.sqrt_eps).exp())
    }
}

impl TryFrom<f64> for Viscosity {
    type Error = Error;

    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<Viscosity> for f64 {
    fn from(v: Viscosity) -> f64 {
        v.eps
    }
}

pub fn f1(z: f64) -> f64 {
    1.0 + z * (1.0 - z)
}

pub fn d_z_f1(z: f64) -> f64 {
    1.0 - 2.0 * z
}

/// Inviscid limit of the first velocity component.
pub fn u1_inviscid(z: f64) -> f64 {
    f1(z)
}

/// Closed form used for the first velocity component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U1Form {
    /// Includes the `z(1 - z)` term, so the equation holds with `f1 = 1 + z(1 - z)`.
    Corrected,
    /// Drops the `z(1 - z)` term; does not satisfy the equation. Kept to show the gate catches it.
    Printed,
}

/// Data of the manufactured problem: forcing, exact fields and their derivatives.
///
/// Implementations other than [`Manufactured`] exist to exercise the verification gate.
pub trait FlowData: Sync {
    fn viscosity(&self) -> Viscosity;

    /// `u1, u1', u1'', u1'''` at `z`.
    fn u1_derivs(&self, z: f64) -> [f64; 4];

    fn f1(&self, z: f64) -> f64 {
        f1(z)
    }

    fn d_z_f1(&self, z: f64) -> f64 {
        d_z_f1(z)
    }

    fn f2(&self, x: f64, z: f64) -> f64 {
        let eps = self.viscosity().eps();
        let u = self.u1_derivs(z)[0];
        let (s, c) = (TWO_PI * x).sin_cos();
        self.f1(z) * (1.0 + s) + 4.0 * PI * PI * eps * u * s + TWO_PI * u * u * c
    }

    fn dx_f2(&self, x: f64, z: f64) -> f64 {
        let eps = self.viscosity().eps();
        let u = self.u1_derivs(z)[0];
        let (s, c) = (TWO_PI * x).sin_cos();
        TWO_PI * c * self.f1(z) + 8.0 * PI.powi(3) * eps * u * c - 4.0 * PI * PI * u * u * s
    }

    fn dz_f2(&self, x: f64, z: f64) -> f64 {
        let eps = self.viscosity().eps();
        let [u, du, ..] = self.u1_derivs(z);
        let (s, c) = (TWO_PI * x).sin_cos();
        self.d_z_f1(z) * (1.0 + s) + 4.0 * PI * PI * eps * du * s + 4.0 * PI * u * du * c
    }

    fn dxx_f2(&self, x: f64, z: f64) -> f64 {
        // Every x-dependent term of f2 is a first harmonic.
        -4.0 * PI * PI * (self.f2(x, z) - self.f1(z))
    }

    /// Exact field of `target` with partials up to `order` (at most 2).
    fn exact_jet(&self, target: Target, p: Point, order: usize) -> Jet {
        let [x, z] = p;
        let u = self.u1_derivs(z);
        let (s, c) = (TWO_PI * x).sin_cos();
        let w2 = [u[1], u[2], u[3]];
        // Harmonic factors and their first two x-derivatives.
        let g = [1.0 + s, TWO_PI * c, -4.0 * PI * PI * s];
        let h = [TWO_PI * c, -4.0 * PI * PI * s, -8.0 * PI.powi(3) * c];
        let mut jet = Jet::zero(target.dims(), order);
        for n in 0..=order {
            for dx in 0..=n {
                let dz = n - dx;
                let v = match target {
                    Target::U1 if dx == 0 => u[dz],
                    Target::W2 if dx == 0 => w2[dz],
                    Target::U1 | Target::W2 => continue,
                    Target::U2 => g[dx] * u[dz],
                    Target::W1 => -g[dx] * w2[dz],
                    Target::W3 => h[dx] * u[dz],
                };
                *jet.d_mut(dx, dz) = v;
            }
        }
        jet
    }
}

/// The manufactured plane-parallel problem at one viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub viscosity: Viscosity,
    pub form: U1Form,
}

impl Manufactured {
    pub fn new(viscosity: Viscosity) -> Self {
        Self {
            viscosity,
            form: U1Form::Corrected,
        }
    }

    pub fn with_form(viscosity: Viscosity, form: U1Form) -> Self {
        Self { viscosity, form }
    }

    pub fn u1(&self, z: f64) -> f64 {
        self.u1_derivs(z)[0]
    }

    pub fn d_z_u1(&self, z: f64) -> f64 {
        self.u1_derivs(z)[1]
    }

    pub fn u2(&self, x: f64, z: f64) -> f64 {
        self.u1(z) * (1.0 + (TWO_PI * x).sin())
    }

    /// Vorticity component 1, 2 or 3.
    pub fn omega(&self, component: usize, x: f64, z: f64) -> Result<f64> {
        let target = match component {
            1 => Target::W1,
            2 => Target::W2,
            3 => Target::W3,
            _ => return Err(invalid(format!("vorticity component {component} not in 1..=3"))),
        };
        Ok(self.exact_jet(target, [x, z], 0).value())
    }

    pub fn field(&self, target: Target) -> ExactField {
        ExactField {
            data: *self,
            target,
        }
    }
}

impl FlowData for Manufactured {
    fn viscosity(&self) -> Viscosity {
        self.viscosity
    }

    fn u1_derivs(&self, z: f64) -> [f64; 4] {
        let v = self.viscosity;
        let k = 1.0 - 2.0 * v.eps();
        let amp = k * v.layer_amplitude();
        let inv = 1.0 / v.sqrt_eps();
        let (el, er) = v.layers(z);
        let poly = match self.form {
            U1Form::Corrected => [z * (1.0 - z), 1.0 - 2.0 * z, -2.0, 0.0],
            U1Form::Printed => [0.0; 4],
        };
        let mut out = [0.0; 4];
        let mut scale = 1.0;
        for n in 0..4 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let layer = amp * scale * (sign * el + er);
            out[n] = poly[n] - layer + if n == 0 { k } else { 0.0 };
            scale *= inv;
        }
        out
    }
}

/// Exact solution component usable wherever a prediction is expected.
#[derive(Debug, Clone, Copy)]
pub struct ExactField {
    pub data: Manufactured,
    pub target: Target,
}

impl Field for ExactField {
    fn dims(&self) -> usize {
        self.target.dims()
    }

    fn jet(&self, p: Point, order: usize) -> Jet {
        self.data.exact_jet(self.target, p, order)
    }
}

/// Maximum residual of one equation or boundary condition over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualCheck {
    pub name: &'static str,
    pub max_abs: f64,
    /// Maximum of `|residual| / max(1, Σ|terms|)`.
    pub max_rel: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedReport {
    pub eps: f64,
    pub tolerance: f64,
    pub checks: Vec<ResidualCheck>,
}

impl ManufacturedReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Relative tolerance of the manufactured-solution gate.
pub const MANUFACTURED_TOL: f64 = 1e-8;

struct Accumulator {
    name: &'static str,
    max_abs: f64,
    max_rel: f64,
}

impl Accumulator {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            max_abs: 0.0,
            max_rel: 0.0,
        }
    }

    fn push(&mut self, terms: &[f64]) {
        let r: f64 = terms.iter().sum();
        let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
        let rel = if r.is_finite() { r.abs() / scale } else { f64::INFINITY };
        self.max_abs = self.max_abs.max(r.abs());
        self.max_rel = self.max_rel.max(rel);
    }

    fn finish(self, tol: f64) -> ResidualCheck {
        ResidualCheck {
            name: self.name,
            max_abs: self.max_abs,
            max_rel: self.max_rel,
            passed: self.max_rel <= tol,
        }
    }
}

/// Residuals of every interior equation and wall condition on the exact fields.
pub fn manufactured_report(data: &dyn FlowData, grid: &[Point]) -> Result<ManufacturedReport> {
    if grid.is_empty() {
        return Err(invalid("verification grid is empty"));
    }
    let eps = data.viscosity().eps();
    let jet = |t, p| data.exact_jet(t, p, 2);

    let mut u1_eq = Accumulator::new("u1 momentum equation");
    let mut u2_eq = Accumulator::new("u2 momentum equation");
    let mut w1_eq = Accumulator::new("omega1 vorticity equation");
    let mut w2_eq = Accumulator::new("omega2 vorticity equation");
    let mut w3_eq = Accumulator::new("omega3 vorticity equation");
    for &p in grid {
        let [x, z] = p;
        let u1 = jet(Target::U1, p);
        let u2 = jet(Target::U2, p);
        let w1 = jet(Target::W1, p);
        let w2 = jet(Target::W2, p);
        let w3 = jet(Target::W3, p);
        u1_eq.push(&[u1.value(), -eps * u1.d(0, 2), -data.f1(z)]);
        u2_eq.push(&[
            u2.value(),
            -eps * u2.d(2, 0),
            -eps * u2.d(0, 2),
            u1.value() * u2.d(1, 0),
            -data.f2(x, z),
        ]);
        w1_eq.push(&[
            w1.value(),
            -eps * w1.d(2, 0),
            -eps * w1.d(0, 2),
            -w2.value() * w3.value(),
            u1.value() * w1.d(1, 0),
            data.dz_f2(x, z),
        ]);
        w2_eq.push(&[w2.value(), -eps * w2.d(0, 2), -data.d_z_f1(z)]);
        w3_eq.push(&[
            w3.value(),
            -eps * w3.d(2, 0),
            -eps * w3.d(0, 2),
            u1.value() * w3.d(1, 0),
            -data.dx_f2(x, z),
        ]);
    }

    let mut velocity_wall = Accumulator::new("velocity no-slip walls");
    let mut w1_wall = Accumulator::new("omega1 wall flux");
    let mut w2_wall = Accumulator::new("omega2 wall flux");
    let mut w3_wall = Accumulator::new("omega3 wall value");
    let mut xs: Vec<f64> = grid.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for &x in &xs {
        for zw in [0.0, 1.0] {
            let p = [x, zw];
            velocity_wall.push(&[jet(Target::U1, p).value()]);
            velocity_wall.push(&[jet(Target::U2, p).value()]);
            w1_wall.push(&[jet(Target::W1, p).d(0, 1), -data.f2(x, zw) / eps]);
            w2_wall.push(&[jet(Target::W2, p).d(0, 1), data.f1(zw) / eps]);
            w3_wall.push(&[jet(Target::W3, p).value()]);
        }
    }

    let tol = MANUFACTURED_TOL;
    Ok(ManufacturedReport {
        eps,
        tolerance: tol,
        checks: [
            u1_eq,
            u2_eq,
            w1_eq,
            w2_eq,
            w3_eq,
            velocity_wall,
            w1_wall,
            w2_wall,
            w3_wall,
        ]
        .into_iter()
        .map(|a| a.finish(tol))
        .collect(),
    })
}

/// Fails with the names of every violated equation or wall condition.
pub fn verify_manufactured(data: &dyn FlowData, grid: &[Point]) -> Result<ManufacturedReport> {
    let report = manufactured_report(data, grid)?;
    if report.passed() {
        Ok(report)
    } else {
        let names: Vec<String> = report
            .failures()
            .map(|c| format!("{} (relative residual {:.3e})", c.name, c.max_rel))
            .collect();
        Err(Error::Verification(format!(
            "eps = {:e}: {}",
            report.eps,
            names.join("; ")
        )))
    }
}

/// Uniform verification grid of `n × n` points on `[0, 1]²` plus layer-resolving `z` rows.
pub fn verification_grid(viscosity: Viscosity, n: usize) -> Vec<Point> {
    let n = n.max(2);
    let d = viscosity.sqrt_eps();
    let mut zs: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
    for k in 1..=10 {
        let t = k as f64 * d / 2.0;
        if t < 1.0 {
            zs.push(t);
            zs.push(1.0 - t);
        }
    }
    let mut out = Vec::with_capacity(n * zs.len());
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        out.extend(zs.iter().map(|&z| [x, z]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(eps: f64) -> Manufactured {
        Manufactured::new(Viscosity::new(eps).unwrap())
    }

    #[test]
    fn viscosity_bounds() {
        assert!(Viscosity::new(0.0).is_err());
        assert!(Viscosity::new(1.5).is_err());
        assert!(Viscosity::new(f64::NAN).is_err());
        let v = Viscosity::new(1e-6).unwrap();
        assert!((v.sqrt_eps() * v.sqrt_eps() - 1e-6).abs() < 1e-21);
    }

    #[test]
    fn forcing_values() {
        assert_eq!(f1(0.0), 1.0);
        assert_eq!(f1(0.5), 1.25);
        assert_eq!(d_z_f1(0.5), 0.0);
        assert_eq!(u1_inviscid(0.0), 1.0);
        assert_eq!(u1_inviscid(0.5), 1.25);
    }

    #[test]
    fn u1_boundary_and_midpoint() {
        let p = problem(1e-4);
        assert!(p.u1(0.0).abs() < 1e-15);
        assert!(p.u1(1.0).abs() < 1e-15);
        assert!((p.u1(0.5) - 1.2498).abs() < 1e-14);
    }

    #[test]
    fn u1_residual_at_random_points() {
        let p = problem(1e-6);
        let mut rng = crate::rng::SplitMix64::new(1);
        for _ in 0..1000 {
            let z = rng.next_f64();
            let [u, _, uzz, _] = p.u1_derivs(z);
            assert!((u - 1e-6 * uzz - f1(z)).abs() <= 1e-10, "z = {z}");
        }
    }

    #[test]
    fn u1_minus_inviscid_at_midpoint() {
        let p = problem(1e-3);
        let diff = p.u1(0.5) - u1_inviscid(0.5);
        // -2ε plus the two layer tails e^{-1/(2√ε)}.
        let tail = 2.0 * (1.0 - 2e-3) * (-0.5 / 1e-3f64.sqrt()).exp();
        assert!((diff - (-2e-3 - tail)).abs() < 1e-12);
    }

    #[test]
    fn f2_spot_value() {
        let p = problem(1e-8);
        let u = p.u1(0.5);
        let expected = 1.25 + 2.0 * PI * u * u;
        assert!((p.f2(0.0, 0.5) - expected).abs() < 1e-12);
        assert!((p.f2(0.0, 0.5) - 11.067).abs() < 1e-3);
    }

    #[test]
    fn f2_derivatives_match_finite_differences() {
        let p = problem(1e-4);
        let h = 1e-6;
        for &(x, z) in &[(0.1, 0.3), (0.45, 0.5), (0.8, 0.7)] {
            let fdx = (p.f2(x + h, z) - p.f2(x - h, z)) / (2.0 * h);
            let fdz = (p.f2(x, z + h) - p.f2(x, z - h)) / (2.0 * h);
            let fdxx = (p.f2(x + h, z) - 2.0 * p.f2(x, z) + p.f2(x - h, z)) / (h * h);
            assert!((fdx - p.dx_f2(x, z)).abs() <= 1e-6 * p.dx_f2(x, z).abs().max(1.0));
            assert!((fdz - p.dz_f2(x, z)).abs() <= 1e-6 * p.dz_f2(x, z).abs().max(1.0));
            assert!((fdxx - p.dxx_f2(x, z)).abs() <= 1e-3 * p.dxx_f2(x, z).abs().max(1.0));
        }
    }

    #[test]
    fn u2_values() {
        let p = problem(1e-5);
        for &x in &[0.0, 0.3, 0.77] {
            assert!(p.u2(x, 0.0).abs() < 1e-15);
        }
        for &z in &[0.01, 0.4, 0.9] {
            assert!((p.u2(0.25, z) - 2.0 * p.u1(z)).abs() < 1e-14);
        }
    }

    #[test]
    fn omega_values() {
        let p = problem(1e-4);
        assert!(p.omega(2, 0.3, 0.5).unwrap().abs() < 1e-12);
        for &z in &[0.0, 0.2, 0.9] {
            assert!(p.omega(3, 0.25, z).unwrap().abs() < 1e-12);
        }
        assert!(p.omega(4, 0.0, 0.0).is_err());
        assert!(p.omega(0, 0.0, 0.0).is_err());
        // Wall flux of omega2 equals -f1(0)/ε.
        let dw2 = p.u1_derivs(0.0)[2];
        assert!((dw2 + 1.0 / 1e-4).abs() <= 1e-8 / 1e-4);
    }

    #[test]
    fn omega2_matches_closed_form() {
        let eps = 1e-3;
        let p = problem(eps);
        let d = eps.sqrt();
        let c = (1.0 - (-1.0 / d).exp()) / (1.0 - (-2.0 / d).exp());
        for &z in &[0.0, 0.01, 0.3, 0.99] {
            let formula = -(1.0 - 2.0 * eps)
                * c
                * (-(-z / d).exp() / d + (-(1.0 - z) / d).exp() / d)
                + 1.0
                - 2.0 * z;
            let w2 = p.omega(2, 0.0, z).unwrap();
            assert!((w2 - formula).abs() < 1e-12 * formula.abs().max(1.0));
        }
    }

    #[test]
    fn curl_consistency_by_finite_differences() {
        let p = problem(1e-3);
        let h = 1e-6;
        for &(x, z) in &[(0.1, 0.3), (0.6, 0.5), (0.9, 0.8)] {
            let w1 = p.omega(1, x, z).unwrap();
            let w2 = p.omega(2, x, z).unwrap();
            let w3 = p.omega(3, x, z).unwrap();
            let dz_u2 = (p.u2(x, z + h) - p.u2(x, z - h)) / (2.0 * h);
            let dx_u2 = (p.u2(x + h, z) - p.u2(x - h, z)) / (2.0 * h);
            let dz_u1 = (p.u1(z + h) - p.u1(z - h)) / (2.0 * h);
            assert!((w1 + dz_u2).abs() <= 1e-5 * w1.abs().max(1.0));
            assert!((w2 - dz_u1).abs() <= 1e-5 * w2.abs().max(1.0));
            assert!((w3 - dx_u2).abs() <= 1e-5 * w3.abs().max(1.0));
        }
    }

    #[test]
    fn periodicity_is_exact() {
        let p = problem(1e-4);
        for &z in &[0.0, 0.003, 0.5, 0.97] {
            assert!((p.u2(0.0, z) - p.u2(1.0, z)).abs() <= 1e-13);
            for c in [1, 3] {
                let a = p.omega(c, 0.0, z).unwrap();
                let b = p.omega(c, 1.0, z).unwrap();
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn exact_jet_partials_match_finite_differences() {
        let p = problem(1e-3);
        let h = 1e-5;
        let pt = [0.31, 0.42];
        for t in Target::ALL {
            let j = p.exact_jet(t, pt, 2);
            let f = |dx: f64, dz: f64| p.exact_jet(t, [pt[0] + dx, pt[1] + dz], 0).value();
            let fx = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
            let fz = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
            let fzz = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
            let fxx = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
            assert!((fx - j.d(1, 0)).abs() < 1e-6 * fx.abs().max(1.0), "{t} x");
            assert!((fz - j.d(0, 1)).abs() < 1e-6 * fz.abs().max(1.0), "{t} z");
            assert!((fxx - j.d(2, 0)).abs() < 1e-3 * fxx.abs().max(1.0), "{t} xx");
            assert!((fzz - j.d(0, 2)).abs() < 1e-3 * fzz.abs().max(1.0), "{t} zz");
        }
    }

    #[test]
    fn gate_passes_on_corrected_form() {
        for k in 3..=8 {
            let v = Viscosity::new(10f64.powi(-k)).unwrap();
            let grid = verification_grid(v, 21);
            let report = verify_manufactured(&Manufactured::new(v), &grid).unwrap();
            assert!(report.passed());
        }
    }

    #[test]
    fn gate_rejects_printed_form() {
        let v = Viscosity::new(1e-3).unwrap();
        let data = Manufactured::with_form(v, U1Form::Printed);
        let grid = verification_grid(v, 21);
        let report = manufactured_report(&data, &grid).unwrap();
        let u1 = &report.checks[0];
        assert!(!u1.passed);
        // Residual at z = 0.5 is z(1-z) + 2ε.
        assert!(u1.max_abs > 0.2);
        let err = verify_manufactured(&data, &grid).unwrap_err().to_string();
        assert!(err.contains("u1 momentum equation"), "{err}");
    }

    struct FlippedForcing(Manufactured);

    impl FlowData for FlippedForcing {
        fn viscosity(&self) -> Viscosity {
            self.0.viscosity
        }

        fn u1_derivs(&self, z: f64) -> [f64; 4] {
            self.0.u1_derivs(z)
        }

        fn f2(&self, x: f64, z: f64) -> f64 {
            -self.0.f2(x, z)
        }
    }

    #[test]
    fn gate_names_equation_with_flipped_forcing() {
        let v = Viscosity::new(1e-4).unwrap();
        let grid = verification_grid(v, 21);
        let err = verify_manufactured(&FlippedForcing(Manufactured::new(v)), &grid)
            .unwrap_err()
            .to_string();
        assert!(err.contains("u2 momentum equation"), "{err}");
        assert!(!err.contains("u1 momentum equation"), "{err}");
    }

    #[test]
    fn gate_rejects_empty_grid() {
        let v = Viscosity::new(1e-3).unwrap();
        assert!(manufactured_report(&Manufactured::new(v), &[]).is_err());
    }
}
