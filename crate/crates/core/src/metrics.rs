//! Test grids, relative errors and quadrature checks of the small-viscosity asymptotics.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Method, Target};
use crate::net::Point;
use crate::problem::{f1, FlowData, Manufactured, Viscosity};

pub const LAYER_POINTS: usize = 50;
pub const OUTER_POINTS: usize = 500;
pub const X_POINTS: usize = 500;

/// Test points concentrated in the two boundary layers `[0, √ε]` and `[1 - √ε, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredGrid {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl LayeredGrid {
    pub fn new(viscosity: Viscosity) -> Self {
        Self::with_counts(viscosity, LAYER_POINTS, OUTER_POINTS, X_POINTS)
    }

    /// Same layout with `layer` points per boundary layer, `outer` between them and `nx` in `x`.
    pub fn with_counts(viscosity: Viscosity, layer: usize, outer: usize, nx: usize) -> Self {
        let (layer, nx) = (layer.max(2), nx.max(2));
        let d = viscosity.sqrt_eps().min(0.5);
        let step = d / (layer - 1) as f64;
        let mut z: Vec<f64> = (0..layer).map(|i| i as f64 * step).collect();
        let inner = 1.0 - 2.0 * d;
        z.extend((1..=outer).map(|i| d + i as f64 * inner / (outer + 1) as f64));
        z.extend((0..layer).map(|i| 1.0 - d + i as f64 * step));
        if let Some(last) = z.last_mut() {
            *last = 1.0;
        }
        let x = (0..nx).map(|i| i as f64 / (nx - 1) as f64).collect();
        Self { z, x }
    }

    /// A grid with `n` points in `z` split 1 : 10 : 1 between the layers and the
    /// outer region, as the default 50 + 500 + 50 layout does.
    pub fn with_resolution(viscosity: Viscosity, n: usize, nx: usize) -> Self {
        let layer = (n / 12).max(2);
        Self::with_counts(viscosity, layer, n.saturating_sub(2 * layer), nx)
    }

    /// Every test point of a field with `dims` inputs (one-input fields ignore `x`).
    pub fn points(&self, dims: usize) -> Vec<Point> {
        if dims == 1 {
            self.z.iter().map(|&z| [0.0, z]).collect()
        } else {
            self.x
                .iter()
                .flat_map(|&x| self.z.iter().map(move |&z| [x, z]))
                .collect()
        }
    }
}

/// One row of an error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub eps: f64,
    pub target: Target,
    pub method: Method,
    pub rel_l2: f64,
    pub rel_linf: f64,
}

pub const ERROR_CSV_HEADER: &str = "eps,target,method,rel_l2,rel_linf";

impl ErrorRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{:e},{},{},{:e},{:e}",
            self.eps, self.target, self.method, self.rel_l2, self.rel_linf
        )
    }
}

/// Discrete relative `L²` and `L∞` errors of `prediction` against `exact` on `points`.
pub fn relative_errors(prediction: &dyn Field, exact: &dyn Field, points: &[Point]) -> Result<(f64, f64)> {
    let (mut diff2, mut ref2, mut diff_max, mut ref_max) = (0.0, 0.0, 0.0f64, 0.0f64);
    for &p in points {
        let e = exact.value(p);
        let d = prediction.value(p) - e;
        if !d.is_finite() {
            return Err(Error::NonFinite {
                context: "prediction on the test grid".into(),
                x: p[0],
                z: p[1],
                value: d,
            });
        }
        diff2 += d * d;
        ref2 += e * e;
        diff_max = diff_max.max(d.abs());
        ref_max = ref_max.max(e.abs());
    }
    if ref2 == 0.0 || ref_max == 0.0 {
        return Err(invalid("exact field vanishes on the test grid"));
    }
    Ok(((diff2 / ref2).sqrt(), diff_max / ref_max))
}

/// Errors of `prediction` for `target` on the layered grid of `viscosity`.
pub fn error_row(prediction: &dyn Field, target: Target, method: Method, viscosity: Viscosity) -> Result<ErrorRow> {
    if prediction.dims() != target.dims() {
        return Err(invalid(format!("prediction dimension does not match {target}")));
    }
    let exact = Manufactured::new(viscosity).field(target);
    let points = LayeredGrid::new(viscosity).points(target.dims());
    let (rel_l2, rel_linf) = relative_errors(prediction, &exact, &points)?;
    Ok(ErrorRow {
        eps: viscosity.eps(),
        target,
        method,
        rel_l2,
        rel_linf,
    })
}

const GL_DEGREE: usize = 10;
const QUAD_RTOL: f64 = 1e-8;

/// Panel edges on `[0, 1]`: width `≤ √ε/20` within `10√ε` of each wall, growing
/// geometrically (ratio 1.25) into the interior, capped at 1/50.
fn panel_edges(viscosity: Viscosity, refinement: u32) -> Vec<f64> {
    let d = viscosity.sqrt_eps();
    let fine = d / 20.0;
    let layer = (10.0 * d).min(0.5);
    let mut left = vec![0.0];
    let n_layer = (layer / fine).ceil() as usize;
    for i in 1..=n_layer {
        left.push(layer * i as f64 / n_layer as f64);
    }
    let mut w = fine;
    while *left.last().unwrap() < 0.5 {
        w = (w * 1.25).min(0.02);
        let next = (left.last().unwrap() + w).min(0.5);
        left.push(next);
    }
    let mut edges = left.clone();
    edges.extend(left.iter().rev().skip(1).map(|z| 1.0 - z));
    for _ in 0..refinement {
        let mut finer = Vec::with_capacity(2 * edges.len());
        for pair in edges.windows(2) {
            finer.push(pair[0]);
            finer.push(0.5 * (pair[0] + pair[1]));
        }
        finer.push(1.0);
        edges = finer;
    }
    edges
}

fn composite(rule: &GaussLegendre, edges: &[f64], f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut total_abs = 0.0;
    for pair in edges.windows(2) {
        total += rule.integrate(pair[0], pair[1], f);
        total_abs += rule.integrate(pair[0], pair[1], |z| f(z).abs());
    }
    (total, total_abs)
}

/// `∫₀¹ f dz` on a panel layout graded towards both walls.
///
/// The result is accepted once halving every panel changes it by less than `1e-8`
/// relative to `∫|f|`; at most two refinements are tried.
pub fn layered_quadrature(f: &dyn Fn(f64) -> f64, viscosity: Viscosity) -> Result<f64> {
    let rule = GaussLegendre::new(NonZeroUsize::new(GL_DEGREE).expect("nonzero degree"));
    let (mut prev, _) = composite(&rule, &panel_edges(viscosity, 0), f);
    for refinement in 1..=2 {
        let (cur, abs) = composite(&rule, &panel_edges(viscosity, refinement), f);
        if !cur.is_finite() {
            return Err(Error::Quadrature("integrand is not finite".into()));
        }
        if (cur - prev).abs() <= QUAD_RTOL * abs.max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "no convergence after two refinements at eps = {:e}",
        viscosity.eps()
    )))
}

/// Least-squares slope of `log y` against `log ε`.
pub fn log_log_slope(eps: &[f64], values: &[f64]) -> Result<f64> {
    if eps.len() != values.len() || eps.len() < 2 {
        return Err(invalid("slope fit needs at least two (eps, value) pairs"));
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Verification("slope fit needs positive finite values".into()));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Verification("slope fit needs distinct viscosities".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Per-viscosity values of a rate check and their fitted slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
}

fn viscosities(eps_list: &[f64]) -> Result<Vec<Viscosity>> {
    eps_list.iter().map(|&e| Viscosity::new(e)).collect()
}

/// `‖u1ᵉ - u1⁰‖_{L²(0,1)}` for each ε and the fitted rate (about 1/4).
pub fn inviscid_rate_check(eps_list: &[f64]) -> Result<RateFit> {
    if eps_list.len() < 4 {
        return Err(invalid("the inviscid rate fit needs at least four viscosities"));
    }
    let mut values = Vec::with_capacity(eps_list.len());
    for v in viscosities(eps_list)? {
        let data = Manufactured::new(v);
        let sq = layered_quadrature(&|z| (data.u1(z) - f1(z)).powi(2), v)?;
        values.push(sq.sqrt());
    }
    let slope = log_log_slope(eps_list, &values)?;
    Ok(RateFit {
        eps: eps_list.to_vec(),
        values,
        slope,
    })
}

/// Distance between `∫ ω2ᵉ ψ` and its weak limit `∫ (1 - 2z) ψ + ψ(0) - ψ(1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLimit {
    pub eps: Vec<f64>,
    pub limit: f64,
    pub delta: Vec<f64>,
    /// `None` when every Δ vanishes (no decay to fit).
    pub slope: Option<f64>,
}

impl WeakLimit {
    pub fn decreasing(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self.eps.iter().copied().zip(self.delta.iter().copied()).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

pub fn weak_vorticity_limit_check(psi: &dyn Fn(f64) -> f64, eps_list: &[f64]) -> Result<WeakLimit> {
    if eps_list.is_empty() {
        return Err(invalid("no viscosities given"));
    }
    let outer = Viscosity::new(1.0)?;
    let limit = layered_quadrature(&|z| (1.0 - 2.0 * z) * psi(z), outer)? + psi(0.0) - psi(1.0);
    let mut delta = Vec::with_capacity(eps_list.len());
    for v in viscosities(eps_list)? {
        let data = Manufactured::new(v);
        let integral = layered_quadrature(&|z| data.u1_derivs(z)[1] * psi(z), v)?;
        delta.push((integral - limit).abs());
    }
    let slope = if eps_list.len() >= 2 && delta.iter().all(|d| *d > 0.0) {
        Some(log_log_slope(eps_list, &delta)?)
    } else {
        None
    };
    Ok(WeakLimit {
        eps: eps_list.to_vec(),
        limit,
        delta,
        slope,
    })
}

/// Exponent of an `Lᵖ` norm: finite `p` or the supremum norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormExponent {
    Finite(u32),
    Infinity,
}

impl NormExponent {
    pub fn label(self) -> String {
        match self {
            NormExponent::Finite(p) => p.to_string(),
            NormExponent::Infinity => "inf".into(),
        }
    }

    /// `1/p`, zero for the supremum norm.
    pub fn reciprocal(self) -> f64 {
        match self {
            NormExponent::Finite(p) => 1.0 / p as f64,
            NormExponent::Infinity => 0.0,
        }
    }
}

/// Rate `1/(2p) - m/2` expected for `‖d^m φ‖_p` of the explicit corrector.
pub fn expected_corrector_slope(m: u32, p: NormExponent) -> f64 {
    0.5 * p.reciprocal() - 0.5 * m as f64
}

/// Norms of `d^m/dz^m` of the explicit left corrector `-f1(0) e^{-z/√ε}` and their slope.
pub fn corrector_norm_check(m: u32, p: NormExponent, eps_list: &[f64]) -> Result<RateFit> {
    if m > 2 {
        return Err(invalid("derivative order must be 0, 1 or 2"));
    }
    if p == NormExponent::Finite(0) {
        return Err(invalid("norm exponent must be positive"));
    }
    let mut values = Vec::with_capacity(eps_list.len());
    for v in viscosities(eps_list)? {
        let d = v.sqrt_eps();
        let factor = -f1(0.0) * (-1.0 / d).powi(m as i32);
        let phi = |z: f64| factor * (-z / d).exp();
        let norm = match p {
            NormExponent::Finite(k) => {
                let k = k as i32;
                layered_quadrature(&|z| phi(z).abs().powi(k), v)?.powf(1.0 / k as f64)
            }
            NormExponent::Infinity => LayeredGrid::new(v)
                .z
                .iter()
                .fold(0.0f64, |acc, &z| acc.max(phi(z).abs())),
        };
        values.push(norm);
    }
    let slope = log_log_slope(eps_list, &values)?;
    Ok(RateFit {
        eps: eps_list.to_vec(),
        values,
        slope,
    })
}

/// The viscosity sweep used by the tables and rate checks.
pub const EPS_SWEEP: [f64; 6] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[cfg(test)]
mod tests {
    use super::*;

    struct Scaled<'a>(&'a dyn Field, f64);

    impl Field for Scaled<'_> {
        fn dims(&self) -> usize {
            self.0.dims()
        }

        fn jet(&self, p: Point, order: usize) -> crate::net::Jet {
            self.0.jet(p, order).scaled(self.1)
        }
    }

    #[test]
    fn grid_layout() {
        for eps in EPS_SWEEP {
            let v = Viscosity::new(eps).unwrap();
            let g = LayeredGrid::new(v);
            assert_eq!(g.z.len(), 600);
            assert_eq!(g.x.len(), 500);
            assert_eq!(g.z[0], 0.0);
            assert_eq!(g.z[599], 1.0);
            let d = v.sqrt_eps();
            assert!((g.z[49] - d).abs() < 1e-15);
            assert!(g.z[50] > d && g.z[549] < 1.0 - d);
            assert!((g.z[550] - (1.0 - d)).abs() < 1e-15);
            assert!(g.z.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(g.points(2).len(), 300_000);
        }
    }

    #[test]
    fn resolution_grid_matches_default_at_600() {
        let v = Viscosity::new(1e-5).unwrap();
        assert_eq!(LayeredGrid::with_resolution(v, 600, 500), LayeredGrid::new(v));
        let g = LayeredGrid::with_resolution(v, 37, 3);
        assert_eq!(g.z.len(), 37);
        assert!(g.z.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exact_and_doubled_predictions() {
        let v = Viscosity::new(1e-4).unwrap();
        let data = Manufactured::new(v);
        for target in [Target::U1, Target::W2] {
            let exact = data.field(target);
            let row = error_row(&exact, target, Method::SingularLayer, v).unwrap();
            assert_eq!((row.rel_l2, row.rel_linf), (0.0, 0.0));
            let double = Scaled(&exact, 2.0);
            let row = error_row(&double, target, Method::Plain, v).unwrap();
            assert!((row.rel_l2 - 1.0).abs() < 1e-14 && (row.rel_linf - 1.0).abs() < 1e-14);
        }
        let u2 = data.field(Target::U2);
        let points = LayeredGrid::new(v).points(2);
        let (a, b) = relative_errors(&Scaled(&u2, 3.0), &Scaled(&u2, 2.0), &points).unwrap();
        assert!((a - 0.5).abs() < 1e-14 && (b - 0.5).abs() < 1e-14);
    }

    #[test]
    fn errors_are_scale_consistent() {
        let v = Viscosity::new(1e-3).unwrap();
        let data = Manufactured::new(v);
        let exact = data.field(Target::U1);
        let pred = data.field(Target::W2);
        let points = LayeredGrid::new(v).points(1);
        let (a, b) = relative_errors(&pred, &exact, &points).unwrap();
        let (c, d) = relative_errors(&Scaled(&pred, -7.0), &Scaled(&exact, -7.0), &points).unwrap();
        assert!((a - c).abs() < 1e-12 * a && (b - d).abs() < 1e-12 * b);
    }

    #[test]
    fn csv_line_matches_header() {
        let row = ErrorRow {
            eps: 1e-3,
            target: Target::U1,
            method: Method::SingularLayer,
            rel_l2: 1.0452e-5,
            rel_linf: 2e-5,
        };
        assert_eq!(ERROR_CSV_HEADER.split(',').count(), row.csv_line().split(',').count());
        assert!(row.csv_line().starts_with("1e-3,u1,sl,"));
    }

    #[test]
    fn quadrature_reproduces_closed_forms() {
        for eps in EPS_SWEEP {
            let v = Viscosity::new(eps).unwrap();
            let d = v.sqrt_eps();
            let e1 = (-1.0 / d).exp();
            let got = layered_quadrature(&|z| (-z / d).exp() / d, v).unwrap();
            assert!((got - (1.0 - e1)).abs() <= 1e-8);
            // ∫ z e^{-z/δ} = δ² (1 - e^{-1/δ}(1 + 1/δ))
            let got = layered_quadrature(&|z| z * (-z / d).exp(), v).unwrap();
            let want = d * d * (1.0 - e1 * (1.0 + 1.0 / d));
            assert!((got - want).abs() <= 1e-8 * want);
            let got = layered_quadrature(&|z| f1(z).powi(2), v).unwrap();
            assert!((got - 41.0 / 30.0).abs() <= 1e-8 * 41.0 / 30.0);
            let got = layered_quadrature(&|z| 1.0 - 2.0 * z, v).unwrap();
            assert!(got.abs() <= 1e-12);
        }
    }

    #[test]
    fn inviscid_rate_is_a_quarter() {
        let fit = inviscid_rate_check(&EPS_SWEEP).unwrap();
        assert!((0.2..=0.3).contains(&fit.slope), "{}", fit.slope);
        assert!(fit.values.windows(2).all(|w| w[1] < w[0]));
        assert!(inviscid_rate_check(&[1e-4]).is_err());
    }

    #[test]
    fn weak_limit_of_second_vorticity() {
        let one = weak_vorticity_limit_check(&|_| 1.0, &EPS_SWEEP).unwrap();
        assert_eq!(one.limit, 0.0);
        for (e, d) in one.eps.iter().zip(&one.delta) {
            assert!(*d <= 3.0 * e);
        }
        let sq = weak_vorticity_limit_check(&|z| z * z, &EPS_SWEEP).unwrap();
        assert!((sq.limit + 7.0 / 6.0).abs() < 1e-12);
        assert!(sq.decreasing());
        let s = sq.slope.unwrap();
        assert!((0.4..=0.6).contains(&s), "{s}");
        let lin = weak_vorticity_limit_check(&|z| z, &EPS_SWEEP).unwrap();
        assert!(lin.decreasing());
        assert!((0.4..=0.6).contains(&lin.slope.unwrap()));
        // Adding a constant to ψ changes the limit only through the boundary terms, which cancel.
        let shifted = weak_vorticity_limit_check(&|z| z * z + 3.0, &EPS_SWEEP).unwrap();
        assert!((shifted.limit - sq.limit).abs() < 1e-12);
    }

    #[test]
    fn corrector_norm_rates() {
        for m in 0..=2 {
            for p in [NormExponent::Finite(1), NormExponent::Finite(2), NormExponent::Infinity] {
                let fit = corrector_norm_check(m, p, &EPS_SWEEP).unwrap();
                let want = expected_corrector_slope(m, p);
                assert!((fit.slope - want).abs() <= 0.02, "m={m} p={p:?}: {} vs {want}", fit.slope);
            }
        }
        assert_eq!(expected_corrector_slope(0, NormExponent::Finite(2)), 0.25);
        assert_eq!(expected_corrector_slope(1, NormExponent::Infinity), -0.5);
    }
}
