//! Interpolated operator outputs, used to compose operators without nesting
//! quadratures.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::{apply, OperatorKind, OperatorSpec};
use crate::error::{Error, Result};
use crate::function::BoundedFn;
use crate::kernel::KernelParams;
use crate::quadrature::{Decay, QuadratureConfig};

pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Chebyshev–Lobatto nodes with barycentric evaluation.
    BarycentricChebyshev,
    /// Uniform nodes with a natural cubic spline.
    CubicSpline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximantConfig {
    pub interpolation: Interpolation,
    pub node_count: usize,
    pub residual_ceiling: f64,
}

impl Default for ApproximantConfig {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::BarycentricChebyshev,
            node_count: 64,
            residual_ceiling: 1e-8,
        }
    }
}

impl ApproximantConfig {
    pub fn with_nodes(mut self, node_count: usize) -> Self {
        self.node_count = node_count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < MIN_NODES {
            return Err(Error::Config(format!(
                "approximant needs at least {MIN_NODES} nodes, got {}",
                self.node_count
            )));
        }
        if !(self.residual_ceiling.is_finite() && self.residual_ceiling > 0.0) {
            return Err(Error::Config(format!(
                "residual ceiling must be positive, got {}",
                self.residual_ceiling
            )));
        }
        Ok(())
    }
}

/// Chebyshev–Lobatto points of `[a, b]`, ascending.
pub fn chebyshev_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    let m = (count - 1) as f64;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut nodes: Vec<f64> = (0..count)
        .map(|j| mid - half * (PI * j as f64 / m).cos())
        .collect();
    nodes[0] = a;
    nodes[count - 1] = b;
    nodes
}

fn uniform_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    let h = (b - a) / (count - 1) as f64;
    let mut nodes: Vec<f64> = (0..count).map(|j| a + h * j as f64).collect();
    nodes[count - 1] = b;
    nodes
}

/// Points halfway between consecutive nodes: in angle for Chebyshev nodes,
/// in space for uniform ones.
fn validation_points(a: f64, b: f64, count: usize, interpolation: Interpolation) -> Vec<f64> {
    match interpolation {
        Interpolation::BarycentricChebyshev => {
            let m = (count - 1) as f64;
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            (0..count - 1)
                .map(|j| mid - half * (PI * (j as f64 + 0.5) / m).cos())
                .collect()
        }
        Interpolation::CubicSpline => {
            let nodes = uniform_nodes(a, b, count);
            nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
        }
    }
}

/// Second derivatives of the natural cubic spline through `(xs, ys)`.
fn natural_spline_moments(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        diag[i] = 2.0 * (h0 + h1);
        rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        if i > 1 {
            let w = h0 / diag[i - 1];
            diag[i] -= w * h0;
            rhs[i] -= w * rhs[i - 1];
        }
    }
    for i in (1..n - 1).rev() {
        let h1 = xs[i + 1] - xs[i];
        m[i] = (rhs[i] - h1 * m[i + 1]) / diag[i];
    }
    m
}

/// Sampled operator output on `[a, b]` with an interpolant between nodes.
#[derive(Debug)]
pub struct GridApproximant {
    domain: (f64, f64),
    nodes: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    // barycentric weights or spline second derivatives
    coefficients: Vec<f64>,
    residual: f64,
    ceiling: f64,
    extrapolations: AtomicU64,
}

impl Clone for GridApproximant {
    fn clone(&self) -> Self {
        Self {
            domain: self.domain,
            nodes: self.nodes.clone(),
            values: self.values.clone(),
            interpolation: self.interpolation,
            coefficients: self.coefficients.clone(),
            residual: self.residual,
            ceiling: self.ceiling,
            extrapolations: AtomicU64::new(self.extrapolations.load(Ordering::Relaxed)),
        }
    }
}

impl GridApproximant {
    /// Interpolant through given node values. `nodes` must be the nodes that
    /// `interpolation` prescribes for `domain`; the residual is left at 0.
    pub fn from_values(
        domain: (f64, f64),
        interpolation: Interpolation,
        values: Vec<f64>,
        ceiling: f64,
    ) -> Result<Self> {
        let (a, b) = domain;
        check_domain(a, b)?;
        let count = values.len();
        if count < MIN_NODES {
            return Err(Error::Config(format!("approximant needs at least {MIN_NODES} nodes, got {count}")));
        }
        let nodes = match interpolation {
            Interpolation::BarycentricChebyshev => chebyshev_nodes(a, b, count),
            Interpolation::CubicSpline => uniform_nodes(a, b, count),
        };
        let coefficients = match interpolation {
            Interpolation::BarycentricChebyshev => (0..count)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    if j == 0 || j == count - 1 {
                        0.5 * sign
                    } else {
                        sign
                    }
                })
                .collect(),
            Interpolation::CubicSpline => natural_spline_moments(&nodes, &values),
        };
        Ok(Self {
            domain,
            nodes,
            values,
            interpolation,
            coefficients,
            residual: 0.0,
            ceiling,
            extrapolations: AtomicU64::new(0),
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Largest deviation from the operator output measured at the
    /// validation points.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn is_flagged(&self) -> bool {
        !(self.residual <= self.ceiling)
    }

    /// Number of evaluations that fell outside the domain and were clamped.
    pub fn extrapolation_count(&self) -> u64 {
        self.extrapolations.load(Ordering::Relaxed)
    }

    pub fn extrapolated(&self) -> bool {
        self.extrapolation_count() > 0
    }

    pub fn reset_extrapolations(&self) {
        self.extrapolations.store(0, Ordering::Relaxed);
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let (a, b) = self.domain;
        let n = self.nodes.len();
        if x <= a || x >= b {
            if x < a || x > b {
                self.extrapolations.fetch_add(1, Ordering::Relaxed);
            }
            return if x <= a { self.values[0] } else { self.values[n - 1] };
        }
        match self.interpolation {
            Interpolation::BarycentricChebyshev => self.barycentric(x),
            Interpolation::CubicSpline => self.spline(x),
        }
    }

    fn barycentric(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((xj, fj), wj) in self.nodes.iter().zip(&self.values).zip(&self.coefficients) {
            let d = x - xj;
            if d == 0.0 {
                return *fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }

    fn spline(&self, x: f64) -> f64 {
        let (xs, ys, m) = (&self.nodes, &self.values, &self.coefficients);
        let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1) - 1;
        if x == xs[i] {
            return ys[i];
        }
        let h = xs[i + 1] - xs[i];
        let s = (xs[i + 1] - x) / h;
        let t = (x - xs[i]) / h;
        s * ys[i] + t * ys[i + 1] + ((s * s * s - s) * m[i] + (t * t * t - t) * m[i + 1]) * h * h / 6.0
    }
}

impl BoundedFn for GridApproximant {
    fn eval(&self, x: f64) -> f64 {
        self.evaluate(x)
    }

    fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())) + self.residual
    }
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Domain(format!("approximant domain must satisfy a < b, got [{a}, {b}]")));
    }
    Ok(())
}

/// Samples `apply(f, spec, ·)` at the configured nodes of `[a, b]` and
/// measures the interpolation residual at the validation points. A residual
/// above the ceiling leaves the result flagged.
pub fn make_grid_approximant<F: BoundedFn + ?Sized>(
    f: &F,
    spec: &OperatorSpec,
    domain: (f64, f64),
    cfg: &ApproximantConfig,
    quad: &QuadratureConfig,
) -> Result<GridApproximant> {
    cfg.validate()?;
    let (a, b) = domain;
    check_domain(a, b)?;
    let nodes = match cfg.interpolation {
        Interpolation::BarycentricChebyshev => chebyshev_nodes(a, b, cfg.node_count),
        Interpolation::CubicSpline => uniform_nodes(a, b, cfg.node_count),
    };
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&x| apply(f, spec, x, quad))
        .collect::<Result<_>>()?;
    let mut approximant = GridApproximant::from_values(domain, cfg.interpolation, values, cfg.residual_ceiling)?;
    let checks = validation_points(a, b, cfg.node_count, cfg.interpolation);
    let exact: Vec<f64> = checks
        .par_iter()
        .map(|&x| apply(f, spec, x, quad))
        .collect::<Result<_>>()?;
    approximant.residual = checks
        .iter()
        .zip(&exact)
        .map(|(&x, e)| (approximant.evaluate(x) - e).abs())
        .fold(0.0, f64::max);
    if approximant.is_flagged() {
        log::warn!(
            "approximant on [{a}, {b}] with {} nodes has residual {:e} above {:e}",
            cfg.node_count,
            approximant.residual,
            cfg.residual_ceiling
        );
    }
    Ok(approximant)
}

/// `[a, b]` widened on both sides by `stages · R/n`, where `R` is the
/// truncation radius for a function bounded by `sup_norm`.
pub fn iteration_domain(
    domain: (f64, f64),
    params: &KernelParams,
    sup_norm: f64,
    n: u32,
    stages: usize,
    truncation_eps: f64,
) -> (f64, f64) {
    let radius = Decay::bounded(*params, sup_norm.max(1.0)).radius(truncation_eps);
    let pad = stages as f64 * radius / f64::from(n);
    (domain.0 - pad, domain.1 + pad)
}

/// Domains of the successive stages of the chain `ns`: stage `p` covers the
/// user domain widened by `Σ_{j ≥ p} R/k_j`, so every stage sees the
/// previous one inside its own domain up to the truncation window.
pub fn chain_domain(
    domain: (f64, f64),
    params: &KernelParams,
    sup_norm: f64,
    ns: &[u32],
    truncation_eps: f64,
) -> Vec<(f64, f64)> {
    let radius = Decay::bounded(*params, sup_norm.max(1.0)).radius(truncation_eps);
    let mut pad = 0.0;
    let mut out: Vec<(f64, f64)> = ns
        .iter()
        .rev()
        .map(|&k| {
            pad += radius / f64::from(k);
            (domain.0 - pad, domain.1 + pad)
        })
        .collect();
    out.reverse();
    out
}

fn run_chain<F: BoundedFn + ?Sized>(
    f: &F,
    specs: &[OperatorSpec],
    domain: (f64, f64),
    cfg: &ApproximantConfig,
    quad: &QuadratureConfig,
) -> Result<GridApproximant> {
    check_domain(domain.0, domain.1)?;
    let ns: Vec<u32> = specs.iter().map(|s| s.n).collect();
    let domains = chain_domain(domain, &specs[0].params, f.sup_norm(), &ns, quad.truncation_eps);
    let mut current: Option<GridApproximant> = None;
    for (stage, (spec, dom)) in specs.iter().zip(domains).enumerate() {
        let next = match &current {
            None => make_grid_approximant(f, spec, dom, cfg, quad)?,
            Some(prev) => make_grid_approximant(prev, spec, dom, cfg, quad)?,
        };
        if next.is_flagged() {
            return Err(Error::FlaggedApproximant {
                stage: stage + 1,
                residual: next.residual,
                ceiling: next.ceiling,
            });
        }
        current = Some(next);
    }
    Ok(current.expect("chain has at least one stage"))
}

/// `B_n^r f` as a chain of `r` grid approximants. Stage `j` is built on the
/// domain widened by `(r − j + 1)·R/n`.
pub fn iterate<F: BoundedFn + ?Sized>(
    f: &F,
    spec: &OperatorSpec,
    r: usize,
    domain: (f64, f64),
    cfg: &ApproximantConfig,
    quad: &QuadratureConfig,
) -> Result<GridApproximant> {
    if r == 0 {
        return Err(Error::Config("iteration count r must be at least 1".into()));
    }
    let specs = vec![spec.clone(); r];
    run_chain(f, &specs, domain, cfg, quad)
}

/// `B_{k_r}(… B_{k_1} f)` for a non-decreasing chain `ns`.
#[allow(clippy::too_many_arguments)]
pub fn compose_mixed<F: BoundedFn + ?Sized>(
    f: &F,
    kind: &OperatorKind,
    ns: &[u32],
    params: KernelParams,
    alpha: f64,
    domain: (f64, f64),
    cfg: &ApproximantConfig,
    quad: &QuadratureConfig,
) -> Result<GridApproximant> {
    if ns.is_empty() {
        return Err(Error::Config("mixed chain needs at least one resolution".into()));
    }
    if ns.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config(format!("mixed chain must be non-decreasing, got {ns:?}")));
    }
    let specs = ns
        .iter()
        .map(|&k| OperatorSpec::new(kind.clone(), k, params, alpha))
        .collect::<Result<Vec<_>>>()?;
    run_chain(f, &specs, domain, cfg, quad)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::function::{constant, identity, sin, TestFunction};

    fn unit() -> KernelParams {
        KernelParams::new(1.0, 1.0).unwrap()
    }

    fn basic(n: u32) -> OperatorSpec {
        OperatorSpec::new(OperatorKind::Basic, n, unit(), 0.5).unwrap()
    }

    fn tabulated(f: impl Fn(f64) -> f64, interpolation: Interpolation, count: usize) -> GridApproximant {
        let nodes = match interpolation {
            Interpolation::BarycentricChebyshev => chebyshev_nodes(-2.0, 2.0, count),
            Interpolation::CubicSpline => uniform_nodes(-2.0, 2.0, count),
        };
        let values = nodes.iter().map(|&x| f(x)).collect();
        GridApproximant::from_values((-2.0, 2.0), interpolation, values, 1e-8).unwrap()
    }

    #[test]
    fn nodes_are_ascending() {
        for nodes in [chebyshev_nodes(-3.0, 3.0, 64), uniform_nodes(-3.0, 3.0, 64)] {
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            assert_eq!((nodes[0], nodes[63]), (-3.0, 3.0));
        }
    }

    #[test]
    fn reproduces_node_values() {
        for interp in [Interpolation::BarycentricChebyshev, Interpolation::CubicSpline] {
            let g = tabulated(f64::exp, interp, 17);
            for (x, v) in g.nodes().iter().zip(g.values()) {
                assert_eq!(g.evaluate(*x), *v);
            }
            assert!(!g.extrapolated());
        }
    }

    #[test]
    fn interpolation_accuracy() {
        let cheb = tabulated(f64::sin, Interpolation::BarycentricChebyshev, 32);
        let spline = tabulated(f64::sin, Interpolation::CubicSpline, 201);
        for i in 0..=100 {
            let x = -1.9 + 3.8 * f64::from(i) / 100.0;
            assert_abs_diff_eq!(cheb.evaluate(x), x.sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(spline.evaluate(x), x.sin(), epsilon = 1e-5);
        }
        // natural spline is exact on straight lines
        let line = tabulated(|x| 3.0 * x - 1.0, Interpolation::CubicSpline, 9);
        assert_abs_diff_eq!(line.evaluate(0.123), 3.0 * 0.123 - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn clamps_outside_domain() {
        let g = tabulated(|x| x, Interpolation::BarycentricChebyshev, 9);
        assert_eq!(g.evaluate(5.0), 2.0);
        assert_eq!(g.evaluate(-7.0), -2.0);
        assert_eq!(g.extrapolation_count(), 2);
        g.reset_extrapolations();
        assert!(!g.extrapolated());
    }

    #[test]
    fn constant_approximant() {
        let quad = QuadratureConfig::default();
        let cfg = ApproximantConfig::default().with_nodes(16);
        let g = make_grid_approximant(&constant(1.5), &basic(9), (-3.0, 3.0), &cfg, &quad).unwrap();
        for x in [-3.0, -0.2, 1.7, 3.0] {
            assert_abs_diff_eq!(g.evaluate(x), 1.5, epsilon = 1e-10);
        }
        assert!(g.residual() <= 1e-10);
    }

    #[test]
    fn identity_approximant() {
        let quad = QuadratureConfig::default();
        let cfg = ApproximantConfig::default();
        let g = make_grid_approximant(&identity(4.0), &basic(16), (-3.0, 3.0), &cfg, &quad).unwrap();
        assert!(g.residual() <= 1e-8, "residual {}", g.residual());
        assert!(!g.is_flagged());
        assert_abs_diff_eq!(g.evaluate(0.77), 0.77, epsilon = 1e-8);
    }

    #[test]
    fn refinement_does_not_increase_residual() {
        let quad = QuadratureConfig::default();
        let f = sin();
        let coarse = ApproximantConfig::default().with_nodes(12);
        let fine = ApproximantConfig::default().with_nodes(24);
        let a = make_grid_approximant(&f, &basic(9), (-3.0, 3.0), &coarse, &quad).unwrap();
        let b = make_grid_approximant(&f, &basic(9), (-3.0, 3.0), &fine, &quad).unwrap();
        assert!(b.residual() <= a.residual());
        assert!(a.is_flagged());
    }

    #[test]
    fn rejects_bad_input() {
        let quad = QuadratureConfig::default();
        let small = ApproximantConfig::default().with_nodes(4);
        assert!(make_grid_approximant(&sin(), &basic(9), (-1.0, 1.0), &small, &quad).is_err());
        let cfg = ApproximantConfig::default();
        assert!(make_grid_approximant(&sin(), &basic(9), (1.0, 1.0), &cfg, &quad).is_err());
        assert!(iterate(&sin(), &basic(9), 0, (-1.0, 1.0), &cfg, &quad).is_err());
        let kind = OperatorKind::Basic;
        assert!(compose_mixed(&sin(), &kind, &[16, 9], unit(), 0.5, (-1.0, 1.0), &cfg, &quad).is_err());
        assert!(compose_mixed(&sin(), &kind, &[], unit(), 0.5, (-1.0, 1.0), &cfg, &quad).is_err());
    }

    #[test]
    fn flagged_stage_aborts() {
        let quad = QuadratureConfig::default();
        let cfg = ApproximantConfig::default().with_nodes(8);
        let err = iterate(&sin(), &basic(9), 2, (-3.0, 3.0), &cfg, &quad).unwrap_err();
        assert!(matches!(err, Error::FlaggedApproximant { stage: 1, .. }));
    }

    #[test]
    fn single_stage_matches_direct_approximant() {
        let quad = QuadratureConfig::default();
        let cfg = ApproximantConfig::default();
        let spec = basic(16);
        let dom = iteration_domain((-3.0, 3.0), &spec.params, 1.0, 16, 1, quad.truncation_eps);
        let direct = make_grid_approximant(&sin(), &spec, dom, &cfg, &quad).unwrap();
        let once = iterate(&sin(), &spec, 1, (-3.0, 3.0), &cfg, &quad).unwrap();
        assert_eq!(direct.values(), once.values());
        let mixed =
            compose_mixed(&sin(), &OperatorKind::Basic, &[16], unit(), 0.5, (-3.0, 3.0), &cfg, &quad).unwrap();
        assert_eq!(direct.values(), mixed.values());
    }

    #[test]
    fn iterated_identity_and_constant() {
        let quad = QuadratureConfig::default();
        let cfg = ApproximantConfig::default();
        let id = identity(12.0);
        let g = iterate(&id, &basic(16), 3, (-3.0, 3.0), &cfg, &quad).unwrap();
        for x in [-2.5, 0.0, 1.3] {
            assert_abs_diff_eq!(g.evaluate(x), x, epsilon = 3e-8);
        }
        let c = compose_mixed(&constant(-2.0), &OperatorKind::Kantorovich, &[9, 16, 16], unit(), 0.5, (-3.0, 3.0), &cfg, &quad)
            .unwrap();
        assert_abs_diff_eq!(c.evaluate(0.4), -2.0, epsilon = 1e-9);
    }

    #[test]
    fn stage_domains_nest() {
        let doms = chain_domain((-3.0, 3.0), &unit(), 1.0, &[9, 16, 25], 1e-12);
        assert_eq!(doms.len(), 3);
        assert!(doms.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
        let r = crate::quadrature::truncation_radius(&unit(), 1e-12).unwrap();
        assert_abs_diff_eq!(doms[2].1, 3.0 + r / 25.0, epsilon = 1e-12);
        let same = chain_domain((-3.0, 3.0), &unit(), 1.0, &[16, 16, 16], 1e-12);
        let it = iteration_domain((-3.0, 3.0), &unit(), 1.0, 16, 3, 1e-12);
        assert_abs_diff_eq!(same[0].1, it.1, epsilon = 1e-12);
    }

    #[test]
    fn approximant_is_a_bounded_function() {
        let g = tabulated(|x| x.cos(), Interpolation::BarycentricChebyshev, 21);
        let f: &dyn BoundedFn = &g;
        assert_abs_diff_eq!(f.sup_norm(), 1.0, epsilon = 1e-12);
        let tf = TestFunction::new("cos", 1.0, f64::cos);
        assert_abs_diff_eq!(f.eval(0.3), tf.value(0.3), epsilon = 1e-12);
    }
}
