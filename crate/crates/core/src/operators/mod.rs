//! The basic, Kantorovich and quadrature-type convolution operators.
//!
//! All three are evaluated in the substituted form `h = nx − v`:
//!
//! * basic:        `∫ f(x − h/n) Ψ(h) dh`
//! * Kantorovich:  `∫ (n ∫_0^{1/n} f(t + x − h/n) dt) Ψ(h) dh`
//! * quadrature:   `∫ Σ_s w_s f(x − h/n + s/(nr)) Ψ(h) dh`
//!
//! The inner Kantorovich average uses a fixed Gauss-Legendre rule; the outer
//! integral is the adaptive real-line quadrature, truncated by the kernel
//! envelope scaled with the sup norm of `f`.

mod approximant;

pub use approximant::{
    chain_domain, chebyshev_nodes, compose_mixed, iterate, iteration_domain, make_grid_approximant, ApproximantConfig,
    GridApproximant, Interpolation,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{BoundedFn, TestFunction};
use crate::kernel::KernelParams;
use crate::quadrature::{gauss_legendre, integrate_real_line, Decay, QuadratureConfig};

pub const DEFAULT_WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OperatorKind {
    Basic,
    Kantorovich,
    /// Shifted samples `s/(nr)`, `s = 1..=r`, combined with weights `w_s`.
    QuadratureType(Vec<f64>),
}

impl OperatorKind {
    /// Quadrature-type kind with validated weights.
    pub fn quadrature(weights: Vec<f64>) -> Result<Self> {
        Self::quadrature_with_tolerance(weights, DEFAULT_WEIGHT_TOLERANCE)
    }

    pub fn quadrature_with_tolerance(weights: Vec<f64>, tol: f64) -> Result<Self> {
        validate_weights(&weights, tol)?;
        Ok(Self::QuadratureType(weights))
    }

    pub fn uniform_quadrature(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Config("quadrature kind needs at least one weight".into()));
        }
        Self::quadrature(vec![1.0 / r as f64; r])
    }

    pub fn tag(&self) -> KindTag {
        match self {
            Self::Basic => KindTag::Basic,
            Self::Kantorovich => KindTag::Kantorovich,
            Self::QuadratureType(_) => KindTag::Quadrature,
        }
    }

    pub fn name(&self) -> &'static str {
        self.tag().name()
    }
}

/// Operator kind without the quadrature weights, for bound formulas and
/// reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Basic,
    Kantorovich,
    Quadrature,
}

impl KindTag {
    pub fn name(self) -> &'static str {
        match self {
            Self::Basic => "basic",
            Self::Kantorovich => "kantorovich",
            Self::Quadrature => "quadrature",
        }
    }
}

fn validate_weights(weights: &[f64], tol: f64) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Config("quadrature kind needs at least one weight".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Config(format!("weights must be nonnegative, got {weights:?}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::Config(format!("weights must sum to 1 within {tol:e}, got {sum}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub n: u32,
    pub params: KernelParams,
    /// Exponent of the bound formulas; carried along, unused by evaluation.
    pub alpha: f64,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, n: u32, params: KernelParams, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("resolution n must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if let OperatorKind::QuadratureType(w) = &kind {
            validate_weights(w, DEFAULT_WEIGHT_TOLERANCE)?;
        }
        Ok(Self { kind, n, params, alpha })
    }

    /// Same operator at another resolution.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.kind.clone(), n, self.params, self.alpha)
    }
}

/// Offsets and weights of the local samples each operator takes around
/// `x − h/n`, already divided by `n`: the operator integrates
/// `Σ_i weight_i · f(x − h/n + offset_i)` against `Ψ(h)`.
struct SampleRule {
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl SampleRule {
    fn for_spec(spec: &OperatorSpec, cfg: &QuadratureConfig) -> Self {
        let n = f64::from(spec.n);
        match &spec.kind {
            OperatorKind::Basic => Self {
                offsets: vec![0.0],
                weights: vec![1.0],
            },
            OperatorKind::Kantorovich => {
                let (nodes, weights) = gauss_legendre(cfg.kantorovich_order);
                Self {
                    offsets: nodes.iter().map(|t| 0.5 * (1.0 + t) / n).collect(),
                    weights: weights.iter().map(|w| 0.5 * w).collect(),
                }
            }
            OperatorKind::QuadratureType(w) => {
                let r = w.len() as f64;
                Self {
                    offsets: (1..=w.len()).map(|s| s as f64 / (n * r)).collect(),
                    weights: w.clone(),
                }
            }
        }
    }

    #[inline]
    fn sample<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, centre: f64) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| w * f(centre + o))
            .sum()
    }
}

fn convolve<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    spec: &OperatorSpec,
    x: f64,
    decay: &Decay,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("evaluation point must be finite, got {x}")));
    }
    let rule = SampleRule::for_spec(spec, cfg);
    let n = f64::from(spec.n);
    let params = spec.params;
    let result = integrate_real_line(|h| rule.sample(f, x - h / n) * params.psi_value(h), decay, cfg)?;
    if !result.converged {
        return Err(Error::Quadrature {
            operator: spec.kind.name(),
            x,
            n: spec.n,
            error_estimate: result.error_estimate,
        });
    }
    Ok(result.value)
}

fn require_kind(spec: &OperatorSpec, want: KindTag) -> Result<()> {
    if spec.kind.tag() == want {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "operator spec is {} but {} was requested",
            spec.kind.name(),
            want.name()
        )))
    }
}

fn apply_bounded<F: BoundedFn + ?Sized>(f: &F, spec: &OperatorSpec, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let decay = Decay::bounded(spec.params, f.sup_norm());
    convolve(&|v: f64| f.eval(v), spec, x, &decay, cfg)
}

/// `B_n(f)(x) = ∫ f(x − h/n) Ψ(h) dh`.
pub fn apply_basic<F: BoundedFn + ?Sized>(f: &F, spec: &OperatorSpec, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    require_kind(spec, KindTag::Basic)?;
    apply_bounded(f, spec, x, cfg)
}

/// `B*_n(f)(x) = n ∫ (∫_0^{1/n} f(t + x − h/n) dt) Ψ(h) dh`.
pub fn apply_kantorovich<F: BoundedFn + ?Sized>(
    f: &F,
    spec: &OperatorSpec,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    require_kind(spec, KindTag::Kantorovich)?;
    apply_bounded(f, spec, x, cfg)
}

/// `B̄_n(f)(x) = ∫ Σ_s w_s f(x − h/n + s/(nr)) Ψ(h) dh`.
pub fn apply_quadrature_kind<F: BoundedFn + ?Sized>(
    f: &F,
    spec: &OperatorSpec,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    require_kind(spec, KindTag::Quadrature)?;
    apply_bounded(f, spec, x, cfg)
}

/// Evaluates whichever operator `spec` describes.
pub fn apply<F: BoundedFn + ?Sized>(f: &F, spec: &OperatorSpec, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    match spec.kind {
        OperatorKind::Basic => apply_basic(f, spec, x, cfg),
        OperatorKind::Kantorovich => apply_kantorovich(f, spec, x, cfg),
        OperatorKind::QuadratureType(_) => apply_quadrature_kind(f, spec, x, cfg),
    }
}

/// Operator output at every point, evaluated in parallel and returned in
/// input order.
pub fn apply_on_grid<F: BoundedFn + ?Sized>(
    f: &F,
    spec: &OperatorSpec,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    points.par_iter().map(|&x| apply(f, spec, x, cfg)).collect()
}

/// `k`-th derivative of the operator output, as the operator applied to the
/// analytic `f^{(k)}`.
pub fn apply_derivative(f: &TestFunction, spec: &OperatorSpec, k: usize, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let derivative = f.derivative(k)?;
    apply(derivative, spec, x, cfg)
}

/// The operator applied to `v ↦ (v − x)^k`, evaluated at `x`.
///
/// The operators commute with translation, so this is the operator applied
/// to `v ↦ v^k` at 0, which is how it is computed.
pub fn central_moment(spec: &OperatorSpec, x: f64, k: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition {
            hypothesis: "moment order k >= 1",
            detail: "k = 0".into(),
        });
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("evaluation point must be finite, got {x}")));
    }
    // every sample offset lies in [0, 1/n], so |sample| ≤ ((1 + |h|)/n)^k
    let n = f64::from(spec.n);
    let decay = Decay::polynomial(spec.params, n.powi(-(k as i32)), k);
    let power = |v: f64| v.powi(k as i32);
    convolve(&power, spec, 0.0, &decay, cfg)
}
