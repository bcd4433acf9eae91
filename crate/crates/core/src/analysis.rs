//! Measurement side: moduli of continuity and sup errors on a grid,
//! convergence sweeps against the Jackson-type bounds, smoothness checks and
//! empirical rates.

use std::time::Instant;

use serde::Serialize;

use crate::bounds::{jackson_bound, modulus_argument, BoundKind};
use crate::error::{Error, Result};
use crate::function::{BoundedFn, TestFunction};
use crate::kernel::{rate_window, KernelParams};
use crate::operators::{apply_on_grid, KindTag, OperatorKind, OperatorSpec};
use crate::quadrature::{integrate_interval, integrate_real_line, Decay, IntegralResult, QuadratureConfig};

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_DOMAIN: (f64, f64) = (-3.0, 3.0);

/// Slack allowed when a grid estimate of `ω` is compared with a closed form.
pub const MODULUS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementGrid {
    domain: (f64, f64),
    points: Vec<f64>,
}

impl Default for MeasurementGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_DOMAIN.0, DEFAULT_DOMAIN.1, DEFAULT_GRID_POINTS).expect("default grid is valid")
    }
}

impl MeasurementGrid {
    pub fn uniform(a: f64, b: f64, count: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Config(format!("grid domain must satisfy a < b, got [{a}, {b}]")));
        }
        if count < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {count}")));
        }
        let h = (b - a) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| a + h * i as f64).collect();
        points[count - 1] = b;
        Ok(Self { domain: (a, b), points })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {}", points.len())));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid points must be finite and strictly increasing".into()));
        }
        Ok(Self {
            domain: (points[0], points[points.len() - 1]),
            points,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap between neighbouring points.
    pub fn spacing(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn check_resolution(&self, theta: f64) -> Result<()> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Precondition {
                hypothesis: "theta > 0",
                detail: format!("theta = {theta}"),
            });
        }
        let h = self.spacing();
        if h > theta / 4.0 {
            return Err(Error::Precondition {
                hypothesis: "grid spacing <= theta/4",
                detail: format!("spacing = {h}, theta = {theta}"),
            });
        }
        Ok(())
    }
}

/// `max |v_i − v_j|` over grid pairs with `|x_i − x_j| ≤ θ`.
pub fn grid_modulus(points: &[f64], values: &[f64], theta: f64) -> f64 {
    debug_assert_eq!(points.len(), values.len());
    // absorb rounding in the node positions
    let reach = theta * (1.0 + 1e-10);
    let mut best = 0.0_f64;
    for i in 0..points.len() {
        let (mut lo, mut hi) = (values[i], values[i]);
        for j in i + 1..points.len() {
            if points[j] - points[i] > reach {
                break;
            }
            lo = lo.min(values[j]);
            hi = hi.max(values[j]);
        }
        best = best.max(hi - lo);
    }
    best
}

/// `ω(f, θ)` for a catalog function. With a closed form, the grid estimate is
/// checked against it and the closed form is returned; otherwise the grid
/// estimate (a lower bound) is returned.
pub fn estimate_modulus(f: &TestFunction, theta: f64, grid: &MeasurementGrid) -> Result<f64> {
    let estimate = grid_estimate(f, theta, grid)?;
    match f.modulus(theta) {
        Some(closed_form) => {
            if estimate > closed_form + MODULUS_SLACK {
                return Err(Error::ModulusMismatch {
                    function: f.name().to_string(),
                    theta,
                    estimate,
                    closed_form,
                });
            }
            Ok(closed_form)
        }
        None => Ok(estimate),
    }
}

/// Grid estimate of `ω(f, θ)` without consulting the closed form.
pub fn grid_estimate(f: &TestFunction, theta: f64, grid: &MeasurementGrid) -> Result<f64> {
    grid.check_resolution(theta)?;
    let values: Vec<f64> = grid.points.iter().map(|&x| f.value(x)).collect();
    Ok(grid_modulus(&grid.points, &values, theta))
}

/// `max |approx(x) − f(x)|` over the grid.
pub fn sup_error(f: &TestFunction, approx: impl Fn(f64) -> f64, grid: &MeasurementGrid) -> f64 {
    grid.points
        .iter()
        .map(|&x| (approx(x) - f.value(x)).abs())
        .fold(0.0, f64::max)
}

/// Same as [`sup_error`] for values already sampled on the grid.
pub fn sup_error_values(f: &TestFunction, values: &[f64], grid: &MeasurementGrid) -> f64 {
    grid.points
        .iter()
        .zip(values)
        .map(|(&x, v)| (v - f.value(x)).abs())
        .fold(0.0, f64::max)
}

/// `∫ Ψ` over the real line.
pub fn kernel_mass(params: &KernelParams, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    integrate_real_line(|h| params.psi_value(h), &Decay::bounded(*params, 1.0), cfg)
}

/// `∫_{|h| ≥ window} Ψ`, by symmetry twice the right tail. The error
/// estimate includes the truncation allowance.
pub fn kernel_tail_mass(params: &KernelParams, window: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    if !(window.is_finite() && window >= 0.0) {
        return Err(Error::Domain(format!("tail window must be nonnegative, got {window}")));
    }
    let decay = Decay::bounded(*params, 1.0);
    let far = decay.radius(cfg.truncation_eps).max(window + 1.0);
    let half = integrate_interval(|h| params.psi_value(h), window, far, cfg)?;
    Ok(IntegralResult {
        value: 2.0 * half.value,
        error_estimate: 2.0 * half.error_estimate + decay.tail_bound(far),
        ..half
    })
}

/// `∫ |h|^k Ψ(h) dh`.
pub fn kernel_abs_moment(params: &KernelParams, k: u32, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let decay = Decay::polynomial(*params, 1.0, k);
    let far = decay.radius(cfg.truncation_eps);
    let half = integrate_interval(|h| h.powi(k as i32) * params.psi_value(h), 0.0, far, cfg)?;
    Ok(IntegralResult {
        value: 2.0 * half.value,
        error_estimate: 2.0 * half.error_estimate + decay.tail_bound(far),
        ..half
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub function: String,
    pub kind: KindTag,
    pub n: u32,
    pub alpha: f64,
    pub q: f64,
    pub beta: f64,
    pub measured_sup_error: f64,
    pub bound_value: Option<f64>,
    pub bound_kind: Option<BoundKind>,
    /// `n^{1−α} > 2`, the hypothesis of the bound.
    pub hypothesis_met: bool,
    pub satisfied: bool,
    /// Why this `n` produced no measurement or no bound.
    pub error: Option<String>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

impl ConvergenceRecord {
    /// A bound that applies and is exceeded, or could not be checked.
    pub fn is_violation(&self) -> bool {
        self.hypothesis_met && !self.satisfied
    }
}

/// One record per `n`, in input order. A failing `n` is recorded and the
/// sweep moves on.
pub fn run_convergence_sweep(
    f: &TestFunction,
    kind: &OperatorKind,
    ns: &[u32],
    alpha: f64,
    params: KernelParams,
    grid: &MeasurementGrid,
    quad: &QuadratureConfig,
) -> Vec<ConvergenceRecord> {
    ns.iter()
        .map(|&n| {
            let start = Instant::now();
            let mut record = ConvergenceRecord {
                function: f.name().to_string(),
                kind: kind.tag(),
                n,
                alpha,
                q: params.q(),
                beta: params.beta(),
                measured_sup_error: f64::NAN,
                bound_value: None,
                bound_kind: None,
                hypothesis_met: false,
                satisfied: false,
                error: None,
                runtime_ms: 0.0,
            };
            if let Err(e) = measure(f, kind, n, alpha, params, grid, quad, &mut record) {
                log::warn!("sweep {} {} n = {n}: {e}", f.name(), kind.name());
                record.error = Some(e.to_string());
            }
            record.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            record
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn measure(
    f: &TestFunction,
    kind: &OperatorKind,
    n: u32,
    alpha: f64,
    params: KernelParams,
    grid: &MeasurementGrid,
    quad: &QuadratureConfig,
    record: &mut ConvergenceRecord,
) -> Result<()> {
    record.hypothesis_met = rate_window(n, alpha).is_ok();
    let spec = OperatorSpec::new(kind.clone(), n, params, alpha)?;
    let values = apply_on_grid(f, &spec, grid.points(), quad)?;
    record.measured_sup_error = sup_error_values(f, &values, grid);
    let theta = modulus_argument(kind.tag(), n, alpha);
    let omega = estimate_modulus(f, theta, grid)?;
    match jackson_bound(kind.tag(), omega, &params, n, alpha, f.sup_norm()) {
        Ok(bound) => {
            record.bound_value = Some(bound.value);
            record.bound_kind = Some(bound.kind);
            record.satisfied = record.measured_sup_error <= bound.value;
            Ok(())
        }
        Err(Error::Precondition { hypothesis, detail }) => {
            record.error = Some(format!("hypothesis not met: {hypothesis} ({detail})"));
            Ok(())
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessRecord {
    pub theta: f64,
    pub omega_f: f64,
    pub omega_bf: f64,
    pub satisfied: bool,
}

/// Compares grid moduli of `f` and of the operator output, with slack
/// `4 · abs_tol`.
pub fn check_smoothness_preservation(
    f: &TestFunction,
    spec: &OperatorSpec,
    thetas: &[f64],
    grid: &MeasurementGrid,
    quad: &QuadratureConfig,
) -> Result<Vec<SmoothnessRecord>> {
    for &theta in thetas {
        grid.check_resolution(theta)?;
    }
    let fv: Vec<f64> = grid.points.iter().map(|&x| f.value(x)).collect();
    let bv = apply_on_grid(f, spec, grid.points(), quad)?;
    let slack = 4.0 * quad.abs_tol;
    Ok(thetas
        .iter()
        .map(|&theta| {
            let omega_f = grid_modulus(&grid.points, &fv, theta);
            let omega_bf = grid_modulus(&grid.points, &bv, theta);
            SmoothnessRecord {
                theta,
                omega_f,
                omega_bf,
                satisfied: omega_bf <= omega_f + slack,
            }
        })
        .collect())
}

/// Least-squares slope of `ln(error)` against `ln(n)`; `+∞` when some error
/// is zero.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Precondition {
            hypothesis: "at least 2 points for a slope",
            detail: format!("{} points", points.len()),
        });
    }
    if points.iter().any(|&(_, e)| e <= 0.0) {
        return Ok(f64::INFINITY);
    }
    if points.iter().any(|&(n, e)| !(n > 0.0 && n.is_finite() && e.is_finite())) {
        return Err(Error::Domain("slope needs positive finite n and finite errors".into()));
    }
    let m = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(n, e)| (n.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("slope needs at least two distinct n".into()));
    }
    Ok(sxy / sxx)
}

/// Empirical order of the measured errors of a sweep.
pub fn fit_rate(records: &[ConvergenceRecord]) -> Result<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.measured_sup_error.is_finite())
        .map(|r| (f64::from(r.n), r.measured_sup_error))
        .collect();
    if points.len() < 3 {
        return Err(Error::Precondition {
            hypothesis: "at least 3 measured records",
            detail: format!("{} records", points.len()),
        });
    }
    log_log_slope(&points)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::function::{by_name, constant, identity, sin};

    fn unit() -> KernelParams {
        KernelParams::new(1.0, 1.0).unwrap()
    }

    fn fake_records(errors: &[(u32, f64)]) -> Vec<ConvergenceRecord> {
        errors
            .iter()
            .map(|&(n, e)| ConvergenceRecord {
                function: "synthetic".into(),
                kind: KindTag::Basic,
                n,
                alpha: 0.5,
                q: 1.0,
                beta: 1.0,
                measured_sup_error: e,
                bound_value: None,
                bound_kind: None,
                hypothesis_met: false,
                satisfied: false,
                error: None,
                runtime_ms: 0.0,
            })
            .collect()
    }

    #[test]
    fn kernel_integrals() {
        let cfg = QuadratureConfig::default();
        let p = unit();
        assert_abs_diff_eq!(kernel_mass(&p, &cfg).unwrap().value, 1.0, epsilon = 1e-10);
        // 50-digit references
        assert_abs_diff_eq!(kernel_tail_mass(&p, 3.0, &cfg).unwrap().value, 0.108_778_083_125_162_76, epsilon = 1e-12);
        let moments = [
            1.467_638_074_041_322_1,
            3.623_201_467_029_786_2,
            12.229_516_832_475_658,
            52.237_312_083_260_71,
            270.768_569_916_655_64,
        ];
        for (k, m) in (1..=5).zip(moments) {
            assert_abs_diff_eq!(kernel_abs_moment(&p, k, &cfg).unwrap().value, m, epsilon = 1e-9 * m);
        }
    }

    #[test]
    fn grid_shape() {
        let g = MeasurementGrid::default();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.domain(), (-3.0, 3.0));
        assert_abs_diff_eq!(g.spacing(), 0.003, epsilon = 1e-12);
        assert!(MeasurementGrid::uniform(1.0, 1.0, 10).is_err());
        assert!(MeasurementGrid::uniform(0.0, 1.0, 1).is_err());
        assert!(MeasurementGrid::from_points(vec![0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn modulus_examples() {
        let g = MeasurementGrid::default();
        let id = identity(4.0);
        assert_abs_diff_eq!(grid_estimate(&id, 0.3, &g).unwrap(), 0.3, epsilon = 0.003);
        assert_abs_diff_eq!(estimate_modulus(&id, 0.3, &g).unwrap(), 0.3, epsilon = 1e-15);
        assert_eq!(estimate_modulus(&constant(2.0), 0.3, &g).unwrap(), 0.0);
        let w = estimate_modulus(&sin(), 0.1, &g).unwrap();
        assert!(w <= 0.1 && w >= 2.0 * 0.05f64.sin() - 1e-9);
        let raw = grid_estimate(&sin(), 0.1, &g).unwrap();
        assert!(raw <= w + MODULUS_SLACK);
        assert!(matches!(
            estimate_modulus(&sin(), 0.01, &g),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn modulus_mismatch_is_reported() {
        let g = MeasurementGrid::default();
        let wrong = TestFunction::new("sin", 1.0, f64::sin).with_modulus(|t| 0.5 * t);
        assert!(matches!(
            estimate_modulus(&wrong, 0.2, &g),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn modulus_monotone_and_subadditive() {
        let g = MeasurementGrid::default();
        let f = by_name("gaussian", 3.0).unwrap();
        let thetas = [0.05, 0.1, 0.2, 0.4, 0.8];
        let w: Vec<f64> = thetas.iter().map(|&t| grid_estimate(&f, t, &g).unwrap()).collect();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        let sum = grid_estimate(&f, 0.3, &g).unwrap();
        assert!(sum <= w[1] + w[2] + 1e-12);
    }

    #[test]
    fn sup_error_examples() {
        let g = MeasurementGrid::default();
        let f = sin();
        assert_eq!(sup_error(&f, f64::sin, &g), 0.0);
        assert_abs_diff_eq!(sup_error(&f, |x| x.sin() + 0.01, &g), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn constant_sweep() {
        let g = MeasurementGrid::uniform(-3.0, 3.0, 101).unwrap();
        let records = run_convergence_sweep(
            &constant(1.0),
            &OperatorKind::Basic,
            &[4, 9, 16],
            0.5,
            unit(),
            &g,
            &QuadratureConfig::default(),
        );
        assert_eq!(records.iter().map(|r| r.n).collect::<Vec<_>>(), vec![4, 9, 16]);
        assert!(records.iter().all(|r| r.measured_sup_error <= 1e-9));
        assert!(!records[0].hypothesis_met && records[0].error.is_some() && !records[0].is_violation());
        assert!(records[1..].iter().all(|r| r.hypothesis_met && r.satisfied));
    }

    #[test]
    fn smoothness_of_identity() {
        let g = MeasurementGrid::default();
        let spec = OperatorSpec::new(OperatorKind::Basic, 16, unit(), 0.5).unwrap();
        let cfg = QuadratureConfig::default();
        let out = check_smoothness_preservation(&identity(4.0), &spec, &[0.05, 0.3], &g, &cfg).unwrap();
        for r in out {
            assert!(r.satisfied);
            assert_abs_diff_eq!(r.omega_f, r.omega_bf, epsilon = 1e-9);
            assert_abs_diff_eq!(r.omega_f, r.theta, epsilon = 0.003);
        }
        let out = check_smoothness_preservation(&constant(1.0), &spec, &[0.1], &g, &cfg).unwrap();
        assert_eq!(out[0].omega_f, 0.0);
        assert!(out[0].omega_bf <= 1e-9);
    }

    #[test]
    fn rate_fits() {
        let ns = [9u32, 16, 25, 36, 49];
        let inv: Vec<(u32, f64)> = ns.iter().map(|&n| (n, 3.0 / f64::from(n))).collect();
        assert_abs_diff_eq!(fit_rate(&fake_records(&inv)).unwrap(), -1.0, epsilon = 1e-12);
        let sqrt: Vec<(u32, f64)> = ns.iter().map(|&n| (n, 0.7 / f64::from(n).sqrt())).collect();
        assert_abs_diff_eq!(fit_rate(&fake_records(&sqrt)).unwrap(), -0.5, epsilon = 1e-12);
        let zeros: Vec<(u32, f64)> = ns.iter().map(|&n| (n, 0.0)).collect();
        assert_eq!(fit_rate(&fake_records(&zeros)).unwrap(), f64::INFINITY);
        assert!(fit_rate(&fake_records(&inv[..2])).is_err());
    }
}
