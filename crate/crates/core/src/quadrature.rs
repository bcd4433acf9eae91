//! Adaptive integration on finite intervals and on the real line.
//!
//! Finite intervals use a 15-point Kronrod rule with its embedded 7-point
//! Gauss rule as the error estimate. Panels are split by strict bisection and
//! a panel is accepted once its error estimate fits its share of the
//! tolerance, proportional to its width. The evaluation order is fixed, so
//! repeated calls are bit-identical.
//!
//! Real-line integrals are truncated to `[-R, R]`, where `R` comes from the
//! exponential envelope of the kernel and the integrand's declared growth.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{factorial, KernelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Mass allowed outside the truncation window of a real-line integral.
    pub truncation_eps: f64,
    /// Gauss-Legendre order of the inner average in the Kantorovich operator.
    pub kantorovich_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            truncation_eps: 1e-12,
            kantorovich_order: 12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.abs_tol) || !positive(self.rel_tol) || !positive(self.truncation_eps) {
            return Err(Error::Config(format!(
                "tolerances must be positive (abs_tol = {}, rel_tol = {}, truncation_eps = {})",
                self.abs_tol, self.rel_tol, self.truncation_eps
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be at least 1".into()));
        }
        if self.kantorovich_order == 0 {
            return Err(Error::Config("kantorovich_order must be at least 1".into()));
        }
        Ok(())
    }

    /// Non-fatal configuration issues. Truncation mass at or above the
    /// absolute tolerance dominates the reported error.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.truncation_eps >= self.abs_tol {
            out.push(format!(
                "truncation_eps ({:e}) is not below abs_tol ({:e})",
                self.truncation_eps, self.abs_tol
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

/// Growth of a real-line integrand relative to the kernel: for `|h| ≥ 1`,
/// `|f(h)| ≤ scale · (1 + |h|)^degree · Ψ(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub params: KernelParams,
    pub scale: f64,
    pub degree: u32,
}

impl Decay {
    /// Integrand bounded by `scale · Ψ`.
    pub fn bounded(params: KernelParams, scale: f64) -> Self {
        Self { params, scale, degree: 0 }
    }

    pub fn polynomial(params: KernelParams, scale: f64, degree: u32) -> Self {
        Self { params, scale, degree }
    }

    /// Upper bound on `∫_{|h| ≥ radius} |f(h)| dh` for `radius ≥ 1`.
    pub fn tail_bound(&self, radius: f64) -> f64 {
        let p = &self.params;
        let beta = p.beta();
        if self.degree == 0 {
            return self.scale * p.q_sum() * (-beta * (radius - 1.0)).exp();
        }
        // scale (q + 1/q) e^{2β} β^{-k} Γ(k+1, β(R+1)), with
        // Γ(k+1, z) = k! e^{-z} Σ_{j ≤ k} z^j / j!.
        let k = self.degree;
        let z = beta * (radius + 1.0);
        let mut term = 1.0;
        let mut series = 1.0;
        for j in 1..=k {
            term *= z / f64::from(j);
            series += term;
        }
        let fact = factorial(k).unwrap_or(f64::INFINITY);
        let log_tail = self.scale.ln() + p.q_sum().ln() + 2.0 * beta - f64::from(k) * beta.ln() + fact.ln() - z
            + series.ln();
        log_tail.exp()
    }

    /// Smallest `R ≥ 1` (up to bisection precision) with `tail_bound(R) ≤ eps`.
    pub fn radius(&self, eps: f64) -> f64 {
        if self.scale <= 0.0 {
            return 1.0;
        }
        if self.degree == 0 {
            let p = &self.params;
            return (1.0 + (self.scale * p.q_sum() / eps).ln() / p.beta()).max(1.0);
        }
        if self.tail_bound(1.0) <= eps {
            return 1.0;
        }
        let mut lo = 1.0;
        let mut hi = 2.0;
        while self.tail_bound(hi) > eps {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tail_bound(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `R = 1 + ln((q + 1/q)/eps)/β`, so that `∫_{|h| ≥ R} Ψ ≤ eps`. Never below 1.
pub fn truncation_radius(params: &KernelParams, eps: f64) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("truncation eps must be positive, got {eps}")));
    }
    Ok(Decay::bounded(*params, 1.0).radius(eps))
}

// Kronrod 15-point abscissae (positive half, descending) and weights, with the
// weights of the embedded 7-point Gauss rule on the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_centre = f(centre);
    let mut kronrod = f_centre * WGK[7];
    let mut gauss = f_centre * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (f_centre - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// A result whose subdivision budget ran out before every panel met its share
/// of the tolerance comes back with `converged == false`.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("integration bounds must satisfy a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(IntegralResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
            converged: true,
        });
    }
    let width = b - a;
    let root = gauss_kronrod_15(&f, a, b);
    let tol = cfg.abs_tol.max(cfg.rel_tol * root.value.abs());

    let mut stack = vec![root];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut subdivisions = 0;
    let mut converged = true;
    while let Some(panel) = stack.pop() {
        let budget = tol * (panel.b - panel.a) / width;
        let mid = 0.5 * (panel.a + panel.b);
        let splittable = mid > panel.a && mid < panel.b;
        if panel.error <= budget || subdivisions >= cfg.max_subdivisions || !splittable {
            if panel.error > budget {
                converged = false;
            }
            value += panel.value;
            error += panel.error;
            continue;
        }
        subdivisions += 1;
        let left = gauss_kronrod_15(&f, panel.a, mid);
        let right = gauss_kronrod_15(&f, mid, panel.b);
        stack.push(right);
        stack.push(left);
    }
    if !value.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(IntegralResult {
        value,
        error_estimate: error,
        subdivisions_used: subdivisions,
        converged,
    })
}

/// Integral of `f` over the real line, truncated to the window implied by
/// `decay` and `cfg.truncation_eps`. The reported error includes the bound on
/// the discarded tails.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, decay: &Decay, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let radius = decay.radius(cfg.truncation_eps);
    let mut result = integrate_interval(f, -radius, radius, cfg)?;
    result.error_estimate += decay.tail_bound(radius);
    Ok(result)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // p1 = P_n(x), p0 = P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
