//! Test functions with their known sup norms, analytic derivatives and
//! moduli of continuity, plus the named catalog the harness draws from.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function together with a bound on `|f|`. This is what the
/// operators integrate against the kernel.
pub trait BoundedFn: Sync {
    fn eval(&self, x: f64) -> f64;

    /// A bound on `|f|` over the whole real line. It sets the truncation
    /// window of every operator evaluation.
    fn sup_norm(&self) -> f64;
}

#[derive(Clone)]
pub struct TestFunction {
    name: String,
    eval: RealFn,
    derivatives: Vec<TestFunction>,
    sup_norm: f64,
    modulus: Option<RealFn>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("sup_norm", &self.sup_norm)
            .field("derivatives", &self.derivatives.len())
            .field("modulus", &self.modulus.is_some())
            .finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, sup_norm: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            derivatives: Vec::new(),
            sup_norm,
            modulus: None,
        }
    }

    /// Attaches a closed-form modulus of continuity `θ ↦ ω(f, θ)`.
    pub fn with_modulus(mut self, modulus: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.modulus = Some(Arc::new(modulus));
        self
    }

    /// Attaches analytic derivatives `f', f'', …` in order.
    pub fn with_derivatives(mut self, derivatives: Vec<TestFunction>) -> Self {
        self.derivatives = derivatives;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn derivatives(&self) -> &[TestFunction] {
        &self.derivatives
    }

    /// The `k`-th derivative, `k ≥ 1`.
    pub fn derivative(&self, k: usize) -> Result<&TestFunction> {
        k.checked_sub(1)
            .and_then(|i| self.derivatives.get(i))
            .ok_or_else(|| Error::MissingDerivative {
                function: self.name.clone(),
                order: k,
            })
    }

    /// Closed-form `ω(f, θ)`, if known.
    pub fn modulus(&self, theta: f64) -> Option<f64> {
        self.modulus.as_ref().map(|m| m(theta))
    }

    pub fn has_modulus(&self) -> bool {
        self.modulus.is_some()
    }

    /// Checks `|f| ≤ sup_norm` on `points`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate_sup_norm(&self, points: &[f64]) -> Result<()> {
        for &x in points {
            let v = self.value(x);
            if !(v.abs() <= self.sup_norm * (1.0 + 1e-12) + 1e-300) {
                return Err(Error::Domain(format!(
                    "|{}({x})| = {} exceeds declared sup norm {}",
                    self.name,
                    v.abs(),
                    self.sup_norm
                )));
            }
        }
        Ok(())
    }

    /// Spot-checks each analytic derivative against a central difference of
    /// the previous one.
    pub fn validate_derivatives(&self, points: &[f64], tol: f64) -> Result<()> {
        let step = 1e-5;
        let mut prev = self;
        for (i, d) in self.derivatives.iter().enumerate() {
            for &x in points {
                let fd = (prev.value(x + step) - prev.value(x - step)) / (2.0 * step);
                let exact = d.value(x);
                if (fd - exact).abs() > tol {
                    return Err(Error::Domain(format!(
                        "derivative {} of `{}` disagrees with finite difference at x = {x}: {exact} vs {fd}",
                        i + 1,
                        self.name
                    )));
                }
            }
            prev = d;
        }
        Ok(())
    }
}

impl BoundedFn for TestFunction {
    fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
}

/// `ω(sin, θ) = ω(cos, θ) = 2 sin(θ/2)` for `θ ≤ π`, and 2 beyond.
fn trig_modulus(theta: f64) -> f64 {
    2.0 * (0.5 * theta.min(std::f64::consts::PI)).sin()
}

fn trig(name: &str, phase: usize) -> TestFunction {
    // phase 0: sin, 1: cos, 2: -sin, 3: -cos (each the derivative of the last)
    let f: fn(f64) -> f64 = match phase % 4 {
        0 => f64::sin,
        1 => f64::cos,
        2 => |x: f64| -x.sin(),
        _ => |x: f64| -x.cos(),
    };
    TestFunction::new(name, 1.0, f).with_modulus(trig_modulus)
}

fn trig_family(base_phase: usize) -> TestFunction {
    let names = ["sin", "cos", "-sin", "-cos"];
    let derivatives = (1..=4)
        .map(|k| trig(names[(base_phase + k) % 4], base_phase + k))
        .collect();
    trig(names[base_phase % 4], base_phase).with_derivatives(derivatives)
}

pub fn sin() -> TestFunction {
    trig_family(0)
}

pub fn cos() -> TestFunction {
    trig_family(1)
}

pub fn constant(c: f64) -> TestFunction {
    let zero = TestFunction::new("zero", 0.0, |_| 0.0).with_modulus(|_| 0.0);
    TestFunction::new(format!("const({c})"), c.abs(), move |_| c)
        .with_modulus(|_| 0.0)
        .with_derivatives(vec![zero.clone(), zero.clone(), zero])
}

/// The identity. It is unbounded, so `bound` stands in for its sup norm on
/// the region that carries all but a negligible part of the kernel mass.
pub fn identity(bound: f64) -> TestFunction {
    let one = TestFunction::new("one", 1.0, |_| 1.0).with_modulus(|_| 0.0);
    TestFunction::new("id", bound, |x| x)
        .with_modulus(|theta| theta)
        .with_derivatives(vec![one])
}

/// `min(|x|, clamp)`: the absolute value, clamped so it stays bounded.
/// Lipschitz with constant 1, so `ω(θ) = min(θ, clamp)`.
pub fn clamped_abs(clamp: f64) -> TestFunction {
    TestFunction::new("abs", clamp, move |x: f64| x.abs().min(clamp)).with_modulus(move |theta| theta.min(clamp))
}

/// Modulus of a function `g` that is even and decreasing on `[0, ∞)`:
/// `ω(g, θ) = max_{u ≥ 0} g(u) − g(u + θ)`, found by a coarse scan refined
/// with golden-section search.
fn even_unimodal_modulus(g: impl Fn(f64) -> f64, theta: f64, extent: f64) -> f64 {
    let drop = |u: f64| g(u) - g(u + theta);
    let steps = 4000;
    let h = extent / steps as f64;
    let (mut best_i, mut best) = (0, drop(0.0));
    for i in 1..=steps {
        let v = drop(i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i as f64 - 1.0).max(0.0) * h;
    let mut hi = (best_i as f64 + 1.0) * h;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if drop(m1) < drop(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(drop(0.5 * (lo + hi)))
}

/// Lipschitz-type modulus bound `min(θ L, 2 ‖g‖∞)`, used where no sharper
/// closed form is available.
fn lipschitz_modulus(lipschitz: f64, sup_norm: f64) -> impl Fn(f64) -> f64 + Send + Sync {
    move |theta| (theta * lipschitz).min(2.0 * sup_norm)
}

/// `exp(−x²)` with its first two derivatives.
pub fn gaussian() -> TestFunction {
    let d1_sup = (2.0 / std::f64::consts::E).sqrt();
    // Lipschitz constants: sup|f''| = 2 and sup|f'''| < 3.8 (taken as 5).
    let d1 = TestFunction::new("gaussian'", d1_sup, |x: f64| -2.0 * x * (-x * x).exp())
        .with_modulus(lipschitz_modulus(2.0, d1_sup));
    let d2 = TestFunction::new("gaussian''", 2.0, |x: f64| (4.0 * x * x - 2.0) * (-x * x).exp())
        .with_modulus(lipschitz_modulus(5.0, 2.0));
    TestFunction::new("gaussian", 1.0, |x: f64| (-x * x).exp())
        .with_modulus(|theta| even_unimodal_modulus(|u| (-u * u).exp(), theta, 8.0))
        .with_derivatives(vec![d1, d2])
}

/// Catalog lookup. `half_width` is the largest `|x|` of the working domain;
/// it sets the clamp of `abs` and the stand-in bound of `id`.
pub fn by_name(name: &str, half_width: f64) -> Result<TestFunction> {
    match name {
        "sin" => Ok(sin()),
        "cos" => Ok(cos()),
        "abs" => Ok(clamped_abs(half_width)),
        "gaussian" | "exp-x2" => Ok(gaussian()),
        "id" | "identity" => Ok(identity(half_width + 1.0)),
        "one" | "constant" => Ok(constant(1.0)),
        other => {
            if let Some(c) = other.strip_prefix("const:").and_then(|v| v.parse::<f64>().ok()) {
                Ok(constant(c))
            } else {
                Err(Error::Config(format!("unknown catalog function `{other}`")))
            }
        }
    }
}

pub const CATALOG_NAMES: [&str; 6] = ["sin", "cos", "abs", "gaussian", "id", "one"];

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn grid() -> Vec<f64> {
        (0..=600).map(|i| -3.0 + f64::from(i) * 0.01).collect()
    }

    // Brute-force ω over a dense grid, independent of the closed forms.
    fn brute_modulus(f: &TestFunction, theta: f64) -> f64 {
        let step = theta / 400.0;
        let m = 400;
        let pts: Vec<f64> = (0..=((8.0 / step) as usize)).map(|i| -4.0 + i as f64 * step).collect();
        let vals: Vec<f64> = pts.iter().map(|&x| f.value(x)).collect();
        let mut best: f64 = 0.0;
        for i in 0..vals.len() {
            for j in i + 1..(i + m + 1).min(vals.len()) {
                best = best.max((vals[i] - vals[j]).abs());
            }
        }
        best
    }

    #[test]
    fn catalog_sup_norms_hold() {
        for name in CATALOG_NAMES {
            let f = by_name(name, 3.0).unwrap();
            f.validate_sup_norm(&grid()).unwrap();
        }
        assert!(by_name("nope", 3.0).is_err());
        assert_eq!(by_name("const:2.5", 3.0).unwrap().value(1.0), 2.5);
    }

    #[test]
    fn catalog_derivatives_match_finite_differences() {
        for name in CATALOG_NAMES {
            let f = by_name(name, 3.0).unwrap();
            f.validate_derivatives(&grid(), 1e-6).unwrap();
        }
    }

    #[test]
    fn closed_form_moduli_match_brute_force() {
        for name in ["sin", "cos", "abs", "gaussian", "id"] {
            let f = by_name(name, 3.0).unwrap();
            for theta in [0.05, 0.1, 0.5, 1.0] {
                let closed = f.modulus(theta).unwrap();
                let brute = brute_modulus(&f, theta);
                assert!(brute <= closed + 1e-9, "{name} theta={theta}: {brute} > {closed}");
                assert!(closed - brute < 1e-4, "{name} theta={theta}: {brute} << {closed}");
            }
        }
    }

    #[test]
    fn sin_modulus_example() {
        let w = sin().modulus(0.1).unwrap();
        assert!(w <= 0.1);
        assert_abs_diff_eq!(w, 2.0 * 0.05f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(w, 0.099_958_3, epsilon = 1e-7);
        assert_eq!(sin().modulus(10.0).unwrap(), 2.0);
    }

    #[test]
    fn missing_derivative_is_an_error() {
        let f = clamped_abs(3.0);
        assert!(matches!(f.derivative(1), Err(Error::MissingDerivative { order: 1, .. })));
        assert_eq!(sin().derivative(1).unwrap().name(), "cos");
        assert_eq!(sin().derivative(2).unwrap().name(), "-sin");
        assert!(sin().derivative(0).is_err());
    }
}
