//! The deformed half hyperbolic tangent `ν`, the activation density `G` built
//! from it, and the symmetrized density `Ψ` that serves as the convolution
//! kernel of every operator in this crate.
//!
//! All evaluations are closed form. `G` is evaluated through an algebraically
//! equivalent quotient instead of the raw difference `ν(x+1) − ν(x−1)`, which
//! loses every significant digit once both terms saturate near ±1.

use serde::Serialize;

use crate::error::{Error, Result};

/// Deformation `q` and rate `β` of the activation, with a few constants that
/// every evaluation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    q: f64,
    beta: f64,
    #[serde(skip)]
    exp_beta: f64,
    #[serde(skip)]
    exp_neg_beta: f64,
    #[serde(skip)]
    sinh_beta: f64,
}

impl KernelParams {
    pub fn new(q: f64, beta: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidParams(format!("q must be a positive finite number, got {q}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "beta must be a positive finite number, got {beta}"
            )));
        }
        Ok(Self {
            q,
            beta,
            exp_beta: beta.exp(),
            exp_neg_beta: (-beta).exp(),
            sinh_beta: beta.sinh(),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Parameters of the mirrored activation, `(1/q, β)`.
    pub fn reciprocal(&self) -> Self {
        Self::new(1.0 / self.q, self.beta).expect("reciprocal of valid params is valid")
    }

    /// `q + 1/q`, the envelope coefficient. At least 2, with equality iff `q = 1`.
    pub fn q_sum(&self) -> f64 {
        self.q + 1.0 / self.q
    }

    /// Height of the global maximum of `G`, `(1 − e^{−β}) / (2(1 + e^{−β}))`.
    pub fn g_max_value(&self) -> f64 {
        0.5 * (0.5 * self.beta).tanh()
    }

    /// Location of the global maximum of `G`, `ln(q)/β`.
    pub fn g_argmax(&self) -> f64 {
        self.q.ln() / self.beta
    }

    /// `ν(x) = (1 − q e^{−βx}) / (1 + q e^{−βx})`.
    pub fn nu(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.nu_value(x))
    }

    /// Unchecked `ν`; saturates to ±1 for large `|βx|` without overflow.
    pub fn nu_value(&self, x: f64) -> f64 {
        let bx = self.beta * x;
        if bx >= 0.0 {
            let u = self.q * (-bx).exp();
            (1.0 - u) / (1.0 + u)
        } else {
            let s = bx.exp();
            (s - self.q) / (s + self.q)
        }
    }

    /// `G(x) = (ν(x+1) − ν(x−1)) / 4`.
    pub fn g(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.g_value(x))
    }

    /// Unchecked `G`, strictly positive for every finite `x`.
    pub fn g_value(&self, x: f64) -> f64 {
        if x >= 0.0 {
            g_positive_branch(self.q, self.sinh_beta, self.exp_beta, self.exp_neg_beta, (-self.beta * x).exp())
        } else {
            // G_q(−y) = G_{1/q}(y), written without forming 1/q.
            let s = (self.beta * x).exp();
            self.q * s * self.sinh_beta / ((s + self.q * self.exp_neg_beta) * (s + self.q * self.exp_beta))
        }
    }

    /// `Ψ(x) = (G_q(x) + G_{1/q}(x)) / 2`.
    pub fn psi(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.psi_value(x))
    }

    /// Unchecked `Ψ`. Evaluated at `|x|`, so `psi_value(x) == psi_value(-x)`
    /// holds bit for bit.
    pub fn psi_value(&self, x: f64) -> f64 {
        let t = (-self.beta * x.abs()).exp();
        let q = self.q;
        let g_q = g_positive_branch(q, self.sinh_beta, self.exp_beta, self.exp_neg_beta, t);
        let g_inv = q * t * self.sinh_beta / ((q + t * self.exp_neg_beta) * (q + t * self.exp_beta));
        0.5 * (g_q + g_inv)
    }

    /// Exponential envelope `(q + 1/q) β e^{−β(x−1)} / 2`, which dominates `Ψ`
    /// on `[1, ∞)`.
    pub fn psi_envelope(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        if x < 1.0 {
            return Err(Error::Domain(format!("envelope is only valid for x >= 1, got {x}")));
        }
        Ok(0.5 * self.q_sum() * self.beta * (-self.beta * (x - 1.0)).exp())
    }

    /// Upper bound `(q + 1/q) e^{−β(n^{1−α} − 1)}` on the kernel mass outside
    /// the window `|nx − v| < n^{1−α}`.
    pub fn tail_mass_bound(&self, n: u32, alpha: f64) -> Result<f64> {
        let window = rate_window(n, alpha)?;
        Ok(self.q_sum() * (-self.beta * (window - 1.0)).exp())
    }

    /// Upper bound on the absolute moment `∫ |h|^k Ψ(h) dh`:
    /// `(1 − e^{−β})/(1 + e^{−β}) · 1/(k+1) + (q + 1/q) e^β k! / β^k`.
    pub fn moment_bound(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::Precondition {
                hypothesis: "moment order k >= 1",
                detail: "k = 0".into(),
            });
        }
        let fact = factorial(k)?;
        let core = (0.5 * self.beta).tanh() / f64::from(k + 1);
        Ok(core + self.q_sum() * self.exp_beta * fact / self.beta.powi(k as i32))
    }
}

fn g_positive_branch(q: f64, sinh_beta: f64, exp_beta: f64, exp_neg_beta: f64, t: f64) -> f64 {
    let qt = q * t;
    qt * sinh_beta / ((1.0 + qt * exp_neg_beta) * (1.0 + qt * exp_beta))
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be finite, got {x}")))
    }
}

/// Validates `0 < α < 1`, `n ≥ 1` and `n^{1−α} > 2`, returning `n^{1−α}`.
pub fn rate_window(n: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition {
            hypothesis: "0 < alpha < 1",
            detail: format!("alpha = {alpha}"),
        });
    }
    if n == 0 {
        return Err(Error::Precondition {
            hypothesis: "n >= 1",
            detail: "n = 0".into(),
        });
    }
    let window = f64::from(n).powf(1.0 - alpha);
    if window > 2.0 {
        Ok(window)
    } else {
        Err(Error::Precondition {
            hypothesis: "n^(1-alpha) > 2",
            detail: format!("n = {n}, alpha = {alpha}, n^(1-alpha) = {window}"),
        })
    }
}

/// `k!` in floating point; rejects `k > 170`, where it overflows.
pub fn factorial(k: u32) -> Result<f64> {
    if k > 170 {
        return Err(Error::Precondition {
            hypothesis: "k <= 170 (k! representable in f64)",
            detail: format!("k = {k}"),
        });
    }
    Ok((1..=k).fold(1.0, |acc, i| acc * f64::from(i)))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn params(q: f64, beta: f64) -> KernelParams {
        KernelParams::new(q, beta).unwrap()
    }

    // Literal transcription of the defining formulas, used as a second route.
    fn nu_direct(q: f64, beta: f64, x: f64) -> f64 {
        (1.0 - q * (-beta * x).exp()) / (1.0 + q * (-beta * x).exp())
    }

    fn g_direct(q: f64, beta: f64, x: f64) -> f64 {
        0.25 * (nu_direct(q, beta, x + 1.0) - nu_direct(q, beta, x - 1.0))
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(KernelParams::new(-1.0, 1.0).is_err());
        assert!(KernelParams::new(0.0, 1.0).is_err());
        assert!(KernelParams::new(1.0, 0.0).is_err());
        assert!(KernelParams::new(f64::NAN, 1.0).is_err());
        assert!(KernelParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn derived_constants() {
        assert_eq!(params(1.0, 1.0).q_sum(), 2.0);
        assert!(params(3.0, 1.0).q_sum() > 2.0);
        for beta in [0.01, 1.0, 50.0] {
            let h = params(2.0, beta).g_max_value();
            assert!(h > 0.0 && h <= 0.5);
        }
    }

    #[test]
    fn nu_examples() {
        assert_eq!(params(3.0, 1.0).nu(0.0).unwrap(), -0.5);
        assert_eq!(params(1.0, 2.0).nu(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(params(2.0, 1.0).nu(50.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(params(2.0, 1.0).nu(-1e6).unwrap(), -1.0, epsilon = 1e-15);
        assert!(params(2.0, 1.0).nu(f64::NAN).is_err());
        assert!(params(2.0, 1.0).nu(f64::INFINITY).is_err());
    }

    #[test]
    fn nu_mirror_identity() {
        let p = params(2.5, 0.7);
        let r = p.reciprocal();
        for x in [-3.0, -0.2, 0.0, 1.1, 7.0] {
            assert_abs_diff_eq!(p.nu_value(-x), -r.nu_value(x), epsilon = 1e-15);
        }
    }

    #[test]
    fn g_matches_difference_of_nu() {
        for &(q, beta) in &[(1.0, 1.0), (2.0, 1.0), (0.5, 2.0), (3.0, 0.5)] {
            let p = params(q, beta);
            for i in -40..=40 {
                let x = f64::from(i) * 0.2;
                assert_abs_diff_eq!(p.g_value(x), g_direct(q, beta, x), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn g_examples() {
        // 50-digit reference values.
        let p = params(2.0, 1.0);
        assert_abs_diff_eq!(p.g(2f64.ln()).unwrap(), 0.231_058_578_630_004_88, epsilon = 1e-15);
        assert_abs_diff_eq!(p.g(2f64.ln()).unwrap(), p.g_max_value(), epsilon = 1e-15);
        let one = params(1.0, 1.0);
        assert_abs_diff_eq!(one.g(1.3).unwrap(), one.g(-1.3).unwrap(), epsilon = 1e-16);
        let half = params(0.5, 1.0);
        assert_abs_diff_eq!(p.g(-1.3).unwrap(), half.g(1.3).unwrap(), epsilon = 1e-16);
        assert_abs_diff_eq!(p.g(-1.3).unwrap(), 0.111_277_238_169_320_21, epsilon = 1e-15);
    }

    #[test]
    fn psi_examples() {
        let p = params(2.0, 1.0);
        assert_eq!(p.psi(1.7).unwrap(), p.psi(-1.7).unwrap());
        assert_abs_diff_eq!(p.psi(0.0).unwrap(), 0.210_377_240_634_432_75, epsilon = 1e-15);
        let one = params(1.0, 1.0);
        for x in [-4.0, -1.0, 0.0, 0.3, 2.2, 9.0] {
            assert_abs_diff_eq!(one.psi_value(x), one.g_value(x), epsilon = 1e-16);
        }
        assert!(p.psi(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn envelope_examples() {
        let p = params(1.0, 1.0);
        assert_abs_diff_eq!(p.psi_envelope(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.psi_envelope(3.0).unwrap(), (-2f64).exp(), epsilon = 1e-15);
        assert!(p.psi_envelope(0.999).is_err());
    }

    #[test]
    fn envelope_dominates_far_tail() {
        for &(q, beta) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 2.0), (7.0, 3.0)] {
            let p = params(q, beta);
            for i in 0..=3900 {
                let x = 1.0 + f64::from(i) * 0.01;
                let psi = p.psi_value(x);
                assert!(psi > 0.0);
                assert!(psi < p.psi_envelope(x).unwrap(), "q={q} beta={beta} x={x}");
            }
        }
    }

    #[test]
    fn tail_mass_bound_examples() {
        assert_abs_diff_eq!(
            params(1.0, 1.0).tail_mass_bound(9, 0.5).unwrap(),
            2.0 * (-2f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(params(1.0, 1.0).tail_mass_bound(9, 0.5).unwrap(), 0.270_671, epsilon = 1e-6);
        assert_abs_diff_eq!(params(2.0, 1.0).tail_mass_bound(9, 0.5).unwrap(), 0.338_338, epsilon = 1e-6);
        let err = params(1.0, 1.0).tail_mass_bound(4, 0.5).unwrap_err();
        assert!(matches!(err, Error::Precondition { hypothesis: "n^(1-alpha) > 2", .. }));
        assert!(params(1.0, 1.0).tail_mass_bound(100, 1.0).is_err());
    }

    #[test]
    fn moment_bound_examples() {
        let p = params(1.0, 1.0);
        let e = std::f64::consts::E;
        let t = 0.5f64.tanh();
        assert_abs_diff_eq!(p.moment_bound(1).unwrap(), t / 2.0 + 2.0 * e, epsilon = 1e-14);
        assert_abs_diff_eq!(p.moment_bound(1).unwrap(), 5.667_622_235_548_095, epsilon = 1e-13);
        assert_abs_diff_eq!(p.moment_bound(3).unwrap(), 32.734_911_230_823_545, epsilon = 1e-12);
        assert!(p.moment_bound(0).is_err());
        assert!(p.moment_bound(171).is_err());
        assert!(p.moment_bound(170).unwrap().is_finite());
    }

    #[test]
    fn maximum_location_on_fine_grid() {
        for &(q, beta) in &[(2.0, 1.0), (0.5, 2.0), (3.0, 0.5), (1.0, 1.0)] {
            let p = params(q, beta);
            let centre = p.g_argmax();
            let step = 1e-7;
            let (best_x, best) = (-20_000..=20_000)
                .map(|i| {
                    let x = centre + f64::from(i) * step;
                    (x, p.g_value(x))
                })
                .fold((0.0, f64::MIN), |acc, v| if v.1 > acc.1 { v } else { acc });
            assert!((best_x - centre).abs() < 1e-6, "q={q} beta={beta}");
            assert_abs_diff_eq!(best, p.g_max_value(), epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn psi_is_even(x in -50.0f64..50.0, q in 0.1f64..10.0, beta in 0.1f64..5.0) {
            let p = params(q, beta);
            prop_assert_eq!(p.psi_value(x), p.psi_value(-x));
        }

        #[test]
        fn deformed_symmetry(x in -30.0f64..30.0, q in 0.1f64..10.0, beta in 0.1f64..5.0) {
            let p = params(q, beta);
            let r = p.reciprocal();
            prop_assert!((p.g_value(-x) - r.g_value(x)).abs() <= 1e-14);
        }

        #[test]
        fn g_is_positive(x in -700.0f64..700.0, q in 0.01f64..100.0, beta in 0.01f64..1.0) {
            prop_assert!(params(q, beta).g_value(x) > 0.0);
        }
    }
}
