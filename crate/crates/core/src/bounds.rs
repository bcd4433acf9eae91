//! Closed-form right-hand sides of the error estimates. Everything here is
//! arithmetic on supplied moduli and norms; nothing is measured.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{factorial, rate_window, KernelParams};
use crate::operators::KindTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundKind {
    JacksonBasic,
    JacksonKantorovich,
    JacksonQuadrature,
    TaylorBasic,
    TaylorKantorovich,
    TaylorQuadrature,
    Iterated,
    MixedIterated,
    CentralMoment,
}

impl BoundKind {
    fn jackson(kind: KindTag) -> Self {
        match kind {
            KindTag::Basic => Self::JacksonBasic,
            KindTag::Kantorovich => Self::JacksonKantorovich,
            KindTag::Quadrature => Self::JacksonQuadrature,
        }
    }

    fn taylor(kind: KindTag) -> Self {
        match kind {
            KindTag::Basic => Self::TaylorBasic,
            KindTag::Kantorovich => Self::TaylorKantorovich,
            KindTag::Quadrature => Self::TaylorQuadrature,
        }
    }
}

/// The inputs a bound was evaluated with. Fields that do not apply to a
/// given bound are left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundInputs {
    pub operator: Option<KindTag>,
    pub n: Option<u32>,
    pub ns: Vec<u32>,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub beta: Option<f64>,
    /// Taylor order `N` or moment order `k`.
    pub order: Option<u32>,
    pub r: Option<usize>,
    pub omega: Option<f64>,
    pub sup_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub inputs: BoundInputs,
    pub value: f64,
    /// Mixed chains only: `r` times the bound at the smallest resolution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarser: Option<f64>,
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and nonnegative, got {v}")))
    }
}

fn base_inputs(kind: KindTag, params: &KernelParams, n: u32, alpha: f64) -> BoundInputs {
    BoundInputs {
        operator: Some(kind),
        n: Some(n),
        alpha: Some(alpha),
        q: Some(params.q()),
        beta: Some(params.beta()),
        ..BoundInputs::default()
    }
}

/// Argument at which the caller evaluates the modulus: `1/n^α` for the
/// basic kind, `1/n + 1/n^α` for the other two.
pub fn modulus_argument(kind: KindTag, n: u32, alpha: f64) -> f64 {
    let n = f64::from(n);
    match kind {
        KindTag::Basic => n.powf(-alpha),
        KindTag::Kantorovich | KindTag::Quadrature => 1.0 / n + n.powf(-alpha),
    }
}

/// `ω + 2(q + 1/q)‖f‖_∞ e^{−β(n^{1−α} − 1)}`, with `ω` taken at
/// [`modulus_argument`].
pub fn jackson_bound(
    kind: KindTag,
    omega_at: f64,
    params: &KernelParams,
    n: u32,
    alpha: f64,
    sup_norm: f64,
) -> Result<BoundReport> {
    let window = rate_window(n, alpha)?;
    check_nonnegative("omega", omega_at)?;
    check_nonnegative("sup norm", sup_norm)?;
    let tail = 2.0 * params.q_sum() * sup_norm * (-params.beta() * (window - 1.0)).exp();
    Ok(BoundReport {
        kind: BoundKind::jackson(kind),
        inputs: BoundInputs {
            omega: Some(omega_at),
            sup_norm: Some(sup_norm),
            ..base_inputs(kind, params, n, alpha)
        },
        value: omega_at + tail,
        coarser: None,
    })
}

/// Bound on `|B((· − x)^k)(x)|`: `moment_bound(k)/n^k` for the basic kind,
/// `2^{k−1}/n^k · (1 + moment_bound(k))` otherwise.
pub fn central_moment_bound(kind: KindTag, k: u32, params: &KernelParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition {
            hypothesis: "n >= 1",
            detail: "n = 0".into(),
        });
    }
    let bracket = params.moment_bound(k)?;
    let scale = f64::from(n).powi(-(k as i32));
    Ok(match kind {
        KindTag::Basic => bracket * scale,
        KindTag::Kantorovich | KindTag::Quadrature => 2f64.powi(k as i32 - 1) * scale * (1.0 + bracket),
    })
}

pub fn central_moment_report(kind: KindTag, k: u32, params: &KernelParams, n: u32) -> Result<BoundReport> {
    let value = central_moment_bound(kind, k, params, n)?;
    Ok(BoundReport {
        kind: BoundKind::CentralMoment,
        inputs: BoundInputs {
            operator: Some(kind),
            n: Some(n),
            q: Some(params.q()),
            beta: Some(params.beta()),
            order: Some(k),
            ..BoundInputs::default()
        },
        value,
        coarser: None,
    })
}

/// Bound on the Taylor-corrected residual
/// `|B f(x) − f(x) − Σ_{k ≤ N} f^{(k)}(x)/k! · B((· − x)^k)(x)|`.
///
/// `omega_n` is `ω(f^{(N)}, ·)` at [`modulus_argument`] and `sup_norm_fn`
/// is `‖f^{(N)}‖_∞`.
pub fn taylor_bound(
    kind: KindTag,
    omega_n: f64,
    params: &KernelParams,
    n: u32,
    alpha: f64,
    order: u32,
    sup_norm_fn: f64,
) -> Result<BoundReport> {
    let window = rate_window(n, alpha)?;
    if order == 0 {
        return Err(Error::Precondition {
            hypothesis: "Taylor order N >= 1",
            detail: "N = 0".into(),
        });
    }
    check_nonnegative("omega", omega_n)?;
    check_nonnegative("sup norm", sup_norm_fn)?;
    let (beta, q_sum) = (params.beta(), params.q_sum());
    let nf = f64::from(n);
    let big_n = order as i32;
    let fact = factorial(order)?;
    let decay = beta.exp() * q_sum * (-0.5 * beta * window).exp();
    let value = match kind {
        KindTag::Basic => {
            omega_n / (nf.powf(alpha * f64::from(order)) * fact)
                + 2f64.powi(big_n + 2) * sup_norm_fn * decay / (nf.powi(big_n) * beta.powi(big_n))
        }
        KindTag::Kantorovich | KindTag::Quadrature => {
            let step = 1.0 / nf + nf.powf(-alpha);
            omega_n * step.powi(big_n) / fact
                + 2f64.powi(big_n) * sup_norm_fn / (nf.powi(big_n) * fact)
                    * decay
                    * (1.0 + 2f64.powi(big_n + 1) * fact / beta.powi(big_n))
        }
    };
    Ok(BoundReport {
        kind: BoundKind::taylor(kind),
        inputs: BoundInputs {
            order: Some(order),
            omega: Some(omega_n),
            sup_norm: Some(sup_norm_fn),
            ..base_inputs(kind, params, n, alpha)
        },
        value,
        coarser: None,
    })
}

/// Uncorrected error bound from the Taylor expansion: the corrected bound
/// plus `Σ_{k ≤ N} |f^{(k)}(x)|/k! · central_moment_bound(k)`.
/// `derivative_values[k − 1]` is `|f^{(k)}(x)|` (or `‖f^{(k)}‖_∞` for the
/// uniform version).
pub fn taylor_uncorrected_bound(
    kind: KindTag,
    derivative_values: &[f64],
    omega_n: f64,
    params: &KernelParams,
    n: u32,
    alpha: f64,
    sup_norm_fn: f64,
) -> Result<BoundReport> {
    let order = derivative_values.len() as u32;
    let mut report = taylor_bound(kind, omega_n, params, n, alpha, order, sup_norm_fn)?;
    for (i, d) in derivative_values.iter().enumerate() {
        let k = i as u32 + 1;
        check_nonnegative("derivative value", *d)?;
        report.value += d / factorial(k)? * central_moment_bound(kind, k, params, n)?;
    }
    Ok(report)
}

/// `r` times a single-step bound.
pub fn iterated_bound(single_step: &BoundReport, r: usize) -> Result<BoundReport> {
    if r == 0 {
        return Err(Error::Precondition {
            hypothesis: "r >= 1",
            detail: "r = 0".into(),
        });
    }
    if r == 1 {
        return Ok(single_step.clone());
    }
    Ok(BoundReport {
        kind: BoundKind::Iterated,
        inputs: BoundInputs {
            r: Some(r),
            ..single_step.inputs.clone()
        },
        value: r as f64 * single_step.value,
        coarser: None,
    })
}

/// Sum of the per-step bounds of a non-decreasing chain, with the coarser
/// `r · per_step[0]` in [`BoundReport::coarser`].
pub fn mixed_iterated_bound(per_step: &[BoundReport]) -> Result<BoundReport> {
    let first = per_step.first().ok_or_else(|| Error::Precondition {
        hypothesis: "non-empty chain",
        detail: "no per-step bounds".into(),
    })?;
    let ns: Vec<u32> = per_step.iter().filter_map(|b| b.inputs.n).collect();
    if ns.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition {
            hypothesis: "k_1 <= k_2 <= ... <= k_r",
            detail: format!("{ns:?}"),
        });
    }
    let sum: f64 = per_step.iter().map(|b| b.value).sum();
    let coarser = per_step.len() as f64 * first.value;
    if sum > coarser * (1.0 + 1e-12) {
        log::warn!("per-step bounds are not non-increasing: sum {sum:e} exceeds {coarser:e}");
    }
    Ok(BoundReport {
        kind: BoundKind::MixedIterated,
        inputs: BoundInputs {
            ns,
            r: Some(per_step.len()),
            n: None,
            omega: None,
            sup_norm: None,
            ..first.inputs.clone()
        },
        value: sum,
        coarser: Some(coarser),
    })
}
