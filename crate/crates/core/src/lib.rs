//! Convolution operators built on the symmetrized q-deformed,
//! β-parametrized half hyperbolic tangent density `Ψ`, with closed-form
//! error bounds and the machinery to check them numerically.
//!
//! ```
//! use actconv::{apply, function, KernelParams, OperatorKind, OperatorSpec, QuadratureConfig};
//!
//! let params = KernelParams::new(1.5, 1.0).unwrap();
//! let spec = OperatorSpec::new(OperatorKind::Basic, 16, params, 0.5).unwrap();
//! let y = apply(&function::sin(), &spec, 0.3, &QuadratureConfig::default()).unwrap();
//! assert!((y - 0.3f64.sin()).abs() < 0.05);
//! ```

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod function;
pub mod kernel;
pub mod operators;
pub mod quadrature;

pub use analysis::{
    check_smoothness_preservation, estimate_modulus, fit_rate, grid_modulus, kernel_abs_moment, kernel_mass,
    kernel_tail_mass, run_convergence_sweep, sup_error,
    ConvergenceRecord, MeasurementGrid, SmoothnessRecord,
};
pub use bounds::{
    central_moment_bound, iterated_bound, jackson_bound, mixed_iterated_bound, modulus_argument, taylor_bound,
    BoundInputs, BoundKind, BoundReport,
};
pub use error::{Error, Result};
pub use function::{BoundedFn, TestFunction};
pub use kernel::{rate_window, KernelParams};
pub use operators::{
    apply, apply_basic, apply_derivative, apply_kantorovich, apply_on_grid, apply_quadrature_kind, central_moment,
    compose_mixed, iterate, make_grid_approximant, ApproximantConfig, GridApproximant, Interpolation, KindTag,
    OperatorKind, OperatorSpec,
};
pub use quadrature::{integrate_interval, integrate_real_line, Decay, IntegralResult, QuadratureConfig};
