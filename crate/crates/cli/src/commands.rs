//! The five verbs. Each writes its tables into the output directory and
//! returns the checks that failed.

use std::fs;
use std::path::PathBuf;

use actconv::analysis::{kernel_abs_moment, kernel_mass, kernel_tail_mass, log_log_slope, sup_error_values};
use actconv::bounds::mixed_iterated_bound;
use actconv::function::by_name;
use actconv::operators::{iteration_domain, KindTag};
use actconv::{
    apply_on_grid, central_moment, compose_mixed, estimate_modulus, iterate, iterated_bound, jackson_bound,
    modulus_argument, rate_window, run_convergence_sweep, taylor_bound, BoundedFn, ConvergenceRecord, Error,
    KernelParams, OperatorSpec, TestFunction,
};
use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::output::{ensure_dir, num, opt_num, slug, write_csv, write_json, write_text};
use crate::plot::{loglog_svg, Series};

/// What a command produced and which of its checks failed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub violations: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn status(hypothesis_met: bool, satisfied: bool) -> &'static str {
    match (hypothesis_met, satisfied) {
        (false, _) => "n/a",
        (true, true) => "true",
        (true, false) => "false",
    }
}

struct Emitter<'a> {
    cfg: &'a RunConfig,
    dir: PathBuf,
    outcome: Outcome,
}

impl<'a> Emitter<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        Ok(Self {
            cfg,
            dir: ensure_dir(&cfg.output_dir)?,
            outcome: Outcome::default(),
        })
    }

    fn csv(&mut self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        if self.cfg.wants(Format::Csv) {
            let path = self.dir.join(format!("{stem}.csv"));
            write_csv(&path, header, rows)?;
            self.outcome.written.push(path);
        }
        Ok(())
    }

    fn json(&mut self, stem: &str, value: &impl Serialize) -> Result<()> {
        if self.cfg.wants(Format::Json) {
            let path = self.dir.join(format!("{stem}.json"));
            write_json(&path, value)?;
            self.outcome.written.push(path);
        }
        Ok(())
    }

    fn svg(&mut self, stem: &str, render: impl FnOnce() -> String) -> Result<()> {
        if self.cfg.wants(Format::Svg) {
            let path = self.dir.join(format!("{stem}.svg"));
            write_text(&path, &render())?;
            self.outcome.written.push(path);
        }
        Ok(())
    }

    fn fail(&mut self, message: String) {
        log::error!("{message}");
        self.outcome.violations.push(message);
    }
}

#[derive(Debug, Clone, Serialize)]
struct KernelCheck {
    check: String,
    value: f64,
    reference: f64,
    tolerance: Option<f64>,
    status: &'static str,
}

impl KernelCheck {
    /// `value ≤ reference`, or `|value − reference| ≤ tolerance` when a
    /// tolerance is given.
    fn new(check: String, value: f64, reference: f64, tolerance: Option<f64>) -> Self {
        let ok = match tolerance {
            Some(tol) => (value - reference).abs() <= tol,
            None => value <= reference,
        };
        Self {
            check,
            value,
            reference,
            tolerance,
            status: if ok { "pass" } else { "fail" },
        }
    }

    fn not_applicable(check: String, reference: f64) -> Self {
        Self {
            check,
            value: f64::NAN,
            reference,
            tolerance: None,
            status: "hypothesis not met",
        }
    }
}

fn kernel_checks(cfg: &RunConfig, params: &KernelParams) -> Result<Vec<KernelCheck>> {
    let quad = cfg.quad_config();
    let mut checks = Vec::new();

    let mass = kernel_mass(params, &quad)?;
    checks.push(KernelCheck::new("normalization".into(), mass.value, 1.0, Some(1e-8)));

    let xs: Vec<f64> = (-2000..=2000).map(|i| f64::from(i) * 0.01).collect();
    let even = xs
        .iter()
        .map(|&x| (params.psi_value(x) - params.psi_value(-x)).abs())
        .fold(0.0, f64::max);
    checks.push(KernelCheck::new("psi evenness residual".into(), even, 0.0, Some(1e-15)));
    let inv = params.reciprocal();
    let mirror = xs
        .iter()
        .map(|&x| (params.g_value(-x) - inv.g_value(x)).abs())
        .fold(0.0, f64::max);
    checks.push(KernelCheck::new("deformed symmetry residual".into(), mirror, 0.0, Some(1e-15)));

    let centre = params.g_argmax();
    let (best_x, best) = (-20_000..=20_000)
        .map(|i| {
            let x = centre + f64::from(i) * 1e-7;
            (x, params.g_value(x))
        })
        .fold((centre, f64::MIN), |acc, v| if v.1 > acc.1 { v } else { acc });
    checks.push(KernelCheck::new("g argmax".into(), best_x, centre, Some(1e-6)));
    checks.push(KernelCheck::new("g maximum".into(), best, params.g_max_value(), Some(1e-10)));

    for &n in &cfg.ns {
        let label = format!("tail mass n={n} alpha={}", cfg.alpha);
        match (rate_window(n, cfg.alpha), params.tail_mass_bound(n, cfg.alpha)) {
            (Ok(window), Ok(bound)) => {
                let tail = kernel_tail_mass(params, window, &quad)?;
                checks.push(KernelCheck::new(label, tail.value, bound, None));
            }
            _ => {
                let reference = params.q_sum() * (-params.beta() * (f64::from(n).powf(1.0 - cfg.alpha) - 1.0)).exp();
                checks.push(KernelCheck::not_applicable(label, reference));
            }
        }
    }
    for k in 1..=5 {
        let moment = kernel_abs_moment(params, k, &quad)?;
        checks.push(KernelCheck::new(format!("abs moment k={k}"), moment.value, params.moment_bound(k)?, None));
    }
    Ok(checks)
}

pub fn cmd_kernel_check(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let checks = kernel_checks(cfg, &params)?;
    let mut em = Emitter::new(cfg)?;
    println!("{:<36} {:>24} {:>24}  status", "check", "value", "reference");
    for c in &checks {
        println!("{:<36} {:>24} {:>24}  {}", c.check, num(c.value), num(c.reference), c.status);
        if c.status == "fail" {
            em.fail(format!("kernel-check: {} = {} against {}", c.check, c.value, c.reference));
        }
    }
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.check.clone(),
                if c.value.is_nan() { String::new() } else { num(c.value) },
                num(c.reference),
                opt_num(c.tolerance),
                c.status.to_string(),
            ]
        })
        .collect();
    em.csv("kernel_check", &["check", "value", "reference", "tolerance", "status"], &rows)?;
    let passed = em.outcome.passed();
    em.json(
        "kernel_check",
        &json!({
            "command": "kernel-check",
            "q": params.q(),
            "beta": params.beta(),
            "checks": checks,
            "all_satisfied": passed,
        }),
    )?;
    Ok(em.outcome)
}

/// Slope of the first `i + 1` finite errors, for each `i ≥ 1`.
fn rates_so_far(records: &[ConvergenceRecord]) -> Vec<Option<f64>> {
    let mut points = Vec::new();
    records
        .iter()
        .map(|r| {
            if r.measured_sup_error.is_finite() {
                points.push((f64::from(r.n), r.measured_sup_error));
            }
            if points.len() >= 2 {
                log_log_slope(&points).ok()
            } else {
                None
            }
        })
        .collect()
}

fn error_plot(title: &str, measured: Vec<(f64, f64)>, bound: Vec<(f64, f64)>) -> String {
    loglog_svg(
        title,
        "n",
        "sup error",
        &[
            Series {
                label: "measured",
                color: "#1f77b4",
                dashed: false,
                points: measured,
            },
            Series {
                label: "bound",
                color: "#d62728",
                dashed: true,
                points: bound,
            },
        ],
    )
}

fn load_functions(cfg: &RunConfig) -> Result<Vec<(String, TestFunction)>> {
    cfg.functions
        .iter()
        .map(|name| Ok((name.clone(), by_name(name, cfg.half_width())?)))
        .collect()
}

pub fn cmd_approx(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let quad = cfg.quad_config();
    let mut em = Emitter::new(cfg)?;
    for (name, f) in load_functions(cfg)? {
        for &tag in &cfg.kinds {
            let kind = cfg.operator_kind(tag)?;
            let records = run_convergence_sweep(&f, &kind, &cfg.ns, cfg.alpha, params, &grid, &quad);
            let rates = rates_so_far(&records);
            let stem = format!("approx_{}_{}", slug(&name), tag.name());
            for r in records.iter().filter(|r| r.is_violation()) {
                em.fail(format!(
                    "approx {name} {} n={}: error {} vs bound {}{}",
                    tag.name(),
                    r.n,
                    r.measured_sup_error,
                    opt_num(r.bound_value),
                    r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                ));
            }
            let rows: Vec<Vec<String>> = records
                .iter()
                .zip(&rates)
                .map(|(r, rate)| {
                    vec![
                        r.n.to_string(),
                        num(r.measured_sup_error),
                        opt_num(r.bound_value),
                        status(r.hypothesis_met, r.satisfied).to_string(),
                        opt_num(*rate),
                    ]
                })
                .collect();
            em.csv(&stem, &["n", "sup_error", "bound", "satisfied", "rate_so_far"], &rows)?;
            let fitted = actconv::fit_rate(&records).ok();
            em.json(
                &stem,
                &json!({
                    "command": "approx",
                    "function": name,
                    "kind": tag,
                    "config": cfg,
                    "records": records,
                    "fitted_rate": fitted,
                    "guaranteed_exponent": if tag == KindTag::Basic { Some(-cfg.alpha) } else { None },
                    "all_satisfied": !records.iter().any(ConvergenceRecord::is_violation),
                }),
            )?;
            let measured = records.iter().map(|r| (f64::from(r.n), r.measured_sup_error)).collect();
            let bound = records
                .iter()
                .filter_map(|r| r.bound_value.map(|b| (f64::from(r.n), b)))
                .collect();
            em.svg(&stem, || error_plot(&format!("{name}, {} operator", tag.name()), measured, bound))?;
        }
    }
    Ok(em.outcome)
}

#[derive(Debug, Clone, Serialize)]
struct TaylorRow {
    n: u32,
    residual: f64,
    bound: Option<f64>,
    hypothesis_met: bool,
    satisfied: bool,
    central_moments: Vec<f64>,
}

/// Largest Taylor-corrected residual over the grid, with the central
/// moments used for the correction.
pub fn taylor_residual(
    f: &TestFunction,
    spec: &OperatorSpec,
    order: u32,
    grid: &actconv::MeasurementGrid,
    quad: &actconv::QuadratureConfig,
) -> actconv::Result<(f64, Vec<f64>)> {
    let values = apply_on_grid(f, spec, grid.points(), quad)?;
    let moments = (1..=order)
        .map(|k| central_moment(spec, 0.0, k, quad))
        .collect::<actconv::Result<Vec<_>>>()?;
    let derivatives = (1..=order as usize)
        .map(|k| f.derivative(k))
        .collect::<actconv::Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for (&x, b) in grid.points().iter().zip(&values) {
        let mut factorial = 1.0;
        let mut correction = 0.0;
        for (k, (d, m)) in derivatives.iter().zip(&moments).enumerate() {
            factorial *= (k + 1) as f64;
            correction += d.value(x) / factorial * m;
        }
        worst = worst.max((b - f.value(x) - correction).abs());
    }
    Ok((worst, moments))
}

pub fn cmd_taylor(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let quad = cfg.quad_config();
    let order = cfg.taylor_order;
    let mut em = Emitter::new(cfg)?;
    for (name, f) in load_functions(cfg)? {
        if f.derivatives().len() < order as usize {
            println!("skipping {name}: no analytic derivative of order {order}");
            continue;
        }
        let top = f.derivative(order as usize)?;
        for &tag in &cfg.kinds {
            let kind = cfg.operator_kind(tag)?;
            let mut rows = Vec::new();
            for &n in &cfg.ns {
                let spec = OperatorSpec::new(kind.clone(), n, params, cfg.alpha)?;
                let (residual, central_moments) = taylor_residual(&f, &spec, order, &grid, &quad)
                    .with_context(|| format!("taylor {name} {} n={n}", tag.name()))?;
                let omega = estimate_modulus(top, modulus_argument(tag, n, cfg.alpha), &grid)?;
                let bound = match taylor_bound(tag, omega, &params, n, cfg.alpha, order, top.sup_norm()) {
                    Ok(b) => Some(b.value),
                    Err(Error::Precondition { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                let row = TaylorRow {
                    n,
                    residual,
                    bound,
                    hypothesis_met: bound.is_some(),
                    satisfied: bound.is_some_and(|b| residual <= b),
                    central_moments,
                };
                if row.hypothesis_met && !row.satisfied {
                    em.fail(format!(
                        "taylor {name} {} N={order} n={n}: residual {residual} vs bound {}",
                        tag.name(),
                        opt_num(bound)
                    ));
                }
                rows.push(row);
            }
            let stem = format!("taylor_{}_{}_N{order}", slug(&name), tag.name());
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.residual),
                        opt_num(r.bound),
                        status(r.hypothesis_met, r.satisfied).to_string(),
                    ]
                })
                .collect();
            em.csv(&stem, &["n", "residual", "bound", "satisfied"], &table)?;
            em.json(
                &stem,
                &json!({
                    "command": "taylor",
                    "function": name,
                    "kind": tag,
                    "order": order,
                    "config": cfg,
                    "rows": rows,
                    "all_satisfied": !rows.iter().any(|r| r.hypothesis_met && !r.satisfied),
                }),
            )?;
            let measured = rows.iter().map(|r| (f64::from(r.n), r.residual)).collect();
            let bound = rows.iter().filter_map(|r| r.bound.map(|b| (f64::from(r.n), b))).collect();
            em.svg(&stem, || {
                error_plot(&format!("{name}, {} operator, Taylor order {order}", tag.name()), measured, bound)
            })?;
        }
    }
    Ok(em.outcome)
}

#[derive(Debug, Clone, Serialize)]
struct IterateRow {
    n: u32,
    r: usize,
    iterated_error: f64,
    single_error: f64,
    single_bound: Option<f64>,
    iterated_bound: Option<f64>,
    slack: f64,
    satisfied: bool,
}

/// Operator output on the grid after `stages` applications, the last one
/// evaluated directly rather than through an approximant.
fn staged_values(
    f: &TestFunction,
    specs: &[OperatorSpec],
    cfg: &RunConfig,
    grid: &actconv::MeasurementGrid,
) -> actconv::Result<Vec<f64>> {
    let quad = cfg.quad_config();
    let approx = cfg.approximant_config();
    let (last, earlier) = specs.split_last().expect("at least one stage");
    if earlier.is_empty() {
        return apply_on_grid(f, last, grid.points(), &quad);
    }
    let domain = iteration_domain(grid.domain(), &last.params, f.sup_norm(), last.n, 1, quad.truncation_eps);
    let ns: Vec<u32> = earlier.iter().map(|s| s.n).collect();
    let prev = if ns.windows(2).all(|w| w[0] == w[1]) {
        iterate(f, &earlier[0], earlier.len(), domain, &approx, &quad)?
    } else {
        compose_mixed(f, &last.kind, &ns, last.params, last.alpha, domain, &approx, &quad)?
    };
    apply_on_grid(&prev, last, grid.points(), &quad)
}

fn closed_form_jackson(
    f: &TestFunction,
    tag: KindTag,
    params: &KernelParams,
    n: u32,
    cfg: &RunConfig,
    grid: &actconv::MeasurementGrid,
) -> Result<Option<actconv::BoundReport>> {
    let omega = estimate_modulus(f, modulus_argument(tag, n, cfg.alpha), grid)?;
    match jackson_bound(tag, omega, params, n, cfg.alpha, f.sup_norm()) {
        Ok(b) => Ok(Some(b)),
        Err(Error::Precondition { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_iterate(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.chain {
        Some(chain) => iterate_chain(cfg, chain),
        None => iterate_power(cfg),
    }
}

fn iterate_power(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let quad = cfg.quad_config();
    let r = cfg.iterations;
    let slack = r as f64 * cfg.approximant_config().residual_ceiling;
    let mut em = Emitter::new(cfg)?;
    for (name, f) in load_functions(cfg)? {
        for &tag in &cfg.kinds {
            let kind = cfg.operator_kind(tag)?;
            let mut rows = Vec::new();
            for &n in &cfg.ns {
                let spec = OperatorSpec::new(kind.clone(), n, params, cfg.alpha)?;
                let single = apply_on_grid(&f, &spec, grid.points(), &quad)?;
                let single_error = sup_error_values(&f, &single, &grid);
                let iterated = match staged_values(&f, &vec![spec; r], cfg, &grid) {
                    Ok(v) => v,
                    Err(e) => {
                        em.fail(format!("iterate {name} {} n={n} r={r}: {e}", tag.name()));
                        continue;
                    }
                };
                let iterated_error = sup_error_values(&f, &iterated, &grid);
                let single_bound = closed_form_jackson(&f, tag, &params, n, cfg, &grid)?;
                let iterated_bound = single_bound.as_ref().map(|b| iterated_bound(b, r)).transpose()?;
                let satisfied = iterated_error <= r as f64 * single_error + slack
                    && iterated_bound.as_ref().is_none_or(|b| iterated_error <= b.value + slack);
                if !satisfied {
                    em.fail(format!(
                        "iterate {name} {} n={n} r={r}: error {iterated_error} vs {r} x {single_error} and bound {}",
                        tag.name(),
                        opt_num(iterated_bound.as_ref().map(|b| b.value))
                    ));
                }
                rows.push(IterateRow {
                    n,
                    r,
                    iterated_error,
                    single_error,
                    single_bound: single_bound.map(|b| b.value),
                    iterated_bound: iterated_bound.map(|b| b.value),
                    slack,
                    satisfied,
                });
            }
            let stem = format!("iterate_{}_{}_r{r}", slug(&name), tag.name());
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    vec![
                        row.n.to_string(),
                        row.r.to_string(),
                        num(row.iterated_error),
                        num(row.single_error),
                        opt_num(row.single_bound),
                        opt_num(row.iterated_bound),
                        num(row.slack),
                        row.satisfied.to_string(),
                    ]
                })
                .collect();
            em.csv(
                &stem,
                &[
                    "n",
                    "r",
                    "iterated_error",
                    "single_error",
                    "single_bound",
                    "iterated_bound",
                    "slack",
                    "satisfied",
                ],
                &table,
            )?;
            em.json(
                &stem,
                &json!({
                    "command": "iterate",
                    "function": name,
                    "kind": tag,
                    "config": cfg,
                    "rows": rows,
                    "all_satisfied": rows.iter().all(|row| row.satisfied),
                }),
            )?;
            let measured = rows.iter().map(|row| (f64::from(row.n), row.iterated_error)).collect();
            let bound = rows
                .iter()
                .filter_map(|row| row.iterated_bound.map(|b| (f64::from(row.n), b)))
                .collect();
            em.svg(&stem, || error_plot(&format!("{name}, {} operator, r = {r}", tag.name()), measured, bound))?;
        }
    }
    Ok(em.outcome)
}

fn iterate_chain(cfg: &RunConfig, chain: &[u32]) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let slack = chain.len() as f64 * cfg.approximant_config().residual_ceiling;
    let tag_chain: Vec<String> = chain.iter().map(u32::to_string).collect();
    let mut em = Emitter::new(cfg)?;
    for (name, f) in load_functions(cfg)? {
        for &tag in &cfg.kinds {
            let kind = cfg.operator_kind(tag)?;
            let specs = chain
                .iter()
                .map(|&k| OperatorSpec::new(kind.clone(), k, params, cfg.alpha))
                .collect::<actconv::Result<Vec<_>>>()?;
            let values = match staged_values(&f, &specs, cfg, &grid) {
                Ok(v) => v,
                Err(e) => {
                    em.fail(format!("iterate {name} {} chain {chain:?}: {e}", tag.name()));
                    continue;
                }
            };
            let error = sup_error_values(&f, &values, &grid);
            let steps = chain
                .iter()
                .map(|&k| closed_form_jackson(&f, tag, &params, k, cfg, &grid))
                .collect::<Result<Option<Vec<_>>>>()?;
            let mixed = steps.as_deref().map(mixed_iterated_bound).transpose()?;
            let (sum, coarser) = match &mixed {
                Some(m) => (Some(m.value), m.coarser),
                None => (None, None),
            };
            let satisfied = sum.is_none_or(|s| error <= s + slack && s <= coarser.unwrap_or(f64::INFINITY));
            if !satisfied {
                em.fail(format!(
                    "iterate {name} {} chain {chain:?}: error {error} vs sum bound {}",
                    tag.name(),
                    opt_num(sum)
                ));
            }
            let stem = format!("chain_{}_{}_{}", slug(&name), tag.name(), tag_chain.join("-"));
            let row = vec![
                tag_chain.join(" "),
                num(error),
                opt_num(sum),
                opt_num(coarser),
                num(slack),
                status(sum.is_some(), satisfied).to_string(),
            ];
            em.csv(
                &stem,
                &["chain", "error", "sum_bound", "coarser_bound", "slack", "satisfied"],
                &[row],
            )?;
            em.json(
                &stem,
                &json!({
                    "command": "iterate",
                    "function": name,
                    "kind": tag,
                    "chain": chain,
                    "config": cfg,
                    "error": error,
                    "per_step_bounds": steps.as_ref().map(|s| s.iter().map(|b| b.value).collect::<Vec<_>>()),
                    "sum_bound": sum,
                    "coarser_bound": coarser,
                    "slack": slack,
                    "all_satisfied": satisfied,
                }),
            )?;
        }
    }
    Ok(em.outcome)
}

#[derive(Debug, Serialize)]
struct IndexEntry {
    file: String,
    command: String,
    function: Option<String>,
    kind: Option<String>,
    all_satisfied: Option<bool>,
}

/// Collects every JSON summary in the output directory into `index.json`.
pub fn cmd_report(cfg: &RunConfig) -> Result<Outcome> {
    let mut em = Emitter::new(cfg)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&em.dir)
        .with_context(|| format!("cannot list {}", em.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "index.json"))
        .collect();
    files.sort();
    let mut entries = Vec::new();
    for path in files {
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let value: serde_json::Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let Some(command) = value.get("command").and_then(|c| c.as_str()) else {
            continue;
        };
        let field = |k: &str| value.get(k).and_then(|v| v.as_str()).map(str::to_string);
        let entry = IndexEntry {
            file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            command: command.to_string(),
            function: field("function"),
            kind: field("kind"),
            all_satisfied: value.get("all_satisfied").and_then(|v| v.as_bool()),
        };
        if entry.all_satisfied == Some(false) {
            em.fail(format!("report: {} has failing checks", entry.file));
        }
        entries.push(entry);
    }
    println!("{} summaries indexed in {}", entries.len(), em.dir.display());
    let path = em.dir.join("index.json");
    let passed = em.outcome.passed();
    write_json(&path, &json!({ "summaries": entries, "all_satisfied": passed }))?;
    em.outcome.written.push(path);
    Ok(em.outcome)
}
