//! Summability operators and limit estimation.
//!
//! Forward operators with closed-form kernels run through [`cascade`], which
//! advances the operator as a linear ODE and reuses work across a whole
//! abscissa ladder. Everything else (sampled kernels, dual operators) goes
//! through panelled adaptive quadrature.

mod cascade;
mod direct;
pub mod function;
pub mod limit;
pub mod methods;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use function::{embed_sequence, KnownValue, Provenance, Sequence, TestFunction};
pub use limit::Status;
pub use methods::{
    format_real, k_estimator, method_holder, method_mr, method_mr_dual, parse_method, MethodDescriptor, Variant,
};

use crate::error::{Error, Result};
use crate::kernel::{Flavor, Kernel};
use crate::quadrature;
use crate::TOL_QUAD;
use cascade::Cascade;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub tol_quad: f64,
    /// First ladder abscissa (native coordinate).
    pub x0: f64,
    pub ratio: f64,
    /// Largest ladder index `j` in `x_j = x0·ratio^j`.
    pub max_ladder: u32,
    pub window: usize,
    /// Plateau tolerance; defaults to `1e-4·(1 + ‖f‖∞)`.
    pub tol_limit: Option<f64>,
    /// Grid size for tabulated intermediate stages of sampled-kernel iterates.
    pub iterate_cache_points: usize,
    pub max_dual_panels: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            tol_quad: TOL_QUAD,
            x0: 4.0,
            ratio: 2.0,
            max_ladder: 28,
            window: 5,
            tol_limit: None,
            iterate_cache_points: 4096,
            max_dual_panels: 20_000,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tol_quad", self.tol_quad)?;
        positive("x0", self.x0)?;
        if !(self.ratio.is_finite() && self.ratio > 1.0) {
            return Err(Error::Config(format!("ratio must exceed 1, got {}", self.ratio)));
        }
        if let Some(t) = self.tol_limit {
            positive("tol_limit", t)?;
        }
        if self.window < 2 {
            return Err(Error::Config("window must be at least 2".into()));
        }
        if self.iterate_cache_points < 2 {
            return Err(Error::Config("iterate_cache_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn tol_limit_for(&self, f: &TestFunction) -> f64 {
        self.tol_limit.unwrap_or(1e-4 * (1.0 + f.bound()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummationResult {
    pub estimate: Option<Complex64>,
    pub status: Status,
    /// `(x, operator value)` along the ladder.
    pub trace: Vec<(f64, Complex64)>,
    pub oscillation_amplitude: f64,
    pub tolerance_used: f64,
    /// Test-function evaluations spent.
    pub evaluations: u64,
}

impl SummationResult {
    /// `x,re,im` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (x, v) in &self.trace {
            out.push_str(&format!("{x:e},{:e},{:e}\n", v.re, v.im));
        }
        out
    }
}

fn check_pair(kernel: &Kernel, f: &TestFunction) -> Result<()> {
    if kernel.flavor() != f.flavor() {
        return Err(Error::FlavorMismatch {
            expected: kernel.flavor(),
            found: f.flavor(),
        });
    }
    Ok(())
}

fn coordinate(flavor: Flavor, x: f64) -> Result<f64> {
    if !(x.is_finite() && x > flavor.origin()) {
        return Err(Error::InvalidArgument(format!(
            "abscissa {x} must lie beyond the support origin {}",
            flavor.origin()
        )));
    }
    Ok(flavor.to_coordinate(x))
}

fn error_budget(tol: f64, f: &TestFunction, norm: f64) -> f64 {
    tol * (1.0 + f.bound() * norm)
}

/// `(U_φ f)(x)`.
pub fn apply_forward(kernel: &Kernel, f: &TestFunction, x: f64) -> Result<Complex64> {
    apply_forward_with(kernel, f, x, TOL_QUAD)
}

pub fn apply_forward_with(kernel: &Kernel, f: &TestFunction, x: f64, tol: f64) -> Result<Complex64> {
    check_pair(kernel, f)?;
    let u = coordinate(kernel.flavor(), x)?;
    let budget = error_budget(tol, f, kernel.l1_norm());
    if let Some(mut c) = Cascade::new(std::slice::from_ref(kernel), f, 0.5 * budget) {
        return Ok(c.value_at(u));
    }
    Ok(direct::forward(kernel, f, u, budget)?.0)
}

/// `(U_{k_n} ⋯ U_{k_1} f)(x)`: the kernels are applied in slice order.
///
/// Closed-form chains are evaluated exactly as nested operators; chains that
/// involve a sampled kernel fall back to the operator of the convolved kernel.
pub fn apply_chain(kernels: &[Kernel], f: &TestFunction, x: f64, tol: f64) -> Result<Complex64> {
    let Some(first) = kernels.first() else {
        return Err(Error::InvalidArgument("empty kernel chain".into()));
    };
    for k in kernels {
        check_pair(k, f)?;
    }
    let u = coordinate(first.flavor(), x)?;
    let norm: f64 = kernels.iter().map(Kernel::l1_norm).product();
    let budget = error_budget(tol, f, norm);
    if let Some(mut c) = Cascade::new(kernels, f, 0.5 * budget) {
        return Ok(c.value_at(u));
    }
    let mut combined = first.clone();
    for k in &kernels[1..] {
        combined = combined.convolve(k)?;
    }
    Ok(direct::forward(&combined, f, u, budget)?.0)
}

/// `(U*_φ f)(x)`.
pub fn apply_dual(kernel: &Kernel, f: &TestFunction, x: f64) -> Result<Complex64> {
    apply_dual_with(kernel, f, x, TOL_QUAD, EngineConfig::default().max_dual_panels)
}

pub fn apply_dual_with(kernel: &Kernel, f: &TestFunction, x: f64, tol: f64, max_panels: usize) -> Result<Complex64> {
    check_pair(kernel, f)?;
    let u = coordinate(kernel.flavor(), x)?;
    let budget = error_budget(tol, f, kernel.l1_norm());
    Ok(direct::dual(kernel, f, u, budget, max_panels)?.0)
}

/// Evaluates a method at increasing abscissae, reusing state where possible.
pub struct MethodEvaluator<'a> {
    method: &'a MethodDescriptor,
    f: &'a TestFunction,
    cfg: EngineConfig,
    route: Route<'a>,
    evaluations: u64,
}

enum Route<'a> {
    Cascade(Cascade<'a>),
    Forward,
    ForwardIterated,
    Dual(Kernel),
}

impl<'a> MethodEvaluator<'a> {
    pub fn new(method: &'a MethodDescriptor, f: &'a TestFunction, cfg: &EngineConfig) -> Result<Self> {
        cfg.validate()?;
        check_pair(method.kernel(), f)?;
        let budget = error_budget(cfg.tol_quad, f, method.operator_norm());
        let route = match method.variant() {
            Variant::Forward => {
                let stages = vec![method.kernel().clone(); method.iterations() as usize];
                match Cascade::new(&stages, f, 0.5 * budget) {
                    Some(c) => Route::Cascade(c),
                    None if method.iterations() == 1 => Route::Forward,
                    None => Route::ForwardIterated,
                }
            }
            Variant::Dual => Route::Dual(method.kernel().power(method.iterations())?),
        };
        Ok(Self {
            method,
            f,
            cfg: *cfg,
            route,
            evaluations: 0,
        })
    }

    pub fn evaluations(&self) -> u64 {
        match &self.route {
            Route::Cascade(c) => c.evaluations(),
            _ => self.evaluations,
        }
    }

    /// Operator value at the native abscissa `x`.
    pub fn value_at(&mut self, x: f64) -> Result<Complex64> {
        let u = coordinate(self.method.flavor(), x)?;
        let budget = error_budget(self.cfg.tol_quad, self.f, self.method.operator_norm());
        let kernel = self.method.kernel();
        let (value, n) = match &mut self.route {
            Route::Cascade(c) => return Ok(c.value_at(u)),
            Route::Forward => direct::forward(kernel, self.f, u, budget)?,
            Route::ForwardIterated => direct::forward_iterated(
                kernel,
                self.f,
                u,
                self.method.iterations(),
                self.cfg.iterate_cache_points,
                budget,
            )?,
            Route::Dual(k) => direct::dual(k, self.f, u, budget, self.cfg.max_dual_panels)?,
        };
        self.evaluations += n;
        Ok(value)
    }
}

/// Operator value of `method` at the native abscissa `x`.
pub fn apply_method(method: &MethodDescriptor, f: &TestFunction, x: f64, cfg: &EngineConfig) -> Result<Complex64> {
    MethodEvaluator::new(method, f, cfg)?.value_at(x)
}

/// Estimates `lim_{x→∞}` of the method's operator on `f` along the ladder
/// `x_j = x0·ratio^j`.
pub fn estimate_limit(method: &MethodDescriptor, f: &TestFunction) -> Result<SummationResult> {
    estimate_limit_with(method, f, &EngineConfig::default())
}

pub fn estimate_limit_with(method: &MethodDescriptor, f: &TestFunction, cfg: &EngineConfig) -> Result<SummationResult> {
    let mut ev = MethodEvaluator::new(method, f, cfg)?;
    let tol = cfg.tol_limit_for(f);
    let cap = 10.0 * f.bound() * method.operator_norm();
    let mut trace = Vec::new();
    let mut values = Vec::new();
    let mut decided = None;
    for j in 0..=cfg.max_ladder {
        let x = cfg.x0 * cfg.ratio.powi(j as i32);
        let v = ev.value_at(x)?;
        trace.push((x, v));
        values.push(v);
        if let Some(a) = limit::assess(&values, cfg.window, tol, cap) {
            decided = Some(a);
            break;
        }
    }
    let a = decided.unwrap_or_else(|| limit::conclude(&values, cfg.window, tol, cap));
    Ok(SummationResult {
        estimate: a.estimate,
        status: a.status,
        trace,
        oscillation_amplitude: a.amplitude,
        tolerance_used: tol,
        evaluations: ev.evaluations(),
    })
}

/// Bound on `|U_φf(x+δ) - U_φf(x)|` for `‖f‖∞ ≤ bound`:
/// `bound·(∫|φ(t) - φ(t+δ)| dt + ∫_0^δ |φ|)`, in the additive coordinate.
pub fn continuity_bound(kernel: &Kernel, bound: f64, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("δ must be non-negative, got {delta}")));
    }
    let tol = 1e-12;
    let end = kernel.truncation_length(tol) + delta;
    let step = kernel.length_scale().min(0.5).min(delta.max(1e-3));
    let mut cuts: Vec<f64> = Vec::new();
    let mut a = 0.0;
    while a < end {
        cuts.push(a);
        a += step;
    }
    cuts.push(end);
    for &b in kernel.breakpoints() {
        cuts.push(b);
        if b >= delta {
            cuts.push(b - delta);
        }
    }
    cuts.push(delta);
    cuts.retain(|c| (0.0..=end).contains(c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let share = tol / cuts.len() as f64;
    let mut shift = 0.0;
    let mut head = 0.0;
    for w in cuts.windows(2) {
        shift += quadrature::integrate_real(
            |t| (kernel.density(t) - kernel.density(t + delta)).norm(),
            w[0],
            w[1],
            share,
        )?;
        if w[1] <= delta {
            head += quadrature::integrate_real(|t| kernel.density(t).norm(), w[0], w[1], share)?;
        }
    }
    Ok(bound * (shift + head))
}
