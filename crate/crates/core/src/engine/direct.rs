//! Operators by panelled adaptive quadrature in the additive coordinate.

use num_complex::Complex64;

use super::function::TestFunction;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quadrature::{self, wynn_epsilon};

const MAX_PANEL: f64 = 0.5;
const MIN_DUAL_PANELS: usize = 12;
const WYNN_HISTORY: usize = 40;

/// Integrand source seen by the quadrature routes, in the additive coordinate.
pub(crate) trait Source {
    fn value(&self, v: f64) -> Complex64;
    fn frequency(&self, v: f64) -> f64;
    fn next_jump(&self, v: f64) -> Option<f64>;
    fn bound(&self) -> f64;
}

impl Source for TestFunction {
    fn value(&self, v: f64) -> Complex64 {
        self.eval_coordinate(v)
    }
    fn frequency(&self, v: f64) -> f64 {
        self.frequency_coordinate(v)
    }
    fn next_jump(&self, v: f64) -> Option<f64> {
        TestFunction::next_jump(self, v)
    }
    fn bound(&self) -> f64 {
        TestFunction::bound(self)
    }
}

/// Linear interpolation of operator values on a uniform grid.
pub(crate) struct Tabulated<'a> {
    lo: f64,
    step: f64,
    values: Vec<Complex64>,
    bound: f64,
    parent: &'a dyn Source,
}

impl Source for Tabulated<'_> {
    fn value(&self, v: f64) -> Complex64 {
        let s = ((v - self.lo) / self.step).max(0.0);
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let frac = (s - i as f64).clamp(0.0, 1.0);
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }
    fn frequency(&self, v: f64) -> f64 {
        self.parent.frequency(v)
    }
    /// Table nodes, where the interpolant has kinks.
    fn next_jump(&self, v: f64) -> Option<f64> {
        let mut i = ((v - self.lo) / self.step).floor().max(-1.0) as i64 + 1;
        let mut node = self.lo + i as f64 * self.step;
        if node <= v {
            i += 1;
            node = self.lo + i as f64 * self.step;
        }
        (i >= 0 && (i as usize) < self.values.len()).then_some(node)
    }
    fn bound(&self) -> f64 {
        self.bound
    }
}

fn panel_width(kernel: &Kernel, src: &dyn Source, a: f64) -> f64 {
    let mut h = kernel.length_scale().min(MAX_PANEL);
    let w = src.frequency(a);
    if w > 0.0 {
        h = h.min(std::f64::consts::PI / w);
        let w2 = src.frequency(a + h);
        if w2 * h > std::f64::consts::PI {
            h = std::f64::consts::PI / w2;
        }
    }
    h
}

/// Next cut after `a`: width cap, source jumps, and kernel kinks mapped
/// through `kink` (sorted ascending).
fn next_cut(kernel: &Kernel, src: &dyn Source, a: f64, end: f64, kinks: &[f64]) -> f64 {
    let mut b = (a + panel_width(kernel, src, a)).min(end);
    if let Some(j) = src.next_jump(a) {
        b = b.min(j);
    }
    let i = kinks.partition_point(|&k| k <= a);
    if let Some(&k) = kinks.get(i) {
        b = b.min(k);
    }
    if b <= a {
        b = end.min(f64::from_bits(a.to_bits() + 1));
    }
    b
}

/// `∫_0^X F(X-s) k(s) ds`.
pub(crate) fn forward(kernel: &Kernel, src: &dyn Source, x: f64, tol: f64) -> Result<(Complex64, u64)> {
    if x <= 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0));
    }
    let reach = kernel.truncation_length(0.5 * tol / src.bound().max(1e-300));
    let lo = (x - reach).max(0.0);
    let mut kinks: Vec<f64> = kernel
        .breakpoints()
        .iter()
        .map(|&b| x - b)
        .filter(|&v| v > lo && v < x)
        .collect();
    kinks.sort_by(f64::total_cmp);
    let mut evaluations = 0u64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut a = lo;
    let span = x - lo;
    while a < x {
        let b = next_cut(kernel, src, a, x, &kinks);
        let share = 0.5 * tol * (b - a) / span;
        let est = quadrature::integrate(
            |v| {
                evaluations += 1;
                src.value(v) * kernel.density(x - v)
            },
            a,
            b,
            share,
        )?;
        acc += est.value;
        a = b;
    }
    Ok((acc, evaluations))
}

/// `∫_0^∞ F(X+s) k(s) ds`, truncated by the kernel tail bound or, for slowly
/// decaying oscillatory tails, accelerated with Wynn's epsilon algorithm.
pub(crate) fn dual(
    kernel: &Kernel,
    src: &dyn Source,
    x: f64,
    tol: f64,
    max_panels: usize,
) -> Result<(Complex64, u64)> {
    let bound = src.bound().max(1e-300);
    let mut kinks: Vec<f64> = kernel.breakpoints().iter().map(|&b| x + b).collect();
    kinks.sort_by(f64::total_cmp);
    let mut evaluations = 0u64;
    let mut partial = Complex64::new(0.0, 0.0);
    let mut sums: Vec<Complex64> = Vec::new();
    let mut accelerated: Vec<Complex64> = Vec::new();
    let panel_tol = 0.01 * tol;
    let mut a = x;
    for _ in 0..max_panels {
        let b = next_cut(kernel, src, a, f64::INFINITY, &kinks);
        let est = quadrature::integrate(
            |v| {
                evaluations += 1;
                src.value(v) * kernel.density(v - x)
            },
            a,
            b,
            panel_tol,
        )?;
        partial += est.value;
        a = b;
        if bound * kernel.tail_l1(a - x) <= 0.5 * tol {
            return Ok((partial, evaluations));
        }
        sums.push(partial);
        if sums.len() >= MIN_DUAL_PANELS {
            let from = sums.len().saturating_sub(WYNN_HISTORY);
            if let Some(e) = wynn_epsilon(&sums[from..]) {
                accelerated.push(e);
                let n = accelerated.len();
                if n >= 3 {
                    let recent = &accelerated[n - 3..];
                    let agree = recent.iter().all(|r| (r - recent[2]).norm() <= 0.5 * tol);
                    if agree {
                        return Ok((recent[2], evaluations));
                    }
                }
            }
        }
    }
    Err(Error::QuadratureFailed { a: x, b: a })
}

/// `k`-fold forward iterate through tabulated intermediate stages.
pub(crate) fn forward_iterated(
    kernel: &Kernel,
    f: &TestFunction,
    x: f64,
    k: u32,
    points: usize,
    tol: f64,
) -> Result<(Complex64, u64)> {
    if k <= 1 {
        return forward(kernel, f, x, tol);
    }
    let points = points.max(2);
    let stage_reach = kernel.truncation_length(0.5 * tol / f.bound().max(1e-300));
    let lo = (x - stage_reach * (k - 1) as f64).max(0.0);
    let step = (x - lo) / (points - 1) as f64;
    let mut evaluations = 0;
    let mut bound = f.bound();
    let first: Vec<Complex64> = (0..points)
        .map(|i| forward(kernel, f, lo + i as f64 * step, tol).map(|(v, n)| {
            evaluations += n;
            v
        }))
        .collect::<Result<_>>()?;
    bound *= kernel.l1_norm();
    let mut table = first;
    for _ in 2..k {
        let src = Tabulated { lo, step, values: table, bound, parent: f };
        let next: Vec<Complex64> = (0..points)
            .map(|i| forward(kernel, &src, lo + i as f64 * step, tol).map(|(v, n)| {
                evaluations += n;
                v
            }))
            .collect::<Result<_>>()?;
        bound *= kernel.l1_norm();
        table = next;
    }
    let src = Tabulated { lo, step, values: table, bound, parent: f };
    let (v, n) = forward(kernel, &src, x, tol)?;
    Ok((v, evaluations + n))
}
