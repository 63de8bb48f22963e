//! Forward operators with exponential-polynomial kernels as linear ODE chains.
//!
//! For a term `c·s^m e^{-λs}` the partial integral
//! `y_m(X) = ∫_0^X F(v) (X-v)^m/m! e^{-λ(X-v)} dv` satisfies
//! `y_0' = F - λ y_0` and `y_m' = y_{m-1} - λ y_m`, so the operator can be
//! advanced panel by panel with a spectral Gauss–Legendre rule. Nested
//! iterates chain several such stages, each fed with the node values of the
//! previous one.

use std::sync::OnceLock;

use num_complex::Complex64;

use super::function::TestFunction;
use crate::kernel::Kernel;
use crate::quadrature::SpectralRule;

const NODES: usize = 20;
/// Longest panel in the additive coordinate.
const MAX_PANEL: f64 = 0.5;
/// Largest phase the integrand may turn through on one panel.
const MAX_PHASE: f64 = 2.0 * std::f64::consts::PI;

fn rule() -> &'static SpectralRule {
    static RULE: OnceLock<SpectralRule> = OnceLock::new();
    RULE.get_or_init(|| SpectralRule::new(NODES))
}

#[derive(Debug, Clone)]
struct RateGroup {
    rate: Complex64,
    /// `coefficient·m!` for each power `m`.
    weights: Vec<Complex64>,
    state: Vec<Complex64>,
}

#[derive(Debug, Clone)]
struct Stage {
    groups: Vec<RateGroup>,
}

impl Stage {
    fn from_kernel(kernel: &Kernel) -> Option<Self> {
        let poly = kernel.exp_polynomial()?;
        let mut groups: Vec<RateGroup> = Vec::new();
        for t in poly.terms() {
            let idx = match groups.iter().position(|g| g.rate == t.rate) {
                Some(i) => i,
                None => {
                    groups.push(RateGroup {
                        rate: t.rate,
                        weights: Vec::new(),
                        state: Vec::new(),
                    });
                    groups.len() - 1
                }
            };
            let g = &mut groups[idx];
            let m = t.power as usize;
            if g.weights.len() <= m {
                g.weights.resize(m + 1, Complex64::new(0.0, 0.0));
                g.state.resize(m + 1, Complex64::new(0.0, 0.0));
            }
            let fact: f64 = (1..=t.power).map(f64::from).product();
            g.weights[m] += t.coefficient * fact;
        }
        Some(Self { groups })
    }

    fn max_rate(&self) -> f64 {
        self.groups.iter().map(|g| g.rate.norm()).fold(0.0, f64::max)
    }

    fn reset(&mut self) {
        for g in &mut self.groups {
            g.state.iter_mut().for_each(|y| *y = Complex64::new(0.0, 0.0));
        }
    }

    fn output(&self) -> Complex64 {
        self.groups
            .iter()
            .flat_map(|g| g.weights.iter().zip(&g.state).map(|(w, y)| w * y))
            .sum()
    }
}

/// Stateful evaluator of `U_{k_n} ⋯ U_{k_1} f` at increasing abscissae.
pub(crate) struct Cascade<'a> {
    f: &'a TestFunction,
    stages: Vec<Stage>,
    window: f64,
    max_step: f64,
    pos: f64,
    evaluations: u64,
}

impl<'a> Cascade<'a> {
    /// `None` unless every kernel has a closed form. `eps` bounds the error
    /// from restarting the recursion a finite window before each abscissa.
    pub(crate) fn new(kernels: &[Kernel], f: &'a TestFunction, eps: f64) -> Option<Self> {
        let stages: Vec<Stage> = kernels.iter().map(Stage::from_kernel).collect::<Option<_>>()?;
        let norms: Vec<f64> = kernels.iter().map(Kernel::l1_norm).collect();
        let bound = f.bound().max(1e-300);
        let mut window = 0.0;
        for (i, k) in kernels.iter().enumerate() {
            let others: f64 = norms.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, n)| n).product();
            let share = eps / (kernels.len() as f64 * bound * others.max(1e-300));
            window += k.truncation_length(share);
        }
        let max_rate = stages.iter().map(Stage::max_rate).fold(0.0, f64::max);
        let max_step = if max_rate > 0.0 { (2.0 / max_rate).min(MAX_PANEL) } else { MAX_PANEL };
        Some(Self {
            f,
            stages,
            window,
            max_step,
            pos: f64::NEG_INFINITY,
            evaluations: 0,
        })
    }

    pub(crate) fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Operator value at the additive coordinate `x ≥ 0`.
    pub(crate) fn value_at(&mut self, x: f64) -> Complex64 {
        let start = (x - self.window).max(0.0);
        if start > self.pos || x < self.pos {
            self.stages.iter_mut().for_each(Stage::reset);
            self.pos = start;
        }
        while self.pos < x {
            let b = self.panel_end(self.pos, x);
            self.advance(self.pos, b);
            self.pos = b;
        }
        self.stages.last().map_or(Complex64::new(0.0, 0.0), Stage::output)
    }

    fn panel_end(&self, a: f64, x: f64) -> f64 {
        let mut h = self.max_step;
        let w = self.f.frequency_coordinate(a);
        if w > 0.0 {
            h = h.min(MAX_PHASE / w);
            let w2 = self.f.frequency_coordinate(a + h);
            if w2 * h > MAX_PHASE {
                h = MAX_PHASE / w2;
            }
        }
        let mut b = (a + h).min(x);
        if let Some(j) = self.f.next_jump(a) {
            b = b.min(j);
        }
        if b <= a {
            // below floating-point resolution: take the smallest representable step
            b = x.min(f64::from_bits(a.to_bits() + 1));
        }
        b
    }

    fn advance(&mut self, a: f64, b: f64) {
        let rule = rule();
        let h = b - a;
        let half = 0.5 * h;
        let offsets: [f64; NODES] = std::array::from_fn(|p| half * (rule.nodes[p] + 1.0));
        let mut input: [Complex64; NODES] = std::array::from_fn(|p| self.f.eval_coordinate(a + offsets[p]));
        self.evaluations += NODES as u64;

        let n_stages = self.stages.len();
        for (si, stage) in self.stages.iter_mut().enumerate() {
            let need_out = si + 1 < n_stages;
            let mut out = [Complex64::new(0.0, 0.0); NODES];
            for g in &mut stage.groups {
                let growth: [Complex64; NODES] = std::array::from_fn(|p| (g.rate * offsets[p]).exp());
                let decay_end = (-g.rate * h).exp();
                let mut prev = input;
                let top = g.state.len() - 1;
                for m in 0..=top {
                    let integrand: [Complex64; NODES] = std::array::from_fn(|p| growth[p] * prev[p]);
                    let y_a = g.state[m];
                    let total: Complex64 = integrand.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
                    g.state[m] = decay_end * (y_a + total * half);
                    if m < top || need_out {
                        let mut nodes = [Complex64::new(0.0, 0.0); NODES];
                        for q in 0..NODES {
                            let row = &rule.integration[q];
                            let partial: Complex64 = integrand.iter().zip(row).map(|(v, s)| v * s).sum();
                            nodes[q] = (y_a + partial * half) / growth[q];
                        }
                        if need_out {
                            for q in 0..NODES {
                                out[q] += g.weights[m] * nodes[q];
                            }
                        }
                        prev = nodes;
                    }
                }
            }
            if need_out {
                input = out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Flavor, Kernel};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sin_additive() -> TestFunction {
        TestFunction::new("sin", Flavor::Additive, 1.0, |t| c(t.sin(), 0.0))
            .unwrap()
            .with_frequency(|_| 1.0)
    }

    #[test]
    fn exponential_on_sine_matches_closed_form() {
        let k = Kernel::exponential(1.0).unwrap();
        let f = sin_additive();
        let mut cas = Cascade::new(&[k], &f, 1e-12).unwrap();
        for &x in &[0.5f64, 3.0, 10.0, 40.0, 1000.0] {
            let exact = 0.5 * (x.sin() - x.cos()) + 0.5 * (-x).exp();
            assert!((cas.value_at(x).re - exact).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn nested_stages_match_power_kernel() {
        let k = Kernel::power_law(1.0).unwrap();
        let f = TestFunction::new("sin", Flavor::Multiplicative, 1.0, |t| c(t.sin(), 0.0))
            .unwrap()
            .with_frequency(|_| 1.0);
        let k2 = k.power(2).unwrap();
        let mut nested = Cascade::new(&[k.clone(), k.clone()], &f, 1e-12).unwrap();
        let mut single = Cascade::new(&[k2], &f, 1e-12).unwrap();
        for &x in &[2.0f64, 10.0, 100.0, 1e4] {
            let u = x.ln();
            let d = (nested.value_at(u) - single.value_at(u)).norm();
            assert!(d < 1e-11, "x={x} d={d}");
        }
    }

    #[test]
    fn cesaro_mean_of_sine() {
        let k = Kernel::power_law(1.0).unwrap();
        let f = TestFunction::new("sin", Flavor::Multiplicative, 1.0, |t| c(t.sin(), 0.0))
            .unwrap()
            .with_frequency(|_| 1.0);
        let mut cas = Cascade::new(&[k], &f, 1e-12).unwrap();
        for &x in &[1.5f64, 7.0, 300.0, 1e5] {
            let exact = (1f64.cos() - x.cos()) / x;
            assert!((cas.value_at(x.ln()).re - exact).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn restart_windows_do_not_leak_state() {
        let k = Kernel::exponential(2.0).unwrap();
        let f = TestFunction::new("one", Flavor::Additive, 1.0, |_| c(1.0, 0.0)).unwrap();
        let mut cas = Cascade::new(&[k], &f, 1e-12).unwrap();
        for x in [1.0f64, 1e3, 1e6, 5.0] {
            let exact = 1.0 - (-2.0 * x).exp();
            assert!((cas.value_at(x).re - exact).abs() < 1e-11, "x={x}");
        }
    }
}
