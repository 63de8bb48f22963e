//! Kernel transforms and the Wiener zero-set classifier.
//!
//! Additive kernels use `φ̂(ξ) = ∫_0^∞ φ(t) e^{-iξt} dt`; multiplicative kernels
//! use the character transform `ψ̂(x) = ∫_1^∞ ψ(t) t^{-ix} dt/t`. Both reduce to
//! the same integral in the additive coordinate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CatalogEntry, Flavor, Kernel, KernelBody};
use crate::quadrature;
use crate::{TOL_QUAD, ZERO_EPSILON};

/// Largest number of frequency samples the certified-window refinement may use.
const MAX_GRID: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `|φ̂| ≥ margin` on the whole window `[-Ξ, Ξ]`.
    NonvanishingOnWindow { margin: f64 },
    ZeroFound { xi: f64, modulus: f64 },
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumProfile {
    pub frequencies: Vec<f64>,
    pub values: Vec<Complex64>,
    pub min_modulus: f64,
    pub lipschitz_bound: Option<f64>,
    pub verdict: Verdict,
    /// Closed-form modulus identity backing an analytic verdict.
    pub analytic: Option<String>,
}

impl SpectrumProfile {
    /// `freq,re,im,modulus` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq,re,im,modulus\n");
        for (x, v) in self.frequencies.iter().zip(&self.values) {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", x, v.re, v.im, v.norm()));
        }
        out
    }

    pub fn grid_step(&self) -> f64 {
        match self.frequencies.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Half-width `Ξ` of the frequency window.
    pub xi_max: f64,
    /// Points in the first coarse pass.
    pub initial_points: usize,
    pub max_refinements: u32,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            xi_max: 50.0,
            initial_points: 2001,
            max_refinements: 3,
        }
    }
}

fn expect_flavor(kernel: &Kernel, flavor: Flavor) -> Result<()> {
    if kernel.flavor() != flavor {
        return Err(Error::FlavorMismatch {
            expected: flavor,
            found: kernel.flavor(),
        });
    }
    Ok(())
}

fn checked(value: Complex64, xi: f64) -> Result<Complex64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::TransformFailed { xi })
    }
}

/// Fourier transform of an additive kernel (closed form where available).
pub fn fourier_transform(kernel: &Kernel, xi: f64) -> Result<Complex64> {
    expect_flavor(kernel, Flavor::Additive)?;
    checked(kernel.transform(xi), xi)
}

/// Character transform of a multiplicative kernel.
pub fn mellin_transform(kernel: &Kernel, x: f64) -> Result<Complex64> {
    expect_flavor(kernel, Flavor::Multiplicative)?;
    checked(kernel.transform(x), x)
}

/// `∫_0^∞ g(u) e^{-iξu} du` by panelled adaptive quadrature, truncated where
/// the kernel's `L¹` tail drops below `tol`.
fn transform_by_quadrature<G>(kernel: &Kernel, g: G, xi: f64, tol: f64) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    let end = kernel.truncation_length(0.5 * tol);
    let mut width = kernel.length_scale().min(1.0);
    if xi != 0.0 {
        width = width.min(std::f64::consts::PI / xi.abs());
    }
    let panels = ((end / width).ceil() as usize).max(1);
    let h = end / panels as f64;
    let share = 0.5 * tol / panels as f64;
    let mut cuts: Vec<f64> = (0..=panels).map(|i| i as f64 * h).collect();
    cuts.extend(kernel.breakpoints().iter().copied().filter(|&b| b > 0.0 && b < end));
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let est = quadrature::integrate(
            |u| g(u) * Complex64::new(0.0, -xi * u).exp(),
            w[0],
            w[1],
            share,
        )
        .map_err(|_| Error::TransformFailed { xi })?;
        acc += est.value;
    }
    checked(acc, xi)
}

/// Fourier transform computed by quadrature of the density, ignoring any
/// closed form.
pub fn fourier_transform_quadrature(kernel: &Kernel, xi: f64, tol: f64) -> Result<Complex64> {
    expect_flavor(kernel, Flavor::Additive)?;
    transform_by_quadrature(kernel, |u| kernel.density(u), xi, tol)
}

/// Character transform by quadrature of `ψ(t) t^{-ix} dt/t`, evaluating `ψ` at
/// native points `t = e^u`.
pub fn mellin_transform_quadrature(kernel: &Kernel, x: f64, tol: f64) -> Result<Complex64> {
    expect_flavor(kernel, Flavor::Multiplicative)?;
    transform_by_quadrature(
        kernel,
        |u| kernel.evaluate(u.exp()).unwrap_or(Complex64::new(f64::NAN, 0.0)),
        x,
        tol,
    )
}

fn analytic_rate(kernel: &Kernel) -> Option<(f64, &'static str)> {
    if kernel.coefficient() != Complex64::new(1.0, 0.0) {
        return None;
    }
    match kernel.body() {
        KernelBody::ClosedForm(CatalogEntry::Exponential { lambda }) => Some((*lambda, "exponential")),
        KernelBody::ClosedForm(CatalogEntry::PowerLaw { r }) => Some((*r, "power_law")),
        _ => None,
    }
}

fn uniform_grid(xi_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|i| -xi_max + 2.0 * xi_max * i as f64 / (n - 1) as f64)
        .collect()
}

fn sample(kernel: &Kernel, grid: &[f64]) -> Result<Vec<Complex64>> {
    grid.iter().map(|&x| checked(kernel.transform(x), x)).collect()
}

fn min_modulus(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
}

/// Golden-section minimisation of `|φ̂|` on `[a, b]`.
fn refine_minimum(kernel: &Kernel, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let m = |x: f64| kernel.transform(x).norm();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (m(c), m(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = m(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = m(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, m(x))
}

/// Looks for a zero near the grid's local minima of `|φ̂|` that could hide
/// one, given the Lipschitz bound `lip` (or any minimum if unknown).
fn search_zero(kernel: &Kernel, grid: &[f64], values: &[Complex64], lip: Option<f64>) -> Option<(f64, f64)> {
    let h = grid[1] - grid[0];
    let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..moduli.len() {
        let left = if i == 0 { f64::INFINITY } else { moduli[i - 1] };
        let right = moduli.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if moduli[i] > left || moduli[i] > right {
            continue;
        }
        if let Some(l) = lip {
            if moduli[i] > l * h {
                continue;
            }
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let (x, m) = refine_minimum(kernel, lo, hi);
        if best.is_none_or(|(_, bm)| m < bm) {
            best = Some((x, m));
        }
    }
    best.filter(|&(_, m)| m < ZERO_EPSILON)
}

/// Wiener classification over the window `[-Ξ, Ξ]`.
pub fn classify_wiener(kernel: &Kernel, opts: &SpectrumOptions) -> Result<SpectrumProfile> {
    if !(opts.xi_max.is_finite() && opts.xi_max > 0.0) {
        return Err(Error::InvalidArgument("frequency window must be positive".into()));
    }
    let lip = kernel.first_moment();
    let mut grid = uniform_grid(opts.xi_max, opts.initial_points);
    let mut values = sample(kernel, &grid)?;

    if let Some((rate, name)) = analytic_rate(kernel) {
        let margin = rate / (rate * rate + opts.xi_max * opts.xi_max).sqrt();
        let identity = match name {
            "exponential" => format!("|φ̂(ξ)|² = {0}²/({0}² + ξ²) > 0", rate),
            _ => format!("|ψ̂(x)|² = {0}²/({0}² + x²) > 0", rate),
        };
        return Ok(SpectrumProfile {
            min_modulus: min_modulus(&values),
            frequencies: grid,
            values,
            lipschitz_bound: lip,
            verdict: Verdict::NonvanishingOnWindow { margin },
            analytic: Some(identity),
        });
    }

    let mut verdict = Verdict::Inconclusive;
    for round in 0..=opts.max_refinements {
        if let Some((xi, modulus)) = search_zero(kernel, &grid, &values, lip) {
            verdict = Verdict::ZeroFound { xi, modulus };
            break;
        }
        let Some(l) = lip else { break };
        let m = min_modulus(&values);
        let h = grid[1] - grid[0];
        let certified = m - l * h / 2.0;
        if certified > 0.0 {
            verdict = Verdict::NonvanishingOnWindow { margin: certified };
            break;
        }
        if round == opts.max_refinements {
            break;
        }
        let target = (m / (2.0 * l)).min(h / 2.0);
        let points = (2.0 * opts.xi_max / target).ceil() as usize + 1;
        if target <= 0.0 || points > MAX_GRID {
            break;
        }
        grid = uniform_grid(opts.xi_max, points);
        values = sample(kernel, &grid)?;
    }

    Ok(SpectrumProfile {
        min_modulus: min_modulus(&values),
        frequencies: grid,
        values,
        lipschitz_bound: lip,
        verdict,
        analytic: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualTransformReport {
    pub frequencies: Vec<f64>,
    /// Transform of the reflected kernel `φ*(x) = φ̃(-x)`, by quadrature.
    pub reflected: Vec<Complex64>,
    /// `φ̂̃(-ξ)` for comparison.
    pub mirrored: Vec<Complex64>,
    pub max_deviation: f64,
}

/// Checks `φ̂*(ξ) = φ̂̃(-ξ)` on a uniform grid of `points` frequencies.
pub fn dual_transform_identity_check(kernel: &Kernel, xi_max: f64, points: usize) -> Result<DualTransformReport> {
    expect_flavor(kernel, Flavor::Additive)?;
    let frequencies = uniform_grid(xi_max, points);
    let mut reflected = Vec::with_capacity(frequencies.len());
    let mut mirrored = Vec::with_capacity(frequencies.len());
    let mut max_deviation: f64 = 0.0;
    for &xi in &frequencies {
        // ∫_{-∞}^0 φ(-x) e^{-iξx} dx = ∫_0^∞ φ(s) e^{iξs} ds
        let r = transform_by_quadrature(kernel, |s| kernel.density(s), -xi, 0.1 * TOL_QUAD)?;
        let m = fourier_transform(kernel, -xi)?;
        max_deviation = max_deviation.max((r - m).norm());
        reflected.push(r);
        mirrored.push(m);
    }
    Ok(DualTransformReport {
        frequencies,
        reflected,
        mirrored,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_transform_closed_form() {
        let k = Kernel::exponential(1.0).unwrap();
        for &xi in &[-7.0, 0.0, 0.3, 50.0] {
            let expect = c(1.0, xi).inv();
            assert!((fourier_transform(&k, xi).unwrap() - expect).norm() < 1e-15);
            let q = fourier_transform_quadrature(&k, xi, 1e-10).unwrap();
            assert!((q - expect).norm() < 1e-9, "xi={xi}");
        }
        assert!(mellin_transform(&k, 1.0).is_err());
    }

    #[test]
    fn power_law_character_transform() {
        for &r in &[0.5, 1.0, 2.0] {
            let k = Kernel::power_law(r).unwrap();
            for &x in &[-20.0, 0.0, 1.0, 49.0] {
                let expect = r / c(r, x);
                assert!((mellin_transform(&k, x).unwrap() - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn counterexample_vanishes_at_its_frequency() {
        let a = Kernel::counterexample_additive(1.0).unwrap();
        assert!(fourier_transform(&a, 1.0).unwrap().norm() < ZERO_EPSILON);
        assert!((fourier_transform(&a, 0.0).unwrap() - 1.0).norm() < 1e-14);
        let m = Kernel::counterexample_multiplicative(1.0).unwrap();
        assert!(mellin_transform(&m, 1.0).unwrap().norm() < ZERO_EPSILON);
    }

    #[test]
    fn classifier_verdicts() {
        let opts = SpectrumOptions::default();
        let p = classify_wiener(&Kernel::exponential(1.0).unwrap(), &opts).unwrap();
        assert!(matches!(p.verdict, Verdict::NonvanishingOnWindow { .. }));
        assert!(p.analytic.is_some());
        let p = classify_wiener(&Kernel::power_law(2.0).unwrap(), &opts).unwrap();
        assert!(matches!(p.verdict, Verdict::NonvanishingOnWindow { .. }));

        let p = classify_wiener(&Kernel::counterexample_additive(1.0).unwrap(), &opts).unwrap();
        match p.verdict {
            Verdict::ZeroFound { xi, modulus } => {
                assert!((xi - 1.0).abs() < 1e-6, "xi={xi}");
                assert!(modulus < ZERO_EPSILON);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn mixture_without_analytic_identity_gets_window_certificate() {
        let k = Kernel::from_catalog(CatalogEntry::FiniteMixture(vec![
            (c(0.5, 0.0), CatalogEntry::Exponential { lambda: 1.0 }),
            (c(0.5, 0.0), CatalogEntry::Exponential { lambda: 3.0 }),
        ]))
        .unwrap();
        let p = classify_wiener(&k, &SpectrumOptions::default()).unwrap();
        let Verdict::NonvanishingOnWindow { margin } = p.verdict else {
            panic!("{:?}", p.verdict)
        };
        assert!(p.analytic.is_none());
        // certificate survives a 10x finer grid
        let fine = uniform_grid(50.0, 10 * (p.frequencies.len() - 1) + 1);
        let m = min_modulus(&sample(&k, &fine).unwrap());
        assert!(m > margin / 2.0);
    }

    #[test]
    fn missing_lipschitz_bound_is_inconclusive() {
        let k = Kernel::exponential(2.0).unwrap().convolve(&Kernel::exponential(1.0).unwrap()).unwrap();
        let k = k.without_first_moment();
        let p = classify_wiener(&k, &SpectrumOptions::default()).unwrap();
        assert_eq!(p.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn riemann_lebesgue_decay_at_window_edge() {
        for k in [
            Kernel::exponential(1.0).unwrap(),
            Kernel::counterexample_additive(1.0).unwrap(),
            Kernel::power_law(2.0).unwrap().to_additive().unwrap(),
        ] {
            assert!(fourier_transform(&k, 50.0).unwrap().norm() < 0.1);
        }
    }

    #[test]
    fn dual_identity_and_reflected_zero() {
        let e = Kernel::exponential(1.0).unwrap();
        let rep = dual_transform_identity_check(&e, 50.0, 101).unwrap();
        assert!(rep.max_deviation < TOL_QUAD);
        for (x, r) in rep.frequencies.iter().zip(&rep.reflected) {
            assert!((r - c(1.0, -x).inv()).norm() < TOL_QUAD);
            // real kernel: reflected transform is the conjugate
            assert!((r - fourier_transform(&e, *x).unwrap().conj()).norm() < TOL_QUAD);
        }
        let ce = Kernel::counterexample_additive(1.0).unwrap();
        let rep = dual_transform_identity_check(&ce, 1.0, 3).unwrap();
        assert!(rep.max_deviation < TOL_QUAD);
        assert!(rep.reflected[0].norm() < 1e-8);
    }

    #[test]
    fn convolution_theorem_on_grid() {
        let a = Kernel::exponential(1.0).unwrap();
        let b = Kernel::counterexample_additive(2.0).unwrap();
        let ab = a.convolve(&b).unwrap();
        let a3 = a.power(3).unwrap();
        for xi in uniform_grid(50.0, 201) {
            let lhs = fourier_transform(&ab, xi).unwrap();
            let rhs = fourier_transform(&a, xi).unwrap() * fourier_transform(&b, xi).unwrap();
            assert!((lhs - rhs).norm() < 10.0 * TOL_QUAD);
            let p = fourier_transform(&a3, xi).unwrap();
            assert!((p - fourier_transform(&a, xi).unwrap().powi(3)).norm() < 10.0 * TOL_QUAD);
        }
    }
}
