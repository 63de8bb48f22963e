//! Integrable kernels on the additive half-line `[0, ∞)` and the multiplicative
//! half-line `[1, ∞)`, together with their convolution algebra.
//!
//! Internally every kernel is described by its density in the additive
//! coordinate `u` (`u = t` or `u = ln t`), where the multiplicative Haar measure
//! `dt/t` becomes `du`. This makes [`Kernel::to_additive`] an exact isometry.

mod exp_poly;
mod sampled;
pub mod spec_file;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use exp_poly::{ExpPolynomial, ExpTerm};
use exp_poly::ExpPolynomial as Poly;
pub use sampled::SampledKernel;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::{MASS_EPSILON, TOL_QUAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `[0, ∞)` with Lebesgue measure.
    Additive,
    /// `[1, ∞)` with Haar measure `dt/t`.
    Multiplicative,
}

impl Flavor {
    /// Native point -> additive coordinate.
    pub fn to_coordinate(self, t: f64) -> f64 {
        match self {
            Flavor::Additive => t,
            Flavor::Multiplicative => t.ln(),
        }
    }

    pub fn from_coordinate(self, u: f64) -> f64 {
        match self {
            Flavor::Additive => u,
            Flavor::Multiplicative => u.exp(),
        }
    }

    pub fn origin(self) -> f64 {
        match self {
            Flavor::Additive => 0.0,
            Flavor::Multiplicative => 1.0,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Additive => write!(f, "additive"),
            Flavor::Multiplicative => write!(f, "multiplicative"),
        }
    }
}

/// Closed-form catalog entries.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogEntry {
    /// `λ e^{-λx}` on `[0, ∞)`.
    Exponential { lambda: f64 },
    /// `r x^{-r}` on `[1, ∞)`.
    PowerLaw { r: f64 },
    /// Unit-mass additive kernel whose transform vanishes exactly at `ξ = α`.
    CounterexampleAdditive { alpha: f64 },
    /// Multiplicative twin of [`CatalogEntry::CounterexampleAdditive`]; its
    /// character transform vanishes exactly at `α`.
    CounterexampleMultiplicative { alpha: f64 },
    FiniteMixture(Vec<(Complex64, CatalogEntry)>),
    /// Raw exponential polynomial in the additive coordinate; produced by
    /// convolution and usable for either flavor.
    ExpPolynomial(ExpPolynomial),
}

impl CatalogEntry {
    /// The flavor this entry is native to, or `None` if it adapts to either.
    pub fn native_flavor(&self) -> Result<Option<Flavor>> {
        use CatalogEntry::*;
        Ok(match self {
            Exponential { .. } | CounterexampleAdditive { .. } => Some(Flavor::Additive),
            PowerLaw { .. } | CounterexampleMultiplicative { .. } => Some(Flavor::Multiplicative),
            ExpPolynomial(_) => None,
            FiniteMixture(parts) => {
                let mut flavor = None;
                for (_, e) in parts {
                    match (flavor, e.native_flavor()?) {
                        (_, None) => {}
                        (None, f) => flavor = f,
                        (Some(a), Some(b)) if a != b => {
                            return Err(Error::InvalidKernel(
                                "mixture combines additive and multiplicative entries".into(),
                            ))
                        }
                        _ => {}
                    }
                }
                flavor
            }
        })
    }

    /// Density in the additive coordinate.
    pub fn to_exp_polynomial(&self) -> Result<ExpPolynomial> {
        use CatalogEntry::*;
        let real = |x: f64| Complex64::new(x, 0.0);
        let check = |name: &str, v: f64| -> Result<()> {
            if !v.is_finite() {
                return Err(Error::InvalidKernel(format!("{name} parameter is not finite")));
            }
            Ok(())
        };
        match self {
            Exponential { lambda } => {
                check("exponential", *lambda)?;
                if *lambda <= 0.0 {
                    return Err(Error::InvalidKernel("exponential rate must be positive".into()));
                }
                Poly::single(real(*lambda), 0, real(*lambda))
            }
            PowerLaw { r } => {
                check("power_law", *r)?;
                if *r <= 0.0 {
                    return Err(Error::InvalidKernel("power-law exponent must be positive".into()));
                }
                Poly::single(real(*r), 0, real(*r))
            }
            CounterexampleAdditive { alpha } | CounterexampleMultiplicative { alpha } => {
                check("counterexample", *alpha)?;
                if *alpha == 0.0 {
                    return Err(Error::InvalidKernel("counterexample frequency must be non-zero".into()));
                }
                // c·e^{-s}·(1 - e^{iαs}/(1+iα)),  c = (1+α²)/α²
                let a = *alpha;
                let c = (1.0 + a * a) / (a * a);
                let shift = Complex64::new(1.0, a);
                Poly::new(vec![
                    ExpTerm { coefficient: real(c), power: 0, rate: real(1.0) },
                    ExpTerm {
                        coefficient: -real(c) / shift,
                        power: 0,
                        rate: Complex64::new(1.0, -a),
                    },
                ])
            }
            FiniteMixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidKernel("empty mixture".into()));
                }
                let mut acc = Poly::default();
                for (w, e) in parts {
                    if !(w.re.is_finite() && w.im.is_finite()) {
                        return Err(Error::InvalidKernel("non-finite mixture weight".into()));
                    }
                    acc = acc.add(&e.to_exp_polynomial()?.scaled(*w));
                }
                Ok(acc)
            }
            ExpPolynomial(p) => Ok(p.clone()),
        }
    }

    fn to_additive(&self) -> CatalogEntry {
        use CatalogEntry::*;
        match self {
            PowerLaw { r } => Exponential { lambda: *r },
            CounterexampleMultiplicative { alpha } => CounterexampleAdditive { alpha: *alpha },
            FiniteMixture(parts) => {
                FiniteMixture(parts.iter().map(|(w, e)| (*w, e.to_additive())).collect())
            }
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelBody {
    ClosedForm(CatalogEntry),
    Sampled(SampledKernel),
}

/// A kernel of either flavor. Immutable once built.
#[derive(Debug, Clone)]
pub struct Kernel {
    flavor: Flavor,
    body: KernelBody,
    /// Scaling applied on top of `body` (recorded by [`Kernel::normalize`]).
    coefficient: Complex64,
    mass: Complex64,
    l1_norm: f64,
    first_moment: Option<f64>,
    // coefficient·body as an exponential polynomial, for closed forms
    poly: Option<ExpPolynomial>,
}

impl Kernel {
    pub fn from_catalog(entry: CatalogEntry) -> Result<Self> {
        let flavor = entry.native_flavor()?.ok_or_else(|| {
            Error::InvalidKernel("entry has no native flavor; use Kernel::closed_form".into())
        })?;
        Self::closed_form(flavor, entry)
    }

    pub fn closed_form(flavor: Flavor, entry: CatalogEntry) -> Result<Self> {
        if let Some(native) = entry.native_flavor()? {
            if native != flavor {
                return Err(Error::FlavorMismatch { expected: flavor, found: native });
            }
        }
        let poly = entry.to_exp_polynomial()?;
        Self::assemble(flavor, KernelBody::ClosedForm(entry), Complex64::new(1.0, 0.0), Some(poly))
    }

    pub fn sampled(flavor: Flavor, body: SampledKernel) -> Result<Self> {
        Self::assemble(flavor, KernelBody::Sampled(body), Complex64::new(1.0, 0.0), None)
    }

    /// Samples given at native abscissae (`t ≥ 0` or `t ≥ 1`).
    pub fn from_native_samples(flavor: Flavor, points: &[(f64, Complex64)]) -> Result<Self> {
        if points.iter().any(|(t, _)| !t.is_finite() || *t < flavor.origin()) {
            return Err(Error::InvalidKernel(format!(
                "sample abscissae must lie in the {flavor} support"
            )));
        }
        let grid = points.iter().map(|(t, _)| flavor.to_coordinate(*t)).collect();
        let values = points.iter().map(|(_, v)| *v).collect();
        Self::sampled(flavor, SampledKernel::new(grid, values)?)
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::from_catalog(CatalogEntry::Exponential { lambda })
    }

    pub fn power_law(r: f64) -> Result<Self> {
        Self::from_catalog(CatalogEntry::PowerLaw { r })
    }

    pub fn counterexample_additive(alpha: f64) -> Result<Self> {
        Self::from_catalog(CatalogEntry::CounterexampleAdditive { alpha })
    }

    pub fn counterexample_multiplicative(alpha: f64) -> Result<Self> {
        Self::from_catalog(CatalogEntry::CounterexampleMultiplicative { alpha })
    }

    fn assemble(
        flavor: Flavor,
        body: KernelBody,
        coefficient: Complex64,
        poly: Option<ExpPolynomial>,
    ) -> Result<Self> {
        let poly = poly.map(|p| p.scaled(coefficient));
        let (mass, l1_norm, first_moment) = match (&body, &poly) {
            (_, Some(p)) => {
                let (l1, m1) = poly_norms(p)?;
                (p.mass(), l1, Some(m1))
            }
            (KernelBody::Sampled(s), None) => {
                let m1 = s.first_moment() * coefficient.norm();
                (
                    s.mass() * coefficient,
                    s.l1_norm() * coefficient.norm(),
                    m1.is_finite().then_some(m1),
                )
            }
            (KernelBody::ClosedForm(_), None) => unreachable!("closed forms carry a polynomial"),
        };
        if !(mass.re.is_finite() && mass.im.is_finite() && l1_norm.is_finite()) {
            return Err(Error::InvalidKernel("kernel is not integrable".into()));
        }
        Ok(Self {
            flavor,
            body,
            coefficient,
            mass,
            l1_norm,
            first_moment,
            poly,
        })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn body(&self) -> &KernelBody {
        &self.body
    }

    /// Normalization factor applied to the body (1 unless rescaled).
    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn mass(&self) -> Complex64 {
        self.mass
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// `∫ u·|k(u)| du` in the additive coordinate; a Lipschitz constant for the
    /// kernel's transform.
    pub fn first_moment(&self) -> Option<f64> {
        self.first_moment
    }

    /// Drops the first-moment certificate (e.g. for kernels whose samples are
    /// not trusted beyond the grid).
    pub fn without_first_moment(mut self) -> Self {
        self.first_moment = None;
        self
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.mass - 1.0).norm() <= tol
    }

    /// Closed-form density as an exponential polynomial, if available.
    pub fn exp_polynomial(&self) -> Option<&ExpPolynomial> {
        self.poly.as_ref()
    }

    /// Density in the additive coordinate; zero for `u < 0`.
    pub fn density(&self, u: f64) -> Complex64 {
        if u < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match (&self.poly, &self.body) {
            (Some(p), _) => p.eval(u),
            (None, KernelBody::Sampled(s)) => s.eval(u) * self.coefficient,
            _ => unreachable!(),
        }
    }

    /// Pointwise value at a native point; zero outside the support half-line.
    pub fn evaluate(&self, t: f64) -> Result<Complex64> {
        if t.is_nan() {
            return Err(Error::InvalidArgument("evaluation point is NaN".into()));
        }
        if t < self.flavor.origin() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if t.is_infinite() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.density(self.flavor.to_coordinate(t)))
    }

    /// `∫_s^∞ |k(u)| du` (an upper bound for closed forms).
    pub fn tail_l1(&self, s: f64) -> f64 {
        match (&self.poly, &self.body) {
            (Some(p), _) => p.tail_l1_bound(s).min(self.l1_norm),
            (None, KernelBody::Sampled(k)) => k.tail_l1(s) * self.coefficient.norm(),
            _ => unreachable!(),
        }
    }

    /// Smallest `s` with `tail_l1(s) ≤ eps`.
    pub fn truncation_length(&self, eps: f64) -> f64 {
        if self.tail_l1(0.0) <= eps {
            return 0.0;
        }
        let mut hi = self.length_scale();
        while self.tail_l1(hi) > eps {
            hi *= 2.0;
            if hi > 1e7 {
                return hi;
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.tail_l1(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Characteristic length in the additive coordinate, used to size panels.
    pub fn length_scale(&self) -> f64 {
        match (&self.poly, &self.body) {
            (Some(p), _) => 1.0 / p.max_rate(),
            (None, KernelBody::Sampled(s)) => 1.0 / s.tail_rate(),
            _ => unreachable!(),
        }
    }

    /// Interior kinks in the additive coordinate (sampled nodes).
    pub fn breakpoints(&self) -> &[f64] {
        match &self.body {
            KernelBody::Sampled(s) => s.grid(),
            KernelBody::ClosedForm(_) => &[],
        }
    }

    /// `∫_0^∞ k(u) e^{-iξu} du` in the additive coordinate, closed form where
    /// one exists.
    pub(crate) fn transform(&self, xi: f64) -> Complex64 {
        match (&self.poly, &self.body) {
            (Some(p), _) => p.transform(xi),
            (None, KernelBody::Sampled(s)) => s.transform(xi) * self.coefficient,
            _ => unreachable!(),
        }
    }

    pub fn normalize(&self) -> Result<Kernel> {
        let m = self.mass.norm();
        if m < MASS_EPSILON {
            return Err(Error::DegenerateKernel { mass: m });
        }
        if self.is_normalized(TOL_QUAD) {
            return Ok(self.clone());
        }
        let coefficient = self.coefficient / self.mass;
        let poly = match &self.body {
            KernelBody::ClosedForm(e) => Some(e.to_exp_polynomial()?),
            KernelBody::Sampled(_) => None,
        };
        Self::assemble(self.flavor, self.body.clone(), coefficient, poly)
    }

    /// Half-line convolution. Closed forms convolve exactly; anything involving a
    /// sampled kernel goes through [`convolve_sampled`].
    pub fn convolve(&self, other: &Kernel) -> Result<Kernel> {
        self.check_flavor(other)?;
        match (&self.poly, &other.poly) {
            (Some(p), Some(q)) => Self::closed_form(
                self.flavor,
                CatalogEntry::ExpPolynomial(p.convolve(q)),
            ),
            _ => convolve_sampled(self, other, &ConvolveOptions::default()),
        }
    }

    /// `k`-fold convolution power.
    pub fn power(&self, k: u32) -> Result<Kernel> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "convolution power 0 would need a unit, which L¹ lacks".into(),
            ));
        }
        let mut result: Option<Kernel> = None;
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.convolve(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.convolve(&base)?;
        }
        Ok(result.unwrap())
    }

    /// Transport along `t = e^u`: `φ(u) = ψ(e^u)`.
    pub fn to_additive(&self) -> Result<Kernel> {
        if self.flavor != Flavor::Multiplicative {
            return Err(Error::FlavorMismatch {
                expected: Flavor::Multiplicative,
                found: self.flavor,
            });
        }
        let body = match &self.body {
            KernelBody::ClosedForm(e) => KernelBody::ClosedForm(e.to_additive()),
            KernelBody::Sampled(s) => KernelBody::Sampled(s.clone()),
        };
        let mut out = self.clone();
        out.flavor = Flavor::Additive;
        out.body = body;
        Ok(out)
    }

    fn check_flavor(&self, other: &Kernel) -> Result<()> {
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch {
                expected: self.flavor,
                found: other.flavor,
            });
        }
        Ok(())
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        let body = match &self.body {
            KernelBody::ClosedForm(e) => describe_entry(e),
            KernelBody::Sampled(s) => format!("sampled[{} nodes]", s.grid().len()),
        };
        if self.coefficient == Complex64::new(1.0, 0.0) {
            body
        } else {
            format!("{}·{}", self.coefficient, body)
        }
    }
}

fn describe_entry(e: &CatalogEntry) -> String {
    use CatalogEntry::*;
    match e {
        Exponential { lambda } => format!("exponential({lambda})"),
        PowerLaw { r } => format!("power_law({r})"),
        CounterexampleAdditive { alpha } => format!("counterexample_additive({alpha})"),
        CounterexampleMultiplicative { alpha } => format!("counterexample_multiplicative({alpha})"),
        FiniteMixture(parts) => {
            let inner: Vec<String> = parts
                .iter()
                .map(|(w, e)| format!("{}·{}", w, describe_entry(e)))
                .collect();
            format!("mixture[{}]", inner.join(" + "))
        }
        ExpPolynomial(p) => format!("exp_polynomial[{} terms]", p.terms().len()),
    }
}

/// `(‖p‖₁, ∫ u|p(u)| du)` by panel quadrature with an analytic tail cut.
fn poly_norms(p: &ExpPolynomial) -> Result<(f64, f64)> {
    if p.terms().is_empty() {
        return Ok((0.0, 0.0));
    }
    let panel = (1.0 / p.max_rate()).min(1.0);
    let eps = 1e-13;
    let mut l1 = 0.0;
    let mut m1 = 0.0;
    let mut a = 0.0;
    while p.tail_l1_bound(a) > eps || p.weighted_tail_bound(a, 1) > eps {
        let b = a + panel;
        l1 += quadrature::integrate_real(|u| p.eval(u).norm(), a, b, 1e-14)?;
        m1 += quadrature::integrate_real(|u| u * p.eval(u).norm(), a, b, 1e-14)?;
        a = b;
        if a > 1e6 {
            return Err(Error::InvalidKernel("kernel tail does not decay".into()));
        }
    }
    Ok((l1, m1))
}

#[derive(Debug, Clone, Copy)]
pub struct ConvolveOptions {
    /// Target interpolation error per grid point.
    pub tol: f64,
    pub max_points: usize,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        Self {
            tol: TOL_QUAD,
            max_points: 1 << 19,
        }
    }
}

/// Numerical half-line convolution onto a uniform grid in the additive
/// coordinate.
///
/// With a sampled factor the grid is the finest input spacing and node values
/// are exact for the interpolants. Otherwise the grid is halved until the
/// midpoint interpolation error is below `opts.tol`.
pub fn convolve_sampled(a: &Kernel, b: &Kernel, opts: &ConvolveOptions) -> Result<Kernel> {
    a.check_flavor(b)?;
    let (la, lb) = (a.l1_norm(), b.l1_norm());
    let eps = 0.5 * opts.tol;
    let reach = a
        .truncation_length(eps / lb.max(1e-300))
        .max(b.truncation_length(eps / la.max(1e-300)));
    let extent = (2.0 * reach).max(a.length_scale().max(b.length_scale()));

    let finest = [a, b]
        .iter()
        .filter_map(|k| match &k.body {
            KernelBody::Sampled(s) => Some(s.min_spacing()),
            KernelBody::ClosedForm(_) => None,
        })
        .fold(f64::INFINITY, f64::min);
    if finest.is_finite() {
        let h = finest.max(extent / opts.max_points.max(2) as f64);
        return convolve_on_grid(a, b, h, extent);
    }

    let point = |u: f64| -> Result<Complex64> { convolution_point(a, b, u, 0.05 * opts.tol) };

    let scale = a.length_scale().min(b.length_scale());
    let mut h = (scale / 4.0).min(extent / 64.0);
    let mut n = (extent / h).ceil() as usize + 1;
    h = extent / (n - 1) as f64;
    let mut values: Vec<Complex64> = (0..n)
        .map(|i| point(i as f64 * h))
        .collect::<Result<_>>()?;

    loop {
        if 2 * n - 1 > opts.max_points {
            break;
        }
        let mids: Vec<Complex64> = (0..n - 1)
            .map(|i| point((i as f64 + 0.5) * h))
            .collect::<Result<_>>()?;
        let err = mids
            .iter()
            .enumerate()
            .map(|(i, m)| (m - 0.5 * (values[i] + values[i + 1])).norm())
            .fold(0.0, f64::max);
        let mut merged = Vec::with_capacity(2 * n - 1);
        for i in 0..n - 1 {
            merged.push(values[i]);
            merged.push(mids[i]);
        }
        merged.push(values[n - 1]);
        values = merged;
        n = values.len();
        h *= 0.5;
        // error of the refined grid is about a quarter of the measured one
        if err / 4.0 <= opts.tol {
            break;
        }
    }
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let body = match SampledKernel::new(grid.clone(), values.clone()) {
        Ok(s) => s,
        Err(_) => {
            let fallback = a.length_scale().max(b.length_scale()).recip();
            SampledKernel::with_tail_rate(grid, values, fallback)?
        }
    };
    Kernel::sampled(a.flavor, body)
}

/// Node values of the convolution of the piecewise-linear interpolants of `a`
/// and `b` on the grid `i·h`. On each cell the product is quadratic, so
/// Simpson's rule is exact.
fn convolve_on_grid(a: &Kernel, b: &Kernel, h: f64, extent: f64) -> Result<Kernel> {
    let n = (extent / h).ceil() as usize + 1;
    let fa: Vec<Complex64> = (0..n).map(|i| a.density(i as f64 * h)).collect();
    let fb: Vec<Complex64> = (0..n).map(|i| b.density(i as f64 * h)).collect();
    let values: Vec<Complex64> = (0..n)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let (p0, p1) = (fa[m - k], fa[m - k - 1]);
                let (q0, q1) = (fb[k], fb[k + 1]);
                acc += 2.0 * p0 * q0 + p0 * q1 + p1 * q0 + 2.0 * p1 * q1;
            }
            acc * (h / 6.0)
        })
        .collect();
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let body = match SampledKernel::new(grid.clone(), values.clone()) {
        Ok(s) => s,
        Err(_) => {
            let fallback = a.length_scale().max(b.length_scale()).recip();
            SampledKernel::with_tail_rate(grid, values, fallback)?
        }
    };
    Kernel::sampled(a.flavor, body)
}

/// `∫_0^u a(u-s) b(s) ds` by adaptive quadrature split at the kinks of both
/// factors.
pub fn convolution_point(a: &Kernel, b: &Kernel, u: f64, tol: f64) -> Result<Complex64> {
    if u <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut cuts: Vec<f64> = vec![0.0, u];
    cuts.extend(b.breakpoints().iter().copied().filter(|&s| s > 0.0 && s < u));
    cuts.extend(a.breakpoints().iter().map(|&s| u - s).filter(|&s| s > 0.0 && s < u));
    let step = a.length_scale().min(b.length_scale()).max(1e-6);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = ((hi - lo) / step).ceil().max(1.0) as usize;
        let dh = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let p0 = lo + k as f64 * dh;
            let p1 = if k + 1 == pieces { hi } else { p0 + dh };
            let local_tol = tol * (p1 - p0) / u;
            acc += quadrature::integrate(|s| a.density(u - s) * b.density(s), p0, p1, local_tol)?
                .value;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_catalog_points() {
        let e = Kernel::exponential(1.0).unwrap();
        assert_eq!(e.evaluate(0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(e.evaluate(-1.0).unwrap(), c(0.0, 0.0));
        let p = Kernel::power_law(2.0).unwrap();
        assert!((p.evaluate(2.0).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(p.evaluate(0.5).unwrap(), c(0.0, 0.0));
        assert!(e.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(Kernel::exponential(f64::NAN), Err(Error::InvalidKernel(_))));
        assert!(matches!(Kernel::power_law(f64::INFINITY), Err(Error::InvalidKernel(_))));
        assert!(matches!(Kernel::power_law(-1.0), Err(Error::InvalidKernel(_))));
        assert!(Kernel::counterexample_additive(0.0).is_err());
    }

    #[test]
    fn catalog_masses_are_one() {
        for k in [
            Kernel::exponential(3.0).unwrap(),
            Kernel::power_law(0.5).unwrap(),
            Kernel::counterexample_additive(1.0).unwrap(),
            Kernel::counterexample_multiplicative(2.0).unwrap(),
        ] {
            assert!((k.mass() - 1.0).norm() < 1e-14, "{}", k.describe());
        }
    }

    #[test]
    fn normalize_rescales_and_is_idempotent() {
        let two_exp = Kernel::from_catalog(CatalogEntry::FiniteMixture(vec![(
            c(2.0, 0.0),
            CatalogEntry::Exponential { lambda: 1.0 },
        )]))
        .unwrap();
        assert!((two_exp.mass() - 2.0).norm() < 1e-14);
        let n1 = two_exp.normalize().unwrap();
        assert!((n1.mass() - 1.0).norm() < 1e-14);
        assert!((n1.coefficient() - 0.5).norm() < 1e-15);
        for &t in &[0.0, 0.3, 2.0] {
            assert!((n1.evaluate(t).unwrap().re - (-t).exp()).abs() < 1e-15);
        }
        let n2 = n1.normalize().unwrap();
        assert_eq!(n1.coefficient(), n2.coefficient());

        let p = Kernel::power_law(3.0).unwrap();
        assert_eq!(p.normalize().unwrap().coefficient(), c(1.0, 0.0));
    }

    #[test]
    fn degenerate_mass_is_an_error() {
        let zero = Kernel::from_catalog(CatalogEntry::FiniteMixture(vec![
            (c(1.0, 0.0), CatalogEntry::Exponential { lambda: 1.0 }),
            (c(-1.0, 0.0), CatalogEntry::Exponential { lambda: 2.0 }),
        ]))
        .unwrap();
        assert!(matches!(zero.normalize(), Err(Error::DegenerateKernel { .. })));
    }

    #[test]
    fn exponential_square_is_gamma_density() {
        let e = Kernel::exponential(1.0).unwrap();
        let sq = e.convolve(&e).unwrap();
        let p2 = e.power(2).unwrap();
        for x in [0.0f64, 0.5, 1.0, 4.0, 9.0] {
            let expect = x * (-x).exp();
            assert!((sq.evaluate(x).unwrap().re - expect).abs() < 1e-14);
            assert!((p2.evaluate(x).unwrap().re - expect).abs() < 1e-14);
        }
        assert!((e.power(1).unwrap().evaluate(0.7).unwrap() - e.evaluate(0.7).unwrap()).norm() == 0.0);
        assert!(matches!(e.power(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn power_law_square_is_log_over_x() {
        let p = Kernel::power_law(1.0).unwrap();
        let sq = p.power(2).unwrap();
        assert_eq!(sq.flavor(), Flavor::Multiplicative);
        for &x in &[1.0f64, 1.5, 3.0, 20.0, 1e3] {
            let expect = x.ln() / x;
            assert!((sq.evaluate(x).unwrap().re - expect).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn flavor_mismatch_is_reported() {
        let e = Kernel::exponential(1.0).unwrap();
        let p = Kernel::power_law(1.0).unwrap();
        assert!(matches!(e.convolve(&p), Err(Error::FlavorMismatch { .. })));
        assert!(matches!(e.to_additive(), Err(Error::FlavorMismatch { .. })));
    }

    #[test]
    fn transport_maps_catalog_entries() {
        let p = Kernel::power_law(2.5).unwrap().to_additive().unwrap();
        assert_eq!(p.body(), &KernelBody::ClosedForm(CatalogEntry::Exponential { lambda: 2.5 }));
        let cm = Kernel::counterexample_multiplicative(1.0).unwrap().to_additive().unwrap();
        let ca = Kernel::counterexample_additive(1.0).unwrap();
        for &u in &[0.0, 0.4, 3.0] {
            assert!((cm.evaluate(u).unwrap() - ca.evaluate(u).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn narrow_exponential_acts_as_approximate_identity() {
        let k = Kernel::exponential(1.0).unwrap();
        let delta = Kernel::exponential(1e3).unwrap();
        let out = k.convolve(&delta).unwrap();
        for &x in &[0.5, 1.0, 2.0, 5.0] {
            let d = (out.evaluate(x).unwrap() - k.evaluate(x).unwrap()).norm();
            assert!(d < 2e-3 * k.evaluate(x).unwrap().norm(), "x={x} d={d}");
        }
    }

    #[test]
    fn sampled_factor_uses_input_grid() {
        let pts: Vec<(f64, Complex64)> = (0..=2000).map(|i| {
            let t = i as f64 * 0.01;
            (t, c((-t).exp(), 0.0))
        }).collect();
        let k = Kernel::from_native_samples(Flavor::Additive, &pts).unwrap().normalize().unwrap();
        let sq = k.convolve(&k).unwrap();
        for &x in &[0.3f64, 1.0, 4.0, 12.0] {
            let d = (sq.evaluate(x).unwrap().re - x * (-x).exp()).abs();
            assert!(d < 1e-4, "x={x} d={d}");
        }
        let mixed = k.convolve(&Kernel::exponential(2.0).unwrap()).unwrap();
        for &x in &[0.5f64, 3.0] {
            let exact = 2.0 * ((-x).exp() - (-2.0 * x).exp());
            assert!((mixed.evaluate(x).unwrap().re - exact).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn sampled_convolution_agrees_with_closed_form() {
        let a = Kernel::exponential(1.0).unwrap();
        let b = Kernel::exponential(2.0).unwrap();
        let opts = ConvolveOptions { tol: 1e-7, max_points: 1 << 17 };
        let numeric = convolve_sampled(&a, &b, &opts).unwrap();
        let exact = a.convolve(&b).unwrap();
        for i in 0..200 {
            let x = i as f64 * 0.137;
            let d = (numeric.evaluate(x).unwrap() - exact.evaluate(x).unwrap()).norm();
            assert!(d < 1e-6, "x={x} d={d}");
        }
        assert!((numeric.mass() - 1.0).norm() < 1e-6);
    }
}
