//! Grid-sampled kernels with a geometric tail completion.
//!
//! Abscissae are stored in the group's additive coordinate (`u = t` for additive
//! kernels, `u = ln t` for multiplicative ones). Values are interpolated linearly
//! in that coordinate and continued past the last node by `v_N·e^{-ρ(u-u_N)}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    tail_rate: f64,
    // suffix[i] = ∫_{grid[i]}^∞ |k(u)| du
    abs_suffix: Vec<f64>,
}

fn cell_abs_integral(a: f64, b: f64, va: Complex64, vb: Complex64) -> f64 {
    // |linear| is not linear; 8-point Gauss is plenty for a single cell.
    let (x, w) = gl8();
    let h = 0.5 * (b - a);
    x.iter()
        .zip(w.iter())
        .map(|(&x, &w)| {
            let s = 0.5 * (x + 1.0);
            w * (va + (vb - va) * s).norm()
        })
        .sum::<f64>()
        * h
}

fn gl8() -> (&'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let r = RULE.get_or_init(|| gauss_legendre(8));
    (&r.0, &r.1)
}

impl SampledKernel {
    /// Builds a sampled kernel, fitting the tail decay rate by least squares on
    /// `ln|v|` over the last 10% of the samples.
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidKernel("grid and values differ in length".into()));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidKernel("need at least two samples".into()));
        }
        if grid.iter().any(|g| !g.is_finite())
            || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidKernel("non-finite sample".into()));
        }
        if grid[0] < 0.0 {
            return Err(Error::InvalidKernel("samples start before the support origin".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKernel("abscissae must be strictly increasing".into()));
        }
        let tail_rate = fit_tail_rate(&grid, &values)?;
        Self::with_tail_rate(grid, values, tail_rate)
    }

    pub fn with_tail_rate(grid: Vec<f64>, values: Vec<Complex64>, tail_rate: f64) -> Result<Self> {
        if !(tail_rate.is_finite() && tail_rate > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "tail rate {tail_rate} is not summable"
            )));
        }
        let n = grid.len();
        let mut abs_suffix = vec![0.0; n];
        abs_suffix[n - 1] = values[n - 1].norm() / tail_rate;
        for i in (0..n - 1).rev() {
            abs_suffix[i] =
                abs_suffix[i + 1] + cell_abs_integral(grid[i], grid[i + 1], values[i], values[i + 1]);
        }
        Ok(Self {
            grid,
            values,
            tail_rate,
            abs_suffix,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tail_rate(&self) -> f64 {
        self.tail_rate
    }

    fn last(&self) -> (f64, Complex64) {
        let n = self.grid.len();
        (self.grid[n - 1], self.values[n - 1])
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        if u < self.grid[0] || u < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (u_last, v_last) = self.last();
        if u >= u_last {
            return v_last * (-self.tail_rate * (u - u_last)).exp();
        }
        let i = self.grid.partition_point(|&g| g <= u) - 1;
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let s = (u - a) / (b - a);
        self.values[i] + (self.values[i + 1] - self.values[i]) * s
    }

    pub fn mass(&self) -> Complex64 {
        let body: Complex64 = self
            .grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| (v[0] + v[1]) * (0.5 * (g[1] - g[0])))
            .sum();
        let (_, v_last) = self.last();
        body + v_last / self.tail_rate
    }

    /// `∫ k(u) e^{-iξu} du`, exact for the piecewise-linear interpolant.
    pub fn transform(&self, xi: f64) -> Complex64 {
        let w = Complex64::new(0.0, -xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.grid.len() - 1 {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            let (va, vb) = (self.values[i], self.values[i + 1]);
            let h = b - a;
            if (xi * h).abs() < 1e-3 {
                let (x, wt) = gl8();
                let mut cell = Complex64::new(0.0, 0.0);
                for (&x, &wt) in x.iter().zip(wt.iter()) {
                    let s = 0.5 * (x + 1.0);
                    let u = a + h * s;
                    cell += (va + (vb - va) * s) * (w * u).exp() * wt;
                }
                acc += cell * (0.5 * h);
            } else {
                let ea = (w * a).exp();
                let eb = (w * b).exp();
                let i0 = (eb - ea) / w;
                let i1 = eb * h / w - (eb - ea) / (w * w);
                acc += va * i0 + (vb - va) / h * i1;
            }
        }
        let (u_last, v_last) = self.last();
        acc + v_last * (w * u_last).exp() / Complex64::new(self.tail_rate, xi)
    }

    pub fn l1_norm(&self) -> f64 {
        self.abs_suffix[0]
    }

    /// `∫_s^∞ |k(u)| du`.
    pub fn tail_l1(&self, s: f64) -> f64 {
        if s <= self.grid[0] {
            return self.abs_suffix[0];
        }
        let (u_last, v_last) = self.last();
        if s >= u_last {
            return v_last.norm() * (-self.tail_rate * (s - u_last)).exp() / self.tail_rate;
        }
        let i = self.grid.partition_point(|&g| g <= s) - 1;
        let partial = cell_abs_integral(s, self.grid[i + 1], self.eval(s), self.values[i + 1]);
        partial + self.abs_suffix[i + 1]
    }

    /// `∫ u |k(u)| du`.
    pub fn first_moment(&self) -> f64 {
        let (x, w) = gl8();
        let mut acc = 0.0;
        for i in 0..self.grid.len() - 1 {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            let (va, vb) = (self.values[i], self.values[i + 1]);
            let h = b - a;
            for (&x, &wt) in x.iter().zip(w.iter()) {
                let s = 0.5 * (x + 1.0);
                acc += 0.5 * h * wt * (a + h * s) * (va + (vb - va) * s).norm();
            }
        }
        let (u_last, v_last) = self.last();
        let rho = self.tail_rate;
        acc + v_last.norm() * (u_last / rho + 1.0 / (rho * rho))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        let abs_suffix = self.abs_suffix.iter().map(|v| v * c.norm()).collect();
        Self {
            grid: self.grid.clone(),
            values,
            tail_rate: self.tail_rate,
            abs_suffix,
        }
    }

    /// Smallest grid spacing; panels never need to be finer than the cells.
    pub fn min_spacing(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

fn fit_tail_rate(grid: &[f64], values: &[Complex64]) -> Result<f64> {
    let n = grid.len();
    let k = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(2, n);
    let pts: Vec<(f64, f64)> = grid[n - k..]
        .iter()
        .zip(&values[n - k..])
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(&u, v)| (u, v.norm().ln()))
        .collect();
    if values[n - 1].norm() == 0.0 {
        // identically zero tail; any positive rate is exact
        return Ok(1.0);
    }
    if pts.len() < 2 {
        return Err(Error::InvalidKernel("cannot fit a tail model to the final samples".into()));
    }
    let m = pts.len() as f64;
    let mean_u = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_l = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_u).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_u) * (p.1 - mean_l)).sum();
    let slope = sxy / sxx;
    if slope.is_nan() || slope >= 0.0 {
        return Err(Error::InvalidKernel(format!(
            "final samples do not decay (fitted log-slope {slope})"
        )));
    }
    Ok(-slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_samples(h: f64, end: f64) -> SampledKernel {
        let n = (end / h).round() as usize + 1;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let values = grid.iter().map(|&u| Complex64::new((-u).exp(), 0.0)).collect();
        SampledKernel::new(grid, values).unwrap()
    }

    #[test]
    fn tail_fit_recovers_exponential_rate() {
        let k = exp_samples(0.01, 20.0);
        assert!((k.tail_rate() - 1.0).abs() < 1e-9);
        assert!((k.eval(25.0).re - (-25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mass_and_transform_close_to_continuum() {
        let k = exp_samples(0.001, 30.0);
        assert!((k.mass().re - 1.0).abs() < 1e-6);
        for &xi in &[0.0, 1.0, 7.0, 50.0] {
            let exact = Complex64::new(1.0, xi).inv();
            assert!((k.transform(xi) - exact).norm() < 1e-6, "xi={xi}");
        }
    }

    #[test]
    fn interpolation_and_support() {
        let k = SampledKernel::new(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.25, 0.0),
                Complex64::new(0.125, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(k.eval(-1.0), Complex64::new(0.0, 0.0));
        assert!((k.eval(0.5).re - 0.75).abs() < 1e-15);
        assert!((k.tail_rate() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        let v = vec![Complex64::new(1.0, 0.0); 3];
        assert!(SampledKernel::new(vec![0.0, 1.0, 1.0], v.clone()).is_err());
        assert!(SampledKernel::new(vec![-1.0, 0.0, 1.0], v.clone()).is_err());
        // constant values never decay
        assert!(SampledKernel::new(vec![0.0, 1.0, 2.0], v).is_err());
    }
}
