//! Exponential polynomials `Σ c·s^n·e^{-λs}` on `[0, ∞)` with `Re λ > 0`.
//!
//! Every closed-form catalog kernel is one of these in its additive coordinate,
//! and the family is closed under the half-line convolution, so kernel algebra on
//! catalog entries is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub coefficient: Complex64,
    pub power: u32,
    pub rate: Complex64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExpPolynomial {
    terms: Vec<ExpTerm>,
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn same_rate(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= MERGE_TOL * a.norm().max(b.norm()).max(1.0)
}

impl ExpPolynomial {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        for t in &terms {
            let finite = t.coefficient.re.is_finite()
                && t.coefficient.im.is_finite()
                && t.rate.re.is_finite()
                && t.rate.im.is_finite();
            if !finite {
                return Err(Error::InvalidKernel("non-finite exponential term".into()));
            }
            if t.rate.re <= 0.0 {
                return Err(Error::InvalidKernel(format!(
                    "decay rate {} has non-positive real part",
                    t.rate
                )));
            }
        }
        let mut out = Self { terms: Vec::new() };
        for t in terms {
            out.push(t);
        }
        Ok(out)
    }

    pub fn single(coefficient: Complex64, power: u32, rate: Complex64) -> Result<Self> {
        Self::new(vec![ExpTerm {
            coefficient,
            power,
            rate,
        }])
    }

    fn push(&mut self, term: ExpTerm) {
        if term.coefficient == Complex64::new(0.0, 0.0) {
            return;
        }
        if let Some(existing) = self
            .terms
            .iter_mut()
            .find(|e| e.power == term.power && same_rate(e.rate, term.rate))
        {
            existing.coefficient += term.coefficient;
        } else {
            self.terms.push(term);
        }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        if s < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.terms
            .iter()
            .map(|t| t.coefficient * s.powi(t.power as i32) * (-t.rate * s).exp())
            .sum()
    }

    /// `∫_0^∞ p(s) ds`.
    pub fn mass(&self) -> Complex64 {
        self.transform(0.0)
    }

    /// `∫_0^∞ p(s) e^{-iξs} ds = Σ c·n!/(λ + iξ)^{n+1}`.
    pub fn transform(&self, xi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let z = t.rate + Complex64::new(0.0, xi);
                t.coefficient * factorial(t.power) / z.powi(t.power as i32 + 1)
            })
            .sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::default();
        for t in &self.terms {
            out.push(ExpTerm {
                coefficient: t.coefficient * c,
                ..*t
            });
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out
    }

    /// Half-line convolution `(p*q)(s) = ∫_0^s p(s-t) q(t) dt`, computed term by
    /// term from the partial-fraction expansion of the Laplace-transform product.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for a in &self.terms {
            for b in &other.terms {
                for t in convolve_terms(a, b) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Upper bound for `∫_s^∞ |p(u)| du`.
    pub fn tail_l1_bound(&self, s: f64) -> f64 {
        self.weighted_tail_bound(s, 0)
    }

    /// Upper bound for `∫_s^∞ u^extra |p(u)| du`.
    pub fn weighted_tail_bound(&self, s: f64, extra: u32) -> f64 {
        let s = s.max(0.0);
        self.terms
            .iter()
            .map(|t| {
                let n = t.power + extra;
                let sigma = t.rate.re;
                let z = sigma * s;
                let mut series = 0.0;
                let mut term = 1.0;
                for k in 0..=n {
                    if k > 0 {
                        term *= z / k as f64;
                    }
                    series += term;
                }
                t.coefficient.norm() * factorial(n) * (-z).exp() * series / sigma.powi(n as i32 + 1)
            })
            .sum()
    }

    /// Largest `|λ|`; `1/max|λ|` is the natural length scale of the kernel.
    pub fn max_rate(&self) -> f64 {
        self.terms.iter().map(|t| t.rate.norm()).fold(0.0, f64::max)
    }

    pub fn min_decay(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.rate.re)
            .fold(f64::INFINITY, f64::min)
    }
}

fn convolve_terms(a: &ExpTerm, b: &ExpTerm) -> Vec<ExpTerm> {
    let (m, n) = (a.power, b.power);
    let c = a.coefficient * b.coefficient * factorial(m) * factorial(n);
    if same_rate(a.rate, b.rate) {
        // m! n! / (s+λ)^{m+n+2}  ->  u^{m+n+1} e^{-λu} / (m+n+1)!
        return vec![ExpTerm {
            coefficient: c / factorial(m + n + 1),
            power: m + n + 1,
            rate: a.rate,
        }];
    }
    let (big_m, big_n) = (m + 1, n + 1);
    let d = b.rate - a.rate;
    let mut out = Vec::with_capacity((big_m + big_n) as usize);
    for j in 1..=big_m {
        let sign = if (big_m - j) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * binomial(big_m + big_n - j - 1, big_n - 1)
            / d.powi((big_m + big_n - j) as i32);
        out.push(ExpTerm {
            coefficient: c * coeff / factorial(j - 1),
            power: j - 1,
            rate: a.rate,
        });
    }
    for k in 1..=big_n {
        let sign = if (big_n - k) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * binomial(big_m + big_n - k - 1, big_m - 1)
            / (-d).powi((big_m + big_n - k) as i32);
        out.push(ExpTerm {
            coefficient: c * coeff / factorial(k - 1),
            power: k - 1,
            rate: b.rate,
        });
    }
    out
}
