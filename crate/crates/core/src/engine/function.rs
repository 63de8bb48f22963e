//! Bounded test functions on a half-line.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Flavor;

type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type Frequency = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Derived symbolically from the method's closed form.
    ClosedForm,
    /// Follows from regularity (the function has a classical limit).
    Regularity,
    /// Checked against an independent high-precision quadrature.
    QuadratureOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownValue {
    pub method: String,
    /// `None` when the method does not sum the function.
    pub value: Option<Complex64>,
    pub provenance: Provenance,
}

/// Points where the function may jump, in native coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jumps {
    None,
    Integers,
    /// `ln n` for integers `n ≥ 1`.
    LogIntegers,
}

#[derive(Clone)]
pub struct TestFunction {
    label: String,
    flavor: Flavor,
    bound: f64,
    evaluator: Evaluator,
    classical_limit: Option<Complex64>,
    known_values: Vec<KnownValue>,
    frequency: Option<Frequency>,
    jumps: Jumps,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("flavor", &self.flavor)
            .field("bound", &self.bound)
            .field("classical_limit", &self.classical_limit)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    pub fn new<F>(label: impl Into<String>, flavor: Flavor, bound: f64, evaluator: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::InvalidArgument(format!("bound {bound} is not a finite non-negative real")));
        }
        Ok(Self {
            label: label.into(),
            flavor,
            bound,
            evaluator: Arc::new(evaluator),
            classical_limit: None,
            known_values: Vec::new(),
            frequency: None,
            jumps: Jumps::None,
        })
    }

    pub fn with_classical_limit(mut self, limit: Complex64) -> Self {
        self.classical_limit = Some(limit);
        self
    }

    /// Local angular frequency `|dθ/dt|` at native `t`; sizes quadrature panels.
    pub fn with_frequency<W>(mut self, omega: W) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.frequency = Some(Arc::new(omega));
        self
    }

    pub fn with_integer_jumps(mut self) -> Self {
        self.jumps = Jumps::Integers;
        self
    }

    pub fn with_known_value(mut self, method: &str, value: Option<Complex64>, provenance: Provenance) -> Self {
        self.known_values.push(KnownValue {
            method: method.to_string(),
            value,
            provenance,
        });
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn classical_limit(&self) -> Option<Complex64> {
        self.classical_limit
    }

    pub fn known_values(&self) -> &[KnownValue] {
        &self.known_values
    }

    pub fn known_value(&self, method: &str) -> Option<&KnownValue> {
        self.known_values.iter().find(|k| k.method == method)
    }

    pub fn jumps(&self) -> Jumps {
        self.jumps
    }

    /// Value at a native point.
    pub fn eval(&self, t: f64) -> Complex64 {
        (self.evaluator)(t)
    }

    pub fn frequency(&self, t: f64) -> f64 {
        self.frequency.as_ref().map_or(0.0, |w| w(t).abs())
    }

    /// Value at the additive coordinate `v`.
    pub(crate) fn eval_coordinate(&self, v: f64) -> Complex64 {
        self.eval(self.flavor.from_coordinate(v))
    }

    /// Frequency with respect to the additive coordinate.
    pub(crate) fn frequency_coordinate(&self, v: f64) -> f64 {
        match self.flavor {
            Flavor::Additive => self.frequency(v),
            Flavor::Multiplicative => {
                let t = v.exp();
                self.frequency(t) * t
            }
        }
    }

    /// First jump strictly after coordinate `v`, if any.
    pub(crate) fn next_jump(&self, v: f64) -> Option<f64> {
        let place = |n: f64| match self.jumps {
            Jumps::LogIntegers => n.ln(),
            _ => n,
        };
        let t = self.flavor.from_coordinate(v);
        let mut n = match self.jumps {
            Jumps::None => return None,
            Jumps::Integers => t.floor() + 1.0,
            Jumps::LogIntegers => t.exp().floor() + 1.0,
        };
        let mut u = self.flavor.to_coordinate(place(n));
        // guard against the coordinate map rounding back onto `v`
        while u <= v {
            n += 1.0;
            u = self.flavor.to_coordinate(place(n));
        }
        Some(u)
    }

    /// `F(u) = f(e^u)` on `[0, ∞)`, the additive transport of a multiplicative
    /// test function.
    pub fn compose_exp(&self) -> Result<TestFunction> {
        if self.flavor != Flavor::Multiplicative {
            return Err(Error::FlavorMismatch {
                expected: Flavor::Multiplicative,
                found: self.flavor,
            });
        }
        let inner = self.clone();
        let mut out = TestFunction::new(format!("{}∘exp", self.label), Flavor::Additive, self.bound, move |u| {
            inner.eval(u.exp())
        })?;
        if let Some(w) = self.frequency.clone() {
            out.frequency = Some(Arc::new(move |u: f64| {
                let t = u.exp();
                w(t).abs() * t
            }));
        }
        out.classical_limit = self.classical_limit;
        out.jumps = match self.jumps {
            Jumps::Integers => Jumps::LogIntegers,
            _ => Jumps::None,
        };
        Ok(out)
    }
}

/// A bounded sequence `a_1, a_2, ...` with finite description.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    /// `a_n = period[(n - 1) mod p]`.
    Periodic(Vec<Complex64>),
    /// `a_n = prefix[n - 1]` for `n ≤ len`, then `tail`.
    EventuallyConstant { prefix: Vec<Complex64>, tail: Complex64 },
}

impl Sequence {
    pub fn alternating() -> Self {
        Sequence::Periodic(vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    fn validate(&self) -> Result<()> {
        let empty = match self {
            Sequence::Periodic(p) => p.is_empty(),
            Sequence::EventuallyConstant { prefix, .. } => prefix.is_empty(),
        };
        if empty {
            return Err(Error::InvalidArgument("empty sequence".into()));
        }
        let finite = self.values().all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("sequence has non-finite terms".into()));
        }
        Ok(())
    }

    fn values(&self) -> Box<dyn Iterator<Item = &Complex64> + '_> {
        match self {
            Sequence::Periodic(p) => Box::new(p.iter()),
            Sequence::EventuallyConstant { prefix, tail } => Box::new(prefix.iter().chain(std::iter::once(tail))),
        }
    }

    /// `a_n` for `n ≥ 1`.
    pub fn term(&self, n: u64) -> Complex64 {
        let i = n.max(1) - 1;
        match self {
            Sequence::Periodic(p) => p[(i % p.len() as u64) as usize],
            Sequence::EventuallyConstant { prefix, tail } => prefix.get(i as usize).copied().unwrap_or(*tail),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn limit(&self) -> Option<Complex64> {
        match self {
            Sequence::Periodic(p) => p.iter().all(|v| *v == p[0]).then_some(p[0]),
            Sequence::EventuallyConstant { tail, .. } => Some(*tail),
        }
    }

    /// `(1/n) Σ_{i ≤ n} a_i`, computed without iterating over every term.
    pub fn cesaro_mean(&self, n: u64) -> Complex64 {
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let sum = match self {
            Sequence::Periodic(p) => {
                let len = p.len() as u64;
                let full: Complex64 = p.iter().sum();
                let rest: Complex64 = p[..(n % len) as usize].iter().sum();
                full * (n / len) as f64 + rest
            }
            Sequence::EventuallyConstant { prefix, tail } => {
                let k = (n as usize).min(prefix.len());
                let head: Complex64 = prefix[..k].iter().sum();
                head + tail * (n - k as u64) as f64
            }
        };
        sum / n as f64
    }
}

/// Step function `f(t) = a_⌊t⌋` on `[1, ∞)`.
pub fn embed_sequence(label: impl Into<String>, seq: Sequence) -> Result<TestFunction> {
    seq.validate()?;
    let bound = seq.sup_norm();
    let limit = seq.limit();
    let s = seq.clone();
    let mut f = TestFunction::new(label, Flavor::Multiplicative, bound, move |t| {
        s.term(t.max(1.0).floor() as u64)
    })?
    .with_integer_jumps();
    if let Some(l) = limit {
        f = f.with_classical_limit(l);
    }
    Ok(f)
}
