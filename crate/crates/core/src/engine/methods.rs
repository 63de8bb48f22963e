//! Named summability methods.
//!
//! Labels: `K`, `P`, `M`, `M_r`, `M*_r`, `H_k`, `S_exp_λ`, `S*_exp_λ`,
//! `S_cex_α`, `M_cex_α`. Reals may be written as fractions (`M_1/2`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::spec_file::parse_real;
use crate::kernel::{Flavor, Kernel};

/// Mass tolerance for accepting a kernel as normalized.
const NORMALIZED_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `∫_0^x f(t) φ(x-t) dt`.
    Forward,
    /// `∫_x^∞ f(t) φ(t-x) dt`.
    Dual,
}

#[derive(Debug, Clone)]
pub struct MethodDescriptor {
    kernel: Kernel,
    variant: Variant,
    iterations: u32,
    label: String,
}

impl MethodDescriptor {
    pub fn new(kernel: Kernel, variant: Variant, iterations: u32, label: impl Into<String>) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if !kernel.is_normalized(NORMALIZED_TOL) {
            return Err(Error::InvalidArgument(format!(
                "kernel mass {} is not 1; normalize it first",
                kernel.mass()
            )));
        }
        Ok(Self {
            kernel,
            variant,
            iterations,
            label: label.into(),
        })
    }

    pub fn forward(kernel: Kernel, label: impl Into<String>) -> Result<Self> {
        Self::new(kernel, Variant::Forward, 1, label)
    }

    pub fn dual(kernel: Kernel, label: impl Into<String>) -> Result<Self> {
        Self::new(kernel, Variant::Dual, 1, label)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flavor(&self) -> Flavor {
        self.kernel.flavor()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_iterations(mut self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        self.iterations = k;
        Ok(self)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// `‖φ‖₁^k`, an upper bound for the operator norm on `L^∞`.
    pub fn operator_norm(&self) -> f64 {
        self.kernel.l1_norm().powi(self.iterations as i32)
    }

    /// The same method with the iterate folded into the kernel `φ^k`.
    pub fn collapsed(&self) -> Result<Self> {
        if self.iterations == 1 {
            return Ok(self.clone());
        }
        Ok(Self {
            kernel: self.kernel.power(self.iterations)?,
            variant: self.variant,
            iterations: 1,
            label: format!("{}[φ^{}]", self.label, self.iterations),
        })
    }
}

/// Renders small rationals as `p/q`.
pub fn format_real(r: f64) -> String {
    if r.fract() == 0.0 && r.abs() < 1e15 {
        return format!("{}", r as i64);
    }
    for q in 2..=16u32 {
        let p = r * q as f64;
        if (p - p.round()).abs() < 1e-12 {
            return format!("{}/{}", p.round() as i64, q);
        }
    }
    format!("{r}")
}

/// `M_r`: forward method over `ψ_r(x) = r x^{-r}`.
pub fn method_mr(r: f64) -> Result<MethodDescriptor> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("M_r needs r > 0, got {r}")));
    }
    let label = if r == 1.0 { "M".to_string() } else { format!("M_{}", format_real(r)) };
    MethodDescriptor::forward(Kernel::power_law(r)?, label)
}

/// `M*_r`: dual method over `ψ_r`.
pub fn method_mr_dual(r: f64) -> Result<MethodDescriptor> {
    let m = method_mr(r)?;
    let label = format!("M*_{}", format_real(r));
    Ok(m.with_variant(Variant::Dual).with_label(label))
}

/// `H_k`: `k`-fold Cesàro operator.
pub fn method_holder(k: u32) -> Result<MethodDescriptor> {
    if k == 0 {
        return Err(Error::InvalidArgument("H_k needs k ≥ 1".into()));
    }
    MethodDescriptor::new(Kernel::power_law(1.0)?, Variant::Forward, k, format!("H_{k}"))
}

/// Wiener-kernel stand-in for the weak* translation method (`K`, additive) or
/// dilation method (`P`, multiplicative). Both kernels have nowhere-vanishing
/// transforms, so they sum exactly the same functions as the weak* methods.
pub fn k_estimator(flavor: Flavor) -> Result<MethodDescriptor> {
    match flavor {
        Flavor::Additive => MethodDescriptor::forward(Kernel::exponential(1.0)?, "K"),
        Flavor::Multiplicative => MethodDescriptor::forward(Kernel::power_law(1.0)?, "P"),
    }
}

/// Builds a method from its label.
pub fn parse_method(label: &str) -> Result<MethodDescriptor> {
    let bad = || Error::Parse(format!("unknown method label `{label}`"));
    let label = label.trim();
    let m = match label {
        "K" => return k_estimator(Flavor::Additive),
        "P" => return k_estimator(Flavor::Multiplicative),
        "M" => return method_mr(1.0),
        _ => label,
    };
    let (head, arg) = m.split_once('_').ok_or_else(bad)?;
    let out = match head {
        "M" | "M*" => {
            if let Some(a) = arg.strip_prefix("cex_") {
                if head == "M*" {
                    MethodDescriptor::dual(Kernel::counterexample_multiplicative(parse_real(a)?)?, label)?
                } else {
                    MethodDescriptor::forward(Kernel::counterexample_multiplicative(parse_real(a)?)?, label)?
                }
            } else if head == "M" {
                method_mr(parse_real(arg)?)?
            } else {
                method_mr_dual(parse_real(arg)?)?
            }
        }
        "H" => {
            let k: u32 = arg.parse().map_err(|_| bad())?;
            method_holder(k)?
        }
        "S" | "S*" => {
            let variant = if head == "S" { Variant::Forward } else { Variant::Dual };
            let kernel = if let Some(a) = arg.strip_prefix("exp_") {
                Kernel::exponential(parse_real(a)?)?
            } else if let Some(a) = arg.strip_prefix("cex_") {
                Kernel::counterexample_additive(parse_real(a)?)?
            } else {
                return Err(bad());
            };
            MethodDescriptor::new(kernel, variant, 1, label)?
        }
        _ => return Err(bad()),
    };
    Ok(out.with_label(label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for label in ["K", "P", "M", "M_2", "M_1/2", "M*_1/2", "H_3", "S_exp_2", "S*_exp_1", "S_cex_1", "M_cex_1"] {
            let m = parse_method(label).unwrap();
            assert_eq!(m.label(), label);
        }
        assert_eq!(parse_method("H_3").unwrap().iterations(), 3);
        assert_eq!(parse_method("M*_2").unwrap().variant(), Variant::Dual);
        assert_eq!(parse_method("K").unwrap().flavor(), Flavor::Additive);
        assert_eq!(parse_method("P").unwrap().flavor(), Flavor::Multiplicative);
        assert!(parse_method("Q_1").is_err());
        assert!(parse_method("H_x").is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(matches!(method_mr(0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(method_mr(-2.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(method_holder(0), Err(Error::InvalidArgument(_))));
        assert_eq!(method_mr(1.0).unwrap().label(), "M");
        assert_eq!(method_holder(1).unwrap().iterations(), 1);
        let unnormalized = Kernel::from_catalog(crate::kernel::CatalogEntry::FiniteMixture(vec![(
            num_complex::Complex64::new(2.0, 0.0),
            crate::kernel::CatalogEntry::Exponential { lambda: 1.0 },
        )]))
        .unwrap();
        assert!(MethodDescriptor::forward(unnormalized, "x").is_err());
    }

    #[test]
    fn collapsed_iterate_uses_power_kernel() {
        let h2 = method_holder(2).unwrap().collapsed().unwrap();
        assert_eq!(h2.iterations(), 1);
        let x = 3.0f64;
        let v = h2.kernel().evaluate(x).unwrap().re;
        assert!((v - x.ln() / x).abs() < 1e-14);
    }

    #[test]
    fn fractions_format_compactly() {
        assert_eq!(format_real(0.5), "1/2");
        assert_eq!(format_real(2.0), "2");
        assert_eq!(format_real(1.0 / 3.0), "1/3");
        assert_eq!(format_real(std::f64::consts::PI), format!("{}", std::f64::consts::PI));
    }
}
