//! Kernel spec files and the `catalog:<name>(<reals>)` / `file:<path>` argument
//! grammar.
//!
//! ```json
//! { "flavor": "additive",
//!   "body": { "catalog": "exponential", "params": { "lambda": 1.0 } } }
//! { "flavor": "multiplicative",
//!   "body": { "samples": [[1.0, 1.0, 0.0], [1.5, 0.44, 0.0], ...] } }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CatalogEntry, ExpPolynomial, ExpTerm, Flavor, Kernel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub flavor: Flavor,
    pub body: BodySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodySpec {
    Catalog {
        catalog: String,
        #[serde(default)]
        params: BTreeMap<String, Value>,
    },
    Samples {
        samples: Vec<[f64; 3]>,
    },
}

fn param(params: &BTreeMap<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse(format!("missing numeric parameter `{key}`")))
}

fn complex_pair(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| Error::Parse("bad complex".into()))?;
            let im = a[1].as_f64().ok_or_else(|| Error::Parse("bad complex".into()))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(Error::Parse("expected a number or [re, im]".into())),
    }
}

fn entry_from(name: &str, params: &BTreeMap<String, Value>) -> Result<CatalogEntry> {
    Ok(match name {
        "exponential" => CatalogEntry::Exponential { lambda: param(params, "lambda")? },
        "power_law" => CatalogEntry::PowerLaw { r: param(params, "r")? },
        "counterexample_additive" => {
            CatalogEntry::CounterexampleAdditive { alpha: param(params, "alpha")? }
        }
        "counterexample_multiplicative" => {
            CatalogEntry::CounterexampleMultiplicative { alpha: param(params, "alpha")? }
        }
        "finite_mixture" => {
            let terms = params
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("finite_mixture needs `terms`".into()))?;
            let mut parts = Vec::with_capacity(terms.len());
            for t in terms {
                let coefficient = complex_pair(
                    t.get("coefficient")
                        .ok_or_else(|| Error::Parse("mixture term needs `coefficient`".into()))?,
                )?;
                let inner_name = t
                    .get("catalog")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Parse("mixture term needs `catalog`".into()))?;
                let inner_params: BTreeMap<String, Value> = match t.get("params") {
                    Some(p) => serde_json::from_value(p.clone())?,
                    None => BTreeMap::new(),
                };
                parts.push((coefficient, entry_from(inner_name, &inner_params)?));
            }
            CatalogEntry::FiniteMixture(parts)
        }
        "exp_polynomial" => {
            let terms = params
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("exp_polynomial needs `terms`".into()))?;
            let mut out = Vec::with_capacity(terms.len());
            for t in terms {
                let get = |k: &str| {
                    t.get(k).ok_or_else(|| Error::Parse(format!("exp_polynomial term needs `{k}`")))
                };
                out.push(ExpTerm {
                    coefficient: complex_pair(get("coefficient")?)?,
                    power: get("power")?
                        .as_u64()
                        .ok_or_else(|| Error::Parse("`power` must be a non-negative integer".into()))?
                        as u32,
                    rate: complex_pair(get("rate")?)?,
                });
            }
            CatalogEntry::ExpPolynomial(ExpPolynomial::new(out)?)
        }
        other => return Err(Error::Parse(format!("unknown catalog kernel `{other}`"))),
    })
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match &self.body {
            BodySpec::Catalog { catalog, params } => {
                Kernel::closed_form(self.flavor, entry_from(catalog, params)?)
            }
            BodySpec::Samples { samples } => {
                let pts: Vec<(f64, Complex64)> = samples
                    .iter()
                    .map(|s| (s[0], Complex64::new(s[1], s[2])))
                    .collect();
                Kernel::from_native_samples(self.flavor, &pts)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// Parses `name(a, b, ...)` into the name and its real arguments.
pub fn parse_call(text: &str) -> Result<(String, Vec<f64>)> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text.to_string(), Vec::new()));
    };
    if !text.ends_with(')') {
        return Err(Error::Parse(format!("unbalanced parentheses in `{text}`")));
    }
    let name = text[..open].trim().to_string();
    let inner = &text[open + 1..text.len() - 1];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|a| parse_real(a.trim()))
            .collect::<Result<Vec<_>>>()?
    };
    if name.is_empty() {
        return Err(Error::Parse(format!("missing name in `{text}`")));
    }
    Ok((name, args))
}

/// Reals, optionally written as a fraction `p/q`.
pub fn parse_real(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("not a real number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| bad())?;
        let q: f64 = q.trim().parse().map_err(|_| bad())?;
        return Ok(p / q);
    }
    s.parse().map_err(|_| bad())
}

/// `catalog:<name>(<reals>)` or `file:<path>`.
pub fn parse_kernel_arg(arg: &str) -> Result<Kernel> {
    if let Some(path) = arg.strip_prefix("file:") {
        return KernelSpec::load(Path::new(path))?.build();
    }
    let Some(call) = arg.strip_prefix("catalog:") else {
        return Err(Error::Parse(format!(
            "kernel spec must start with `catalog:` or `file:`, got `{arg}`"
        )));
    };
    let (name, args) = parse_call(call)?;
    let one = |what: &str| -> Result<f64> {
        match args.as_slice() {
            [x] => Ok(*x),
            _ => Err(Error::Parse(format!("{name} takes exactly one argument ({what})"))),
        }
    };
    let entry = match name.as_str() {
        "exponential" => CatalogEntry::Exponential { lambda: one("lambda")? },
        "power_law" => CatalogEntry::PowerLaw { r: one("r")? },
        "counterexample_additive" => CatalogEntry::CounterexampleAdditive { alpha: one("alpha")? },
        "counterexample_multiplicative" => {
            CatalogEntry::CounterexampleMultiplicative { alpha: one("alpha")? }
        }
        other => return Err(Error::Parse(format!("unknown catalog kernel `{other}`"))),
    };
    Kernel::from_catalog(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_arguments() {
        let k = parse_kernel_arg("catalog:power_law(1/2)").unwrap();
        assert_eq!(k.flavor(), Flavor::Multiplicative);
        assert!((k.evaluate(4.0).unwrap().re - 0.25).abs() < 1e-15);
        assert!(parse_kernel_arg("catalog:exponential(1").is_err());
        assert!(parse_kernel_arg("catalog:nope(1)").is_err());
        assert!(parse_kernel_arg("exponential(1)").is_err());
        assert!(parse_kernel_arg("catalog:exponential(1, 2)").is_err());
    }

    #[test]
    fn reads_catalog_and_sample_files() {
        let spec = KernelSpec::from_json(
            r#"{"flavor":"additive","body":{"catalog":"finite_mixture","params":{"terms":[
                {"coefficient":[0.5,0],"catalog":"exponential","params":{"lambda":1}},
                {"coefficient":0.5,"catalog":"exponential","params":{"lambda":2}}]}}}"#,
        )
        .unwrap();
        let k = spec.build().unwrap();
        assert!((k.mass() - 1.0).norm() < 1e-14);

        let samples: Vec<[f64; 3]> = (0..=400)
            .map(|i| {
                let t = 1.0 + i as f64 * 0.05;
                [t, 1.0 / t, 0.0]
            })
            .collect();
        let spec = KernelSpec {
            flavor: Flavor::Multiplicative,
            body: BodySpec::Samples { samples },
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back = KernelSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
        let k = back.build().unwrap();
        assert!((k.mass().re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_samples() {
        assert!(KernelSpec::from_json(r#"{"flavor":"additive","body":{"catalog":"exponential","params":{"lambda":1}},"extra":1}"#).is_err());
        let spec = KernelSpec::from_json(
            r#"{"flavor":"multiplicative","body":{"samples":[[0.5,1,0],[2,0.5,0],[3,0.25,0]]}}"#,
        )
        .unwrap();
        assert!(spec.build().is_err());
    }
}
