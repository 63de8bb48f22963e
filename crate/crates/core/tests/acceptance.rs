//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test --test acceptance`; the process exits nonzero if any
//! criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use summability::corpus::{builtin_corpus, catalog_methods, discrete_bridge, find_function};
use summability::engine::{
    apply_chain, apply_forward, continuity_bound, estimate_limit_with, parse_method, EngineConfig, Sequence, Status,
    SummationResult, TestFunction,
};
use summability::spectrum::{classify_wiener, mellin_transform_quadrature, SpectrumOptions, Verdict};
use summability::{Flavor, Kernel, Result, TOL_QUAD};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn corpus_fn(label: &str) -> TestFunction {
    find_function(&builtin_corpus(), label).expect("builtin label").clone()
}

fn limit(label: &str, f: &TestFunction) -> Result<SummationResult> {
    estimate_limit_with(&parse_method(label)?, f, &EngineConfig::default())
}

fn max_pairwise(values: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

fn transform_formula() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0, 5.0] {
        let k = Kernel::power_law(r)?;
        for i in 0..201 {
            let x = -50.0 + 0.5 * i as f64;
            let numeric = mellin_transform_quadrature(&k, x, 1e-10)?;
            let exact = Complex64::new(r, 0.0) / Complex64::new(r, x);
            worst = worst.max((numeric - exact).norm());
        }
    }
    outcome(worst < 1e-6, format!("max |Δ| = {worst:.2e}"))
}

fn composition_law() -> Result<Outcome> {
    let kernels = [
        Kernel::exponential(1.0)?,
        Kernel::exponential(2.0)?,
        Kernel::power_law(1.0)?.to_additive()?,
    ];
    let functions = [corpus_fn("const_1@add"), corpus_fn("sin@add"), {
        TestFunction::new("exp", Flavor::Additive, 1.0, |t| c((-t).exp()))?
    }];
    let probes = [0.25, 1.0, 3.0, 8.0, 20.0, 60.0];
    let mut worst: f64 = 0.0;
    for a in &kernels {
        for b in &kernels {
            let conv = a.convolve(b)?;
            for f in &functions {
                for &x in &probes {
                    let nested = apply_chain(&[a.clone(), b.clone()], f, x, TOL_QUAD)?;
                    let single = apply_forward(&conv, f, x)?;
                    worst = worst.max((nested - single).norm());
                }
            }
        }
    }
    outcome(worst < 1e-6, format!("max |U₂U₁f − U_(φ₁*φ₂)f| = {worst:.2e}"))
}

fn mr_equivalence() -> Result<Outcome> {
    let cases = [
        ("sin@mul", 0.0),
        ("const_1@mul", 1.0),
        ("decay_1/2@mul", 0.5),
        ("decay_-3/4@mul", -0.75),
    ];
    let mut problems = Vec::new();
    let mut worst_delta: f64 = 0.0;
    let mut worst_err: f64 = 0.0;
    for (label, alpha) in cases {
        let f = corpus_fn(label);
        let mut values = Vec::new();
        for m in ["M_1/2", "M", "M_2"] {
            let r = limit(m, &f)?;
            match (r.status, r.estimate) {
                (Status::Converged, Some(v)) => {
                    worst_err = worst_err.max((v - c(alpha)).norm());
                    values.push(v);
                }
                (s, _) => problems.push(format!("{m} on {label}: {s}")),
            }
        }
        worst_delta = worst_delta.max(max_pairwise(&values));
    }
    let passed = problems.is_empty() && worst_delta < 2e-4 && worst_err < 2e-4;
    let mut detail = format!("max pairwise |Δ| = {worst_delta:.2e}, max |estimate − α| = {worst_err:.2e}");
    if !problems.is_empty() {
        detail.push_str(&format!("; {}", problems.join(", ")));
    }
    outcome(passed, detail)
}

fn holder_iterates() -> Result<Outcome> {
    let corpus = builtin_corpus();
    let mut checked = Vec::new();
    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    for f in corpus.iter().filter(|f| f.flavor() == Flavor::Multiplicative) {
        let h1 = limit("M", f)?;
        if h1.status != Status::Converged {
            continue;
        }
        checked.push(f.label().to_string());
        let base = h1.estimate.expect("converged");
        for m in ["H_2", "H_3"] {
            let r = limit(m, f)?;
            match (r.status, r.estimate) {
                (Status::Converged, Some(v)) => worst = worst.max((v - base).norm()),
                (s, _) => problems.push(format!("{m} on {}: {s}", f.label())),
            }
        }
    }
    let passed = problems.is_empty() && worst < 2e-4 && !checked.is_empty();
    let mut detail = format!("{} functions, max |H_k − H_1| = {worst:.2e}", checked.len());
    if !problems.is_empty() {
        detail.push_str(&format!("; {}", problems.join(", ")));
    }
    outcome(passed, detail)
}

fn dual_equivalence() -> Result<Outcome> {
    let functions = ["const_1@mul", "const_-2@mul", "sin@mul", "decay_1/2@mul", "decay_-3/4@mul"];
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for label in functions {
        let f = corpus_fn(label);
        for r in ["1/2", "1", "2"] {
            let fwd = if r == "1" { "M".to_string() } else { format!("M_{r}") };
            let dual = format!("M*_{r}");
            let a = limit(&fwd, &f)?;
            let b = limit(&dual, &f)?;
            match (a.estimate, b.estimate) {
                (Some(x), Some(y)) if a.status == Status::Converged && b.status == Status::Converged => {
                    worst = worst.max((x - y).norm());
                }
                _ => problems.push(format!("{fwd}/{dual} on {label}: {}/{}", a.status, b.status)),
            }
        }
    }
    let passed = problems.is_empty() && worst < 2e-4;
    let mut detail = format!("max |M_r − M*_r| = {worst:.2e}");
    if !problems.is_empty() {
        detail.push_str(&format!("; {}", problems.join(", ")));
    }
    outcome(passed, detail)
}

fn wiener_separation() -> Result<Outcome> {
    let f = corpus_fn("char_1@add");
    let cex = limit("S_cex_1", &f)?;
    let k = limit("K", &f)?;
    let profile = classify_wiener(&Kernel::counterexample_additive(1.0)?, &SpectrumOptions::default())?;
    let cex_ok = cex.status == Status::Converged && cex.estimate.is_some_and(|v| v.norm() < 1e-3);
    let k_ok = k.status == Status::Oscillating && k.oscillation_amplitude > 0.3;
    let (zero_ok, xi) = match profile.verdict {
        Verdict::ZeroFound { xi, .. } => ((xi - 1.0).abs() < 1e-6, xi),
        _ => (false, f64::NAN),
    };
    let est = cex.estimate.map_or(f64::NAN, |v| v.norm());
    outcome(
        cex_ok && k_ok && zero_ok,
        format!(
            "S_cex_1: {} |est| = {est:.2e}; K: {} amplitude {:.3}; zero at ξ = {xi:.9}",
            cex.status, k.status, k.oscillation_amplitude
        ),
    )
}

fn discrete_bridge_check() -> Result<Outcome> {
    let f = corpus_fn("alternating@mul");
    let m = limit("M", &f)?;
    let points = discrete_bridge(&Sequence::alternating(), &[20], &EngineConfig::default())?;
    let gap = (points[0].continuous - points[0].discrete).norm();
    let est = m.estimate.map_or(f64::NAN, |v| v.norm());
    let passed = m.status == Status::Converged && est < 1e-3 && gap < 1e-3;
    outcome(passed, format!("M: {} |est| = {est:.2e}; |engine − discrete| at n = 2^20: {gap:.2e}", m.status))
}

fn regularity() -> Result<Outcome> {
    let corpus = builtin_corpus();
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for f in &corpus {
        let Some(target) = f.classical_limit() else { continue };
        for m in catalog_methods(f.flavor()) {
            runs += 1;
            let r = limit(m, f)?;
            match (r.status, r.estimate) {
                (Status::Converged, Some(v)) => {
                    let err = (v - target).norm();
                    worst = worst.max(err);
                    if err >= 2e-4 {
                        problems.push(format!("{m} on {}: off by {err:.1e}", f.label()));
                    }
                }
                (s, _) => problems.push(format!("{m} on {}: {s}", f.label())),
            }
        }
    }
    let mut detail = format!("{runs} runs, max |estimate − limit| = {worst:.2e}");
    if !problems.is_empty() {
        detail.push_str(&format!("; {}", problems.join(", ")));
    }
    outcome(problems.is_empty(), detail)
}

fn continuity() -> Result<Outcome> {
    let kernels = [
        Kernel::exponential(1.0)?,
        Kernel::exponential(2.0)?,
        Kernel::counterexample_additive(1.0)?,
        Kernel::power_law(2.0)?.to_additive()?,
    ];
    let f = corpus_fn("sin@add");
    let mut worst_excess = f64::NEG_INFINITY;
    for k in &kernels {
        for delta in [1e-1, 1e-2, 1e-3] {
            let bound = continuity_bound(k, f.bound(), delta)?;
            for i in 0..400 {
                let x = 0.05 + 0.125 * i as f64;
                let d = (apply_forward(k, &f, x + delta)? - apply_forward(k, &f, x)?).norm();
                worst_excess = worst_excess.max(d - bound);
            }
        }
    }
    outcome(worst_excess <= 1e-5, format!("max (measured − bound) = {worst_excess:.2e}"))
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Criterion, Duration); 9] = [
        ("Mellin transform of ψ_r equals r/(r+ix)", transform_formula, Duration::from_secs(5)),
        ("composition law U₂U₁ = U_(φ₁*φ₂)", composition_law, Duration::from_secs(30)),
        ("M_1/2, M, M_2 agree", mr_equivalence, Duration::from_secs(60)),
        ("Hölder iterates H_1, H_2, H_3 agree", holder_iterates, Duration::from_secs(120)),
        ("forward and dual M_r agree", dual_equivalence, Duration::from_secs(60)),
        ("Wiener separation on e^(ix)", wiener_separation, Duration::from_secs(30)),
        ("discrete bridge for (−1)^n", discrete_bridge_check, Duration::from_secs(10)),
        ("regularity of every catalog method", regularity, Duration::from_secs(120)),
        ("uniform-continuity bound", continuity, Duration::from_secs(30)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= *budget;
        let ok = passed && in_time;
        if !ok {
            failures += 1;
        }
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
        let late = if in_time { "" } else { " (over time budget)" };
        println!(
            "{} {}: {name}: {detail} [{timing}]{late}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
