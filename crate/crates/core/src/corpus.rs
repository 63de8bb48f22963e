//! Test-function catalog and the cross-method verification matrix.
//!
//! Labels carry the flavor as a suffix: `sin@mul` is `sin t` on `[1, ∞)` under
//! `dt/t`, `sin@add` is `sin t` on `[0, ∞)`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{
    apply_method, embed_sequence, estimate_limit_with, format_real, parse_method, EngineConfig, Provenance, Sequence,
    Status, TestFunction,
};
use crate::error::{Error, Result};
use crate::kernel::Flavor;

const CHARACTER_FREQUENCIES: [f64; 3] = [0.5, 1.0, 2.0];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn zero() -> Complex64 {
    c(0.0, 0.0)
}

fn suffix(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::Additive => "add",
        Flavor::Multiplicative => "mul",
    }
}

/// `α` everywhere.
pub fn constant(flavor: Flavor, alpha: f64) -> TestFunction {
    let label = format!("const_{}@{}", format_real(alpha), suffix(flavor));
    TestFunction::new(label, flavor, alpha.abs(), move |_| c(alpha, 0.0))
        .expect("finite bound")
        .with_classical_limit(c(alpha, 0.0))
}

/// `α + e^{-t}`.
pub fn decaying(flavor: Flavor, alpha: f64) -> TestFunction {
    let label = format!("decay_{}@{}", format_real(alpha), suffix(flavor));
    let start: f64 = match flavor {
        Flavor::Additive => 0.0,
        Flavor::Multiplicative => 1.0,
    };
    let bound = (alpha + (-start).exp()).abs().max(alpha.abs());
    TestFunction::new(label, flavor, bound, move |t| c(alpha + (-t).exp(), 0.0))
        .expect("finite bound")
        .with_classical_limit(c(alpha, 0.0))
}

pub fn sine(flavor: Flavor) -> TestFunction {
    TestFunction::new(format!("sin@{}", suffix(flavor)), flavor, 1.0, |t| c(t.sin(), 0.0))
        .expect("finite bound")
        .with_frequency(|_| 1.0)
}

pub fn cosine(flavor: Flavor) -> TestFunction {
    TestFunction::new(format!("cos@{}", suffix(flavor)), flavor, 1.0, |t| c(t.cos(), 0.0))
        .expect("finite bound")
        .with_frequency(|_| 1.0)
}

/// `e^{iαt}` (additive) or `t^{iα}` (multiplicative).
pub fn character(flavor: Flavor, alpha: f64) -> TestFunction {
    let label = format!("char_{}@{}", format_real(alpha), suffix(flavor));
    let f = match flavor {
        Flavor::Additive => TestFunction::new(label, flavor, 1.0, move |t| c(0.0, alpha * t).exp())
            .map(|f| f.with_frequency(move |_| alpha)),
        Flavor::Multiplicative => TestFunction::new(label, flavor, 1.0, move |t| c(0.0, alpha * t.ln()).exp())
            .map(|f| f.with_frequency(move |t| alpha / t)),
    };
    f.expect("finite bound")
}

fn additive_corpus() -> Vec<TestFunction> {
    let f = Flavor::Additive;
    let mut out = vec![
        constant(f, 1.0)
            .with_known_value("K", Some(c(1.0, 0.0)), Provenance::Regularity)
            .with_known_value("S_exp_2", Some(c(1.0, 0.0)), Provenance::Regularity),
        constant(f, -0.75),
        decaying(f, 0.25).with_known_value("K", Some(c(0.25, 0.0)), Provenance::Regularity),
        TestFunction::new("rational_1/2@add", f, 1.5, |t| c(0.5 + 1.0 / (1.0 + t), 0.0))
            .expect("finite bound")
            .with_classical_limit(c(0.5, 0.0)),
        sine(f).with_known_value("K", None, Provenance::ClosedForm),
        cosine(f).with_known_value("K", None, Provenance::ClosedForm),
        TestFunction::new("sin_sq@add", f, 1.0, |t| c((t * t).sin(), 0.0))
            .expect("finite bound")
            .with_frequency(|t| 2.0 * t)
            .with_known_value("K", Some(zero()), Provenance::QuadratureOracle),
    ];
    for alpha in CHARACTER_FREQUENCIES {
        let cex = format!("S_cex_{}", format_real(alpha));
        out.push(
            character(f, alpha)
                .with_known_value("K", None, Provenance::ClosedForm)
                .with_known_value(&cex, Some(zero()), Provenance::ClosedForm),
        );
    }
    out
}

fn multiplicative_corpus() -> Vec<TestFunction> {
    let f = Flavor::Multiplicative;
    let mut out = vec![
        constant(f, 1.0)
            .with_known_value("M", Some(c(1.0, 0.0)), Provenance::ClosedForm)
            .with_known_value("M_1/2", Some(c(1.0, 0.0)), Provenance::ClosedForm),
        constant(f, -2.0),
        decaying(f, 0.5).with_known_value("M_1/2", Some(c(0.5, 0.0)), Provenance::Regularity),
        decaying(f, -0.75),
        sine(f)
            .with_known_value("M", Some(zero()), Provenance::ClosedForm)
            .with_known_value("M_2", Some(zero()), Provenance::ClosedForm)
            .with_known_value("H_2", Some(zero()), Provenance::ClosedForm)
            .with_known_value("M*_1", Some(zero()), Provenance::ClosedForm),
        cosine(f)
            .with_known_value("M", Some(zero()), Provenance::ClosedForm)
            .with_known_value("H_2", Some(zero()), Provenance::ClosedForm),
    ];
    for alpha in CHARACTER_FREQUENCIES {
        let cex = format!("M_cex_{}", format_real(alpha));
        out.push(
            character(f, alpha)
                .with_known_value("M", None, Provenance::ClosedForm)
                .with_known_value(&cex, Some(zero()), Provenance::ClosedForm),
        );
    }
    out.push(
        embed_sequence("alternating@mul", Sequence::alternating())
            .expect("non-empty")
            .with_known_value("M", Some(zero()), Provenance::ClosedForm),
    );
    let blocks = Sequence::Periodic(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    out.push(
        embed_sequence("blocks@mul", blocks)
            .expect("non-empty")
            .with_known_value("M", Some(c(0.5, 0.0)), Provenance::ClosedForm),
    );
    out
}

/// The builtin catalog of test functions.
pub fn builtin_corpus() -> Vec<TestFunction> {
    let mut out = additive_corpus();
    out.extend(multiplicative_corpus());
    out
}

pub fn find_function<'a>(corpus: &'a [TestFunction], label: &str) -> Result<&'a TestFunction> {
    corpus
        .iter()
        .find(|f| f.label() == label)
        .ok_or_else(|| Error::Config(format!("unknown function label `{label}`")))
}

/// Regular methods of the builtin catalog for one flavor.
pub fn catalog_methods(flavor: Flavor) -> Vec<&'static str> {
    match flavor {
        Flavor::Additive => vec!["K", "S_exp_2", "S*_exp_1", "S_cex_1", "S*_cex_1"],
        Flavor::Multiplicative => vec![
            "P", "M", "M_1/2", "M_2", "M*_1/2", "M*_1", "M*_2", "H_2", "H_3", "M_cex_1",
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedOutcome {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    /// Every method converges to `value`.
    AllAgree { value: Complex64 },
    /// Exactly two methods, with the stated outcomes.
    Separation { first: ExpectedOutcome, second: ExpectedOutcome },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationCase {
    pub id: String,
    pub function: String,
    pub methods: Vec<String>,
    pub expected: Expected,
    /// The equivalence or separation statement the case witnesses.
    pub claim: String,
    /// Defaults to `5·tol_limit` for the case's function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl VerificationCase {
    pub fn all_agree(id: &str, function: &str, methods: &[&str], value: Complex64, claim: &str) -> Self {
        Self {
            id: id.into(),
            function: function.into(),
            methods: methods.iter().map(|m| m.to_string()).collect(),
            expected: Expected::AllAgree { value },
            claim: claim.into(),
            tolerance: None,
        }
    }

    pub fn separation(
        id: &str,
        function: &str,
        methods: [&str; 2],
        first: ExpectedOutcome,
        second: ExpectedOutcome,
        claim: &str,
    ) -> Self {
        Self {
            id: id.into(),
            function: function.into(),
            methods: methods.iter().map(|m| m.to_string()).collect(),
            expected: Expected::Separation { first, second },
            claim: claim.into(),
            tolerance: None,
        }
    }
}

pub fn builtin_cases() -> Vec<VerificationCase> {
    let zero = zero();
    let converged_zero = ExpectedOutcome { status: Status::Converged, value: Some(zero) };
    let oscillating = ExpectedOutcome { status: Status::Oscillating, value: None };
    let mut cases = vec![
        VerificationCase::all_agree("mr_sin", "sin@mul", &["M", "M_2", "M_1/2"], zero, "M_r equivalence"),
        VerificationCase::all_agree("mr_decay", "decay_1/2@mul", &["M", "M_2", "M_1/2"], c(0.5, 0.0), "M_r equivalence"),
        VerificationCase::all_agree("holder_sin", "sin@mul", &["H_1", "H_2", "H_3"], zero, "Hölder iterates equal M"),
        VerificationCase::all_agree("holder_cos", "cos@mul", &["H_1", "H_2", "H_3"], zero, "Hölder iterates equal M"),
        VerificationCase::all_agree(
            "dual_sin",
            "sin@mul",
            &["M", "M*_1/2", "M*_1", "M*_2"],
            zero,
            "forward and dual methods agree",
        ),
        VerificationCase::all_agree(
            "dual_decay",
            "decay_-3/4@mul",
            &["M_1/2", "M*_1/2", "M_2", "M*_2"],
            c(-0.75, 0.0),
            "forward and dual methods agree",
        ),
        VerificationCase::all_agree("bridge_alternating", "alternating@mul", &["M", "H_2"], zero, "discrete Cesàro bridge"),
        VerificationCase::all_agree("bridge_blocks", "blocks@mul", &["M", "H_2"], c(0.5, 0.0), "discrete Cesàro bridge"),
        VerificationCase::all_agree("fresnel", "sin_sq@add", &["K", "S_exp_2"], zero, "Wiener kernels agree"),
        VerificationCase::separation(
            "wiener_additive",
            "char_1@add",
            ["S_cex_1", "K"],
            converged_zero,
            oscillating,
            "a transform zero at α separates the method from K",
        ),
        VerificationCase::separation(
            "wiener_multiplicative",
            "char_1@mul",
            ["M_cex_1", "P"],
            converged_zero,
            oscillating,
            "a transform zero at α separates the method from P",
        ),
    ];
    for f in ["const_1@add", "decay_1/4@add", "rational_1/2@add"] {
        let limit = find_function(&additive_corpus(), f)
            .ok()
            .and_then(TestFunction::classical_limit)
            .unwrap_or(zero);
        cases.push(VerificationCase::all_agree(
            &format!("regular_{f}"),
            f,
            &catalog_methods(Flavor::Additive),
            limit,
            "regularity",
        ));
    }
    for f in ["const_1@mul", "const_-2@mul", "decay_1/2@mul"] {
        let limit = find_function(&multiplicative_corpus(), f)
            .ok()
            .and_then(TestFunction::classical_limit)
            .unwrap_or(zero);
        cases.push(VerificationCase::all_agree(
            &format!("regular_{f}"),
            f,
            &catalog_methods(Flavor::Multiplicative),
            limit,
            "regularity",
        ));
    }
    cases
}

/// Reads a JSON array of cases.
pub fn parse_cases(text: &str) -> Result<Vec<VerificationCase>> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub status: Option<Status>,
    pub estimate: Option<Complex64>,
    pub amplitude: f64,
    pub tolerance_used: f64,
    pub evaluations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    pub tolerance: f64,
    pub methods: Vec<MethodOutcome>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Sorted by case id.
    pub cases: Vec<CaseOutcome>,
    pub seconds: f64,
    pub evaluations: u64,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseOutcome> {
        self.cases.iter().filter(|c| !c.passed)
    }
}

fn method_label(label: &str) -> String {
    // `H_1` is the Cesàro operator itself.
    if label == "H_1" {
        "M".into()
    } else {
        label.into()
    }
}

fn validate(case: &VerificationCase, corpus: &[TestFunction]) -> Result<()> {
    let f = find_function(corpus, &case.function)?;
    if case.methods.is_empty() {
        return Err(Error::Config(format!("case `{}` lists no methods", case.id)));
    }
    if matches!(case.expected, Expected::Separation { .. }) && case.methods.len() != 2 {
        return Err(Error::Config(format!(
            "separation case `{}` needs exactly two methods, found {}",
            case.id,
            case.methods.len()
        )));
    }
    for m in &case.methods {
        let method = parse_method(&method_label(m)).map_err(|e| Error::Config(format!("case `{}`: {e}", case.id)))?;
        if method.flavor() != f.flavor() {
            return Err(Error::Config(format!(
                "case `{}`: method {m} and function {} differ in flavor",
                case.id, case.function
            )));
        }
    }
    if let Some(t) = case.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("case `{}`: tolerance must be positive", case.id)));
        }
    }
    Ok(())
}

fn run_method(label: &str, f: &TestFunction, cfg: &EngineConfig) -> MethodOutcome {
    let outcome = parse_method(&method_label(label)).and_then(|m| estimate_limit_with(&m, f, cfg));
    match outcome {
        Ok(r) => MethodOutcome {
            method: label.into(),
            status: Some(r.status),
            estimate: r.estimate,
            amplitude: r.oscillation_amplitude,
            tolerance_used: r.tolerance_used,
            evaluations: r.evaluations,
            error: None,
        },
        Err(e) => MethodOutcome {
            method: label.into(),
            status: None,
            estimate: None,
            amplitude: 0.0,
            tolerance_used: cfg.tol_limit_for(f),
            evaluations: 0,
            error: Some(e.to_string()),
        },
    }
}

fn matches_expectation(m: &MethodOutcome, want: &ExpectedOutcome, tol: f64) -> std::result::Result<(), String> {
    if m.status != Some(want.status) {
        return Err(format!("{}: expected {}, got {}", m.method, want.status, describe(m)));
    }
    if let (Some(v), Some(e)) = (want.value, m.estimate) {
        if (e - v).norm() > tol {
            return Err(format!("{}: |{e} - {v}| > {tol:e}", m.method));
        }
    }
    if want.status == Status::Oscillating && m.amplitude <= 10.0 * tol {
        return Err(format!("{}: amplitude {:e} is not above 10×{tol:e}", m.method, m.amplitude));
    }
    Ok(())
}

fn describe(m: &MethodOutcome) -> String {
    match (&m.error, m.status) {
        (Some(e), _) => format!("error ({e})"),
        (None, Some(s)) => s.to_string(),
        (None, None) => "nothing".into(),
    }
}

fn judge(case: &VerificationCase, methods: &[MethodOutcome], tol: f64) -> std::result::Result<(), String> {
    match &case.expected {
        Expected::AllAgree { value } => {
            let want = ExpectedOutcome { status: Status::Converged, value: Some(*value) };
            let problems: Vec<String> = methods
                .iter()
                .filter_map(|m| matches_expectation(m, &want, tol).err())
                .collect();
            if problems.is_empty() {
                Ok(())
            } else {
                Err(problems.join("; "))
            }
        }
        Expected::Separation { first, second } => {
            matches_expectation(&methods[0], first, tol)?;
            matches_expectation(&methods[1], second, tol)
        }
    }
}

fn run_case(case: &VerificationCase, corpus: &[TestFunction], cfg: &EngineConfig) -> CaseOutcome {
    let start = Instant::now();
    let f = find_function(corpus, &case.function).expect("validated");
    let tol = case.tolerance.unwrap_or(5.0 * cfg.tol_limit_for(f));
    let methods: Vec<MethodOutcome> = case.methods.iter().map(|m| run_method(m, f, cfg)).collect();
    let verdict = judge(case, &methods, tol);
    CaseOutcome {
        id: case.id.clone(),
        passed: verdict.is_ok(),
        detail: verdict.err().unwrap_or_else(|| "ok".into()),
        tolerance: tol,
        methods,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every case on up to `jobs` worker threads.
///
/// Every label is checked before any evaluation; an unknown label is a
/// [`Error::Config`]. A failing case does not stop the others.
pub fn run_matrix(
    cases: &[VerificationCase],
    corpus: &[TestFunction],
    cfg: &EngineConfig,
    jobs: usize,
) -> Result<VerificationReport> {
    cfg.validate()?;
    for case in cases {
        validate(case, corpus)?;
    }
    let start = Instant::now();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(cases.len()));
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, cases.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(case) = cases.get(i) else { break };
                let outcome = run_case(case, corpus, cfg);
                results.lock().expect("no worker panics while holding the lock").push(outcome);
            });
        }
    });
    let mut cases = results.into_inner().expect("workers joined");
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    let evaluations = cases.iter().flat_map(|c| &c.methods).map(|m| m.evaluations).sum();
    Ok(VerificationReport {
        cases,
        seconds: start.elapsed().as_secs_f64(),
        evaluations,
    })
}

/// Engine value of `M` on the embedded sequence at `n`, next to the discrete
/// Cesàro mean `(1/n) Σ_{i ≤ n} a_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgePoint {
    pub n: u64,
    pub continuous: Complex64,
    pub discrete: Complex64,
}

pub fn discrete_bridge(seq: &Sequence, exponents: &[u32], cfg: &EngineConfig) -> Result<Vec<BridgePoint>> {
    let f = embed_sequence("bridge", seq.clone())?;
    let m = parse_method("M")?;
    exponents
        .iter()
        .map(|&j| {
            let n = 1u64 << j;
            let continuous = apply_method(&m, &f, n as f64, cfg)?;
            Ok(BridgePoint {
                n,
                continuous,
                discrete: seq.cesaro_mean(n),
            })
        })
        .collect()
}
