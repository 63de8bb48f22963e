//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 inconclusive,
//! 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::corpus::{
    self, builtin_cases, builtin_corpus, find_function, run_matrix, Expected, VerificationCase,
    VerificationReport,
};
use crate::engine::{estimate_limit_with, parse_method, EngineConfig, MethodDescriptor, Status, TestFunction, Variant};
use crate::error::{Error, Result};
use crate::kernel::spec_file::{parse_call, parse_kernel_arg};
use crate::kernel::Flavor;
use crate::spectrum::{classify_wiener, SpectrumOptions, SpectrumProfile, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "summa", version, about = "Convolution-kernel summability methods on the half-line")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Absolute quadrature tolerance per evaluation point.
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Plateau tolerance of the limit monitor.
    #[arg(long, global = true, value_parser = positive)]
    pub tol_limit: Option<f64>,
    /// Largest ladder index j in x_j = x0·ratio^j.
    #[arg(long, global = true)]
    pub max_ladder: Option<u32>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub output: OutputFormat,
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON engine configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for `verify` and `demo`.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wiener classification of a kernel from its transform.
    Classify {
        /// `catalog:<name>(<reals>)` or `file:<path>`.
        kernel: String,
        #[arg(long, default_value_t = 50.0, value_parser = positive)]
        xi_max: f64,
    },
    /// Estimates the generalized limit of one method on one function.
    Sum(SumArgs),
    /// Runs several methods on one function and reports their agreement.
    Compare {
        /// Two or more method labels followed by a function.
        #[arg(num_args = 3.., required = true)]
        items: Vec<String>,
    },
    /// Samples a kernel transform on `[-Ξ, Ξ]`.
    Spectrum {
        kernel: String,
        #[arg(long, default_value_t = 50.0, value_parser = positive)]
        xi_max: f64,
        /// Writes the profile here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the verification matrix.
    Verify {
        /// JSON array of cases; the builtin matrix when absent.
        #[arg(long)]
        cases: Option<PathBuf>,
        /// Runs only the cases with these ids.
        #[arg(long = "case")]
        only: Vec<String>,
    },
    /// Counterexample separation and a forward/dual pair, end to end.
    Demo,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    /// Method label (`M`, `M_1/2`, `H_2`, `S_cex_1`, ...).
    #[arg(long, conflicts_with = "kernel", required_unless_present = "kernel")]
    pub method: Option<String>,
    /// Kernel spec used as a forward method.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Corpus label (`sin@mul`), bare name (`sin`), or `const(α)`, `decay(α)`, `char(α)`.
    #[arg(long)]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub iterations: u32,
    /// Use the dual operator.
    #[arg(long)]
    pub dual: bool,
    /// Writes the ladder trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn engine_config(g: &GlobalArgs) -> Result<EngineConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => EngineConfig::default(),
    };
    if let Some(t) = g.tol {
        cfg.tol_quad = t;
    }
    if let Some(t) = g.tol_limit {
        cfg.tol_limit = Some(t);
    }
    if let Some(j) = g.max_ladder {
        cfg.max_ladder = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn suffix(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::Additive => "add",
        Flavor::Multiplicative => "mul",
    }
}

/// Resolves a function argument for a method of the given flavor.
pub fn resolve_function(arg: &str, flavor: Flavor) -> Result<TestFunction> {
    let arg = arg.strip_prefix("catalog:").unwrap_or(arg);
    if arg.contains('(') {
        let (name, params) = parse_call(arg)?;
        let [alpha] = params.as_slice() else {
            return Err(Error::Parse(format!("{name} takes exactly one argument")));
        };
        return match name.as_str() {
            "const" => Ok(corpus::constant(flavor, *alpha)),
            "decay" => Ok(corpus::decaying(flavor, *alpha)),
            "char" => Ok(corpus::character(flavor, *alpha)),
            other => Err(Error::Parse(format!("unknown function family `{other}`"))),
        };
    }
    let label = if arg.contains('@') { arg.to_string() } else { format!("{arg}@{}", suffix(flavor)) };
    let corpus = builtin_corpus();
    let f = find_function(&corpus, &label).map_err(|_| Error::Parse(format!("unknown function `{arg}`")))?;
    Ok(f.clone())
}

fn complex_pair(v: Complex64) -> [f64; 2] {
    [v.re, v.im]
}

#[derive(Debug, Serialize)]
struct SumReport {
    method: String,
    function: String,
    estimate: Option<[f64; 2]>,
    status: Status,
    amplitude: f64,
    tolerance: f64,
    evaluations: u64,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    function: String,
    methods: Vec<SumReport>,
    max_delta: Option<f64>,
    tolerance: f64,
    agree: bool,
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    kernel: String,
    #[serde(flatten)]
    verdict: Verdict,
    min_modulus: f64,
    lipschitz_bound: Option<f64>,
    analytic: Option<String>,
    grid_points: usize,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sum_csv_rows(rows: &[SumReport]) -> String {
    let mut out = String::from("method,function,status,re,im,amplitude,tolerance,evaluations\n");
    for r in rows {
        let (re, im) = r.estimate.map_or((String::new(), String::new()), |[a, b]| (format!("{a:e}"), format!("{b:e}")));
        out.push_str(&format!(
            "{},{},{},{re},{im},{:e},{:e},{}\n",
            csv_field(&r.method),
            csv_field(&r.function),
            r.status,
            r.amplitude,
            r.tolerance,
            r.evaluations
        ));
    }
    out
}

fn report_csv(report: &VerificationReport) -> String {
    let mut out = String::from("id,passed,seconds,tolerance,detail\n");
    for c in &report.cases {
        out.push_str(&format!(
            "{},{},{:.3},{:e},{}\n",
            csv_field(&c.id),
            c.passed,
            c.seconds,
            c.tolerance,
            csv_field(&c.detail)
        ));
    }
    out
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    format: OutputFormat,
}

impl Io<'_> {
    fn emit<T: Serialize>(&mut self, value: &T, csv: impl FnOnce() -> String) -> Result<()> {
        let text = match self.format {
            OutputFormat::Json => serde_json::to_string_pretty(value)? + "\n",
            OutputFormat::Csv => csv(),
        };
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn summarize(method: &MethodDescriptor, f: &TestFunction, cfg: &EngineConfig) -> Result<(SumReport, Vec<(f64, Complex64)>)> {
    let r = estimate_limit_with(method, f, cfg)?;
    let report = SumReport {
        method: method.label().to_string(),
        function: f.label().to_string(),
        estimate: r.estimate.map(complex_pair),
        status: r.status,
        amplitude: r.oscillation_amplitude,
        tolerance: r.tolerance_used,
        evaluations: r.evaluations,
    };
    Ok((report, r.trace))
}

fn cmd_classify(io: &mut Io, kernel: &str, xi_max: f64) -> Result<i32> {
    let k = parse_kernel_arg(kernel)?;
    let opts = SpectrumOptions { xi_max, ..SpectrumOptions::default() };
    let profile = classify_wiener(&k, &opts)?;
    let report = ClassifyReport {
        kernel: kernel.to_string(),
        verdict: profile.verdict,
        min_modulus: profile.min_modulus,
        lipschitz_bound: profile.lipschitz_bound,
        analytic: profile.analytic.clone(),
        grid_points: profile.frequencies.len(),
    };
    io.emit(&report, || {
        let (name, a, b) = match profile.verdict {
            Verdict::NonvanishingOnWindow { margin } => ("nonvanishing_on_window", format!("{margin:e}"), String::new()),
            Verdict::ZeroFound { xi, modulus } => ("zero_found", format!("{xi:e}"), format!("{modulus:e}")),
            Verdict::Inconclusive => ("inconclusive", String::new(), String::new()),
        };
        format!(
            "kernel,verdict,margin_or_xi,modulus,min_modulus\n{},{name},{a},{b},{:e}\n",
            csv_field(kernel),
            profile.min_modulus
        )
    })?;
    Ok(match profile.verdict {
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    })
}

fn method_from(args: &SumArgs) -> Result<MethodDescriptor> {
    let mut m = match (&args.method, &args.kernel) {
        (Some(label), _) => parse_method(label)?,
        (None, Some(spec)) => {
            let k = parse_kernel_arg(spec)?;
            let k = if k.is_normalized(1e-6) { k } else { k.normalize()? };
            MethodDescriptor::forward(k, spec.clone())?
        }
        (None, None) => return Err(Error::Parse("either --method or --kernel is required".into())),
    };
    if args.iterations != 1 {
        m = m.with_iterations(args.iterations)?;
    }
    if args.dual {
        m = m.with_variant(Variant::Dual);
    }
    Ok(m)
}

fn cmd_sum(io: &mut Io, args: &SumArgs, cfg: &EngineConfig) -> Result<i32> {
    let m = method_from(args)?;
    let f = resolve_function(&args.function, m.flavor())?;
    let (report, trace) = summarize(&m, &f, cfg)?;
    if let Some(path) = &args.trace {
        let mut text = String::from("x,re,im\n");
        for (x, v) in &trace {
            text.push_str(&format!("{x:e},{:e},{:e}\n", v.re, v.im));
        }
        std::fs::write(path, text)?;
    }
    let status = report.status;
    io.emit(&report, || sum_csv_rows(std::slice::from_ref(&report)))?;
    Ok(if status == Status::Inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK })
}

fn cmd_compare(io: &mut Io, items: &[String], cfg: &EngineConfig) -> Result<i32> {
    let (func, labels) = items.split_last().expect("clap requires three items");
    let methods: Vec<MethodDescriptor> = labels.iter().map(|l| parse_method(l)).collect::<Result<_>>()?;
    let flavor = methods[0].flavor();
    if let Some(m) = methods.iter().find(|m| m.flavor() != flavor) {
        return Err(Error::Parse(format!("{} and {} differ in flavor", methods[0].label(), m.label())));
    }
    let f = resolve_function(func, flavor)?;
    let rows: Vec<SumReport> = methods
        .iter()
        .map(|m| summarize(m, &f, cfg).map(|(r, _)| r))
        .collect::<Result<_>>()?;
    let tolerance = 2.0 * cfg.tol_limit_for(&f);
    let converged: Vec<Complex64> = rows
        .iter()
        .filter(|r| r.status == Status::Converged)
        .filter_map(|r| r.estimate.map(|[a, b]| Complex64::new(a, b)))
        .collect();
    let all_converged = converged.len() == rows.len();
    let max_delta = all_converged.then(|| {
        let mut d: f64 = 0.0;
        for (i, a) in converged.iter().enumerate() {
            for b in &converged[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    });
    let same_status = rows.iter().all(|r| r.status == rows[0].status);
    let agree = same_status && max_delta.is_none_or(|d| d < tolerance);
    let inconclusive = rows.iter().any(|r| r.status == Status::Inconclusive);
    let report = CompareReport {
        function: f.label().to_string(),
        methods: rows,
        max_delta,
        tolerance,
        agree,
    };
    io.emit(&report, || sum_csv_rows(&report.methods))?;
    Ok(if inconclusive {
        EXIT_INCONCLUSIVE
    } else if agree {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn cmd_spectrum(io: &mut Io, kernel: &str, xi_max: f64, out: Option<&Path>) -> Result<i32> {
    let k = parse_kernel_arg(kernel)?;
    let opts = SpectrumOptions { xi_max, ..SpectrumOptions::default() };
    let profile: SpectrumProfile = classify_wiener(&k, &opts)?;
    let text = match io.format {
        OutputFormat::Json => serde_json::to_string_pretty(&profile)? + "\n",
        OutputFormat::Csv => profile.to_csv(),
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io.out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn finish_matrix(io: &mut Io, report: &VerificationReport) -> Result<i32> {
    io.emit(report, || report_csv(report))?;
    for c in report.failures() {
        writeln!(io.err, "FAIL {}: {}", c.id, c.detail)?;
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_verify(io: &mut Io, cases: Option<&Path>, only: &[String], cfg: &EngineConfig, jobs: usize) -> Result<i32> {
    let mut list = match cases {
        Some(path) => corpus::parse_cases(&std::fs::read_to_string(path)?)?,
        None => builtin_cases(),
    };
    if !only.is_empty() {
        if let Some(missing) = only.iter().find(|id| !list.iter().any(|c| &c.id == *id)) {
            return Err(Error::Config(format!("unknown case id `{missing}`")));
        }
        list.retain(|c| only.contains(&c.id));
    }
    let report = run_matrix(&list, &builtin_corpus(), cfg, jobs)?;
    finish_matrix(io, &report)
}

/// The counterexample separation and a forward/dual pair.
pub fn demo_cases() -> Vec<VerificationCase> {
    let mut cases: Vec<VerificationCase> = builtin_cases().into_iter().filter(|c| c.id == "wiener_additive").collect();
    cases.push(VerificationCase {
        id: "forward_dual_pair".into(),
        function: "sin@mul".into(),
        methods: vec!["M".into(), "M*_1".into(), "M_2".into(), "M*_2".into()],
        expected: Expected::AllAgree { value: Complex64::new(0.0, 0.0) },
        claim: "r x^{-r}∫_1^x f t^{r-1} dt and r x^r ∫_x^∞ f t^{-r-1} dt agree".into(),
        tolerance: None,
    });
    cases
}

fn cmd_demo(io: &mut Io, cfg: &EngineConfig, jobs: usize) -> Result<i32> {
    let report = run_matrix(&demo_cases(), &builtin_corpus(), cfg, jobs)?;
    finish_matrix(io, &report)
}

fn dispatch(cli: &Cli, io: &mut Io) -> Result<i32> {
    let cfg = engine_config(&cli.global)?;
    let jobs = cli.global.jobs.max(1);
    match &cli.command {
        Command::Classify { kernel, xi_max } => cmd_classify(io, kernel, *xi_max),
        Command::Sum(args) => cmd_sum(io, args, &cfg),
        Command::Compare { items } => cmd_compare(io, items, &cfg),
        Command::Spectrum { kernel, xi_max, out } => cmd_spectrum(io, kernel, *xi_max, out.as_deref()),
        Command::Verify { cases, only } => cmd_verify(io, cases.as_deref(), only, &cfg, jobs),
        Command::Demo => cmd_demo(io, &cfg, jobs),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let format = cli.global.output;
    let mut io = Io { out, err, format };
    match dispatch(&cli, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            EXIT_USAGE
        }
    }
}
