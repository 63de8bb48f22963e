//! A kernel whose transform vanishes at 1 sums `e^{it}` to 0, while a Wiener
//! kernel leaves it oscillating.
//!
//! ```bash
//! cargo run --example wiener_separation
//! ```

use summability::corpus::{builtin_cases, builtin_corpus, run_matrix};
use summability::engine::{apply_method, estimate_limit_with, parse_method, EngineConfig};
use summability::Result;

fn main() -> Result<()> {
    let corpus = builtin_corpus();
    let cfg = EngineConfig::default();
    let f = summability::corpus::find_function(&corpus, "char_1@add")?;

    for label in ["S_cex_1", "K"] {
        let m = parse_method(label)?;
        print!("{label:<8}");
        for x in [1.0, 4.0, 16.0, 64.0] {
            let v = apply_method(&m, f, x, &cfg)?;
            print!("  x={x:<3} {:>9.2e}", v.norm());
        }
        let r = estimate_limit_with(&m, f, &cfg)?;
        println!("  -> {}", r.status);
    }

    let cases: Vec<_> = builtin_cases().into_iter().filter(|c| c.id.starts_with("wiener")).collect();
    let report = run_matrix(&cases, &corpus, &cfg, 2)?;
    for case in &report.cases {
        println!("{}: {}", case.id, if case.passed { "separated" } else { "not separated" });
    }
    Ok(())
}
