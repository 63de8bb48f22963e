//! Cesàro means of bounded functions and the limit monitor's verdicts.
//!
//! ```bash
//! cargo run --example cesaro_means
//! ```

use summability::corpus::{builtin_corpus, find_function};
use summability::engine::{estimate_limit_with, parse_method, EngineConfig};
use summability::Result;

fn main() -> Result<()> {
    let corpus = builtin_corpus();
    let cfg = EngineConfig::default();
    let m = parse_method("M")?;
    for label in ["const_1@mul", "decay_1/2@mul", "sin@mul", "alternating@mul", "char_1@mul"] {
        let f = find_function(&corpus, label)?;
        let r = estimate_limit_with(&m, f, &cfg)?;
        let estimate = r.estimate.map_or("-".to_string(), |v| format!("{:.6}{:+.6}i", v.re, v.im));
        println!(
            "{label:<16} {:<12} estimate {estimate:<24} amplitude {:.3} ({} rungs)",
            r.status.to_string(),
            r.oscillation_amplitude,
            r.trace.len()
        );
    }
    Ok(())
}
