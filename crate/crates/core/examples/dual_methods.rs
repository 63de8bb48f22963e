//! Forward and dual `M_r` on the same functions.
//!
//! ```bash
//! cargo run --example dual_methods
//! ```

use summability::corpus::{builtin_corpus, find_function};
use summability::engine::{estimate_limit_with, parse_method, EngineConfig};
use summability::Result;

fn main() -> Result<()> {
    let corpus = builtin_corpus();
    let cfg = EngineConfig::default();
    for label in ["const_-2@mul", "sin@mul", "decay_1/2@mul"] {
        let f = find_function(&corpus, label)?;
        println!("{label}");
        for (fwd, dual) in [("M_1/2", "M*_1/2"), ("M", "M*_1"), ("M_2", "M*_2")] {
            let a = estimate_limit_with(&parse_method(fwd)?, f, &cfg)?;
            let b = estimate_limit_with(&parse_method(dual)?, f, &cfg)?;
            match (a.estimate, b.estimate) {
                (Some(x), Some(y)) => {
                    println!("  {fwd:<6} {:>10.6}   {dual:<7} {:>10.6}   |diff| {:.1e}", x.re, y.re, (x - y).norm())
                }
                _ => println!("  {fwd:<6} {}   {dual:<7} {}", a.status, b.status),
            }
        }
    }
    Ok(())
}
