//! Iterated Cesàro means `H_k` and the single-kernel `M_r` family on `cos t`.
//!
//! ```bash
//! cargo run --example holder_iterates
//! ```

use summability::corpus::{builtin_corpus, find_function};
use summability::engine::{apply_method, estimate_limit_with, parse_method, EngineConfig};
use summability::Result;

fn main() -> Result<()> {
    let corpus = builtin_corpus();
    let cfg = EngineConfig::default();
    let f = find_function(&corpus, "cos@mul")?;
    let labels = ["H_1", "H_2", "H_3", "M_1/2", "M_2"];

    print!("{:>8}", "x");
    for l in labels {
        print!("{l:>14}");
    }
    println!();
    for x in [10.0, 100.0, 1000.0, 10000.0] {
        print!("{x:>8}");
        for l in labels {
            let v = apply_method(&parse_method(l)?, f, x, &cfg)?;
            print!("{:>14.6}", v.re);
        }
        println!();
    }

    for l in labels {
        let r = estimate_limit_with(&parse_method(l)?, f, &cfg)?;
        println!("{l:<6} {} after {} evaluations", r.status, r.evaluations);
    }
    Ok(())
}
