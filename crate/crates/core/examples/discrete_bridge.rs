//! Cesàro means of sequences against `M` applied to their step-function
//! embedding.
//!
//! ```bash
//! cargo run --example discrete_bridge
//! ```

use num_complex::Complex64;
use summability::corpus::discrete_bridge;
use summability::engine::{EngineConfig, Sequence};
use summability::Result;

fn main() -> Result<()> {
    let cfg = EngineConfig::default();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let sequences = [
        ("(-1)^n", Sequence::alternating()),
        ("1,1,0,0,...", Sequence::Periodic(vec![one, one, zero, zero])),
        ("5,4,3 then 1", Sequence::EventuallyConstant { prefix: vec![one * 5.0, one * 4.0, one * 3.0], tail: one }),
    ];
    for (name, seq) in &sequences {
        println!("{name}");
        for p in discrete_bridge(seq, &[4, 8, 12, 16, 20], &cfg)? {
            println!(
                "  n = {:>8}  discrete {:>10.7}  continuous {:>10.7}  gap {:.1e}",
                p.n,
                p.discrete.re,
                p.continuous.re,
                (p.continuous - p.discrete).norm()
            );
        }
    }
    Ok(())
}
