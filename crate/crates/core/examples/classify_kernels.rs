//! Sorting kernels into Wiener kernels and kernels whose transform vanishes.
//!
//! ```bash
//! cargo run --example classify_kernels
//! ```

use summability::spectrum::{classify_wiener, SpectrumOptions, Verdict};
use summability::{Kernel, Result};

fn main() -> Result<()> {
    let kernels = [
        ("exponential(1)", Kernel::exponential(1.0)?),
        ("power_law(1/2)", Kernel::power_law(0.5)?),
        ("counterexample_additive(1)", Kernel::counterexample_additive(1.0)?),
        ("counterexample_additive(7/2)", Kernel::counterexample_additive(3.5)?),
        ("counterexample_multiplicative(2)", Kernel::counterexample_multiplicative(2.0)?),
    ];
    let opts = SpectrumOptions::default();
    for (name, k) in &kernels {
        let profile = classify_wiener(k, &opts)?;
        let verdict = match profile.verdict {
            Verdict::NonvanishingOnWindow { margin } => format!("nonvanishing, |transform| >= {margin:.3e}"),
            Verdict::ZeroFound { xi, modulus } => format!("zero at {xi:.9} (|transform| = {modulus:.1e})"),
            Verdict::Inconclusive => "inconclusive".to_string(),
        };
        println!("{name:<34} {verdict}");
        if let Some(why) = &profile.analytic {
            println!("{:<34} {why}", "");
        }
    }
    Ok(())
}
