//! Writes the transform of a kernel on `[-Ξ, Ξ]` as CSV.
//!
//! ```bash
//! cargo run --example spectrum_export -- spectrum.csv
//! ```
//!
//! Without an argument the CSV goes to stdout.

use summability::kernel::spec_file::KernelSpec;
use summability::spectrum::{classify_wiener, SpectrumOptions};
use summability::Result;

const SPEC: &str = r#"{
    "flavor": "additive",
    "body": {"catalog": "counterexample_additive", "params": {"alpha": 2.0}}
}"#;

fn main() -> Result<()> {
    let kernel = KernelSpec::from_json(SPEC)?.build()?;
    let opts = SpectrumOptions { xi_max: 5.0, initial_points: 101, ..SpectrumOptions::default() };
    let profile = classify_wiener(&kernel, &opts)?;
    let csv = profile.to_csv();
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, csv)?;
            eprintln!("{} rows written to {path}; verdict {:?}", profile.frequencies.len(), profile.verdict);
        }
        None => print!("{csv}"),
    }
    Ok(())
}
