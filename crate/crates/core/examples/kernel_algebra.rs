//! Building kernels, convolving them and checking the transform identities.
//!
//! ```bash
//! cargo run --example kernel_algebra
//! ```

use summability::spectrum::{fourier_transform, mellin_transform};
use summability::{Kernel, Result};

fn main() -> Result<()> {
    let a = Kernel::exponential(1.0)?;
    let b = Kernel::exponential(3.0)?;
    let ab = a.convolve(&b)?;
    println!("{}", ab.describe());
    println!("mass of a*b = {:.12}", ab.mass().re);

    for xi in [0.0, 0.5, 2.0, 10.0] {
        let lhs = fourier_transform(&ab, xi)?;
        let rhs = fourier_transform(&a, xi)? * fourier_transform(&b, xi)?;
        println!("xi = {xi:>4}: |(a*b)^ - a^ b^| = {:.1e}", (lhs - rhs).norm());
    }

    // Powers of the Cesàro kernel x^{-1} on [1, ∞) under dt/t.
    let cesaro = Kernel::power_law(1.0)?;
    let h3 = cesaro.power(3)?;
    println!("{}", h3.describe());
    for x in [0.0, 1.0, 5.0] {
        let got = mellin_transform(&h3, x)?;
        let want = mellin_transform(&cesaro, x)?.powu(3);
        println!("x = {x}: transform {got:.6}, cube of the base {want:.6}");
    }

    let additive = cesaro.to_additive()?;
    println!("in the additive coordinate: {}", additive.describe());
    Ok(())
}
