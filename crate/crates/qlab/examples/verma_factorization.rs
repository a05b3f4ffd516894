//! Factorizes the full Verma Lax operator into partons along two independent routes.

use num_complex::Complex64 as C64;
use qlab::fusion::{factorize_by_fusion, factorize_triangular};
use qlab::oscillator::{FockTruncation, ModeRegistry};

fn main() -> qlab::Result<()> {
    let weight = [C64::new(0.9, 0.1), C64::new(-0.2, 0.3), C64::new(0.1, -0.25)];
    let zs = [C64::new(0.2, 0.0), C64::new(-0.7, 0.5)];
    let trunc = FockTruncation::new(8, 4)?;
    let tri = factorize_triangular(&weight, &mut ModeRegistry::new())?;
    let fus = factorize_by_fusion(&weight, &[1, 2, 3], &mut ModeRegistry::new())?;
    println!("triangular route      {:.2e}", tri.residual(&zs, trunc)?);
    println!("iterated fusion route {:.2e}", fus.residual(&zs, trunc)?);
    println!("routes agree to       {:.2e}", tri.compare(&fus, &zs, trunc)?);
    Ok(())
}
