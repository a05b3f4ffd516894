//! RLL relation for evaluation, partonic and canonical Lax operators.

use num_complex::Complex64 as C64;
use qlab::fusion::verma_canonical;
use qlab::glrep::{fundamental_rep, verma_rep};
use qlab::lax::{eval_lax, partonic_lax, rll_residual, rll_residual_exact, IndexSet};
use qlab::oscillator::{FockTruncation, ModeRegistry};

fn main() -> qlab::Result<()> {
    let (z1, z2) = (C64::new(0.4, -0.2), C64::new(-1.1, 0.3));
    let trunc = FockTruncation::new(8, 4)?;
    println!("fundamental  {:.2e}", rll_residual_exact(&eval_lax(&fundamental_rep(3)), z1, z2));
    let verma = verma_rep(&[C64::new(0.5, 0.1), C64::new(-0.2, 0.0)], &mut ModeRegistry::new())?;
    println!("Verma gl(2)  {:.2e}", rll_residual(&eval_lax(&verma), z1, z2, trunc));
    for a in 1..=3 {
        let l = partonic_lax(3, a, &mut ModeRegistry::new())?;
        println!("parton a={a}   {:.2e}", rll_residual(&l, z1, z2, trunc));
    }
    let set = IndexSet::new(3, &[1, 3])?;
    let l = verma_canonical(set.clone(), &[C64::new(0.3, 0.0), C64::new(-0.6, 0.2)], &mut ModeRegistry::new(), "")?.lax();
    println!("canonical I={set} {:.2e}", rll_residual(&l, z1, z2, trunc));
    Ok(())
}
