//! Normal ordering of oscillator words and their twisted normalized traces.

use num_complex::Complex64 as C64;
use qlab::oscillator::{extrapolated_trace, cutoff_for, normalized_trace, FockTruncation, NormalOrderedOp, TwistWeights};
use qlab::transfer::DEFAULT_ETA_SCHEDULE;

fn main() -> qlab::Result<()> {
    let b = NormalOrderedOp::ann(0);
    let bd = NormalOrderedOp::cre(0);
    let word = b.mul(&b).mul(&bd).mul(&bd);
    println!("b b b† b† normal ordered has {} terms:", word.len());
    for (m, v) in word.terms() {
        println!("  {m:?} -> {v}");
    }

    let mut q = TwistWeights::new();
    q.insert(0, C64::from_polar(1.0, 1.3), "b");
    let exact = normalized_trace(&word, &q)?;
    let trunc = FockTruncation::new(cutoff_for(&q, 0.00625), 1)?;
    let damped = extrapolated_trace(&word, &q, trunc, &DEFAULT_ETA_SCHEDULE)?;
    println!("normalized trace: exact {exact:.12}, damped + extrapolated {damped:.12}");
    println!("gap {:.2e}", (exact - damped).norm());
    Ok(())
}
