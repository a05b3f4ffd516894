//! Exact monomial traces against damped truncated sums with extrapolation in the damping.

use qlab::cli::trace_method_gap;
use qlab::transfer::DEFAULT_ETA_SCHEDULE;

fn main() -> qlab::Result<()> {
    for seed in 1..=3 {
        println!("seed {seed}: worst gap over 50 monomials {:.2e}", trace_method_gap(seed, 50, &DEFAULT_ETA_SCHEDULE)?);
    }
    let short = &DEFAULT_ETA_SCHEDULE[..3];
    println!("three damping values only: {:.2e}", trace_method_gap(1, 50, short)?);
    Ok(())
}
