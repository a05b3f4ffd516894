//! Finite-dimensional transfer matrix against the alternating sum of Verma transfer matrices.

use num_complex::Complex64 as C64;
use qlab::transfer::{bgg_eigen_check, TwistConfig, DEFAULT_ETA_SCHEDULE};

fn main() -> qlab::Result<()> {
    let tw = TwistConfig::generic(2);
    let zs = [C64::new(0.3, 0.2), C64::new(-0.6, 0.1)];
    for len in 1..=2 {
        let r = bgg_eigen_check(&[1, 0], &tw, len, &zs, &DEFAULT_ETA_SCHEDULE)?;
        println!(
            "L={len}: damped eigenvalues {:.1e}, damped operator {:.1e}, analytic continuation {:.1e}",
            r.eigen_residual, r.operator_residual, r.exact_residual
        );
    }
    Ok(())
}
