//! Transfer matrix and composite Q-operators as determinants of single-index Q-operators.

use num_complex::Complex64 as C64;
use qlab::lax::IndexSet;
use qlab::relations::{qasdet_residual, xasdet_residual};
use qlab::transfer::{build_q_family, TwistConfig};

fn main() -> qlab::Result<()> {
    let tw = TwistConfig::generic(3);
    let len = 2;
    let zs = [C64::new(0.1, 0.3), C64::new(-0.9, 0.0), C64::new(0.6, -0.4), C64::new(1.2, 0.2)];
    let qs = build_q_family(&tw, len)?;
    println!("T_Box as a 3x3 determinant: {:.2e}", xasdet_residual(&qs, &IndexSet::full(3), &tw, len, &zs)?);
    for s in IndexSet::all_subsets(3).into_iter().filter(|s| s.len() >= 2) {
        println!("Q_{s} as a determinant: {:.2e}", qasdet_residual(&qs, &s, &tw, &zs)?);
    }
    Ok(())
}
