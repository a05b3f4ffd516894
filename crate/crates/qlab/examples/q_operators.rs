//! Builds all Q-operators of a short twisted chain and prints their eigenvalue polynomials' degrees.

use num_complex::Complex64 as C64;
use qlab::transfer::{build_q_family, build_t_box, sector_violation, TwistConfig};

fn main() -> qlab::Result<()> {
    let tw = TwistConfig::generic(3);
    let len = 2;
    let qs = build_q_family(&tw, len)?;
    for (set, q) in &qs {
        println!("Q_{set}: degree {}, dim {}, off-sector weight {:.1e}", q.degree(), q.dim(), sector_violation(&q.eval(C64::new(0.3, 0.1)), 3, len));
    }
    let t = build_t_box(&tw, len)?;
    println!("T_Box: degree {}", t.degree());
    Ok(())
}
