//! Checks the bilinear QQ relation on every quadrilateral of the Hasse diagram.

use num_complex::Complex64 as C64;
use qlab::relations::{enumerate_hasse, hirota_residual};
use qlab::transfer::{build_q_family, TwistConfig};

fn main() -> qlab::Result<()> {
    let tw = TwistConfig::generic(3);
    let len = 3;
    let zs: Vec<C64> = (0..len + 2).map(|k| C64::new(0.3 * k as f64 - 0.5, 0.2)).collect();
    let qs = build_q_family(&tw, len)?;
    for (s, a, b) in &enumerate_hasse(3)?.quadrilaterals {
        println!("I={s} a={a} b={b}: {:.2e}", hirota_residual(&qs, s, *a, *b, &tw, &zs)?);
    }
    Ok(())
}
