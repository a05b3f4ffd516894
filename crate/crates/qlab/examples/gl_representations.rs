//! Fundamental and oscillator (Verma) representations of gl(n) and their commutation relations.

use num_complex::Complex64 as C64;
use qlab::glrep::{fundamental_rep, gl_relation_residual, rho, shift_weight, verma_rep};
use qlab::oscillator::ModeRegistry;

fn main() -> qlab::Result<()> {
    let fund = fundamental_rep(3);
    println!("fundamental gl(3): carrier dim {}, relation residual {:.1e}", fund.d, gl_relation_residual(&fund));

    let weight = [C64::new(0.8, 0.2), C64::new(-0.3, 0.0), C64::new(0.15, -0.1)];
    let mut reg = ModeRegistry::new();
    let verma = verma_rep(&weight, &mut reg)?;
    println!("Verma gl(3) on {} oscillator modes, relation residual {:.1e}", verma.modes.len(), gl_relation_residual(&verma));
    let show = |v: &[C64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    println!("rho = [{}]", show(&rho(3)));
    println!("shifted weight = [{}]", show(&shift_weight(&weight)));
    Ok(())
}
