//! Fuses two canonical Lax operators with disjoint index sets into one for their union.

use num_complex::Complex64 as C64;
use qlab::fusion::{fuse, verma_canonical};
use qlab::glrep::gl_relation_residual;
use qlab::lax::IndexSet;
use qlab::oscillator::{FockTruncation, ModeRegistry};

fn main() -> qlab::Result<()> {
    let mut reg = ModeRegistry::new();
    let i = IndexSet::new(3, &[1])?;
    let j = IndexSet::new(3, &[2, 3])?;
    let left = verma_canonical(i, &[C64::new(0.4, 0.1)], &mut reg, "1:")?;
    let right = verma_canonical(j, &[C64::new(-0.3, 0.0), C64::new(0.7, -0.2)], &mut reg, "2:")?;
    let fr = fuse(&left, &right, C64::new(0.25, 0.05))?;
    let zs = [C64::new(0.3, 0.1), C64::new(-0.8, 0.4)];
    println!("fused set {}", fr.fused.set);
    println!("L_I(z+s1) L_J(z+s2) vs S (L_fused G) S^-1: {:.2e}", fr.residual(&zs, reg.len(), FockTruncation::new(8, 4)?)?);
    println!("fused generators, gl(3) relations: {:.2e}", gl_relation_residual(&fr.fused.rep));
    println!("entries of G commute: {:.2e}", fr.g_commutator_norm());
    Ok(())
}
