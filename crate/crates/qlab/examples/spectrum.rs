//! Joint spectrum of H, T_Box and the Q-operators with three independent energy evaluations.

use qlab::spectral::{energy_from_roots, energy_from_tbox, joint_diagonalize, Family, HassePath};
use qlab::transfer::TwistConfig;

fn main() -> qlab::Result<()> {
    let tw = TwistConfig::generic(2);
    let len = 4;
    let fam = Family::build(&tw, len)?;
    let data = joint_diagonalize(&fam, 1)?;
    let top = HassePath::identity(2).level_set(1);
    println!("{:<8} {:>22} {:>10} {:>10}", "sector", "E_direct", "|dE_roots|", "|dE_TBox|");
    for st in &data.states {
        let e_r = energy_from_roots(&st.q_roots(&top)?)?;
        let e_t = energy_from_tbox(&st.t_poly, fam.t_box.phase, len)?;
        println!(
            "{:<8} {:>22.12} {:>10.1e} {:>10.1e}",
            format!("{:?}", st.sector),
            st.energy_direct.re,
            (e_r - st.energy_direct).norm(),
            (e_t - st.energy_direct).norm()
        );
    }
    Ok(())
}
