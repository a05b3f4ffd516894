//! Bethe roots read off the Q-operators along every Hasse chain, with equation residuals and Newton polish.

use qlab::spectral::{all_paths, bethe_from_state, joint_diagonalize, solve_bethe_newton, Family};
use qlab::transfer::TwistConfig;

fn main() -> qlab::Result<()> {
    let tw = TwistConfig::generic(3);
    let len = 3;
    let data = joint_diagonalize(&Family::build(&tw, len)?, 1)?;
    let st = data.states.iter().find(|s| s.sector == [1, 1, 1]).expect("sector (1,1,1) exists");
    println!("state {} in sector {:?}, E = {:.10}", st.index, st.sector, st.energy_direct.re);
    for path in all_paths(3) {
        let sol = bethe_from_state(st, &path, &tw, len)?;
        let (_, iters) = solve_bethe_newton(&path, &tw, len, &sol, 20)?;
        println!("path {:?}: roots {:?}", path.0, sol.roots.iter().map(|l| l.len()).collect::<Vec<_>>());
        println!("  max residual {:.1e}, energy {:.10}, Newton iterations {iters}", sol.max_residual(), sol.energy.re);
    }
    Ok(())
}
