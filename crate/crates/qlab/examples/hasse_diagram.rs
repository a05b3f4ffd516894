//! Nodes, quadrilaterals and maximal chains of the subset lattice.

use qlab::relations::enumerate_hasse;

fn main() -> qlab::Result<()> {
    for n in 2..=4 {
        let h = enumerate_hasse(n)?;
        println!("n={n}: {} nodes, {} edges, {} quadrilaterals, {} chains", h.nodes.len(), h.edges.len(), h.quadrilaterals.len(), h.chains.len());
    }
    let h = enumerate_hasse(3)?;
    for p in &h.chains {
        println!("  chain {:?}", p.0);
    }
    Ok(())
}
