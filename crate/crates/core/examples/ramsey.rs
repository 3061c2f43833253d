//! Recovering R(3,3) = 6 by exhaustive search over edge colorings.

use situskit::ramsey::{coloring_quotient, edges, ramsey_sweep, Coloring};
use situskit::simplex::set_corepresented;
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    for atoms in [5, 6] {
        let r = ramsey_sweep(atoms, 2, 3, &g)?;
        println!("{atoms} atoms: every coloring has a triangle = {} ({} colorings)", r.always_homogeneous, r.colorings_checked);
        if let Some(c) = r.counterexample {
            println!("  counterexample: {:?}", edges(atoms).into_iter().zip(c).collect::<Vec<_>>());
        }
    }
    let x = set_corepresented((0..3).map(situskit::fostruct::default_name).collect(), 3)?;
    let q = coloring_quotient(&x, &Coloring::constant(&x, 2)?)?;
    println!("constant coloring quotient sizes: {:?}", q.class_counts());
    Ok(())
}
