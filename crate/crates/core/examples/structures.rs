//! Finite structures from text, formula evaluation, automorphisms and orbits.

use situskit::cli::parse_structure;
use situskit::fostruct::{automorphisms, eval, type_orbits, Formula};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/equiv4.struct")).expect("sample file");
    let m = parse_structure(&text)?;
    let g = Guard::default();
    let phi = Formula::parse("exists z. (E(x,z) & ~(z = x))")?;
    for a in 0..m.size() as u32 {
        println!("{} has a class mate: {}", m.name(a), eval(&m, &phi, &[a])?);
    }
    println!("automorphisms: {}", automorphisms(&m, &g)?.len());
    let orbits = type_orbits(&m, &[], 2, &g)?;
    println!("orbits on pairs: {}", orbits.iter().max().map_or(0, |o| o + 1));
    Ok(())
}
