//! Indiscernible sequences of each kind and extendability to more distinct values.

use situskit::fostruct::{FinStructure, Formula};
use situskit::indisc::{is_extendable, is_indiscernible, IndiscKind};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let chain = FinStructure::chain(4);
    let phi = Formula::parse("x <= y")?;
    for seq in [vec![0, 1, 2], vec![2, 1, 0], vec![0, 2, 1], vec![0, 0, 1, 1]] {
        let kinds: Vec<&str> = IndiscKind::ALL
            .into_iter()
            .filter(|&k| is_indiscernible(&chain, &phi, &seq, k).unwrap_or(false))
            .map(|k| k.name())
            .collect();
        println!("{seq:?}: {kinds:?}");
    }
    let g = Guard::default();
    let ok = is_extendable(&chain, &[phi], &[0, 1], 4, IndiscKind::Sequence, &g)?;
    println!("(1,2) extends to 4 distinct increasing values: {ok}");
    Ok(())
}
