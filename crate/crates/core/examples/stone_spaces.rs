//! Generalized Stone spaces of a structure and their orbit quotient.

use situskit::fostruct::{FinStructure, Formula};
use situskit::indisc::Sigma;
use situskit::stone::{stone_quotient, stone_space, StoneVariant};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    let m = FinStructure::chain(3);
    let sigma = Sigma::from_formulas(&m, &[Formula::parse("x <= y")?])?;
    for v in [StoneVariant::Extendable, StoneVariant::Plain, StoneVariant::Consecutive] {
        let x = stone_space(&m, &sigma, v, 3, 3, &g)?;
        let core = x.filter(3).core().map_or(0, |c| c.count_ones(..));
        println!("{v}: {core} of {} triples in the least neighbourhood, valid {}", x.size(3), x.validate().is_empty());
    }
    let x = stone_space(&m, &sigma, StoneVariant::Extendable, 2, 3, &g)?;
    let (q, map) = stone_quotient(&x, &m, &[], &g)?;
    println!("orbit quotient sizes {:?}, projection continuous {}", (1..=3).map(|n| q.size(n)).collect::<Vec<_>>(), map.is_continuous(&x, &q));
    Ok(())
}
