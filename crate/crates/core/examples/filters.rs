//! Filters on a finite carrier: neighbourhoods, continuity, coarsest and finest filters.

use situskit::filters::{coarsest_filter, finest_filter, is_continuous, subset, Filter, SetMap};

fn main() -> situskit::Result<()> {
    // base {0,1} and {1,2}: the least neighbourhood is {1}
    let f = Filter::from_base(3, &[subset(3, [0, 1]), subset(3, [1, 2])])?;
    println!("core of f: {:?}", f.core().map(|c| c.ones().collect::<Vec<_>>()));
    println!("{{1}} is a neighbourhood: {}", f.is_neighborhood(&subset(3, [1]))?);

    let swap = SetMap::new(3, 3, vec![2, 1, 0])?;
    println!("swap continuous f -> f: {}", is_continuous(&swap, &f, &f)?);
    println!("swap continuous discrete -> f: {}", is_continuous(&swap, &Filter::discrete(3), &f)?);

    let collapse = SetMap::new(3, 2, vec![0, 0, 1])?;
    let pushed = finest_filter(&collapse, &f)?;
    println!("finest filter on the image: {:?}", pushed.core().map(|c| c.ones().collect::<Vec<_>>()));
    let pulled = coarsest_filter(3, &[(collapse, pushed)])?;
    println!("pulled back again: {:?}", pulled.core().map(|c| c.ones().collect::<Vec<_>>()));
    Ok(())
}
