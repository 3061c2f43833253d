//! The tree-property experiment on a structure built to have a (2,2) tree.

use situskit::dividing_lines::{tree_property, tree_property_oracle};
use situskit::fostruct::{FinStructure, Formula};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    // R(x,y): x solves y; leaves 0..3, level-one parameters 4 and 5, root parameter 6
    let solutions: [&[u32]; 7] = [&[0], &[1], &[2], &[3], &[0, 1], &[2, 3], &[0, 1, 2, 3]];
    let mut m = FinStructure::with_size(7);
    let tuples: Vec<Vec<u32>> = solutions.iter().enumerate().flat_map(|(y, xs)| xs.iter().map(move |&x| vec![x, y as u32])).collect();
    m.add_relation("R", 2, &tuples)?;
    let phi = Formula::binary("R");
    let (ntp, witness) = tree_property_oracle(&m, &phi, 2, 2, 2, &g)?;
    println!("oracle says NTP: {ntp}");
    println!("{}", serde_json::to_string(&witness).expect("json"));

    let cycle = {
        let mut c = FinStructure::with_size(3);
        c.add_relation("R", 2, &[vec![0, 1], vec![1, 2], vec![2, 0]])?;
        c
    };
    let v = tree_property(&cycle, &phi, 2, 2, 2, &g)?;
    println!("3-cycle: lifting {} oracle {}", v.holds, v.oracle_holds);
    Ok(())
}
