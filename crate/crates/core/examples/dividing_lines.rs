//! Oracle and lifting verdicts for stability, NIP, the order property and non-dividing.

use situskit::dividing_lines::{nip, non_dividing, op, stability, OrderConfig, SequenceConfig};
use situskit::fostruct::{equivalence_structure, FinStructure, Formula};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    let chain = FinStructure::chain(4);
    let cfg = SequenceConfig { chain: 5, distinct: 3, ..SequenceConfig::for_structure(&chain) };
    let v = stability(&chain, &[Formula::parse("x <= y")?], &cfg, &g)?;
    println!("chain stability: lifting {} oracle {}", v.holds, v.oracle_holds);

    let e = equivalence_structure(&[2, 1]);
    let v = nip(&e, &SequenceConfig::for_structure(&e), &g)?;
    println!("equivalence nip: lifting {} oracle {}", v.holds, v.oracle_holds);

    let v = op(&chain, &OrderConfig::for_structure(&chain, 2), &g)?;
    println!("chain order property at k=2: no-op lifting {} oracle {}", v.holds, v.oracle_holds);
    println!("{}", serde_json::to_string_pretty(&v.oracle_witness).expect("json"));

    // x = b divides over the empty set in pure equality, but not over {b}
    let pure = FinStructure::with_size(3);
    println!("tp(b/b) over {{}} does not divide: {}", non_dividing(&pure, &[], 1, 1, 2, &g)?.holds);
    println!("tp(b/b) over {{b}} does not divide: {}", non_dividing(&pure, &[1], 1, 1, 2, &g)?.holds);
    Ok(())
}
