//! Corepresented situses: levels, faces, the shift and quotients.

use situskit::simplex::{corepresented_by_preorder, quotient, shift_nat, FinPreorder, LevelEquivalence};

fn main() -> situskit::Result<()> {
    let chain = FinPreorder::chain(3);
    let x = corepresented_by_preorder(&chain, 3, None)?;
    for n in 1..=3 {
        println!("level {n}: {} monotone tuples", x.size(n));
    }
    let t = x.index_of(3, &[0, 1, 2]).expect("monotone tuple");
    println!("face [1,3] of (0,1,2) is {}", x.show(2, x.face(3, &[1, 3])[t]));
    println!("identities and continuity hold: {}", x.validate().is_empty());

    let (shifted, truncated, last) = shift_nat(&x)?;
    println!("shifted depth {}, truncated depth {}, natural map valid: {}", shifted.depth(), truncated.depth(), last.is_valid(&shifted, &truncated));

    // glue vertices 1 and 2 coordinatewise
    let e = LevelEquivalence::by_key(&x, |n, i| x.simplices(n)[i].iter().map(|&v| v.min(1)).collect::<Vec<_>>());
    match quotient(&x, &e) {
        Ok((q, _)) => println!("quotient sizes: {:?}", (1..=3).map(|n| q.size(n)).collect::<Vec<_>>()),
        Err(err) => println!("not face compatible: {err}"),
    }
    Ok(())
}
