//! Hom-sets, lifting properties and surjections between order objects.

use situskit::homlift::{exists_surjection, hom_set, lifting_property, Arrow, LiftingInstance};
use situskit::simplex::{corepresented_by_preorder, set_corepresented, terminal, FinPreorder, Morphism};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    let c2 = corepresented_by_preorder(&FinPreorder::chain(2), 3, None)?;
    let c3 = corepresented_by_preorder(&FinPreorder::chain(3), 3, None)?;
    println!("monotone maps 2 -> 2: {}", hom_set(&c2, &c2, &g)?.len());
    println!("monotone maps 2 -> 3: {}", hom_set(&c2, &c3, &g)?.len());
    println!("surjection 3 -> 2: {}", exists_surjection(&c3, &c2, &g)?.is_some());

    // the ordered pair into the unordered pair, against a set mapping to the point
    let set2 = set_corepresented(c2.labels().to_vec(), 3)?;
    let i = Arrow::new(&c2, &set2, Morphism::from_vertex_map(&c2, &set2, &[0, 1])?)?;
    let t = terminal(3);
    let p = Arrow::to_terminal(&c3, &t)?;
    let out = lifting_property(&LiftingInstance { i, p }, &g)?;
    println!("lifts: {} after {} squares", out.holds, out.squares);
    Ok(())
}
