//! Metric and covering situses, uniform maps, completeness and compactness.

use situskit::cli::{parse_metric, parse_topology};
use situskit::filters::SetMap;
use situskit::geometry::{compactness_lp, covering_situs, is_complete_lp, is_morphism_uniform, metric_situs, uniformity_axioms};
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    let m = parse_metric("points p q r\ndist p q 1\ndist q r 1/2\ndist p r 3/2\n")?;
    let x = metric_situs(&m, 3, &g)?;
    println!("entourage axioms: {}", uniformity_axioms(m.len(), x.filter(2))?.holds());
    let fold = SetMap::new(3, 3, vec![0, 1, 1])?;
    println!("folding r onto q is uniform: {}", is_morphism_uniform(&fold, &m, &m, 3, &g)?);
    let v = is_complete_lp(&m, 5, 1, 2, &g)?;
    println!("complete: lifting {} oracle {}", v.holds, v.oracle_holds);

    let t = parse_topology("points o c\nopen o\n")?;
    let y = covering_situs(&t, 3, &g)?;
    println!("Sierpinski level-2 core: {:?}", y.core_tuples(2));
    let v = compactness_lp(&t, 2, 3, &g)?;
    println!("compact: lifting {} oracle {}", v.holds, v.oracle_holds);
    Ok(())
}
