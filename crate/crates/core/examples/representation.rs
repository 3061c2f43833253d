//! Unary reducts and representation checks.

use situskit::dividing_lines::{em_represents, function_closure, unary_reduct, RepresentMode};
use situskit::filters::SetMap;
use situskit::fostruct::FinStructure;
use situskit::Guard;

fn main() -> situskit::Result<()> {
    let g = Guard::default();
    for table in [vec![0, 0, 2, 2], vec![1, 0, 3, 2]] {
        let mut m = FinStructure::with_size(4);
        m.add_function("f", table.clone())?;
        let words: Vec<String> = function_closure(&m).into_iter().map(|(w, _)| w).collect();
        let i = unary_reduct(&m);
        let ok = em_represents(&i, &m, &SetMap::identity(4), RepresentMode::EmInfinity, 4, None, &g)?;
        println!("f = {table:?}: closure {words:?}, reduct represents: {ok}");
    }
    Ok(())
}
